#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>

#include "sme/dataset.hpp"
#include "sme/model.hpp"

namespace sme {

// Binary model container, all integers and doubles little-endian:
//
//   "SME1"                         4 bytes magic
//   version                        u32 (= 1)
//   form                           u8  (0 linear, 1 bilinear)
//   d, p, |C|                      u64 each
//   symbols                        |C| x (u64 byte length, UTF-8 bytes)
//   roles                          |C| x u8 (bit 0 relation type, bit 1 entity)
//   embeddings                     |C| x d f64, row-major
//   linear:   W_left_entity, W_left_relation, W_right_entity, W_right_relation
//             (p x d f64 each, row-major), left_bias, right_bias (p f64 each)
//   bilinear: W_left, W_right (p x d x d f64 each, index (i*d + j)*d + k),
//             left_bias, right_bias
inline constexpr std::uint32_t model_file_version = 1;

struct ModelFile {
    Dictionary dict;
    Model model;
};

void save_model(std::ostream& out, const Dictionary& dict, const Model& model);
void save_model(const std::filesystem::path& path, const Dictionary& dict, const Model& model);

// Throws DataError on bad magic, version mismatch, truncation or
// inconsistent shapes.
ModelFile load_model(std::istream& in);
ModelFile load_model(const std::filesystem::path& path);

}  // namespace sme
