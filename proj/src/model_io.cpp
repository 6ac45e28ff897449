#include "sme/model_io.hpp"

#include <array>
#include <bit>
#include <cstring>
#include <fstream>
#include <istream>
#include <limits>
#include <ostream>
#include <string>

namespace sme {

namespace {

constexpr std::array<char, 4> magic = {'S', 'M', 'E', '1'};

// Guards against allocating absurd sizes from a corrupt header.
constexpr std::uint64_t max_count = std::uint64_t{1} << 32;

class Writer {
public:
    explicit Writer(std::ostream& out) : out_(out) {}

    void bytes(const void* data, std::size_t n) { out_.write(static_cast<const char*>(data), static_cast<std::streamsize>(n)); }

    template <typename T>
    void integer(T v) {
        unsigned char buf[sizeof(T)];
        for (std::size_t i = 0; i < sizeof(T); ++i) buf[i] = static_cast<unsigned char>(static_cast<std::uint64_t>(v) >> (8 * i));
        bytes(buf, sizeof buf);
    }

    void reals(std::span<const double> values) {
        for (double v : values) integer(std::bit_cast<std::uint64_t>(v));
    }

private:
    std::ostream& out_;
};

class Reader {
public:
    explicit Reader(std::istream& in) : in_(in) {}

    void bytes(void* data, std::size_t n) {
        in_.read(static_cast<char*>(data), static_cast<std::streamsize>(n));
        if (static_cast<std::size_t>(in_.gcount()) != n) throw DataError("model file: truncated");
    }

    template <typename T>
    T integer() {
        unsigned char buf[sizeof(T)];
        bytes(buf, sizeof buf);
        std::uint64_t v = 0;
        for (std::size_t i = 0; i < sizeof(T); ++i) v |= static_cast<std::uint64_t>(buf[i]) << (8 * i);
        return static_cast<T>(v);
    }

    void reals(std::span<double> values) {
        for (double& v : values) v = std::bit_cast<double>(integer<std::uint64_t>());
    }

    std::uint64_t count(const char* what) {
        const auto v = integer<std::uint64_t>();
        if (v > max_count) throw DataError(std::string("model file: implausible ") + what);
        return v;
    }

private:
    std::istream& in_;
};

}  // namespace

void save_model(std::ostream& out, const Dictionary& dict, const Model& model) {
    if (dict.size() != model.embeddings.size())
        throw ShapeError("dictionary size differs from embedding table size");
    Writer w(out);
    w.bytes(magic.data(), magic.size());
    w.integer<std::uint32_t>(model_file_version);
    w.integer<std::uint8_t>(static_cast<std::uint8_t>(model.form()));
    w.integer<std::uint64_t>(model.dim_d());
    w.integer<std::uint64_t>(model.dim_p());
    w.integer<std::uint64_t>(dict.size());
    for (const auto& s : dict.symbols()) {
        w.integer<std::uint64_t>(s.size());
        w.bytes(s.data(), s.size());
    }
    for (auto role : dict.role_table()) w.integer<std::uint8_t>(role);
    w.reals(model.embeddings.matrix().values());
    if (const auto* lin = std::get_if<LinearParams>(&model.params)) {
        w.reals(lin->w_left_entity.values());
        w.reals(lin->w_left_relation.values());
        w.reals(lin->w_right_entity.values());
        w.reals(lin->w_right_relation.values());
        w.reals(lin->left_bias.span());
        w.reals(lin->right_bias.span());
    } else {
        const auto& bil = std::get<BilinearParams>(model.params);
        w.reals(bil.w_left.values());
        w.reals(bil.w_right.values());
        w.reals(bil.left_bias.span());
        w.reals(bil.right_bias.span());
    }
    if (!out) throw DataError("model file: write failure");
}

void save_model(const std::filesystem::path& path, const Dictionary& dict, const Model& model) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw DataError("cannot open " + path.string() + " for writing");
    save_model(out, dict, model);
}

ModelFile load_model(std::istream& in) {
    Reader r(in);
    std::array<char, 4> got{};
    r.bytes(got.data(), got.size());
    if (got != magic) throw DataError("model file: bad magic (not an SME model)");
    const auto version = r.integer<std::uint32_t>();
    if (version != model_file_version)
        throw DataError("model file: unsupported version " + std::to_string(version));
    const auto form_tag = r.integer<std::uint8_t>();
    if (form_tag > 1) throw DataError("model file: unknown form tag " + std::to_string(form_tag));
    const auto form = static_cast<Form>(form_tag);
    const auto d = r.count("d");
    const auto p = r.count("p");
    const auto n = r.count("symbol count");
    if (d == 0 || p == 0) throw DataError("model file: zero dimension");

    std::vector<std::string> symbols(n);
    for (auto& s : symbols) {
        s.resize(r.count("symbol length"));
        r.bytes(s.data(), s.size());
    }
    std::vector<std::uint8_t> roles(n);
    for (auto& role : roles) role = r.integer<std::uint8_t>();

    ModelFile file{Dictionary::from_parts(std::move(symbols), std::move(roles)),
                   Model{EmbeddingTable(n, d), zero_params(form, p, d)}};
    r.reals(file.model.embeddings.matrix().values());
    if (auto* lin = std::get_if<LinearParams>(&file.model.params)) {
        r.reals(lin->w_left_entity.values());
        r.reals(lin->w_left_relation.values());
        r.reals(lin->w_right_entity.values());
        r.reals(lin->w_right_relation.values());
        r.reals(lin->left_bias.span());
        r.reals(lin->right_bias.span());
    } else {
        auto& bil = std::get<BilinearParams>(file.model.params);
        r.reals(bil.w_left.values());
        r.reals(bil.w_right.values());
        r.reals(bil.left_bias.span());
        r.reals(bil.right_bias.span());
    }
    if (in.peek() != std::char_traits<char>::eof()) throw DataError("model file: trailing bytes");
    return file;
}

ModelFile load_model(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open model file " + path.string());
    return load_model(in);
}

}  // namespace sme
