#pragma once

#include <compare>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace sme {

using SymbolId = std::uint32_t;

struct Triple {
    SymbolId lhs = 0;
    SymbolId rel = 0;
    SymbolId rhs = 0;

    auto operator<=>(const Triple&) const = default;
};

struct Record {
    Triple triple;
    std::uint8_t label = 0;

    bool operator==(const Record&) const = default;
};

using TripleSet = std::vector<Record>;

// Role bits stored per symbol. A symbol may carry both: relation types live
// in the same dictionary (and embedding space) as entities.
enum RoleBits : std::uint8_t {
    role_relation = 1u << 0,
    role_entity = 1u << 1,
};

// Bijection between symbol strings and ids [0, size()).
class Dictionary {
public:
    Dictionary() = default;

    // Rebuilds a dictionary from its serialized parts; rejects duplicates.
    static Dictionary from_parts(std::vector<std::string> symbols, std::vector<std::uint8_t> roles);

    SymbolId intern(std::string_view symbol, std::uint8_t role);

    std::optional<SymbolId> find(std::string_view symbol) const;
    // Throws LookupError for an out-of-dictionary symbol.
    SymbolId at(std::string_view symbol) const;

    const std::string& symbol(SymbolId id) const;
    std::uint8_t roles(SymbolId id) const;
    bool is_relation(SymbolId id) const { return (roles(id) & role_relation) != 0; }
    bool is_entity(SymbolId id) const { return (roles(id) & role_entity) != 0; }

    std::size_t size() const { return symbols_.size(); }
    std::size_t relation_count() const { return relations_.size(); }
    std::size_t entity_count() const { return entities_.size(); }

    // Ids carrying the entity role, ascending.
    std::span<const SymbolId> entities() const { return entities_; }
    // Ids carrying the relation-type role, ascending.
    std::span<const SymbolId> relations() const { return relations_; }
    const std::vector<std::string>& symbols() const { return symbols_; }
    const std::vector<std::uint8_t>& role_table() const { return roles_; }

    bool operator==(const Dictionary& other) const {
        return symbols_ == other.symbols_ && roles_ == other.roles_;
    }

private:
    void rebuild_role_lists();

    std::vector<std::string> symbols_;
    std::vector<std::uint8_t> roles_;
    std::unordered_map<std::string, SymbolId> index_;
    std::vector<SymbolId> entities_;
    std::vector<SymbolId> relations_;
};

struct Dataset {
    Dictionary dict;
    TripleSet records;
};

enum class DictPolicy {
    extend,  // unseen symbols are added
    fixed,   // unseen symbols raise LookupError
};

// Reads `<lhs>\t<rel>\t<rhs>\t<label>` lines; `#` lines and blank lines are
// skipped. With DictPolicy::fixed the given dictionary is used as is.
Dataset load_triples(std::istream& in, const std::string& source_name,
                     DictPolicy policy = DictPolicy::extend, Dictionary dict = {});
Dataset load_triples(const std::filesystem::path& path, DictPolicy policy = DictPolicy::extend,
                     Dictionary dict = {});

// Inverse of load_triples: writes records in order, so reloading yields the
// same dictionary ids.
void write_triples(std::ostream& out, const Dictionary& dict, const TripleSet& records);

TripleSet positives_of(const TripleSet& records);

std::size_t count_positives(const TripleSet& records);

// K-fold partition of a record set. Per fold i: test = fold i,
// valid = fold (i + 1) mod K, train = every other fold.
class FoldSplit {
public:
    FoldSplit(std::size_t folds, std::vector<std::uint32_t> assignment);

    std::size_t fold_count() const { return folds_; }
    std::size_t fold_size(std::size_t fold) const;
    const std::vector<std::uint32_t>& assignment() const { return assignment_; }

    std::size_t valid_fold(std::size_t fold) const { return (fold + 1) % folds_; }

    TripleSet test(const TripleSet& records, std::size_t fold) const;
    TripleSet valid(const TripleSet& records, std::size_t fold) const;
    TripleSet train(const TripleSet& records, std::size_t fold) const;

private:
    TripleSet select(const TripleSet& records, std::size_t fold, bool train_side) const;

    std::size_t folds_;
    std::vector<std::uint32_t> assignment_;
};

// Seeded uniform permutation of the record positions, sliced into `folds`
// contiguous chunks whose sizes differ by at most one.
FoldSplit make_folds(std::size_t record_count, std::size_t folds, std::uint64_t seed);

// Dataset manifest: `key = value` lines naming the triple file, fold count and
// seed. Keys other than name/triples/folds/seed are kept as configuration
// overrides for the CLI.
struct Manifest {
    std::string name;
    std::filesystem::path triples;
    std::size_t folds = 10;
    std::uint64_t seed = 0;
    std::map<std::string, std::string> settings;
};

Manifest read_manifest(const std::filesystem::path& path);

}  // namespace sme
