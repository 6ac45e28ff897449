#include "sme/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <istream>
#include <numeric>
#include <ostream>
#include <random>
#include <unordered_set>

#include "sme/errors.hpp"

namespace sme {

namespace {

struct TripleHash {
    std::size_t operator()(const Triple& t) const {
        std::uint64_t h = t.lhs;
        h = h * 0x9E3779B97F4A7C15ull + t.rel;
        h = h * 0x9E3779B97F4A7C15ull + t.rhs;
        return static_cast<std::size_t>(h ^ (h >> 29));
    }
};

std::string_view trim(std::string_view s) {
    const auto first = s.find_first_not_of(" \t\r\n");
    if (first == std::string_view::npos) return {};
    const auto last = s.find_last_not_of(" \t\r\n");
    return s.substr(first, last - first + 1);
}

template <typename T>
T parse_number(std::string_view text, const std::string& what) {
    T value{};
    const auto* end = text.data() + text.size();
    const auto [ptr, ec] = std::from_chars(text.data(), end, value);
    if (ec != std::errc() || ptr != end) throw ConfigError(what + ": not a valid number '" + std::string(text) + "'");
    return value;
}

}  // namespace

Dictionary Dictionary::from_parts(std::vector<std::string> symbols, std::vector<std::uint8_t> roles) {
    if (symbols.size() != roles.size()) throw IntegrityError("dictionary: symbol and role tables differ in length");
    Dictionary dict;
    for (std::size_t i = 0; i < symbols.size(); ++i) {
        if (symbols[i].empty()) throw IntegrityError("dictionary: empty symbol");
        if (!dict.index_.emplace(symbols[i], static_cast<SymbolId>(i)).second)
            throw IntegrityError("dictionary: duplicate symbol '" + symbols[i] + "'");
    }
    dict.symbols_ = std::move(symbols);
    dict.roles_ = std::move(roles);
    dict.rebuild_role_lists();
    return dict;
}

SymbolId Dictionary::intern(std::string_view symbol, std::uint8_t role) {
    std::string key(symbol);
    auto it = index_.find(key);
    SymbolId id;
    if (it == index_.end()) {
        id = static_cast<SymbolId>(symbols_.size());
        index_.emplace(key, id);
        symbols_.push_back(std::move(key));
        roles_.push_back(0);
    } else {
        id = it->second;
    }
    const std::uint8_t before = roles_[id];
    roles_[id] |= role;
    if ((role & role_relation) && !(before & role_relation))
        relations_.insert(std::upper_bound(relations_.begin(), relations_.end(), id), id);
    if ((role & role_entity) && !(before & role_entity))
        entities_.insert(std::upper_bound(entities_.begin(), entities_.end(), id), id);
    return id;
}

std::optional<SymbolId> Dictionary::find(std::string_view symbol) const {
    auto it = index_.find(std::string(symbol));
    if (it == index_.end()) return std::nullopt;
    return it->second;
}

SymbolId Dictionary::at(std::string_view symbol) const {
    if (auto id = find(symbol)) return *id;
    throw LookupError("out-of-dictionary symbol '" + std::string(symbol) + "'");
}

const std::string& Dictionary::symbol(SymbolId id) const {
    if (id >= symbols_.size()) throw LookupError("symbol id " + std::to_string(id) + " out of range");
    return symbols_[id];
}

std::uint8_t Dictionary::roles(SymbolId id) const {
    if (id >= roles_.size()) throw LookupError("symbol id " + std::to_string(id) + " out of range");
    return roles_[id];
}

void Dictionary::rebuild_role_lists() {
    entities_.clear();
    relations_.clear();
    for (std::size_t i = 0; i < roles_.size(); ++i) {
        if (roles_[i] & role_entity) entities_.push_back(static_cast<SymbolId>(i));
        if (roles_[i] & role_relation) relations_.push_back(static_cast<SymbolId>(i));
    }
}

Dataset load_triples(std::istream& in, const std::string& source_name, DictPolicy policy, Dictionary dict) {
    Dataset out;
    out.dict = std::move(dict);
    std::unordered_set<Triple, TripleHash> seen;
    std::string line;
    std::size_t line_no = 0;

    auto where = [&] { return source_name + ":" + std::to_string(line_no) + ": "; };

    while (std::getline(in, line)) {
        ++line_no;
        std::string_view view(line);
        if (!view.empty() && view.back() == '\r') view.remove_suffix(1);
        if (view.empty() || view.front() == '#') continue;

        std::string_view fields[4];
        std::size_t count = 0;
        std::size_t start = 0;
        while (true) {
            const auto tab = view.find('\t', start);
            if (count == 4) throw ParseError(where() + "expected 4 tab-separated fields, got more");
            fields[count++] = view.substr(start, tab == std::string_view::npos ? tab : tab - start);
            if (tab == std::string_view::npos) break;
            start = tab + 1;
        }
        if (count != 4)
            throw ParseError(where() + "expected 4 tab-separated fields, got " + std::to_string(count));
        for (std::size_t i = 0; i < 3; ++i)
            if (fields[i].empty()) throw ParseError(where() + "empty symbol in field " + std::to_string(i + 1));
        const auto label_text = trim(fields[3]);
        if (label_text != "0" && label_text != "1")
            throw ParseError(where() + "label must be 0 or 1, got '" + std::string(fields[3]) + "'");

        Record rec;
        rec.label = label_text == "1" ? 1 : 0;
        if (policy == DictPolicy::extend) {
            rec.triple.lhs = out.dict.intern(fields[0], role_entity);
            rec.triple.rel = out.dict.intern(fields[1], role_relation);
            rec.triple.rhs = out.dict.intern(fields[2], role_entity);
        } else {
            try {
                rec.triple = {out.dict.at(fields[0]), out.dict.at(fields[1]), out.dict.at(fields[2])};
            } catch (const LookupError& e) {
                throw LookupError(where() + e.what());
            }
        }
        if (!seen.insert(rec.triple).second)
            throw IntegrityError(where() + "duplicate triple (" + std::string(fields[0]) + ", " +
                                 std::string(fields[1]) + ", " + std::string(fields[2]) + ")");
        out.records.push_back(rec);
    }
    if (in.bad()) throw DataError(source_name + ": read failure");
    if (out.records.empty()) throw IntegrityError(source_name + ": no records");
    return out;
}

Dataset load_triples(const std::filesystem::path& path, DictPolicy policy, Dictionary dict) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open triple file " + path.string());
    return load_triples(in, path.string(), policy, std::move(dict));
}

void write_triples(std::ostream& out, const Dictionary& dict, const TripleSet& records) {
    for (const auto& r : records) {
        out << dict.symbol(r.triple.lhs) << '\t' << dict.symbol(r.triple.rel) << '\t'
            << dict.symbol(r.triple.rhs) << '\t' << static_cast<int>(r.label) << '\n';
    }
}

TripleSet positives_of(const TripleSet& records) {
    TripleSet out;
    std::copy_if(records.begin(), records.end(), std::back_inserter(out),
                 [](const Record& r) { return r.label == 1; });
    return out;
}

std::size_t count_positives(const TripleSet& records) {
    return static_cast<std::size_t>(
        std::count_if(records.begin(), records.end(), [](const Record& r) { return r.label == 1; }));
}

FoldSplit::FoldSplit(std::size_t folds, std::vector<std::uint32_t> assignment)
    : folds_(folds), assignment_(std::move(assignment)) {
    if (folds_ < 2) throw ConfigError("fold count must be at least 2");
    for (auto f : assignment_)
        if (f >= folds_) throw IntegrityError("fold assignment out of range");
}

std::size_t FoldSplit::fold_size(std::size_t fold) const {
    return static_cast<std::size_t>(std::count(assignment_.begin(), assignment_.end(), fold));
}

TripleSet FoldSplit::select(const TripleSet& records, std::size_t fold, bool train_side) const {
    if (records.size() != assignment_.size())
        throw IntegrityError("fold split covers " + std::to_string(assignment_.size()) + " records, data has " +
                             std::to_string(records.size()));
    if (fold >= folds_) throw ConfigError("fold index " + std::to_string(fold) + " out of range");
    const std::size_t valid = valid_fold(fold);
    TripleSet out;
    for (std::size_t i = 0; i < records.size(); ++i) {
        const auto f = assignment_[i];
        const bool keep = train_side ? (f != fold && f != valid) : f == fold;
        if (keep) out.push_back(records[i]);
    }
    return out;
}

TripleSet FoldSplit::test(const TripleSet& records, std::size_t fold) const { return select(records, fold, false); }

TripleSet FoldSplit::valid(const TripleSet& records, std::size_t fold) const {
    if (fold >= folds_) throw ConfigError("fold index " + std::to_string(fold) + " out of range");
    return select(records, valid_fold(fold), false);
}

TripleSet FoldSplit::train(const TripleSet& records, std::size_t fold) const { return select(records, fold, true); }

FoldSplit make_folds(std::size_t record_count, std::size_t folds, std::uint64_t seed) {
    if (folds < 2) throw ConfigError("fold count must be at least 2");
    if (folds > record_count)
        throw ConfigError("fold count " + std::to_string(folds) + " exceeds record count " +
                          std::to_string(record_count));
    std::vector<std::uint32_t> order(record_count);
    std::iota(order.begin(), order.end(), 0u);
    std::mt19937_64 rng(seed);
    std::shuffle(order.begin(), order.end(), rng);

    std::vector<std::uint32_t> assignment(record_count);
    const std::size_t base = record_count / folds;
    const std::size_t extra = record_count % folds;
    std::size_t pos = 0;
    for (std::size_t f = 0; f < folds; ++f) {
        const std::size_t size = base + (f < extra ? 1 : 0);
        for (std::size_t i = 0; i < size; ++i) assignment[order[pos++]] = static_cast<std::uint32_t>(f);
    }
    return FoldSplit(folds, std::move(assignment));
}

Manifest read_manifest(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open manifest " + path.string());
    Manifest m;
    m.name = path.stem().string();
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const auto view = trim(line);
        if (view.empty() || view.front() == '#') continue;
        const auto eq = view.find('=');
        const std::string where = path.string() + ":" + std::to_string(line_no);
        if (eq == std::string_view::npos) throw ConfigError(where + ": expected key = value");
        const std::string key(trim(view.substr(0, eq)));
        const std::string value(trim(view.substr(eq + 1)));
        if (key.empty() || value.empty()) throw ConfigError(where + ": expected key = value");
        if (key == "name") {
            m.name = value;
        } else if (key == "triples") {
            std::filesystem::path p(value);
            m.triples = p.is_absolute() ? p : path.parent_path() / p;
        } else if (key == "folds") {
            m.folds = parse_number<std::size_t>(value, where + ": folds");
        } else if (key == "seed") {
            m.seed = parse_number<std::uint64_t>(value, where + ": seed");
        } else {
            m.settings[key] = value;
        }
    }
    if (m.triples.empty()) throw ConfigError(path.string() + ": manifest does not name a triples file");
    return m;
}

}  // namespace sme
