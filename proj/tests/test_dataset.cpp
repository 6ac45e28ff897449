#include <doctest.h>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <set>
#include <sstream>

#include "sme/dataset.hpp"
#include "sme/errors.hpp"

using namespace sme;

namespace {

Dataset parse(const std::string& text) {
    std::istringstream in(text);
    return load_triples(in, "mem");
}

TripleSet numbered_records(std::size_t n) {
    TripleSet out;
    for (std::size_t i = 0; i < n; ++i)
        out.push_back({{static_cast<SymbolId>(i), 0, static_cast<SymbolId>(i + 1)}, static_cast<std::uint8_t>(i % 3 == 0)});
    return out;
}

}  // namespace

TEST_CASE("load_triples builds the dictionary") {
    const Dataset d = parse(
        "# comment\n"
        "alice\tknows\tbob\t1\n"
        "\n"
        "bob\tlikes\tcarol\t0\r\n"
        "carol\tknows\talice\t1\n");
    CHECK(d.records.size() == 3);
    CHECK(d.dict.size() == 5);
    CHECK(d.dict.entity_count() == 3);
    CHECK(d.dict.relation_count() == 2);
    CHECK(d.dict.is_relation(d.dict.at("knows")));
    CHECK_FALSE(d.dict.is_entity(d.dict.at("knows")));
    CHECK(d.dict.symbol(0) == "alice");
    CHECK(d.records[1].label == 0);
    CHECK(d.records[1].triple == Triple{d.dict.at("bob"), d.dict.at("likes"), d.dict.at("carol")});
    CHECK(count_positives(d.records) == 2);
}

TEST_CASE("a symbol may be both an entity and a relation type") {
    const Dataset d = parse("a\tr\tb\t1\nr\ta\tb\t0\n");
    const SymbolId r = d.dict.at("r");
    CHECK(d.dict.is_relation(r));
    CHECK(d.dict.is_entity(r));
    CHECK(d.dict.entity_count() == 3);
    CHECK(d.dict.relation_count() == 2);
}

TEST_CASE("load_triples errors") {
    SUBCASE("too few fields") {
        CHECK_THROWS_WITH_AS(parse("a\tb\tc\n"), doctest::Contains("mem:1"), ParseError);
    }
    SUBCASE("too many fields") {
        CHECK_THROWS_AS(parse("a\tb\tc\t1\textra\n"), ParseError);
    }
    SUBCASE("bad label reports the line") {
        CHECK_THROWS_WITH_AS(parse("a\tb\tc\t1\na\tb\td\t2\n"), doctest::Contains("mem:2"), ParseError);
    }
    SUBCASE("empty symbol") {
        CHECK_THROWS_AS(parse("a\t\tc\t1\n"), ParseError);
    }
    SUBCASE("duplicate triple") {
        CHECK_THROWS_AS(parse("a\tb\tc\t1\na\tb\tc\t0\n"), IntegrityError);
    }
    SUBCASE("empty input") {
        CHECK_THROWS_AS(parse("# nothing\n"), IntegrityError);
    }
    SUBCASE("missing file") {
        CHECK_THROWS_AS(load_triples(std::filesystem::path("/nonexistent/triples.tsv")), DataError);
    }
}

TEST_CASE("fixed dictionary policy rejects unknown symbols") {
    const Dataset base = parse("a\tr\tb\t1\n");
    std::istringstream in("a\tr\tb\t0\nb\tr\tz\t1\n");
    CHECK_THROWS_AS(load_triples(in, "mem", DictPolicy::fixed, base.dict), LookupError);
    std::istringstream ok("b\tr\ta\t1\n");
    const Dataset d = load_triples(ok, "mem", DictPolicy::fixed, base.dict);
    CHECK(d.dict == base.dict);
    CHECK(d.records[0].triple == Triple{base.dict.at("b"), base.dict.at("r"), base.dict.at("a")});
}

TEST_CASE("write then reload keeps ids, labels and folds") {
    const Dataset d = parse("x\tr1\ty\t1\ny\tr2\tz\t0\nz\tr1\tx\t0\nx\tr2\tz\t1\n");
    std::ostringstream out;
    write_triples(out, d.dict, d.records);
    const Dataset back = parse(out.str());
    CHECK(back.dict == d.dict);
    CHECK(back.records == d.records);
    CHECK(make_folds(back.records.size(), 2, 5).assignment() == make_folds(d.records.size(), 2, 5).assignment());
}

TEST_CASE("Dictionary::from_parts") {
    const auto dict = Dictionary::from_parts({"a", "r", "b"}, {role_entity, role_relation, role_entity});
    CHECK(dict.at("r") == 1);
    CHECK(dict.relation_count() == 1);
    CHECK(std::ranges::equal(dict.entities(), std::vector<SymbolId>{0, 2}));
    CHECK_THROWS_AS(Dictionary::from_parts({"a", "a"}, {role_entity, role_entity}), IntegrityError);
    CHECK_THROWS_AS(dict.at("missing"), LookupError);
}

TEST_CASE("positives_of") {
    TripleSet none = numbered_records(4);
    for (auto& r : none) r.label = 0;
    CHECK(positives_of(none).empty());

    TripleSet mixed = numbered_records(10);
    for (auto& r : mixed) r.label = 0;
    mixed[2].label = mixed[5].label = mixed[9].label = 1;
    const TripleSet pos = positives_of(mixed);
    REQUIRE(pos.size() == 3);
    CHECK(pos[0] == mixed[2]);
    CHECK(pos[1] == mixed[5]);
    CHECK(pos[2] == mixed[9]);
}

TEST_CASE("make_folds") {
    SUBCASE("forced sizes") {
        const FoldSplit s = make_folds(4, 2, 0);
        CHECK(s.fold_size(0) == 2);
        CHECK(s.fold_size(1) == 2);
    }
    SUBCASE("deterministic per seed") {
        CHECK(make_folds(100, 10, 3).assignment() == make_folds(100, 10, 3).assignment());
        CHECK(make_folds(100, 10, 3).assignment() != make_folds(100, 10, 4).assignment());
    }
    SUBCASE("large record count") {
        const FoldSplit s = make_folds(893025, 10, 1);
        std::size_t total = 0;
        for (std::size_t f = 0; f < 10; ++f) {
            const auto n = s.fold_size(f);
            CHECK((n == 89302 || n == 89303));
            total += n;
        }
        CHECK(total == 893025);
    }
    SUBCASE("config errors") {
        CHECK_THROWS_AS(make_folds(3, 4, 0), ConfigError);
        CHECK_THROWS_AS(make_folds(10, 1, 0), ConfigError);
    }
}

TEST_CASE("fold views partition the records") {
    const TripleSet records = numbered_records(23);
    const FoldSplit split = make_folds(records.size(), 5, 11);
    std::multiset<SymbolId> tested;
    for (std::size_t f = 0; f < 5; ++f) {
        const TripleSet test = split.test(records, f);
        const TripleSet valid = split.valid(records, f);
        const TripleSet train = split.train(records, f);
        CHECK(test.size() + valid.size() + train.size() == records.size());
        CHECK(valid == split.test(records, (f + 1) % 5));
        std::set<SymbolId> seen;
        for (const auto* part : {&test, &valid, &train})
            for (const auto& r : *part) CHECK(seen.insert(r.triple.lhs).second);
        for (const auto& r : test) tested.insert(r.triple.lhs);
    }
    // every record is a test record exactly once
    CHECK(tested.size() == records.size());
    for (SymbolId i = 0; i < records.size(); ++i) CHECK(tested.count(i) == 1);
}

TEST_CASE("read_manifest") {
    const auto dir = std::filesystem::temp_directory_path() / "sme_manifest_test";
    std::filesystem::create_directories(dir);
    const auto path = dir / "toy.manifest";
    {
        std::ofstream out(path);
        out << "# toy dataset\nname = toy\ntriples = toy.tsv\nfolds = 4\nseed = 99\nlr = 0.5\n";
    }
    const Manifest m = read_manifest(path);
    CHECK(m.name == "toy");
    CHECK(m.triples == dir / "toy.tsv");
    CHECK(m.folds == 4);
    CHECK(m.seed == 99);
    CHECK(m.settings.at("lr") == "0.5");

    {
        std::ofstream out(path);
        out << "folds = ten\ntriples = a.tsv\n";
    }
    CHECK_THROWS_AS(read_manifest(path), ConfigError);
    {
        std::ofstream out(path);
        out << "folds = 3\n";
    }
    CHECK_THROWS_AS(read_manifest(path), ConfigError);
    CHECK_THROWS_AS(read_manifest(dir / "missing.manifest"), ConfigError);
    std::filesystem::remove_all(dir);
}
