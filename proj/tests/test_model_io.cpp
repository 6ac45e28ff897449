#include <doctest.h>

#include <random>
#include <sstream>

#include "oracles.hpp"
#include "sme/errors.hpp"
#include "sme/model_io.hpp"

using namespace sme;

namespace {

Dictionary small_dictionary() {
    return Dictionary::from_parts({"alpha", "beta", "likes", "gamma"},
                                  {role_entity, role_entity | role_relation, role_relation, role_entity});
}

std::string saved_bytes(const Dictionary& dict, const Model& m) {
    std::ostringstream out;
    save_model(out, dict, m);
    return out.str();
}

}  // namespace

TEST_CASE("model files round trip bitwise") {
    std::mt19937_64 rng(17);
    const Dictionary dict = small_dictionary();
    for (Form form : {Form::linear, Form::bilinear}) {
        CAPTURE(to_string(form));
        const Model m = oracle::random_model(form, dict.size(), 3, 2, rng);
        const std::string bytes = saved_bytes(dict, m);
        std::istringstream in(bytes);
        const ModelFile back = load_model(in);
        CHECK(back.model == m);
        CHECK(back.dict == dict);
        CHECK(saved_bytes(back.dict, back.model) == bytes);
    }
}

TEST_CASE("corrupted model files are rejected") {
    std::mt19937_64 rng(3);
    const Dictionary dict = small_dictionary();
    const std::string good = saved_bytes(dict, oracle::random_model(Form::linear, dict.size(), 2, 2, rng));
    const auto load = [](std::string bytes) {
        std::istringstream in(bytes);
        return load_model(in);
    };

    SUBCASE("bad magic") {
        std::string bytes = good;
        bytes[0] = 'X';
        CHECK_THROWS_AS(load(bytes), DataError);
    }
    SUBCASE("unknown version") {
        std::string bytes = good;
        bytes[4] = 7;
        CHECK_THROWS_AS(load(bytes), DataError);
    }
    SUBCASE("truncated") {
        CHECK_THROWS_AS(load(good.substr(0, good.size() - 3)), DataError);
        CHECK_THROWS_AS(load(good.substr(0, 10)), DataError);
    }
    SUBCASE("trailing bytes") {
        CHECK_THROWS_AS(load(good + "x"), DataError);
    }
    SUBCASE("unknown form") {
        std::string bytes = good;
        bytes[8] = 9;
        CHECK_THROWS_AS(load(bytes), DataError);
    }
}

TEST_CASE("missing model file") {
    CHECK_THROWS_AS(load_model(std::filesystem::path("/nonexistent/model.sme")), DataError);
}
