#include <doctest.h>

#include <filesystem>
#include <fstream>

#include "pam/config.hpp"
#include "pam/errors.hpp"

using nlohmann::json;
using namespace pam;

namespace {

json minimal() {
    return json{{"kappa", 1.0}, {"h", 1.0}, {"potential", {{"variant", "two_point"}, {"a", 1.0}, {"q", 0.5}}}};
}

std::string error_of(const json& j) {
    try {
        parse_config(j);
    } catch (const ConfigError& e) {
        return e.what();
    }
    return {};
}

}  // namespace

TEST_CASE("fnv1a reference vectors") {
    CHECK(fnv1a("") == 0xcbf29ce484222325ULL);
    CHECK(fnv1a("a") == 0xaf63dc4c8601ec8cULL);
    CHECK(fnv1a("foobar") == 0x85944171f73967e8ULL);
}

TEST_CASE("minimal config parses with defaults") {
    const RunConfig c = parse_config(minimal());
    CHECK(c.kappa == 1.0);
    CHECK(c.h == 1.0);
    CHECK(c.seed == 1);
    CHECK(c.threads == 1);
    CHECK(c.annealed.p == std::vector<double>{1.0, 2.0});
    CHECK(c.model()->variant_name() == "two_point");
    CHECK(c.raw == minimal());
}

TEST_CASE("every potential variant parses") {
    std::vector<json> pots = {
        {{"variant", "degenerate"}, {"c", -0.5}},
        {{"variant", "finite_support"}, {"atoms", {0.0, -1.0, -2.0}}, {"weights", {0.2, 0.3, 0.5}}},
        {{"variant", "uniform"}, {"b", -2.0}},
        {{"variant", "markov"}, {"states", {0.0, -1.0}}, {"transition", {{0.9, 0.1}, {0.2, 0.8}}}},
    };
    for (const auto& p : pots) {
        json j = minimal();
        j["potential"] = p;
        CHECK_NOTHROW(parse_config(j).model());
    }
}

TEST_CASE("unknown keys are rejected at every level") {
    json j = minimal();
    j["kapa"] = 1.0;
    CHECK(error_of(j).find("kapa") != std::string::npos);
    j = minimal();
    j["simulate"] = {{"n_path", 10}};
    CHECK(error_of(j).find("n_path") != std::string::npos);
    j = minimal();
    j["potential"]["c"] = -1.0;
    CHECK(error_of(j).find("does not apply") != std::string::npos);
}

TEST_CASE("all violations are collected into one error") {
    json j = minimal();
    j["kappa"] = -1.0;
    j["h"] = 1.5;
    j["threads"] = 0;
    j["annealed"] = {{"methods", {"nope"}}};
    j["potential"]["q"] = 2.0;
    const std::string msg = error_of(j);
    CHECK(msg.rfind("5 configuration errors", 0) == 0);
    for (const char* key : {"kappa", "h", "threads", "methods", "q"}) CHECK(msg.find(key) != std::string::npos);
}

TEST_CASE("missing required keys and wrong types") {
    CHECK(error_of(json::object()).find("kappa") != std::string::npos);
    CHECK(error_of(json::array()).find("object") != std::string::npos);
    json j = minimal();
    j["seed"] = "seven";
    CHECK(error_of(j).find("seed") != std::string::npos);
    j = minimal();
    j["potential"] = {{"variant", "two_point"}, {"a", 1.0}};
    CHECK(error_of(j).find("q") != std::string::npos);
    j = minimal();
    j["potential"]["variant"] = "gaussian";
    CHECK(error_of(j).find("must be one of") != std::string::npos);
}

TEST_CASE("load_config error mapping") {
    CHECK_THROWS_AS(load_config("/nonexistent/dir/config.json"), IoError);
    const auto path = std::filesystem::temp_directory_path() / "pam_bad_config.json";
    {
        std::ofstream(path) << "{ not json";
    }
    CHECK_THROWS_AS(load_config(path), ConfigError);
    {
        std::ofstream(path) << minimal().dump();
    }
    CHECK(load_config(path).raw == minimal());
    std::filesystem::remove(path);
}

TEST_CASE("config hash is deterministic and sensitive") {
    const json a = minimal();
    json b = minimal();
    b["seed"] = 2;
    CHECK(fnv1a(a.dump()) == fnv1a(minimal().dump()));
    CHECK(fnv1a(a.dump()) != fnv1a(b.dump()));
}
