#include <doctest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <regex>
#include <sstream>

#include "pam/errors.hpp"
#include "pam/report.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

const fs::path kDir = fs::temp_directory_path() / "pam_cli_test";

int run(const std::string& args) {
    const std::string cmd = std::string(PAM_CLI_PATH) + " " + args + " >/dev/null 2>&1";
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

fs::path write_config(const std::string& name, const json& j) {
    fs::create_directories(kDir);
    const fs::path p = kDir / name;
    std::ofstream(p) << j.dump();
    return p;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p);
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

std::string without_timestamp(const std::string& s) {
    return std::regex_replace(s, std::regex("\"timestamp\": \"[^\"]*\""), "");
}

json benchmark() {
    return {{"kappa", 1.0},
            {"h", 1.0},
            {"seed", 3},
            {"potential", {{"variant", "two_point"}, {"a", 1.0}, {"q", 0.5}}},
            {"quenched", {{"n_sites", 1000}, {"variational", false}, {"curve_points", 10}}},
            {"simulate",
             {{"t_max", 20.0}, {"n_times", 11}, {"n_paths", 200}, {"n_env", 20}, {"annealed_t_max", 5.0},
              {"gibbs_t", 10.0}, {"branching_runs", 20}}}};
}

}  // namespace

TEST_CASE("exit code mapping") {
    using namespace pam;
    CHECK(exit_code(ConfigError("x")) == 1);
    CHECK(exit_code(PreconditionError("x")) == 1);
    CHECK(exit_code(DivergentFunctional("x")) == 2);
    CHECK(exit_code(InconsistentBracket("x")) == 2);
    CHECK(exit_code(NonStationarySlope("x")) == 2);
    CHECK(exit_code(IoError("x")) == 3);
}

TEST_CASE("cli exit codes") {
    const auto good = write_config("good.json", benchmark());
    json bad = benchmark();
    bad["kappa"] = -1.0;
    bad["typo"] = 1;
    const auto badp = write_config("bad.json", bad);
    CHECK(run("") == 1);
    CHECK(run("quenched") == 1);
    CHECK(run("quenched --config " + good.string() + " --format xml") == 1);
    CHECK(run("quenched --config " + badp.string() + " --out " + (kDir / "b").string()) == 1);
    CHECK_FALSE(fs::exists(kDir / "b"));
    CHECK(run("quenched --config " + (kDir / "missing.json").string()) == 3);
    CHECK(run("quenched --config " + good.string() + " --out /proc/no/such") == 3);
    CHECK(run("report " + (kDir / "missing.csv").string() + " --out " + (kDir / "r0").string()) == 3);
}

TEST_CASE("cli replay is byte-identical apart from the timestamp") {
    const auto cfg = write_config("replay.json", benchmark());
    for (const char* cmd : {"quenched", "simulate"}) {
        const auto a = kDir / (std::string(cmd) + "_a"), b = kDir / (std::string(cmd) + "_b");
        REQUIRE(run(std::string(cmd) + " --config " + cfg.string() + " --out " + a.string()) == 0);
        REQUIRE(run(std::string(cmd) + " --config " + cfg.string() + " --out " + b.string() + " --threads 1") == 0);
        std::size_t files = 0;
        for (const auto& e : fs::directory_iterator(a)) {
            ++files;
            const auto name = e.path().filename();
            if (name == "config.json") continue;  // --threads is recorded in the replay config
            if (name.extension() == ".csv") CHECK(slurp(e.path()) == slurp(b / name));
        }
        CHECK(files >= 4);
        const json ma = json::parse(slurp(a / "manifest.json"));
        CHECK(ma["schema_version"] == pam::kSchemaVersion);
        CHECK(ma["provenance"]["seed"] == 3);
    }
    const auto c = kDir / "quenched_c";
    REQUIRE(run("quenched --config " + cfg.string() + " --out " + c.string()) == 0);
    for (const auto& e : fs::directory_iterator(c))
        CHECK(without_timestamp(slurp(e.path())) == without_timestamp(slurp(kDir / "quenched_a" / e.path().filename())));
}

TEST_CASE("cli seed override and formats") {
    const auto cfg = write_config("seed.json", benchmark());
    const auto s1 = kDir / "seed_1", s2 = kDir / "seed_2";
    REQUIRE(run("simulate --config " + cfg.string() + " --out " + s1.string() + " --format csv") == 0);
    REQUIRE(run("simulate --config " + cfg.string() + " --out " + s2.string() + " --seed 9 --format json") == 0);
    CHECK(fs::exists(s1 / "slope.csv"));
    CHECK_FALSE(fs::exists(s1 / "simulate.json"));
    CHECK(fs::exists(s2 / "simulate.json"));
    CHECK_FALSE(fs::exists(s2 / "slope.csv"));
    CHECK(json::parse(slurp(s2 / "config.json"))["seed"] == 9);
    CHECK(json::parse(slurp(s2 / "manifest.json"))["provenance"]["seed"] == 9);
}

TEST_CASE("cli report plots every row of every table") {
    const auto cfg = write_config("report.json", benchmark());
    const auto q = kDir / "rep_q";
    REQUIRE(run("quenched --config " + cfg.string() + " --out " + q.string()) == 0);
    const auto out = kDir / "rep_svg";
    REQUIRE(run("report " + (q / "L_curve.csv").string() + " --out " + out.string()) == 0);
    const std::string svg = slurp(out / "L_curve.svg");
    const auto table = pam::read_csv(q / "L_curve.csv");
    const std::regex re("data-y=\"([^\"]*)\"");
    std::size_t series = 0;
    for (auto it = std::sregex_iterator(svg.begin(), svg.end(), re); it != std::sregex_iterator(); ++it, ++series) {
        std::istringstream is((*it)[1].str());
        std::vector<std::string> ys;
        for (std::string w; is >> w;) ys.push_back(w);
        CHECK(ys.size() == table.rows.size());
    }
    CHECK(series == table.columns.size() - 1);
    fs::remove_all(kDir);
}
