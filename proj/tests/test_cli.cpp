#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "bdex/config.hpp"
#include "bdex/experiments.hpp"

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <sys/wait.h>

using namespace bdex;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
    std::ifstream is(p, std::ios::binary);
    std::stringstream ss;
    ss << is.rdbuf();
    return ss.str();
}

fs::path scratch(const std::string& name) {
    const auto dir = fs::temp_directory_path() / ("bdex_cli_" + name);
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

int run_cli(const std::string& args) {
    const std::string cmd = std::string(BDEX_CLI_PATH) + " " + args + " > /dev/null 2>&1";
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

ExperimentConfig small_rate_eval() {
    auto c = load_config(std::string(BDEX_CONFIG_DIR) + "/rate-eval.json");
    return apply_overrides(c, {"grid.M1=15", "grid.Mp=4", "grid.stride=2", "run.T=0.05"});
}

ExperimentConfig small_oracle_check() {
    auto c = load_config(std::string(BDEX_CONFIG_DIR) + "/oracle-check.json");
    const std::string fx = std::string(BDEX_FIXTURE_DIR) + "/d1_N2.json";
    return apply_overrides(c, {"oracle.fixtures=[\"" + fx + "\"]", "run.replicas=4", "run.T=5"});
}

}  // namespace

TEST_CASE("shipped configs round trip") {
    for (const auto& name : experiment_names()) {
        const auto c = load_config(std::string(BDEX_CONFIG_DIR) + "/" + name + ".json");
        CHECK(c.experiment == name);
        const auto j = to_json(c);
        const auto again = config_from_json(j);
        CHECK(to_json(again) == j);
        CHECK(config_hash(again) == config_hash(c));
    }
}

TEST_CASE("unknown keys and bad values are rejected") {
    const auto base = to_json(load_config(std::string(BDEX_CONFIG_DIR) + "/hydrostatics.json"));
    auto top = base;
    top["colour"] = 1;
    CHECK_THROWS_AS((void)config_from_json(top), ConfigError);
    auto nested = base;
    nested["run"]["replica"] = 3;
    CHECK_THROWS_AS((void)config_from_json(nested), ConfigError);
    auto typed = base;
    typed["run"]["T"] = "long";
    CHECK_THROWS_AS((void)config_from_json(typed), ConfigError);
    for (const char* o : {"params.a=-0.6", "params.b_minus=1.0", "geometry.d=0", "run.replicas=0",
                          "run.burn_in=1000", "experiment=\"nonsense\"", "grid.stride=0", "initial.kind=\"wave\""}) {
        CAPTURE(o);
        CHECK_THROWS_AS((void)apply_overrides(config_from_json(base), {o}), ConfigError);
    }
    CHECK_THROWS_AS((void)load_config("/nonexistent/config.json"), ConfigError);
}

TEST_CASE("overrides") {
    const auto c = load_config(std::string(BDEX_CONFIG_DIR) + "/ficks-law.json");
    const auto o = apply_overrides(c, {"run.seed=99", "params.a=0.25", "output=elsewhere", "geometry.N=12"});
    CHECK(o.run.seed == 99);
    CHECK(o.params.a == 0.25);
    CHECK(o.output == "elsewhere");
    CHECK(o.N == 12);
    CHECK(config_hash(o) != config_hash(c));
    CHECK_THROWS_AS((void)apply_overrides(c, {"run.seeds=3"}), ConfigError);
    CHECK_THROWS_AS((void)apply_overrides(c, {"noequals"}), ConfigError);
    // Boundary profiles accept the structured form.
    const auto m = apply_overrides(
        c, {"params.b_minus={\"constant\":0.6,\"modes\":[{\"wave\":[1],\"cos\":0.1,\"sin\":0.05}]}"});
    CHECK(m.params.b_minus.modes().size() == 1);
    CHECK(config_from_json(to_json(m)).params.b_minus.modes()[0].sin_amp == 0.05);
}

TEST_CASE("hashing") {
    // FNV-1a 64-bit reference values.
    CHECK(fnv1a64("") == 0xcbf29ce484222325ULL);
    CHECK(fnv1a64("a") == 0xaf63dc4c8601ec8cULL);
    CHECK(fnv1a64("foobar") == 0x85944171f73967e8ULL);
    const auto c = load_config(std::string(BDEX_CONFIG_DIR) + "/tilted.json");
    CHECK(config_hash(c).size() == 16);
    CHECK(config_hash(c) == config_hash(config_from_json(to_json(c))));
}

TEST_CASE("CSV formatting") {
    const nlohmann::json header{{"experiment", "x"}};
    Table empty{"empty", {"k", "value"}, {}};
    CHECK(format_csv(empty, header) == "# {\"experiment\":\"x\"}\nk,value\n");
    Table t{"t", {"a", "b"}, {{1.0, 0.1}, {2.5, 1e-12}}};
    CHECK(format_csv(t, header) == "# {\"experiment\":\"x\"}\na,b\n1,0.1\n2.5,1e-12\n");
}

TEST_CASE("reports are byte-stable across reruns") {
    for (const auto& c : {small_rate_eval(), small_oracle_check()}) {
        const auto r1 = run_experiment(c);
        const auto r2 = run_experiment(c);
        const auto d1 = scratch("stable1");
        const auto d2 = scratch("stable2");
        const auto files = emit_report(c, r1, d1.string());
        (void)emit_report(c, r2, d2.string());
        CHECK(std::find(files.begin(), files.end(), "summary.json") != files.end());
        CHECK(std::find(files.begin(), files.end(), "manifest.json") != files.end());
        for (const auto& f : files) {
            if (f == "manifest.json") continue;
            CAPTURE(f);
            CHECK(slurp(d1 / f) == slurp(d2 / f));
        }
        const auto summary = nlohmann::json::parse(slurp(d1 / "summary.json"));
        CHECK(summary["experiment"] == c.experiment);
        CHECK(summary["config_hash"] == config_hash(c));
        CHECK(summary["checks"].is_array());
        const auto manifest = nlohmann::json::parse(slurp(d1 / "manifest.json"));
        CHECK(manifest["seed"] == c.run.seed);
        CHECK(manifest.contains("timestamp"));
        CHECK(config_from_json(manifest["config"]).output == c.output);
        fs::remove_all(d1);
        fs::remove_all(d2);
    }
}

TEST_CASE("exit codes") {
    const auto dir = scratch("exit");
    const std::string cfg = std::string(BDEX_CONFIG_DIR) + "/rate-eval.json";
    const std::string small = " --set grid.M1=15 --set grid.Mp=4 --set grid.stride=2 --set run.T=0.05";
    CHECK(run_cli("rate-eval --config " + cfg + small + " --out " + (dir / "ok").string()) == 0);
    CHECK(fs::exists(dir / "ok" / "summary.json"));
    CHECK(run_cli("rate-eval --config " + cfg + small + " --set checks.rate_tolerance=1e-300 --out " +
                  (dir / "fail").string()) == 3);
    CHECK(run_cli("rate-eval --config /nonexistent.json") == 2);
    CHECK(run_cli("rate-eval --config " + cfg + " --set run.bogus=1") == 2);
    CHECK(run_cli("rate-eval") == 2);
    CHECK(run_cli("no-such-experiment --config " + cfg) == 2);
    CHECK(run_cli("rate-eval --config " + cfg + small + " --set rate.path=\\\"file\\\" --set rate.trajectory_dir=" +
                  (dir / "missing").string()) == 3);
    fs::remove_all(dir);
}
