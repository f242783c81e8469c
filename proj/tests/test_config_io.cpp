#include "umdp/config.hpp"
#include "umdp/errors.hpp"
#include "umdp/io.hpp"

#include "helpers.hpp"

#include <doctest.h>

#include <cstdio>
#include <cstdlib>
#include <sys/wait.h>
#include <fstream>
#include <sstream>

using namespace umdp;

namespace {

std::string benchmark_path(const char* name) {
    return std::string(UMDP_SOURCE_DIR) + "/benchmarks/" + name;
}

std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    REQUIRE(in);
    std::ostringstream out;
    out << in.rdbuf();
    return out.str();
}

void shell(const std::string& cmd) {
    if (std::system(cmd.c_str()) != 0) std::fprintf(stderr, "cleanup failed: %s\n", cmd.c_str());
}

int run_cli(const std::string& args) {
    const std::string cmd = std::string(UMDP_CLI_PATH) + " " + args + " > /dev/null 2>&1";
    const int status = std::system(cmd.c_str());
    return WEXITSTATUS(status);
}

} // namespace

TEST_CASE("benchmark configs parse and round-trip canonically") {
    for (const char* name : {"thermal1d.json", "expander_imdp.json", "cart2d.json"}) {
        const RunConfig cfg = load_config(benchmark_path(name));
        const std::string canon = canonical_json(cfg.raw);
        const std::string twice = canonical_json(nlohmann::json::parse(canon));
        CHECK(canon == twice);
        CHECK(config_hash(cfg.raw) == config_hash(nlohmann::json::parse(canon)));
    }
}

TEST_CASE("thermal config materializes the documented benchmark") {
    const RunConfig cfg = load_config(benchmark_path("thermal1d.json"));
    CHECK(cfg.system_name == "thermal1d");
    CHECK(cfg.horizon == 20);
    CHECK(cfg.kind == AbstractionKind::Smdp);
    CHECK(cfg.regions.atoms == std::vector<std::string>{"safe", "goal"});
    const Partition p = build_partition(cfg.regions, cfg.domain, cfg.initial_counts);
    CHECK(p.cell_count() == 22);
    CHECK(p.safe_cell_count() == 12);
    Vec x(1);
    x[0] = 21.0;
    CHECK(cfg.regions.label_of(x) == 0b11);
}

TEST_CASE("config validation failures carry field paths") {
    nlohmann::json j = nlohmann::json::parse(slurp(benchmark_path("thermal1d.json")));
    j.erase("formula");
    CHECK_THROWS_AS(parse_config(j), Error);

    nlohmann::json bad_system = nlohmann::json::parse(slurp(benchmark_path("thermal1d.json")));
    bad_system["system"]["name"] = "pendulum9d";
    CHECK_THROWS_AS(parse_config(bad_system), Error);

    nlohmann::json bad_atom = nlohmann::json::parse(slurp(benchmark_path("thermal1d.json")));
    bad_atom["formula"] = "F lava";
    CHECK_THROWS_AS(parse_config(bad_atom), Error);
}

TEST_CASE("strategy files round-trip") {
    Strategy s;
    s.horizon = 3;
    s.num_cells = 5;
    s.num_dfa_states = 2;
    s.actions.resize(30);
    for (std::size_t i = 0; i < s.actions.size(); ++i) s.actions[i] = static_cast<std::uint16_t>(i % 7);
    write_strategy(s, "strategy_roundtrip_test.bin");
    const Strategy r = read_strategy("strategy_roundtrip_test.bin");
    CHECK(r.horizon == s.horizon);
    CHECK(r.num_cells == s.num_cells);
    CHECK(r.num_dfa_states == s.num_dfa_states);
    CHECK(r.actions == s.actions);
    std::remove("strategy_roundtrip_test.bin");
}

TEST_CASE("pgm heatmaps have the advertised shape") {
    const auto s = umdp::testing::cart_setup(40, 12);
    const Partition p = s.partition();
    Vec values = Vec::Zero(p.cell_count());
    for (Index c = 0; c < p.cell_count(); ++c) values[c] = static_cast<double>(c % 7) / 6.0;
    const std::string pgm = values_to_pgm(p, values);
    CHECK(pgm.rfind("P2\n40 40\n255\n", 0) == 0);
    const auto scale = pgm_scale_record(values);
    CHECK(scale["min"].get<double>() == doctest::Approx(0.0));
    CHECK(scale["max"].get<double>() == doctest::Approx(1.0));
}

TEST_CASE("cli: dfa export produces the three-state automaton") {
    REQUIRE(run_cli("dfa --formula \"F goal & G safe\" --ap safe,goal --out cli_dfa_out") == 0);
    const std::string dot = slurp("cli_dfa_out/dfa.dot");
    CHECK(dot.find("s0") != std::string::npos);
    const auto j = nlohmann::json::parse(slurp("cli_dfa_out/dfa.json"));
    CHECK(j["num_states"] == 3);
    shell("rm -rf cli_dfa_out");
}

TEST_CASE("cli: expander synthesis exits with the cap-reached code and a flat gap") {
    const int code = run_cli("synthesize --config " + benchmark_path("expander_imdp.json") +
                             " --out cli_expander_out --threads 2");
    CHECK(code == 2); // non-convergence by design
    const auto results = nlohmann::json::parse(slurp("cli_expander_out/results.json"));
    CHECK(results["status"] == "iteration-cap-reached");
    for (const auto& it : results["iterations"]) CHECK(it["gap"].get<double>() == doctest::Approx(1.0));
    const std::string gap_csv = slurp("cli_expander_out/gap.csv");
    CHECK(gap_csv.rfind("iteration,eta,gap,diameter\n", 0) == 0);
    shell("rm -rf cli_expander_out");
}

TEST_CASE("cli: repeated single-thread runs are byte-identical; threads only affect the manifest") {
    const std::string cfg = benchmark_path("expander_imdp.json");
    REQUIRE(run_cli("synthesize --config " + cfg + " --out cli_det_a --threads 1") == 2);
    REQUIRE(run_cli("synthesize --config " + cfg + " --out cli_det_b --threads 1") == 2);
    REQUIRE(run_cli("synthesize --config " + cfg + " --out cli_det_c --threads 4") == 2);
    const std::string a = slurp("cli_det_a/results.json");
    CHECK(a == slurp("cli_det_b/results.json"));
    CHECK(a == slurp("cli_det_c/results.json"));
    CHECK(slurp("cli_det_a/bounds.csv") == slurp("cli_det_c/bounds.csv"));
    CHECK(slurp("cli_det_a/strategy.bin") == slurp("cli_det_c/strategy.bin"));
    shell("rm -rf cli_det_a cli_det_b cli_det_c");
}

TEST_CASE("cli: simulate checks the certified interval") {
    const std::string cfg = benchmark_path("thermal1d.json");
    // a short run is enough for the simulate plumbing
    nlohmann::json j = nlohmann::json::parse(slurp(cfg));
    j["schedule"]["max_iterations"] = 3;
    j["epsilon"] = 0.2;
    umdp::write_text_file("cli_sim_config.json", j.dump(2));
    REQUIRE(run_cli("synthesize --config cli_sim_config.json --out cli_sim_out --threads 2") == 0);
    REQUIRE(run_cli("simulate --config cli_sim_config.json --results cli_sim_out --cell 10 "
                    "--trials 400 --out cli_sim_run") == 0);
    const auto summary = nlohmann::json::parse(slurp("cli_sim_run/summary.json"));
    CHECK(summary["interval_check"] == "consistent");
    CHECK(summary["trials"] == 400);
    const std::string traj = slurp("cli_sim_run/trajectories.csv");
    CHECK(traj.find("trajectory,t") == 0);
    std::remove("cli_sim_config.json");
    shell("rm -rf cli_sim_out cli_sim_run");
}

TEST_CASE("cli: abstraction cache reproduces the build exactly on re-runs") {
    const std::string cfg = benchmark_path("expander_imdp.json");
    REQUIRE(run_cli("synthesize --config " + cfg +
                    " --out cli_cache_a --cache-dir cli_cache_dir --threads 2") == 2);
    std::ifstream cache_file("cli_cache_dir/imdp_iter1.bin", std::ios::binary);
    CHECK(cache_file.good());
    // second run loads every iteration from the cache
    REQUIRE(run_cli("synthesize --config " + cfg +
                    " --out cli_cache_b --cache-dir cli_cache_dir --threads 2") == 2);
    CHECK(slurp("cli_cache_a/results.json") == slurp("cli_cache_b/results.json"));
    shell("rm -rf cli_cache_a cli_cache_b cli_cache_dir");
}

TEST_CASE("cli: value field exports carry the product coordinates") {
    const std::string cfg = benchmark_path("expander_imdp.json");
    nlohmann::json j = nlohmann::json::parse(slurp(cfg));
    j["schedule"]["max_iterations"] = 1;
    umdp::write_text_file("cli_vf_config.json", j.dump(2));
    REQUIRE(run_cli("synthesize --config cli_vf_config.json --out cli_vf_out --threads 1") == 2);
    const std::string lo = slurp("cli_vf_out/value_lo.csv");
    CHECK(lo.rfind("cell,center0,z,value\n", 0) == 0);
    std::remove("cli_vf_config.json");
    shell("rm -rf cli_vf_out");
}

TEST_CASE("cli: oracle-check passes") {
    REQUIRE(run_cli("oracle-check --count 40 --seed 7") == 0);
}

TEST_CASE("cli: diameter diagnostics at the initial grid") {
    REQUIRE(run_cli("diameter --config " + benchmark_path("thermal1d.json") +
                    " --out cli_dia_out --threads 2") == 0);
    const auto j = nlohmann::json::parse(slurp("cli_dia_out/diameter.json"));
    CHECK(j["kind"] == "smdp");
    CHECK(j["diameter_bound_max"].get<double>() <= j["analytic_ceiling"].get<double>() + 1e-12);
    const std::string csv = slurp("cli_dia_out/diameter.csv");
    CHECK(csv.rfind("safe_cell,action,bound\n", 0) == 0);
    shell("rm -rf cli_dia_out");
}

TEST_CASE("golden files: fixed-seed results match the committed outputs") {
    struct GoldenCase {
        const char* config;
        const char* golden;
        int expected_code;
    };
    const GoldenCase cases[] = {
        {"thermal1d.json", "thermal1d.results.json", 0},
        {"expander_imdp.json", "expander_imdp.results.json", 2},
    };
    for (const auto& gc : cases) {
        CAPTURE(gc.config);
        REQUIRE(run_cli("synthesize --config " + benchmark_path(gc.config) +
                        " --out cli_golden_run --threads 1") == gc.expected_code);
        const std::string produced = slurp("cli_golden_run/results.json");
        const std::string golden =
            slurp(std::string(UMDP_SOURCE_DIR) + "/tests/golden/" + gc.golden);
        CHECK(produced == golden); // byte-for-byte at thread count 1

        REQUIRE(run_cli("synthesize --config " + benchmark_path(gc.config) +
                        " --out cli_golden_run8 --threads 8") == gc.expected_code);
        const auto a = nlohmann::json::parse(produced);
        const auto b = nlohmann::json::parse(slurp("cli_golden_run8/results.json"));
        REQUIRE(a["bounds"]["p_lo"].size() == b["bounds"]["p_lo"].size());
        for (std::size_t i = 0; i < a["bounds"]["p_lo"].size(); ++i) {
            CHECK(std::abs(a["bounds"]["p_lo"][i].get<double>() -
                           b["bounds"]["p_lo"][i].get<double>()) <= 1e-12);
            CHECK(std::abs(a["bounds"]["p_hi"][i].get<double>() -
                           b["bounds"]["p_hi"][i].get<double>()) <= 1e-12);
        }
        shell("rm -rf cli_golden_run cli_golden_run8");
    }
}
