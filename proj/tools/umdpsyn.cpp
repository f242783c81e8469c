// Command-line front end: synthesize / simulate / dfa / diameter / oracle-check.

#include "umdp/config.hpp"
#include "umdp/errors.hpp"
#include "umdp/io.hpp"
#include "umdp/ltlf.hpp"
#include "umdp/rdp_oracle.hpp"
#include "umdp/sim.hpp"
#include "umdp/synthesis.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <thread>

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr const char* kToolVersion = "0.1.0";

struct CommonOpts {
    std::string config_path;
    std::string out_dir = ".";
    std::string cache_dir;
    int threads = 0;
    std::int64_t seed_override = -1;
};

int effective_threads(int requested) {
    if (requested > 0) return requested;
    const unsigned hw = std::thread::hardware_concurrency();
    return hw == 0 ? 1 : static_cast<int>(hw);
}

json base_manifest(const umdp::RunConfig& cfg, const std::string& subcommand, int threads,
                   std::uint64_t seed) {
    json m;
    m["tool"] = "umdpsyn";
    m["version"] = kToolVersion;
    m["subcommand"] = subcommand;
    char hash_hex[17];
    std::snprintf(hash_hex, sizeof(hash_hex), "%016llx",
                  static_cast<unsigned long long>(umdp::config_hash(cfg.raw)));
    m["config_hash"] = hash_hex;
    m["threads"] = threads;
    m["seed"] = seed;
    return m;
}

void ensure_dir(const std::string& dir) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw umdp::Error(umdp::ErrorCode::ConfigInvalid, "cannot create output directory " + dir);
}

int run_synthesize(const CommonOpts& opts) {
    const auto started = std::chrono::steady_clock::now();
    umdp::RunConfig cfg = umdp::load_config(opts.config_path);
    if (opts.seed_override >= 0) cfg.seed = static_cast<std::uint64_t>(opts.seed_override);
    const int threads = effective_threads(opts.threads);
    ensure_dir(opts.out_dir);

    umdp::FormulaArena arena(cfg.regions.atoms);
    const auto formula = umdp::parse_formula(arena, cfg.formula_text);
    umdp::SynthesisSpec spec = cfg.synthesis_spec(threads);
    if (!opts.cache_dir.empty()) {
        ensure_dir(opts.cache_dir);
        spec.cache_dir = opts.cache_dir;
    }
    const umdp::SynthesisResult result =
        umdp::synthesize(cfg.dynamics, cfg.disturbance, cfg.regions, arena, formula, spec);

    std::vector<umdp::Index> final_counts = cfg.initial_counts;
    std::vector<umdp::Index> final_w_counts = cfg.initial_w_counts;
    for (std::size_t i = 1; i < result.iterations.size(); ++i) {
        for (auto& c : final_counts) c *= cfg.factor;
        for (auto& c : final_w_counts) c *= cfg.factor;
    }

    const fs::path out(opts.out_dir);
    const json results_json =
        umdp::synthesis_result_to_json(result, final_counts, final_w_counts, umdp::config_hash(cfg.raw));
    umdp::write_text_file((out / "results.json").string(), results_json.dump(2) + "\n");
    umdp::write_text_file((out / "bounds.csv").string(),
                          umdp::bounds_to_csv(*result.partition, result.bounds));
    umdp::write_text_file((out / "gap.csv").string(), umdp::gap_rows_to_csv(umdp::gap_report(result)));
    umdp::write_strategy(result.strategy, (out / "strategy.bin").string());
    umdp::write_text_file((out / "partition.json").string(),
                          umdp::partition_to_json(*result.partition).dump(2) + "\n");
    umdp::write_text_file((out / "value_lo.csv").string(),
                          umdp::value_field_to_csv(*result.partition, result.final_lo));
    umdp::write_text_file((out / "value_hi.csv").string(),
                          umdp::value_field_to_csv(*result.partition, result.final_hi));
    umdp::write_text_file((out / "dfa.json").string(), umdp::dfa_to_json(result.dfa).dump(2) + "\n");
    umdp::write_text_file((out / "dfa.dot").string(), umdp::dfa_to_dot(result.dfa));
    if (result.partition->dim() == 2) {
        umdp::write_text_file((out / "p_lo.pgm").string(),
                              umdp::values_to_pgm(*result.partition, result.bounds.p_lo));
        umdp::write_text_file((out / "p_lo.scale.json").string(),
                              umdp::pgm_scale_record(result.bounds.p_lo).dump(2) + "\n");
        umdp::write_text_file((out / "p_hi.pgm").string(),
                              umdp::values_to_pgm(*result.partition, result.bounds.p_hi));
        umdp::write_text_file((out / "p_hi.scale.json").string(),
                              umdp::pgm_scale_record(result.bounds.p_hi).dump(2) + "\n");
    }

    json manifest = base_manifest(cfg, "synthesize", threads, cfg.seed);
    manifest["wall_seconds"] =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
    json iter_times = json::array();
    for (const auto& it : result.iterations) iter_times.push_back(it.wall_seconds);
    manifest["iteration_seconds"] = std::move(iter_times);
    umdp::write_text_file((out / "manifest.json").string(), manifest.dump(2) + "\n");

    const bool converged = result.status == umdp::SynthesisStatus::Converged;
    std::cout << "status: " << (converged ? "converged" : "iteration-cap-reached")
              << "  iterations: " << result.iterations.size() << "  gap: " << result.bounds.gap
              << "\n";
    return converged ? 0 : 2;
}

int run_simulate(const CommonOpts& opts, const std::string& results_dir, std::vector<double> x0_values,
                 std::int64_t cell_index, int trials) {
    umdp::RunConfig cfg = umdp::load_config(opts.config_path);
    if (opts.seed_override >= 0) cfg.seed = static_cast<std::uint64_t>(opts.seed_override);
    const int threads = effective_threads(opts.threads);
    ensure_dir(opts.out_dir);

    std::ifstream results_in(fs::path(results_dir) / "results.json");
    if (!results_in)
        throw umdp::Error(umdp::ErrorCode::ConfigInvalid, "missing results.json in " + results_dir);
    json results_json;
    results_in >> results_json;
    const std::vector<umdp::Index> final_counts = results_json["final_counts"].get<std::vector<umdp::Index>>();

    const umdp::Partition partition = umdp::build_partition(cfg.regions, cfg.domain, final_counts);
    umdp::FormulaArena arena(cfg.regions.atoms);
    const umdp::Dfa dfa = umdp::build_dfa(arena, umdp::parse_formula(arena, cfg.formula_text));
    const umdp::Strategy strategy = umdp::read_strategy((fs::path(results_dir) / "strategy.bin").string());
    if (strategy.num_cells != partition.cell_count() || strategy.num_dfa_states != dfa.num_states)
        throw umdp::Error(umdp::ErrorCode::ConfigInvalid, "strategy does not match the rebuilt partition");

    umdp::Vec x0;
    if (!x0_values.empty()) {
        x0 = umdp::Vec(static_cast<Eigen::Index>(x0_values.size()));
        for (std::size_t i = 0; i < x0_values.size(); ++i) x0[static_cast<Eigen::Index>(i)] = x0_values[i];
    } else if (cell_index >= 0) {
        x0 = partition.representative(cell_index);
    } else {
        throw umdp::Error(umdp::ErrorCode::ConfigInvalid, "simulate requires --x0 or --cell");
    }

    const umdp::Controller controller =
        umdp::refine_controller(strategy, partition, dfa, cfg.regions);
    const umdp::ProbabilityEstimate est = umdp::estimate_probability(
        cfg.dynamics, cfg.disturbance, controller, x0, strategy.horizon, trials, cfg.seed, threads);

    const umdp::Index cell = umdp::locate(partition, x0);
    const double p_lo = results_json["bounds"]["p_lo"][static_cast<std::size_t>(cell)].get<double>();
    const double p_hi = results_json["bounds"]["p_hi"][static_cast<std::size_t>(cell)].get<double>();
    const bool consistent = est.ci_high >= p_lo && est.ci_low <= p_hi;

    std::vector<umdp::Trajectory> kept;
    const int keep = std::min(trials, 100);
    for (int i = 0; i < keep; ++i) {
        umdp::CounterRng rng(cfg.seed, static_cast<std::uint64_t>(i));
        kept.push_back(umdp::simulate(cfg.dynamics, cfg.disturbance, controller, x0, strategy.horizon, rng));
    }

    const fs::path out(opts.out_dir);
    umdp::write_text_file((out / "trajectories.csv").string(), umdp::trajectories_to_csv(kept));
    json summary;
    summary["x0"] = x0_values.empty() ? json(std::vector<double>(x0.data(), x0.data() + x0.size()))
                                      : json(x0_values);
    summary["cell"] = cell;
    summary["trials"] = est.trials;
    summary["satisfied"] = est.satisfied;
    summary["p_hat"] = est.p_hat;
    summary["ci_low"] = est.ci_low;
    summary["ci_high"] = est.ci_high;
    summary["p_lo"] = p_lo;
    summary["p_hi"] = p_hi;
    summary["interval_check"] = consistent ? "consistent" : "violation";
    umdp::write_text_file((out / "summary.json").string(), summary.dump(2) + "\n");
    umdp::write_text_file((out / "manifest.json").string(),
                          base_manifest(cfg, "simulate", threads, cfg.seed).dump(2) + "\n");

    std::cout << "p_hat: " << est.p_hat << "  ci: [" << est.ci_low << ", " << est.ci_high
              << "]  certified: [" << p_lo << ", " << p_hi << "]  " << summary["interval_check"]
              << "\n";
    return 0;
}

int run_dfa(const std::string& formula, const std::string& ap_csv, const std::string& out_dir) {
    std::vector<std::string> atoms;
    std::stringstream ss(ap_csv);
    std::string atom;
    while (std::getline(ss, atom, ',')) {
        if (!atom.empty()) atoms.push_back(atom);
    }
    umdp::FormulaArena arena(atoms);
    const umdp::Dfa dfa = umdp::build_dfa(arena, umdp::parse_formula(arena, formula));
    ensure_dir(out_dir);
    umdp::write_text_file((fs::path(out_dir) / "dfa.dot").string(), umdp::dfa_to_dot(dfa));
    umdp::write_text_file((fs::path(out_dir) / "dfa.json").string(), umdp::dfa_to_json(dfa).dump(2) + "\n");
    std::cout << "states: " << dfa.num_states << "  accepting: " << (dfa.accepting >= 0 ? 1 : 0)
              << "\n";
    return 0;
}

int run_diameter(const CommonOpts& opts) {
    umdp::RunConfig cfg = umdp::load_config(opts.config_path);
    const int threads = effective_threads(opts.threads);
    ensure_dir(opts.out_dir);

    const umdp::Partition partition = umdp::build_partition(cfg.regions, cfg.domain, cfg.initial_counts);
    const umdp::RegionSet w_regions = umdp::make_region_set({}, {}, {cfg.disturbance.support});
    const umdp::Partition w_partition =
        umdp::build_partition(w_regions, cfg.disturbance.support, cfg.initial_w_counts);

    json report;
    report["eta"] = partition.eta();
    std::ostringstream csv;
    if (cfg.kind == umdp::AbstractionKind::Imdp) {
        const umdp::Imdp abs = umdp::build_imdp(cfg.dynamics, cfg.disturbance, partition, w_partition, threads);
        csv << "cell,action,witness\n";
        double global = 0.0;
        for (umdp::Index cell : abs.safe_cells)
            for (int a = 0; a < abs.num_actions; ++a) {
                const double w = umdp::imdp_diameter_witness(abs, cell, a);
                global = std::max(global, w);
                csv << cell << "," << a << "," << w << "\n";
            }
        report["kind"] = "imdp";
        report["diameter_witness_max"] = global;
    } else {
        const umdp::Smdp abs =
            cfg.kind == umdp::AbstractionKind::Smdp
                ? umdp::build_smdp(cfg.dynamics, cfg.disturbance, partition, w_partition, threads)
                : umdp::build_smdp_reduced(cfg.dynamics, cfg.disturbance, partition, w_partition, threads);
        const umdp::DiameterReport dia = umdp::smdp_diameter_bound(abs, cfg.dynamics.lipschitz);
        csv << "safe_cell,action,bound\n";
        for (std::size_t si = 0; si < abs.safe_cells.size(); ++si)
            for (int a = 0; a < abs.num_actions; ++a)
                csv << abs.safe_cells[si] << "," << a << ","
                    << dia.per_row[si * static_cast<std::size_t>(abs.num_actions) + a] << "\n";
        report["kind"] = umdp::abstraction_kind_name(cfg.kind);
        report["diameter_bound_max"] = dia.global;
        report["analytic_ceiling"] = dia.ceiling;
    }
    umdp::write_text_file((fs::path(opts.out_dir) / "diameter.csv").string(), csv.str());
    umdp::write_text_file((fs::path(opts.out_dir) / "diameter.json").string(), report.dump(2) + "\n");
    std::cout << report.dump(2) << "\n";
    return 0;
}

int run_oracle_check(int count, std::uint64_t seed) {
    const double smdp_dev = umdp::oracle_check_smdp(count, seed);
    const double imdp_dev = umdp::oracle_check_imdp(count, seed);
    std::cout << "smdp max deviation: " << smdp_dev << "\n";
    std::cout << "imdp max deviation: " << imdp_dev << "\n";
    return (smdp_dev <= 1e-12 && imdp_dev <= 1e-12) ? 0 : 1;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Controller synthesis for stochastic systems via uncertain-MDP abstractions"};
    app.require_subcommand(1);

    CommonOpts opts;
    std::string results_dir;
    std::string x0_text;
    std::int64_t cell_index = -1;
    int trials = 1000;
    std::string dfa_formula, dfa_ap;
    int oracle_count = 200;
    std::uint64_t oracle_seed = 1;

    auto add_common = [&](CLI::App* cmd, bool needs_config) {
        if (needs_config) cmd->add_option("--config", opts.config_path, "JSON config path")->required();
        cmd->add_option("--out", opts.out_dir, "output directory");
        cmd->add_option("--threads", opts.threads, "worker threads (default: logical cores)");
        cmd->add_option("--seed", opts.seed_override, "override the config seed");
    };

    CLI::App* synth = app.add_subcommand("synthesize", "run the abstraction-refinement loop");
    add_common(synth, true);
    synth->add_option("--cache-dir", opts.cache_dir, "abstraction cache directory for re-runs");

    CLI::App* sim = app.add_subcommand("simulate", "closed-loop Monte Carlo validation");
    add_common(sim, true);
    sim->add_option("--results", results_dir, "directory produced by synthesize")->required();
    sim->add_option("--x0", x0_text, "initial state, comma-separated");
    sim->add_option("--cell", cell_index, "initial cell index (uses its center)");
    sim->add_option("--trials", trials, "number of trajectories");

    CLI::App* dfa_cmd = app.add_subcommand("dfa", "export the automaton of a formula");
    dfa_cmd->add_option("--formula", dfa_formula, "LTLf formula")->required();
    dfa_cmd->add_option("--ap", dfa_ap, "comma-separated atomic propositions")->required();
    dfa_cmd->add_option("--out", opts.out_dir, "output directory");

    CLI::App* dia = app.add_subcommand("diameter", "ambiguity diameter diagnostics at the initial grid");
    add_common(dia, true);

    CLI::App* oracle = app.add_subcommand("oracle-check", "compare backups against brute-force oracles");
    oracle->add_option("--count", oracle_count, "instances per abstraction class");
    oracle->add_option("--seed", oracle_seed, "instance generator seed");

    CLI11_PARSE(app, argc, argv);

    try {
        if (synth->parsed()) return run_synthesize(opts);
        if (sim->parsed()) {
            std::vector<double> x0_values;
            if (!x0_text.empty()) {
                std::stringstream ss(x0_text);
                std::string part;
                while (std::getline(ss, part, ',')) x0_values.push_back(std::stod(part));
            }
            return run_simulate(opts, results_dir, x0_values, cell_index, trials);
        }
        if (dfa_cmd->parsed()) return run_dfa(dfa_formula, dfa_ap, opts.out_dir);
        if (dia->parsed()) return run_diameter(opts);
        if (oracle->parsed()) return run_oracle_check(oracle_count, oracle_seed);
    } catch (const umdp::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 1;
}
