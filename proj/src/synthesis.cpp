#include "umdp/synthesis.hpp"

#include "umdp/errors.hpp"

#include <chrono>
#include <cmath>
#include <fstream>

namespace umdp {

AbstractionKind abstraction_kind_from_string(const std::string& name) {
    if (name == "smdp") return AbstractionKind::Smdp;
    if (name == "smdp-reduced") return AbstractionKind::SmdpReduced;
    if (name == "imdp") return AbstractionKind::Imdp;
    throw Error(ErrorCode::ConfigInvalid, "unknown abstraction kind '" + name + "'");
}

const char* abstraction_kind_name(AbstractionKind kind) {
    switch (kind) {
    case AbstractionKind::Smdp: return "smdp";
    case AbstractionKind::SmdpReduced: return "smdp-reduced";
    case AbstractionKind::Imdp: return "imdp";
    }
    return "?";
}

SynthesisResult synthesize(const Dynamics& dyn, const DisturbanceModel& dist, const RegionSet& regions,
                           FormulaArena& arena, FormulaArena::Id formula, const SynthesisSpec& spec) {
    if (spec.epsilon <= 0.0) throw Error(ErrorCode::ConfigInvalid, "epsilon must be positive");
    if (spec.horizon < 1) throw Error(ErrorCode::ConfigInvalid, "horizon must be >= 1");
    if (spec.max_iterations < 1) throw Error(ErrorCode::ConfigInvalid, "max iterations must be >= 1");
    if (spec.factor < 2) throw Error(ErrorCode::ConfigInvalid, "refinement factor must be >= 2");

    SynthesisResult result;
    result.epsilon = spec.epsilon;
    result.dfa = build_dfa(arena, formula);
    result.w_regions =
        std::make_shared<const RegionSet>(make_region_set({}, {}, {dist.support}));

    std::vector<Index> counts = spec.initial_counts;
    std::vector<Index> w_counts = spec.initial_w_counts;

    for (int iter = 1; iter <= spec.max_iterations; ++iter) {
        const auto started = std::chrono::steady_clock::now();
        auto partition = std::make_shared<Partition>(build_partition(regions, spec.x_abs, counts));
        auto w_partition = std::make_shared<Partition>(
            build_partition(*result.w_regions, dist.support, w_counts));

        // disturbance cells must stay within diameter 2 eta of the state grid
        if (2.0 * w_partition->eta() > 2.0 * partition->eta() + 1e-12)
            throw Error(ErrorCode::ConfigInvalid,
                        "disturbance cells exceed the 2*eta diameter limit; refine the disturbance grid");

        const auto cache_base = [&](const char* kind) {
            return spec.cache_dir + "/" + kind + "_iter" + std::to_string(iter);
        };
        const auto cached = [&](const std::string& path) {
            return !spec.cache_dir.empty() && std::ifstream(path).good();
        };

        RdpOutput rdp;
        double diameter = 0.0;
        switch (spec.kind) {
        case AbstractionKind::Smdp:
        case AbstractionKind::SmdpReduced: {
            const bool reduced = spec.kind == AbstractionKind::SmdpReduced;
            const std::string base = cache_base(reduced ? "smdp-reduced" : "smdp");
            Smdp abs;
            if (cached(base + ".bin")) {
                abs = load_smdp(*partition, base + ".bin");
            } else {
                abs = reduced ? build_smdp_reduced(dyn, dist, *partition, *w_partition, spec.threads)
                              : build_smdp(dyn, dist, *partition, *w_partition, spec.threads);
                if (!spec.cache_dir.empty()) save_smdp(abs, base + ".bin", base + ".manifest.json");
            }
            rdp = rdp_run(abs, result.dfa, spec.horizon, spec.threads);
            diameter = smdp_diameter_bound(abs, dyn.lipschitz).global;
            if (reduced) {
                // re-index reduced state values onto cells for the exports
                Eigen::MatrixXd lo = Eigen::MatrixXd::Zero(partition->cell_count(), result.dfa.num_states);
                Eigen::MatrixXd hi = lo;
                for (Index c = 0; c < partition->cell_count(); ++c) {
                    const Index si = abs.safe_index_of_cell[static_cast<std::size_t>(c)];
                    if (si < 0) continue;
                    lo.row(c) = rdp.final_lo.v.row(si);
                    hi.row(c) = rdp.final_hi.v.row(si);
                }
                rdp.final_lo.v = std::move(lo);
                rdp.final_hi.v = std::move(hi);
            }
            break;
        }
        case AbstractionKind::Imdp: {
            const std::string base = cache_base("imdp");
            Imdp abs;
            if (cached(base + ".bin")) {
                abs = load_imdp(*partition, base + ".bin");
            } else {
                abs = build_imdp(dyn, dist, *partition, *w_partition, spec.threads);
                if (!spec.cache_dir.empty()) save_imdp(abs, base + ".bin", base + ".manifest.json");
            }
            rdp = rdp_run(abs, result.dfa, spec.horizon, spec.threads);
            diameter = imdp_diameter_witness_max(abs);
            break;
        }
        }

        IterationRecord rec;
        rec.iteration = iter;
        rec.eta = partition->eta();
        rec.num_cells = partition->cell_count();
        rec.num_safe_cells = partition->safe_cell_count();
        rec.num_w_cells = w_partition->cell_count();
        rec.gap = rdp.bounds.gap;
        rec.diameter = diameter;
        rec.wall_seconds =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
        result.iterations.push_back(rec);

        result.bounds = std::move(rdp.bounds);
        result.strategy = std::move(rdp.strategy);
        result.optimistic_strategy = std::move(rdp.optimistic_strategy);
        result.final_lo = std::move(rdp.final_lo);
        result.final_hi = std::move(rdp.final_hi);
        result.partition = std::move(partition);
        result.w_partition = std::move(w_partition);

        if (rec.gap <= spec.epsilon) {
            result.status = SynthesisStatus::Converged;
            return result;
        }
        for (auto& c : counts) c *= spec.factor;
        for (auto& c : w_counts) c *= spec.factor;
    }
    result.status = SynthesisStatus::CapReached;
    return result;
}

std::vector<GapRow> gap_report(const SynthesisResult& result) {
    std::vector<GapRow> rows;
    rows.reserve(result.iterations.size());
    for (const auto& it : result.iterations) rows.push_back({it.iteration, it.eta, it.gap, it.diameter});
    return rows;
}

} // namespace umdp
