#pragma once

#include "umdp/abstraction.hpp"
#include "umdp/ltlf.hpp"
#include "umdp/rdp.hpp"
#include "umdp/system.hpp"

#include <memory>
#include <string>
#include <vector>

namespace umdp {

enum class AbstractionKind { Smdp, SmdpReduced, Imdp };

AbstractionKind abstraction_kind_from_string(const std::string& name);
const char* abstraction_kind_name(AbstractionKind kind);

struct SynthesisSpec {
    Box x_abs;
    std::vector<Index> initial_counts;
    std::vector<Index> initial_w_counts;
    Index factor = 2;
    int max_iterations = 1;
    Index horizon = 1;
    double epsilon = 0.0;
    AbstractionKind kind = AbstractionKind::Smdp;
    int threads = 1;
    std::string cache_dir; // when set, abstractions are loaded from / saved to disk per iteration
};

struct IterationRecord {
    int iteration = 0;
    double eta = 0.0;
    Index num_cells = 0;
    Index num_safe_cells = 0;
    Index num_w_cells = 0;
    double gap = 1.0;
    double diameter = 0.0; // SMDP transport bound or IMDP witness
    double wall_seconds = 0.0;
};

enum class SynthesisStatus { Converged, CapReached };

struct SynthesisResult {
    SynthesisStatus status = SynthesisStatus::CapReached;
    double epsilon = 0.0;
    std::vector<IterationRecord> iterations;
    BoundsPair bounds;
    Strategy strategy;
    Strategy optimistic_strategy;
    ValueField final_lo;
    ValueField final_hi;
    std::shared_ptr<const RegionSet> w_regions; // owns the trivial region set w_partition points at
    std::shared_ptr<Partition> partition;       // final iteration's grid
    std::shared_ptr<Partition> w_partition;
    Dfa dfa;
};

/// Abstraction-refinement loop: build the DFA once, then refine both grids
/// by `factor` per iteration until the bound gap over safe cells drops to
/// epsilon or the iteration cap is hit (the cap makes the loop total for
/// abstractions whose ambiguity does not vanish).
SynthesisResult synthesize(const Dynamics& dyn, const DisturbanceModel& dist, const RegionSet& regions,
                           FormulaArena& arena, FormulaArena::Id formula, const SynthesisSpec& spec);

struct GapRow {
    int iteration;
    double eta;
    double gap;
    double diameter;
};

std::vector<GapRow> gap_report(const SynthesisResult& result);

} // namespace umdp
