#pragma once

#include "umdp/geometry.hpp"
#include "umdp/system.hpp"
#include "umdp/types.hpp"

#include <array>
#include <cstdint>
#include <string>
#include <vector>

namespace umdp {

constexpr int kMaxGridDim = 4;

/// One SMDP cluster: the cells intersecting the reach set of a group of
/// disturbance cells (an axis-aligned index box), with their total mass.
struct Cluster {
    std::array<std::int32_t, kMaxGridDim> lo{};
    std::array<std::int32_t, kMaxGridDim> hi{}; // inclusive
    double mass = 0.0;
    bool touches_unsafe = false;
};

/// Set-valued MDP abstraction.  Rows exist for safe cells only; unsafe
/// cells carry the Dirac self-loop implicitly.  In the reduced variant all
/// unsafe cells collapse into the single absorbing state s_unsafe, which
/// is indexed as state safe_cells.size().
struct Smdp {
    const Partition* partition = nullptr;
    int num_actions = 0;
    bool reduced = false;
    std::vector<Index> safe_cells;
    std::vector<Index> safe_index_of_cell; // -1 for unsafe cells
    std::vector<std::vector<Cluster>> rows; // safe_cells.size() * num_actions, action-major within a cell

    Index state_count() const {
        return reduced ? static_cast<Index>(safe_cells.size()) + 1 : partition->cell_count();
    }
    const std::vector<Cluster>& row(Index safe_idx, int action) const {
        return rows[static_cast<std::size_t>(safe_idx) * num_actions + action];
    }
};

struct ImdpEntry {
    Index succ = 0;
    double p_lo = 0.0;
    double p_hi = 0.0;
};

/// Interval MDP abstraction over the full cell space.
struct Imdp {
    const Partition* partition = nullptr;
    int num_actions = 0;
    std::vector<Index> safe_cells;
    std::vector<Index> safe_index_of_cell;
    std::vector<std::vector<ImdpEntry>> rows; // sparse, sorted by successor cell

    const std::vector<ImdpEntry>& row(Index safe_idx, int action) const {
        return rows[static_cast<std::size_t>(safe_idx) * num_actions + action];
    }
};

Smdp build_smdp(const Dynamics& dyn, const DisturbanceModel& dist, const Partition& partition,
                const Partition& w_partition, int threads = 1);
Smdp build_smdp_reduced(const Dynamics& dyn, const DisturbanceModel& dist, const Partition& partition,
                        const Partition& w_partition, int threads = 1);
Imdp build_imdp(const Dynamics& dyn, const DisturbanceModel& dist, const Partition& partition,
                const Partition& w_partition, int threads = 1);

/// Per-row transport upper bound on the ambiguity diameter,
///   bound(s,a) = sum_c mass(c) * max pairwise representative distance in
/// the cluster of c, plus the analytic ceiling (4 L_f + 2) eta.
struct DiameterReport {
    std::vector<double> per_row; // safe-cell-major, action-minor
    double global = 0.0;
    double ceiling = 0.0;
};

DiameterReport smdp_diameter_bound(const Smdp& smdp, double lipschitz);

/// Certified lower bound on the Wasserstein diameter of an IMDP row's
/// ambiguity set: the exact distance between the two greedy extreme
/// distributions filled in opposite lexicographic orders of the successor
/// representatives.
double imdp_diameter_witness(const Imdp& imdp, Index cell, int action);
double imdp_diameter_witness_max(const Imdp& imdp);

/// Compact binary + JSON manifest serialization for caching.
void save_smdp(const Smdp& smdp, const std::string& binary_path, const std::string& manifest_path);
Smdp load_smdp(const Partition& partition, const std::string& binary_path);
void save_imdp(const Imdp& imdp, const std::string& binary_path, const std::string& manifest_path);
Imdp load_imdp(const Partition& partition, const std::string& binary_path);

} // namespace umdp
