#pragma once

// Shared benchmark fixtures for the test suites.

#include "umdp/geometry.hpp"
#include "umdp/system.hpp"

#include <vector>

namespace umdp::testing {

struct BenchmarkSetup {
    Dynamics dynamics;
    DisturbanceModel disturbance;
    RegionSet regions;
    RegionSet w_regions;
    Box domain;
    std::vector<Index> counts;
    std::vector<Index> w_counts;

    Partition partition() const { return build_partition(regions, domain, counts); }
    Partition w_partition() const { return build_partition(w_regions, disturbance.support, w_counts); }
};

/// Temperature regulation: X_safe = [19, 22], goal = [20.75, 21.25],
/// grid over [18.25, 23.75] so heater overshoot stays inside the domain.
inline BenchmarkSetup thermal_setup(Index cells = 22, Index w_cells = 2) {
    BenchmarkSetup s;
    s.dynamics = make_thermal1d();
    s.disturbance = uniform_disturbance(make_box({-0.25}, {0.25}));
    LabeledRegion goal;
    goal.name = "goal";
    goal.atom_mask = 0b11;
    goal.boxes.push_back(make_box({20.75}, {21.25}));
    s.regions = make_region_set({"goal"}, {goal}, {make_box({19.0}, {22.0})});
    s.w_regions = make_region_set({}, {}, {s.disturbance.support});
    s.domain = make_box({18.25}, {23.75});
    s.counts = {cells};
    s.w_counts = {w_cells};
    return s;
}

/// Theorem-4 style non-contractive system: f = 1.5 x + w on X_safe = [0, 1],
/// goal = [0.75, 1], uniform w on [0, 0.5]; the cell of x = 0.5 keeps
/// trivial interval bounds at every refinement.
inline BenchmarkSetup expander_setup(Index cells = 16, Index w_cells = 4) {
    BenchmarkSetup s;
    s.dynamics = make_expander1d();
    s.disturbance = uniform_disturbance(make_box({0.0}, {0.5}));
    LabeledRegion goal;
    goal.name = "goal";
    goal.atom_mask = 0b11;
    goal.boxes.push_back(make_box({0.75}, {1.0}));
    s.regions = make_region_set({"goal"}, {goal}, {make_box({0.0}, {1.0})});
    s.w_regions = make_region_set({}, {}, {s.disturbance.support});
    s.domain = make_box({0.0}, {2.0});
    s.counts = {cells};
    s.w_counts = {w_cells};
    return s;
}

/// Planar cart with water/carpet/charge regions and two obstacles.
inline BenchmarkSetup cart_setup(Index cells_per_dim = 40, Index w_cells_per_dim = 12) {
    BenchmarkSetup s;
    s.dynamics = make_cart2d();
    Vec mean(2), sigma(2);
    mean << 0.0, 0.0;
    sigma << 0.1, 0.1;
    s.disturbance = truncated_gaussian(mean, sigma, make_box({-0.3, -0.3}, {0.3, 0.3}));

    auto region = [](const char* name, std::uint32_t mask, Box b) {
        LabeledRegion r;
        r.name = name;
        r.atom_mask = mask;
        r.boxes.push_back(std::move(b));
        return r;
    };
    // atoms: safe=1, water=2, carpet=4, charge=8
    std::vector<LabeledRegion> regions;
    regions.push_back(region("obstacle1", 0, make_box({0.30, 0.55}, {0.40, 0.80})));
    regions.push_back(region("obstacle2", 0, make_box({0.55, 0.20}, {0.70, 0.35})));
    regions.push_back(region("water", 0b0011, make_box({0.15, 0.15}, {0.45, 0.40})));
    regions.push_back(region("carpet", 0b0101, make_box({0.70, 0.05}, {0.90, 0.20})));
    regions.push_back(region("charge", 0b1001, make_box({0.85, 0.85}, {0.95, 0.95})));
    s.regions = make_region_set({"water", "carpet", "charge"}, std::move(regions),
                                {make_box({0.0, 0.0}, {1.0, 1.0})});
    s.w_regions = make_region_set({}, {}, {s.disturbance.support});
    s.domain = make_box({-0.5, -0.5}, {1.5, 1.5});
    s.counts = {cells_per_dim, cells_per_dim};
    s.w_counts = {w_cells_per_dim, w_cells_per_dim};
    return s;
}

} // namespace umdp::testing
