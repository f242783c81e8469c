#include "umdp/abstraction.hpp"
#include "umdp/errors.hpp"
#include "umdp/rng.hpp"
#include "umdp/wasserstein.hpp"

#include "helpers.hpp"

#include <doctest.h>

#include <algorithm>
#include <cstdio>
#include <numeric>

using namespace umdp;
using umdp::testing::BenchmarkSetup;

namespace {

double row_mass(const std::vector<Cluster>& row) {
    double total = 0.0;
    for (const auto& cl : row) total += cl.mass;
    return total;
}

bool cluster_contains_cell(const Partition& p, const Cluster& cl, Index cell) {
    IndexVec coords;
    p.cell_coords(cell, coords);
    for (Eigen::Index d = 0; d < p.dim(); ++d)
        if (coords[static_cast<std::size_t>(d)] < cl.lo[d] || coords[static_cast<std::size_t>(d)] > cl.hi[d])
            return false;
    return true;
}

} // namespace

TEST_CASE("single closed cell yields the trivial cluster") {
    Dynamics dyn;
    dyn.state_dim = 1;
    dyn.disturbance_dim = 1;
    dyn.action_names = {"a"};
    dyn.lipschitz = 0.0;
    dyn.eval = [](const Vec&, int, const Vec&) {
        Vec out(1);
        out[0] = 0.5;
        return out;
    };
    const DisturbanceModel dist = uniform_disturbance(make_box({-0.1}, {0.1}));
    const RegionSet regions = make_region_set({}, {}, {make_box({0.0}, {1.0})});
    const RegionSet w_regions = make_region_set({}, {}, {dist.support});
    const Partition p = build_partition(regions, make_box({0.0}, {1.0}), {1});
    const Partition wp = build_partition(w_regions, dist.support, {3});
    const Smdp m = build_smdp(dyn, dist, p, wp);
    REQUIRE(m.rows.size() == 1);
    REQUIRE(m.row(0, 0).size() == 1); // identical supports merged
    CHECK(m.row(0, 0)[0].mass == doctest::Approx(1.0));
    CHECK(m.row(0, 0)[0].lo[0] == 0);
    CHECK(m.row(0, 0)[0].hi[0] == 0);
}

TEST_CASE("expander cluster spans the two cells its reach set touches") {
    const BenchmarkSetup s = umdp::testing::expander_setup(8, 4); // 8 cells of width 0.25 on [0,2]
    const Partition p = s.partition();
    // single disturbance cell around 0 keeps the reach set at [~0, ~0.375]
    const RegionSet tiny_w = make_region_set({}, {}, {make_box({0.0}, {0.01})});
    const DisturbanceModel tiny = uniform_disturbance(make_box({0.0}, {0.01}));
    const Partition wp = build_partition(tiny_w, tiny.support, {1});
    const Smdp m = build_smdp(s.dynamics, tiny, p, wp);
    const auto& row = m.row(0, 0); // cell [0, 0.25]
    REQUIRE(row.size() == 1);
    CHECK(row[0].lo[0] == 0);
    CHECK(row[0].hi[0] == 1);
}

TEST_CASE("cluster masses sum to one for every state-action pair") {
    const BenchmarkSetup s = umdp::testing::thermal_setup(22, 4);
    const Partition p = s.partition();
    const Partition wp = s.w_partition();
    const Smdp m = build_smdp(s.dynamics, s.disturbance, p, wp);
    for (const auto& row : m.rows) {
        CHECK(row_mass(row) == doctest::Approx(1.0).epsilon(1e-12));
        for (const auto& cl : row)
            for (int d = 0; d < static_cast<int>(p.dim()); ++d) CHECK(cl.lo[d] <= cl.hi[d]);
    }
}

TEST_CASE("supports grow monotonically with the disturbance box") {
    const BenchmarkSetup s = umdp::testing::thermal_setup();
    const Partition p = s.partition();
    const Box cell = p.cell_box(5);
    const Box small = make_box({-0.02}, {0.02});
    const Box large = make_box({-0.1}, {0.1});
    const Box r_small = reach_over(s.dynamics, cell, 0, small);
    const Box r_large = reach_over(s.dynamics, cell, 0, large);
    CHECK(contains_box(r_large, r_small));
}

TEST_CASE("reduced abstraction collapses unsafe members into s_unsafe") {
    const BenchmarkSetup s = umdp::testing::thermal_setup(22, 2);
    const Partition p = s.partition();
    const Partition wp = s.w_partition();
    const Smdp full = build_smdp(s.dynamics, s.disturbance, p, wp);
    const Smdp reduced = build_smdp_reduced(s.dynamics, s.disturbance, p, wp);
    CHECK(full.state_count() == p.cell_count());
    CHECK(reduced.state_count() == static_cast<Index>(reduced.safe_cells.size()) + 1);
    CHECK(reduced.safe_cells.size() == 12);
    // the heater action from the hottest safe cell overshoots the safe set
    bool found_unsafe_cluster = false;
    for (const auto& row : reduced.rows)
        for (const auto& cl : row) found_unsafe_cluster |= cl.touches_unsafe;
    CHECK(found_unsafe_cluster);
}

TEST_CASE("smdp soundness: sampled transitions land inside their cluster") {
    const BenchmarkSetup s = umdp::testing::thermal_setup(22, 4);
    const Partition p = s.partition();
    const Partition wp = s.w_partition();
    const Smdp m = build_smdp(s.dynamics, s.disturbance, p, wp);
    CounterRng rng(101);
    for (int trial = 0; trial < 20; ++trial) {
        const Index si = static_cast<Index>(rng.next_u64() % m.safe_cells.size());
        const Index cell = m.safe_cells[static_cast<std::size_t>(si)];
        const Box cb = p.cell_box(cell);
        for (int i = 0; i < 500; ++i) {
            const Index wc = static_cast<Index>(rng.next_u64() % wp.cell_count());
            const Box wcb = wp.cell_box(wc);
            Vec x(1), w(1);
            x[0] = rng.next_in(cb.lo[0], cb.hi[0]);
            w[0] = rng.next_in(wcb.lo[0], wcb.hi[0]);
            for (int a = 0; a < m.num_actions; ++a) {
                const Vec next = s.dynamics.eval(x, a, w);
                const Index succ = locate(p, next);
                // the cluster built from this disturbance cell must contain succ:
                // its support is exactly the cell range of the reach box
                const Box reach = reach_over(s.dynamics, cb, a, wcb);
                bool found = false;
                for (const auto& cl : m.row(si, a)) {
                    if (!cluster_contains_cell(p, cl, succ)) continue;
                    Vec lo(1), hi(1);
                    lo[0] = p.grid_line(0, cl.lo[0]);
                    hi[0] = p.grid_line(0, cl.hi[0] + 1);
                    if (contains_box(Box(lo, hi), reach)) found = true;
                }
                CHECK(found);
            }
        }
    }
}

TEST_CASE("imdp: reach set inside one cell gives a point interval") {
    Dynamics dyn;
    dyn.state_dim = 1;
    dyn.disturbance_dim = 1;
    dyn.action_names = {"a"};
    dyn.lipschitz = 0.0;
    dyn.eval = [](const Vec&, int, const Vec&) {
        Vec out(1);
        out[0] = 0.55;
        return out;
    };
    dyn.interval_extension = [](const Box&, int, const Box&) { return make_box({0.52}, {0.58}); };
    const DisturbanceModel dist = uniform_disturbance(make_box({-0.1}, {0.1}));
    const RegionSet regions = make_region_set({}, {}, {make_box({0.0}, {1.0})});
    const RegionSet w_regions = make_region_set({}, {}, {dist.support});
    const Partition p = build_partition(regions, make_box({0.0}, {1.0}), {10});
    const Partition wp = build_partition(w_regions, dist.support, {2});
    const Imdp m = build_imdp(dyn, dist, p, wp);
    for (const auto& row : m.rows) {
        REQUIRE(row.size() == 1);
        CHECK(row[0].succ == 5);
        CHECK(row[0].p_lo == doctest::Approx(1.0));
        CHECK(row[0].p_hi == doctest::Approx(1.0));
    }
}

TEST_CASE("imdp on the expander: every lower bound is zero") {
    const BenchmarkSetup s = umdp::testing::expander_setup(16, 4);
    const Partition p = s.partition();
    const Partition wp = s.w_partition();
    const Imdp m = build_imdp(s.dynamics, s.disturbance, p, wp);
    for (const auto& row : m.rows) {
        double sum_lo = 0.0, sum_hi = 0.0;
        for (const auto& e : row) {
            CHECK(e.p_lo == 0.0); // reach widths exceed a cell for every c
            CHECK(e.p_lo <= e.p_hi);
            sum_lo += e.p_lo;
            sum_hi += e.p_hi;
        }
        CHECK(sum_lo <= 1.0 + 1e-12);
        CHECK(sum_hi >= 1.0 - 1e-12);
    }
}

TEST_CASE("imdp soundness: sampled successors have positive upper bound") {
    const BenchmarkSetup s = umdp::testing::thermal_setup(22, 4);
    const Partition p = s.partition();
    const Partition wp = s.w_partition();
    const Imdp m = build_imdp(s.dynamics, s.disturbance, p, wp);
    CounterRng rng(102);
    for (int trial = 0; trial < 20; ++trial) {
        const Index si = static_cast<Index>(rng.next_u64() % m.safe_cells.size());
        const Index cell = m.safe_cells[static_cast<std::size_t>(si)];
        const Box cb = p.cell_box(cell);
        for (int i = 0; i < 500; ++i) {
            Vec x(1);
            x[0] = rng.next_in(cb.lo[0], cb.hi[0]);
            Vec w = s.disturbance.sample(rng);
            for (int a = 0; a < m.num_actions; ++a) {
                const Index succ = locate(p, s.dynamics.eval(x, a, w));
                const auto& row = m.row(si, a);
                const auto it = std::find_if(row.begin(), row.end(),
                                             [&](const ImdpEntry& e) { return e.succ == succ; });
                REQUIRE(it != row.end());
                CHECK(it->p_hi > 0.0);
            }
        }
    }
}

TEST_CASE("refining the disturbance grid tightens interval rows") {
    const BenchmarkSetup s = umdp::testing::thermal_setup(22, 2);
    const Partition p = s.partition();
    const Partition wp_coarse = s.w_partition();
    const Partition wp_fine = refine(wp_coarse, 2);
    const Imdp coarse = build_imdp(s.dynamics, s.disturbance, p, wp_coarse);
    const Imdp fine = build_imdp(s.dynamics, s.disturbance, p, wp_fine);
    REQUIRE(coarse.rows.size() == fine.rows.size());
    for (std::size_t r = 0; r < coarse.rows.size(); ++r) {
        double lo_coarse = 0.0, lo_fine = 0.0, hi_coarse = 0.0, hi_fine = 0.0;
        for (const auto& e : coarse.rows[r]) {
            lo_coarse += e.p_lo;
            hi_coarse += e.p_hi;
        }
        for (const auto& e : fine.rows[r]) {
            lo_fine += e.p_lo;
            hi_fine += e.p_hi;
        }
        CHECK(lo_fine >= lo_coarse - 1e-12);
        CHECK(hi_fine <= hi_coarse + 1e-12);
    }
}

TEST_CASE("diameter bound: singleton clusters have zero ambiguity") {
    Dynamics dyn;
    dyn.state_dim = 1;
    dyn.disturbance_dim = 1;
    dyn.action_names = {"a"};
    dyn.lipschitz = 0.0;
    dyn.eval = [](const Vec&, int, const Vec&) {
        Vec out(1);
        out[0] = 0.55;
        return out;
    };
    dyn.interval_extension = [](const Box&, int, const Box&) { return make_box({0.54}, {0.56}); };
    const DisturbanceModel dist = uniform_disturbance(make_box({-0.1}, {0.1}));
    const RegionSet regions = make_region_set({}, {}, {make_box({0.0}, {1.0})});
    const RegionSet w_regions = make_region_set({}, {}, {dist.support});
    const Partition p = build_partition(regions, make_box({0.0}, {1.0}), {10});
    const Partition wp = build_partition(w_regions, dist.support, {2});
    const Smdp m = build_smdp(dyn, dist, p, wp);
    const DiameterReport report = smdp_diameter_bound(m, dyn.lipschitz);
    CHECK(report.global == doctest::Approx(0.0));
}

TEST_CASE("diameter bound respects the analytic ceiling and shrinks under refinement") {
    BenchmarkSetup s = umdp::testing::thermal_setup(22, 2);
    double previous = -1.0;
    for (int iter = 0; iter < 4; ++iter) {
        const Partition p = build_partition(s.regions, s.domain, s.counts);
        const Partition wp = build_partition(s.w_regions, s.disturbance.support, s.w_counts);
        const Smdp m = build_smdp(s.dynamics, s.disturbance, p, wp);
        const DiameterReport report = smdp_diameter_bound(m, s.dynamics.lipschitz);
        for (double b : report.per_row) CHECK(b <= report.ceiling + 1e-12);
        if (previous >= 0.0) CHECK(report.global <= previous + 1e-12);
        previous = report.global;
        for (auto& c : s.counts) c *= 2;
        for (auto& c : s.w_counts) c *= 2;
    }
}

TEST_CASE("imdp witness: point intervals mean a singleton ambiguity set") {
    Dynamics dyn;
    dyn.state_dim = 1;
    dyn.disturbance_dim = 1;
    dyn.action_names = {"a"};
    dyn.lipschitz = 0.0;
    dyn.eval = [](const Vec&, int, const Vec&) {
        Vec out(1);
        out[0] = 0.55;
        return out;
    };
    dyn.interval_extension = [](const Box&, int, const Box&) { return make_box({0.52}, {0.58}); };
    const DisturbanceModel dist = uniform_disturbance(make_box({-0.1}, {0.1}));
    const RegionSet regions = make_region_set({}, {}, {make_box({0.0}, {1.0})});
    const RegionSet w_regions = make_region_set({}, {}, {dist.support});
    const Partition p = build_partition(regions, make_box({0.0}, {1.0}), {10});
    const Partition wp = build_partition(w_regions, dist.support, {2});
    const Imdp m = build_imdp(dyn, dist, p, wp);
    CHECK(imdp_diameter_witness(m, 0, 0) == doctest::Approx(0.0));
}

TEST_CASE("imdp witness: trivial rows separate two mass-capable groups") {
    const RegionSet regions = make_region_set({}, {}, {make_box({0.0}, {1.0})});
    const Partition p = build_partition(regions, make_box({0.0}, {1.0}), {4});
    Imdp m;
    m.partition = &p;
    m.num_actions = 1;
    for (Index c = 0; c < 4; ++c) {
        m.safe_index_of_cell.push_back(c);
        m.safe_cells.push_back(c);
    }
    for (Index c = 0; c < 4; ++c) {
        std::vector<ImdpEntry> row;
        for (Index succ = 0; succ < 4; ++succ) row.push_back({succ, 0.0, 1.0});
        m.rows.push_back(std::move(row));
    }
    const double witness = imdp_diameter_witness(m, 0, 0);
    // extreme fills are Diracs at the outermost representatives
    CHECK(witness == doctest::Approx(0.75));
    // centroid separation bound from the two groups {0,1} and {2,3}
    CHECK(witness >= 0.5 * 0.5);

    // brute-force upper bound over all order-induced vertex pairs
    std::vector<std::size_t> order = {0, 1, 2, 3};
    std::vector<std::vector<double>> vertices;
    std::sort(order.begin(), order.end());
    do {
        std::vector<double> gamma(4, 0.0);
        double slack = 1.0;
        for (std::size_t e : order) {
            const double take = std::min(slack, 1.0);
            gamma[e] += take;
            slack -= take;
        }
        vertices.push_back(gamma);
    } while (std::next_permutation(order.begin(), order.end()));
    double best = 0.0;
    for (const auto& a : vertices) {
        for (const auto& b : vertices) {
            WeightedPoints pa, pb;
            for (Index c = 0; c < 4; ++c) {
                if (a[static_cast<std::size_t>(c)] > 0.0) {
                    pa.points.push_back(p.representative(c));
                    pa.weights.push_back(a[static_cast<std::size_t>(c)]);
                }
                if (b[static_cast<std::size_t>(c)] > 0.0) {
                    pb.points.push_back(p.representative(c));
                    pb.weights.push_back(b[static_cast<std::size_t>(c)]);
                }
            }
            best = std::max(best, wasserstein_discrete(pa, pb));
        }
    }
    CHECK(witness <= best + 1e-12);
}

TEST_CASE("reach sets escaping the domain report ReachOutsideDomain") {
    BenchmarkSetup s = umdp::testing::expander_setup(8, 4);
    s.domain = make_box({0.0}, {1.5}); // f([0,1]) + w reaches 2.0
    const Partition p = build_partition(s.regions, s.domain, {12});
    const Partition wp = s.w_partition();
    try {
        build_smdp(s.dynamics, s.disturbance, p, wp);
        FAIL("expected ReachOutsideDomain");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::ReachOutsideDomain);
    }
}

TEST_CASE("infeasible interval rows are rejected") {
    const RegionSet regions = make_region_set({}, {}, {make_box({0.0}, {1.0})});
    const Partition p = build_partition(regions, make_box({0.0}, {1.0}), {2});
    Imdp m;
    m.partition = &p;
    m.num_actions = 1;
    for (Index c = 0; c < 2; ++c) {
        m.safe_index_of_cell.push_back(c);
        m.safe_cells.push_back(c);
    }
    m.rows.push_back({{0, 0.0, 0.3}, {1, 0.0, 0.3}}); // upper bounds sum below 1
    m.rows.push_back({{0, 0.0, 1.0}});
    try {
        imdp_diameter_witness(m, 0, 0);
        FAIL("expected InfeasibleIntervals");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::InfeasibleIntervals);
    }
}

TEST_CASE("abstraction cache roundtrip") {
    const BenchmarkSetup s = umdp::testing::thermal_setup(22, 2);
    const Partition p = s.partition();
    const Partition wp = s.w_partition();
    const Smdp m = build_smdp(s.dynamics, s.disturbance, p, wp);
    save_smdp(m, "smdp_cache_test.bin", "smdp_cache_test.json");
    const Smdp loaded = load_smdp(p, "smdp_cache_test.bin");
    REQUIRE(loaded.rows.size() == m.rows.size());
    for (std::size_t r = 0; r < m.rows.size(); ++r) {
        REQUIRE(loaded.rows[r].size() == m.rows[r].size());
        for (std::size_t c = 0; c < m.rows[r].size(); ++c) {
            CHECK(loaded.rows[r][c].lo == m.rows[r][c].lo);
            CHECK(loaded.rows[r][c].hi == m.rows[r][c].hi);
            CHECK(loaded.rows[r][c].mass == m.rows[r][c].mass);
        }
    }
    const Imdp im = build_imdp(s.dynamics, s.disturbance, p, wp);
    save_imdp(im, "imdp_cache_test.bin", "imdp_cache_test.json");
    const Imdp iloaded = load_imdp(p, "imdp_cache_test.bin");
    REQUIRE(iloaded.rows.size() == im.rows.size());
    for (std::size_t r = 0; r < im.rows.size(); ++r) {
        REQUIRE(iloaded.rows[r].size() == im.rows[r].size());
        for (std::size_t c = 0; c < im.rows[r].size(); ++c) {
            CHECK(iloaded.rows[r][c].succ == im.rows[r][c].succ);
            CHECK(iloaded.rows[r][c].p_lo == im.rows[r][c].p_lo);
            CHECK(iloaded.rows[r][c].p_hi == im.rows[r][c].p_hi);
        }
    }
    std::remove("smdp_cache_test.bin");
    std::remove("smdp_cache_test.json");
    std::remove("imdp_cache_test.bin");
    std::remove("imdp_cache_test.json");
}
