#include "umdp/synthesis.hpp"

#include "helpers.hpp"

#include <doctest.h>

using namespace umdp;
using umdp::testing::BenchmarkSetup;

namespace {

SynthesisSpec spec_from(const BenchmarkSetup& s, Index horizon, double epsilon, AbstractionKind kind,
                        int max_iterations, int threads = 1) {
    SynthesisSpec spec;
    spec.x_abs = s.domain;
    spec.initial_counts = s.counts;
    spec.initial_w_counts = s.w_counts;
    spec.factor = 2;
    spec.max_iterations = max_iterations;
    spec.horizon = horizon;
    spec.epsilon = epsilon;
    spec.kind = kind;
    spec.threads = threads;
    return spec;
}

} // namespace

TEST_CASE("a vacuous threshold converges at the first iteration") {
    const BenchmarkSetup s = umdp::testing::thermal_setup();
    FormulaArena arena(s.regions.atoms);
    const auto phi = parse_formula(arena, "F goal & G safe");
    const SynthesisResult r = synthesize(s.dynamics, s.disturbance, s.regions, arena, phi,
                                         spec_from(s, 20, 1.1, AbstractionKind::Smdp, 5));
    CHECK(r.status == SynthesisStatus::Converged);
    CHECK(r.iterations.size() == 1);
    CHECK(r.bounds.gap <= 1.0);
}

TEST_CASE("thermal smdp refinement shrinks the gap monotonically in eta") {
    const BenchmarkSetup s = umdp::testing::thermal_setup();
    FormulaArena arena(s.regions.atoms);
    const auto phi = parse_formula(arena, "F goal & G safe");
    const SynthesisResult r = synthesize(s.dynamics, s.disturbance, s.regions, arena, phi,
                                         spec_from(s, 20, 0.2, AbstractionKind::Smdp, 6));
    CHECK(r.status == SynthesisStatus::Converged);
    REQUIRE(r.iterations.size() >= 2);
    for (std::size_t i = 1; i < r.iterations.size(); ++i)
        CHECK(r.iterations[i].eta < r.iterations[i - 1].eta); // strictly decreasing
    CHECK(r.iterations.back().gap <= 0.2);
    // converged means the epsilon contract holds
    CHECK(r.bounds.gap <= r.epsilon);
}

TEST_CASE("expander imdp never improves and hits the cap") {
    const BenchmarkSetup s = umdp::testing::expander_setup();
    FormulaArena arena(s.regions.atoms);
    const auto phi = parse_formula(arena, "F goal & G safe");
    const SynthesisResult r = synthesize(s.dynamics, s.disturbance, s.regions, arena, phi,
                                         spec_from(s, 1, 0.9, AbstractionKind::Imdp, 3));
    CHECK(r.status == SynthesisStatus::CapReached);
    CHECK(r.iterations.size() == 3);
    for (const auto& it : r.iterations) CHECK(it.gap == doctest::Approx(1.0));
    const auto rows = gap_report(r);
    REQUIRE(rows.size() == 3);
    for (const auto& row : rows) CHECK(row.gap == doctest::Approx(1.0));
}

TEST_CASE("gap report mirrors the iteration log") {
    const BenchmarkSetup s = umdp::testing::thermal_setup();
    FormulaArena arena(s.regions.atoms);
    const auto phi = parse_formula(arena, "F goal & G safe");
    const SynthesisResult r = synthesize(s.dynamics, s.disturbance, s.regions, arena, phi,
                                         spec_from(s, 10, 0.3, AbstractionKind::SmdpReduced, 4));
    const auto rows = gap_report(r);
    REQUIRE(rows.size() == r.iterations.size());
    for (std::size_t i = 0; i < rows.size(); ++i) {
        CHECK(rows[i].iteration == r.iterations[i].iteration);
        CHECK(rows[i].gap == r.iterations[i].gap);
        CHECK(rows[i].diameter == r.iterations[i].diameter);
        CHECK(rows[i].gap > 0.0);
    }
}

TEST_CASE("identical runs are bit-identical, and thread count does not matter") {
    const BenchmarkSetup s = umdp::testing::thermal_setup();
    FormulaArena arena(s.regions.atoms);
    const auto phi = parse_formula(arena, "F goal & G safe");
    const SynthesisResult a = synthesize(s.dynamics, s.disturbance, s.regions, arena, phi,
                                         spec_from(s, 12, 0.2, AbstractionKind::Smdp, 4, 1));
    const SynthesisResult b = synthesize(s.dynamics, s.disturbance, s.regions, arena, phi,
                                         spec_from(s, 12, 0.2, AbstractionKind::Smdp, 4, 1));
    const SynthesisResult c = synthesize(s.dynamics, s.disturbance, s.regions, arena, phi,
                                         spec_from(s, 12, 0.2, AbstractionKind::Smdp, 4, 4));
    REQUIRE(a.bounds.p_lo.size() == b.bounds.p_lo.size());
    REQUIRE(a.bounds.p_lo.size() == c.bounds.p_lo.size());
    for (Index i = 0; i < a.bounds.p_lo.size(); ++i) {
        CHECK(a.bounds.p_lo[i] == b.bounds.p_lo[i]);
        CHECK(a.bounds.p_hi[i] == b.bounds.p_hi[i]);
        CHECK(a.bounds.p_lo[i] == c.bounds.p_lo[i]);
        CHECK(a.bounds.p_hi[i] == c.bounds.p_hi[i]);
    }
    CHECK(a.strategy.actions == b.strategy.actions);
    CHECK(a.strategy.actions == c.strategy.actions);
}

TEST_CASE("invalid synthesis parameters are rejected") {
    const BenchmarkSetup s = umdp::testing::thermal_setup();
    FormulaArena arena(s.regions.atoms);
    const auto phi = parse_formula(arena, "F goal & G safe");
    CHECK_THROWS(synthesize(s.dynamics, s.disturbance, s.regions, arena, phi,
                            spec_from(s, 20, 0.0, AbstractionKind::Smdp, 3)));
    CHECK_THROWS(synthesize(s.dynamics, s.disturbance, s.regions, arena, phi,
                            spec_from(s, 0, 0.1, AbstractionKind::Smdp, 3)));
    CHECK_THROWS(synthesize(s.dynamics, s.disturbance, s.regions, arena, phi,
                            spec_from(s, 20, 0.1, AbstractionKind::Smdp, 0)));
}
