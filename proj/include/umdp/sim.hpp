#pragma once

#include "umdp/rdp.hpp"
#include "umdp/rng.hpp"
#include "umdp/system.hpp"

#include <vector>

namespace umdp {

struct Trajectory {
    std::vector<Vec> states;  // x_0 .. x_T (truncated at acceptance)
    std::vector<int> actions; // u_0 .. u_{T-1}
    std::vector<Label> trace; // l_0 .. l_T
    std::vector<int> dfa_states;
    bool satisfied = false;
    bool exited_domain = false;
};

/// Closed-loop rollout.  Stops early once the DFA accepts (accepting
/// states are absorbing, so the outcome is fixed); leaving the partition
/// domain is recorded and the controller falls back to its default action.
Trajectory simulate(const Dynamics& dyn, const DisturbanceModel& dist, Controller controller,
                    const Vec& x0, Index horizon, CounterRng& rng);

struct ProbabilityEstimate {
    double p_hat = 0.0;
    double ci_low = 0.0;
    double ci_high = 1.0;
    int satisfied = 0;
    int trials = 0;
};

/// Monte Carlo estimate with a 95% Clopper-Pearson interval.  Trajectory i
/// draws from the (seed, i) counter stream, so estimates are reproducible
/// for any thread count.
ProbabilityEstimate estimate_probability(const Dynamics& dyn, const DisturbanceModel& dist,
                                         const Controller& controller, const Vec& x0, Index horizon,
                                         int trials, std::uint64_t seed, int threads = 1);

/// Exact binomial (Clopper-Pearson) bounds, exposed for tests.
double clopper_pearson_low(int successes, int trials, double alpha = 0.05);
double clopper_pearson_high(int successes, int trials, double alpha = 0.05);

} // namespace umdp
