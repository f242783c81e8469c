#include "umdp/sim.hpp"

#include "umdp/errors.hpp"
#include "umdp/parallel.hpp"

#include <atomic>
#include <cmath>

namespace umdp {

Trajectory simulate(const Dynamics& dyn, const DisturbanceModel& dist, Controller controller,
                    const Vec& x0, Index horizon, CounterRng& rng) {
    Trajectory traj;
    controller.reset();
    Vec x = x0;
    for (Index t = 0;; ++t) {
        traj.states.push_back(x);
        traj.trace.push_back(controller.regions().label_of(x));
        // Observing x_t advances the DFA; the returned action is discarded
        // for the final state.
        const int action = controller.next_action(std::min(t, horizon - 1), x);
        traj.dfa_states.push_back(controller.dfa_state());
        if (controller.accepted()) {
            traj.satisfied = true;
            break;
        }
        if (t >= horizon) break;
        traj.actions.push_back(action);
        x = sample_step(dyn, dist, x, action, rng);
    }
    traj.exited_domain = controller.left_domain();
    return traj;
}

ProbabilityEstimate estimate_probability(const Dynamics& dyn, const DisturbanceModel& dist,
                                         const Controller& controller, const Vec& x0, Index horizon,
                                         int trials, std::uint64_t seed, int threads) {
    if (trials < 100) throw Error(ErrorCode::ConfigInvalid, "estimate_probability requires N >= 100");
    std::atomic<int> satisfied{0};
    parallel_for(static_cast<std::size_t>(trials), threads, [&](std::size_t begin, std::size_t end) {
        int local = 0;
        for (std::size_t i = begin; i < end; ++i) {
            CounterRng rng(seed, static_cast<std::uint64_t>(i));
            const Trajectory traj = simulate(dyn, dist, controller, x0, horizon, rng);
            if (traj.satisfied) ++local;
        }
        satisfied += local;
    });
    ProbabilityEstimate est;
    est.satisfied = satisfied.load();
    est.trials = trials;
    est.p_hat = static_cast<double>(est.satisfied) / static_cast<double>(trials);
    est.ci_low = clopper_pearson_low(est.satisfied, trials);
    est.ci_high = clopper_pearson_high(est.satisfied, trials);
    return est;
}

namespace {

// Regularized incomplete beta via Lentz continued fractions.
double betacf(double a, double b, double x) {
    const int max_iter = 300;
    const double eps = 3e-14, fpmin = 1e-300;
    const double qab = a + b, qap = a + 1.0, qam = a - 1.0;
    double c = 1.0, d = 1.0 - qab * x / qap;
    if (std::abs(d) < fpmin) d = fpmin;
    d = 1.0 / d;
    double h = d;
    for (int m = 1; m <= max_iter; ++m) {
        const int m2 = 2 * m;
        double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = 1.0 + aa * d;
        if (std::abs(d) < fpmin) d = fpmin;
        c = 1.0 + aa / c;
        if (std::abs(c) < fpmin) c = fpmin;
        d = 1.0 / d;
        h *= d * c;
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = 1.0 + aa * d;
        if (std::abs(d) < fpmin) d = fpmin;
        c = 1.0 + aa / c;
        if (std::abs(c) < fpmin) c = fpmin;
        d = 1.0 / d;
        const double del = d * c;
        h *= del;
        if (std::abs(del - 1.0) < eps) break;
    }
    return h;
}

double betai(double a, double b, double x) {
    if (x <= 0.0) return 0.0;
    if (x >= 1.0) return 1.0;
    const double ln_bt = std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) + a * std::log(x) +
                         b * std::log(1.0 - x);
    const double bt = std::exp(ln_bt);
    if (x < (a + 1.0) / (a + b + 2.0)) return bt * betacf(a, b, x) / a;
    return 1.0 - bt * betacf(b, a, 1.0 - x) / b;
}

// Inverse of x -> betai(a, b, x) by bisection (monotone increasing).
double beta_quantile(double a, double b, double p) {
    double lo = 0.0, hi = 1.0;
    for (int i = 0; i < 200; ++i) {
        const double mid = 0.5 * (lo + hi);
        if (betai(a, b, mid) < p)
            lo = mid;
        else
            hi = mid;
    }
    return 0.5 * (lo + hi);
}

} // namespace

double clopper_pearson_low(int successes, int trials, double alpha) {
    if (successes <= 0) return 0.0;
    return beta_quantile(static_cast<double>(successes), static_cast<double>(trials - successes + 1),
                         alpha / 2.0);
}

double clopper_pearson_high(int successes, int trials, double alpha) {
    if (successes >= trials) return 1.0;
    return beta_quantile(static_cast<double>(successes + 1), static_cast<double>(trials - successes),
                         1.0 - alpha / 2.0);
}

} // namespace umdp
