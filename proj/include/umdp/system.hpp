#pragma once

#include "umdp/geometry.hpp"
#include "umdp/rng.hpp"
#include "umdp/types.hpp"

#include <functional>
#include <string>
#include <vector>

namespace umdp {

/// Discrete-time controlled dynamics x' = f(x, a, w) with a finite action
/// set.  `lipschitz` must bound the joint max-norm variation,
///   |f(x,a,w) - f(x',a,w')|_inf <= L * (|x-x'|_inf + |w-w'|_inf),
/// and is user-supplied, never estimated (reach-set soundness depends on
/// it).  An exact interval extension may be registered per system; it is
/// used by reach_over instead of the Lipschitz pad and must itself be a
/// reach-set superset.
struct Dynamics {
    int state_dim = 0;
    int disturbance_dim = 0;
    std::vector<std::string> action_names;
    double lipschitz = 0.0;
    std::function<Vec(const Vec&, int, const Vec&)> eval;
    std::function<Box(const Box&, int, const Box&)> interval_extension; // optional

    int num_actions() const { return static_cast<int>(action_names.size()); }
};

enum class DisturbanceKind { Uniform, TruncatedGaussian };

/// Compactly supported disturbance over the box `support`.
struct DisturbanceModel {
    DisturbanceKind kind = DisturbanceKind::Uniform;
    Box support;
    Vec mean;  // truncated Gaussian only
    Vec sigma; // per-axis standard deviations (diagonal covariance)

    Vec sample(CounterRng& rng) const;
};

DisturbanceModel uniform_disturbance(Box support);
DisturbanceModel truncated_gaussian(Vec mean, Vec sigma, Box support);

/// P_W(c) for a cell c of the disturbance partition.  Errors with
/// CellOutsideSupport when c is not (within 1e-12) inside the support.
double cell_mass(const DisturbanceModel& dist, const Box& c);

/// Box containing the exact reach set R(b, a, c) = { f(x,a,w) : x in b, w in c }.
Box reach_over(const Dynamics& dyn, const Box& b, int action, const Box& c);

inline Vec step(const Dynamics& dyn, const Vec& x, int action, const Vec& w) { return dyn.eval(x, action, w); }

Vec sample_step(const Dynamics& dyn, const DisturbanceModel& dist, const Vec& x, int action, CounterRng& rng);

/// Builtin benchmark systems.  Parameters override the defaults noted in
/// each factory.
Dynamics make_thermal1d(double tau_alpha_e = 0.06, double tau_alpha_h = 0.08, double t_env = 15.0,
                        double t_heater = 45.0, double lipschitz = 1.0);
Dynamics make_expander1d(double slope = 1.5, double lipschitz = 1.5);
Dynamics make_cart2d(double v_lin = 0.08, double c_dist = 0.25, double lipschitz = 1.4);

} // namespace umdp
