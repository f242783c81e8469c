#include "umdp/system.hpp"

#include "umdp/errors.hpp"

#include <cmath>

namespace umdp {

namespace {

double std_normal_cdf(double z) { return 0.5 * std::erfc(-z / 1.4142135623730950488); }

} // namespace

Vec DisturbanceModel::sample(CounterRng& rng) const {
    const Eigen::Index n = support.dim();
    Vec w(n);
    if (kind == DisturbanceKind::Uniform) {
        for (Eigen::Index i = 0; i < n; ++i) w[i] = rng.next_in(support.lo[i], support.hi[i]);
        return w;
    }
    for (Eigen::Index i = 0; i < n; ++i) {
        // Rejection against the truncation box; acceptance is ~99.7% at 3 sigma.
        double v;
        do {
            v = mean[i] + sigma[i] * rng.next_normal();
        } while (v < support.lo[i] || v > support.hi[i]);
        w[i] = v;
    }
    return w;
}

DisturbanceModel uniform_disturbance(Box support) {
    DisturbanceModel d;
    d.kind = DisturbanceKind::Uniform;
    d.support = std::move(support);
    return d;
}

DisturbanceModel truncated_gaussian(Vec mean, Vec sigma, Box support) {
    DisturbanceModel d;
    d.kind = DisturbanceKind::TruncatedGaussian;
    d.support = std::move(support);
    d.mean = std::move(mean);
    d.sigma = std::move(sigma);
    for (Eigen::Index i = 0; i < d.sigma.size(); ++i)
        if (!(d.sigma[i] > 0.0)) throw Error(ErrorCode::ConfigInvalid, "sigma must be positive");
    return d;
}

double cell_mass(const DisturbanceModel& dist, const Box& c) {
    const Box& W = dist.support;
    for (Eigen::Index i = 0; i < W.dim(); ++i)
        if (c.lo[i] < W.lo[i] - 1e-12 || c.hi[i] > W.hi[i] + 1e-12)
            throw Error(ErrorCode::CellOutsideSupport, "disturbance cell escapes the support box");
    if (dist.kind == DisturbanceKind::Uniform) return volume(c) / volume(W);
    double mass = 1.0;
    for (Eigen::Index i = 0; i < W.dim(); ++i) {
        const double denom = std_normal_cdf((W.hi[i] - dist.mean[i]) / dist.sigma[i]) -
                             std_normal_cdf((W.lo[i] - dist.mean[i]) / dist.sigma[i]);
        const double num = std_normal_cdf((c.hi[i] - dist.mean[i]) / dist.sigma[i]) -
                           std_normal_cdf((c.lo[i] - dist.mean[i]) / dist.sigma[i]);
        mass *= num / denom;
    }
    return mass;
}

Box reach_over(const Dynamics& dyn, const Box& b, int action, const Box& c) {
    if (dyn.interval_extension) return dyn.interval_extension(b, action, c);
    const Vec image = dyn.eval(center(b), action, center(c));
    const double pad = dyn.lipschitz * (radius(b) + radius(c));
    return pad_box(point_box(image), pad);
}

Vec sample_step(const Dynamics& dyn, const DisturbanceModel& dist, const Vec& x, int action, CounterRng& rng) {
    return dyn.eval(x, action, dist.sample(rng));
}

Dynamics make_thermal1d(double tau_alpha_e, double tau_alpha_h, double t_env, double t_heater,
                        double lipschitz) {
    Dynamics dyn;
    dyn.state_dim = 1;
    dyn.disturbance_dim = 1;
    dyn.action_names = {"off", "heat"};
    dyn.lipschitz = lipschitz;
    dyn.eval = [=](const Vec& x, int a, const Vec& w) {
        Vec out(1);
        out[0] = x[0] + tau_alpha_e * (t_env - x[0]) + (a == 1 ? tau_alpha_h * (t_heater - x[0]) : 0.0) + w[0];
        return out;
    };
    dyn.interval_extension = [=](const Box& b, int a, const Box& c) {
        const double slope = 1.0 - tau_alpha_e - (a == 1 ? tau_alpha_h : 0.0);
        const double offset = tau_alpha_e * t_env + (a == 1 ? tau_alpha_h * t_heater : 0.0);
        // slope > 0 for the sensible parameter range
        Vec lo(1), hi(1);
        lo[0] = slope * b.lo[0] + offset + c.lo[0];
        hi[0] = slope * b.hi[0] + offset + c.hi[0];
        return Box(lo, hi);
    };
    return dyn;
}

Dynamics make_expander1d(double slope, double lipschitz) {
    Dynamics dyn;
    dyn.state_dim = 1;
    dyn.disturbance_dim = 1;
    dyn.action_names = {"a"};
    dyn.lipschitz = lipschitz;
    dyn.eval = [=](const Vec& x, int, const Vec& w) {
        Vec out(1);
        out[0] = slope * x[0] + w[0];
        return out;
    };
    dyn.interval_extension = [=](const Box& b, int, const Box& c) {
        Vec lo(1), hi(1);
        lo[0] = slope * b.lo[0] + c.lo[0];
        hi[0] = slope * b.hi[0] + c.hi[0];
        return Box(lo, hi);
    };
    return dyn;
}

namespace {

// c_m(x) = 1 - 0.4 exp(-100 ((x1-0.5)^2 + (x2-0.5)^2))
double cart_cm(const Vec& x) {
    const double dx = x[0] - 0.5, dy = x[1] - 0.5;
    return 1.0 - 0.4 * std::exp(-100.0 * (dx * dx + dy * dy));
}

// Interval of t^2 for t in [lo, hi].
void square_interval(double lo, double hi, double& out_lo, double& out_hi) {
    const double a = lo * lo, b = hi * hi;
    out_hi = std::max(a, b);
    out_lo = (lo <= 0.0 && hi >= 0.0) ? 0.0 : std::min(a, b);
}

// Interval of u*v for u in [ulo, uhi], v in [vlo, vhi].
void product_interval(double ulo, double uhi, double vlo, double vhi, double& out_lo, double& out_hi) {
    const double p1 = ulo * vlo, p2 = ulo * vhi, p3 = uhi * vlo, p4 = uhi * vhi;
    out_lo = std::min(std::min(p1, p2), std::min(p3, p4));
    out_hi = std::max(std::max(p1, p2), std::max(p3, p4));
}

} // namespace

Dynamics make_cart2d(double v_lin, double c_dist, double lipschitz) {
    Dynamics dyn;
    dyn.state_dim = 2;
    dyn.disturbance_dim = 2;
    // 8 headings in [-pi, pi], ascending, including 0 and pi.
    std::vector<double> headings;
    for (int k = -3; k <= 4; ++k) headings.push_back(static_cast<double>(k) * 0.78539816339744830962);
    for (double h : headings) dyn.action_names.push_back("h" + std::to_string(h));
    dyn.lipschitz = lipschitz;
    dyn.eval = [=](const Vec& x, int a, const Vec& w) {
        const double u = headings[static_cast<std::size_t>(a)];
        const double cm = cart_cm(x);
        Vec out(2);
        out[0] = x[0] + v_lin * std::cos(u) + c_dist * std::tanh(cm * w[0]);
        out[1] = x[1] + v_lin * std::sin(u) + c_dist * std::tanh(cm * w[1]);
        return out;
    };
    dyn.interval_extension = [=](const Box& b, int a, const Box& c) {
        const double u = headings[static_cast<std::size_t>(a)];
        double r2_lo = 0.0, r2_hi = 0.0;
        for (int d = 0; d < 2; ++d) {
            double s_lo, s_hi;
            square_interval(b.lo[d] - 0.5, b.hi[d] - 0.5, s_lo, s_hi);
            r2_lo += s_lo;
            r2_hi += s_hi;
        }
        // c_m is increasing in r^2 and positive (>= 0.6).
        const double cm_lo = 1.0 - 0.4 * std::exp(-100.0 * r2_lo);
        const double cm_hi = 1.0 - 0.4 * std::exp(-100.0 * r2_hi);
        Vec lo(2), hi(2);
        const double drift[2] = {v_lin * std::cos(u), v_lin * std::sin(u)};
        for (int d = 0; d < 2; ++d) {
            double arg_lo, arg_hi;
            product_interval(cm_lo, cm_hi, c.lo[d], c.hi[d], arg_lo, arg_hi);
            lo[d] = b.lo[d] + drift[d] + c_dist * std::tanh(arg_lo);
            hi[d] = b.hi[d] + drift[d] + c_dist * std::tanh(arg_hi);
        }
        return Box(lo, hi);
    };
    return dyn;
}

} // namespace umdp
