#include "umdp/wasserstein.hpp"

#include "umdp/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace umdp {

namespace {

double weight_sum(const WeightedPoints& p) {
    return std::accumulate(p.weights.begin(), p.weights.end(), 0.0);
}

double wasserstein_1d(const WeightedPoints& p, const WeightedPoints& q) {
    struct Pt {
        double x;
        double dp; // +mass from p, -mass from q
    };
    std::vector<Pt> pts;
    pts.reserve(p.points.size() + q.points.size());
    for (std::size_t i = 0; i < p.points.size(); ++i) pts.push_back({p.points[i][0], p.weights[i]});
    for (std::size_t j = 0; j < q.points.size(); ++j) pts.push_back({q.points[j][0], -q.weights[j]});
    std::sort(pts.begin(), pts.end(), [](const Pt& a, const Pt& b) { return a.x < b.x; });
    // integral of |F_p - F_q| between consecutive support points
    double cost = 0.0, cdf_diff = 0.0;
    for (std::size_t k = 0; k + 1 <= pts.size(); ++k) {
        cdf_diff += pts[k].dp;
        if (k + 1 < pts.size()) cost += std::abs(cdf_diff) * (pts[k + 1].x - pts[k].x);
    }
    return cost;
}

/// Successive shortest augmenting paths with potentials on the dense
/// bipartite transport graph.  Exact up to floating-point accumulation.
double transport_ssp(const WeightedPoints& p, const WeightedPoints& q) {
    const std::size_t n = p.points.size(), m = q.points.size();
    std::vector<double> supply = p.weights;
    std::vector<double> demand = q.weights;
    // match totals exactly so the flow terminates cleanly
    const double scale = weight_sum(p) / weight_sum(q);
    for (auto& d : demand) d *= scale;

    std::vector<double> cost(n * m);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < m; ++j) cost[i * m + j] = (p.points[i] - q.points[j]).norm();

    std::vector<double> flow(n * m, 0.0);
    std::vector<double> pot(n + m, 0.0); // node potentials, sources first
    const double inf = std::numeric_limits<double>::infinity();

    double remaining = std::accumulate(supply.begin(), supply.end(), 0.0);
    const std::size_t max_rounds = 4 * (n + m) * (n + m) + 64;
    for (std::size_t round = 0; remaining > 1e-13 && round < max_rounds; ++round) {
        // Dijkstra over the residual graph (dense; n+m nodes)
        std::vector<double> dist(n + m, inf);
        std::vector<int> parent(n + m, -1);
        std::vector<bool> done(n + m, false);
        for (std::size_t i = 0; i < n; ++i)
            if (supply[i] > 1e-15) dist[i] = 0.0;
        while (true) {
            std::size_t best = n + m;
            double best_d = inf;
            for (std::size_t v = 0; v < n + m; ++v)
                if (!done[v] && dist[v] < best_d) {
                    best_d = dist[v];
                    best = v;
                }
            if (best == n + m) break;
            done[best] = true;
            if (best < n) {
                const std::size_t i = best;
                for (std::size_t j = 0; j < m; ++j) {
                    if (done[n + j]) continue; // finalized parents must stay a tree
                    const double rc = std::max(0.0, cost[i * m + j] + pot[i] - pot[n + j]);
                    if (dist[i] + rc < dist[n + j]) {
                        dist[n + j] = dist[i] + rc;
                        parent[n + j] = static_cast<int>(i);
                    }
                }
            } else {
                const std::size_t j = best - n;
                for (std::size_t i = 0; i < n; ++i) {
                    if (done[i] || flow[i * m + j] <= 1e-15) continue;
                    const double rc = std::max(0.0, -cost[i * m + j] + pot[n + j] - pot[i]);
                    if (dist[n + j] + rc < dist[i]) {
                        dist[i] = dist[n + j] + rc;
                        parent[i] = static_cast<int>(n + j);
                    }
                }
            }
        }
        // nearest sink with unmet demand
        std::size_t target = n + m;
        double target_d = inf;
        for (std::size_t j = 0; j < m; ++j)
            if (demand[j] > 1e-15 && dist[n + j] < target_d) {
                target_d = dist[n + j];
                target = n + j;
            }
        if (target == n + m) break; // numerically exhausted
        // bottleneck: root supply, target demand, and backward-arc flows
        double push = demand[target - n];
        std::size_t root = target;
        while (parent[root] >= 0) {
            const std::size_t u = static_cast<std::size_t>(parent[root]);
            if (root < n) push = std::min(push, flow[root * m + (u - n)]);
            root = u;
        }
        push = std::min(push, supply[root]);
        if (!(push > 1e-15)) break; // numerically exhausted
        for (std::size_t v = target; parent[v] >= 0;) {
            const std::size_t u = static_cast<std::size_t>(parent[v]);
            if (v >= n)
                flow[u * m + (v - n)] += push; // source -> sink
            else
                flow[v * m + (u - n)] -= push; // cancel along backward arc
            v = u;
        }
        supply[root] -= push;
        demand[target - n] -= push;
        remaining -= push;
        for (std::size_t v = 0; v < n + m; ++v)
            pot[v] += std::min(dist[v], target_d);
    }

    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < m; ++j) total += flow[i * m + j] * cost[i * m + j];
    return total;
}

} // namespace

double wasserstein_discrete(const WeightedPoints& p, const WeightedPoints& q) {
    if (p.points.empty() || q.points.empty())
        throw Error(ErrorCode::ConfigInvalid, "wasserstein_discrete requires nonempty supports");
    if (p.points.size() != p.weights.size() || q.points.size() != q.weights.size())
        throw Error(ErrorCode::ConfigInvalid, "points/weights size mismatch");
    if (p.points.size() > 256 || q.points.size() > 256)
        throw Error(ErrorCode::SupportTooLarge, "transport solver capped at 256 support points");
    if (std::abs(weight_sum(p) - 1.0) > 1e-9 || std::abs(weight_sum(q) - 1.0) > 1e-9)
        throw Error(ErrorCode::ConfigInvalid, "weights must sum to 1");
    if (p.points.front().size() == 1 && q.points.front().size() == 1) return wasserstein_1d(p, q);
    return transport_ssp(p, q);
}

} // namespace umdp
