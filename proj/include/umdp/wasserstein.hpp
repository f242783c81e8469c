#pragma once

#include "umdp/types.hpp"

#include <vector>

namespace umdp {

/// Discrete distribution as weighted support points in a common space.
struct WeightedPoints {
    std::vector<Vec> points;
    std::vector<double> weights;
};

/// Exact 1-Wasserstein distance under the Euclidean ground metric.
/// One-dimensional inputs use the closed-form coupling of sorted CDFs;
/// higher dimensions run an exact successive-shortest-path transport
/// solve.  Supports above 256 points error with SupportTooLarge; weights
/// must each sum to 1 within 1e-9.
double wasserstein_discrete(const WeightedPoints& p, const WeightedPoints& q);

} // namespace umdp
