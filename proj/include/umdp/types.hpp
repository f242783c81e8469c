#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <vector>

namespace umdp {

using Vec = Eigen::VectorXd;
using Index = std::int64_t;
using IndexVec = std::vector<Index>;

} // namespace umdp
