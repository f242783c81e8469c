#pragma once

#include "umdp/rdp.hpp"

namespace umdp {

/// Brute-force robust backups for tiny instances, independent of the
/// greedy/reduced formulas they check.  SMDP: enumerate one Dirac per
/// cluster (the extreme points of the product of simplices).  IMDP:
/// enumerate every order-induced extreme point of the interval polytope.
/// Instances beyond 8 cells, 2 actions, or 4-wide supports/rows error
/// with InstanceTooLarge.
void backup_smdp_oracle(const ValueField& in, const Smdp& smdp, const ProductView& view, const Dfa& dfa,
                        BackupMode mode, ValueField& out);
void backup_imdp_oracle(const ValueField& in, const Imdp& imdp, const ProductView& view, const Dfa& dfa,
                        BackupMode mode, ValueField& out);

/// Randomized comparison against the production backups; returns the max
/// absolute deviation over `instances` random tiny instances.
double oracle_check_smdp(int instances, std::uint64_t seed);
double oracle_check_imdp(int instances, std::uint64_t seed);

} // namespace umdp
