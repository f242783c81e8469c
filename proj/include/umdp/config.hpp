#pragma once

#include "umdp/geometry.hpp"
#include "umdp/synthesis.hpp"
#include "umdp/system.hpp"

#include <json.hpp>

#include <cstdint>
#include <string>

namespace umdp {

/// A fully materialized run configuration: the declarative system tuple
/// (dynamics, disturbance, regions, labels) plus formula, horizon and
/// refinement schedule.  `raw` keeps the parsed JSON so configs round-trip
/// canonically.
struct RunConfig {
    nlohmann::json raw;

    std::string system_name;
    Dynamics dynamics;
    DisturbanceModel disturbance;
    RegionSet regions;
    Box domain; // X_abs hull

    std::string formula_text;
    Index horizon = 1;
    double epsilon = 0.0;
    AbstractionKind kind = AbstractionKind::Smdp;
    std::vector<Index> initial_counts;
    std::vector<Index> initial_w_counts;
    Index factor = 2;
    int max_iterations = 1;
    std::uint64_t seed = 0;

    SynthesisSpec synthesis_spec(int threads) const;
};

RunConfig parse_config(const nlohmann::json& j);
RunConfig load_config(const std::string& path);

/// Canonical serialization (sorted keys, shortest round-trip numbers).
std::string canonical_json(const nlohmann::json& j);

/// FNV-1a hash of the canonical form, for manifests.
std::uint64_t config_hash(const nlohmann::json& j);

} // namespace umdp
