#pragma once

#include "umdp/geometry.hpp"
#include "umdp/rdp.hpp"
#include "umdp/sim.hpp"
#include "umdp/synthesis.hpp"

#include <json.hpp>

#include <string>
#include <vector>

namespace umdp {

void write_text_file(const std::string& path, const std::string& content);

std::string bounds_to_csv(const Partition& partition, const BoundsPair& bounds);
std::string gap_rows_to_csv(const std::vector<GapRow>& rows);
std::string value_field_to_csv(const Partition& partition, const ValueField& field);
std::string trajectories_to_csv(const std::vector<Trajectory>& trajectories);

/// Plain (P2) PGM of per-cell values for 2-dimensional grids, row 0 at the
/// top (highest second coordinate).  The accompanying scale record stores
/// the value range mapped onto 0..255.
std::string values_to_pgm(const Partition& partition, const Vec& values);
nlohmann::json pgm_scale_record(const Vec& values);

void write_strategy(const Strategy& strategy, const std::string& path);
Strategy read_strategy(const std::string& path);

nlohmann::json synthesis_result_to_json(const SynthesisResult& result,
                                        const std::vector<Index>& final_counts,
                                        const std::vector<Index>& final_w_counts,
                                        std::uint64_t config_hash_value);

} // namespace umdp
