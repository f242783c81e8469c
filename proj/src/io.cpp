#include "umdp/io.hpp"

#include "umdp/errors.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>

namespace umdp {

namespace {

// shortest round-trip formatting, same as the JSON writer uses
std::string format_double(double v) {
    nlohmann::json j = v;
    return j.dump();
}

} // namespace

void write_text_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error(ErrorCode::ConfigInvalid, "cannot open " + path + " for writing");
    out << content;
}

std::string bounds_to_csv(const Partition& partition, const BoundsPair& bounds) {
    std::ostringstream out;
    out << "cell";
    for (Eigen::Index d = 0; d < partition.dim(); ++d) out << ",center" << d;
    out << ",safe,p_lo,p_hi\n";
    for (Index c = 0; c < partition.cell_count(); ++c) {
        out << c;
        const Vec rep = partition.representative(c);
        for (Eigen::Index d = 0; d < partition.dim(); ++d) out << "," << format_double(rep[d]);
        out << "," << (partition.cell_safe(c) ? 1 : 0) << "," << format_double(bounds.p_lo[c]) << ","
            << format_double(bounds.p_hi[c]) << "\n";
    }
    return out.str();
}

std::string gap_rows_to_csv(const std::vector<GapRow>& rows) {
    std::ostringstream out;
    out << "iteration,eta,gap,diameter\n";
    for (const auto& r : rows)
        out << r.iteration << "," << format_double(r.eta) << "," << format_double(r.gap) << ","
            << format_double(r.diameter) << "\n";
    return out.str();
}

std::string value_field_to_csv(const Partition& partition, const ValueField& field) {
    std::ostringstream out;
    out << "cell";
    for (Eigen::Index d = 0; d < partition.dim(); ++d) out << ",center" << d;
    out << ",z,value\n";
    for (Index c = 0; c < partition.cell_count() && c < field.v.rows(); ++c) {
        const Vec rep = partition.representative(c);
        for (int z = 0; z < field.v.cols(); ++z) {
            out << c;
            for (Eigen::Index d = 0; d < partition.dim(); ++d) out << "," << format_double(rep[d]);
            out << "," << z << "," << format_double(field.v(c, z)) << "\n";
        }
    }
    return out.str();
}

std::string trajectories_to_csv(const std::vector<Trajectory>& trajectories) {
    std::ostringstream out;
    out << "trajectory,t";
    if (!trajectories.empty() && !trajectories.front().states.empty()) {
        for (Eigen::Index d = 0; d < trajectories.front().states.front().size(); ++d) out << ",x" << d;
    }
    out << ",action,z,label,satisfied\n";
    for (std::size_t i = 0; i < trajectories.size(); ++i) {
        const Trajectory& traj = trajectories[i];
        for (std::size_t t = 0; t < traj.states.size(); ++t) {
            out << i << "," << t;
            for (Eigen::Index d = 0; d < traj.states[t].size(); ++d)
                out << "," << format_double(traj.states[t][d]);
            out << "," << (t < traj.actions.size() ? std::to_string(traj.actions[t]) : std::string());
            out << "," << traj.dfa_states[t] << "," << traj.trace[t] << "," << (traj.satisfied ? 1 : 0)
                << "\n";
        }
    }
    return out.str();
}

std::string values_to_pgm(const Partition& partition, const Vec& values) {
    if (partition.dim() != 2)
        throw Error(ErrorCode::ConfigInvalid, "PGM heatmaps require a 2-dimensional grid");
    const Index nx = partition.counts()[0], ny = partition.counts()[1];
    double vmin = values.minCoeff(), vmax = values.maxCoeff();
    if (vmax <= vmin) vmax = vmin + 1.0;
    std::ostringstream out;
    out << "P2\n" << nx << " " << ny << "\n255\n";
    // row-major with dimension 0 slowest: cell = i0 * ny + i1
    for (Index row = ny - 1; row >= 0; --row) {
        for (Index col = 0; col < nx; ++col) {
            const Index cell = col * ny + row;
            const int gray =
                static_cast<int>(std::lround(255.0 * (values[cell] - vmin) / (vmax - vmin)));
            out << gray << (col + 1 == nx ? "" : " ");
        }
        out << "\n";
    }
    return out.str();
}

nlohmann::json pgm_scale_record(const Vec& values) {
    nlohmann::json j;
    j["min"] = values.minCoeff();
    j["max"] = values.maxCoeff();
    j["gray_levels"] = 256;
    return j;
}

namespace {
constexpr char kStrategyMagic[8] = {'U', 'M', 'D', 'P', 'S', 'T', 'R', '1'};
}

void write_strategy(const Strategy& strategy, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error(ErrorCode::ConfigInvalid, "cannot open " + path + " for writing");
    out.write(kStrategyMagic, sizeof(kStrategyMagic));
    const std::int64_t dims[3] = {strategy.horizon, strategy.num_cells, strategy.num_dfa_states};
    out.write(reinterpret_cast<const char*>(dims), sizeof(dims));
    out.write(reinterpret_cast<const char*>(strategy.actions.data()),
              static_cast<std::streamsize>(strategy.actions.size() * sizeof(std::uint16_t)));
}

Strategy read_strategy(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorCode::ConfigInvalid, "cannot open " + path);
    char magic[8];
    in.read(magic, sizeof(magic));
    if (!in || std::memcmp(magic, kStrategyMagic, sizeof(magic)) != 0)
        throw Error(ErrorCode::ConfigInvalid, "not a strategy file");
    std::int64_t dims[3];
    in.read(reinterpret_cast<char*>(dims), sizeof(dims));
    if (!in) throw Error(ErrorCode::ConfigInvalid, "truncated strategy file");
    Strategy s;
    s.horizon = dims[0];
    s.num_cells = dims[1];
    s.num_dfa_states = static_cast<int>(dims[2]);
    const std::size_t n = static_cast<std::size_t>(dims[0]) * static_cast<std::size_t>(dims[1]) *
                          static_cast<std::size_t>(dims[2]);
    s.actions.resize(n);
    in.read(reinterpret_cast<char*>(s.actions.data()), static_cast<std::streamsize>(n * sizeof(std::uint16_t)));
    if (!in) throw Error(ErrorCode::ConfigInvalid, "truncated strategy file");
    return s;
}

nlohmann::json synthesis_result_to_json(const SynthesisResult& result,
                                        const std::vector<Index>& final_counts,
                                        const std::vector<Index>& final_w_counts,
                                        std::uint64_t config_hash_value) {
    nlohmann::json j;
    j["status"] = result.status == SynthesisStatus::Converged ? "converged" : "iteration-cap-reached";
    j["epsilon"] = result.epsilon;
    char hash_hex[17];
    std::snprintf(hash_hex, sizeof(hash_hex), "%016llx",
                  static_cast<unsigned long long>(config_hash_value));
    j["config_hash"] = hash_hex;
    j["final_counts"] = final_counts;
    j["final_w_counts"] = final_w_counts;
    nlohmann::json iters = nlohmann::json::array();
    for (const auto& it : result.iterations) {
        nlohmann::json row;
        row["iteration"] = it.iteration;
        row["eta"] = it.eta;
        row["cells"] = it.num_cells;
        row["safe_cells"] = it.num_safe_cells;
        row["disturbance_cells"] = it.num_w_cells;
        row["gap"] = it.gap;
        row["diameter"] = it.diameter;
        iters.push_back(std::move(row));
    }
    j["iterations"] = std::move(iters);
    j["final_gap"] = result.bounds.gap;
    j["bounds"]["p_lo"] = std::vector<double>(result.bounds.p_lo.data(),
                                              result.bounds.p_lo.data() + result.bounds.p_lo.size());
    j["bounds"]["p_hi"] = std::vector<double>(result.bounds.p_hi.data(),
                                              result.bounds.p_hi.data() + result.bounds.p_hi.size());
    return j;
}

} // namespace umdp
