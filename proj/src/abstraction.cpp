#include "umdp/abstraction.hpp"

#include "umdp/errors.hpp"
#include "umdp/parallel.hpp"
#include "umdp/wasserstein.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <map>
#include <numeric>

namespace umdp {

namespace {

struct IndexBox {
    std::array<std::int32_t, kMaxGridDim> lo{};
    std::array<std::int32_t, kMaxGridDim> hi{};
};

// Cells of the partition intersecting `box` (closed boxes, shared faces
// count).  Errors when the box escapes the partition domain.
IndexBox cells_intersecting(const Partition& p, const Box& box) {
    IndexBox out;
    for (Eigen::Index d = 0; d < p.dim(); ++d) {
        const double dlo = p.domain().lo[d], dhi = p.domain().hi[d];
        if (box.lo[d] < dlo - 1e-12 || box.hi[d] > dhi + 1e-12)
            throw Error(ErrorCode::ReachOutsideDomain,
                        "reach set escapes the abstraction domain in dimension " + std::to_string(d));
        const double w = p.cell_width(d);
        Index klo = static_cast<Index>(std::floor((box.lo[d] - dlo) / w));
        Index khi = static_cast<Index>(std::floor((box.hi[d] - dlo) / w));
        klo = std::min(std::max<Index>(klo, 0), p.counts()[d] - 1);
        khi = std::min(std::max<Index>(khi, 0), p.counts()[d] - 1);
        while (klo > 0 && p.grid_line(d, klo) >= box.lo[d]) --klo;
        while (klo + 1 < p.counts()[d] && p.grid_line(d, klo + 1) < box.lo[d]) ++klo;
        while (khi + 1 < p.counts()[d] && p.grid_line(d, khi + 1) <= box.hi[d]) ++khi;
        while (khi > 0 && p.grid_line(d, khi) > box.hi[d]) --khi;
        out.lo[d] = static_cast<std::int32_t>(klo);
        out.hi[d] = static_cast<std::int32_t>(khi);
    }
    return out;
}

template <typename Fn>
void for_each_cell_in(const Partition& p, const IndexBox& b, Fn&& fn) {
    const int n = static_cast<int>(p.dim());
    IndexVec coords(static_cast<std::size_t>(n));
    for (int d = 0; d < n; ++d) coords[d] = b.lo[d];
    while (true) {
        fn(p.cell_from_coords(coords));
        int d = n - 1;
        for (; d >= 0; --d) {
            if (coords[d] < b.hi[d]) {
                ++coords[d];
                for (int e = d + 1; e < n; ++e) coords[e] = b.lo[e];
                break;
            }
        }
        if (d < 0) break;
    }
}

struct SafeIndexing {
    std::vector<Index> safe_cells;
    std::vector<Index> safe_index_of_cell;
};

SafeIndexing index_safe_cells(const Partition& p) {
    SafeIndexing s;
    s.safe_index_of_cell.assign(static_cast<std::size_t>(p.cell_count()), -1);
    for (Index c = 0; c < p.cell_count(); ++c)
        if (p.cell_safe(c)) {
            s.safe_index_of_cell[static_cast<std::size_t>(c)] = static_cast<Index>(s.safe_cells.size());
            s.safe_cells.push_back(c);
        }
    return s;
}

struct WCells {
    std::vector<Box> boxes;
    std::vector<double> masses;
};

WCells enumerate_w_cells(const DisturbanceModel& dist, const Partition& w_partition) {
    WCells w;
    w.boxes.reserve(static_cast<std::size_t>(w_partition.cell_count()));
    double total = 0.0;
    for (Index c = 0; c < w_partition.cell_count(); ++c) {
        w.boxes.push_back(w_partition.cell_box(c));
        w.masses.push_back(cell_mass(dist, w.boxes.back()));
        total += w.masses.back();
    }
    if (std::abs(total - 1.0) > 1e-9)
        throw Error(ErrorCode::ConfigInvalid, "disturbance partition masses do not sum to 1");
    return w;
}

Smdp build_smdp_impl(const Dynamics& dyn, const DisturbanceModel& dist, const Partition& partition,
                     const Partition& w_partition, bool reduced, int threads) {
    if (partition.dim() > kMaxGridDim)
        throw Error(ErrorCode::ConfigInvalid, "grid abstraction supports up to 4 dimensions");
    Smdp m;
    m.partition = &partition;
    m.num_actions = dyn.num_actions();
    m.reduced = reduced;
    auto idx = index_safe_cells(partition);
    m.safe_cells = std::move(idx.safe_cells);
    m.safe_index_of_cell = std::move(idx.safe_index_of_cell);
    const WCells w = enumerate_w_cells(dist, w_partition);

    m.rows.resize(m.safe_cells.size() * static_cast<std::size_t>(m.num_actions));
    parallel_for(m.safe_cells.size(), threads, [&](std::size_t begin, std::size_t end) {
        using Key = std::array<std::int32_t, 2 * kMaxGridDim>;
        for (std::size_t si = begin; si < end; ++si) {
            const Box cell = partition.cell_box(m.safe_cells[si]);
            for (int a = 0; a < m.num_actions; ++a) {
                auto& row = m.rows[si * static_cast<std::size_t>(m.num_actions) + a];
                std::map<Key, std::size_t> seen; // identical supports merge exactly
                for (std::size_t c = 0; c < w.boxes.size(); ++c) {
                    const Box reach = reach_over(dyn, cell, a, w.boxes[c]);
                    const IndexBox ib = cells_intersecting(partition, reach);
                    Key key{};
                    for (int d = 0; d < kMaxGridDim; ++d) {
                        key[d] = ib.lo[d];
                        key[kMaxGridDim + d] = ib.hi[d];
                    }
                    auto it = seen.find(key);
                    if (it != seen.end()) {
                        row[it->second].mass += w.masses[c];
                        continue;
                    }
                    Cluster cl;
                    cl.lo = ib.lo;
                    cl.hi = ib.hi;
                    cl.mass = w.masses[c];
                    for_each_cell_in(partition, ib, [&](Index cand) {
                        if (!partition.cell_safe(cand)) cl.touches_unsafe = true;
                    });
                    seen.emplace(key, row.size());
                    row.push_back(cl);
                }
            }
        }
    });
    return m;
}

} // namespace

Smdp build_smdp(const Dynamics& dyn, const DisturbanceModel& dist, const Partition& partition,
                const Partition& w_partition, int threads) {
    return build_smdp_impl(dyn, dist, partition, w_partition, false, threads);
}

Smdp build_smdp_reduced(const Dynamics& dyn, const DisturbanceModel& dist, const Partition& partition,
                        const Partition& w_partition, int threads) {
    return build_smdp_impl(dyn, dist, partition, w_partition, true, threads);
}

Imdp build_imdp(const Dynamics& dyn, const DisturbanceModel& dist, const Partition& partition,
                const Partition& w_partition, int threads) {
    if (partition.dim() > kMaxGridDim)
        throw Error(ErrorCode::ConfigInvalid, "grid abstraction supports up to 4 dimensions");
    Imdp m;
    m.partition = &partition;
    m.num_actions = dyn.num_actions();
    auto idx = index_safe_cells(partition);
    m.safe_cells = std::move(idx.safe_cells);
    m.safe_index_of_cell = std::move(idx.safe_index_of_cell);
    const WCells w = enumerate_w_cells(dist, w_partition);

    m.rows.resize(m.safe_cells.size() * static_cast<std::size_t>(m.num_actions));
    parallel_for(m.safe_cells.size(), threads, [&](std::size_t begin, std::size_t end) {
        std::map<Index, std::pair<double, double>> acc;
        for (std::size_t si = begin; si < end; ++si) {
            const Box cell = partition.cell_box(m.safe_cells[si]);
            for (int a = 0; a < m.num_actions; ++a) {
                acc.clear();
                for (std::size_t c = 0; c < w.boxes.size(); ++c) {
                    const Box reach = reach_over(dyn, cell, a, w.boxes[c]);
                    const IndexBox ib = cells_intersecting(partition, reach);
                    for_each_cell_in(partition, ib, [&](Index succ) {
                        auto& e = acc[succ];
                        e.second += w.masses[c]; // intersects => upper bound mass
                        if (contains_box(partition.cell_box(succ), reach)) e.first += w.masses[c];
                    });
                }
                auto& row = m.rows[si * static_cast<std::size_t>(m.num_actions) + a];
                row.reserve(acc.size());
                double sum_lo = 0.0, sum_hi = 0.0;
                for (const auto& [succ, bounds] : acc) {
                    row.push_back({succ, bounds.first, bounds.second});
                    sum_lo += bounds.first;
                    sum_hi += bounds.second;
                }
                if (sum_lo > 1.0 + 1e-9 || sum_hi < 1.0 - 1e-9)
                    throw Error(ErrorCode::InfeasibleIntervals,
                                "interval row infeasible; reach sets escaped the partitioned domain");
            }
        }
    });
    return m;
}

DiameterReport smdp_diameter_bound(const Smdp& smdp, double lipschitz) {
    const Partition& p = *smdp.partition;
    DiameterReport report;
    report.per_row.resize(smdp.rows.size(), 0.0);
    for (std::size_t r = 0; r < smdp.rows.size(); ++r) {
        double bound = 0.0;
        for (const Cluster& cl : smdp.rows[r]) {
            // representatives form a grid, so the max pairwise distance is the
            // distance between the extreme corner representatives
            double d2 = 0.0;
            for (Eigen::Index d = 0; d < p.dim(); ++d) {
                const double span = static_cast<double>(cl.hi[d] - cl.lo[d]) * p.cell_width(d);
                d2 += span * span;
            }
            bound += cl.mass * std::sqrt(d2);
        }
        report.per_row[r] = bound;
        report.global = std::max(report.global, bound);
    }
    report.ceiling = (4.0 * lipschitz + 2.0) * p.eta();
    return report;
}

namespace {

// Greedy extreme point of the interval polytope: start from the lower
// bounds and spend the remaining budget in the given successor order.
std::vector<double> greedy_fill(const std::vector<ImdpEntry>& row, const std::vector<std::size_t>& order) {
    std::vector<double> gamma(row.size());
    double slack = 1.0;
    for (std::size_t e = 0; e < row.size(); ++e) {
        gamma[e] = row[e].p_lo;
        slack -= row[e].p_lo;
    }
    if (slack < -1e-9) throw Error(ErrorCode::InfeasibleIntervals, "lower bounds exceed 1");
    for (std::size_t e : order) {
        const double take = std::min(slack, row[e].p_hi - row[e].p_lo);
        gamma[e] += take;
        slack -= take;
        if (slack <= 1e-15) break;
    }
    if (slack > 1e-9) throw Error(ErrorCode::InfeasibleIntervals, "upper bounds sum below 1");
    return gamma;
}

} // namespace

double imdp_diameter_witness(const Imdp& imdp, Index cell, int action) {
    const Index si = imdp.safe_index_of_cell[static_cast<std::size_t>(cell)];
    if (si < 0) return 0.0; // unsafe: singleton ambiguity set
    const auto& row = imdp.row(si, action);
    if (row.empty()) return 0.0;

    std::vector<Vec> reps(row.size());
    for (std::size_t e = 0; e < row.size(); ++e) reps[e] = imdp.partition->representative(row[e].succ);
    std::vector<std::size_t> order(row.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        for (Eigen::Index d = 0; d < reps[a].size(); ++d) {
            if (reps[a][d] < reps[b][d]) return true;
            if (reps[a][d] > reps[b][d]) return false;
        }
        return a < b;
    });
    std::vector<std::size_t> reversed(order.rbegin(), order.rend());

    const std::vector<double> g1 = greedy_fill(row, order);
    const std::vector<double> g2 = greedy_fill(row, reversed);

    WeightedPoints p, q;
    for (std::size_t e = 0; e < row.size(); ++e) {
        if (g1[e] > 0.0) {
            p.points.push_back(reps[e]);
            p.weights.push_back(g1[e]);
        }
        if (g2[e] > 0.0) {
            q.points.push_back(reps[e]);
            q.weights.push_back(g2[e]);
        }
    }
    if (p.points.empty() || q.points.empty()) return 0.0;
    return wasserstein_discrete(p, q);
}

double imdp_diameter_witness_max(const Imdp& imdp) {
    double best = 0.0;
    for (Index cell : imdp.safe_cells)
        for (int a = 0; a < imdp.num_actions; ++a)
            best = std::max(best, imdp_diameter_witness(imdp, cell, a));
    return best;
}

namespace {

constexpr char kSmdpMagic[8] = {'U', 'M', 'D', 'P', 'S', 'M', 'D', '1'};
constexpr char kImdpMagic[8] = {'U', 'M', 'D', 'P', 'I', 'M', 'D', '1'};

template <typename T>
void write_pod(std::ofstream& out, const T& value) {
    out.write(reinterpret_cast<const char*>(&value), sizeof(T));
}

template <typename T>
T read_pod(std::ifstream& in) {
    T value{};
    in.read(reinterpret_cast<char*>(&value), sizeof(T));
    if (!in) throw Error(ErrorCode::ConfigInvalid, "truncated abstraction cache file");
    return value;
}

nlohmann::json abstraction_manifest(const Partition& p, int num_actions, const char* kind,
                                    std::size_t rows) {
    nlohmann::json j;
    j["kind"] = kind;
    j["counts"] = p.counts();
    j["num_actions"] = num_actions;
    j["rows"] = rows;
    j["eta"] = p.eta();
    return j;
}

} // namespace

void save_smdp(const Smdp& smdp, const std::string& binary_path, const std::string& manifest_path) {
    std::ofstream out(binary_path, std::ios::binary);
    if (!out) throw Error(ErrorCode::ConfigInvalid, "cannot open " + binary_path);
    out.write(kSmdpMagic, sizeof(kSmdpMagic));
    write_pod(out, static_cast<std::int32_t>(smdp.num_actions));
    write_pod(out, static_cast<std::int32_t>(smdp.reduced ? 1 : 0));
    write_pod(out, static_cast<std::int64_t>(smdp.rows.size()));
    for (const auto& row : smdp.rows) {
        write_pod(out, static_cast<std::int64_t>(row.size()));
        for (const Cluster& cl : row) {
            out.write(reinterpret_cast<const char*>(cl.lo.data()), sizeof(cl.lo));
            out.write(reinterpret_cast<const char*>(cl.hi.data()), sizeof(cl.hi));
            write_pod(out, cl.mass);
            write_pod(out, static_cast<std::int32_t>(cl.touches_unsafe ? 1 : 0));
        }
    }
    std::ofstream man(manifest_path);
    man << abstraction_manifest(*smdp.partition, smdp.num_actions, smdp.reduced ? "smdp-reduced" : "smdp",
                                smdp.rows.size())
               .dump(2)
        << "\n";
}

Smdp load_smdp(const Partition& partition, const std::string& binary_path) {
    std::ifstream in(binary_path, std::ios::binary);
    if (!in) throw Error(ErrorCode::ConfigInvalid, "cannot open " + binary_path);
    char magic[8];
    in.read(magic, sizeof(magic));
    if (!in || std::memcmp(magic, kSmdpMagic, sizeof(magic)) != 0)
        throw Error(ErrorCode::ConfigInvalid, "not an SMDP cache file");
    Smdp m;
    m.partition = &partition;
    m.num_actions = read_pod<std::int32_t>(in);
    m.reduced = read_pod<std::int32_t>(in) != 0;
    auto idx = index_safe_cells(partition);
    m.safe_cells = std::move(idx.safe_cells);
    m.safe_index_of_cell = std::move(idx.safe_index_of_cell);
    const auto rows = static_cast<std::size_t>(read_pod<std::int64_t>(in));
    if (rows != m.safe_cells.size() * static_cast<std::size_t>(m.num_actions))
        throw Error(ErrorCode::ConfigInvalid, "cache does not match the partition");
    m.rows.resize(rows);
    for (auto& row : m.rows) {
        row.resize(static_cast<std::size_t>(read_pod<std::int64_t>(in)));
        for (Cluster& cl : row) {
            in.read(reinterpret_cast<char*>(cl.lo.data()), sizeof(cl.lo));
            in.read(reinterpret_cast<char*>(cl.hi.data()), sizeof(cl.hi));
            cl.mass = read_pod<double>(in);
            cl.touches_unsafe = read_pod<std::int32_t>(in) != 0;
        }
    }
    return m;
}

void save_imdp(const Imdp& imdp, const std::string& binary_path, const std::string& manifest_path) {
    std::ofstream out(binary_path, std::ios::binary);
    if (!out) throw Error(ErrorCode::ConfigInvalid, "cannot open " + binary_path);
    out.write(kImdpMagic, sizeof(kImdpMagic));
    write_pod(out, static_cast<std::int32_t>(imdp.num_actions));
    write_pod(out, static_cast<std::int64_t>(imdp.rows.size()));
    for (const auto& row : imdp.rows) {
        write_pod(out, static_cast<std::int64_t>(row.size()));
        for (const ImdpEntry& e : row) {
            write_pod(out, static_cast<std::int64_t>(e.succ));
            write_pod(out, e.p_lo);
            write_pod(out, e.p_hi);
        }
    }
    std::ofstream man(manifest_path);
    man << abstraction_manifest(*imdp.partition, imdp.num_actions, "imdp", imdp.rows.size()).dump(2) << "\n";
}

Imdp load_imdp(const Partition& partition, const std::string& binary_path) {
    std::ifstream in(binary_path, std::ios::binary);
    if (!in) throw Error(ErrorCode::ConfigInvalid, "cannot open " + binary_path);
    char magic[8];
    in.read(magic, sizeof(magic));
    if (!in || std::memcmp(magic, kImdpMagic, sizeof(magic)) != 0)
        throw Error(ErrorCode::ConfigInvalid, "not an IMDP cache file");
    Imdp m;
    m.partition = &partition;
    m.num_actions = read_pod<std::int32_t>(in);
    auto idx = index_safe_cells(partition);
    m.safe_cells = std::move(idx.safe_cells);
    m.safe_index_of_cell = std::move(idx.safe_index_of_cell);
    const auto rows = static_cast<std::size_t>(read_pod<std::int64_t>(in));
    if (rows != m.safe_cells.size() * static_cast<std::size_t>(m.num_actions))
        throw Error(ErrorCode::ConfigInvalid, "cache does not match the partition");
    m.rows.resize(rows);
    for (auto& row : m.rows) {
        row.resize(static_cast<std::size_t>(read_pod<std::int64_t>(in)));
        for (ImdpEntry& e : row) {
            e.succ = read_pod<std::int64_t>(in);
            e.p_lo = read_pod<double>(in);
            e.p_hi = read_pod<double>(in);
        }
    }
    return m;
}

} // namespace umdp
