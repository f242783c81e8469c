#include "umdp/geometry.hpp"

#include "umdp/errors.hpp"

#include <algorithm>
#include <cmath>

namespace umdp {

Box::Box(Vec lo_, Vec hi_) : lo(std::move(lo_)), hi(std::move(hi_)) {
    if (lo.size() != hi.size()) throw Error(ErrorCode::ConfigInvalid, "box corner dimensions differ");
    for (Eigen::Index i = 0; i < lo.size(); ++i) {
        if (!(lo[i] <= hi[i]) || !std::isfinite(lo[i]) || !std::isfinite(hi[i]))
            throw Error(ErrorCode::ConfigInvalid, "box requires finite lo <= hi per dimension");
    }
}

Box make_box(std::initializer_list<double> lo, std::initializer_list<double> hi) {
    Vec l(static_cast<Eigen::Index>(lo.size())), h(static_cast<Eigen::Index>(hi.size()));
    Eigen::Index i = 0;
    for (double v : lo) l[i++] = v;
    i = 0;
    for (double v : hi) h[i++] = v;
    return Box(std::move(l), std::move(h));
}

Box point_box(const Vec& x) { return Box(x, x); }

Vec center(const Box& b) { return 0.5 * (b.lo + b.hi); }

double radius(const Box& b) { return 0.5 * (b.hi - b.lo).lpNorm<Eigen::Infinity>(); }

double diameter(const Box& b) { return (b.hi - b.lo).norm(); }

double volume(const Box& b) { return (b.hi - b.lo).prod(); }

bool contains(const Box& b, const Vec& x) {
    for (Eigen::Index i = 0; i < b.dim(); ++i)
        if (x[i] < b.lo[i] || x[i] > b.hi[i]) return false;
    return true;
}

bool intersects(const Box& a, const Box& b) {
    for (Eigen::Index i = 0; i < a.dim(); ++i)
        if (a.hi[i] < b.lo[i] || b.hi[i] < a.lo[i]) return false;
    return true;
}

bool contains_box(const Box& outer, const Box& inner) {
    for (Eigen::Index i = 0; i < outer.dim(); ++i)
        if (inner.lo[i] < outer.lo[i] || inner.hi[i] > outer.hi[i]) return false;
    return true;
}

Box pad_box(const Box& b, double pad) {
    return Box(b.lo.array() - pad, b.hi.array() + pad);
}

int RegionSet::atom_index(const std::string& name) const {
    for (std::size_t i = 0; i < atoms.size(); ++i)
        if (atoms[i] == name) return static_cast<int>(i);
    return -1;
}

std::uint32_t RegionSet::label_of(const Vec& x) const {
    for (const auto& r : regions)
        for (const auto& b : r.boxes)
            if (contains(b, x)) return r.atom_mask;
    for (const auto& b : safe_boxes)
        if (contains(b, x)) return safe_bit();
    return 0u;
}

RegionSet make_region_set(std::vector<std::string> extra_atoms, std::vector<LabeledRegion> regions,
                          std::vector<Box> safe_boxes) {
    RegionSet rs;
    rs.atoms.push_back("safe");
    for (auto& a : extra_atoms)
        if (rs.atom_index(a) < 0) rs.atoms.push_back(std::move(a));
    if (rs.atoms.size() > 16) throw Error(ErrorCode::ConfigInvalid, "at most 16 atoms supported");
    rs.regions = std::move(regions);
    rs.safe_boxes = std::move(safe_boxes);
    return rs;
}

namespace {

// Snap a face coordinate onto the grid; strict interior misalignment is the
// RegionNotGridAligned case.
double snap_to_grid(double v, double lo, double width, Index count, const std::string& what) {
    const double scale = std::max(1.0, std::abs(lo) + std::abs(width) * static_cast<double>(count));
    const double k = std::round((v - lo) / width);
    const double snapped = lo + k * width;
    if (std::abs(snapped - v) > 1e-9 * scale)
        throw Error(ErrorCode::RegionNotGridAligned, what + " face " + std::to_string(v) +
                                                         " does not lie on a grid line");
    return snapped;
}

} // namespace

Partition build_partition(const RegionSet& regions, const Box& x_abs, const std::vector<Index>& counts) {
    const Eigen::Index n = x_abs.dim();
    if (static_cast<Eigen::Index>(counts.size()) != n)
        throw Error(ErrorCode::ConfigInvalid, "counts dimension mismatch");
    Partition p;
    p.domain_ = x_abs;
    p.counts_ = counts;
    p.width_.resize(n);
    p.stride_.assign(n, 1);
    Index total = 1;
    for (Eigen::Index d = 0; d < n; ++d) {
        if (counts[d] < 1) throw Error(ErrorCode::ConfigInvalid, "cell counts must be positive");
        if (total > (Index{1} << 56) / counts[d])
            throw Error(ErrorCode::CapacityExceeded, "cell count overflow");
        total *= counts[d];
        p.width_[d] = (x_abs.hi[d] - x_abs.lo[d]) / static_cast<double>(counts[d]);
        if (!(p.width_[d] > 0.0)) throw Error(ErrorCode::ConfigInvalid, "degenerate domain width");
    }
    for (Eigen::Index d = n - 2; d >= 0; --d) p.stride_[d] = p.stride_[d + 1] * counts[d + 1];
    p.cell_count_ = total;
    p.regions_ = &regions;

    double max_diam2 = 0.0;
    for (Eigen::Index d = 0; d < n; ++d) max_diam2 += p.width_[d] * p.width_[d];
    p.eta_ = 0.5 * std::sqrt(max_diam2);

    // Snapped copies of all region boxes, clipped against the domain.
    struct SnappedRegion {
        std::uint32_t mask;
        std::vector<Box> boxes;
    };
    std::vector<SnappedRegion> snapped;
    auto snap_box = [&](const Box& b, const std::string& what) {
        Vec lo = b.lo, hi = b.hi;
        for (Eigen::Index d = 0; d < n; ++d) {
            lo[d] = snap_to_grid(std::max(lo[d], x_abs.lo[d]), x_abs.lo[d], p.width_[d], counts[d], what);
            hi[d] = snap_to_grid(std::min(hi[d], x_abs.hi[d]), x_abs.lo[d], p.width_[d], counts[d], what);
        }
        return Box(lo, hi);
    };
    for (const auto& r : regions.regions) {
        SnappedRegion sr;
        sr.mask = r.atom_mask;
        for (const auto& b : r.boxes)
            if (intersects(b, x_abs)) sr.boxes.push_back(snap_box(b, "region '" + r.name + "'"));
        snapped.push_back(std::move(sr));
    }
    SnappedRegion safe_sr;
    safe_sr.mask = regions.safe_bit();
    for (const auto& b : regions.safe_boxes)
        if (intersects(b, x_abs)) safe_sr.boxes.push_back(snap_box(b, "safe set"));

    auto classify = [&](const Box& cell) -> std::uint32_t {
        auto against = [&](const std::vector<Box>& boxes, const char* what) {
            // 1 = contained in some box, 0 = disjoint from all, error otherwise.
            bool inside = false;
            for (const auto& b : boxes) {
                if (contains_box(b, cell)) {
                    inside = true;
                    break;
                }
                // Shared faces have empty interior overlap and count as disjoint.
                bool interior_overlap = true;
                for (Eigen::Index d = 0; d < n; ++d)
                    if (cell.lo[d] >= b.hi[d] || cell.hi[d] <= b.lo[d]) {
                        interior_overlap = false;
                        break;
                    }
                if (interior_overlap)
                    throw Error(ErrorCode::RegionNotGridAligned,
                                std::string(what) + " partially overlaps a cell");
            }
            return inside;
        };
        for (const auto& sr : snapped)
            if (against(sr.boxes, "region")) return sr.mask;
        if (against(safe_sr.boxes, "safe set")) return safe_sr.mask;
        return 0u;
    };

    p.cell_labels_.resize(static_cast<std::size_t>(total));
    IndexVec coords(static_cast<std::size_t>(n), 0);
    for (Index cell = 0; cell < total; ++cell) {
        p.cell_coords(cell, coords);
        Vec lo(n), hi(n);
        for (Eigen::Index d = 0; d < n; ++d) {
            lo[d] = p.grid_line(d, coords[d]);
            hi[d] = p.grid_line(d, coords[d] + 1);
        }
        p.cell_labels_[static_cast<std::size_t>(cell)] = classify(Box(lo, hi));
        if (p.cell_labels_[static_cast<std::size_t>(cell)] & 1u) ++p.safe_cell_count_;
    }
    return p;
}

Partition refine(const Partition& p, Index factor) {
    if (factor < 2) throw Error(ErrorCode::ConfigInvalid, "refinement factor must be >= 2");
    std::vector<Index> counts = p.counts();
    for (auto& c : counts) {
        if (c > (Index{1} << 56) / factor) throw Error(ErrorCode::CapacityExceeded, "refined cell count overflow");
        c *= factor;
    }
    return build_partition(*p.regions_, p.domain(), counts);
}

Box Partition::cell_box(Index cell) const {
    IndexVec coords(static_cast<std::size_t>(dim()), 0);
    cell_coords(cell, coords);
    Vec lo(dim()), hi(dim());
    for (Eigen::Index d = 0; d < dim(); ++d) {
        lo[d] = grid_line(d, coords[d]);
        hi[d] = grid_line(d, coords[d] + 1);
    }
    return Box(std::move(lo), std::move(hi));
}

Vec Partition::representative(Index cell) const { return center(cell_box(cell)); }

void Partition::cell_coords(Index cell, IndexVec& out) const {
    out.resize(static_cast<std::size_t>(dim()));
    for (Eigen::Index d = 0; d < dim(); ++d) {
        out[static_cast<std::size_t>(d)] = cell / stride_[d];
        cell %= stride_[d];
    }
}

Index Partition::cell_from_coords(const IndexVec& coords) const {
    Index cell = 0;
    for (Eigen::Index d = 0; d < dim(); ++d) cell += coords[static_cast<std::size_t>(d)] * stride_[d];
    return cell;
}

double Partition::grid_line(Eigen::Index d, Index k) const {
    if (k == counts_[d]) return domain_.hi[d];
    return domain_.lo[d] + static_cast<double>(k) * width_[d];
}

Index locate(const Partition& p, const Vec& x) {
    IndexVec coords(static_cast<std::size_t>(p.dim()), 0);
    for (Eigen::Index d = 0; d < p.dim(); ++d) {
        const double lo = p.domain().lo[d];
        const double hi = p.domain().hi[d];
        if (x[d] < lo || x[d] > hi) throw Error(ErrorCode::OutOfDomain, "point outside the partition domain");
        Index k = static_cast<Index>(std::floor((x[d] - lo) / p.cell_width(d)));
        k = std::min(std::max<Index>(k, 0), p.counts()[d] - 1);
        // floor can land one off at face values; fix against the actual lines.
        while (k > 0 && x[d] < p.grid_line(d, k)) --k;
        while (k + 1 < p.counts()[d] && x[d] >= p.grid_line(d, k + 1)) ++k;
        coords[static_cast<std::size_t>(d)] = k;
    }
    return p.cell_from_coords(coords);
}

nlohmann::json partition_to_json(const Partition& p) {
    nlohmann::json j;
    j["domain"]["lo"] = std::vector<double>(p.domain().lo.data(), p.domain().lo.data() + p.dim());
    j["domain"]["hi"] = std::vector<double>(p.domain().hi.data(), p.domain().hi.data() + p.dim());
    j["counts"] = p.counts();
    j["eta"] = p.eta();
    j["cells"] = p.cell_count();
    j["safe_cells"] = p.safe_cell_count();
    std::vector<std::uint32_t> labels(static_cast<std::size_t>(p.cell_count()));
    for (Index c = 0; c < p.cell_count(); ++c) labels[static_cast<std::size_t>(c)] = p.label_of_cell(c);
    j["cell_labels"] = labels;
    j["atoms"] = p.regions().atoms;
    return j;
}

} // namespace umdp
