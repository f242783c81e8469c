#pragma once

#include "umdp/types.hpp"

#include <json.hpp>

#include <cstdint>
#include <string>
#include <vector>

namespace umdp {

/// Closed axis-aligned box [lo, hi].
struct Box {
    Vec lo;
    Vec hi;

    Box() = default;
    Box(Vec lo_, Vec hi_);

    Eigen::Index dim() const { return lo.size(); }
};

Box make_box(std::initializer_list<double> lo, std::initializer_list<double> hi);
Box point_box(const Vec& x);

Vec center(const Box& b);
/// Half of the max-norm diameter (largest half side length).
double radius(const Box& b);
/// Euclidean diameter of the box.
double diameter(const Box& b);
double volume(const Box& b);
bool contains(const Box& b, const Vec& x);
/// Closed-box tests; shared faces count as intersecting.
bool intersects(const Box& a, const Box& b);
bool contains_box(const Box& outer, const Box& inner);
/// Component-wise Minkowski pad by `pad >= 0` in every direction.
Box pad_box(const Box& b, double pad);

/// Labeled regions of interest partitioning the state space.  Cells and
/// sample points are classified against the explicit regions in order,
/// then against the safe set; everything else is unsafe.  A region is
/// safe iff its atom set contains the reserved atom "safe".
struct LabeledRegion {
    std::string name;
    std::uint32_t atom_mask = 0; // bit i set <=> atom i of RegionSet::atoms holds
    std::vector<Box> boxes;
};

struct RegionSet {
    std::vector<std::string> atoms; // atom 0 is always "safe"
    std::vector<LabeledRegion> regions; // explicit regions, order = precedence
    std::vector<Box> safe_boxes; // X_safe = union(safe_boxes) minus unsafe-labeled regions

    std::uint32_t safe_bit() const { return 1u; }
    int atom_index(const std::string& name) const; // -1 if absent
    /// Label of the region containing x; points outside every region are unsafe ({}).
    std::uint32_t label_of(const Vec& x) const;
};

RegionSet make_region_set(std::vector<std::string> extra_atoms, std::vector<LabeledRegion> regions,
                          std::vector<Box> safe_boxes);

/// Uniform grid over the hull of X_abs whose cells each lie inside exactly
/// one region (R-respecting).  Representative points are cell centers.
class Partition {
public:
    const Box& domain() const { return domain_; }
    const std::vector<Index>& counts() const { return counts_; }
    Index cell_count() const { return cell_count_; }
    Eigen::Index dim() const { return domain_.dim(); }

    /// Half of the largest cell's Euclidean diameter.
    double eta() const { return eta_; }
    double cell_width(Eigen::Index d) const { return width_[d]; }

    Box cell_box(Index cell) const;
    Vec representative(Index cell) const;
    std::uint32_t label_of_cell(Index cell) const { return cell_labels_[cell]; }
    bool cell_safe(Index cell) const { return (cell_labels_[cell] & 1u) != 0; }
    Index safe_cell_count() const { return safe_cell_count_; }

    const RegionSet& regions() const { return *regions_; }

    /// Index arithmetic between flat cell ids and per-dimension coordinates
    /// (row-major, dimension 0 slowest).
    void cell_coords(Index cell, IndexVec& out) const;
    Index cell_from_coords(const IndexVec& coords) const;

    /// Grid line d = lo[d] + k * width[d]; regions snap to these exactly.
    double grid_line(Eigen::Index d, Index k) const;

    friend Partition build_partition(const RegionSet& regions, const Box& x_abs,
                                     const std::vector<Index>& counts);
    friend Partition refine(const Partition& p, Index factor);

private:
    Box domain_;
    std::vector<Index> counts_;
    std::vector<double> width_;
    std::vector<Index> stride_;
    Index cell_count_ = 0;
    Index safe_cell_count_ = 0;
    double eta_ = 0.0;
    std::vector<std::uint32_t> cell_labels_;
    const RegionSet* regions_ = nullptr;
};

/// Errors with RegionNotGridAligned when a region face falls strictly
/// inside a cell (faces are matched to grid lines within 1e-9 relative
/// tolerance and snapped, so dyadic and decimal spans both work).
Partition build_partition(const RegionSet& regions, const Box& x_abs, const std::vector<Index>& counts);

Partition refine(const Partition& p, Index factor);

/// Cell containing x; points on shared faces belong to the cell whose
/// lower face equals x.  Errors with OutOfDomain.
Index locate(const Partition& p, const Vec& x);

nlohmann::json partition_to_json(const Partition& p);

} // namespace umdp
