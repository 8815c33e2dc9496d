#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <utility>
#include <vector>

#include "subtraj/trajectory.hpp"

namespace subtraj {

/// Axis-aligned minimum bounding rectangle.
struct Mbr {
    double x_min = 0, y_min = 0, x_max = 0, y_max = 0;

    double center_x() const { return (x_min + x_max) / 2.0; }
    double center_y() const { return (y_min + y_max) / 2.0; }

    bool intersects(const Mbr& o) const {
        return x_min <= o.x_max && o.x_min <= x_max && y_min <= o.y_max && o.y_min <= y_max;
    }
    bool contains_point(double x, double y) const {
        return x >= x_min && x <= x_max && y >= y_min && y <= y_max;
    }
    void expand(const Point& p) {
        x_min = std::min(x_min, p.lon);
        x_max = std::max(x_max, p.lon);
        y_min = std::min(y_min, p.lat);
        y_max = std::max(y_max, p.lat);
    }
    void expand(const Mbr& o) {
        x_min = std::min(x_min, o.x_min);
        x_max = std::max(x_max, o.x_max);
        y_min = std::min(y_min, o.y_min);
        y_max = std::max(y_max, o.y_max);
    }
};

inline bool operator==(const Mbr& a, const Mbr& b) {
    return a.x_min == b.x_min && a.y_min == b.y_min && a.x_max == b.x_max && a.y_max == b.y_max;
}

/// Tight bounds of a non-empty point sequence.
Mbr compute_mbr(PointSpan pts);

/// Union of all trajectory MBRs in the store; argument_error when empty.
Mbr dataset_bounds(const TrajectoryStore& store);

/// Uniform M x M partition of a bounding rectangle. Points on the max edge
/// clamp into the last cell, so every point maps to exactly one cell.
struct Grid {
    Mbr bounds;
    std::uint32_t m = 1;
    double cell_w = 0, cell_h = 0;

    Grid() = default;
    Grid(const Mbr& b, std::uint32_t side)
        : bounds(b), m(side),
          cell_w((b.x_max - b.x_min) / side),
          cell_h((b.y_max - b.y_min) / side) {}

    std::pair<std::uint32_t, std::uint32_t> cell_of(double x, double y) const {
        auto axis = [](double v, double lo, double w, std::uint32_t side) -> std::uint32_t {
            if (w <= 0.0) return 0;
            const double off = (v - lo) / w;
            if (off <= 0.0) return 0;
            const auto idx = static_cast<std::uint32_t>(off);
            return idx >= side ? side - 1 : idx;
        };
        return {axis(x, bounds.x_min, cell_w, m), axis(y, bounds.y_min, cell_h, m)};
    }

    Mbr cell_box(std::uint32_t i, std::uint32_t j) const {
        return Mbr{bounds.x_min + i * cell_w, bounds.y_min + j * cell_h,
                   bounds.x_min + (i + 1) * cell_w, bounds.y_min + (j + 1) * cell_h};
    }
};

inline bool operator==(const Grid& a, const Grid& b) {
    return a.bounds == b.bounds && a.m == b.m;
}

/// Static packed R-tree over (Mbr, slot) entries, bulk-loaded with
/// sort-tile-recursive. Supports rectangle intersection queries and exact
/// k-nearest by entry-center distance. Correctness-transparent: a linear
/// scan yields identical answers and doubles as the oracle in tests.
class RTree {
public:
    struct Entry {
        Mbr box;
        std::uint32_t slot = 0;
    };

    RTree() = default;
    explicit RTree(std::vector<Entry> entries, std::uint32_t fanout = 16);

    std::size_t size() const { return entries_.size(); }
    const std::vector<Entry>& entries() const { return entries_; }

    /// Slots of all entries whose box intersects the query rectangle,
    /// ascending by slot.
    std::vector<std::uint32_t> range(const Mbr& query) const;

    /// Slots of the k entries with the smallest box-center distance to
    /// (cx, cy); fewer when the tree is small. Ties broken by the entries'
    /// trajectory id via the comparator baked in at build time.
    std::vector<std::uint32_t> nearest_by_center(double cx, double cy, std::size_t k,
                                                 std::optional<std::uint32_t> exclude) const;

private:
    struct Node {
        Mbr box;
        std::int32_t first_child = -1; // offset into children_
        std::uint16_t count = 0;
        bool leaf = false;
    };

    std::vector<Entry> entries_;
    std::vector<Node> nodes_;
    // flat child runs: entry indices under leaves, node indices otherwise
    std::vector<std::uint32_t> children_;
    std::int32_t root_ = -1;

public:
    /// Comparator hook: orders equal-distance candidates. Defaults to slot
    /// order; build_rtree installs trajectory-id ordering.
    std::function<bool(std::uint32_t, std::uint32_t)> tie_less;
};

/// One entry per trajectory (slot order), tie-breaking by trajectory id.
RTree build_rtree(const TrajectoryStore& store);

/// k nearest trajectories to the probe rectangle by MBR-center distance,
/// excluding `exclude` when given. Deterministic: distance ascending, then
/// trajectory id ascending. Returns all stored entries when k >= N.
std::vector<std::uint32_t> nearest_k(const RTree& rtree, const Mbr& probe, std::size_t k,
                                     std::optional<std::uint32_t> exclude = std::nullopt);

/// The trajectory whose MBR center is nearest to the center of the given
/// cell, among trajectories whose MBR center lies in that cell; nullopt for
/// an empty cell. Ties by trajectory id.
std::optional<std::uint32_t> cell_representative(const Grid& grid, const RTree& rtree,
                                                 const TrajectoryStore& store,
                                                 std::uint32_t cell_i, std::uint32_t cell_j);

} // namespace subtraj
