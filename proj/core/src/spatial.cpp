#include "subtraj/spatial.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <queue>

namespace subtraj {

Mbr compute_mbr(PointSpan pts) {
    if (pts.empty()) throw argument_error("compute_mbr: empty point sequence");
    Mbr box{pts[0].lon, pts[0].lat, pts[0].lon, pts[0].lat};
    for (const Point& p : pts.subspan(1)) box.expand(p);
    return box;
}

Mbr dataset_bounds(const TrajectoryStore& store) {
    if (store.empty()) throw argument_error("dataset_bounds: empty store");
    Mbr box = compute_mbr(store.at(0).span());
    for (std::uint32_t s = 1; s < store.size(); ++s) box.expand(compute_mbr(store.at(s).span()));
    return box;
}

namespace {

double sq(double v) { return v * v; }

double center_dist(const Mbr& box, double cx, double cy) {
    return std::sqrt(sq(box.center_x() - cx) + sq(box.center_y() - cy));
}

// smallest possible distance from (cx, cy) to any point inside box; a valid
// lower bound for the center distance of every entry stored beneath it
double min_dist(const Mbr& box, double cx, double cy) {
    const double dx = cx < box.x_min ? box.x_min - cx : (cx > box.x_max ? cx - box.x_max : 0.0);
    const double dy = cy < box.y_min ? box.y_min - cy : (cy > box.y_max ? cy - box.y_max : 0.0);
    return std::sqrt(dx * dx + dy * dy);
}

} // namespace

RTree::RTree(std::vector<Entry> entries, std::uint32_t fanout) : entries_(std::move(entries)) {
    tie_less = [](std::uint32_t a, std::uint32_t b) { return a < b; };
    if (entries_.empty()) return;
    if (fanout < 2) fanout = 2;

    // sort-tile-recursive packing: order by center, slice on x then y
    std::vector<std::uint32_t> order(entries_.size());
    for (std::uint32_t i = 0; i < order.size(); ++i) order[i] = i;

    auto pack_level = [&](const std::vector<std::uint32_t>& items, bool leaf,
                          auto center_x_of, auto center_y_of, auto box_of) {
        std::vector<std::uint32_t> sorted = items;
        std::sort(sorted.begin(), sorted.end(), [&](std::uint32_t a, std::uint32_t b) {
            const double ax = center_x_of(a), bx = center_x_of(b);
            if (ax != bx) return ax < bx;
            return a < b;
        });
        const std::size_t n_groups = (sorted.size() + fanout - 1) / fanout;
        const std::size_t n_slices =
            static_cast<std::size_t>(std::ceil(std::sqrt(static_cast<double>(n_groups))));
        const std::size_t slice_len = (sorted.size() + n_slices - 1) / n_slices;

        std::vector<std::uint32_t> parents;
        for (std::size_t s0 = 0; s0 < sorted.size(); s0 += slice_len) {
            const std::size_t s1 = std::min(sorted.size(), s0 + slice_len);
            std::sort(sorted.begin() + s0, sorted.begin() + s1,
                      [&](std::uint32_t a, std::uint32_t b) {
                          const double ay = center_y_of(a), by = center_y_of(b);
                          if (ay != by) return ay < by;
                          return a < b;
                      });
            for (std::size_t g0 = s0; g0 < s1; g0 += fanout) {
                const std::size_t g1 = std::min(s1, g0 + fanout);
                Node node;
                node.leaf = leaf;
                node.count = static_cast<std::uint16_t>(g1 - g0);
                node.box = box_of(sorted[g0]);
                for (std::size_t i = g0 + 1; i < g1; ++i) node.box.expand(box_of(sorted[i]));
                node.first_child = static_cast<std::int32_t>(children_.size());
                for (std::size_t i = g0; i < g1; ++i) children_.push_back(sorted[i]);
                parents.push_back(static_cast<std::uint32_t>(nodes_.size()));
                nodes_.push_back(node);
            }
        }
        return parents;
    };

    std::vector<std::uint32_t> level = pack_level(
        order, true,
        [&](std::uint32_t i) { return entries_[i].box.center_x(); },
        [&](std::uint32_t i) { return entries_[i].box.center_y(); },
        [&](std::uint32_t i) { return entries_[i].box; });

    while (level.size() > 1) {
        level = pack_level(
            level, false,
            [&](std::uint32_t i) { return nodes_[i].box.center_x(); },
            [&](std::uint32_t i) { return nodes_[i].box.center_y(); },
            [&](std::uint32_t i) { return nodes_[i].box; });
    }
    root_ = static_cast<std::int32_t>(level[0]);
}

std::vector<std::uint32_t> RTree::range(const Mbr& query) const {
    std::vector<std::uint32_t> out;
    if (root_ < 0) return out;
    std::vector<std::int32_t> stack{root_};
    while (!stack.empty()) {
        const Node& node = nodes_[stack.back()];
        stack.pop_back();
        if (!node.box.intersects(query)) continue;
        for (std::uint16_t c = 0; c < node.count; ++c) {
            if (node.leaf) {
                const Entry& e = entries_[children_[node.first_child + c]];
                if (e.box.intersects(query)) out.push_back(e.slot);
            } else {
                stack.push_back(static_cast<std::int32_t>(children_[node.first_child + c]));
            }
        }
    }
    std::sort(out.begin(), out.end());
    return out;
}

std::vector<std::uint32_t> RTree::nearest_by_center(double cx, double cy, std::size_t k,
                                                    std::optional<std::uint32_t> exclude) const {
    std::vector<std::uint32_t> out;
    if (root_ < 0 || k == 0) return out;

    // result heap keeps the current worst candidate on top
    auto worse = [&](const std::pair<double, std::uint32_t>& a,
                     const std::pair<double, std::uint32_t>& b) {
        if (a.first != b.first) return a.first < b.first;
        return tie_less(a.second, b.second);
    };
    std::priority_queue<std::pair<double, std::uint32_t>,
                        std::vector<std::pair<double, std::uint32_t>>, decltype(worse)>
        result(worse);

    using Frontier = std::pair<double, std::int32_t>;
    auto frontier_order = [](const Frontier& a, const Frontier& b) { return a.first > b.first; };
    std::priority_queue<Frontier, std::vector<Frontier>, decltype(frontier_order)> frontier(
        frontier_order);
    frontier.push({min_dist(nodes_[root_].box, cx, cy), root_});

    while (!frontier.empty()) {
        const auto [lb, ni] = frontier.top();
        frontier.pop();
        // equal-distance nodes must still be explored so the id tie-break applies
        if (result.size() >= k && lb > result.top().first) break;
        const Node& node = nodes_[ni];
        for (std::uint16_t c = 0; c < node.count; ++c) {
            if (node.leaf) {
                const Entry& e = entries_[children_[node.first_child + c]];
                if (exclude && e.slot == *exclude) continue;
                const double d = center_dist(e.box, cx, cy);
                const std::pair<double, std::uint32_t> cand{d, e.slot};
                if (result.size() < k) {
                    result.push(cand);
                } else if (worse(cand, result.top())) {
                    result.pop();
                    result.push(cand);
                }
            } else {
                const auto child = static_cast<std::int32_t>(children_[node.first_child + c]);
                const double child_lb = min_dist(nodes_[child].box, cx, cy);
                if (result.size() < k || child_lb <= result.top().first)
                    frontier.push({child_lb, child});
            }
        }
    }

    out.resize(result.size());
    for (std::size_t i = out.size(); i-- > 0;) {
        out[i] = result.top().second;
        result.pop();
    }
    return out;
}

RTree build_rtree(const TrajectoryStore& store) {
    std::vector<RTree::Entry> entries;
    entries.reserve(store.size());
    for (std::uint32_t s = 0; s < store.size(); ++s)
        entries.push_back({compute_mbr(store.at(s).span()), s});
    RTree tree(std::move(entries));
    tree.tie_less = [&store](std::uint32_t a, std::uint32_t b) {
        return store.id_of(a) < store.id_of(b);
    };
    return tree;
}

std::vector<std::uint32_t> nearest_k(const RTree& rtree, const Mbr& probe, std::size_t k,
                                     std::optional<std::uint32_t> exclude) {
    if (k == 0) throw argument_error("nearest_k: k must be >= 1");
    return rtree.nearest_by_center(probe.center_x(), probe.center_y(), k, exclude);
}

std::optional<std::uint32_t> cell_representative(const Grid& grid, const RTree& rtree,
                                                 const TrajectoryStore& store,
                                                 std::uint32_t cell_i, std::uint32_t cell_j) {
    if (cell_i >= grid.m || cell_j >= grid.m)
        throw argument_error("cell_representative: cell out of range");
    const Mbr box = grid.cell_box(cell_i, cell_j);
    const double cx = box.center_x(), cy = box.center_y();

    std::optional<std::uint32_t> best;
    double best_d = std::numeric_limits<double>::infinity();
    for (std::uint32_t slot : rtree.range(box)) {
        const Mbr mb = compute_mbr(store.at(slot).span());
        // membership is decided by the grid's own clamping map, so every
        // center belongs to exactly one cell even on shared edges
        if (grid.cell_of(mb.center_x(), mb.center_y()) !=
            std::make_pair(cell_i, cell_j))
            continue;
        const double d = center_dist(mb, cx, cy);
        if (d < best_d ||
            (d == best_d && best && store.id_of(slot) < store.id_of(*best))) {
            best_d = d;
            best = slot;
        }
    }
    return best;
}

} // namespace subtraj
