#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "subtraj/errors.hpp"
#include "subtraj/geo.hpp"

namespace subtraj {

using PointSpan = std::span<const Point>;

/// An ordered sequence of points with a unique identifier. Stored
/// trajectories always have at least two points; views produced by
/// slice() may be shorter.
struct Trajectory {
    std::string id;
    std::vector<Point> points;

    std::size_t size() const { return points.size(); }
    PointSpan span() const { return {points.data(), points.size()}; }
};

inline bool operator==(const Trajectory& a, const Trajectory& b) {
    return a.id == b.id && a.points == b.points;
}

/// 1-based inclusive view over points s..e of a trajectory; s == e yields a
/// single-point view. Throws argument_error on out-of-range indices.
inline PointSpan slice(PointSpan pts, std::size_t s, std::size_t e) {
    if (s < 1 || s > e || e > pts.size())
        throw argument_error("slice: indices out of range");
    return pts.subspan(s - 1, e - s + 1);
}

inline PointSpan slice(const Trajectory& t, std::size_t s, std::size_t e) {
    return slice(t.span(), s, e);
}

/// Names a contiguous piece of a stored trajectory. Indices are 1-based and
/// inclusive, matching all documentation and file formats.
struct SubtrajRef {
    std::string traj_id;
    std::size_t start = 1;
    std::size_t end = 1;
    std::optional<double> score;

    std::size_t length() const { return end - start + 1; }
};

inline bool operator==(const SubtrajRef& a, const SubtrajRef& b) {
    return a.traj_id == b.traj_id && a.start == b.start && a.end == b.end &&
           a.score == b.score;
}

/// Immutable-after-ingest collection of trajectories. Slots are dense
/// insertion-order indices; all graph structures address trajectories by
/// slot and translate to ids at the interfaces.
class TrajectoryStore {
public:
    /// Inserts a trajectory and returns its slot. Rejects duplicate ids and
    /// trajectories shorter than two points.
    std::uint32_t insert(Trajectory t) {
        if (t.points.size() < 2)
            throw argument_error("store: trajectory '" + t.id + "' has fewer than 2 points");
        if (by_id_.count(t.id) != 0)
            throw argument_error("store: duplicate trajectory id '" + t.id + "'");
        const auto slot = static_cast<std::uint32_t>(trajs_.size());
        by_id_.emplace(t.id, slot);
        trajs_.push_back(std::move(t));
        return slot;
    }

    std::size_t size() const { return trajs_.size(); }
    bool empty() const { return trajs_.empty(); }

    bool contains(const std::string& id) const { return by_id_.count(id) != 0; }

    std::uint32_t slot_of(const std::string& id) const {
        auto it = by_id_.find(id);
        if (it == by_id_.end())
            throw argument_error("store: unknown trajectory id '" + id + "'");
        return it->second;
    }

    const Trajectory& at(std::uint32_t slot) const {
        if (slot >= trajs_.size())
            throw argument_error("store: slot out of range");
        return trajs_[slot];
    }

    const Trajectory& by_id(const std::string& id) const { return at(slot_of(id)); }
    const std::string& id_of(std::uint32_t slot) const { return at(slot).id; }

    auto begin() const { return trajs_.begin(); }
    auto end() const { return trajs_.end(); }

private:
    std::vector<Trajectory> trajs_;
    std::unordered_map<std::string, std::uint32_t> by_id_;
};

} // namespace subtraj
