#pragma once

#include <functional>
#include <string>

#include "subtraj/config.hpp"
#include "subtraj/trajectory.hpp"

namespace subtraj {

/// Representative similarity of one data trajectory against a query: the
/// best-scoring slice, its transformed score in (0, 1], and the raw metric
/// distance that produced it.
struct RepScore {
    double score = 0.0;
    SubtrajRef best;
    double distance = 0.0;
};

/// Dynamic time warping. Cumulative cost D[i][j] = d(a_i, b_j) +
/// min(D[i-1][j], D[i][j-1], D[i-1][j-1]) with D[0][0] = 0 and the first
/// row/column infinite elsewhere. Throws argument_error on empty input.
double dtw(PointSpan a, PointSpan b);

/// Edit distance on real sequences: points match when both coordinate
/// deltas are within eps; insert/delete/mismatch cost 1. Returns the
/// (integer-valued) edit count. eps must be positive.
double edr(PointSpan a, PointSpan b, double eps);

/// Edit distance with real penalty: substitution costs d(a_i, b_j), a gap
/// costs the distance to the fixed gap point.
double erp(PointSpan a, PointSpan b, const Point& gap);

/// Dispatches to dtw/edr/erp. For edr, metric.eps <= 0 falls back to alpha.
double metric_distance(const Metric& metric, double alpha, PointSpan a, PointSpan b);

/// Maps a distance to a similarity in (0, 1]: 1 / (1 + dist / query_len).
/// Strictly decreasing in dist; 1 exactly when dist = 0. Dividing by the
/// query length keeps scores comparable across query sizes.
double sim_transform(double dist, std::size_t query_len);

/// Exact representative-similarity scorer. Scans every slice start a of the
/// data trajectory and extends the end b incrementally, reusing the DP
/// column of the shared prefix, so the whole O(n^2) slice family costs
/// O(m n^2). Ties are broken towards the smaller (a, b).
RepScore exact_s(PointSpan query, const Trajectory& data, const Metric& metric, double alpha);

/// A scorer maps (query, data trajectory, config) to a RepScore. Additional
/// scorers can be registered under a name and selected via Config::scorer,
/// so external subtrajectory-similarity algorithms can slot in without
/// touching the engine.
using Scorer = std::function<RepScore(PointSpan, const Trajectory&, const Config&)>;

/// Registers a scorer under a case-insensitive name. Re-registering a name
/// replaces the previous entry. The "exacts" scorer is built in.
void register_scorer(const std::string& name, Scorer fn);

bool has_scorer(const std::string& name);

/// Scores one data trajectory against the query with the configured scorer.
/// Throws config_error for unknown scorer names.
RepScore rep_similarity(PointSpan query, const Trajectory& data, const Config& cfg);

} // namespace subtraj
