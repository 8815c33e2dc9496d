#pragma once

// Test-only reference implementations. Each one is deliberately naive --
// plain recursion or exhaustive scans -- and never shares code with the
// library paths it checks.

#include <algorithm>
#include <limits>
#include <vector>

#include "subtraj/config.hpp"
#include "subtraj/rng.hpp"
#include "subtraj/similarity.hpp"
#include "subtraj/spatial.hpp"
#include "subtraj/trajectory.hpp"

namespace subtraj::tsupport {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

// --- metric oracles (exponential recursions, use only on tiny inputs) ---

inline double naive_dtw_from(PointSpan a, PointSpan b, std::size_t i, std::size_t j) {
    const double d = distance(a[i], b[j]);
    if (i + 1 == a.size() && j + 1 == b.size()) return d;
    double best = kInf;
    if (i + 1 < a.size()) best = std::min(best, naive_dtw_from(a, b, i + 1, j));
    if (j + 1 < b.size()) best = std::min(best, naive_dtw_from(a, b, i, j + 1));
    if (i + 1 < a.size() && j + 1 < b.size())
        best = std::min(best, naive_dtw_from(a, b, i + 1, j + 1));
    return d + best;
}

/// DTW by enumerating every warping path.
inline double naive_dtw(PointSpan a, PointSpan b) { return naive_dtw_from(a, b, 0, 0); }

inline double naive_edr_from(PointSpan a, PointSpan b, std::size_t i, std::size_t j, double eps) {
    if (i == a.size()) return static_cast<double>(b.size() - j);
    if (j == b.size()) return static_cast<double>(a.size() - i);
    const bool match = std::abs(a[i].lon - b[j].lon) <= eps && std::abs(a[i].lat - b[j].lat) <= eps;
    double best = (match ? 0.0 : 1.0) + naive_edr_from(a, b, i + 1, j + 1, eps);
    best = std::min(best, 1.0 + naive_edr_from(a, b, i + 1, j, eps));
    best = std::min(best, 1.0 + naive_edr_from(a, b, i, j + 1, eps));
    return best;
}

/// EDR by enumerating every edit script.
inline double naive_edr(PointSpan a, PointSpan b, double eps) {
    return naive_edr_from(a, b, 0, 0, eps);
}

inline double naive_erp_from(PointSpan a, PointSpan b, std::size_t i, std::size_t j,
                             const Point& gap) {
    if (i == a.size() && j == b.size()) return 0.0;
    double best = kInf;
    if (i < a.size() && j < b.size())
        best = std::min(best, distance(a[i], b[j]) + naive_erp_from(a, b, i + 1, j + 1, gap));
    if (i < a.size())
        best = std::min(best, distance(a[i], gap) + naive_erp_from(a, b, i + 1, j, gap));
    if (j < b.size())
        best = std::min(best, distance(b[j], gap) + naive_erp_from(a, b, i, j + 1, gap));
    return best;
}

/// ERP by enumerating every alignment.
inline double naive_erp(PointSpan a, PointSpan b, const Point& gap) {
    return naive_erp_from(a, b, 0, 0, gap);
}

// --- slice-scorer oracle ---

struct NaiveBest {
    double dist = kInf;
    std::size_t a = 1, b = 1; // 1-based inclusive
};

/// Scores every slice independently from scratch; smaller (a, b) wins ties.
inline NaiveBest naive_exact_s(PointSpan query, PointSpan data, const Metric& metric,
                               double alpha) {
    NaiveBest best;
    for (std::size_t a = 1; a <= data.size(); ++a) {
        for (std::size_t b = a; b <= data.size(); ++b) {
            const double d = metric_distance(metric, alpha, query, slice(data, a, b));
            if (d < best.dist) best = NaiveBest{d, a, b};
        }
    }
    return best;
}

// --- spatial oracle ---

/// Exact k-nearest by MBR-center distance via linear scan, (dist, id) order.
inline std::vector<std::uint32_t> scan_nearest_k(const TrajectoryStore& store, const Mbr& probe,
                                                 std::size_t k,
                                                 std::optional<std::uint32_t> exclude) {
    std::vector<std::pair<double, std::uint32_t>> all;
    for (std::uint32_t s = 0; s < store.size(); ++s) {
        if (exclude && s == *exclude) continue;
        const Mbr mb = compute_mbr(store.at(s).span());
        const double dx = mb.center_x() - probe.center_x();
        const double dy = mb.center_y() - probe.center_y();
        all.emplace_back(std::sqrt(dx * dx + dy * dy), s);
    }
    std::sort(all.begin(), all.end(), [&](const auto& x, const auto& y) {
        if (x.first != y.first) return x.first < y.first;
        return store.id_of(x.second) < store.id_of(y.second);
    });
    std::vector<std::uint32_t> out;
    for (std::size_t i = 0; i < all.size() && i < k; ++i) out.push_back(all[i].second);
    return out;
}

// --- generators ---

inline std::vector<Point> random_points(Rng& rng, std::size_t len, double spread = 1.0) {
    std::vector<Point> pts;
    pts.reserve(len);
    for (std::size_t i = 0; i < len; ++i)
        pts.push_back(Point{rng.uniform(0.0, spread), rng.uniform(0.0, spread), std::nullopt});
    return pts;
}

inline Trajectory random_traj(Rng& rng, const std::string& id, std::size_t len,
                              double spread = 1.0) {
    return Trajectory{id, random_points(rng, len, spread)};
}

/// Picks alpha as a quantile of the cross-pair distance distribution so the
/// similarity matrix has roughly the requested +1 density.
inline double alpha_for_density(PointSpan d1, PointSpan d2, double density) {
    std::vector<double> dists;
    dists.reserve(d1.size() * d2.size());
    for (const Point& p : d1)
        for (const Point& q : d2) dists.push_back(distance(p, q));
    std::sort(dists.begin(), dists.end());
    const auto idx = static_cast<std::size_t>(density * (dists.size() - 1));
    const double alpha = dists[idx];
    return alpha > 0.0 ? alpha : 1e-9;
}

} // namespace subtraj::tsupport
