#pragma once

#include <cmath>
#include <optional>

namespace subtraj {

/// A recorded position: planar lon/lat coordinates in degrees plus an
/// optional timestamp in seconds. Timestamps are parsed and retained but
/// ignored by every algorithm in this library.
struct Point {
    double lon = 0.0;
    double lat = 0.0;
    std::optional<double> t;
};

inline bool operator==(const Point& a, const Point& b) {
    return a.lon == b.lon && a.lat == b.lat && a.t == b.t;
}

enum class DistanceModel { planar, haversine };

/// Euclidean distance in the coordinate plane. Degrees are treated as
/// planar units; this is the default metric everywhere.
inline double distance(const Point& a, const Point& b) {
    const double dx = a.lon - b.lon;
    const double dy = a.lat - b.lat;
    return std::sqrt(dx * dx + dy * dy);
}

/// Great-circle distance in meters (mean earth radius). Available behind
/// the same operation for callers that want geodesic units.
inline double haversine_distance(const Point& a, const Point& b) {
    constexpr double kEarthRadiusM = 6371000.0;
    constexpr double kDegToRad = 3.14159265358979323846 / 180.0;
    const double lat1 = a.lat * kDegToRad;
    const double lat2 = b.lat * kDegToRad;
    const double dlat = (b.lat - a.lat) * kDegToRad;
    const double dlon = (b.lon - a.lon) * kDegToRad;
    const double s1 = std::sin(dlat / 2.0);
    const double s2 = std::sin(dlon / 2.0);
    const double h = s1 * s1 + std::cos(lat1) * std::cos(lat2) * s2 * s2;
    return 2.0 * kEarthRadiusM * std::asin(std::min(1.0, std::sqrt(h)));
}

inline double distance(const Point& a, const Point& b, DistanceModel model) {
    return model == DistanceModel::planar ? distance(a, b) : haversine_distance(a, b);
}

} // namespace subtraj
