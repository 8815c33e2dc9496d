#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <string>

#include "subtraj/errors.hpp"
#include "subtraj/geo.hpp"

namespace subtraj {

enum class MetricKind : std::uint8_t { dtw = 0, edr = 1, erp = 2 };

enum class SimTransformKind : std::uint8_t { reciprocal = 0 };

inline const char* metric_name(MetricKind k) {
    switch (k) {
        case MetricKind::dtw: return "dtw";
        case MetricKind::edr: return "edr";
        case MetricKind::erp: return "erp";
    }
    return "?";
}

inline MetricKind metric_from_name(const std::string& name) {
    std::string s;
    for (char c : name) s.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
    if (s == "dtw") return MetricKind::dtw;
    if (s == "edr") return MetricKind::edr;
    if (s == "erp") return MetricKind::erp;
    throw config_error("unknown metric '" + name + "' (expected dtw, edr or erp)");
}

/// Full-trajectory distance selection. eps <= 0 means "use alpha" for the
/// edr match threshold. gap is the erp reference point; the default is the
/// raw origin (0, 0) -- no dataset centering is applied.
struct Metric {
    MetricKind kind = MetricKind::dtw;
    double eps = 0.0;
    Point gap{};

    bool operator==(const Metric&) const = default;
};

struct GariNeighborCounts {
    std::uint32_t similar = 2;
    std::uint32_t random = 1;
    std::uint32_t dissimilar = 1;

    bool operator==(const GariNeighborCounts&) const = default;
};

struct CandidateCounts {
    std::uint32_t spatial = 50; // nearest-by-mbr-center candidates per node
    std::uint32_t random = 50;  // random candidates per node

    bool operator==(const CandidateCounts&) const = default;
};

struct AblationFlags {
    bool no_gari = false;   // skip the upper-layer search, enter the lower graph at random
    bool no_random = false; // build the lower graph with delta = 1 (no random neighbors)
    bool no_record = false; // select top-k from the final node's neighborhood only

    bool operator==(const AblationFlags&) const = default;
};

/// Shared knob set for index construction and query processing. alpha has no
/// default on purpose: its unit depends on the coordinate space, so callers
/// must choose it.
struct Config {
    double alpha = 0.0;          // point-pair similarity threshold, required > 0
    std::uint32_t grid_m = 10;   // grid side count M
    std::uint32_t xi = 10;       // neighbors per lower-graph node
    double delta = 0.8;          // fraction of xi chosen by similarity
    GariNeighborCounts gari_neighbors;
    CandidateCounts candidates;
    std::uint32_t k = 10;        // result count
    Metric metric;
    std::string scorer = "exacts";
    std::uint64_t seed = 1;
    SimTransformKind sim_transform = SimTransformKind::reciprocal;
    std::uint32_t min_candidates = 0; // scored-node floor; 0 = max(4k, 50)
    AblationFlags ablate;

    /// Similar-neighbor quota for the lower graph: floor(delta * xi + 0.5),
    /// remainder goes to random neighbors.
    std::uint32_t cndi_similar_count() const {
        const double d = ablate.no_random ? 1.0 : delta;
        return static_cast<std::uint32_t>(std::floor(d * xi + 0.5));
    }

    double effective_delta() const { return ablate.no_random ? 1.0 : delta; }

    std::uint32_t effective_min_candidates() const {
        return min_candidates != 0 ? min_candidates : std::max(4 * k, 50u);
    }

    double edr_eps() const { return metric.eps > 0.0 ? metric.eps : alpha; }

    void validate() const {
        if (!(alpha > 0.0)) throw config_error("alpha must be > 0");
        if (grid_m < 1) throw config_error("grid_m must be >= 1");
        if (xi < 1) throw config_error("xi must be >= 1");
        if (k < 1) throw config_error("k must be >= 1");
        if (!(delta >= 0.0 && delta <= 1.0)) throw config_error("delta must be in [0, 1]");
        if (!std::isfinite(alpha) || !std::isfinite(delta)) throw config_error("non-finite config value");
        if (metric.kind == MetricKind::edr && !(edr_eps() > 0.0))
            throw config_error("edr requires a positive eps (or alpha fallback)");
    }

    bool operator==(const Config&) const = default;
};

} // namespace subtraj
