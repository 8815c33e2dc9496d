#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <vector>

#include "subtraj/config.hpp"
#include "subtraj/spatial.hpp"
#include "subtraj/trajectory.hpp"

namespace subtraj {

enum class EdgeTag : std::uint8_t { similar = 0, random = 1, dissimilar = 2 };

/// Upper-layer graph over one representative trajectory per non-empty grid
/// cell. Every node keeps directed edges to a handful of peers partitioned
/// by how they were picked: the most similar ones, seeded-random ones from
/// the middle of the similarity order, and the least similar ones.
struct GariGraph {
    std::vector<std::uint32_t> nodes; // store slots of representatives, cell scan order
    // adj[i][tag] lists neighbor slots (always GARI nodes themselves)
    std::vector<std::array<std::vector<std::uint32_t>, 3>> adj;

    std::size_t node_count() const { return nodes.size(); }

    /// All out-neighbors of node index i, similar then random then dissimilar.
    std::vector<std::uint32_t> all_neighbors(std::size_t i) const {
        std::vector<std::uint32_t> out;
        for (const auto& part : adj[i]) out.insert(out.end(), part.begin(), part.end());
        return out;
    }
};

inline bool operator==(const GariGraph& a, const GariGraph& b) {
    return a.nodes == b.nodes && a.adj == b.adj;
}

/// Lower-layer graph over every trajectory: per node, min(xi, N-1) directed
/// edges, a similarity-ranked share from the spatially-near candidates and
/// the rest from seeded-random candidates.
struct CndiGraph {
    struct Edge {
        std::uint32_t slot = 0;
        EdgeTag tag = EdgeTag::similar;
        bool operator==(const Edge&) const = default;
    };
    std::vector<std::vector<Edge>> adj; // indexed by store slot

    std::size_t node_count() const { return adj.size(); }
};

inline bool operator==(const CndiGraph& a, const CndiGraph& b) { return a.adj == b.adj; }

/// Everything the online phase needs, serializable as one file.
struct IndexBundle {
    std::uint32_t format_version = 1;
    Config config;
    Grid grid;
    GariGraph gari;
    CndiGraph cndi;
    std::uint64_t store_digest = 0;
};

/// Builds the upper-layer graph: dataset bounds, M x M grid, one
/// representative per non-empty cell, all-pairs trajectory similarity among
/// representatives, then per node the similar / random / dissimilar picks.
/// Random picks draw from the middle tertile of the per-node similarity
/// order with a per-node seeded stream, so builds parallelize without
/// affecting the result.
GariGraph build_gari(const TrajectoryStore& store, const Config& cfg, unsigned threads = 0);

/// Builds the lower-layer graph: per trajectory, spatially-near candidates
/// via the R-tree plus seeded-random candidates, trajectory similarity
/// against each, then the quota split between similarity-ranked and random
/// neighbors. Requires N >= 2.
CndiGraph build_cndi(const TrajectoryStore& store, const RTree& rtree, const Config& cfg,
                     unsigned threads = 0);

/// Phase timings of a full index build, milliseconds.
struct BuildTimings {
    double grid_ms = 0;
    double gari_ms = 0;
    double cndi_ms = 0;
};

IndexBundle build_index(const TrajectoryStore& store, const Config& cfg, unsigned threads = 0,
                        BuildTimings* timings = nullptr);

/// Versioned little-endian binary encoding with a trailing checksum;
/// load(save(x)) == x structurally and save(load(save(x))) is byte-equal.
/// Field order is documented in the README. Distinct errors: version_error,
/// truncation_error, checksum_error.
void save_index(const IndexBundle& bundle, const std::filesystem::path& path);
IndexBundle load_index(const std::filesystem::path& path);

std::string encode_index(const IndexBundle& bundle);
IndexBundle decode_index(std::string_view bytes);

} // namespace subtraj
