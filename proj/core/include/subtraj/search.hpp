#pragma once

#include <cstdint>
#include <functional>
#include <unordered_map>
#include <vector>

#include "subtraj/config.hpp"
#include "subtraj/index.hpp"
#include "subtraj/similarity.hpp"
#include "subtraj/trajectory.hpp"

namespace subtraj {

/// Everything scored while answering one query: slot -> representative
/// score for every trajectory touched as an expanded node or a scored
/// neighbor, plus hop counters and phase wall times. Scores are cached, so
/// no trajectory is ever scored twice within a query.
struct SearchRecord {
    std::unordered_map<std::uint32_t, RepScore> visited;
    std::uint32_t hops_gari = 0;
    std::uint32_t hops_cndi = 0;
    double gari_ms = 0;
    double cndi_ms = 0;
    double topup_ms = 0;
    double total_ms = 0;
};

/// Ranked answer: k best-scoring representative slices, score descending
/// with trajectory-id ascending tie-break, at most one per trajectory.
struct QueryResult {
    std::vector<SubtrajRef> topk;
    SearchRecord record;
};

using NeighborFn = std::function<std::vector<std::uint32_t>(std::uint32_t)>;

/// Greedy hill climb: scores all out-neighbors of the current node, moves
/// to the best one while it strictly improves on the current score, and
/// returns the local maximum. Neighbor scores land in the record; nodes
/// already recorded are not re-scored. Terminates after at most N moves
/// because scores strictly increase along the walk.
std::uint32_t climb(const NeighborFn& neighbors, std::uint32_t start, PointSpan query,
                    const TrajectoryStore& store, const Config& cfg, SearchRecord& record,
                    unsigned threads = 0, std::uint32_t* hops_out = nullptr);

/// Full two-stage query: seeded-random entry into the upper graph, climb it
/// to a representative, climb the lower graph from there, score the final
/// node's neighborhood, top up the record breadth-first to the configured
/// floor, then return the k best recorded entries. query_salt
/// differentiates the per-query random stream under one configured seed.
QueryResult query_topk(PointSpan query, const IndexBundle& index, const TrajectoryStore& store,
                       const Config& cfg, std::uint64_t query_salt = 0, unsigned threads = 0);

/// Ground-truth baseline: scores every trajectory in the store and returns
/// the exact top-k. Also the reference for retrieval-quality metrics.
QueryResult exhaustive_topk(PointSpan query, const TrajectoryStore& store, const Config& cfg,
                            unsigned threads = 0);

/// Score-ordered (descending, id ascending) view of a record's contents.
std::vector<std::pair<std::uint32_t, RepScore>> ranked_entries(
    const SearchRecord& record, const TrajectoryStore& store);

} // namespace subtraj
