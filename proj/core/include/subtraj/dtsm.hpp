#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <utility>
#include <vector>

#include "subtraj/trajectory.hpp"

namespace subtraj {

/// Binary point-pair similarity matrix for one trajectory pair:
/// cell (i, j) is +1 when d(p_i, p_j) <= alpha, else -1.
class MatchMatrix {
public:
    MatchMatrix(std::size_t rows, std::size_t cols)
        : rows_(rows), cols_(cols), cells_(rows * cols, -1) {}

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }

    std::int8_t at(std::size_t i, std::size_t j) const { return cells_[i * cols_ + j]; }
    void set(std::size_t i, std::size_t j, std::int8_t v) { cells_[i * cols_ + j] = v; }
    bool similar(std::size_t i, std::size_t j) const { return at(i, j) > 0; }

private:
    std::size_t rows_, cols_;
    std::vector<std::int8_t> cells_;
};

MatchMatrix build_match_matrix(PointSpan d1, PointSpan d2, double alpha);

/// One admissible continuation step from a charged head pair: the integer
/// cost it adds and the pair that becomes the new head.
struct StepChoice {
    int cost = 0;
    std::uint32_t next_a = 0;
    std::uint32_t next_b = 0;
};

struct StepChoiceSet {
    std::array<StepChoice, 2> items{};
    int count = 0;

    const StepChoice* begin() const { return items.data(); }
    const StepChoice* end() const { return items.data() + count; }
};

/// Enumerates the continuation steps available from head (a, b), whose own
/// cost the caller has already charged. Indices are 0-based; last_a/last_b
/// bound the sub-matrix under consideration (inclusive). A step charges
/// exactly the pair it advances to:
///   - similar head: advance diagonally, charging the next diagonal pair
///     (+2 if it is similar, -2 otherwise);
///   - dissimilar head with a similar pair one step right (down): re-pair
///     the head's stranded point with it, +2 for the new pair plus +1
///     cancelling the stranded point's earlier penalty; both directions
///     similar yields both choices;
///   - dissimilar head and neighbors, similar diagonal: skip to it, +2;
///   - nothing similar nearby: drift right or down at -1 each.
/// Steps whose target pair falls outside the bounds are not emitted.
StepChoiceSet step_choices(const MatchMatrix& A, std::size_t a, std::size_t b,
                           std::size_t last_a, std::size_t last_b);

/// Best achievable continuation total from charged head (a, b), where the
/// walk may stop anywhere (the value is never negative). Memoized over the
/// whole matrix internally; exposed mainly for tests and diagnostics.
int best_continuation(const MatchMatrix& A, std::size_t a, std::size_t b);

/// Result of the trajectory-pair similarity score: the maximum point-pair
/// matching total over all subtrajectory pairs, plus the slice pair that
/// achieves it (absent when no similar start pair exists).
struct DtsmResult {
    int score = 0;
    std::optional<std::pair<SubtrajRef, SubtrajRef>> pair;
};

/// Data-trajectory similarity via dynamic programming: scans all similar
/// start pairs (dissimilar starts are pruned; see dtsm_oracle for the
/// unpruned reference), accumulates step costs along the best forward walk
/// and maximizes over all stopping points. O(n1 * n2) time and space.
/// The reported pair is the lexicographically smallest (start1, start2,
/// end1, end2) among maximizers.
DtsmResult dtsm(const Trajectory& d1, const Trajectory& d2, double alpha);

/// Score-only variant used in bulk by index construction.
int dtsm_score(PointSpan d1, PointSpan d2, double alpha);

/// Reference implementation: evaluates the identical recurrence semantics
/// (including the stop-anywhere option) over every start pair, similar or
/// not, by plain recursive enumeration of the whole branch tree -- no
/// memoization, no pruning. Guarded to n1, n2 <= 12. Dissimilar start
/// pairs score 0 by definition.
DtsmResult dtsm_oracle(const Trajectory& d1, const Trajectory& d2, double alpha);

/// Per-start score under the oracle semantics (0-based start indices);
/// exposed so pruning soundness can be checked start by start.
int dtsm_oracle_start_score(const MatchMatrix& A, std::size_t i, std::size_t j);

/// Re-evaluates the best alignment confined to the given slice pair and
/// returns its score; a valid DtsmResult replays to its own score.
int replay_pair_score(const Trajectory& d1, const Trajectory& d2, double alpha,
                      const std::pair<SubtrajRef, SubtrajRef>& pair);

} // namespace subtraj
