#include "subtraj/dtsm.hpp"

#include <algorithm>
#include <limits>

#include "subtraj/geo.hpp"

namespace subtraj {

MatchMatrix build_match_matrix(PointSpan d1, PointSpan d2, double alpha) {
    if (!(alpha > 0.0)) throw argument_error("match matrix: alpha must be > 0");
    MatchMatrix A(d1.size(), d2.size());
    for (std::size_t i = 0; i < d1.size(); ++i)
        for (std::size_t j = 0; j < d2.size(); ++j)
            A.set(i, j, distance(d1[i], d2[j]) <= alpha ? 1 : -1);
    return A;
}

StepChoiceSet step_choices(const MatchMatrix& A, std::size_t a, std::size_t b,
                           std::size_t last_a, std::size_t last_b) {
    StepChoiceSet out;
    const bool has_down = a + 1 <= last_a;
    const bool has_right = b + 1 <= last_b;
    auto push = [&out](int cost, std::size_t na, std::size_t nb) {
        out.items[out.count++] = StepChoice{cost, static_cast<std::uint32_t>(na),
                                            static_cast<std::uint32_t>(nb)};
    };

    if (A.similar(a, b)) {
        // matched head: the walk continues on the next diagonal pair
        if (has_down && has_right)
            push(A.similar(a + 1, b + 1) ? 2 : -2, a + 1, b + 1);
        return out;
    }

    const bool sim_right = has_right && A.similar(a, b + 1);
    const bool sim_down = has_down && A.similar(a + 1, b);
    if (sim_right) push(3, a, b + 1);  // +2 new pair, +1 cancels the stranded point
    if (sim_down) push(3, a + 1, b);
    if (sim_right || sim_down) return out;

    if (has_down && has_right && A.similar(a + 1, b + 1)) {
        push(2, a + 1, b + 1); // only the diagonal is similar: skip to it
        return out;
    }

    // nothing similar in reach: drift, re-pairing one point dissimilarly
    if (has_right) push(-1, a, b + 1);
    if (has_down) push(-1, a + 1, b);
    return out;
}

namespace {

struct End {
    std::uint32_t a = 0, b = 0;
    bool operator<(const End& o) const { return a != o.a ? a < o.a : b < o.b; }
};

// Bottom-up continuation values over the sub-matrix [0..last_a] x
// [0..last_b]. Cell (a, b) depends only on cells with larger a or b, so a
// reverse double loop suffices. `ends` (optional) receives, per cell, the
// lexicographically smallest stopping pair among value maximizers; the
// stop-here option wins ties automatically because any continuation ends
// strictly later.
void continuation_table(const MatchMatrix& A, std::size_t last_a, std::size_t last_b,
                        std::vector<int>& values, std::vector<End>* ends) {
    const std::size_t w = last_b + 1;
    values.assign((last_a + 1) * w, 0);
    if (ends) ends->assign((last_a + 1) * w, End{});
    for (std::size_t ai = last_a + 1; ai-- > 0;) {
        for (std::size_t bi = last_b + 1; bi-- > 0;) {
            int best = 0;
            End e{static_cast<std::uint32_t>(ai), static_cast<std::uint32_t>(bi)};
            for (const StepChoice& c : step_choices(A, ai, bi, last_a, last_b)) {
                const std::size_t idx = c.next_a * w + c.next_b;
                const int v = c.cost + values[idx];
                if (v > best) {
                    best = v;
                    if (ends) e = (*ends)[idx];
                } else if (ends && v == best && (*ends)[idx] < e) {
                    e = (*ends)[idx];
                }
            }
            values[ai * w + bi] = best;
            if (ends) (*ends)[ai * w + bi] = e;
        }
    }
}

} // namespace

int best_continuation(const MatchMatrix& A, std::size_t a, std::size_t b) {
    if (a >= A.rows() || b >= A.cols())
        throw argument_error("best_continuation: head out of range");
    std::vector<int> values;
    continuation_table(A, A.rows() - 1, A.cols() - 1, values, nullptr);
    return values[a * A.cols() + b];
}

int dtsm_score(PointSpan d1, PointSpan d2, double alpha) {
    if (d1.empty() || d2.empty()) throw argument_error("dtsm: empty trajectory");
    const MatchMatrix A = build_match_matrix(d1, d2, alpha);
    std::vector<int> values;
    continuation_table(A, A.rows() - 1, A.cols() - 1, values, nullptr);
    int best = 0;
    for (std::size_t i = 0; i < A.rows(); ++i)
        for (std::size_t j = 0; j < A.cols(); ++j)
            if (A.similar(i, j)) best = std::max(best, 2 + values[i * A.cols() + j]);
    return best;
}

DtsmResult dtsm(const Trajectory& d1, const Trajectory& d2, double alpha) {
    if (d1.points.empty() || d2.points.empty())
        throw argument_error("dtsm: empty trajectory");
    const MatchMatrix A = build_match_matrix(d1.span(), d2.span(), alpha);
    std::vector<int> values;
    std::vector<End> ends;
    continuation_table(A, A.rows() - 1, A.cols() - 1, values, &ends);

    DtsmResult out;
    for (std::size_t i = 0; i < A.rows(); ++i) {
        for (std::size_t j = 0; j < A.cols(); ++j) {
            if (!A.similar(i, j)) continue; // pruned start: cannot beat (i+1, j+1)
            const std::size_t idx = i * A.cols() + j;
            const int s = 2 + values[idx];
            if (s > out.score) {
                out.score = s;
                const End e = ends[idx];
                out.pair = std::make_pair(SubtrajRef{d1.id, i + 1, e.a + 1, std::nullopt},
                                          SubtrajRef{d2.id, j + 1, e.b + 1, std::nullopt});
            }
        }
    }
    return out;
}

namespace {

// Oracle stepping, written out independently of step_choices: plain
// recursion over the full branch tree, stop allowed anywhere. Returns the
// best total from charged head (a, b) and the lexicographically smallest
// stopping cell among maximizers.
struct OracleOut {
    int value;
    End end;
};

OracleOut oracle_continue(const MatchMatrix& A, std::size_t a, std::size_t b) {
    const std::size_t n1 = A.rows(), n2 = A.cols();
    int best = 0;
    End e{static_cast<std::uint32_t>(a), static_cast<std::uint32_t>(b)};

    auto consider = [&](int step_cost, std::size_t na, std::size_t nb) {
        const OracleOut sub = oracle_continue(A, na, nb);
        const int v = step_cost + sub.value;
        if (v > best || (v == best && sub.end < e)) {
            best = v;
            e = sub.end;
        }
    };

    if (A.at(a, b) > 0) {
        if (a + 1 < n1 && b + 1 < n2)
            consider(A.at(a + 1, b + 1) > 0 ? 2 : -2, a + 1, b + 1);
    } else {
        const bool r = b + 1 < n2 && A.at(a, b + 1) > 0;
        const bool d = a + 1 < n1 && A.at(a + 1, b) > 0;
        if (r || d) {
            if (r) consider(3, a, b + 1);
            if (d) consider(3, a + 1, b);
        } else if (a + 1 < n1 && b + 1 < n2 && A.at(a + 1, b + 1) > 0) {
            consider(2, a + 1, b + 1);
        } else {
            if (b + 1 < n2) consider(-1, a, b + 1);
            if (a + 1 < n1) consider(-1, a + 1, b);
        }
    }
    return {best, e};
}

} // namespace

int dtsm_oracle_start_score(const MatchMatrix& A, std::size_t i, std::size_t j) {
    if (i >= A.rows() || j >= A.cols())
        throw argument_error("oracle: start out of range");
    if (A.at(i, j) < 0) return 0; // a dissimilar pair cannot open an alignment
    return 2 + oracle_continue(A, i, j).value;
}

DtsmResult dtsm_oracle(const Trajectory& d1, const Trajectory& d2, double alpha) {
    if (d1.points.empty() || d2.points.empty())
        throw argument_error("dtsm_oracle: empty trajectory");
    if (d1.points.size() > 12 || d2.points.size() > 12)
        throw argument_error("dtsm_oracle: inputs limited to 12 points");
    const MatchMatrix A = build_match_matrix(d1.span(), d2.span(), alpha);

    DtsmResult out;
    for (std::size_t i = 0; i < A.rows(); ++i) {
        for (std::size_t j = 0; j < A.cols(); ++j) {
            if (A.at(i, j) < 0) continue; // scores 0, can never become the (positive) max
            const OracleOut c = oracle_continue(A, i, j);
            const int s = 2 + c.value;
            if (s > out.score) {
                out.score = s;
                out.pair = std::make_pair(SubtrajRef{d1.id, i + 1, c.end.a + 1, std::nullopt},
                                          SubtrajRef{d2.id, j + 1, c.end.b + 1, std::nullopt});
            }
        }
    }
    return out;
}

int replay_pair_score(const Trajectory& d1, const Trajectory& d2, double alpha,
                      const std::pair<SubtrajRef, SubtrajRef>& pair) {
    const auto& [r1, r2] = pair;
    if (r1.start < 1 || r1.end < r1.start || r1.end > d1.points.size() ||
        r2.start < 1 || r2.end < r2.start || r2.end > d2.points.size())
        throw argument_error("replay: slice pair out of range");
    const MatchMatrix A = build_match_matrix(d1.span(), d2.span(), alpha);
    const std::size_t i = r1.start - 1, j = r2.start - 1;
    if (!A.similar(i, j)) return 0;

    // best walk from (i, j) confined to the pair's bounds
    const std::size_t la = r1.end - 1, lb = r2.end - 1;
    MatchMatrix sub(la - i + 1, lb - j + 1);
    for (std::size_t x = i; x <= la; ++x)
        for (std::size_t y = j; y <= lb; ++y)
            sub.set(x - i, y - j, A.at(x, y));
    std::vector<int> values;
    continuation_table(sub, sub.rows() - 1, sub.cols() - 1, values, nullptr);
    return 2 + values[0];
}

} // namespace subtraj
