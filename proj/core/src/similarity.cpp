#include "subtraj/similarity.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <limits>
#include <mutex>
#include <unordered_map>
#include <vector>

namespace subtraj {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double point_cost(const Point& a, const Point& b) { return distance(a, b); }

bool edr_match(const Point& a, const Point& b, double eps) {
    return std::abs(a.lon - b.lon) <= eps && std::abs(a.lat - b.lat) <= eps;
}

std::string lower(const std::string& s) {
    std::string out;
    out.reserve(s.size());
    for (char c : s) out.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
    return out;
}

} // namespace

double dtw(PointSpan a, PointSpan b) {
    if (a.empty() || b.empty()) throw argument_error("dtw: empty trajectory");
    const std::size_t m = a.size();
    // col[i] holds D[i][j] for the current column j; column 0 is the
    // virtual empty prefix (infinite except the origin).
    std::vector<double> col(m + 1, kInf);
    col[0] = 0.0;
    for (std::size_t j = 0; j < b.size(); ++j) {
        double diag = col[0]; // D[i-1][j-1]
        col[0] = kInf;        // D[0][j>=1]
        for (std::size_t i = 1; i <= m; ++i) {
            const double up = col[i];
            const double left = col[i - 1];
            col[i] = point_cost(a[i - 1], b[j]) + std::min({diag, up, left});
            diag = up;
        }
    }
    return col[m];
}

double edr(PointSpan a, PointSpan b, double eps) {
    if (!(eps > 0.0)) throw argument_error("edr: eps must be positive");
    const std::size_t m = a.size();
    std::vector<double> col(m + 1);
    for (std::size_t i = 0; i <= m; ++i) col[i] = static_cast<double>(i);
    for (std::size_t j = 0; j < b.size(); ++j) {
        double diag = col[0];
        col[0] = static_cast<double>(j + 1);
        for (std::size_t i = 1; i <= m; ++i) {
            const double up = col[i];
            const double left = col[i - 1];
            const double match = edr_match(a[i - 1], b[j], eps) ? 0.0 : 1.0;
            col[i] = std::min({diag + match, up + 1.0, left + 1.0});
            diag = up;
        }
    }
    return col[m];
}

double erp(PointSpan a, PointSpan b, const Point& gap) {
    const std::size_t m = a.size();
    std::vector<double> col(m + 1, 0.0);
    for (std::size_t i = 1; i <= m; ++i) col[i] = col[i - 1] + point_cost(a[i - 1], gap);
    double border = 0.0; // D[0][j]
    for (std::size_t j = 0; j < b.size(); ++j) {
        const double gap_b = point_cost(b[j], gap);
        double diag = col[0];
        border += gap_b;
        col[0] = border;
        for (std::size_t i = 1; i <= m; ++i) {
            const double up = col[i];
            const double left = col[i - 1];
            col[i] = std::min({diag + point_cost(a[i - 1], b[j]),
                               up + gap_b,
                               left + point_cost(a[i - 1], gap)});
            diag = up;
        }
    }
    return col[m];
}

double metric_distance(const Metric& metric, double alpha, PointSpan a, PointSpan b) {
    switch (metric.kind) {
        case MetricKind::dtw: return dtw(a, b);
        case MetricKind::edr: return edr(a, b, metric.eps > 0.0 ? metric.eps : alpha);
        case MetricKind::erp: return erp(a, b, metric.gap);
    }
    throw state_error("metric_distance: bad metric kind");
}

double sim_transform(double dist, std::size_t query_len) {
    if (dist < 0.0 || query_len == 0) throw argument_error("sim_transform: bad arguments");
    return 1.0 / (1.0 + dist / static_cast<double>(query_len));
}

namespace {

// Incremental slice scorer: one DP column per metric, extended by one data
// point at a time so every (start, end) pair reuses its start's prefix.
class SliceScan {
public:
    SliceScan(PointSpan query, const Metric& metric, double alpha)
        : q_(query), metric_(metric),
          eps_(metric.eps > 0.0 ? metric.eps : alpha),
          col_(query.size() + 1) {}

    void reset() {
        switch (metric_.kind) {
            case MetricKind::dtw:
                std::fill(col_.begin(), col_.end(), kInf);
                col_[0] = 0.0;
                break;
            case MetricKind::edr:
                for (std::size_t i = 0; i < col_.size(); ++i) col_[i] = static_cast<double>(i);
                break;
            case MetricKind::erp:
                col_[0] = 0.0;
                for (std::size_t i = 1; i < col_.size(); ++i)
                    col_[i] = col_[i - 1] + point_cost(q_[i - 1], metric_.gap);
                break;
        }
        cols_seen_ = 0;
        border_ = 0.0;
    }

    /// Appends one data point to the slice and returns the full-slice
    /// distance for the extended slice.
    double extend(const Point& p) {
        ++cols_seen_;
        switch (metric_.kind) {
            case MetricKind::dtw: {
                double diag = col_[0];
                col_[0] = kInf;
                for (std::size_t i = 1; i < col_.size(); ++i) {
                    const double up = col_[i];
                    col_[i] = point_cost(q_[i - 1], p) + std::min({diag, up, col_[i - 1]});
                    diag = up;
                }
                break;
            }
            case MetricKind::edr: {
                double diag = col_[0];
                col_[0] = static_cast<double>(cols_seen_);
                for (std::size_t i = 1; i < col_.size(); ++i) {
                    const double up = col_[i];
                    const double match = edr_match(q_[i - 1], p, eps_) ? 0.0 : 1.0;
                    col_[i] = std::min({diag + match, up + 1.0, col_[i - 1] + 1.0});
                    diag = up;
                }
                break;
            }
            case MetricKind::erp: {
                const double gap_p = point_cost(p, metric_.gap);
                double diag = col_[0];
                border_ += gap_p;
                col_[0] = border_;
                for (std::size_t i = 1; i < col_.size(); ++i) {
                    const double up = col_[i];
                    col_[i] = std::min({diag + point_cost(q_[i - 1], p),
                                        up + gap_p,
                                        col_[i - 1] + point_cost(q_[i - 1], metric_.gap)});
                    diag = up;
                }
                break;
            }
        }
        return col_.back();
    }

private:
    PointSpan q_;
    Metric metric_;
    double eps_;
    std::vector<double> col_;
    std::size_t cols_seen_ = 0;
    double border_ = 0.0;
};

} // namespace

RepScore exact_s(PointSpan query, const Trajectory& data, const Metric& metric, double alpha) {
    if (query.empty() || data.points.empty())
        throw argument_error("exact_s: empty input");
    const std::size_t n = data.points.size();
    SliceScan scan(query, metric, alpha);

    double best = kInf;
    std::size_t best_a = 1, best_b = 1;
    for (std::size_t a = 0; a < n; ++a) {
        scan.reset();
        for (std::size_t b = a; b < n; ++b) {
            const double d = scan.extend(data.points[b]);
            if (d < best) {
                best = d;
                best_a = a + 1;
                best_b = b + 1;
            }
        }
    }

    RepScore out;
    out.distance = best;
    out.score = sim_transform(best, query.size());
    out.best = SubtrajRef{data.id, best_a, best_b, out.score};
    return out;
}

namespace {

std::unordered_map<std::string, Scorer>& scorer_registry() {
    static std::unordered_map<std::string, Scorer> reg = {
        {"exacts", [](PointSpan q, const Trajectory& d, const Config& cfg) {
             return exact_s(q, d, cfg.metric, cfg.alpha);
         }},
    };
    return reg;
}

std::mutex& scorer_mutex() {
    static std::mutex mu;
    return mu;
}

} // namespace

void register_scorer(const std::string& name, Scorer fn) {
    std::lock_guard<std::mutex> g(scorer_mutex());
    scorer_registry()[lower(name)] = std::move(fn);
}

bool has_scorer(const std::string& name) {
    std::lock_guard<std::mutex> g(scorer_mutex());
    return scorer_registry().count(lower(name)) != 0;
}

RepScore rep_similarity(PointSpan query, const Trajectory& data, const Config& cfg) {
    Scorer fn;
    {
        std::lock_guard<std::mutex> g(scorer_mutex());
        auto& reg = scorer_registry();
        auto it = reg.find(lower(cfg.scorer));
        if (it == reg.end())
            throw config_error("unknown scorer '" + cfg.scorer + "'");
        fn = it->second;
    }
    return fn(query, data, cfg);
}

} // namespace subtraj
