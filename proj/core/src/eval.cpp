#include "subtraj/eval.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <unordered_map>
#include <unordered_set>

#include "subtraj/dtsm.hpp"
#include "subtraj/parallel.hpp"
#include "subtraj/rng.hpp"

namespace subtraj {

namespace {

double ms_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0)
        .count();
}

// lenient prefix-overlap used internally by the harness; the public hr_k
// keeps its strict preconditions
double prefix_overlap(const std::vector<std::string>& pred, const std::vector<std::string>& truth,
                      std::size_t k) {
    std::unordered_set<std::string> t(truth.begin(),
                                      truth.begin() + std::min(k, truth.size()));
    std::size_t hit = 0;
    for (std::size_t i = 0; i < pred.size() && i < k; ++i) hit += t.count(pred[i]);
    return static_cast<double>(hit) / static_cast<double>(k);
}

std::string format_double(double v, const char* fmt = "%.6f") {
    char buf[64];
    std::snprintf(buf, sizeof buf, fmt, v);
    return buf;
}

} // namespace

double hr_k(const std::vector<std::string>& pred, const std::vector<std::string>& truth,
            std::size_t k) {
    if (k == 0 || pred.size() < k || truth.size() < k)
        throw argument_error("hr_k: lists shorter than k");
    return prefix_overlap(pred, truth, k);
}

double r10_at_50(const std::vector<std::string>& pred, const std::vector<std::string>& truth) {
    if (truth.size() < 10) throw argument_error("r10_at_50: need 10 truth entries");
    std::unordered_set<std::string> p(pred.begin(),
                                      pred.begin() + std::min<std::size_t>(50, pred.size()));
    std::size_t hit = 0;
    for (std::size_t i = 0; i < 10; ++i) hit += p.count(truth[i]);
    return static_cast<double>(hit) / 10.0;
}

double rr(const std::vector<std::string>& pred, const std::vector<std::string>& full_ranking) {
    std::unordered_map<std::string, std::size_t> rank; // 1-based
    for (std::size_t i = 0; i < full_ranking.size(); ++i) rank.emplace(full_ranking[i], i + 1);
    double sum = 0;
    for (const auto& id : pred) {
        auto it = rank.find(id);
        if (it == rank.end()) throw argument_error("rr: prediction '" + id + "' not in ranking");
        sum += static_cast<double>(it->second);
    }
    const double k = static_cast<double>(pred.size());
    const double n = static_cast<double>(full_ranking.size());
    const double rbar = sum / k;
    const double rbar0 = (k + 1.0) / 2.0;
    if (n - rbar0 <= 0.0) return 0.0;
    return (rbar - rbar0) / (n - rbar0);
}

namespace {

std::vector<Point> free_walk(Rng& rng, std::size_t len, double region, double step) {
    std::vector<Point> pts;
    pts.reserve(len);
    double x = rng.uniform(0.0, region);
    double y = rng.uniform(0.0, region);
    double heading = rng.uniform(0.0, 2.0 * 3.14159265358979323846);
    for (std::size_t i = 0; i < len; ++i) {
        pts.push_back(Point{x, y, std::nullopt});
        heading += rng.uniform(-0.6, 0.6);
        const double sl = step * rng.uniform(0.5, 1.5);
        x += std::cos(heading) * sl;
        y += std::sin(heading) * sl;
        // reflect into the window
        if (x < 0) x = -x;
        if (x > region) x = 2 * region - x;
        if (y < 0) y = -y;
        if (y > region) y = 2 * region - y;
    }
    return pts;
}

// trip along a street lattice: an L-shaped route between random origin and
// destination intersections, sampled at a fixed per-segment phase. Distinct
// trips share exact sub-paths the way road-bound GPS traces do.
std::vector<Point> street_trip(Rng& rng, std::size_t len, double region, double step,
                               double spacing) {
    const auto cells =
        std::max<std::uint64_t>(1, static_cast<std::uint64_t>(region / spacing));
    const auto segs_needed =
        1 + static_cast<std::uint64_t>(static_cast<double>(len) * step / spacing);

    // split the route between an x leg and a y leg, both fitting the grid
    std::uint64_t sx = rng.below(segs_needed + 1);
    std::uint64_t sy = segs_needed - sx;
    if (sx > cells) {
        sy += sx - cells;
        sx = cells;
    }
    if (sy > cells) {
        sx = std::min(cells, sx + (sy - cells));
        sy = cells;
    }
    const std::uint64_t ox = rng.below(cells - sx + 1);
    const std::uint64_t oy = rng.below(cells - sy + 1);
    const bool flip_x = rng.below(2) == 1; // direction of travel along each leg
    const bool flip_y = rng.below(2) == 1;
    const bool x_first = rng.below(2) == 1;

    // waypoints in lattice coordinates
    const double x0 = (flip_x ? ox + sx : ox) * spacing;
    const double x1 = (flip_x ? ox : ox + sx) * spacing;
    const double y0 = (flip_y ? oy + sy : oy) * spacing;
    const double y1 = (flip_y ? oy : oy + sy) * spacing;

    struct Leg {
        double from_x, from_y, to_x, to_y;
        std::uint64_t segs;
    };
    const Leg legs[2] = {
        x_first ? Leg{x0, y0, x1, y0, sx} : Leg{x0, y0, x0, y1, sy},
        x_first ? Leg{x1, y0, x1, y1, sy} : Leg{x0, y1, x1, y1, sx},
    };

    const auto samples_per_seg =
        std::max<std::size_t>(1, static_cast<std::size_t>(spacing / step));
    std::vector<Point> pts;
    pts.reserve(len);
    for (const Leg& leg : legs) {
        for (std::uint64_t seg = 0; seg < leg.segs && pts.size() < len; ++seg) {
            for (std::size_t s = 0; s < samples_per_seg && pts.size() < len; ++s) {
                const double t = (static_cast<double>(seg) +
                                  static_cast<double>(s) / static_cast<double>(samples_per_seg)) /
                                 static_cast<double>(leg.segs);
                pts.push_back(Point{leg.from_x + (leg.to_x - leg.from_x) * t,
                                    leg.from_y + (leg.to_y - leg.from_y) * t, std::nullopt});
            }
        }
    }
    // degenerate split (a zero-length leg): pad by continuing past the end
    while (pts.size() < len) {
        const Point& last = pts.back();
        const double dir = flip_y ? -1.0 : 1.0;
        pts.push_back(Point{last.lon, last.lat + dir * step, std::nullopt});
    }
    return pts;
}

std::vector<Point> random_walk(Rng& rng, std::size_t len, double region, double step,
                               double street_spacing = 0.0) {
    if (street_spacing > 0.0) return street_trip(rng, len, region, step, street_spacing);
    return free_walk(rng, len, region, step);
}

std::size_t uniform_len(Rng& rng, std::pair<std::size_t, std::size_t> range) {
    return range.first + rng.below(range.second - range.first + 1);
}

} // namespace

SynthCorpus synth_corpus(const SynthSpec& spec) {
    if (spec.data_len.first < 2 || spec.data_len.first > spec.data_len.second ||
        spec.query_len.first < 2 || spec.query_len.first > spec.query_len.second)
        throw argument_error("synth_corpus: bad length ranges");

    SynthCorpus corpus;
    Rng rng(derive_seed(spec.seed, "synth", 0));
    char idbuf[32];

    // shared routes, when requested: each data trajectory is a sub-span of
    // one of them, so distinct trips repeat the same paths the way fleet
    // traces do
    std::vector<std::vector<Point>> routes;
    const std::size_t route_pts = spec.data_len.second + spec.data_len.second / 2;
    for (std::size_t r = 0; r < spec.route_families; ++r)
        routes.push_back(random_walk(rng, route_pts, spec.region, spec.step, spec.street_spacing));

    for (std::size_t i = 0; i < spec.n_data; ++i) {
        const std::size_t len = uniform_len(rng, spec.data_len);
        std::snprintf(idbuf, sizeof idbuf, "d%06zu", i);
        std::vector<Point> pts;
        if (!routes.empty()) {
            const std::vector<Point>& route = routes[rng.below(routes.size())];
            const std::size_t offset = rng.below(route.size() - len + 1);
            pts.assign(route.begin() + offset, route.begin() + offset + len);
        } else {
            pts = random_walk(rng, len, spec.region, spec.step, spec.street_spacing);
        }
        if (spec.jitter > 0) {
            for (Point& p : pts) {
                p.lon += rng.uniform(-spec.jitter, spec.jitter);
                p.lat += rng.uniform(-spec.jitter, spec.jitter);
            }
        }
        corpus.data.insert(Trajectory{idbuf, std::move(pts)});
    }

    for (std::size_t q = 0; q < spec.n_queries; ++q) {
        const std::size_t len = uniform_len(rng, spec.query_len);
        const bool planted = rng.unit() < spec.embed_rate && spec.n_data > 0;
        std::snprintf(idbuf, sizeof idbuf, "q%05zu", q);
        if (planted) {
            const auto host = static_cast<std::uint32_t>(rng.below(spec.n_data));
            const Trajectory& h = corpus.data.at(host);
            const std::size_t l = std::min(len, h.points.size());
            const std::size_t start = rng.below(h.points.size() - l + 1);
            std::vector<Point> pts(h.points.begin() + start, h.points.begin() + start + l);
            if (spec.noise > 0) {
                for (Point& p : pts) {
                    p.lon += rng.uniform(-spec.noise, spec.noise);
                    p.lat += rng.uniform(-spec.noise, spec.noise);
                }
            }
            corpus.queries.insert(Trajectory{idbuf, std::move(pts)});
            corpus.planted_host.emplace_back(h.id);
        } else {
            corpus.queries.insert(Trajectory{
                idbuf, random_walk(rng, len, spec.region, spec.step, spec.street_spacing)});
            corpus.planted_host.emplace_back(std::nullopt);
        }
    }
    return corpus;
}

namespace {

std::vector<std::string> ranking_ids(const SearchRecord& record, const TrajectoryStore& store) {
    std::vector<std::string> ids;
    for (const auto& [slot, rep] : ranked_entries(record, store)) ids.push_back(store.id_of(slot));
    return ids;
}

} // namespace

EvalReport run_benchmark(const TrajectoryStore& data, const TrajectoryStore& queries,
                         const IndexBundle& index, const BenchmarkPlan& plan) {
    if (data.size() > plan.truth_cap && !plan.force)
        throw argument_error("run_benchmark: store size " + std::to_string(data.size()) +
                             " exceeds ground-truth cap " + std::to_string(plan.truth_cap) +
                             " (use force)");
    if (queries.empty()) throw argument_error("run_benchmark: no queries");

    EvalReport report;
    report.config = plan.base;
    const std::uint32_t kmax =
        std::max<std::uint32_t>(50, *std::max_element(plan.ks.begin(), plan.ks.end()));

    Config truth_cfg = plan.base;
    truth_cfg.k = static_cast<std::uint32_t>(data.size());
    Config graph_cfg = plan.base;
    graph_cfg.k = std::min<std::uint32_t>(kmax, static_cast<std::uint32_t>(data.size()));

    for (std::uint32_t q = 0; q < queries.size(); ++q) {
        const Trajectory& query = queries.at(q);

        auto t0 = std::chrono::steady_clock::now();
        const QueryResult truth = exhaustive_topk(query.span(), data, truth_cfg, plan.threads);
        const double exhaustive_ms = ms_since(t0);
        const std::vector<std::string> truth_ids = ranking_ids(truth.record, data);

        t0 = std::chrono::steady_clock::now();
        const QueryResult pred = query_topk(query.span(), index, data, graph_cfg, q, plan.threads);
        const double graph_ms = ms_since(t0);
        const std::vector<std::string> pred_ids = ranking_ids(pred.record, data);

        for (const std::uint32_t k : plan.ks) {
            MetricsRow row;
            row.query_id = query.id;
            row.method = "graph";
            row.k = k;
            row.hr = prefix_overlap(pred_ids, truth_ids, k);
            std::vector<std::string> pred_k(pred_ids.begin(),
                                            pred_ids.begin() + std::min<std::size_t>(k, pred_ids.size()));
            row.rr = rr(pred_k, truth_ids);
            row.r10_50 = r10_at_50(pred_ids, truth_ids);
            row.time_ms = graph_ms;
            report.rows.push_back(row);

            MetricsRow ex = row;
            ex.method = "exhaustive";
            ex.hr = 1.0;
            ex.rr = 0.0;
            ex.r10_50 = 1.0;
            ex.time_ms = exhaustive_ms;
            report.rows.push_back(ex);
        }
    }

    // aggregate means, keyed (method, k)
    std::map<std::pair<std::string, std::uint32_t>, std::pair<MetricsRow, std::size_t>> acc;
    for (const MetricsRow& row : report.rows) {
        auto& [sum, count] = acc[{row.method, row.k}];
        sum.method = row.method;
        sum.k = row.k;
        sum.hr += row.hr;
        sum.rr += row.rr;
        sum.r10_50 += row.r10_50;
        sum.time_ms += row.time_ms;
        ++count;
    }
    for (auto& [key, entry] : acc) {
        auto& [sum, count] = entry;
        sum.query_id = "mean";
        sum.hr /= count;
        sum.rr /= count;
        sum.r10_50 /= count;
        sum.time_ms /= count;
        report.aggregate.emplace(key, sum);
    }
    return report;
}

void write_metrics_csv(const EvalReport& report, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw data_error("cannot write '" + path.string() + "'");
    out << "query_id,method,k,hr,rr,r10_50,time_ms\n";
    auto emit = [&](const MetricsRow& r) {
        out << r.query_id << ',' << r.method << ',' << r.k << ',' << format_double(r.hr) << ','
            << format_double(r.rr) << ',' << format_double(r.r10_50) << ','
            << format_double(r.time_ms, "%.3f") << '\n';
    };
    for (const MetricsRow& r : report.rows) emit(r);
    for (const auto& [key, r] : report.aggregate) emit(r);
}

void write_series_dat(const std::vector<Series>& series, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw data_error("cannot write '" + path.string() + "'");
    bool first = true;
    for (const Series& s : series) {
        if (!first) out << "\n\n";
        first = false;
        out << "# " << s.name << '\n';
        for (const auto& [x, y] : s.points)
            out << format_double(x) << ' ' << format_double(y) << '\n';
    }
}

std::vector<Series> dtsm_timing_curve(const std::vector<std::size_t>& lengths, double alpha,
                                      std::uint64_t seed, int repeats) {
    Series out{"dtsm_10pairs_ms", {}};
    for (const std::size_t len : lengths) {
        Rng rng(derive_seed(seed, "dtsm-timing", len));
        std::vector<std::pair<std::vector<Point>, std::vector<Point>>> pairs;
        for (int p = 0; p < 10; ++p)
            pairs.emplace_back(random_walk(rng, len, 10.0, 0.05),
                               random_walk(rng, len, 10.0, 0.05));
        std::vector<double> samples;
        int sink = 0;
        for (int r = 0; r < repeats; ++r) {
            const auto t0 = std::chrono::steady_clock::now();
            for (const auto& [a, b] : pairs)
                sink += dtsm_score({a.data(), a.size()}, {b.data(), b.size()}, alpha);
            samples.push_back(ms_since(t0));
        }
        asm volatile("" : : "r"(sink) : "memory"); // keep the work observable
        std::sort(samples.begin(), samples.end());
        out.points.emplace_back(static_cast<double>(len), samples[samples.size() / 2]);
    }
    return {out};
}

namespace {

// mean HR-10 and mean query time of the graph method over all queries,
// graded against precomputed truth rankings
std::pair<double, double> grade_queries(const TrajectoryStore& data,
                                        const TrajectoryStore& queries,
                                        const IndexBundle& index, const Config& cfg,
                                        const std::vector<std::vector<std::string>>& truth,
                                        unsigned threads) {
    double hr_sum = 0, ms_sum = 0;
    for (std::uint32_t q = 0; q < queries.size(); ++q) {
        const auto t0 = std::chrono::steady_clock::now();
        const QueryResult res = query_topk(queries.at(q).span(), index, data, cfg, q, threads);
        ms_sum += ms_since(t0);
        hr_sum += prefix_overlap(ranking_ids(res.record, data), truth[q], 10);
    }
    return {hr_sum / queries.size(), ms_sum / queries.size()};
}

std::vector<std::vector<std::string>> truth_rankings(const TrajectoryStore& data,
                                                     const TrajectoryStore& queries,
                                                     const Config& base, unsigned threads) {
    Config cfg = base;
    cfg.k = static_cast<std::uint32_t>(data.size());
    std::vector<std::vector<std::string>> truth(queries.size());
    for (std::uint32_t q = 0; q < queries.size(); ++q)
        truth[q] = ranking_ids(exhaustive_topk(queries.at(q).span(), data, cfg, threads).record,
                               data);
    return truth;
}

} // namespace

std::vector<Series> neighbor_sweep(const TrajectoryStore& data, const TrajectoryStore& queries,
                                   const Config& base, const std::vector<std::uint32_t>& xis,
                                   unsigned threads) {
    const auto truth = truth_rankings(data, queries, base, threads);
    Series hr{"hr10_by_xi", {}};
    Series ms{"query_ms_by_xi", {}};
    for (const std::uint32_t xi : xis) {
        Config cfg = base;
        cfg.xi = xi;
        const IndexBundle index = build_index(data, cfg, threads);
        const auto [h, m] = grade_queries(data, queries, index, cfg, truth, threads);
        hr.points.emplace_back(xi, h);
        ms.points.emplace_back(xi, m);
    }
    return {hr, ms};
}

std::vector<Series> k_sweep(const TrajectoryStore& data, const TrajectoryStore& queries,
                            const IndexBundle& index, const Config& base,
                            const std::vector<std::uint32_t>& ks, unsigned threads) {
    const auto truth = truth_rankings(data, queries, base, threads);
    Series hr{"hrk_by_k", {}};
    for (const std::uint32_t k : ks) {
        Config cfg = base;
        cfg.k = k;
        double hr_sum = 0;
        for (std::uint32_t q = 0; q < queries.size(); ++q) {
            const QueryResult res =
                query_topk(queries.at(q).span(), index, data, cfg, q, threads);
            hr_sum += prefix_overlap(ranking_ids(res.record, data), truth[q], k);
        }
        hr.points.emplace_back(k, hr_sum / queries.size());
    }
    return {hr};
}

std::vector<Series> scalability_sweep(const TrajectoryStore& data,
                                      const TrajectoryStore& queries, const Config& base,
                                      const std::vector<std::size_t>& sizes, unsigned threads) {
    Series graph_ms{"graph_query_ms_by_n", {}};
    Series exhaustive_ms{"exhaustive_query_ms_by_n", {}};
    Series build_ms{"index_build_ms_by_n", {}};
    for (const std::size_t n : sizes) {
        if (n > data.size() || n < 2)
            throw argument_error("scalability_sweep: bad size " + std::to_string(n));
        TrajectoryStore prefix;
        for (std::uint32_t s = 0; s < n; ++s) {
            const Trajectory& t = data.at(s);
            prefix.insert(t);
        }
        auto t0 = std::chrono::steady_clock::now();
        const IndexBundle index = build_index(prefix, base, threads);
        build_ms.points.emplace_back(static_cast<double>(n), ms_since(t0));

        Config cfg = base;
        cfg.k = std::min<std::uint32_t>(cfg.k, static_cast<std::uint32_t>(n));
        double g_sum = 0, e_sum = 0;
        for (std::uint32_t q = 0; q < queries.size(); ++q) {
            t0 = std::chrono::steady_clock::now();
            (void)query_topk(queries.at(q).span(), index, prefix, cfg, q, threads);
            g_sum += ms_since(t0);
            t0 = std::chrono::steady_clock::now();
            (void)exhaustive_topk(queries.at(q).span(), prefix, cfg, threads);
            e_sum += ms_since(t0);
        }
        graph_ms.points.emplace_back(static_cast<double>(n), g_sum / queries.size());
        exhaustive_ms.points.emplace_back(static_cast<double>(n), e_sum / queries.size());
    }
    return {graph_ms, exhaustive_ms, build_ms};
}

} // namespace subtraj
