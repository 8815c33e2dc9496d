#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "subtraj/config.hpp"
#include "subtraj/index.hpp"
#include "subtraj/search.hpp"
#include "subtraj/trajectory.hpp"

namespace subtraj {

/// Fraction of the true top-k ids present in the predicted top-k.
/// Permutation-invariant within the compared prefixes.
double hr_k(const std::vector<std::string>& pred, const std::vector<std::string>& truth,
            std::size_t k);

/// Fraction of the true top-10 present in the predicted top-50 (or the full
/// prediction when fewer than 50 results exist).
double r10_at_50(const std::vector<std::string>& pred, const std::vector<std::string>& truth);

/// Normalized mean ground-truth rank of the predictions. With mean rank
/// rbar over pred's members in the full truth ranking (1-based), the ideal
/// rbar0 = (k+1)/2, and rr = (rbar - rbar0) / (N - rbar0): 0 for a perfect
/// result, at most 1, lower is better.
double rr(const std::vector<std::string>& pred, const std::vector<std::string>& full_ranking);

/// Synthetic corpus recipe: random-walk data trajectories plus queries, a
/// configurable fraction of which are noisy copies of slices of data
/// trajectories (planted positives). Walks follow a street lattice when
/// street_spacing > 0 (GPS-trace-like data where distinct trajectories
/// share sub-paths), or move freely when it is 0.
struct SynthSpec {
    std::size_t n_data = 1000;
    std::size_t n_queries = 50;
    std::pair<std::size_t, std::size_t> data_len{90, 300};
    std::pair<std::size_t, std::size_t> query_len{30, 90};
    double embed_rate = 0.8;
    double noise = 0.0; // per-coordinate uniform jitter amplitude
    std::uint64_t seed = 1;
    double region = 10.0;        // square side of the coordinate window
    double step = 0.05;          // spacing between consecutive points
    double street_spacing = 0.5; // lattice pitch; 0 = free-space walk
    double jitter = 0.003;       // per-point positional dither on data points
    // when > 0, trips are drawn as sub-spans of this many shared routes
    // (commute/fleet structure); 0 = every trip is its own route
    std::size_t route_families = 0;
};

struct SynthCorpus {
    TrajectoryStore data;
    TrajectoryStore queries;
    // per query: id of the data trajectory its slice was planted into
    std::vector<std::optional<std::string>> planted_host;
};

SynthCorpus synth_corpus(const SynthSpec& spec);

/// One metrics.csv row: per query and method.
struct MetricsRow {
    std::string query_id;
    std::string method;
    std::uint32_t k = 0;
    double hr = 0;
    double rr = 0;
    double r10_50 = 0;
    double time_ms = 0;
};

struct EvalReport {
    std::vector<MetricsRow> rows;
    // aggregate means keyed by (method, k)
    std::map<std::pair<std::string, std::uint32_t>, MetricsRow> aggregate;
    Config config;
};

struct BenchmarkPlan {
    Config base;
    std::vector<std::uint32_t> ks{10, 20, 50};
    std::size_t truth_cap = 5000; // refuse exhaustive ground truth beyond this N
    bool force = false;
    unsigned threads = 0;
};

/// Runs the graph method and the exhaustive baseline over all queries,
/// grading both against exhaustive ground truth (computed once per query,
/// never by the graph method itself). Guards the ground-truth cost behind
/// truth_cap unless forced.
EvalReport run_benchmark(const TrajectoryStore& data, const TrajectoryStore& queries,
                         const IndexBundle& index, const BenchmarkPlan& plan);

void write_metrics_csv(const EvalReport& report, const std::filesystem::path& path);

/// (x, y...) series written as whitespace-separated plot data.
struct Series {
    std::string name;
    std::vector<std::pair<double, double>> points;
};
void write_series_dat(const std::vector<Series>& series, const std::filesystem::path& path);

/// Pair-similarity timing curve: total milliseconds for batches of 10
/// random trajectory pairs at each length.
std::vector<Series> dtsm_timing_curve(const std::vector<std::size_t>& lengths,
                                      double alpha, std::uint64_t seed, int repeats = 5);

/// Neighbor-count sweep: rebuilds the index per xi value and reports mean
/// HR-10 and mean query time.
std::vector<Series> neighbor_sweep(const TrajectoryStore& data, const TrajectoryStore& queries,
                                   const Config& base, const std::vector<std::uint32_t>& xis,
                                   unsigned threads = 0);

/// Result-size sweep over one prebuilt index: mean HR-k per k.
std::vector<Series> k_sweep(const TrajectoryStore& data, const TrajectoryStore& queries,
                            const IndexBundle& index, const Config& base,
                            const std::vector<std::uint32_t>& ks, unsigned threads = 0);

/// Scalability curve: for each store-size prefix, index build + mean query
/// time for the graph method vs the exhaustive baseline.
std::vector<Series> scalability_sweep(const TrajectoryStore& data,
                                      const TrajectoryStore& queries, const Config& base,
                                      const std::vector<std::size_t>& sizes,
                                      unsigned threads = 0);

} // namespace subtraj
