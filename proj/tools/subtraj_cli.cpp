// subtraj: trajectory ingest, dual-layer graph index construction, top-k
// representative similar subtrajectory queries, and evaluation harness.

#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "subtraj/eval.hpp"
#include "subtraj/index.hpp"
#include "subtraj/io.hpp"
#include "subtraj/search.hpp"

namespace fs = std::filesystem;
using namespace subtraj;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitData = 2;
constexpr int kExitInternal = 3;

struct ConfigFlags {
    Config cfg;
    unsigned threads = 0;
    std::vector<std::string> ablate;
    std::string metric_name = "dtw";
    std::string config_file;

    void attach(CLI::App* cmd, bool alpha_required) {
        cmd->add_option("--config", config_file,
                        "flat key=value config file; flags override file values");
        auto* a = cmd->add_option("--alpha", cfg.alpha, "point-pair similarity threshold");
        if (alpha_required) a->required();
        cmd->add_option("--grid-m", cfg.grid_m, "grid side count M");
        cmd->add_option("--xi", cfg.xi, "neighbors per lower-graph node");
        cmd->add_option("--delta", cfg.delta, "similarity-guided share of xi, in [0,1]");
        cmd->add_option("--k", cfg.k, "result count");
        cmd->add_option("--metric", metric_name, "similarity metric: dtw, edr or erp");
        cmd->add_option("--scorer", cfg.scorer, "representative-similarity scorer name");
        cmd->add_option("--seed", cfg.seed, "random seed");
        cmd->add_option("--threads", threads, "worker thread cap (0 = hardware)");
        cmd->add_option("--kappa-spatial", cfg.candidates.spatial,
                        "spatial candidates per node");
        cmd->add_option("--kappa-random", cfg.candidates.random, "random candidates per node");
        cmd->add_option("--gari-similar", cfg.gari_neighbors.similar,
                        "similar neighbors per upper-graph node");
        cmd->add_option("--gari-random", cfg.gari_neighbors.random,
                        "random neighbors per upper-graph node");
        cmd->add_option("--gari-dissimilar", cfg.gari_neighbors.dissimilar,
                        "dissimilar neighbors per upper-graph node");
        cmd->add_option("--min-candidates", cfg.min_candidates,
                        "scored-node floor (0 = max(4k, 50))");
        cmd->add_option("--edr-eps", cfg.metric.eps, "edr match threshold (0 = alpha)");
        cmd->add_option("--erp-gap-lon", cfg.metric.gap.lon, "erp gap point longitude");
        cmd->add_option("--erp-gap-lat", cfg.metric.gap.lat, "erp gap point latitude");
        cmd->add_option("--ablate", ablate,
                        "disable a component: no-gari, no-random, no-record")
            ->delimiter(',');
    }

    void finalize() {
        cfg.metric.kind = metric_from_name(metric_name);
        for (const std::string& a : ablate) {
            if (a == "no-gari") cfg.ablate.no_gari = true;
            else if (a == "no-random") cfg.ablate.no_random = true;
            else if (a == "no-record") cfg.ablate.no_record = true;
            else throw config_error("unknown ablation '" + a + "'");
        }
    }
};

std::string fmt(double v, const char* f = "%.6f") {
    char buf[64];
    std::snprintf(buf, sizeof buf, f, v);
    return buf;
}

// Flat key=value config support: file values are injected as --key=value
// tokens for the active subcommand, except for keys the command line
// already provides, so explicit flags override the file.
std::vector<std::string> config_file_tokens(CLI::App& app, int argc, char** argv) {
    std::vector<std::string> extra;
    if (argc < 2) return extra;
    CLI::App* sub = nullptr;
    for (CLI::App* s : app.get_subcommands(nullptr))
        if (s->get_name() == argv[1]) sub = s;
    if (sub == nullptr) return extra;

    std::string path;
    auto given = [&](const std::string& flag) {
        for (int i = 2; i < argc; ++i) {
            const std::string arg = argv[i];
            if (arg == flag || arg.rfind(flag + "=", 0) == 0) return true;
        }
        return false;
    };
    for (int i = 2; i < argc; ++i) {
        const std::string arg = argv[i];
        if (arg == "--config" && i + 1 < argc) path = argv[i + 1];
        else if (arg.rfind("--config=", 0) == 0) path = arg.substr(9);
    }
    if (path.empty()) return extra;

    std::ifstream in(path);
    if (!in) throw data_error("cannot open config file '" + path + "'");
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty() || line[0] == '#') continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw config_error("config line " + std::to_string(line_no) + ": expected key=value");
        const std::string key = line.substr(0, eq);
        const std::string value = line.substr(eq + 1);
        if (key == "config") continue;
        if (sub->get_option_no_throw("--" + key) == nullptr)
            throw config_error("config line " + std::to_string(line_no) + ": unknown key '" +
                               key + "'");
        if (!given("--" + key)) extra.push_back("--" + key + "=" + value);
    }
    return extra;
}

std::vector<std::uint32_t> parse_u32_list(const std::vector<std::string>& vals) {
    std::vector<std::uint32_t> out;
    for (const auto& v : vals) out.push_back(static_cast<std::uint32_t>(std::stoul(v)));
    return out;
}

void print_histogram(const std::map<std::size_t, std::size_t>& hist, std::ostream& out) {
    if (hist.empty()) return;
    const std::size_t lo = hist.begin()->first;
    const std::size_t hi = hist.rbegin()->first;
    const std::size_t bins = std::min<std::size_t>(10, hi - lo + 1);
    const std::size_t width = (hi - lo + bins) / bins;
    std::map<std::size_t, std::size_t> bucket;
    for (const auto& [len, count] : hist) bucket[(len - lo) / width] += count;
    out << "length histogram:\n";
    for (const auto& [b, count] : bucket) {
        out << "  [" << (lo + b * width) << ", " << (lo + (b + 1) * width) << "): " << count
            << '\n';
    }
}

int cmd_ingest(const std::string& input, const std::string& output, std::size_t min_len,
               std::size_t max_len) {
    TrajectoryStore store;
    const IngestStats stats = ingest_csv_file(input, store, IngestOptions{min_len, max_len});
    save_store(store, output);
    std::cout << "rows: " << stats.rows << "\n"
              << "kept: " << stats.kept << "\n"
              << "dropped_short: " << stats.dropped_short << "\n"
              << "dropped_long: " << stats.dropped_long << "\n"
              << "deduped_points: " << stats.deduped_points << "\n";
    print_histogram(stats.length_histogram, std::cout);
    return kExitOk;
}

int cmd_build(const std::string& store_path, const std::string& output, ConfigFlags& flags) {
    flags.finalize();
    const TrajectoryStore store = load_store(store_path);
    if (flags.cfg.xi > store.size() - 1) {
        std::cerr << "warning: xi " << flags.cfg.xi << " clamped to " << store.size() - 1
                  << " (store has " << store.size() << " trajectories)\n";
    }
    BuildTimings timings;
    const IndexBundle bundle = build_index(store, flags.cfg, flags.threads, &timings);
    save_index(bundle, output);
    std::cout << "trajectories: " << store.size() << "\n"
              << "representatives: " << bundle.gari.nodes.size() << "\n"
              << "grid_ms: " << fmt(timings.grid_ms, "%.3f") << "\n"
              << "gari_ms: " << fmt(timings.gari_ms, "%.3f") << "\n"
              << "cndi_ms: " << fmt(timings.cndi_ms, "%.3f") << "\n";
    return kExitOk;
}

// query-time knobs ride on top of the index's stored build config
Config query_config(const IndexBundle& index, const ConfigFlags& flags, const CLI::App* cmd) {
    Config cfg = index.config;
    cfg.ablate = AblationFlags{};
    auto take = [&](const char* name, auto member) {
        if (cmd->count(name) > 0) cfg.*member = flags.cfg.*member;
    };
    take("--k", &Config::k);
    take("--seed", &Config::seed);
    take("--scorer", &Config::scorer);
    take("--min-candidates", &Config::min_candidates);
    if (cmd->count("--alpha") > 0) cfg.alpha = flags.cfg.alpha;
    if (cmd->count("--metric") > 0) cfg.metric.kind = flags.cfg.metric.kind;
    cfg.ablate.no_gari = flags.cfg.ablate.no_gari;
    cfg.ablate.no_record = flags.cfg.ablate.no_record;
    return cfg;
}

int cmd_query(const std::string& index_path, const std::string& store_path,
              const std::string& queries_path, const std::string& out_path,
              std::size_t query_min_len, std::size_t query_max_len, ConfigFlags& flags,
              const CLI::App* cmd) {
    flags.finalize();
    const TrajectoryStore store = load_store(store_path);
    const IndexBundle index = load_index(index_path);
    if (index.store_digest != store_fingerprint(store))
        throw data_error("index was built over a different store");

    TrajectoryStore queries;
    ingest_csv_file(queries_path, queries, IngestOptions{query_min_len, query_max_len});

    const Config cfg = query_config(index, flags, cmd);
    cfg.validate();

    std::ofstream file;
    std::ostream* out = &std::cout;
    if (!out_path.empty()) {
        file.open(out_path);
        if (!file) throw data_error("cannot write '" + out_path + "'");
        out = &file;
    }
    *out << "rank,traj_id,start,end,score,visited,hops,ms\n";
    for (std::uint32_t q = 0; q < queries.size(); ++q) {
        const QueryResult res =
            query_topk(queries.at(q).span(), index, store, cfg, q, flags.threads);
        *out << "# query " << queries.at(q).id << "\n";
        const std::size_t visited = res.record.visited.size();
        const std::uint32_t hops = res.record.hops_gari + res.record.hops_cndi;
        for (std::size_t r = 0; r < res.topk.size(); ++r) {
            const SubtrajRef& ref = res.topk[r];
            *out << (r + 1) << ',' << ref.traj_id << ',' << ref.start << ',' << ref.end << ','
                 << fmt(ref.score.value_or(0.0), "%.9f") << ',' << visited << ',' << hops << ','
                 << fmt(res.record.total_ms, "%.3f") << "\n";
        }
    }
    return kExitOk;
}

int cmd_eval(const std::string& index_path, const std::string& store_path,
             const std::string& queries_path, const std::string& report_dir,
             const std::vector<std::string>& ks, std::size_t truth_cap, bool force,
             std::size_t query_min_len, std::size_t query_max_len, ConfigFlags& flags,
             const CLI::App* cmd) {
    flags.finalize();
    const TrajectoryStore store = load_store(store_path);
    const IndexBundle index = load_index(index_path);
    if (index.store_digest != store_fingerprint(store))
        throw data_error("index was built over a different store");
    TrajectoryStore queries;
    ingest_csv_file(queries_path, queries, IngestOptions{query_min_len, query_max_len});

    BenchmarkPlan plan;
    plan.base = query_config(index, flags, cmd);
    plan.base.validate();
    if (!ks.empty()) plan.ks = parse_u32_list(ks);
    plan.truth_cap = truth_cap;
    plan.force = force;
    plan.threads = flags.threads;

    const EvalReport report = run_benchmark(store, queries, index, plan);
    fs::create_directories(report_dir);
    write_metrics_csv(report, fs::path(report_dir) / "metrics.csv");

    for (const auto& [key, row] : report.aggregate) {
        std::cout << key.first << " k=" << key.second << " hr=" << fmt(row.hr)
                  << " rr=" << fmt(row.rr) << " r10@50=" << fmt(row.r10_50)
                  << " time_ms=" << fmt(row.time_ms, "%.3f") << "\n";
    }
    return kExitOk;
}

int cmd_sweep(const std::string& param, const std::string& index_path,
              const std::string& store_path, const std::string& queries_path,
              const std::string& report_dir, const std::vector<std::string>& values,
              std::size_t query_min_len, std::size_t query_max_len, ConfigFlags& flags,
              const CLI::App*) {
    flags.finalize();
    fs::create_directories(report_dir);

    if (param == "dtsm") {
        std::vector<std::size_t> lengths{50, 100, 200};
        if (!values.empty()) {
            lengths.clear();
            for (const auto& v : values) lengths.push_back(std::stoul(v));
        }
        const auto series =
            dtsm_timing_curve(lengths, flags.cfg.alpha, flags.cfg.seed);
        write_series_dat(series, fs::path(report_dir) / "fig_dtsm_time.dat");
        return kExitOk;
    }

    const TrajectoryStore store = load_store(store_path);
    TrajectoryStore queries;
    ingest_csv_file(queries_path, queries, IngestOptions{query_min_len, query_max_len});

    if (param == "xi") {
        std::vector<std::uint32_t> xis{2, 5, 10, 20};
        if (!values.empty()) xis = parse_u32_list(values);
        const auto series = neighbor_sweep(store, queries, flags.cfg, xis, flags.threads);
        write_series_dat(series, fs::path(report_dir) / "fig_neighbors.dat");
        return kExitOk;
    }
    if (param == "k") {
        const IndexBundle index = load_index(index_path);
        if (index.store_digest != store_fingerprint(store))
            throw data_error("index was built over a different store");
        std::vector<std::uint32_t> ks{1, 5, 10, 20, 50};
        if (!values.empty()) ks = parse_u32_list(values);
        const auto series = k_sweep(store, queries, index, flags.cfg, ks, flags.threads);
        write_series_dat(series, fs::path(report_dir) / "fig_topk.dat");
        return kExitOk;
    }
    if (param == "scale") {
        std::vector<std::size_t> sizes;
        for (const auto& v : values) sizes.push_back(std::stoul(v));
        if (sizes.empty())
            sizes = {store.size() / 4, store.size() / 2, store.size()};
        const auto series = scalability_sweep(store, queries, flags.cfg, sizes, flags.threads);
        write_series_dat(series, fs::path(report_dir) / "fig_scalability.dat");
        return kExitOk;
    }
    throw config_error("unknown sweep parameter '" + param + "'");
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"top-k representative similar subtrajectory queries over a dual-layer "
                 "graph index"};
    app.require_subcommand(1);

    // ingest
    auto* ingest = app.add_subcommand("ingest", "validate a trajectory CSV into a store file");
    std::string in_csv, out_store, ingest_config;
    std::size_t min_len = 90, max_len = 300;
    ingest->add_option("--config", ingest_config,
                       "flat key=value config file; flags override file values");
    ingest->add_option("--input", in_csv, "trajectory CSV (traj_id,seq,lon,lat[,t])")->required();
    ingest->add_option("--output", out_store, "store file to write")->required();
    ingest->add_option("--min-len", min_len, "drop data trajectories shorter than this");
    ingest->add_option("--max-len", max_len, "drop data trajectories longer than this");

    // build
    auto* build = app.add_subcommand("build", "build the dual-layer graph index");
    std::string b_store, b_out;
    ConfigFlags b_flags;
    build->add_option("--store", b_store, "store file")->required();
    build->add_option("--output", b_out, "index file to write")->required();
    b_flags.attach(build, /*alpha_required=*/true);

    // query
    auto* query = app.add_subcommand("query", "answer top-k queries from a query CSV");
    std::string q_index, q_store, q_csv, q_out;
    std::size_t q_min = 30, q_max = 90;
    ConfigFlags q_flags;
    query->add_option("--index", q_index, "index file")->required();
    query->add_option("--store", q_store, "store file")->required();
    query->add_option("--queries", q_csv, "query CSV")->required();
    query->add_option("--out", q_out, "result CSV (default stdout)");
    query->add_option("--query-min-len", q_min, "drop queries shorter than this");
    query->add_option("--query-max-len", q_max, "drop queries longer than this");
    q_flags.attach(query, /*alpha_required=*/false);

    // eval
    auto* eval = app.add_subcommand("eval", "grade the graph method against exhaustive truth");
    std::string e_index, e_store, e_csv, e_dir = "report";
    std::vector<std::string> e_ks;
    std::size_t e_cap = 5000;
    bool e_force = false;
    std::size_t e_min = 30, e_max = 90;
    ConfigFlags e_flags;
    eval->add_option("--index", e_index, "index file")->required();
    eval->add_option("--store", e_store, "store file")->required();
    eval->add_option("--queries", e_csv, "query CSV")->required();
    eval->add_option("--report-dir", e_dir, "output directory");
    eval->add_option("--ks", e_ks, "k values to grade")->delimiter(',');
    eval->add_option("--truth-cap", e_cap, "refuse exhaustive ground truth beyond this N");
    eval->add_flag("--force", e_force, "override the ground-truth cap");
    eval->add_option("--query-min-len", e_min, "drop queries shorter than this");
    eval->add_option("--query-max-len", e_max, "drop queries longer than this");
    e_flags.attach(eval, /*alpha_required=*/false);

    // sweep
    auto* sweep = app.add_subcommand("sweep", "parameter sweeps and plot-data emission");
    std::string s_param, s_index, s_store, s_csv, s_dir = "report";
    std::vector<std::string> s_values;
    std::size_t s_min = 30, s_max = 90;
    ConfigFlags s_flags;
    sweep->add_option("--param", s_param, "xi, k, scale or dtsm")->required();
    sweep->add_option("--index", s_index, "index file (k sweep)");
    sweep->add_option("--store", s_store, "store file");
    sweep->add_option("--queries", s_csv, "query CSV");
    sweep->add_option("--values", s_values, "sweep points")->delimiter(',');
    sweep->add_option("--report-dir", s_dir, "output directory");
    sweep->add_option("--query-min-len", s_min, "drop queries shorter than this");
    sweep->add_option("--query-max-len", s_max, "drop queries longer than this");
    s_flags.attach(sweep, /*alpha_required=*/false);

    std::vector<std::string> tokens;
    for (int i = 0; i < argc; ++i) tokens.emplace_back(argv[i]);
    try {
        const std::vector<std::string> extra = config_file_tokens(app, argc, argv);
        tokens.insert(tokens.end(), extra.begin(), extra.end());
        std::vector<char*> raw;
        raw.reserve(tokens.size());
        for (std::string& t : tokens) raw.push_back(t.data());
        app.parse(static_cast<int>(raw.size()), raw.data());
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kExitOk : kExitUsage;
    } catch (const config_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const data_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitData;
    }

    try {
        if (ingest->parsed()) return cmd_ingest(in_csv, out_store, min_len, max_len);
        if (build->parsed()) return cmd_build(b_store, b_out, b_flags);
        if (query->parsed())
            return cmd_query(q_index, q_store, q_csv, q_out, q_min, q_max, q_flags, query);
        if (eval->parsed())
            return cmd_eval(e_index, e_store, e_csv, e_dir, e_ks, e_cap, e_force, e_min, e_max,
                            e_flags, eval);
        if (sweep->parsed())
            return cmd_sweep(s_param, s_index, s_store, s_csv, s_dir, s_values, s_min, s_max,
                             s_flags, sweep);
        return kExitUsage;
    } catch (const config_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const argument_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const data_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitData;
    } catch (const std::exception& e) {
        std::cerr << "internal error: " << e.what() << "\n";
        return kExitInternal;
    }
}
