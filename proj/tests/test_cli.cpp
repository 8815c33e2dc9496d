#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "subtraj/eval.hpp"
#include "subtraj/io.hpp"

using namespace subtraj;
namespace fs = std::filesystem;

namespace {

struct TempDir {
    fs::path path;
    TempDir() {
        path = fs::temp_directory_path() /
               ("subtraj_cli_" + std::to_string(::getpid()) + "_" + std::to_string(counter()++));
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
    static int& counter() {
        static int c = 0;
        return c;
    }
};

int run_cli(const std::string& args, const fs::path& stdout_file = {}) {
    std::string cmd = std::string(SUBTRAJ_CLI_BIN) + " " + args;
    if (!stdout_file.empty()) cmd += " > " + stdout_file.string();
    cmd += " 2>/dev/null";
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string read_file(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

// masks the wall-time column (the one measurement a rerun cannot reproduce)
std::string mask_ms_column(const std::string& csv) {
    std::istringstream in(csv);
    std::ostringstream out;
    std::string line;
    while (std::getline(in, line)) {
        const auto cut = line.rfind(',');
        if (cut != std::string::npos && line.find("rank,") != 0 && line[0] != '#')
            line = line.substr(0, cut) + ",<ms>";
        out << line << '\n';
    }
    return out.str();
}

// small corpus written as CSV fixtures: data around two centers plus queries
// sliced from known hosts
struct CliFixture {
    TempDir dir;
    fs::path data_csv, query_csv, store_file, index_file;

    CliFixture() {
        SynthSpec spec;
        spec.n_data = 24;
        spec.n_queries = 4;
        spec.data_len = {90, 120};
        spec.query_len = {30, 40};
        spec.embed_rate = 1.0;
        spec.noise = 0.002;
        spec.seed = 17;
        const SynthCorpus corpus = synth_corpus(spec);

        data_csv = dir.path / "data.csv";
        query_csv = dir.path / "queries.csv";
        store_file = dir.path / "store.bin";
        index_file = dir.path / "index.bin";
        write_csv_file(corpus.data, data_csv);
        write_csv_file(corpus.queries, query_csv);
    }

    std::string common_build_flags() const {
        return "--alpha 0.05 --grid-m 3 --xi 5 --kappa-spatial 10 --kappa-random 10 --seed 9";
    }

    void ingest_and_build() {
        ASSERT_EQ(run_cli("ingest --input " + data_csv.string() + " --output " +
                          store_file.string() + " --min-len 2 --max-len 500"),
                  0);
        ASSERT_EQ(run_cli("build --store " + store_file.string() + " --output " +
                          index_file.string() + " " + common_build_flags()),
                  0);
    }
};

} // namespace

TEST(CliIngest, HappyPathPrintsStats) {
    CliFixture f;
    const fs::path out = f.dir.path / "ingest.out";
    ASSERT_EQ(run_cli("ingest --input " + f.data_csv.string() + " --output " +
                      f.store_file.string() + " --min-len 2 --max-len 500", out),
              0);
    const std::string text = read_file(out);
    EXPECT_NE(text.find("kept: 24"), std::string::npos);
    EXPECT_NE(text.find("length histogram"), std::string::npos);
    EXPECT_EQ(load_store(f.store_file).size(), 24u);
}

TEST(CliIngest, LengthBoundsDropAndCount) {
    CliFixture f;
    const fs::path out = f.dir.path / "ingest.out";
    // paper-protocol defaults: 90..300; some 90..120 fixtures survive, none dropped
    ASSERT_EQ(run_cli("ingest --input " + f.data_csv.string() + " --output " +
                      f.store_file.string(), out),
              0);
    EXPECT_NE(read_file(out).find("dropped_short: 0"), std::string::npos);

    // tighten max-len so everything drops, still exit 0
    ASSERT_EQ(run_cli("ingest --input " + f.data_csv.string() + " --output " +
                      f.store_file.string() + " --max-len 89", out),
              0);
    EXPECT_NE(read_file(out).find("kept: 0"), std::string::npos);
}

TEST(CliIngest, MalformedCsvExitsWithDataError) {
    TempDir dir;
    const fs::path bad = dir.path / "bad.csv";
    std::ofstream(bad) << "a,1,0,0\na,2,oops,1\n";
    EXPECT_EQ(run_cli("ingest --input " + bad.string() + " --output " +
                      (dir.path / "s.bin").string()),
              2);
}

TEST(CliIngest, MissingArgsIsUsageError) {
    EXPECT_EQ(run_cli("ingest --input nope.csv"), 1);
    EXPECT_EQ(run_cli("frobnicate"), 1);
}

TEST(CliBuild, RebuildIsByteIdentical) {
    CliFixture f;
    f.ingest_and_build();
    const std::string first = read_file(f.index_file);
    ASSERT_EQ(run_cli("build --store " + f.store_file.string() + " --output " +
                      f.index_file.string() + " " + f.common_build_flags()),
              0);
    EXPECT_EQ(read_file(f.index_file), first);

    // different seed changes the file
    ASSERT_EQ(run_cli("build --store " + f.store_file.string() + " --output " +
                      f.index_file.string() +
                      " --alpha 0.05 --grid-m 3 --xi 5 --kappa-spatial 10 --kappa-random 10 "
                      "--seed 10"),
              0);
    EXPECT_NE(read_file(f.index_file), first);
}

TEST(CliBuild, XiLargerThanStoreClampsWithWarning) {
    CliFixture f;
    ASSERT_EQ(run_cli("ingest --input " + f.data_csv.string() + " --output " +
                      f.store_file.string() + " --min-len 2 --max-len 500"),
              0);
    const fs::path err = f.dir.path / "stderr.txt";
    const std::string cmd = std::string(SUBTRAJ_CLI_BIN) + " build --store " +
                            f.store_file.string() + " --output " + f.index_file.string() +
                            " --alpha 0.05 --xi 99 2> " + err.string();
    ASSERT_EQ(WEXITSTATUS(std::system(cmd.c_str())), 0);
    EXPECT_NE(read_file(err).find("clamped"), std::string::npos);
    const IndexBundle bundle = load_index(f.index_file);
    for (const auto& edges : bundle.cndi.adj) EXPECT_EQ(edges.size(), 23u);
}

TEST(CliQuery, EmitsRankedRowsAndHonorsK) {
    CliFixture f;
    f.ingest_and_build();
    const fs::path out = f.dir.path / "results.csv";
    ASSERT_EQ(run_cli("query --index " + f.index_file.string() + " --store " +
                      f.store_file.string() + " --queries " + f.query_csv.string() +
                      " --k 1 --query-min-len 2 --query-max-len 500 --out " + out.string()),
              0);
    const std::string text = read_file(out);
    EXPECT_NE(text.find("rank,traj_id,start,end,score,visited,hops,ms"), std::string::npos);
    // k = 1: exactly one ranked row per query
    std::istringstream in(text);
    std::string line;
    int rank_rows = 0, query_marks = 0;
    while (std::getline(in, line)) {
        if (line.rfind("1,", 0) == 0) ++rank_rows;
        if (line.rfind("# query", 0) == 0) ++query_marks;
    }
    EXPECT_EQ(query_marks, 4);
    EXPECT_EQ(rank_rows, 4);
}

TEST(CliQuery, DeterministicModuloWallTimes) {
    CliFixture f;
    f.ingest_and_build();
    const fs::path a = f.dir.path / "a.csv", b = f.dir.path / "b.csv";
    const std::string args = "query --index " + f.index_file.string() + " --store " +
                             f.store_file.string() + " --queries " + f.query_csv.string() +
                             " --k 3 --seed 5 --query-min-len 2 --query-max-len 500 --out ";
    ASSERT_EQ(run_cli(args + a.string()), 0);
    ASSERT_EQ(run_cli(args + b.string()), 0);
    EXPECT_EQ(mask_ms_column(read_file(a)), mask_ms_column(read_file(b)));
}

TEST(CliQuery, MismatchedStoreIsDataError) {
    CliFixture f;
    f.ingest_and_build();
    // rebuild the store with one trajectory dropped: digest changes
    ASSERT_EQ(run_cli("ingest --input " + f.data_csv.string() + " --output " +
                      f.store_file.string() + " --min-len 91 --max-len 500"),
              0);
    EXPECT_EQ(run_cli("query --index " + f.index_file.string() + " --store " +
                      f.store_file.string() + " --queries " + f.query_csv.string() +
                      " --query-min-len 2 --query-max-len 500"),
              2);
}

TEST(CliEval, WritesMetricsAndAggregates) {
    CliFixture f;
    f.ingest_and_build();
    const fs::path report = f.dir.path / "report";
    ASSERT_EQ(run_cli("eval --index " + f.index_file.string() + " --store " +
                      f.store_file.string() + " --queries " + f.query_csv.string() +
                      " --report-dir " + report.string() +
                      " --ks 5,10 --query-min-len 2 --query-max-len 500"),
              0);
    const std::string csv = read_file(report / "metrics.csv");
    EXPECT_NE(csv.find("query_id,method,k,hr,rr,r10_50,time_ms"), std::string::npos);
    EXPECT_NE(csv.find(",graph,5,"), std::string::npos);
    EXPECT_NE(csv.find(",exhaustive,10,"), std::string::npos);
    EXPECT_NE(csv.find("mean,graph,"), std::string::npos);
}

TEST(CliEval, TruthCapGuardsWithoutForce) {
    CliFixture f;
    f.ingest_and_build();
    const std::string args = "eval --index " + f.index_file.string() + " --store " +
                             f.store_file.string() + " --queries " + f.query_csv.string() +
                             " --report-dir " + (f.dir.path / "r2").string() +
                             " --truth-cap 5 --query-min-len 2 --query-max-len 500";
    EXPECT_EQ(run_cli(args), 1);
    EXPECT_EQ(run_cli(args + " --force"), 0);
}

TEST(CliSweep, DtsmTimingNeedsNoStore) {
    TempDir dir;
    const fs::path report = dir.path / "report";
    ASSERT_EQ(run_cli("sweep --param dtsm --alpha 0.05 --values 20,40 --report-dir " +
                      report.string()),
              0);
    const std::string dat = read_file(report / "fig_dtsm_time.dat");
    EXPECT_NE(dat.find("# dtsm_10pairs_ms"), std::string::npos);
}

TEST(CliSweep, NeighborSweepWritesFigureData) {
    CliFixture f;
    f.ingest_and_build();
    const fs::path report = f.dir.path / "report";
    ASSERT_EQ(run_cli("sweep --param xi --values 2,4 --store " + f.store_file.string() +
                      " --queries " + f.query_csv.string() + " --alpha 0.05 --grid-m 3" +
                      " --kappa-spatial 10 --kappa-random 10 --seed 9 --report-dir " +
                      report.string() + " --query-min-len 2 --query-max-len 500"),
              0);
    const std::string dat = read_file(report / "fig_neighbors.dat");
    EXPECT_NE(dat.find("# hr10_by_xi"), std::string::npos);
    EXPECT_NE(dat.find("# query_ms_by_xi"), std::string::npos);
}

TEST(CliConfigFile, FileValuesAppliedAndFlagsOverride) {
    CliFixture f;
    ASSERT_EQ(run_cli("ingest --input " + f.data_csv.string() + " --output " +
                      f.store_file.string() + " --min-len 2 --max-len 500"),
              0);
    const fs::path conf = f.dir.path / "run.conf";
    std::ofstream(conf) << "alpha=0.05\ngrid-m=3\nxi=5\nkappa-spatial=10\nkappa-random=10\n"
                        << "seed=9\n";
    const fs::path via_file = f.dir.path / "via_file.bin";
    ASSERT_EQ(run_cli("build --store " + f.store_file.string() + " --output " +
                      via_file.string() + " --config " + conf.string()),
              0);
    f.ingest_and_build(); // same values via flags
    EXPECT_EQ(read_file(via_file), read_file(f.index_file));

    // flag overrides the file value: different seed, different bytes
    const fs::path overridden = f.dir.path / "override.bin";
    ASSERT_EQ(run_cli("build --store " + f.store_file.string() + " --output " +
                      overridden.string() + " --config " + conf.string() + " --seed 10"),
              0);
    EXPECT_NE(read_file(overridden), read_file(via_file));

    // unknown keys rejected
    std::ofstream(conf, std::ios::app) << "bogus-key=1\n";
    EXPECT_EQ(run_cli("build --store " + f.store_file.string() + " --output " +
                      (f.dir.path / "x.bin").string() + " --config " + conf.string()),
              1);
}
