#include "subtraj/index.hpp"

#include <algorithm>
#include <chrono>
#include <fstream>
#include <sstream>

#include "subtraj/detail/binio.hpp"
#include "subtraj/dtsm.hpp"
#include "subtraj/io.hpp"
#include "subtraj/parallel.hpp"
#include "subtraj/rng.hpp"

namespace subtraj {

namespace {

constexpr std::string_view kIndexMagic = "SBTRIDX1";
constexpr std::uint32_t kIndexVersion = 1;

double ms_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0)
        .count();
}

// (phi desc, id asc) ordering used for every similarity ranking
struct PhiOrder {
    const TrajectoryStore& store;
    bool operator()(const std::pair<int, std::uint32_t>& a,
                    const std::pair<int, std::uint32_t>& b) const {
        if (a.first != b.first) return a.first > b.first;
        return store.id_of(a.second) < store.id_of(b.second);
    }
};

} // namespace

GariGraph build_gari(const TrajectoryStore& store, const Config& cfg, unsigned threads) {
    if (store.empty()) throw argument_error("build_gari: empty store");
    cfg.validate();

    const Grid grid(dataset_bounds(store), cfg.grid_m);
    const RTree rtree = build_rtree(store);

    GariGraph g;
    for (std::uint32_t i = 0; i < grid.m; ++i)
        for (std::uint32_t j = 0; j < grid.m; ++j)
            if (auto rep = cell_representative(grid, rtree, store, i, j)) g.nodes.push_back(*rep);

    const std::size_t n = g.nodes.size();
    g.adj.resize(n);
    if (n <= 1) return g;

    // all-pairs trajectory similarity among representatives
    std::vector<int> phi(n * n, 0);
    parallel_for(n, threads, [&](std::size_t a) {
        for (std::size_t b = 0; b < n; ++b) {
            if (a == b) continue;
            phi[a * n + b] =
                dtsm_score(store.at(g.nodes[a]).span(), store.at(g.nodes[b]).span(), cfg.alpha);
        }
    });

    parallel_for(n, threads, [&](std::size_t a) {
        std::vector<std::pair<int, std::uint32_t>> order; // (phi, slot)
        order.reserve(n - 1);
        for (std::size_t b = 0; b < n; ++b)
            if (b != a) order.emplace_back(phi[a * n + b], g.nodes[b]);
        std::sort(order.begin(), order.end(), PhiOrder{store});

        const std::size_t cnt = order.size();
        std::vector<char> taken(cnt, 0);

        // top picks by similarity
        const std::size_t n_sim = std::min<std::size_t>(cfg.gari_neighbors.similar, cnt);
        for (std::size_t i = 0; i < n_sim; ++i) taken[i] = 1;

        // least similar picks, skipping anything already taken
        std::size_t n_dis = std::min<std::size_t>(cfg.gari_neighbors.dissimilar, cnt);
        std::vector<std::size_t> dis_idx;
        for (std::size_t i = cnt; i-- > 0 && dis_idx.size() < n_dis;)
            if (!taken[i]) {
                taken[i] = 1;
                dis_idx.push_back(i);
            }

        // random picks from the middle tertile of the similarity order
        const std::size_t base = cnt / 3, rem = cnt % 3;
        const std::size_t size_a = base + (rem >= 1 ? 1 : 0);
        const std::size_t size_b = base + (rem >= 2 ? 1 : 0);
        std::vector<std::size_t> mid_pool;
        for (std::size_t i = size_a; i < size_a + size_b; ++i)
            if (!taken[i]) mid_pool.push_back(i);
        Rng rng(derive_seed(cfg.seed, "gari-random", stable_hash(store.id_of(g.nodes[a]))));
        std::vector<std::size_t> rand_idx =
            rng.sample(mid_pool, std::min<std::size_t>(cfg.gari_neighbors.random, mid_pool.size()));
        for (std::size_t i : rand_idx) taken[i] = 1;

        auto emit = [&](std::vector<std::size_t> idx, EdgeTag tag) {
            std::sort(idx.begin(), idx.end()); // restore (phi desc, id asc) block order
            auto& out = g.adj[a][static_cast<std::size_t>(tag)];
            for (std::size_t i : idx) out.push_back(order[i].second);
        };
        std::vector<std::size_t> sim_idx(n_sim);
        for (std::size_t i = 0; i < n_sim; ++i) sim_idx[i] = i;
        emit(std::move(sim_idx), EdgeTag::similar);
        emit(std::move(rand_idx), EdgeTag::random);
        emit(std::move(dis_idx), EdgeTag::dissimilar);
    });
    return g;
}

CndiGraph build_cndi(const TrajectoryStore& store, const RTree& rtree, const Config& cfg,
                     unsigned threads) {
    if (store.size() < 2) throw argument_error("build_cndi: need at least 2 trajectories");
    cfg.validate();

    const std::size_t n = store.size();
    std::vector<Mbr> mbrs(n);
    for (std::uint32_t s = 0; s < n; ++s) mbrs[s] = compute_mbr(store.at(s).span());

    CndiGraph g;
    g.adj.resize(n);

    parallel_for(n, threads, [&](std::size_t i) {
        const auto slot_i = static_cast<std::uint32_t>(i);
        const std::vector<std::uint32_t> near =
            nearest_k(rtree, mbrs[i], cfg.candidates.spatial, slot_i);

        std::vector<char> in_near(n, 0);
        for (std::uint32_t s : near) in_near[s] = 1;
        std::vector<std::uint32_t> pool;
        pool.reserve(n - 1 - near.size());
        for (std::uint32_t s = 0; s < n; ++s)
            if (s != slot_i && !in_near[s]) pool.push_back(s);

        Rng rng(derive_seed(cfg.seed, "cndi-random", stable_hash(store.id_of(slot_i))));
        const std::vector<std::uint32_t> rand_cands =
            rng.sample(pool, std::min<std::size_t>(cfg.candidates.random, pool.size()));

        auto score_all = [&](const std::vector<std::uint32_t>& cands) {
            std::vector<std::pair<int, std::uint32_t>> ranked;
            ranked.reserve(cands.size());
            for (std::uint32_t c : cands)
                ranked.emplace_back(
                    dtsm_score(store.at(slot_i).span(), store.at(c).span(), cfg.alpha), c);
            std::sort(ranked.begin(), ranked.end(), PhiOrder{store});
            return ranked;
        };
        const auto near_ranked = score_all(near);
        const auto rand_ranked = score_all(rand_cands);

        const std::size_t total = std::min<std::size_t>(cfg.xi, n - 1);
        const std::size_t sim_quota = cfg.cndi_similar_count();

        std::vector<CndiGraph::Edge> edges;
        std::size_t near_used = 0, rand_used = 0;
        const std::size_t s_count = std::min({sim_quota, near_ranked.size(), total});
        for (; near_used < s_count; ++near_used)
            edges.push_back({near_ranked[near_used].second, EdgeTag::similar});
        const std::size_t r_count =
            std::min(total - edges.size(), rand_ranked.size());
        for (; rand_used < r_count; ++rand_used)
            edges.push_back({rand_ranked[rand_used].second, EdgeTag::random});

        // backfill when either pool ran short: next-best spatial candidates
        // first, then remaining random candidates, then anything left
        while (edges.size() < total && near_used < near_ranked.size())
            edges.push_back({near_ranked[near_used++].second, EdgeTag::similar});
        while (edges.size() < total && rand_used < rand_ranked.size())
            edges.push_back({rand_ranked[rand_used++].second, EdgeTag::random});
        if (edges.size() < total) {
            std::vector<char> chosen(n, 0);
            chosen[slot_i] = 1;
            for (const auto& e : edges) chosen[e.slot] = 1;
            std::vector<std::uint32_t> rest;
            for (std::uint32_t s = 0; s < n; ++s)
                if (!chosen[s]) rest.push_back(s);
            std::sort(rest.begin(), rest.end(), [&](std::uint32_t a, std::uint32_t b) {
                return store.id_of(a) < store.id_of(b);
            });
            for (std::uint32_t s : rest) {
                if (edges.size() >= total) break;
                edges.push_back({s, EdgeTag::random});
            }
        }
        g.adj[i] = std::move(edges);
    });
    return g;
}

IndexBundle build_index(const TrajectoryStore& store, const Config& cfg, unsigned threads,
                        BuildTimings* timings) {
    if (store.size() < 2) throw argument_error("build_index: need at least 2 trajectories");
    cfg.validate();

    auto t0 = std::chrono::steady_clock::now();
    IndexBundle bundle;
    bundle.format_version = kIndexVersion;
    bundle.config = cfg;
    bundle.grid = Grid(dataset_bounds(store), cfg.grid_m);
    const RTree rtree = build_rtree(store);
    if (timings) timings->grid_ms = ms_since(t0);

    t0 = std::chrono::steady_clock::now();
    bundle.gari = build_gari(store, cfg, threads);
    if (timings) timings->gari_ms = ms_since(t0);

    t0 = std::chrono::steady_clock::now();
    bundle.cndi = build_cndi(store, rtree, cfg, threads);
    if (timings) timings->cndi_ms = ms_since(t0);

    bundle.store_digest = store_fingerprint(store);
    return bundle;
}

std::string encode_index(const IndexBundle& bundle) {
    detail::ByteWriter w;
    w.raw(kIndexMagic);
    w.u32(bundle.format_version);

    const Config& c = bundle.config;
    w.f64(c.alpha);
    w.u32(c.grid_m);
    w.u32(c.xi);
    w.f64(c.delta);
    w.u32(c.gari_neighbors.similar);
    w.u32(c.gari_neighbors.random);
    w.u32(c.gari_neighbors.dissimilar);
    w.u32(c.candidates.spatial);
    w.u32(c.candidates.random);
    w.u32(c.k);
    w.u8(static_cast<std::uint8_t>(c.metric.kind));
    w.f64(c.metric.eps);
    w.f64(c.metric.gap.lon);
    w.f64(c.metric.gap.lat);
    w.str(c.scorer);
    w.u64(c.seed);
    w.u8(static_cast<std::uint8_t>(c.sim_transform));
    w.u32(c.min_candidates);
    w.u8(c.ablate.no_gari ? 1 : 0);
    w.u8(c.ablate.no_random ? 1 : 0);
    w.u8(c.ablate.no_record ? 1 : 0);

    w.f64(bundle.grid.bounds.x_min);
    w.f64(bundle.grid.bounds.y_min);
    w.f64(bundle.grid.bounds.x_max);
    w.f64(bundle.grid.bounds.y_max);
    w.u32(bundle.grid.m);

    w.u32(static_cast<std::uint32_t>(bundle.gari.nodes.size()));
    for (std::uint32_t s : bundle.gari.nodes) w.u32(s);
    for (const auto& parts : bundle.gari.adj) {
        for (const auto& part : parts) {
            w.u32(static_cast<std::uint32_t>(part.size()));
            for (std::uint32_t s : part) w.u32(s);
        }
    }

    w.u32(static_cast<std::uint32_t>(bundle.cndi.adj.size()));
    for (const auto& edges : bundle.cndi.adj) {
        w.u32(static_cast<std::uint32_t>(edges.size()));
        for (const auto& e : edges) {
            w.u32(e.slot);
            w.u8(static_cast<std::uint8_t>(e.tag));
        }
    }

    w.u64(bundle.store_digest);
    detail::ByteWriter out;
    out.raw(w.bytes());
    out.u64(detail::fnv1a_bytes(w.bytes()));
    return out.bytes();
}

IndexBundle decode_index(std::string_view bytes) {
    if (bytes.size() < kIndexMagic.size() + 12) throw truncation_error("index file too small");
    if (bytes.substr(0, kIndexMagic.size()) != kIndexMagic)
        throw data_error("not an index file");
    const std::uint64_t declared =
        detail::ByteReader(bytes.substr(bytes.size() - 8)).u64();
    if (detail::fnv1a_bytes(bytes.substr(0, bytes.size() - 8)) != declared)
        throw checksum_error("index checksum mismatch");

    detail::ByteReader r(bytes.substr(0, bytes.size() - 8));
    r.take(kIndexMagic.size());
    IndexBundle b;
    b.format_version = r.u32();
    if (b.format_version != kIndexVersion)
        throw version_error("unsupported index version " + std::to_string(b.format_version));

    Config& c = b.config;
    c.alpha = r.f64();
    c.grid_m = r.u32();
    c.xi = r.u32();
    c.delta = r.f64();
    c.gari_neighbors.similar = r.u32();
    c.gari_neighbors.random = r.u32();
    c.gari_neighbors.dissimilar = r.u32();
    c.candidates.spatial = r.u32();
    c.candidates.random = r.u32();
    c.k = r.u32();
    c.metric.kind = static_cast<MetricKind>(r.u8());
    c.metric.eps = r.f64();
    c.metric.gap.lon = r.f64();
    c.metric.gap.lat = r.f64();
    c.scorer = r.str();
    c.seed = r.u64();
    c.sim_transform = static_cast<SimTransformKind>(r.u8());
    c.min_candidates = r.u32();
    c.ablate.no_gari = r.u8() != 0;
    c.ablate.no_random = r.u8() != 0;
    c.ablate.no_record = r.u8() != 0;

    Mbr bounds;
    bounds.x_min = r.f64();
    bounds.y_min = r.f64();
    bounds.x_max = r.f64();
    bounds.y_max = r.f64();
    b.grid = Grid(bounds, r.u32());

    const std::uint32_t gn = r.u32();
    b.gari.nodes.resize(gn);
    for (auto& s : b.gari.nodes) s = r.u32();
    b.gari.adj.resize(gn);
    for (auto& parts : b.gari.adj) {
        for (auto& part : parts) {
            part.resize(r.u32());
            for (auto& s : part) s = r.u32();
        }
    }

    const std::uint32_t cn = r.u32();
    b.cndi.adj.resize(cn);
    for (auto& edges : b.cndi.adj) {
        edges.resize(r.u32());
        for (auto& e : edges) {
            e.slot = r.u32();
            e.tag = static_cast<EdgeTag>(r.u8());
        }
    }

    b.store_digest = r.u64();
    return b;
}

void save_index(const IndexBundle& bundle, const std::filesystem::path& path) {
    const std::string bytes = encode_index(bundle);
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw data_error("cannot write '" + path.string() + "'");
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
}

IndexBundle load_index(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw data_error("cannot open '" + path.string() + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    const std::string data = ss.str();
    return decode_index(data);
}

} // namespace subtraj
