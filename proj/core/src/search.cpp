#include "subtraj/search.hpp"

#include <algorithm>
#include <chrono>
#include <deque>
#include <memory>
#include <unordered_set>

#include "subtraj/parallel.hpp"
#include "subtraj/rng.hpp"

namespace subtraj {

namespace {

double ms_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0)
        .count();
}

const RepScore& score_node(std::uint32_t slot, PointSpan query, const TrajectoryStore& store,
                           const Config& cfg, SearchRecord& record) {
    auto it = record.visited.find(slot);
    if (it != record.visited.end()) return it->second;
    return record.visited.emplace(slot, rep_similarity(query, store.at(slot), cfg))
        .first->second;
}

// scores any unseen slots in the batch, parallelizing the metric work while
// keeping the record update deterministic
void score_batch(const std::vector<std::uint32_t>& slots, PointSpan query,
                 const TrajectoryStore& store, const Config& cfg, SearchRecord& record,
                 unsigned threads) {
    std::vector<std::uint32_t> fresh;
    for (std::uint32_t s : slots)
        if (record.visited.find(s) == record.visited.end()) fresh.push_back(s);
    std::sort(fresh.begin(), fresh.end());
    fresh.erase(std::unique(fresh.begin(), fresh.end()), fresh.end());
    if (fresh.empty()) return;
    std::vector<RepScore> scores(fresh.size());
    parallel_for(fresh.size(), threads, [&](std::size_t i) {
        scores[i] = rep_similarity(query, store.at(fresh[i]), cfg);
    });
    for (std::size_t i = 0; i < fresh.size(); ++i) record.visited.emplace(fresh[i], scores[i]);
}

// (score desc, id asc) argmax over a slot list; all slots must be recorded
std::uint32_t best_of(const std::vector<std::uint32_t>& slots, const TrajectoryStore& store,
                      const SearchRecord& record) {
    std::uint32_t best = slots.front();
    double best_score = record.visited.at(best).score;
    for (std::uint32_t s : slots) {
        const double sc = record.visited.at(s).score;
        if (sc > best_score ||
            (sc == best_score && store.id_of(s) < store.id_of(best))) {
            best = s;
            best_score = sc;
        }
    }
    return best;
}

} // namespace

std::uint32_t climb(const NeighborFn& neighbors, std::uint32_t start, PointSpan query,
                    const TrajectoryStore& store, const Config& cfg, SearchRecord& record,
                    unsigned threads, std::uint32_t* hops_out) {
    if (start >= store.size()) throw argument_error("climb: start not in graph");
    std::uint32_t cur = start;
    double cur_score = score_node(cur, query, store, cfg, record).score;
    std::uint32_t hops = 0;
    for (;;) {
        const std::vector<std::uint32_t> nbrs = neighbors(cur);
        if (nbrs.empty()) break;
        score_batch(nbrs, query, store, cfg, record, threads);
        const std::uint32_t cand = best_of(nbrs, store, record);
        const double cand_score = record.visited.at(cand).score;
        if (cand_score <= cur_score) break; // plateaus do not move
        cur = cand;
        cur_score = cand_score;
        ++hops;
    }
    if (hops_out) *hops_out += hops;
    return cur;
}

namespace {

NeighborFn gari_neighbors(const IndexBundle& index) {
    // map store slot -> gari node index once; upper-graph nodes are few
    auto lookup = std::make_shared<std::unordered_map<std::uint32_t, std::size_t>>();
    for (std::size_t i = 0; i < index.gari.nodes.size(); ++i)
        lookup->emplace(index.gari.nodes[i], i);
    const GariGraph* g = &index.gari;
    return [lookup, g](std::uint32_t slot) -> std::vector<std::uint32_t> {
        auto it = lookup->find(slot);
        if (it == lookup->end()) throw argument_error("climb: start not in graph");
        return g->all_neighbors(it->second);
    };
}

NeighborFn cndi_neighbors(const IndexBundle& index) {
    const CndiGraph* g = &index.cndi;
    return [g](std::uint32_t slot) -> std::vector<std::uint32_t> {
        if (slot >= g->adj.size()) throw argument_error("climb: start not in graph");
        std::vector<std::uint32_t> out;
        out.reserve(g->adj[slot].size());
        for (const auto& e : g->adj[slot]) out.push_back(e.slot);
        return out;
    };
}

} // namespace

std::vector<std::pair<std::uint32_t, RepScore>> ranked_entries(
    const SearchRecord& record, const TrajectoryStore& store) {
    std::vector<std::pair<std::uint32_t, RepScore>> out(record.visited.begin(),
                                                        record.visited.end());
    std::sort(out.begin(), out.end(), [&](const auto& a, const auto& b) {
        if (a.second.score != b.second.score) return a.second.score > b.second.score;
        return store.id_of(a.first) < store.id_of(b.first);
    });
    return out;
}

QueryResult query_topk(PointSpan query, const IndexBundle& index, const TrajectoryStore& store,
                       const Config& cfg, std::uint64_t query_salt, unsigned threads) {
    if (query.empty()) throw argument_error("query_topk: empty query");
    if (cfg.k > store.size()) throw argument_error("query_topk: k exceeds store size");
    if (index.cndi.adj.empty() || (!cfg.ablate.no_gari && index.gari.nodes.empty()))
        throw state_error("query_topk: empty index");
    if (index.cndi.adj.size() != store.size())
        throw state_error("query_topk: index does not match store");

    const auto t_start = std::chrono::steady_clock::now();
    QueryResult result;
    SearchRecord& record = result.record;
    Rng rng(derive_seed(cfg.seed, "query-entry", query_salt));

    // stage 1: upper-graph climb to a globally promising representative
    std::uint32_t cndi_entry;
    auto t0 = std::chrono::steady_clock::now();
    if (cfg.ablate.no_gari) {
        cndi_entry = static_cast<std::uint32_t>(rng.below(store.size()));
    } else {
        const auto entry =
            index.gari.nodes[rng.below(index.gari.nodes.size())];
        cndi_entry = climb(gari_neighbors(index), entry, query, store, cfg, record, threads,
                           &record.hops_gari);
    }
    record.gari_ms = ms_since(t0);

    // stage 2: lower-graph climb to the local best
    t0 = std::chrono::steady_clock::now();
    const std::uint32_t final_node = climb(cndi_neighbors(index), cndi_entry, query, store, cfg,
                                           record, threads, &record.hops_cndi);
    // stage 3: the final node's neighborhood always enters the record
    std::vector<std::uint32_t> final_nbrs;
    for (const auto& e : index.cndi.adj[final_node]) final_nbrs.push_back(e.slot);
    score_batch(final_nbrs, query, store, cfg, record, threads);
    record.cndi_ms = ms_since(t0);

    // stage 4: breadth-first top-up so the record can feed a meaningful
    // top-k even when the climbs were short
    t0 = std::chrono::steady_clock::now();
    if (!cfg.ablate.no_record) {
        const std::size_t floor =
            std::max<std::size_t>(cfg.k, cfg.effective_min_candidates());
        std::deque<std::uint32_t> frontier{final_node};
        std::unordered_set<std::uint32_t> enqueued{final_node};
        while (!frontier.empty() && record.visited.size() < floor) {
            const std::uint32_t u = frontier.front();
            frontier.pop_front();
            std::vector<std::uint32_t> batch;
            for (const auto& e : index.cndi.adj[u]) {
                if (enqueued.insert(e.slot).second) {
                    batch.push_back(e.slot);
                    frontier.push_back(e.slot);
                }
            }
            if (record.visited.size() + batch.size() > floor)
                batch.resize(floor - record.visited.size());
            score_batch(batch, query, store, cfg, record, threads);
        }
    }
    record.topup_ms = ms_since(t0);

    // selection: full record, or only the final neighborhood when record
    // tracking is ablated
    std::vector<std::pair<std::uint32_t, RepScore>> candidates;
    if (cfg.ablate.no_record) {
        candidates.emplace_back(final_node, record.visited.at(final_node));
        for (const auto& e : index.cndi.adj[final_node])
            candidates.emplace_back(e.slot, record.visited.at(e.slot));
        std::sort(candidates.begin(), candidates.end(), [&](const auto& a, const auto& b) {
            if (a.second.score != b.second.score) return a.second.score > b.second.score;
            return store.id_of(a.first) < store.id_of(b.first);
        });
    } else {
        candidates = ranked_entries(record, store);
    }
    for (const auto& [slot, rep] : candidates) {
        if (result.topk.size() >= cfg.k) break;
        result.topk.push_back(rep.best);
    }
    record.total_ms = ms_since(t_start);
    return result;
}

QueryResult exhaustive_topk(PointSpan query, const TrajectoryStore& store, const Config& cfg,
                            unsigned threads) {
    if (query.empty()) throw argument_error("exhaustive_topk: empty query");
    if (cfg.k > store.size()) throw argument_error("exhaustive_topk: k exceeds store size");
    if (store.empty()) throw state_error("exhaustive_topk: empty store");

    const auto t_start = std::chrono::steady_clock::now();
    QueryResult result;
    std::vector<RepScore> scores(store.size());
    parallel_for(store.size(), threads, [&](std::size_t i) {
        scores[i] = rep_similarity(query, store.at(static_cast<std::uint32_t>(i)), cfg);
    });
    for (std::uint32_t s = 0; s < store.size(); ++s)
        result.record.visited.emplace(s, std::move(scores[s]));

    const auto ranked = ranked_entries(result.record, store);
    for (const auto& [slot, rep] : ranked) {
        if (result.topk.size() >= cfg.k) break;
        result.topk.push_back(rep.best);
    }
    result.record.total_ms = ms_since(t_start);
    return result;
}

} // namespace subtraj
