#pragma once

#include <cstdint>
#include <vector>

#include "diffrec/diffusion.hpp"
#include "diffrec/metrics.hpp"

namespace diffrec {

struct EvalOptions {
    int L = 50;
    int k_cold = 10;
    int workers = 0;
    // exact pair loop for D_inter up to this many pairs, sampled beyond
    std::size_t inter_exact_pair_limit = 4'000'000;
    std::size_t inter_sample_pairs = 1'000'000;
    std::uint64_t sample_seed = 12345;
};

struct EvalResult {
    EvaluationReport report;
    std::vector<RecommendationList> lists;  // kept for figure emission
};

// Exact pair loop when affordable, seeded sampling beyond the limit.
inline double inter_diversity_auto(const std::vector<RecommendationList>& lists, int L,
                                   const EvalOptions& opt) {
    std::size_t nonempty = 0;
    for (const auto& l : lists)
        if (!l.items.empty()) ++nonempty;
    if (nonempty < 2) throw std::invalid_argument("inter_diversity: need >= 2 users with lists");
    const std::size_t pairs = nonempty * (nonempty - 1) / 2;
    return pairs <= opt.inter_exact_pair_limit
               ? inter_diversity(lists, L, opt.workers)
               : inter_diversity_sampled(lists, L, opt.inter_sample_pairs, opt.sample_seed,
                                         opt.workers);
}

// Scores every user once and derives all report quantities from that single
// pass: probe midranks for r/r_k, top-L lists for P/P_k and both
// diversities. Per-user values land in preallocated slots, so the numbers do
// not depend on the worker count.
inline EvalResult evaluate(const BipartiteGraph& train, const std::vector<Link>& probe,
                           const AlgorithmSpec& spec, const EvalOptions& opt) {
    const int m = train.num_users();
    const int n = train.num_items();

    std::vector<std::vector<std::pair<int, std::size_t>>> probe_by_user(m);
    for (std::size_t i = 0; i < probe.size(); ++i)
        probe_by_user[probe[i].user].push_back({probe[i].item, i});

    const Scorer scorer(train, spec);
    const int nt = resolve_workers(opt.workers);
    std::vector<Scorer::Workspace> ws(nt);
    std::vector<ResourceVector> fbuf(nt);
    for (auto& w : ws) w = scorer.make_workspace();

    std::vector<RecommendationList> lists(m);
    std::vector<double> r_values(probe.size(), 0.0);
    std::vector<int> r_degrees(probe.size(), 0);
    std::vector<char> r_skipped(probe.size(), 0);

    parallel_for(static_cast<std::size_t>(m), opt.workers, [&](std::size_t ui, int tid) {
        const int user = static_cast<int>(ui);
        lists[ui].user = user;
        const auto& collected = train.items_of_user(user);
        const bool has_probe = !probe_by_user[ui].empty();
        if (collected.empty() && !has_probe) return;

        scorer.score_into(user, fbuf[tid], ws[tid]);
        const int eligible = n - train.user_degree(user);
        for (const auto& [item, idx] : probe_by_user[ui]) {
            if (eligible <= 0) {
                r_skipped[idx] = 1;
                continue;
            }
            r_values[idx] = midrank_position(fbuf[tid], collected, item) / eligible;
            r_degrees[idx] = train.item_degree(item);
        }
        if (!collected.empty()) lists[ui] = top_l(fbuf[tid], collected, opt.L, user);
    });

    EvalResult out;
    out.lists = std::move(lists);
    EvaluationReport& rep = out.report;
    rep.algorithm = spec.name();
    rep.L = opt.L;
    rep.k_cold = opt.k_cold;

    const RankingScore rs = detail::reduce_ranking(r_values, r_degrees, r_skipped, opt.k_cold);
    rep.r = rs.r;
    rep.r_k = rs.by_degree;
    rep.r_k_count = rs.by_degree_count;
    rep.r_cold = rs.cold;
    rep.probe_links = rs.used;
    rep.probe_skipped = rs.skipped;

    const PrecisionScore ps = precision(probe, out.lists, train, opt.L, opt.k_cold);
    rep.P = ps.P;
    rep.P_k = ps.by_degree;
    rep.P_cold = ps.cold;

    std::size_t nonempty = 0;
    for (const auto& l : out.lists)
        if (!l.items.empty()) ++nonempty;
    if (nonempty >= 2) rep.D_inter = inter_diversity_auto(out.lists, opt.L, opt);
    if (opt.L >= 2) rep.D_inner = inner_diversity(out.lists, train, opt.L, opt.workers);
    return out;
}

// Mean ranking score only; the cheap pass used by lambda/gamma grid searches.
inline double mean_ranking_score(const BipartiteGraph& train, const std::vector<Link>& probe,
                                 const AlgorithmSpec& spec, int workers = 0) {
    const int m = train.num_users();
    const int n = train.num_items();
    std::vector<std::vector<std::pair<int, std::size_t>>> probe_by_user(m);
    for (std::size_t i = 0; i < probe.size(); ++i)
        probe_by_user[probe[i].user].push_back({probe[i].item, i});

    const Scorer scorer(train, spec);
    const int nt = resolve_workers(workers);
    std::vector<Scorer::Workspace> ws(nt);
    std::vector<ResourceVector> fbuf(nt);
    for (auto& w : ws) w = scorer.make_workspace();

    std::vector<double> r_values(probe.size(), 0.0);
    std::vector<char> skipped(probe.size(), 0);
    parallel_for(static_cast<std::size_t>(m), workers, [&](std::size_t ui, int tid) {
        if (probe_by_user[ui].empty()) return;
        const int user = static_cast<int>(ui);
        const int eligible = n - train.user_degree(user);
        if (eligible <= 0) {
            for (const auto& [item, idx] : probe_by_user[ui]) skipped[idx] = 1;
            return;
        }
        scorer.score_into(user, fbuf[tid], ws[tid]);
        for (const auto& [item, idx] : probe_by_user[ui])
            r_values[idx] = midrank_position(fbuf[tid], train.items_of_user(user), item) / eligible;
    });
    double total = 0.0;
    std::size_t used = 0;
    for (std::size_t i = 0; i < probe.size(); ++i) {
        if (skipped[i]) continue;
        total += r_values[i];
        ++used;
    }
    if (used == 0) throw std::runtime_error("mean_ranking_score: every probe link was skipped");
    return total / static_cast<double>(used);
}

}  // namespace diffrec
