#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <stdexcept>
#include <unordered_map>
#include <vector>

#include "diffrec/diffusion.hpp"
#include "diffrec/graph.hpp"
#include "diffrec/parallel.hpp"
#include "diffrec/rng.hpp"

namespace diffrec {

// All six evaluation quantities for one algorithm at one list length.
// Degree-conditioned values are keyed by the item's training degree; the
// *_cold aggregates pool degrees <= k_cold. Means over empty pools are NaN.
struct EvaluationReport {
    std::string algorithm;
    int L = 0;
    int k_cold = 10;
    double r = 0.0;
    std::map<int, double> r_k;
    std::map<int, std::size_t> r_k_count;
    double r_cold = std::numeric_limits<double>::quiet_NaN();
    double P = 0.0;
    std::map<int, double> P_k;
    double P_cold = 0.0;
    double D_inter = 0.0;
    double D_inner = 0.0;
    std::size_t probe_links = 0;
    std::size_t probe_skipped = 0;
};

// Midrank of `probe_item` among the user's uncollected items by score:
// count_better + (count_equal + 1) / 2, ties sharing the average position.
// `collected` must be sorted.
inline double midrank_position(const ResourceVector& f, const std::vector<int>& collected,
                               int probe_item) {
    const int n = static_cast<int>(f.size());
    const double fs = f[probe_item];
    std::size_t better = 0, equal = 0, ci = 0;
    for (int it = 0; it < n; ++it) {
        if (ci < collected.size() && collected[ci] == it) {
            ++ci;
            continue;
        }
        const double v = f[it];
        if (v > fs) ++better;
        else if (v == fs) ++equal;
    }
    return static_cast<double>(better) + (static_cast<double>(equal) + 1.0) / 2.0;
}

struct RankingScore {
    double r = std::numeric_limits<double>::quiet_NaN();
    std::map<int, double> by_degree;
    std::map<int, std::size_t> by_degree_count;
    double cold = std::numeric_limits<double>::quiet_NaN();
    std::size_t used = 0;
    std::size_t skipped = 0;
};

namespace detail {

// Aggregates per-link ranking scores kept in probe order, so the result is
// independent of how the per-user work was scheduled.
inline RankingScore reduce_ranking(const std::vector<double>& r_values,
                                   const std::vector<int>& item_degrees,
                                   const std::vector<char>& skipped, int k_cold) {
    RankingScore out;
    double total = 0.0, cold_total = 0.0;
    std::size_t cold_count = 0;
    std::map<int, double> sums;
    for (std::size_t i = 0; i < r_values.size(); ++i) {
        if (skipped[i]) {
            ++out.skipped;
            continue;
        }
        ++out.used;
        total += r_values[i];
        const int k = item_degrees[i];
        sums[k] += r_values[i];
        ++out.by_degree_count[k];
        if (k <= k_cold) {
            cold_total += r_values[i];
            ++cold_count;
        }
    }
    if (out.used > 0) out.r = total / static_cast<double>(out.used);
    for (const auto& [k, s] : sums) out.by_degree[k] = s / static_cast<double>(out.by_degree_count[k]);
    if (cold_count > 0) out.cold = cold_total / static_cast<double>(cold_count);
    return out;
}

}  // namespace detail

// Ranking score: r_link = midrank / (n - k_i), averaged over
// all probe links. Links whose user has nothing uncollected are skipped and
// counted. `scores_by_user` must hold one full vector per user.
inline RankingScore ranking_score(const std::vector<Link>& probe,
                                  const std::vector<ResourceVector>& scores_by_user,
                                  const BipartiteGraph& train, int k_cold = 10) {
    const int n = train.num_items();
    std::vector<double> r_values(probe.size(), 0.0);
    std::vector<int> degrees(probe.size(), 0);
    std::vector<char> skipped(probe.size(), 0);
    for (std::size_t i = 0; i < probe.size(); ++i) {
        const auto [u, it] = probe[i];
        const int eligible = n - train.user_degree(u);
        if (eligible <= 0) {
            skipped[i] = 1;
            continue;
        }
        r_values[i] = midrank_position(scores_by_user[u], train.items_of_user(u), it) / eligible;
        degrees[i] = train.item_degree(it);
    }
    return detail::reduce_ranking(r_values, degrees, skipped, k_cold);
}

struct PrecisionScore {
    double P = 0.0;
    std::map<int, double> by_degree;
    double cold = 0.0;
};

// Precision: hits / (m * L) with m all users, including users
// without probe links.
inline PrecisionScore precision(const std::vector<Link>& probe,
                                const std::vector<RecommendationList>& lists,
                                const BipartiteGraph& train, int L, int k_cold = 10) {
    if (L < 1) throw std::invalid_argument("precision: L must be >= 1");
    const double denom = static_cast<double>(train.num_users()) * L;
    if (denom == 0.0) throw std::invalid_argument("precision: empty user set");
    std::vector<std::vector<int>> sorted_lists(lists.size());
    for (std::size_t u = 0; u < lists.size(); ++u) {
        sorted_lists[u] = lists[u].items;
        std::sort(sorted_lists[u].begin(), sorted_lists[u].end());
    }
    std::size_t hits = 0;
    std::map<int, std::size_t> hits_k;
    for (const auto& [u, it] : probe) {
        const auto& lst = sorted_lists[u];
        if (std::binary_search(lst.begin(), lst.end(), it)) {
            ++hits;
            ++hits_k[train.item_degree(it)];
        }
    }
    PrecisionScore out;
    out.P = static_cast<double>(hits) / denom;
    std::size_t cold_hits = 0;
    for (const auto& [k, h] : hits_k) {
        out.by_degree[k] = static_cast<double>(h) / denom;
        if (k <= k_cold) cold_hits += h;
    }
    out.cold = static_cast<double>(cold_hits) / denom;
    return out;
}

namespace detail {

inline std::size_t sorted_overlap(const std::vector<int>& a, const std::vector<int>& b) {
    std::size_t i = 0, j = 0, c = 0;
    while (i < a.size() && j < b.size()) {
        if (a[i] < b[j]) ++i;
        else if (a[i] > b[j]) ++j;
        else { ++c; ++i; ++j; }
    }
    return c;
}

}  // namespace detail

// Mean over user pairs of 1 - |L_i ∩ L_j| / L. Pairs run over users with
// nonempty lists; the nominal L stays in the denominator even for short
// lists.
inline double inter_diversity(const std::vector<RecommendationList>& lists, int L,
                              int workers = 0) {
    std::vector<std::vector<int>> sorted;
    for (const auto& l : lists)
        if (!l.items.empty()) {
            sorted.push_back(l.items);
            std::sort(sorted.back().begin(), sorted.back().end());
        }
    const std::size_t u = sorted.size();
    if (u < 2) throw std::invalid_argument("inter_diversity: need >= 2 users with lists");
    std::vector<double> partial(u, 0.0);
    parallel_for(u, workers, [&](std::size_t i, int) {
        double s = 0.0;
        for (std::size_t j = i + 1; j < u; ++j)
            s += 1.0 - static_cast<double>(detail::sorted_overlap(sorted[i], sorted[j])) / L;
        partial[i] = s;
    });
    double total = 0.0;
    for (double s : partial) total += s;
    return total / (0.5 * static_cast<double>(u) * static_cast<double>(u - 1));
}

// Seeded uniform pair sample of the same mean; for graphs where the exact
// pair loop is too large.
inline double inter_diversity_sampled(const std::vector<RecommendationList>& lists, int L,
                                      std::size_t pairs, std::uint64_t seed, int workers = 0) {
    std::vector<std::vector<int>> sorted;
    for (const auto& l : lists)
        if (!l.items.empty()) {
            sorted.push_back(l.items);
            std::sort(sorted.back().begin(), sorted.back().end());
        }
    const std::size_t u = sorted.size();
    if (u < 2) throw std::invalid_argument("inter_diversity: need >= 2 users with lists");
    if (pairs == 0) throw std::invalid_argument("inter_diversity_sampled: zero pairs");
    Rng rng(seed);
    std::vector<std::pair<std::uint32_t, std::uint32_t>> drawn(pairs);
    for (auto& p : drawn) {
        const std::uint64_t i = rng.next_below(u);
        std::uint64_t j = rng.next_below(u - 1);
        if (j >= i) ++j;
        p = {static_cast<std::uint32_t>(i), static_cast<std::uint32_t>(j)};
    }
    std::vector<double> vals(pairs, 0.0);
    parallel_for(pairs, workers, [&](std::size_t k, int) {
        vals[k] = 1.0 - static_cast<double>(detail::sorted_overlap(sorted[drawn[k].first],
                                                                   sorted[drawn[k].second])) / L;
    });
    double total = 0.0;
    for (double v : vals) total += v;
    return total / static_cast<double>(pairs);
}

// Cosine similarity of two items over the training graph's user sets.
// Items without training links have similarity 0 with any partner.
inline double item_cosine_similarity(const BipartiteGraph& train, int a, int b) {
    const int ka = train.item_degree(a), kb = train.item_degree(b);
    if (ka == 0 || kb == 0) return 0.0;
    const std::size_t common = detail::sorted_overlap(train.users_of_item(a), train.users_of_item(b));
    return static_cast<double>(common) / std::sqrt(static_cast<double>(ka) * static_cast<double>(kb));
}

// Inner diversity: mean dissimilarity of item pairs inside each list,
// normalized by the nominal m * L * (L-1) ordered-pair count.
inline double inner_diversity(const std::vector<RecommendationList>& lists,
                              const BipartiteGraph& train, int L, int workers = 0) {
    if (L < 2) throw std::invalid_argument("inner_diversity: L must be >= 2");
    if (lists.empty()) throw std::invalid_argument("inner_diversity: no lists");
    std::vector<double> partial(lists.size(), 0.0);
    const int nt = resolve_workers(workers);
    std::vector<std::unordered_map<std::uint64_t, double>> caches(nt);
    const std::uint64_t n = static_cast<std::uint64_t>(train.num_items());
    parallel_for(lists.size(), workers, [&](std::size_t ui, int tid) {
        const auto& items = lists[ui].items;
        auto& cache = caches[tid];
        double s = 0.0;
        for (std::size_t x = 0; x < items.size(); ++x)
            for (std::size_t y = x + 1; y < items.size(); ++y) {
                const int a = std::min(items[x], items[y]);
                const int b = std::max(items[x], items[y]);
                const std::uint64_t key = static_cast<std::uint64_t>(a) * n + b;
                auto it = cache.find(key);
                double sim;
                if (it != cache.end()) sim = it->second;
                else {
                    sim = item_cosine_similarity(train, a, b);
                    cache.emplace(key, sim);
                }
                s += 2.0 * (1.0 - sim);  // ordered pairs
            }
        partial[ui] = s;
    });
    double total = 0.0;
    for (double s : partial) total += s;
    return total / (static_cast<double>(lists.size()) * L * (L - 1));
}

// Percentage improvement, plain relative difference. Presentation
// sign conventions are left to the reporting layer.
inline double improvement(double q_alg, double q_dcb) {
    if (q_dcb == 0.0) throw std::invalid_argument("improvement: reference value is zero");
    return (q_alg - q_dcb) / q_dcb;
}

// Normalized histogram of training degrees over all list entries.
inline std::map<int, double> recommended_degree_distribution(
    const std::vector<RecommendationList>& lists, const BipartiteGraph& train) {
    std::map<int, std::size_t> counts;
    std::size_t total = 0;
    for (const auto& l : lists)
        for (int it : l.items) {
            ++counts[train.item_degree(it)];
            ++total;
        }
    std::map<int, double> out;
    if (total == 0) return out;
    for (const auto& [k, c] : counts) out[k] = static_cast<double>(c) / static_cast<double>(total);
    return out;
}

}  // namespace diffrec
