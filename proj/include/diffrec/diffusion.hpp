#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <vector>

#include "diffrec/algorithm.hpp"
#include "diffrec/graph.hpp"
#include "diffrec/parallel.hpp"

namespace diffrec {

// Top-L items for one user, uncollected only, ordered by score descending
// with ties broken by ascending item index.
struct RecommendationList {
    int user = 0;
    std::vector<int> items;
    std::vector<double> scores;
};

// Two-hop propagation engine for one (graph, spec) pair. Builds the degree
// power tables once, then scores users independently; scoring is pure and
// reentrant given distinct workspaces.
class Scorer {
public:
    // Reusable per-thread buffers. uw holds user-layer mass, active the
    // touched user ids in first-touch order.
    struct Workspace {
        std::vector<double> uw;
        std::vector<int> active;
    };

    Scorer(const BipartiteGraph& g, const AlgorithmSpec& spec) : g_(g), spec_(spec) {
        spec.validate();
        const int m = g.num_users();
        const int n = g.num_items();
        inv_user_degree_.resize(m);
        for (int j = 0; j < m; ++j) {
            const int k = g.user_degree(j);
            inv_user_degree_[j] = k > 0 ? 1.0 / k : 0.0;
        }
        if (!spec.per_item()) {
            // constant lambda: the k_alpha exponent factors out of the sum
            double lam;
            switch (spec.kind) {
                case Algo::PBS: lam = 1.0; break;
                case Algo::HTS: lam = 0.0; break;
                default: lam = spec.lambda; break;
            }
            src_weight_.resize(n, 0.0);
            dst_weight_.resize(n, 0.0);
            for (int it = 0; it < n; ++it) {
                const int k = g.item_degree(it);
                if (k == 0) continue;
                if (spec.kind == Algo::PBS) {
                    src_weight_[it] = 1.0 / k;
                    dst_weight_[it] = 1.0;
                } else if (spec.kind == Algo::HTS) {
                    src_weight_[it] = 1.0;
                    dst_weight_[it] = 1.0 / k;
                } else {
                    src_weight_[it] = std::pow(static_cast<double>(k), -lam);
                    dst_weight_[it] = std::pow(static_cast<double>(k), lam - 1.0);
                }
            }
        } else {
            // per-item lambda: exponents depend on the source item's degree,
            // so precompute the full (source class x target class) power
            // table over distinct degree values and reduce the kernel to
            // table lookups. Exact, no quantization.
            std::vector<int> degrees;
            degrees.reserve(n);
            for (int it = 0; it < n; ++it)
                if (g.item_degree(it) > 0) degrees.push_back(g.item_degree(it));
            std::sort(degrees.begin(), degrees.end());
            degrees.erase(std::unique(degrees.begin(), degrees.end()), degrees.end());
            const int d = static_cast<int>(degrees.size());
            degree_class_.assign(n, -1);
            for (int it = 0; it < n; ++it) {
                const int k = g.item_degree(it);
                if (k == 0) continue;
                degree_class_[it] = static_cast<int>(
                    std::lower_bound(degrees.begin(), degrees.end(), k) - degrees.begin());
            }
            pair_table_.resize(static_cast<std::size_t>(d) * d);
            for (int cb = 0; cb < d; ++cb) {
                const double kb = degrees[cb];
                const double lam = per_item_lambda(spec, degrees[cb]);
                const double wb = std::pow(kb, -lam);
                double* row = pair_table_.data() + static_cast<std::size_t>(cb) * d;
                for (int ca = 0; ca < d; ++ca)
                    row[ca] = std::pow(static_cast<double>(degrees[ca]), lam - 1.0) * wb;
            }
            num_classes_ = d;
        }
    }

    const BipartiteGraph& graph() const { return g_; }
    const AlgorithmSpec& spec() const { return spec_; }

    Workspace make_workspace() const {
        Workspace ws;
        ws.uw.assign(g_.num_users(), 0.0);
        ws.active.reserve(g_.num_users());
        return ws;
    }

    // f gets the full resource vector of `user`; zero-degree users yield an
    // all-zero vector. Summation order is fixed by the traversal, so results
    // are bit-stable for any thread count.
    void score_into(int user, ResourceVector& f, Workspace& ws) const {
        const int n = g_.num_items();
        f.assign(n, 0.0);
        const auto& collected = g_.items_of_user(user);
        if (collected.empty()) return;
        if (!spec_.per_item()) {
            ws.active.clear();
            for (int beta : collected) {
                const double wb = src_weight_[beta];
                for (int j : g_.users_of_item(beta)) {
                    if (ws.uw[j] == 0.0) ws.active.push_back(j);
                    ws.uw[j] += wb;
                }
            }
            for (int j : ws.active) {
                const double t = ws.uw[j] * inv_user_degree_[j];
                ws.uw[j] = 0.0;
                for (int alpha : g_.items_of_user(j)) f[alpha] += t;
            }
            for (int alpha = 0; alpha < n; ++alpha) f[alpha] *= dst_weight_[alpha];
        } else {
            const int d = num_classes_;
            for (int beta : collected) {
                const double* row = pair_table_.data() + static_cast<std::size_t>(degree_class_[beta]) * d;
                for (int j : g_.users_of_item(beta)) {
                    const double t = inv_user_degree_[j];
                    for (int alpha : g_.items_of_user(j)) f[alpha] += row[degree_class_[alpha]] * t;
                }
            }
        }
    }

    ResourceVector score(int user) const {
        ResourceVector f;
        Workspace ws = make_workspace();
        score_into(user, f, ws);
        return f;
    }

private:
    const BipartiteGraph& g_;
    AlgorithmSpec spec_;
    std::vector<double> inv_user_degree_;
    // constant-lambda tables
    std::vector<double> src_weight_;
    std::vector<double> dst_weight_;
    // per-item-lambda tables
    std::vector<int> degree_class_;
    std::vector<double> pair_table_;
    int num_classes_ = 0;
};

// One-shot scoring (spec operation surface); heavy callers hold a Scorer.
inline ResourceVector score_user(const BipartiteGraph& g, int user, const AlgorithmSpec& spec) {
    return Scorer(g, spec).score(user);
}

// Selects the top-L uncollected items from a score vector. collected must be
// sorted ascending.
inline RecommendationList top_l(const ResourceVector& f, const std::vector<int>& collected, int L,
                                int user = 0) {
    if (L < 1) throw std::invalid_argument("top_l: L must be >= 1");
    // heap of (score, item), worst entry on top
    const auto worse = [](const std::pair<double, int>& x, const std::pair<double, int>& y) {
        return x.first > y.first || (x.first == y.first && x.second < y.second);
    };
    std::vector<std::pair<double, int>> heap;
    heap.reserve(L + 1);
    const int n = static_cast<int>(f.size());
    std::size_t ci = 0;
    for (int it = 0; it < n; ++it) {
        if (ci < collected.size() && collected[ci] == it) {
            ++ci;
            continue;
        }
        const std::pair<double, int> cand{f[it], it};
        if (static_cast<int>(heap.size()) < L) {
            heap.push_back(cand);
            std::push_heap(heap.begin(), heap.end(), worse);
        } else if (worse(cand, heap.front())) {
            std::pop_heap(heap.begin(), heap.end(), worse);
            heap.back() = cand;
            std::push_heap(heap.begin(), heap.end(), worse);
        }
    }
    std::sort_heap(heap.begin(), heap.end(), worse);  // best first
    RecommendationList out;
    out.user = user;
    out.items.reserve(heap.size());
    out.scores.reserve(heap.size());
    for (const auto& [score, item] : heap) {
        out.items.push_back(item);
        out.scores.push_back(score);
    }
    return out;
}

// Top-L lists for every user. Zero-degree users get empty lists. Independent
// per-user jobs; output does not depend on the worker count.
inline std::vector<RecommendationList> recommend_all(const BipartiteGraph& g,
                                                     const AlgorithmSpec& spec, int L,
                                                     int workers = 0) {
    const Scorer scorer(g, spec);
    const int m = g.num_users();
    std::vector<RecommendationList> lists(m);
    const int nt = resolve_workers(workers);
    std::vector<Scorer::Workspace> ws(nt);
    std::vector<ResourceVector> fbuf(nt);
    for (auto& w : ws) w = scorer.make_workspace();
    parallel_for(static_cast<std::size_t>(m), workers, [&](std::size_t u, int tid) {
        const int user = static_cast<int>(u);
        lists[u].user = user;
        if (g.user_degree(user) == 0) return;
        scorer.score_into(user, fbuf[tid], ws[tid]);
        lists[u] = top_l(fbuf[tid], g.items_of_user(user), L, user);
    });
    return lists;
}

}  // namespace diffrec
