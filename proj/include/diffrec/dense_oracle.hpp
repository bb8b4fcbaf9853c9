#pragma once

#include <cmath>
#include <vector>

#include "diffrec/algorithm.hpp"
#include "diffrec/graph.hpp"

namespace diffrec {

// Dense n x n resource reallocation matrix, row-major (W[alpha*n + beta]).
// Entry: k_alpha^(lambda-1) * k_beta^(-lambda) * sum_j a_aj a_bj / k_j, with
// lambda per spec (per-item variants take lambda from the source item beta).
// Quadratic storage; this is the reference route the sparse kernels are
// checked against, not a production path. Items with zero degree get zero
// rows and columns.
inline std::vector<double> dense_transform_matrix(const BipartiteGraph& g, const AlgorithmSpec& spec) {
    spec.validate();
    const int n = g.num_items();
    std::vector<double> w(static_cast<std::size_t>(n) * n, 0.0);
    for (int beta = 0; beta < n; ++beta) {
        const int kb = g.item_degree(beta);
        if (kb == 0) continue;
        double lam;
        switch (spec.kind) {
            case Algo::PBS: lam = 1.0; break;
            case Algo::HTS: lam = 0.0; break;
            case Algo::HHP: lam = spec.lambda; break;
            default: lam = per_item_lambda(spec, kb); break;
        }
        const double wb = std::pow(static_cast<double>(kb), -lam);
        for (int alpha = 0; alpha < n; ++alpha) {
            const int ka = g.item_degree(alpha);
            if (ka == 0) continue;
            // common-neighbor sum over users, weighted by 1/k_j
            double s = 0.0;
            const auto& ua = g.users_of_item(alpha);
            const auto& ub = g.users_of_item(beta);
            std::size_t i = 0, j = 0;
            while (i < ua.size() && j < ub.size()) {
                if (ua[i] < ub[j]) ++i;
                else if (ua[i] > ub[j]) ++j;
                else {
                    s += 1.0 / g.user_degree(ua[i]);
                    ++i;
                    ++j;
                }
            }
            if (s != 0.0)
                w[static_cast<std::size_t>(alpha) * n + beta] =
                    std::pow(static_cast<double>(ka), lam - 1.0) * wb * s;
        }
    }
    return w;
}

// f = W f0 with f0 the user's collected-item indicator.
inline ResourceVector oracle_score_user(const BipartiteGraph& g, int user, const AlgorithmSpec& spec) {
    const int n = g.num_items();
    const auto w = dense_transform_matrix(g, spec);
    ResourceVector f(n, 0.0);
    for (int alpha = 0; alpha < n; ++alpha) {
        double acc = 0.0;
        for (int beta : g.items_of_user(user)) acc += w[static_cast<std::size_t>(alpha) * n + beta];
        f[alpha] = acc;
    }
    return f;
}

}  // namespace diffrec
