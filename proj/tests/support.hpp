#pragma once

// Shared helpers for the unit and acceptance suites.

#include <cmath>
#include <cstdint>
#include <vector>

#include "diffrec/graph.hpp"
#include "diffrec/rng.hpp"

namespace testsupport {

inline bool rel_close(double a, double b, double rtol) {
    if (a == b) return true;
    const double scale = std::max(std::fabs(a), std::fabs(b));
    return std::fabs(a - b) <= rtol * scale;
}

inline bool all_rel_close(const std::vector<double>& a, const std::vector<double>& b, double rtol) {
    if (a.size() != b.size()) return false;
    for (std::size_t i = 0; i < a.size(); ++i)
        if (!rel_close(a[i], b[i], rtol)) return false;
    return true;
}

inline double max_rel_err(const std::vector<double>& a, const std::vector<double>& b) {
    double worst = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double scale = std::max(std::fabs(a[i]), std::fabs(b[i]));
        if (scale == 0.0) continue;
        worst = std::max(worst, std::fabs(a[i] - b[i]) / scale);
    }
    return worst;
}

// Erdos-Renyi style bipartite graph: each (u, i) link present with
// probability `density`.
inline diffrec::BipartiteGraph random_graph(diffrec::Rng& rng, int m, int n, double density) {
    std::vector<diffrec::Link> links;
    for (int u = 0; u < m; ++u)
        for (int it = 0; it < n; ++it)
            if (rng.next_double() < density) links.push_back({u, it});
    return diffrec::build_graph(m, n, links);
}

// The 2-user/3-item toy used by several worked examples:
// u0 collected {o0, o1}, u1 collected {o1, o2}.
inline diffrec::BipartiteGraph toy_graph_2x3() {
    return diffrec::build_graph(2, 3, {{0, 0}, {0, 1}, {1, 1}, {1, 2}});
}

}  // namespace testsupport
