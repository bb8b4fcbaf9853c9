#pragma once

#include <algorithm>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace diffrec {

// One user-item edge, dense 0-based indices.
struct Link {
    int user;
    int item;

    friend bool operator==(const Link&, const Link&) = default;
    friend auto operator<=>(const Link&, const Link&) = default;
};

// Per-item resource levels (f in the propagation step), length n.
using ResourceVector = std::vector<double>;

// Immutable unary user-item network with bidirectional sorted adjacency.
// Safe for concurrent reads once built.
class BipartiteGraph {
public:
    BipartiteGraph(int num_users, int num_items,
                   std::vector<std::vector<int>> items_of_user,
                   std::vector<std::vector<int>> users_of_item,
                   std::size_t num_links)
        : m_(num_users), n_(num_items),
          items_of_user_(std::move(items_of_user)),
          users_of_item_(std::move(users_of_item)),
          links_(num_links) {}

    int num_users() const { return m_; }
    int num_items() const { return n_; }
    std::size_t num_links() const { return links_; }

    const std::vector<int>& items_of_user(int u) const { return items_of_user_[u]; }
    const std::vector<int>& users_of_item(int it) const { return users_of_item_[it]; }

    int user_degree(int u) const { return static_cast<int>(items_of_user_[u].size()); }
    int item_degree(int it) const { return static_cast<int>(users_of_item_[it].size()); }

    bool has_link(int u, int it) const {
        const auto& v = items_of_user_[u];
        return std::binary_search(v.begin(), v.end(), it);
    }

    // min/max degree over items that carry at least one link
    std::pair<int, int> item_degree_bounds() const {
        int lo = 0, hi = 0;
        bool seen = false;
        for (const auto& adj : users_of_item_) {
            const int k = static_cast<int>(adj.size());
            if (k == 0) continue;
            if (!seen) { lo = hi = k; seen = true; }
            else { lo = std::min(lo, k); hi = std::max(hi, k); }
        }
        if (!seen) throw std::runtime_error("item_degree_bounds: graph has no links");
        return {lo, hi};
    }

    std::vector<Link> links() const {
        std::vector<Link> out;
        out.reserve(links_);
        for (int u = 0; u < m_; ++u)
            for (int it : items_of_user_[u]) out.push_back({u, it});
        return out;
    }

private:
    int m_;
    int n_;
    std::vector<std::vector<int>> items_of_user_;
    std::vector<std::vector<int>> users_of_item_;
    std::size_t links_;
};

// Builds the graph from raw links: validates index bounds, deduplicates,
// sorts both adjacency sides. Throws with the offending row on bad input.
inline BipartiteGraph build_graph(int num_users, int num_items, const std::vector<Link>& links) {
    if (num_users < 0 || num_items < 0)
        throw std::invalid_argument("build_graph: negative dimensions");
    std::vector<std::vector<int>> by_user(num_users), by_item(num_items);
    for (std::size_t row = 0; row < links.size(); ++row) {
        const auto [u, it] = links[row];
        if (u < 0 || u >= num_users || it < 0 || it >= num_items)
            throw std::out_of_range("build_graph: link row " + std::to_string(row) + " (" +
                                    std::to_string(u) + ", " + std::to_string(it) +
                                    ") outside " + std::to_string(num_users) + "x" +
                                    std::to_string(num_items));
        by_user[u].push_back(it);
    }
    std::size_t total = 0;
    for (auto& v : by_user) {
        std::sort(v.begin(), v.end());
        v.erase(std::unique(v.begin(), v.end()), v.end());
        total += v.size();
    }
    for (int u = 0; u < num_users; ++u)
        for (int it : by_user[u]) by_item[it].push_back(u);
    return BipartiteGraph(num_users, num_items, std::move(by_user), std::move(by_item), total);
}

}  // namespace diffrec
