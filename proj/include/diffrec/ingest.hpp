#pragma once

#include <charconv>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <istream>
#include <sstream>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "diffrec/graph.hpp"
#include "diffrec/rng.hpp"

namespace diffrec {

// One raw rating row; ids stay opaque tokens until indexing.
struct InteractionRecord {
    std::string user_id;
    std::string item_id;
    int rating = 0;
};

// Field layout of a delimiter-separated ratings file. Trailing extra fields
// (timestamps) are ignored.
struct RatingsFormat {
    char delimiter = '\t';
    int user_col = 0;
    int item_col = 1;
    int rating_col = 2;
    int rating_min = 1;
    int rating_max = 5;
};

namespace detail {

inline int parse_int_field(std::string_view s, std::size_t line_no, const char* what) {
    int value = 0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
    if (ec != std::errc{} || ptr != s.data() + s.size())
        throw std::runtime_error("line " + std::to_string(line_no) + ": bad " + what + " field '" +
                                 std::string(s) + "'");
    return value;
}

}  // namespace detail

// Streaming parse, one record per well-formed line in file order. Blank
// lines are skipped; anything else malformed raises with its line number.
inline std::vector<InteractionRecord> parse_ratings(std::istream& in, const RatingsFormat& fmt) {
    std::vector<InteractionRecord> out;
    const int need = std::max({fmt.user_col, fmt.item_col, fmt.rating_col}) + 1;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        std::string_view rest(line);
        std::vector<std::string_view> fields;
        while (static_cast<int>(fields.size()) < need) {
            const auto pos = rest.find(fmt.delimiter);
            if (pos == std::string_view::npos) {
                fields.push_back(rest);
                rest = {};
                break;
            }
            fields.push_back(rest.substr(0, pos));
            rest.remove_prefix(pos + 1);
        }
        if (static_cast<int>(fields.size()) < need)
            throw std::runtime_error("line " + std::to_string(line_no) + ": expected at least " +
                                     std::to_string(need) + " fields");
        InteractionRecord rec;
        rec.user_id = std::string(fields[fmt.user_col]);
        rec.item_id = std::string(fields[fmt.item_col]);
        rec.rating = detail::parse_int_field(fields[fmt.rating_col], line_no, "rating");
        if (rec.user_id.empty() || rec.item_id.empty())
            throw std::runtime_error("line " + std::to_string(line_no) + ": empty id field");
        if (rec.rating < fmt.rating_min || rec.rating > fmt.rating_max)
            throw std::runtime_error("line " + std::to_string(line_no) + ": rating " +
                                     std::to_string(rec.rating) + " outside scale [" +
                                     std::to_string(fmt.rating_min) + ", " +
                                     std::to_string(fmt.rating_max) + "]");
        out.push_back(std::move(rec));
    }
    return out;
}

inline std::vector<InteractionRecord> parse_ratings_file(const std::string& path,
                                                         const RatingsFormat& fmt) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open ratings file: " + path);
    return parse_ratings(in, fmt);
}

// Unary link with ids still opaque.
struct TokenLink {
    std::string user_id;
    std::string item_id;
};

// Coarse-grains ratings to unary links: keeps pairs whose rating reaches the
// threshold. Repeated (user, item) rows collapse to their maximum rating
// before thresholding; output keeps first-appearance order.
inline std::vector<TokenLink> coarse_grain(const std::vector<InteractionRecord>& records,
                                           int threshold) {
    std::unordered_map<std::string, std::size_t> seen;
    std::vector<TokenLink> pairs;
    std::vector<int> best;
    for (const auto& r : records) {
        std::string key = r.user_id + '\x1f' + r.item_id;
        const auto [it, inserted] = seen.emplace(std::move(key), pairs.size());
        if (inserted) {
            pairs.push_back({r.user_id, r.item_id});
            best.push_back(r.rating);
        } else {
            best[it->second] = std::max(best[it->second], r.rating);
        }
    }
    std::vector<TokenLink> out;
    for (std::size_t i = 0; i < pairs.size(); ++i)
        if (best[i] >= threshold) out.push_back(pairs[i]);
    return out;
}

// Dense-indexed link universe. Indices are assigned by first appearance in
// the raw records, so the universe covers every user and item ever rated,
// including those whose links are all filtered out by coarse-graining.
struct Dataset {
    std::vector<std::string> user_ids;  // index -> original token
    std::vector<std::string> item_ids;
    std::vector<Link> links;

    int num_users() const { return static_cast<int>(user_ids.size()); }
    int num_items() const { return static_cast<int>(item_ids.size()); }

    BipartiteGraph graph() const { return build_graph(num_users(), num_items(), links); }
};

inline Dataset index_records(const std::vector<InteractionRecord>& records, int threshold) {
    Dataset ds;
    std::unordered_map<std::string, int> umap, imap;
    for (const auto& r : records) {
        if (umap.emplace(r.user_id, ds.user_ids.size()).second) ds.user_ids.push_back(r.user_id);
        if (imap.emplace(r.item_id, ds.item_ids.size()).second) ds.item_ids.push_back(r.item_id);
    }
    for (const auto& l : coarse_grain(records, threshold))
        ds.links.push_back({umap.at(l.user_id), imap.at(l.item_id)});
    return ds;
}

// Drops all links incident to the `count` highest-degree items; ties at the
// cutoff fall to the smaller item index.
inline std::vector<Link> remove_top_degree_items(const std::vector<Link>& links, int count,
                                                 int num_items) {
    if (count < 0) throw std::invalid_argument("remove_top_degree_items: negative count");
    if (count >= num_items)
        throw std::invalid_argument("remove_top_degree_items: count " + std::to_string(count) +
                                    " >= item count " + std::to_string(num_items));
    if (count == 0) return links;
    std::vector<int> degree(num_items, 0);
    for (const auto& l : links) ++degree.at(l.item);
    std::vector<int> order(num_items);
    for (int i = 0; i < num_items; ++i) order[i] = i;
    std::sort(order.begin(), order.end(), [&](int a, int b) {
        return degree[a] != degree[b] ? degree[a] > degree[b] : a < b;
    });
    std::vector<char> removed(num_items, 0);
    for (int i = 0; i < count; ++i) removed[order[i]] = 1;
    std::vector<Link> out;
    out.reserve(links.size());
    for (const auto& l : links)
        if (!removed[l.item]) out.push_back(l);
    return out;
}

// A 90/10-style split: training graph plus held-out probe links. Users and
// items that end up only in the probe keep their index with train degree 0.
struct SplitDataset {
    BipartiteGraph train;
    std::vector<Link> probe;
    std::uint64_t seed = 0;
};

inline SplitDataset split(const std::vector<Link>& links, int num_users, int num_items,
                          double test_fraction, std::uint64_t seed) {
    if (!(test_fraction > 0.0 && test_fraction < 1.0))
        throw std::invalid_argument("split: test_fraction must be in (0,1)");
    const std::size_t total = links.size();
    const std::size_t probe_count =
        static_cast<std::size_t>(std::llround(test_fraction * static_cast<double>(total)));
    if (probe_count < 1)
        throw std::invalid_argument("split: test_fraction * links < 1, nothing to hold out");
    Rng rng(seed);
    std::vector<std::uint32_t> idx(total);
    for (std::size_t i = 0; i < total; ++i) idx[i] = static_cast<std::uint32_t>(i);
    for (std::size_t i = 0; i < probe_count; ++i)
        std::swap(idx[i], idx[i + rng.next_below(total - i)]);
    std::vector<char> is_probe(total, 0);
    for (std::size_t i = 0; i < probe_count; ++i) is_probe[idx[i]] = 1;
    std::vector<Link> train_links, probe;
    train_links.reserve(total - probe_count);
    probe.reserve(probe_count);
    for (std::size_t i = 0; i < total; ++i)
        (is_probe[i] ? probe : train_links).push_back(links[i]);
    return {build_graph(num_users, num_items, train_links), std::move(probe), seed};
}

struct DatasetStats {
    int num_users = 0;
    int num_items = 0;
    std::size_t num_links = 0;
    double sparsity = 0.0;
};

inline DatasetStats dataset_stats(const BipartiteGraph& g) {
    DatasetStats s;
    s.num_users = g.num_users();
    s.num_items = g.num_items();
    s.num_links = g.num_links();
    s.sparsity = s.num_users > 0 && s.num_items > 0
                     ? static_cast<double>(s.num_links) /
                           (static_cast<double>(s.num_users) * static_cast<double>(s.num_items))
                     : 0.0;
    return s;
}

}  // namespace diffrec
