#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <set>
#include <sstream>

#include "diffrec/ingest.hpp"
#include "support.hpp"

using namespace diffrec;

TEST_CASE("parse_ratings reads MovieLens layout", "[ingest]") {
    std::istringstream in("196\t242\t3\t881250949\n186\t302\t3\t891717742\n");
    const auto recs = parse_ratings(in, RatingsFormat{});
    REQUIRE(recs.size() == 2);
    CHECK(recs[0].user_id == "196");
    CHECK(recs[0].item_id == "242");
    CHECK(recs[0].rating == 3);
    CHECK(recs[1].user_id == "186");
}

TEST_CASE("parse_ratings on an empty stream", "[ingest]") {
    std::istringstream in("");
    CHECK(parse_ratings(in, RatingsFormat{}).empty());
}

TEST_CASE("parse_ratings errors carry the line number", "[ingest]") {
    std::istringstream bad_fields("1\t2\t3\n1\t2\n");
    CHECK_THROWS_WITH(parse_ratings(bad_fields, RatingsFormat{}),
                      Catch::Matchers::ContainsSubstring("line 2"));

    std::istringstream bad_rating("1\t2\tx\n");
    CHECK_THROWS_WITH(parse_ratings(bad_rating, RatingsFormat{}),
                      Catch::Matchers::ContainsSubstring("line 1"));

    std::istringstream out_of_scale("1\t2\t9\n");
    CHECK_THROWS_WITH(parse_ratings(out_of_scale, RatingsFormat{}),
                      Catch::Matchers::ContainsSubstring("outside scale"));
}

TEST_CASE("parse_ratings honors custom column order and scale", "[ingest]") {
    RatingsFormat fmt;
    fmt.delimiter = ',';
    fmt.rating_col = 0;
    fmt.user_col = 1;
    fmt.item_col = 2;
    fmt.rating_max = 10;
    std::istringstream in("7,alice,songA\n2,bob,songB,extra,fields\n");
    const auto recs = parse_ratings(in, fmt);
    REQUIRE(recs.size() == 2);
    CHECK(recs[0].rating == 7);
    CHECK(recs[0].user_id == "alice");
    CHECK(recs[1].item_id == "songB");
}

TEST_CASE("coarse_grain keeps ratings at or above the threshold", "[ingest]") {
    const std::vector<InteractionRecord> recs = {
        {"u", "a", 2}, {"u", "b", 3}, {"u", "c", 5}};
    const auto links = coarse_grain(recs, 3);
    REQUIRE(links.size() == 2);
    CHECK(links[0].item_id == "b");
    CHECK(links[1].item_id == "c");

    // ten-level scale, threshold 6
    const std::vector<InteractionRecord> ten = {{"u", "a", 6}, {"u", "b", 5}, {"u", "c", 10}};
    CHECK(coarse_grain(ten, 6).size() == 2);
}

TEST_CASE("coarse_grain collapses duplicates to the max rating", "[ingest]") {
    const std::vector<InteractionRecord> recs = {{"u", "a", 2}, {"u", "a", 5}, {"u", "a", 1}};
    const auto links = coarse_grain(recs, 3);
    REQUIRE(links.size() == 1);
}

TEST_CASE("coarse_grain is threshold-monotone", "[ingest]") {
    Rng rng(31);
    std::vector<InteractionRecord> recs;
    for (int i = 0; i < 300; ++i)
        recs.push_back({std::to_string(rng.next_below(20)), std::to_string(rng.next_below(30)),
                        1 + static_cast<int>(rng.next_below(5))});
    std::size_t prev = coarse_grain(recs, 1).size();
    for (int thr = 2; thr <= 5; ++thr) {
        const std::size_t cur = coarse_grain(recs, thr).size();
        CHECK(cur <= prev);
        prev = cur;
    }
}

TEST_CASE("index_records keeps the full universe from raw records", "[ingest]") {
    // item "b" never survives the threshold but stays in the universe
    const std::vector<InteractionRecord> recs = {{"u1", "a", 5}, {"u2", "b", 1}, {"u2", "a", 4}};
    const auto ds = index_records(recs, 3);
    CHECK(ds.num_users() == 2);
    CHECK(ds.num_items() == 2);
    REQUIRE(ds.links.size() == 2);
    const auto g = ds.graph();
    CHECK(g.item_degree(0) == 2);
    CHECK(g.item_degree(1) == 0);
}

TEST_CASE("remove_top_degree_items basics", "[ingest]") {
    const std::vector<Link> links = {{0, 0}, {1, 0}, {2, 0}, {3, 1}};
    CHECK(remove_top_degree_items(links, 0, 3) == links);

    // star: item 0 holds almost everything
    const std::vector<Link> star = {{0, 0}, {1, 0}, {2, 0}};
    CHECK(remove_top_degree_items(star, 1, 3).empty());

    CHECK_THROWS_AS(remove_top_degree_items(links, 3, 3), std::invalid_argument);
}

TEST_CASE("remove_top_degree_items breaks degree ties toward the smaller index", "[ingest]") {
    // item degrees {9, 5, 5, 1}
    std::vector<Link> links;
    for (int u = 0; u < 9; ++u) links.push_back({u, 0});
    for (int u = 0; u < 5; ++u) links.push_back({u, 1});
    for (int u = 0; u < 5; ++u) links.push_back({u, 2});
    links.push_back({0, 3});
    const auto kept = remove_top_degree_items(links, 2, 4);
    // brute-force degree sort removes item 0 (deg 9) and item 1 (first deg-5)
    std::set<int> items;
    for (const auto& l : kept) items.insert(l.item);
    CHECK(items == std::set<int>{2, 3});
    CHECK(kept.size() == 6);
}

TEST_CASE("split holds out round(fraction * links) and partitions exactly", "[ingest]") {
    std::vector<Link> links;
    for (int u = 0; u < 5; ++u)
        for (int i = 0; i < 2; ++i) links.push_back({u, i});
    const auto sd = split(links, 5, 2, 0.1, 123);
    CHECK(sd.probe.size() == 1);
    CHECK(sd.train.num_links() == 9);

    // partition property: train + probe == input, disjoint
    auto all = sd.train.links();
    all.insert(all.end(), sd.probe.begin(), sd.probe.end());
    std::sort(all.begin(), all.end());
    auto expect = links;
    std::sort(expect.begin(), expect.end());
    CHECK(all == expect);
}

TEST_CASE("split is deterministic for a seed and differs across seeds", "[ingest]") {
    std::vector<Link> links;
    Rng rng(4);
    for (int i = 0; i < 250; ++i)
        links.push_back({static_cast<int>(rng.next_below(40)), static_cast<int>(rng.next_below(60))});
    std::sort(links.begin(), links.end());
    links.erase(std::unique(links.begin(), links.end()), links.end());

    const auto a = split(links, 40, 60, 0.1, 9);
    const auto b = split(links, 40, 60, 0.1, 9);
    CHECK(a.probe == b.probe);
    CHECK(a.train.links() == b.train.links());
    CHECK(a.probe.size() == static_cast<std::size_t>(std::llround(0.1 * links.size())));

    const auto c = split(links, 40, 60, 0.1, 10);
    CHECK(a.probe != c.probe);
}

TEST_CASE("split keeps probe-only users in the universe with degree 0", "[ingest]") {
    const std::vector<Link> links = {{0, 0}, {1, 0}, {1, 1}, {2, 1}, {3, 0}, {3, 1}, {4, 0}, {4, 1}, {5, 0}, {5, 1}};
    const auto sd = split(links, 6, 2, 0.1, 1);
    CHECK(sd.train.num_users() == 6);
    CHECK(sd.train.num_items() == 2);
}

TEST_CASE("dataset_stats computes sparsity", "[ingest]") {
    const auto g = build_graph(2, 2, {{0, 0}, {1, 1}});
    const auto s = dataset_stats(g);
    CHECK(s.num_users == 2);
    CHECK(s.num_items == 2);
    CHECK(s.num_links == 2);
    CHECK(s.sparsity == 0.5);

    // published sample shapes: 10000 x 6000 with 701947 links sits at 1.17%
    CHECK(testsupport::rel_close(701947.0 / (10000.0 * 6000.0), 0.0117, 1e-3));
}
