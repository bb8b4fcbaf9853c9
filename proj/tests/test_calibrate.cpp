#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <cmath>

#include "diffrec/calibrate.hpp"
#include "diffrec/dense_oracle.hpp"
#include "support.hpp"

using namespace diffrec;
using testsupport::random_graph;
using testsupport::rel_close;

namespace {

std::vector<double> grid_21() {
    std::vector<double> g;
    for (int i = 0; i <= 20; ++i) g.push_back(i * 0.05);
    return g;
}

}  // namespace

TEST_CASE("sweep peaks at lambda=1 and is deterministic", "[calibrate]") {
    Rng rng(21);
    const auto g = random_graph(rng, 30, 40, 0.2);
    const std::vector<double> grid = {0.0, 0.25, 0.5, 0.75, 1.0};
    const auto pts = sweep_mean_degree(g, grid, {5});
    REQUIRE(pts.size() == 5);
    const double at_one = pts.back().mean_degree;
    for (const auto& p : pts) CHECK(p.mean_degree <= at_one);

    const auto again = sweep_mean_degree(g, grid, {5});
    for (std::size_t i = 0; i < pts.size(); ++i)
        CHECK(pts[i].mean_degree == again[i].mean_degree);

    // row count = |grid| x |L_set|
    CHECK(sweep_mean_degree(g, grid, {3, 5}).size() == 10);
}

TEST_CASE("sweep mean degree stays inside the item-degree range", "[calibrate]") {
    Rng rng(22);
    const auto g = random_graph(rng, 25, 30, 0.25);
    const auto [klo, khi] = g.item_degree_bounds();
    for (const auto& p : sweep_mean_degree(g, grid_21(), {4, 8})) {
        CHECK(p.mean_degree >= klo);
        CHECK(p.mean_degree <= khi);
    }
}

TEST_CASE("sweep on a star-plus-leaves toy matches the dense-oracle enumeration", "[calibrate]") {
    // item 0 linked to all four users, items 1..4 one private leaf each;
    // every user also holds a second private item, so lists have 4 slots.
    std::vector<Link> links;
    for (int u = 0; u < 4; ++u) links.push_back({u, 0});
    for (int u = 0; u < 4; ++u) links.push_back({u, 1 + u});
    const auto g = build_graph(4, 5, links);

    const double lambda = 0.6;
    const int L = 3;
    double expect_sum = 0.0;
    std::size_t expect_cnt = 0;
    for (int u = 0; u < 4; ++u) {
        const auto f = oracle_score_user(g, u, AlgorithmSpec::hhp(lambda));
        const auto lst = top_l(f, g.items_of_user(u), L, u);
        for (int it : lst.items) {
            expect_sum += g.item_degree(it);
            ++expect_cnt;
        }
    }
    const auto pts = sweep_mean_degree(g, {lambda}, {L});
    REQUIRE(pts.size() == 1);
    CHECK(rel_close(pts[0].mean_degree, expect_sum / expect_cnt, 1e-12));
}

TEST_CASE("rescale maps sweep extremes to the unit interval", "[calibrate]") {
    const std::vector<SweepPoint> pts = {{0.0, 10, 10.0}, {0.5, 10, 18.0}, {1.0, 10, 30.0}};
    const auto rs = rescale(pts);
    CHECK(rs[0].k_tilde == 0.0);
    CHECK(rs[2].k_tilde == 1.0);
    CHECK(rel_close(rs[1].k_tilde, 0.4, 1e-15));
    CHECK(rs[1].lambda_tilde == 0.5);

    const std::vector<SweepPoint> two = {{0.0, 10, 10.0}, {1.0, 10, 30.0}};
    const auto rs2 = rescale(two);
    CHECK(rs2[0].k_tilde == 0.0);
    CHECK(rs2[1].k_tilde == 1.0);
}

TEST_CASE("per-L rescaling spans [0,1] for every list length", "[calibrate]") {
    std::vector<SweepPoint> pts;
    // two L curves with different raw ranges
    for (int i = 0; i <= 4; ++i) pts.push_back({i * 0.25, 10, 5.0 + 10.0 * i});
    for (int i = 0; i <= 4; ++i) pts.push_back({i * 0.25, 50, 20.0 + 4.0 * i});
    const auto rs = rescale(pts);
    for (int l : {10, 50}) {
        double lo = 1e9, hi = -1e9;
        for (const auto& p : rs)
            if (p.L == l) {
                lo = std::min(lo, p.k_tilde);
                hi = std::max(hi, p.k_tilde);
            }
        CHECK(lo == 0.0);
        CHECK(hi == 1.0);
    }
    // joint variant keeps the L-dependent ranges
    const auto joint = rescale(pts, false);
    double hi50 = -1e9;
    for (const auto& p : joint)
        if (p.L == 50) hi50 = std::max(hi50, p.k_tilde);
    CHECK(hi50 < 1.0);
}

TEST_CASE("rescale preserves ordering and rejects degenerate sweeps", "[calibrate]") {
    std::vector<SweepPoint> pts;
    for (int i = 0; i < 8; ++i) pts.push_back({i * 0.1, 10, 5.0 + 3.0 * i});
    const auto rs = rescale(pts);
    for (std::size_t i = 1; i < rs.size(); ++i) CHECK(rs[i].k_tilde > rs[i - 1].k_tilde);

    const std::vector<SweepPoint> flat = {{0.0, 10, 7.0}, {1.0, 10, 7.0}};
    CHECK_THROWS_AS(rescale(flat), std::runtime_error);
}

TEST_CASE("rescale of a sweep is invariant under grid permutation", "[calibrate]") {
    Rng rng(23);
    const auto g = random_graph(rng, 20, 25, 0.3);
    const std::vector<double> grid = {0.0, 0.2, 0.4, 0.6, 0.8, 1.0};
    std::vector<double> shuffled = {0.6, 0.0, 1.0, 0.2, 0.8, 0.4};
    auto a = rescale(sweep_mean_degree(g, grid, {5}));
    auto b = rescale(sweep_mean_degree(g, shuffled, {5}));
    const auto key = [](const RescaledPoint& p) { return std::pair(p.lambda_tilde, p.k_tilde); };
    std::sort(a.begin(), a.end(), [&](auto& x, auto& y) { return key(x) < key(y); });
    std::sort(b.begin(), b.end(), [&](auto& x, auto& y) { return key(x) < key(y); });
    REQUIRE(a.size() == b.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
        CHECK(a[i].k_tilde == b[i].k_tilde);
        CHECK(a[i].lambda_tilde == b[i].lambda_tilde);
    }
}

TEST_CASE("fit recovers the generating bi-exponential", "[calibrate][fit]") {
    // points generated exactly from the published RYM coefficients
    std::vector<std::pair<double, double>> pts;
    for (int i = 0; i <= 40; ++i) {
        const double x = i / 40.0;
        pts.push_back({x, kRymCoeffs.eval(x)});
    }
    const auto fit = fit_double_exponential(pts, 32, 7);
    CHECK(fit.residual < 1e-8);
    for (int i = 0; i <= 100; ++i) {
        const double x = i / 100.0;
        CHECK(std::fabs(fit.coeffs.eval(x) - kRymCoeffs.eval(x)) < 1e-6);
    }
}

TEST_CASE("fit of constant data reproduces the constant curve", "[calibrate][fit]") {
    std::vector<std::pair<double, double>> pts;
    for (int i = 0; i <= 20; ++i) pts.push_back({i / 20.0, 0.5});
    const auto fit = fit_double_exponential(pts, 32, 11);
    for (int i = 0; i <= 100; ++i)
        CHECK(std::fabs(fit.coeffs.eval(i / 100.0) - 0.5) < 1e-6);
}

TEST_CASE("fit never loses to the warm starts", "[calibrate][fit]") {
    // noisy samples of the MovieLens curve
    Rng rng(5150);
    std::vector<std::pair<double, double>> pts;
    for (int i = 0; i <= 50; ++i) {
        const double x = i / 50.0;
        pts.push_back({x, kMovieLensCoeffs.eval(x) + 0.02 * (rng.next_double() - 0.5)});
    }
    const auto fit = fit_double_exponential(pts, 16, 3);
    CHECK(fit.residual <= rms_residual(kMovieLensCoeffs, pts));
    CHECK(fit.residual <= rms_residual(kRymCoeffs, pts));
    CHECK(fit.converged_starts >= 1);
}

TEST_CASE("fit is deterministic and validates input size", "[calibrate][fit]") {
    std::vector<std::pair<double, double>> pts;
    for (int i = 0; i < 12; ++i) pts.push_back({i / 11.0, 0.1 + 0.05 * i});
    const auto a = fit_double_exponential(pts, 8, 42);
    const auto b = fit_double_exponential(pts, 8, 42);
    CHECK(a.coeffs == b.coeffs);
    CHECK(a.residual == b.residual);

    CHECK_THROWS_AS(fit_double_exponential({{0, 0}, {1, 1}, {0.5, 0.5}}, 8, 1),
                    std::invalid_argument);
}

TEST_CASE("fit reports failure when every start diverges", "[calibrate][fit]") {
    // objective overflows at every start
    const std::vector<std::pair<double, double>> pts = {
        {0.0, 1e300}, {0.3, 1e300}, {0.6, 1e300}, {1.0, 1e300}};
    CHECK_THROWS_AS(fit_double_exponential(pts, 4, 1), std::runtime_error);
}

TEST_CASE("power-law generator honors seed, floor, and exponent", "[calibrate][generator]") {
    const auto a = generate_power_law_bipartite(400, 500, 3.0, 1.0, 97);
    const auto b = generate_power_law_bipartite(400, 500, 3.0, 1.0, 97);
    CHECK(a.links() == b.links());
    for (int i = 0; i < a.num_items(); ++i) CHECK(a.item_degree(i) >= 1);

    CHECK_THROWS_AS(generate_power_law_bipartite(10, 10, 3.0, 50.0, 1), std::invalid_argument);
    CHECK_THROWS_AS(generate_power_law_bipartite(10, 10, 0.5, 2.0, 1), std::invalid_argument);

    // log-log histogram slope of the degree distribution ~ -nu
    const auto g = generate_power_law_bipartite(2000, 1000, 3.0, 3.0, 1234);
    std::map<int, int> hist;
    for (int i = 0; i < g.num_items(); ++i) ++hist[g.item_degree(i)];
    // log-spaced bins
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    int nb = 0;
    double lo = 1.0;
    while (lo <= 200.0) {
        const double hi = lo * 1.8;
        int count = 0;
        double ksum = 0;
        for (const auto& [k, c] : hist)
            if (k >= lo && k < hi) {
                count += c;
                ksum += static_cast<double>(k) * c;
            }
        if (count > 0) {
            const double x = std::log(ksum / count);
            const double y = std::log(count / (hi - lo));  // density per unit degree
            sx += x;
            sy += y;
            sxx += x * x;
            sxy += x * y;
            ++nb;
        }
        lo = hi;
    }
    REQUIRE(nb >= 4);
    const double slope = (nb * sxy - sx * sy) / (nb * sxx - sx * sx);
    CHECK(std::fabs(slope + 3.0) < 0.6);
}

TEST_CASE("scaling exponent tracks lambda on synthetic power-law graphs", "[calibrate][scaling]") {
    const auto g = generate_power_law_bipartite(1500, 1200, 3.0, 8.0, 2025);
    const double s1 = verify_scaling_exponent(g, 1.0);
    CHECK(std::fabs(s1 - 1.0) < 0.15);
    const double s05 = verify_scaling_exponent(g, 0.5);
    CHECK(std::fabs(s05 - 0.5) < 0.15);
}

TEST_CASE("scaling check needs enough degree buckets", "[calibrate][scaling]") {
    // near-uniform degrees: everything lands in one bucket
    Rng rng(3);
    const auto g = random_graph(rng, 30, 10, 0.5);
    CHECK_THROWS_AS(verify_scaling_exponent(g, 0.5), std::runtime_error);
}

TEST_CASE("calibrate_dcb composes and is reproducible", "[calibrate]") {
    Rng rng(34);
    const auto g = random_graph(rng, 60, 80, 0.12);
    const auto cal1 = calibrate_dcb_full(g, grid_21(), {5, 10}, 77);
    const auto cal2 = calibrate_dcb_full(g, grid_21(), {5, 10}, 77);
    CHECK(cal1.fit.coeffs == cal2.fit.coeffs);
    CHECK(cal1.spec.kind == Algo::DCB);
    CHECK_NOTHROW(cal1.spec.validate());
    const auto [klo, khi] = g.item_degree_bounds();
    CHECK(cal1.spec.k_min == klo);
    CHECK(cal1.spec.k_max == khi);
    CHECK(cal1.fit.residual >= 0.0);
    CHECK(cal1.fit.k_min < cal1.fit.k_max);
    CHECK(cal1.rescaled.size() == cal1.sweep.size());
}

TEST_CASE("collapse_spread is small for coincident curves and large for split ones", "[calibrate]") {
    std::vector<RescaledPoint> tight, loose;
    for (int li : {10, 20}) {
        for (int i = 0; i <= 10; ++i) {
            const double x = i / 10.0;
            tight.push_back({x, 0.3 * x + 0.1, li});
            loose.push_back({x, li == 10 ? 0.1 : 0.9, li});
        }
    }
    CHECK(collapse_spread(tight) < 1e-12);
    CHECK(collapse_spread(loose) > 0.3);
}
