#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "diffrec/algorithm.hpp"
#include "diffrec/diffusion.hpp"
#include "diffrec/graph.hpp"
#include "diffrec/parallel.hpp"
#include "diffrec/rng.hpp"

namespace diffrec {

// Mean training degree of recommended items at one (lambda, L) grid point.
struct SweepPoint {
    double lambda = 0.0;
    int L = 0;
    double mean_degree = 0.0;
};

// HHP sweep over the lambda grid: one scoring pass per lambda, top-max(L)
// selection, and pooled mean item degree for every L prefix. limit_users
// restricts the pass to the first users (0 = all).
inline std::vector<SweepPoint> sweep_mean_degree(const BipartiteGraph& g,
                                                 const std::vector<double>& lambda_grid,
                                                 const std::vector<int>& L_set,
                                                 int limit_users = 0, int workers = 0) {
    if (lambda_grid.empty() || L_set.empty())
        throw std::invalid_argument("sweep_mean_degree: empty grid");
    for (double l : lambda_grid)
        if (!(l >= 0.0 && l <= 1.0))
            throw std::invalid_argument("sweep_mean_degree: lambda outside [0,1]");
    const int m = limit_users > 0 ? std::min(limit_users, g.num_users()) : g.num_users();
    const int l_max = *std::max_element(L_set.begin(), L_set.end());
    const std::size_t nl = L_set.size();

    std::vector<SweepPoint> out;
    out.reserve(lambda_grid.size() * nl);
    std::vector<double> deg_sum(static_cast<std::size_t>(m) * nl);
    std::vector<std::uint32_t> deg_cnt(static_cast<std::size_t>(m) * nl);
    for (double lambda : lambda_grid) {
        const Scorer scorer(g, AlgorithmSpec::hhp(lambda));
        const int nt = resolve_workers(workers);
        std::vector<Scorer::Workspace> ws(nt);
        std::vector<ResourceVector> fbuf(nt);
        for (auto& w : ws) w = scorer.make_workspace();
        std::fill(deg_sum.begin(), deg_sum.end(), 0.0);
        std::fill(deg_cnt.begin(), deg_cnt.end(), 0u);
        parallel_for(static_cast<std::size_t>(m), workers, [&](std::size_t ui, int tid) {
            const int user = static_cast<int>(ui);
            if (g.user_degree(user) == 0) return;
            scorer.score_into(user, fbuf[tid], ws[tid]);
            const auto lst = top_l(fbuf[tid], g.items_of_user(user), l_max, user);
            double run = 0.0;
            std::size_t pos = 0;
            for (std::size_t li = 0; li < nl; ++li) {
                const std::size_t upto = std::min<std::size_t>(L_set[li], lst.items.size());
                for (; pos < upto; ++pos) run += g.item_degree(lst.items[pos]);
                deg_sum[ui * nl + li] = run;
                deg_cnt[ui * nl + li] = static_cast<std::uint32_t>(upto);
            }
        });
        for (std::size_t li = 0; li < nl; ++li) {
            double s = 0.0;
            std::uint64_t c = 0;
            for (int u = 0; u < m; ++u) {
                s += deg_sum[static_cast<std::size_t>(u) * nl + li];
                c += deg_cnt[static_cast<std::size_t>(u) * nl + li];
            }
            out.push_back({lambda, L_set[li], c ? s / static_cast<double>(c) : 0.0});
        }
    }
    return out;
}

// One sweep point after the min-max rescaling; lambda needs no rescaling
// since the grid already lives in [0,1].
struct RescaledPoint {
    double k_tilde = 0.0;
    double lambda_tilde = 0.0;
    int L = 0;
};

// Min-max normalizes the lambda-dependent mean degree and pools the per-L
// curves. Default normalizes each L by its own sweep extrema, which is what
// makes the curves collapse onto one relation (every L spans [0,1] exactly);
// per_list_length=false normalizes by the joint extrema over the whole
// sweep instead, kept for sensitivity checks (the curves then keep
// L-dependent ranges and do not collapse).
inline std::vector<RescaledPoint> rescale(const std::vector<SweepPoint>& points,
                                          bool per_list_length = true) {
    if (points.size() < 2) throw std::invalid_argument("rescale: need >= 2 sweep points");
    const auto bounds_of = [&](auto&& keep) {
        double lo = 0.0, hi = 0.0;
        bool seen = false;
        for (const auto& p : points) {
            if (!keep(p)) continue;
            if (!seen) { lo = hi = p.mean_degree; seen = true; }
            else {
                lo = std::min(lo, p.mean_degree);
                hi = std::max(hi, p.mean_degree);
            }
        }
        if (!(hi > lo)) throw std::runtime_error("rescale: degenerate sweep, all mean degrees equal");
        return std::pair(lo, hi);
    };
    std::vector<RescaledPoint> out;
    out.reserve(points.size());
    if (!per_list_length) {
        const auto [lo, hi] = bounds_of([](const SweepPoint&) { return true; });
        for (const auto& p : points)
            out.push_back({(p.mean_degree - lo) / (hi - lo), p.lambda, p.L});
        return out;
    }
    std::vector<int> ls;
    for (const auto& p : points) ls.push_back(p.L);
    std::sort(ls.begin(), ls.end());
    ls.erase(std::unique(ls.begin(), ls.end()), ls.end());
    for (int l : ls) {
        const auto [lo, hi] = bounds_of([l](const SweepPoint& p) { return p.L == l; });
        for (const auto& p : points)
            if (p.L == l) out.push_back({(p.mean_degree - lo) / (hi - lo), p.lambda, p.L});
    }
    return out;
}

// Fig.-2 style data-collapse measure: RMS deviation of each L's rescaled
// curve from the pooled mean curve, both evaluated on a shared k-tilde grid
// by linear interpolation over the overlap of all curves.
inline double collapse_spread(const std::vector<RescaledPoint>& points, int grid_points = 50) {
    std::vector<int> ls;
    for (const auto& p : points) ls.push_back(p.L);
    std::sort(ls.begin(), ls.end());
    ls.erase(std::unique(ls.begin(), ls.end()), ls.end());
    if (ls.size() < 2) throw std::invalid_argument("collapse_spread: need >= 2 distinct L curves");

    struct Curve {
        std::vector<double> x, y;
    };
    std::vector<Curve> curves;
    double lo = 0.0, hi = 1.0;
    for (int l : ls) {
        std::vector<std::pair<double, double>> pts;
        for (const auto& p : points)
            if (p.L == l) pts.push_back({p.k_tilde, p.lambda_tilde});
        std::sort(pts.begin(), pts.end());
        Curve c;
        for (std::size_t i = 0; i < pts.size();) {
            std::size_t j = i;
            double sum = 0.0;
            while (j < pts.size() && pts[j].first == pts[i].first) sum += pts[j++].second;
            c.x.push_back(pts[i].first);  // duplicate abscissae collapse to their mean
            c.y.push_back(sum / static_cast<double>(j - i));
            i = j;
        }
        if (c.x.size() < 2) throw std::invalid_argument("collapse_spread: curve with < 2 points");
        lo = std::max(lo, c.x.front());
        hi = std::min(hi, c.x.back());
        curves.push_back(std::move(c));
    }
    if (!(hi > lo)) throw std::runtime_error("collapse_spread: curves do not overlap");

    const auto interp = [](const Curve& c, double x) {
        const auto it = std::lower_bound(c.x.begin(), c.x.end(), x);
        if (it == c.x.begin()) return c.y.front();
        if (it == c.x.end()) return c.y.back();
        const std::size_t j = static_cast<std::size_t>(it - c.x.begin());
        const double t = (x - c.x[j - 1]) / (c.x[j] - c.x[j - 1]);
        return c.y[j - 1] + t * (c.y[j] - c.y[j - 1]);
    };

    double sq = 0.0;
    std::size_t cnt = 0;
    for (int gi = 0; gi < grid_points; ++gi) {
        const double x = lo + (hi - lo) * gi / (grid_points - 1);
        double mean = 0.0;
        for (const auto& c : curves) mean += interp(c, x);
        mean /= static_cast<double>(curves.size());
        for (const auto& c : curves) {
            const double d = interp(c, x) - mean;
            sq += d * d;
            ++cnt;
        }
    }
    return std::sqrt(sq / static_cast<double>(cnt));
}

// Published coefficient tuples for the combined exponential; used as warm
// starts for the fit (and as fixtures in tests).
inline constexpr FitCoeffs kRymCoeffs{0.04, 3.31, -0.04, -12.28};
inline constexpr FitCoeffs kNetflixCoeffs{0.03, 2.25, 1.75e-9, 19.78};
inline constexpr FitCoeffs kMovieLensCoeffs{0.03, 2.48, 4.95e-7, 14.05};

inline double rms_residual(const FitCoeffs& c, const std::vector<std::pair<double, double>>& pts) {
    if (pts.empty()) throw std::invalid_argument("rms_residual: no points");
    double sq = 0.0;
    for (const auto& [x, y] : pts) {
        const double d = y - c.eval(x);
        sq += d * d;
    }
    return std::sqrt(sq / static_cast<double>(pts.size()));
}

struct FitResult {
    FitCoeffs coeffs;
    double residual = 0.0;  // RMS over the fitted points
    double k_min = 0.0;     // sweep-degree normalization bounds
    double k_max = 0.0;
    std::uint64_t seed = 0;
    int converged_starts = 0;
};

namespace detail {

// solve 4x4 system in place, partial pivoting; returns false if singular
inline bool solve4(std::array<std::array<double, 4>, 4>& a, std::array<double, 4>& b) {
    for (int col = 0; col < 4; ++col) {
        int piv = col;
        for (int r = col + 1; r < 4; ++r)
            if (std::fabs(a[r][col]) > std::fabs(a[piv][col])) piv = r;
        if (std::fabs(a[piv][col]) < 1e-300) return false;
        std::swap(a[col], a[piv]);
        std::swap(b[col], b[piv]);
        for (int r = col + 1; r < 4; ++r) {
            const double f = a[r][col] / a[col][col];
            for (int c2 = col; c2 < 4; ++c2) a[r][c2] -= f * a[col][c2];
            b[r] -= f * b[col];
        }
    }
    for (int r = 3; r >= 0; --r) {
        for (int c2 = r + 1; c2 < 4; ++c2) b[r] -= a[r][c2] * b[c2];
        b[r] /= a[r][r];
    }
    return true;
}

inline double sse_of(const FitCoeffs& c, const std::vector<std::pair<double, double>>& pts) {
    double s = 0.0;
    for (const auto& [x, y] : pts) {
        const double d = y - c.eval(x);
        s += d * d;
    }
    return std::isfinite(s) ? s : std::numeric_limits<double>::infinity();
}

struct GnOutcome {
    FitCoeffs coeffs;
    double sse = std::numeric_limits<double>::infinity();
    bool converged = false;
};

// Damped Gauss-Newton on the bi-exponential residuals. Damping x10 on a
// rejected step, /10 on an accepted one, abandoned past 1e8. Stops on
// gradient orthogonality, relative gain, step size, or stationarity at the
// damping cap. Sums of exponentials have boundary optima (b or d -> 0 with
// diverging amplitudes) where the tail crawls forever; an iteration-capped
// run still returns its best finite point. A start fails only when its
// objective is non-finite.
inline GnOutcome gauss_newton(FitCoeffs theta, const std::vector<std::pair<double, double>>& pts,
                              int max_iter = 500) {
    GnOutcome out;
    double sse = sse_of(theta, pts);
    if (!std::isfinite(sse)) return out;
    double mu = 1e-3;
    for (int iter = 0; iter < max_iter; ++iter) {
        // assemble J^T J and J^T r for residual r_p = y_p - model(x_p)
        std::array<std::array<double, 4>, 4> jtj{};
        std::array<double, 4> jtr{};
        for (const auto& [x, y] : pts) {
            const double eb = std::exp(theta.b * x);
            const double ed = std::exp(theta.d * x);
            const double resid = y - (theta.a * eb + theta.c * ed);
            const std::array<double, 4> jrow = {-eb, -theta.a * x * eb, -ed, -theta.c * x * ed};
            for (int i = 0; i < 4; ++i) {
                jtr[i] += jrow[i] * resid;
                for (int j = i; j < 4; ++j) jtj[i][j] += jrow[i] * jrow[j];
            }
        }
        for (int i = 0; i < 4; ++i)
            for (int j = 0; j < i; ++j) jtj[i][j] = jtj[j][i];
        // gtol: residual orthogonal to every Jacobian column (MINPACK style)
        const double r_norm = std::sqrt(sse);
        bool orthogonal = true;
        for (int i = 0; i < 4; ++i) {
            const double col_norm = std::sqrt(jtj[i][i]);
            if (col_norm > 0.0 && std::fabs(jtr[i]) > 1e-9 * col_norm * r_norm) orthogonal = false;
        }
        if (orthogonal) {
            out.converged = true;
            break;
        }

        bool accepted = false;
        while (mu <= 1e8) {
            auto a = jtj;
            std::array<double, 4> step = {-jtr[0], -jtr[1], -jtr[2], -jtr[3]};
            for (int i = 0; i < 4; ++i) a[i][i] += mu;
            if (!solve4(a, step)) {
                mu *= 10.0;
                continue;
            }
            const FitCoeffs trial{theta.a + step[0], theta.b + step[1], theta.c + step[2],
                                  theta.d + step[3]};
            const double trial_sse = sse_of(trial, pts);
            if (trial_sse < sse) {
                const double gain = sse - trial_sse;
                const double step_norm = std::sqrt(step[0] * step[0] + step[1] * step[1] +
                                                   step[2] * step[2] + step[3] * step[3]);
                const double theta_norm =
                    std::sqrt(theta.a * theta.a + theta.b * theta.b + theta.c * theta.c +
                              theta.d * theta.d);
                theta = trial;
                sse = trial_sse;
                mu = std::max(mu / 10.0, 1e-12);
                accepted = true;
                if (gain <= 1e-9 * std::max(sse, 1e-300) || step_norm <= 1e-12 * (1.0 + theta_norm))
                    out.converged = true;
                break;
            }
            mu *= 10.0;
        }
        if (!accepted) break;  // damping cap: numerically stationary
        if (out.converged) break;
    }
    out.coeffs = theta;
    out.sse = sse;
    out.converged = true;  // objective finite throughout
    return out;
}

}  // namespace detail

// Least-squares fit of y = a e^(bx) + c e^(dx) by damped Gauss-Newton with
// seeded multi-start: `random_starts` log-uniform draws plus the three
// published coefficient tuples as warm starts. Returns the lowest-residual
// outcome; ties go to the earlier start. Throws if no start converges.
inline FitResult fit_double_exponential(const std::vector<std::pair<double, double>>& points,
                                        int random_starts = 32, std::uint64_t seed = 1) {
    if (points.size() < 4)
        throw std::invalid_argument("fit_double_exponential: need >= 4 points for 4 parameters");
    Rng rng(seed);
    std::vector<FitCoeffs> starts;
    starts.push_back(kRymCoeffs);
    starts.push_back(kNetflixCoeffs);
    starts.push_back(kMovieLensCoeffs);
    for (int s = 0; s < random_starts; ++s) {
        const auto log_uniform = [&](double lo, double hi) {
            return std::exp(rng.uniform(std::log(lo), std::log(hi)));
        };
        const auto sign = [&] { return rng.next_below(2) == 0 ? 1.0 : -1.0; };
        starts.push_back({sign() * log_uniform(1e-9, 1.0), sign() * log_uniform(0.1, 30.0),
                          sign() * log_uniform(1e-9, 1.0), sign() * log_uniform(0.1, 30.0)});
    }

    detail::GnOutcome best;
    int converged = 0;
    double best_sse_seen = std::numeric_limits<double>::infinity();
    for (const auto& start : starts) {
        const auto got = detail::gauss_newton(start, points);
        best_sse_seen = std::min(best_sse_seen, got.sse);
        if (!got.converged) continue;
        ++converged;
        if (got.sse < best.sse) best = got;
    }
    if (converged == 0)
        throw std::runtime_error(
            "fit_double_exponential: no start converged; best RMS " +
            std::to_string(std::sqrt(best_sse_seen / static_cast<double>(points.size()))));
    FitResult out;
    out.coeffs = best.coeffs;
    out.residual = std::sqrt(best.sse / static_cast<double>(points.size()));
    out.seed = seed;
    out.converged_starts = converged;
    return out;
}

// Random bipartite graph whose item degrees follow a truncated power law
// f(k) ~ k^(-nu), rescaled toward the requested mean and floored at 1; each
// item is wired to distinct uniformly chosen users.
inline BipartiteGraph generate_power_law_bipartite(int m, int n, double nu, double mean_degree,
                                                   std::uint64_t seed) {
    if (m < 1 || n < 1) throw std::invalid_argument("generate_power_law_bipartite: empty sides");
    if (!(nu > 1.0)) throw std::invalid_argument("generate_power_law_bipartite: nu must be > 1");
    if (!(mean_degree >= 1.0 && mean_degree <= static_cast<double>(m)))
        throw std::invalid_argument("generate_power_law_bipartite: infeasible mean degree");
    Rng rng(seed);
    const double lo = 1.0, hi = static_cast<double>(m);
    const double e = 1.0 - nu;
    const double clo = std::pow(lo, e), chi = std::pow(hi, e);
    std::vector<double> raw(n);
    double raw_mean = 0.0;
    for (int i = 0; i < n; ++i) {
        raw[i] = std::pow(clo + (chi - clo) * rng.next_double(), 1.0 / e);
        raw_mean += raw[i];
    }
    raw_mean /= static_cast<double>(n);
    const double scale = mean_degree / raw_mean;

    std::vector<Link> links;
    std::vector<char> mark(m, 0);
    std::vector<int> touched;
    for (int i = 0; i < n; ++i) {
        const int d = std::min(m, std::max(1, static_cast<int>(std::floor(raw[i] * scale))));
        touched.clear();
        while (static_cast<int>(touched.size()) < d) {
            const int u = static_cast<int>(rng.next_below(static_cast<std::uint64_t>(m)));
            if (mark[u]) continue;
            mark[u] = 1;
            touched.push_back(u);
        }
        for (int u : touched) {
            links.push_back({u, i});
            mark[u] = 0;
        }
    }
    return build_graph(m, n, links);
}

struct ScalingCheckOptions {
    int min_bucket_items = 20;
    double bucket_ratio = 1.4;
    int min_buckets = 5;
    int workers = 0;
};

// Empirical check of the expected-score scaling: mean HHP score per item
// against item degree on a log-log scale; the regression slope should match
// lambda on power-law graphs. Throws when fewer than min_buckets populated
// degree buckets exist.
inline double verify_scaling_exponent(const BipartiteGraph& g, double lambda,
                                      const ScalingCheckOptions& opt = {}) {
    if (!(lambda > 0.0 && lambda <= 1.0))
        throw std::invalid_argument("verify_scaling_exponent: lambda must be in (0,1]");
    const int m = g.num_users();
    const int n = g.num_items();
    const Scorer scorer(g, AlgorithmSpec::hhp(lambda));

    // fixed chunking keeps the merge order independent of the worker count
    const int chunks = 64;
    std::vector<std::vector<double>> partial(chunks, std::vector<double>(n, 0.0));
    const int nt = resolve_workers(opt.workers);
    std::vector<Scorer::Workspace> ws(nt);
    std::vector<ResourceVector> fbuf(nt);
    for (auto& w : ws) w = scorer.make_workspace();
    parallel_for(chunks, opt.workers, [&](std::size_t c, int tid) {
        const int begin = static_cast<int>(c * m / chunks);
        const int end = static_cast<int>((c + 1) * m / chunks);
        for (int u = begin; u < end; ++u) {
            if (g.user_degree(u) == 0) continue;
            scorer.score_into(u, fbuf[tid], ws[tid]);
            for (int i = 0; i < n; ++i) partial[c][i] += fbuf[tid][i];
        }
    });
    std::vector<double> mean_score(n, 0.0);
    for (int c = 0; c < chunks; ++c)
        for (int i = 0; i < n; ++i) mean_score[i] += partial[c][i];
    for (int i = 0; i < n; ++i) mean_score[i] /= static_cast<double>(m);

    // items ordered by degree, grouped into logarithmic buckets
    std::vector<int> items;
    for (int i = 0; i < n; ++i)
        if (g.item_degree(i) > 0) items.push_back(i);
    std::sort(items.begin(), items.end(),
              [&](int a, int b) { return g.item_degree(a) != g.item_degree(b)
                                             ? g.item_degree(a) < g.item_degree(b)
                                             : a < b; });
    struct Bucket {
        double deg_sum = 0.0, score_sum = 0.0;
        int count = 0;
    };
    std::vector<Bucket> buckets;
    double bucket_lo = 0.0;
    for (int it : items) {
        const int k = g.item_degree(it);
        if (buckets.empty() ||
            (k >= bucket_lo * opt.bucket_ratio && buckets.back().count >= opt.min_bucket_items)) {
            buckets.push_back({});
            bucket_lo = k;
        }
        buckets.back().deg_sum += k;
        buckets.back().score_sum += mean_score[it];
        ++buckets.back().count;
    }
    if (!buckets.empty() && buckets.back().count < opt.min_bucket_items && buckets.size() > 1) {
        const Bucket tail = buckets.back();
        buckets.pop_back();
        buckets.back().deg_sum += tail.deg_sum;
        buckets.back().score_sum += tail.score_sum;
        buckets.back().count += tail.count;
    }
    if (static_cast<int>(buckets.size()) < opt.min_buckets)
        throw std::runtime_error("verify_scaling_exponent: only " + std::to_string(buckets.size()) +
                                 " populated degree buckets");

    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (const auto& b : buckets) {
        const double x = std::log(b.deg_sum / b.count);
        const double y = std::log(b.score_sum / b.count);
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
    }
    const double nb = static_cast<double>(buckets.size());
    return (nb * sxy - sx * sy) / (nb * sxx - sx * sx);
}

// Full calibration artifact: the sweep, its rescaled collapse, the fitted
// curve, and the ready-to-run DCB spec carrying the training graph's item
// degree bounds.
struct CalibrationResult {
    std::vector<SweepPoint> sweep;
    std::vector<RescaledPoint> rescaled;
    FitResult fit;
    AlgorithmSpec spec;
};

inline CalibrationResult calibrate_dcb_full(const BipartiteGraph& g,
                                            const std::vector<double>& lambda_grid,
                                            const std::vector<int>& L_set, std::uint64_t seed,
                                            int workers = 0, int limit_users = 0,
                                            int random_starts = 32) {
    CalibrationResult out;
    out.sweep = sweep_mean_degree(g, lambda_grid, L_set, limit_users, workers);
    out.rescaled = rescale(out.sweep);
    std::vector<std::pair<double, double>> pts;
    pts.reserve(out.rescaled.size());
    for (const auto& p : out.rescaled) pts.push_back({p.k_tilde, p.lambda_tilde});
    out.fit = fit_double_exponential(pts, random_starts, seed);
    double lo = out.sweep[0].mean_degree, hi = lo;
    for (const auto& p : out.sweep) {
        lo = std::min(lo, p.mean_degree);
        hi = std::max(hi, p.mean_degree);
    }
    out.fit.k_min = lo;
    out.fit.k_max = hi;
    const auto [dlo, dhi] = g.item_degree_bounds();
    out.spec = AlgorithmSpec::dcb(out.fit.coeffs, dlo, dhi);
    return out;
}

inline AlgorithmSpec calibrate_dcb(const BipartiteGraph& g, const std::vector<double>& lambda_grid,
                                   const std::vector<int>& L_set, std::uint64_t seed,
                                   int workers = 0) {
    return calibrate_dcb_full(g, lambda_grid, L_set, seed, workers).spec;
}

}  // namespace diffrec
