#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <iostream>
#include <limits>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "diffrec/calibrate.hpp"
#include "diffrec/evaluate.hpp"
#include "diffrec/ingest.hpp"
#include "diffrec/io.hpp"

namespace diffrec {

// Everything a pipeline run needs; populated from CLI flags and/or a
// key = value config file, CLI taking precedence. All randomness flows from
// the named seeds here.
struct ExperimentConfig {
    // dataset
    std::string dataset;
    std::string delimiter = "tab";  // tab | comma | space | semicolon | pipe | single char
    int user_col = 0;
    int item_col = 1;
    int rating_col = 2;
    int rating_min = 1;
    int rating_max = 5;
    int threshold = 3;
    int remove_top_items = 0;

    // split
    double test_fraction = 0.1;
    std::vector<std::uint64_t> split_seeds = {1, 2, 3, 4, 5};

    // algorithms; HHP/OHHP parameters < 0 mean grid-optimal by ranking score
    std::vector<std::string> algos = {"PBS", "HHP", "OHHP", "DCB"};
    double hhp_lambda = -1.0;
    double ohhp_gamma = -1.0;
    std::vector<double> lambda_grid;         // default filled in normalize()
    std::vector<double> gamma_grid = {0.25, 0.5, 0.75, 1.0, 1.5, 2.0};

    // DCB calibration
    std::vector<int> calib_L_set = {10, 20, 30, 40, 50};
    std::uint64_t calib_seed = 7;
    int fit_starts = 32;
    std::string dcb_fit_file;  // reuse a persisted fit instead of calibrating

    // evaluation
    int L = 50;
    int k_cold = 10;
    std::vector<int> sweep_L = {10, 20, 30, 40, 50};
    std::uint64_t sample_seed = 99;
    std::uint64_t inter_exact_pair_limit = 4000000;
    std::uint64_t inter_sample_pairs = 1000000;

    // synthetic scaling check
    int synth_users = 2000;
    int synth_items = 2000;
    double synth_nu = 3.0;
    double synth_mean_degree = 10.0;
    std::vector<double> synth_lambdas = {0.25, 0.5, 0.75};
    int synth_seeds = 5;
    std::uint64_t synth_seed_base = 1000;
    double synth_tolerance = 0.15;

    // execution
    int workers = 0;
    std::string out_dir = "out";
    bool dump_recommendations = false;  // per-algo top-L dump files from cmd_run

    void normalize() {
        if (lambda_grid.empty())
            for (int i = 0; i <= 20; ++i) lambda_grid.push_back(i * 0.05);
    }
};

namespace detail {

template <typename T>
std::string join(const std::vector<T>& v) {
    std::string s;
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (i) s += ',';
        if constexpr (std::is_same_v<T, double>) s += format_double(v[i]);
        else if constexpr (std::is_same_v<T, std::string>) s += v[i];
        else s += std::to_string(v[i]);
    }
    return s;
}

}  // namespace detail

// Fixed-order serialization; the digest of this string stamps every report.
inline std::string canonical_config(const ExperimentConfig& c) {
    std::ostringstream s;
    s << "dataset=" << c.dataset << '\n'
      << "delimiter=" << c.delimiter << '\n'
      << "columns=" << c.user_col << ',' << c.item_col << ',' << c.rating_col << '\n'
      << "rating_scale=" << c.rating_min << ',' << c.rating_max << '\n'
      << "threshold=" << c.threshold << '\n'
      << "remove_top_items=" << c.remove_top_items << '\n'
      << "test_fraction=" << format_double(c.test_fraction) << '\n'
      << "split_seeds=" << detail::join(c.split_seeds) << '\n'
      << "algos=" << detail::join(c.algos) << '\n'
      << "hhp_lambda=" << format_double(c.hhp_lambda) << '\n'
      << "ohhp_gamma=" << format_double(c.ohhp_gamma) << '\n'
      << "lambda_grid=" << detail::join(c.lambda_grid) << '\n'
      << "gamma_grid=" << detail::join(c.gamma_grid) << '\n'
      << "calib_L_set=" << detail::join(c.calib_L_set) << '\n'
      << "calib_seed=" << c.calib_seed << '\n'
      << "fit_starts=" << c.fit_starts << '\n'
      << "dcb_fit_file=" << c.dcb_fit_file << '\n'
      << "L=" << c.L << '\n'
      << "k_cold=" << c.k_cold << '\n'
      << "sweep_L=" << detail::join(c.sweep_L) << '\n'
      << "sample_seed=" << c.sample_seed << '\n'
      << "inter_exact_pair_limit=" << c.inter_exact_pair_limit << '\n'
      << "inter_sample_pairs=" << c.inter_sample_pairs << '\n'
      << "synth=" << c.synth_users << 'x' << c.synth_items << ",nu="
      << format_double(c.synth_nu) << ",mean=" << format_double(c.synth_mean_degree)
      << ",lambdas=" << detail::join(c.synth_lambdas) << ",seeds=" << c.synth_seeds
      << ",base=" << c.synth_seed_base << ",tol=" << format_double(c.synth_tolerance) << '\n'
      << "dump_recommendations=" << (c.dump_recommendations ? 1 : 0) << '\n';
    return s.str();
}

inline std::string config_digest(const ExperimentConfig& c) { return fnv1a_hex(canonical_config(c)); }

inline char resolve_delimiter(const std::string& name) {
    if (name == "tab" || name == "\\t") return '\t';
    if (name == "comma") return ',';
    if (name == "space") return ' ';
    if (name == "semicolon") return ';';
    if (name == "pipe") return '|';
    if (name.size() == 1) return name[0];
    throw std::invalid_argument("unknown delimiter name: " + name);
}

inline RatingsFormat ratings_format(const ExperimentConfig& c) {
    RatingsFormat f;
    f.delimiter = resolve_delimiter(c.delimiter);
    f.user_col = c.user_col;
    f.item_col = c.item_col;
    f.rating_col = c.rating_col;
    f.rating_min = c.rating_min;
    f.rating_max = c.rating_max;
    return f;
}

// parse -> index -> optional RYM-style top-item removal
inline Dataset load_dataset(const ExperimentConfig& c) {
    if (c.dataset.empty()) throw std::invalid_argument("no dataset path configured");
    const auto records = parse_ratings_file(c.dataset, ratings_format(c));
    Dataset ds = index_records(records, c.threshold);
    if (c.remove_top_items > 0)
        ds.links = remove_top_degree_items(ds.links, c.remove_top_items, ds.num_items());
    return ds;
}

inline EvalOptions eval_options(const ExperimentConfig& c) {
    EvalOptions o;
    o.L = c.L;
    o.k_cold = c.k_cold;
    o.workers = c.workers;
    o.inter_exact_pair_limit = c.inter_exact_pair_limit;
    o.inter_sample_pairs = c.inter_sample_pairs;
    o.sample_seed = c.sample_seed;
    return o;
}

// Grid-optimal HHP lambda by probe ranking score (the tuning rule the
// comparison tables assume).
inline double best_hhp_lambda(const BipartiteGraph& train, const std::vector<Link>& probe,
                              const std::vector<double>& grid, int workers,
                              double* best_r_out = nullptr) {
    double best_lambda = grid.at(0);
    double best_r = std::numeric_limits<double>::infinity();
    for (double lambda : grid) {
        const double r = mean_ranking_score(train, probe, AlgorithmSpec::hhp(lambda), workers);
        if (r < best_r) {
            best_r = r;
            best_lambda = lambda;
        }
    }
    if (best_r_out) *best_r_out = best_r;
    return best_lambda;
}

inline double best_ohhp_gamma(const BipartiteGraph& train, const std::vector<Link>& probe,
                              const std::vector<double>& grid, int k_max, int workers,
                              double* best_r_out = nullptr) {
    double best_gamma = grid.at(0);
    double best_r = std::numeric_limits<double>::infinity();
    for (double gamma : grid) {
        const double r = mean_ranking_score(train, probe, AlgorithmSpec::ohhp(gamma, k_max), workers);
        if (r < best_r) {
            best_r = r;
            best_gamma = gamma;
        }
    }
    if (best_r_out) *best_r_out = best_r;
    return best_gamma;
}

inline AlgorithmSpec dcb_spec_from_json(const nlohmann::ordered_json& j) {
    return AlgorithmSpec::dcb({j.at("a").get<double>(), j.at("b").get<double>(),
                               j.at("c").get<double>(), j.at("d").get<double>()},
                              j.at("item_k_min").get<int>(), j.at("item_k_max").get<int>());
}

// One algorithm resolved on one split.
struct ResolvedAlgo {
    std::string label;  // base name: PBS, HTS, HHP, OHHP, DCB
    AlgorithmSpec spec;
    double tuned_param = std::numeric_limits<double>::quiet_NaN();
};

inline ResolvedAlgo resolve_algorithm(const std::string& name, const ExperimentConfig& cfg,
                                      const SplitDataset& sd) {
    ResolvedAlgo out;
    out.label = name;
    if (name == "PBS") {
        out.spec = AlgorithmSpec::pbs();
    } else if (name == "HTS") {
        out.spec = AlgorithmSpec::hts();
    } else if (name == "HHP") {
        const double lambda = cfg.hhp_lambda >= 0.0
                                  ? cfg.hhp_lambda
                                  : best_hhp_lambda(sd.train, sd.probe, cfg.lambda_grid, cfg.workers);
        out.spec = AlgorithmSpec::hhp(lambda);
        out.tuned_param = lambda;
    } else if (name == "OHHP") {
        const auto [klo, khi] = sd.train.item_degree_bounds();
        const double gamma = cfg.ohhp_gamma >= 0.0
                                 ? cfg.ohhp_gamma
                                 : best_ohhp_gamma(sd.train, sd.probe, cfg.gamma_grid, khi, cfg.workers);
        out.spec = AlgorithmSpec::ohhp(gamma, khi);
        out.tuned_param = gamma;
    } else if (name == "DCB") {
        if (!cfg.dcb_fit_file.empty()) {
            out.spec = dcb_spec_from_json(read_json_file(cfg.dcb_fit_file));
        } else {
            out.spec = calibrate_dcb(sd.train, cfg.lambda_grid, cfg.calib_L_set, cfg.calib_seed,
                                     cfg.workers);
        }
    } else {
        throw std::invalid_argument("unknown algorithm: " + name);
    }
    return out;
}

// ---------------------------------------------------------------------------
// reporting helpers

namespace detail {

inline double mean_of(const std::vector<double>& v) {
    double s = 0.0;
    for (double x : v) s += x;
    return v.empty() ? std::numeric_limits<double>::quiet_NaN() : s / static_cast<double>(v.size());
}

inline double std_of(const std::vector<double>& v) {
    if (v.size() < 2) return 0.0;
    const double m = mean_of(v);
    double s = 0.0;
    for (double x : v) s += (x - m) * (x - m);
    return std::sqrt(s / static_cast<double>(v.size() - 1));
}

inline std::string fixed(double v, int digits) {
    if (std::isnan(v)) return "n/a";
    char buf[48];
    std::snprintf(buf, sizeof buf, "%.*f", digits, v);
    return buf;
}

inline nlohmann::ordered_json json_or_null(double v) {
    if (std::isnan(v)) return nullptr;
    return v;
}

}  // namespace detail

// Per-algorithm metric series across split seeds.
struct MetricSeries {
    std::string label;
    std::vector<double> tuned_param;  // NaN when not applicable
    std::vector<double> r, r_cold, P, P_cold, D_inter, D_inner;
    // pooled by exact degree over all seeds
    std::map<int, double> r_k_sum;          // sum of per-link scores
    std::map<int, std::size_t> r_k_count;
    std::map<int, double> P_k_sum;          // sum of per-seed P_k values
    std::map<int, std::size_t> fig3_counts;  // list entries by degree
    std::size_t fig3_total = 0;
    std::size_t probe_links = 0, probe_skipped = 0;

    void add(const EvaluationReport& rep, double tuned,
             const std::vector<RecommendationList>& lists, const BipartiteGraph& train) {
        tuned_param.push_back(tuned);
        r.push_back(rep.r);
        r_cold.push_back(rep.r_cold);
        P.push_back(rep.P);
        P_cold.push_back(rep.P_cold);
        D_inter.push_back(rep.D_inter);
        D_inner.push_back(rep.D_inner);
        for (const auto& [k, mean] : rep.r_k) {
            const auto cnt = rep.r_k_count.at(k);
            r_k_sum[k] += mean * static_cast<double>(cnt);
            r_k_count[k] += cnt;
        }
        for (const auto& [k, v] : rep.P_k) P_k_sum[k] += v;
        for (const auto& l : lists)
            for (int it : l.items) {
                ++fig3_counts[train.item_degree(it)];
                ++fig3_total;
            }
        probe_links += rep.probe_links;
        probe_skipped += rep.probe_skipped;
    }
};

// the six comparison-table column values, seed-averaged
struct TableRow {
    double r, r_cold, P, P_cold, D_inter, D_inner;
};

inline TableRow mean_row(const MetricSeries& s) {
    return {detail::mean_of(s.r),       detail::mean_of(s.r_cold), detail::mean_of(s.P),
            detail::mean_of(s.P_cold),  detail::mean_of(s.D_inter), detail::mean_of(s.D_inner)};
}

// improvement-table presentation: positive percentage whenever DCB wins.
// r and r_k
// improve downward, the other four upward.
inline double presentation_delta(double q_alg, double q_dcb, bool lower_is_better) {
    const double d = improvement(q_alg, q_dcb);
    return 100.0 * (lower_is_better ? d : -d);
}

}  // namespace diffrec
