// Experiment driver: ingest -> split -> calibrate -> run -> figure data.

#include <cstdint>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "diffrec/commands.hpp"

int main(int argc, char** argv) {
    CLI::App app{"diffrec: diffusion-based recommendation on bipartite networks"};
    app.fallthrough();
    app.require_subcommand(1);

    diffrec::ExperimentConfig cfg;
    std::int64_t single_seed = -1;

    app.set_config("--config", "", "key = value configuration file (flags override)");

    app.add_option("--dataset", cfg.dataset, "ratings file (delimiter-separated)");
    app.add_option("--delimiter", cfg.delimiter, "tab|comma|space|semicolon|pipe or a single char");
    app.add_option("--user-col", cfg.user_col, "0-based user column");
    app.add_option("--item-col", cfg.item_col, "0-based item column");
    app.add_option("--rating-col", cfg.rating_col, "0-based rating column");
    app.add_option("--rating-min", cfg.rating_min, "rating scale lower bound");
    app.add_option("--rating-max", cfg.rating_max, "rating scale upper bound");
    app.add_option("--threshold", cfg.threshold, "coarse-graining threshold (keep rating >= t)");
    app.add_option("--remove-top-items", cfg.remove_top_items,
                   "drop links of the N highest-degree items before splitting");

    app.add_option("--fraction", cfg.test_fraction, "held-out probe fraction");
    app.add_option("--seeds", cfg.split_seeds, "split seeds (one run per seed)")
        ->delimiter(',');
    app.add_option("--seed", single_seed, "single split seed (overrides --seeds)");

    app.add_option("--algo", cfg.algos, "algorithms: PBS HTS HHP OHHP DCB")->delimiter(',');
    app.add_option("--hhp-lambda", cfg.hhp_lambda, "fixed HHP lambda (< 0: grid-optimal by r)");
    app.add_option("--ohhp-gamma", cfg.ohhp_gamma, "fixed OHHP gamma (< 0: grid-optimal by r)");
    app.add_option("--lambda-grid", cfg.lambda_grid, "lambda grid")->delimiter(',');
    app.add_option("--gamma-grid", cfg.gamma_grid, "gamma grid")->delimiter(',');

    app.add_option("--calib-L-set", cfg.calib_L_set, "list lengths pooled by the DCB sweep")
        ->delimiter(',');
    app.add_option("--calib-seed", cfg.calib_seed, "fit multi-start seed");
    app.add_option("--fit-starts", cfg.fit_starts, "random starts for the fit");
    app.add_option("--dcb-fit", cfg.dcb_fit_file, "reuse a persisted dcb_fit.json");

    app.add_option("--L", cfg.L, "recommendation list length");
    app.add_option("--k-cold", cfg.k_cold, "cold-item degree bound for r_k<=K / P_k<=K");
    app.add_option("--sweep-L", cfg.sweep_L, "L values for the sweep-L command")->delimiter(',');
    app.add_option("--sample-seed", cfg.sample_seed, "seed for sampled pair loops");
    app.add_option("--inter-exact-pair-limit", cfg.inter_exact_pair_limit,
                   "max user pairs evaluated exactly for D_inter");
    app.add_option("--inter-sample-pairs", cfg.inter_sample_pairs,
                   "sampled pairs beyond the exact limit");

    app.add_option("--synth-users", cfg.synth_users, "synthetic graph users");
    app.add_option("--synth-items", cfg.synth_items, "synthetic graph items");
    app.add_option("--synth-nu", cfg.synth_nu, "power-law exponent");
    app.add_option("--synth-mean-degree", cfg.synth_mean_degree, "target mean item degree");
    app.add_option("--synth-lambdas", cfg.synth_lambdas, "lambdas checked against the slope")
        ->delimiter(',');
    app.add_option("--synth-seeds", cfg.synth_seeds, "number of synthetic seeds");
    app.add_option("--synth-seed-base", cfg.synth_seed_base, "first synthetic seed");
    app.add_option("--synth-tolerance", cfg.synth_tolerance, "allowed |slope - lambda|");

    app.add_option("--workers", cfg.workers, "worker threads (0 = hardware)");
    app.add_option("--out", cfg.out_dir, "output directory");
    app.add_flag("--dump-recommendations", cfg.dump_recommendations,
                 "write per-algorithm top-L dump files from run");

    auto* ingest = app.add_subcommand("ingest", "parse, coarse-grain, and index a ratings file");
    auto* split_cmd = app.add_subcommand("split", "write train/probe link files per seed");
    auto* calibrate = app.add_subcommand("calibrate", "DCB sweep, rescale, fit; fig1/2/4 data");
    auto* run = app.add_subcommand("run", "evaluate algorithms across seeds; report + tables");
    auto* sweep_l = app.add_subcommand("sweep-L", "diversity vs list length; fig5/6 data");
    auto* synth = app.add_subcommand("synth-check", "scaling-law check on synthetic graphs");

    CLI11_PARSE(app, argc, argv);
    cfg.normalize();
    if (single_seed >= 0) cfg.split_seeds = {static_cast<std::uint64_t>(single_seed)};

    const auto dispatch = [&](const char* stage, int (*fn)(const diffrec::ExperimentConfig&)) {
        try {
            return fn(cfg);
        } catch (const std::exception& e) {
            std::cerr << "diffrec " << stage << " failed: " << e.what() << '\n';
            return 1;
        }
    };

    if (ingest->parsed()) return dispatch("ingest", diffrec::cmd_ingest);
    if (split_cmd->parsed()) return dispatch("split", diffrec::cmd_split);
    if (calibrate->parsed()) return dispatch("calibrate", diffrec::cmd_calibrate);
    if (run->parsed()) return dispatch("run", diffrec::cmd_run);
    if (sweep_l->parsed()) return dispatch("sweep-L", diffrec::cmd_sweep_l);
    if (synth->parsed()) return dispatch("synth-check", diffrec::cmd_synth_check);
    return 1;
}
