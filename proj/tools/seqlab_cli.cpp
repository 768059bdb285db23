// Command-line front end: data generation, training, sweeps, comparisons,
// trajectory export, consistency analysis, and gradient checking.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "seqlab/experiments.hpp"

namespace {

using namespace seqlab;

struct CliOptions {
    std::string config_path;
    std::uint64_t seed = 0;
    bool seed_set = false;
    std::string out_dir;
    bool desk = false;
    bool paper = false;
    std::string arch = "seq2seq";
    std::string signal = "both";
    std::size_t n = 0;
    std::size_t n1 = 0;
    std::size_t m = 0;
    std::size_t k = 0;
    std::vector<std::size_t> kp;
    std::size_t trials = 0;
    std::string dataset_path;
    std::string model_path;
    bool tune = false;
    std::size_t tune_steps = 200;
    std::size_t harvest_limit = 500;
    std::size_t grad_models = 20;
};

void add_common_flags(CLI::App* cmd, CliOptions& opt) {
    cmd->add_option("--config", opt.config_path, "JSON config file; flags override keys");
    cmd->add_option("--seed", opt.seed, "master seed")->each([&](const std::string&) {
        opt.seed_set = true;
    });
    cmd->add_option("--out", opt.out_dir, "output directory");
    cmd->add_flag("--desk-scale", opt.desk, "quick desk-scale protocol (default)");
    cmd->add_flag("--paper-scale", opt.paper, "full-size protocol");
    cmd->add_option("--arch", opt.arch, "seq2seq or ml")
        ->check(CLI::IsMember({"seq2seq", "ml"}));
    cmd->add_option("--signal", opt.signal, "sine, trapezoid or both")
        ->check(CLI::IsMember({"sine", "trapezoid", "both"}));
    cmd->add_option("--n", opt.n, "total neuron budget");
    cmd->add_option("--n1", opt.n1, "encoder neurons (seq2seq)");
    cmd->add_option("--m", opt.m, "input window length");
    cmd->add_option("--k", opt.k, "trained prediction length");
    cmd->add_option("--kp", opt.kp, "total predicted points (repeatable)");
    cmd->add_option("--trials", opt.trials, "evaluation windows");
}

ExperimentConfig resolve_config(const CliOptions& opt) {
    ExperimentConfig config;
    if (!opt.config_path.empty()) {
        std::ifstream in(opt.config_path);
        if (!in) throw CLI::ValidationError("--config", "cannot open " + opt.config_path);
        std::ostringstream ss;
        ss << in.rdbuf();
        config = config_from_json(ss.str());
    }
    if (opt.paper) config.scale = paper_scale();
    if (opt.desk) config.scale = desk_scale();
    if (opt.seed_set) config.seed = opt.seed;
    if (!opt.out_dir.empty()) config.out_dir = opt.out_dir;
    if (opt.n > 0) config.n = opt.n;
    if (opt.n1 > 0) config.n1 = opt.n1;
    if (opt.m > 0) config.m = opt.m;
    if (opt.k > 0) config.k = opt.k;
    if (!opt.kp.empty()) config.kp_values = opt.kp;
    if (opt.trials > 0) config.scale.trials = opt.trials;
    if (opt.signal == "sine") config.signals = {SignalKind::sine};
    else if (opt.signal == "trapezoid") config.signals = {SignalKind::trapezoid};
    else config.signals = {SignalKind::sine, SignalKind::trapezoid};
    if (config.m < 20 || config.m > 80)
        throw CLI::ValidationError("--m", "input window length must be in [20, 80]");
    return config;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"recurrent forecasting lab: traditional seq2seq vs memoryless rollout"};
    app.require_subcommand(1);

    CliOptions opt;
    CLI::App* gen = app.add_subcommand("gen-data", "synthesize series and dataset files");
    CLI::App* trn = app.add_subcommand("train", "train one model and persist it");
    trn->add_option("--dataset", opt.dataset_path, "dataset JSON-lines file");
    CLI::App* swr = app.add_subcommand("sweep-ratio", "error vs ln(n1/n2) sweep");
    CLI::App* swn = app.add_subcommand("sweep-n1", "error vs n1 sweep");
    CLI::App* cmp = app.add_subcommand("compare-ml", "traditional vs memoryless error");
    CLI::App* trj = app.add_subcommand("trajectories", "export predicted trajectories");
    CLI::App* con = app.add_subcommand("consistency", "decoder-dependence residual report");
    con->add_option("--model", opt.model_path, "seq2seq model JSON file")->required();
    con->add_flag("--tune", opt.tune, "tune the decoder against the residual");
    con->add_option("--tune-steps", opt.tune_steps, "tuning steps");
    con->add_option("--harvest", opt.harvest_limit, "hidden states to harvest");
    CLI::App* gck = app.add_subcommand("grad-check", "finite-difference gradient audit");
    gck->add_option("--models", opt.grad_models, "random tiny models per architecture");

    for (CLI::App* cmd : {gen, trn, swr, swn, cmp, trj, con, gck})
        add_common_flags(cmd, opt);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? 0 : 1;
    }

    try {
        ExperimentConfig config = resolve_config(opt);
        if (gen->parsed()) {
            cmd_gen_data(config);
        } else if (trn->parsed()) {
            cmd_train(config, opt.arch, opt.dataset_path);
        } else if (swr->parsed()) {
            cmd_sweep_ratio(config);
        } else if (swn->parsed()) {
            cmd_sweep_n1(config);
        } else if (cmp->parsed()) {
            cmd_compare_ml(config);
        } else if (trj->parsed()) {
            cmd_trajectories(config);
        } else if (con->parsed()) {
            cmd_consistency(config, opt.model_path, opt.tune, opt.tune_steps,
                            opt.harvest_limit);
        } else if (gck->parsed()) {
            const double worst = cmd_grad_check(config, opt.grad_models);
            std::printf("grad-check worst relative discrepancy: %.3e\n", worst);
            if (worst >= 1e-4) {
                std::fprintf(stderr, "grad-check FAILED (threshold 1e-4)\n");
                return 3;
            }
        }
    } catch (const CLI::Error& e) {
        std::fprintf(stderr, "config error: %s\n", e.what());
        return 1;
    } catch (const std::invalid_argument& e) {
        std::fprintf(stderr, "config error: %s\n", e.what());
        return 1;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    }
    return 0;
}
