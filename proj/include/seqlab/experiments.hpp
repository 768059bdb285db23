#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "seqlab/consistency.hpp"
#include "seqlab/nn.hpp"
#include "seqlab/signals.hpp"
#include "seqlab/train.hpp"

namespace seqlab {

// Knobs that differ between quick desk-scale runs and the full protocol.
struct ExperimentScale {
    std::string name = "desk";
    std::size_t windows_per_kind = 400;  // gen-data windows per signal kind
    std::size_t train_windows = 800;     // dataset size for one training run
    std::size_t epochs = 10;
    std::size_t trials = 100;            // evaluation windows
    std::vector<double> ratio_fracs = {0.1, 0.5, 0.9};  // n1/n grid
};

ExperimentScale desk_scale();
ExperimentScale paper_scale();

struct ExperimentConfig {
    SignalConfig sine = default_sine_config();
    SignalConfig trapezoid = default_trapezoid_config();
    std::size_t m = 70;
    std::size_t k = 10;
    std::vector<std::size_t> kp_values = {10, 40};
    std::vector<std::size_t> n_grid = {50, 100, 220};
    std::size_t n = 50;   // single-model commands
    std::size_t n1 = 0;   // 0 means n/2
    std::vector<SignalKind> signals = {SignalKind::sine, SignalKind::trapezoid};
    TrainConfig train;
    ExperimentScale scale = desk_scale();
    std::uint64_t seed = 0;
    std::string out_dir = "out";

    const SignalConfig& signal(SignalKind kind) const {
        return kind == SignalKind::sine ? sine : trapezoid;
    }
};

std::string config_to_json(const ExperimentConfig& config);
ExperimentConfig config_from_json(const std::string& text);

// n1 grid for a neuron budget n: ratio fractions rounded to integers,
// clamped so n2 = n - n1 >= 1, deduplicated, ascending.
std::vector<std::size_t> ratio_grid(std::size_t n, const std::vector<double>& fracs);

// Single-kind training dataset for one sweep cell (seeded independently of
// the evaluation series).
Dataset cell_dataset(const ExperimentConfig& config, SignalKind kind);

// Fresh series for evaluation: same signal constants, independent noise draw.
Series eval_series(const ExperimentConfig& config, SignalKind kind, std::size_t kp_max);

Seq2SeqModel train_seq2seq_cell(const ExperimentConfig& config, SignalKind kind,
                                std::size_t n, std::size_t n1, const Dataset& dataset,
                                TrainHistory* history = nullptr);
MlModel train_ml_cell(const ExperimentConfig& config, SignalKind kind, std::size_t n,
                      const Dataset& dataset, TrainHistory* history = nullptr);

// Multi-round traditional engine and closed-loop rollout as PredictFn
// (horizon must be a multiple of k for the traditional engine).
PredictFn traditional_engine(const Seq2SeqModel& model, std::size_t k);
PredictFn ml_engine(const MlModel& model);

EvalReport evaluate_engine(const ExperimentConfig& config, const PredictFn& engine,
                           const Series& series, std::size_t kp,
                           const std::string& rng_tag);

struct SweepRow {
    std::string experiment;
    SignalKind kind = SignalKind::sine;
    std::size_t n = 0;
    std::size_t n1 = 0;  // 0 for ML rows
    std::size_t n2 = 0;
    double r = 0.0;      // n1/n2; NaN for ML rows
    double ln_r = 0.0;
    std::size_t kp = 0;
    double mean_e = 0.0;
    double std_e = 0.0;
    std::uint64_t seed = 0;
};

std::vector<SweepRow> run_ratio_sweep(const ExperimentConfig& config,
                                      const std::string& experiment_id);
std::vector<SweepRow> run_compare_ml(const ExperimentConfig& config);

void save_sweep_csv(const std::vector<SweepRow>& rows, const std::string& path);

// Simple static line chart: one polyline per group key, x/y from each row.
struct SvgSeries {
    std::string label;
    std::vector<std::pair<double, double>> points;
};
void save_line_chart_svg(const std::vector<SvgSeries>& series, const std::string& title,
                         const std::string& x_label, const std::string& y_label,
                         const std::string& path);

// Subcommand bodies; each writes its artifacts under config.out_dir.
void cmd_gen_data(const ExperimentConfig& config);
void cmd_train(const ExperimentConfig& config, const std::string& arch,
               const std::string& dataset_path);
void cmd_sweep_ratio(const ExperimentConfig& config);
void cmd_sweep_n1(const ExperimentConfig& config);
void cmd_compare_ml(const ExperimentConfig& config);
void cmd_trajectories(const ExperimentConfig& config);
void cmd_consistency(const ExperimentConfig& config, const std::string& model_path,
                     bool tune, std::size_t tune_steps, std::size_t harvest_limit);
// Returns the worst discrepancy over a batch of random tiny models.
double cmd_grad_check(const ExperimentConfig& config, std::size_t models_per_arch);

void ensure_dir(const std::string& path);
void write_text_file(const std::string& path, const std::string& text);

}  // namespace seqlab
