#pragma once

#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include "seqlab/nn.hpp"
#include "seqlab/signals.hpp"

namespace seqlab {

// Gradients are shape-congruent with the model they belong to, so the model
// structs double as cotangent holders.
Seq2SeqModel zeros_like(const Seq2SeqModel& model);
MlModel zeros_like(const MlModel& model);
RnnCellParams zeros_like(const RnnCellParams& cell);

// Flat views over every trainable scalar, in a fixed documented order
// (w_in, w_rec, b per cell; then predictor w, b).
std::vector<std::span<double>> param_views(RnnCellParams& cell);
std::vector<std::span<double>> param_views(PredictorParams& p);
std::vector<std::span<double>> param_views(Seq2SeqModel& model);
std::vector<std::span<double>> param_views(MlModel& model);
std::size_t param_count(const std::vector<std::span<double>>& views);

struct TrainConfig {
    std::size_t epochs = 50;
    std::size_t batch_size = 32;
    double learning_rate = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;
    double validation_fraction = 0.2;
    std::uint64_t seed = 0;
    bool shuffle = true;
    double clip_norm = 0.0;  // 0 disables gradient clipping
};

struct AdamState {
    std::vector<double> m;  // first moments, flat over param_views order
    std::vector<double> v;  // second moments
    std::uint64_t t = 0;

    static AdamState for_params(const std::vector<std::span<double>>& views);
};

// One bias-corrected Adam update; grads viewed in the same order as params.
void adam_step(std::vector<std::span<double>> params,
               const std::vector<std::span<double>>& grads, AdamState& state,
               const TrainConfig& config);

// (1/k) * sum_i ||pred_i - truth_i||^2
double loss_mse(const std::vector<Vec>& pred, const std::vector<Vec>& truth);

// Loss and exact reverse-mode gradients of the traditional engine.  Credit
// flows through the replicated context s_m back into the encoder.
std::pair<double, Seq2SeqModel> bptt_seq2seq(const Seq2SeqModel& model,
                                             const Sample& sample);

// Loss and gradients of the closed-loop rollout.  Gradients flow through both
// the fed-back prediction and the carried state at every rollout step.
std::pair<double, MlModel> bptt_ml(const MlModel& model, const Sample& sample);

struct EpochStats {
    double train_loss = 0.0;
    double val_loss = 0.0;
};

struct TrainHistory {
    std::vector<EpochStats> epochs;
};

TrainHistory train(Seq2SeqModel& model, const Dataset& dataset,
                   const TrainConfig& config);
TrainHistory train(MlModel& model, const Dataset& dataset, const TrainConfig& config);

// Central finite differences over every parameter; returns the worst
// discrepancy |analytic - numeric| / max(1, |analytic|, |numeric|).
double grad_check(const Seq2SeqModel& model, const Sample& sample, double epsilon);
double grad_check(const MlModel& model, const Sample& sample, double epsilon);

void save_history_csv(const TrainHistory& history, const std::string& path);

}  // namespace seqlab
