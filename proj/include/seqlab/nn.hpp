#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "seqlab/linalg.hpp"

namespace seqlab {

// One vanilla recurrent cell: s' = tanh(w_in x + w_rec s + b).
struct RnnCellParams {
    Matrix w_in;   // n x d_in
    Matrix w_rec;  // n x n
    Vec b;         // n

    std::size_t state_dim() const { return w_rec.rows; }
    std::size_t input_dim() const { return w_in.cols; }
};

// Affine readout from a hidden state to a d-dimensional element.
struct PredictorParams {
    Matrix w;  // d x n
    Vec b;     // d
};

struct Seq2SeqDims {
    std::size_t d = 1;
    std::size_t n1 = 0;
    std::size_t n2 = 0;
    std::size_t m = 0;
    std::size_t k = 0;
};

// Two-network predictor: encoder consumes the input sequence, its final
// state is replicated into the decoder, and every decoder state is read
// out by the predictor.
struct Seq2SeqModel {
    RnnCellParams encoder;   // n1 neurons, input d
    RnnCellParams decoder;   // n2 neurons, input n1
    PredictorParams predictor;  // d x n2
    Seq2SeqDims dims;
};

struct MlDims {
    std::size_t d = 1;
    std::size_t n = 0;
    std::size_t m = 0;
    std::size_t k = 0;
};

// Memoryless predictor: a single cell whose own predictions are fed back
// as the next input.
struct MlModel {
    RnnCellParams cell;         // n neurons, input d
    PredictorParams predictor;  // d x n
    MlDims dims;
};

Vec cell_step(const RnnCellParams& cell, const Vec& x, const Vec& s);

// Full encoder pass: s_0 = 0, s_i = cell_step(x_i, s_{i-1}); returns s_1..s_m.
std::vector<Vec> encode(const RnnCellParams& encoder, const std::vector<Vec>& xs);

// Decoder pass with the context replicated at every step: sigma_0 = 0,
// sigma_i = cell_step(decoder, s_ctx, sigma_{i-1}); returns sigma_1..sigma_k.
std::vector<Vec> decode_traditional(const Seq2SeqModel& model, const Vec& s_ctx,
                                    std::size_t k);

Vec predictor_apply(const PredictorParams& p, const Vec& state);

// Encode, decode k steps from the final state, read out each decoder state.
std::vector<Vec> predict_traditional(const Seq2SeqModel& model,
                                     const std::vector<Vec>& xs, std::size_t k);

// p rounds of the expanding-window recursion: each round appends all k of
// its predictions to the input and re-encodes; returns all p*k predictions.
std::vector<Vec> predict_traditional_rounds(const Seq2SeqModel& model,
                                            const std::vector<Vec>& xs,
                                            std::size_t k, std::size_t p);

// Single-step expanding-window rounds: round j+1 appends only the FIRST
// prediction of round j.  Returns each round's full k-element prediction
// list.  This is the variant the round-identity checks are written against.
std::vector<std::vector<Vec>> ew_single_step_rounds(const Seq2SeqModel& model,
                                                    const std::vector<Vec>& xs,
                                                    std::size_t k,
                                                    std::size_t rounds);

// Closed-loop rollout: encode the input with the single cell, then feed each
// prediction back as the next input.  Only the current state is carried.
std::vector<Vec> ml_rollout(const MlModel& model, const std::vector<Vec>& xs,
                            std::size_t horizon);

// Weight init: uniform in [-1/sqrt(fan_in), +1/sqrt(fan_in)], biases zero.
RnnCellParams init_cell(std::size_t n, std::size_t d_in, Rng& rng);
PredictorParams init_predictor(std::size_t d, std::size_t n, Rng& rng);
Seq2SeqModel init_seq2seq(const Seq2SeqDims& dims, Rng& rng);
MlModel init_ml(const MlDims& dims, Rng& rng);

// JSON model files; round-trip is exact for finite doubles.
std::string to_json(const Seq2SeqModel& model);
std::string to_json(const MlModel& model);
Seq2SeqModel seq2seq_from_json(const std::string& text);
MlModel ml_from_json(const std::string& text);
void save_model(const Seq2SeqModel& model, const std::string& path);
void save_model(const MlModel& model, const std::string& path);
// Reads the arch tag without committing to a model type.
std::string model_arch_in_file(const std::string& path);
Seq2SeqModel load_seq2seq(const std::string& path);
MlModel load_ml(const std::string& path);

}  // namespace seqlab
