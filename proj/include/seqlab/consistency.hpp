#pragma once

#include <string>
#include <vector>

#include "seqlab/nn.hpp"
#include "seqlab/signals.hpp"
#include "seqlab/train.hpp"

namespace seqlab {

// Hidden encoder states harvested from dataset inputs; arguments of the
// decoder-dependence equation.
struct HiddenStateSet {
    std::vector<Vec> states;         // each dim n1
    std::vector<std::size_t> origin;  // dataset sample index per state
};

struct ConsistencyReport {
    std::vector<double> residual_norms;
    double mean = 0.0;
    double median = 0.0;
    double max = 0.0;
    double q25 = 0.0;
    double q75 = 0.0;
    std::size_t count = 0;
};

// F2(s, F2(s,0)) - F2(F1(P(F2(s,0)), s), 0), the defect of the functional
// relation tying the decoder to the encoder and predictor.
Vec residual(const Seq2SeqModel& model, const Vec& s);

// Encode up to `limit` dataset inputs and collect final states s_m.  With
// include_rollout_states, also collects the states s_i for m <= i <= m+k-1
// reached by feeding the targets onward.
HiddenStateSet harvest_states(const Seq2SeqModel& model, const Dataset& dataset,
                              std::size_t limit, bool include_rollout_states = false);

ConsistencyReport consistency_stats(const Seq2SeqModel& model,
                                    const HiddenStateSet& states);

struct RoundIdentityReport {
    // |nested form - round mechanics| for the round-1 second prediction and
    // the round-2 first prediction; algebraic identities of the algorithm.
    double path_gap_first = 0.0;
    double path_gap_second = 0.0;
    // |x_{m+2} round 1 - x_{m+2} round 2|: zero only for an ideally trained
    // network.
    double cross_round_gap = 0.0;
};

RoundIdentityReport verify_round_identities(const Seq2SeqModel& model,
                                            const std::vector<Vec>& xs);

struct TuneResult {
    std::vector<double> objective_history;  // mean ||residual||^2 per step
};

// Adam on the mean squared residual norm over the harvested states; only the
// decoder moves, encoder and predictor stay fixed.
TuneResult tune_decoder(Seq2SeqModel& model, const HiddenStateSet& states,
                        std::size_t steps, const TrainConfig& config);

// Decoder gradient of the mean squared residual objective (exposed for
// finite-difference checks).
std::pair<double, RnnCellParams> residual_objective_grad(const Seq2SeqModel& model,
                                                         const HiddenStateSet& states);

void save_consistency_csv(const ConsistencyReport& report, const std::string& path);
std::string consistency_summary_json(const ConsistencyReport& report);

}  // namespace seqlab
