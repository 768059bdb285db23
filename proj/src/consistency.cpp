#include "seqlab/consistency.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include <json.hpp>

namespace seqlab {

Vec residual(const Seq2SeqModel& model, const Vec& s) {
    if (s.size() != model.decoder.input_dim())
        throw std::invalid_argument("residual: state dim must equal n1");
    const Vec zero(model.decoder.state_dim(), 0.0);
    Vec u = cell_step(model.decoder, s, zero);          // F2(s, 0)
    Vec lhs = cell_step(model.decoder, s, u);           // F2(s, F2(s, 0))
    Vec q = predictor_apply(model.predictor, u);        // P(F2(s, 0))
    Vec h = cell_step(model.encoder, q, s);             // F1(P(F2(s, 0)), s)
    Vec rhs = cell_step(model.decoder, h, zero);        // F2(F1(...), 0)
    Vec r(lhs.size());
    for (std::size_t i = 0; i < r.size(); ++i) r[i] = lhs[i] - rhs[i];
    return r;
}

HiddenStateSet harvest_states(const Seq2SeqModel& model, const Dataset& dataset,
                              std::size_t limit, bool include_rollout_states) {
    if (limit < 1) throw std::invalid_argument("harvest_states: limit must be >= 1");
    if (dataset.samples.empty())
        throw std::invalid_argument("harvest_states: empty dataset");
    HiddenStateSet set;
    const std::size_t n = std::min(limit, dataset.samples.size());
    for (std::size_t i = 0; i < n; ++i) {
        const Sample& sample = dataset.samples[i];
        std::vector<Vec> states = encode(model.encoder, sample.input);
        Vec s = states.back();
        set.states.push_back(s);
        set.origin.push_back(i);
        if (include_rollout_states) {
            // continue the recursion over the ground-truth continuation,
            // collecting s_{m+1} .. s_{m+k-1}
            for (std::size_t j = 0; j + 1 < sample.target.size(); ++j) {
                s = cell_step(model.encoder, sample.target[j], s);
                set.states.push_back(s);
                set.origin.push_back(i);
            }
        }
    }
    return set;
}

namespace {

double quantile(std::vector<double> sorted, double q) {
    if (sorted.empty()) return 0.0;
    const double pos = q * double(sorted.size() - 1);
    const std::size_t lo = std::size_t(pos);
    const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
    const double frac = pos - double(lo);
    return sorted[lo] * (1.0 - frac) + sorted[hi] * frac;
}

}  // namespace

ConsistencyReport consistency_stats(const Seq2SeqModel& model,
                                    const HiddenStateSet& states) {
    if (states.states.empty())
        throw std::invalid_argument("consistency_stats: empty state set");
    ConsistencyReport report;
    report.residual_norms.reserve(states.states.size());
    double sum = 0.0;
    for (const Vec& s : states.states) {
        const double nrm = norm2(residual(model, s));
        report.residual_norms.push_back(nrm);
        sum += nrm;
        report.max = std::max(report.max, nrm);
    }
    report.count = report.residual_norms.size();
    report.mean = sum / double(report.count);
    std::vector<double> sorted = report.residual_norms;
    std::sort(sorted.begin(), sorted.end());
    report.median = quantile(sorted, 0.5);
    report.q25 = quantile(sorted, 0.25);
    report.q75 = quantile(sorted, 0.75);
    return report;
}

RoundIdentityReport verify_round_identities(const Seq2SeqModel& model,
                                            const std::vector<Vec>& xs) {
    const Vec zero(model.decoder.state_dim(), 0.0);
    const Vec s_m = encode(model.encoder, xs).back();

    // round 1, second prediction, nested closed form
    Vec u = cell_step(model.decoder, s_m, zero);
    Vec first_nested = predictor_apply(model.predictor, cell_step(model.decoder, s_m, u));

    // round 2, first prediction, nested closed form
    Vec q = predictor_apply(model.predictor, u);
    Vec h = cell_step(model.encoder, q, s_m);
    Vec second_nested = predictor_apply(model.predictor, cell_step(model.decoder, h, zero));

    const auto rounds = ew_single_step_rounds(model, xs, 2, 2);
    const Vec& first_rounds = rounds[0][1];
    const Vec& second_rounds = rounds[1][0];

    auto gap = [](const Vec& a, const Vec& b) {
        Vec d(a.size());
        for (std::size_t i = 0; i < a.size(); ++i) d[i] = a[i] - b[i];
        return norm2(d);
    };
    RoundIdentityReport report;
    report.path_gap_first = gap(first_nested, first_rounds);
    report.path_gap_second = gap(second_nested, second_rounds);
    report.cross_round_gap = gap(first_rounds, second_rounds);
    return report;
}

std::pair<double, RnnCellParams> residual_objective_grad(const Seq2SeqModel& model,
                                                         const HiddenStateSet& states) {
    if (states.states.empty())
        throw std::invalid_argument("residual_objective_grad: empty state set");
    RnnCellParams grads = zeros_like(model.decoder);
    const Vec zero(model.decoder.state_dim(), 0.0);
    const double inv_n = 1.0 / double(states.states.size());
    double objective = 0.0;
    for (const Vec& s : states.states) {
        Vec u = cell_step(model.decoder, s, zero);
        Vec lhs = cell_step(model.decoder, s, u);
        Vec q = predictor_apply(model.predictor, u);
        Vec h = cell_step(model.encoder, q, s);
        Vec rhs = cell_step(model.decoder, h, zero);

        Vec r(lhs.size());
        for (std::size_t i = 0; i < r.size(); ++i) r[i] = lhs[i] - rhs[i];
        objective += inv_n * dot(r, r);

        Vec dr(r.size());
        for (std::size_t i = 0; i < r.size(); ++i) dr[i] = 2.0 * inv_n * r[i];

        // lhs branch
        Vec dz_a(dr.size());
        for (std::size_t i = 0; i < dr.size(); ++i)
            dz_a[i] = dr[i] * (1.0 - lhs[i] * lhs[i]);
        add_outer(grads.w_in, dz_a, s);
        add_outer(grads.w_rec, dz_a, u);
        axpy(grads.b, dz_a);
        Vec du = matvec_t(model.decoder.w_rec, dz_a);

        // rhs branch (negative sign carried through)
        Vec dz_c(dr.size());
        for (std::size_t i = 0; i < dr.size(); ++i)
            dz_c[i] = -dr[i] * (1.0 - rhs[i] * rhs[i]);
        add_outer(grads.w_in, dz_c, h);
        axpy(grads.b, dz_c);
        Vec dh = matvec_t(model.decoder.w_in, dz_c);

        // through the frozen encoder and predictor back into u
        Vec dz_h(dh.size());
        for (std::size_t i = 0; i < dh.size(); ++i)
            dz_h[i] = dh[i] * (1.0 - h[i] * h[i]);
        Vec dq = matvec_t(model.encoder.w_in, dz_h);
        axpy(du, matvec_t(model.predictor.w, dq));

        // u = F2(s, 0) (sigma_0 = 0, so no w_rec contribution)
        Vec dz_u(du.size());
        for (std::size_t i = 0; i < du.size(); ++i)
            dz_u[i] = du[i] * (1.0 - u[i] * u[i]);
        add_outer(grads.w_in, dz_u, s);
        axpy(grads.b, dz_u);
    }
    return {objective, std::move(grads)};
}

TuneResult tune_decoder(Seq2SeqModel& model, const HiddenStateSet& states,
                        std::size_t steps, const TrainConfig& config) {
    if (steps < 1) throw std::invalid_argument("tune_decoder: steps must be >= 1");
    TuneResult result;
    result.objective_history.reserve(steps + 1);
    auto views = param_views(model.decoder);
    AdamState adam = AdamState::for_params(views);
    for (std::size_t step = 0; step < steps; ++step) {
        auto [objective, grads] = residual_objective_grad(model, states);
        result.objective_history.push_back(objective);
        adam_step(views, param_views(grads), adam, config);
    }
    result.objective_history.push_back(residual_objective_grad(model, states).first);
    return result;
}

void save_consistency_csv(const ConsistencyReport& report, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path);
    out << "state_index,residual_norm\n";
    for (std::size_t i = 0; i < report.residual_norms.size(); ++i)
        out << i << ',' << format_double(report.residual_norms[i]) << '\n';
}

std::string consistency_summary_json(const ConsistencyReport& report) {
    nlohmann::json j{{"count", report.count},   {"mean", report.mean},
                     {"median", report.median}, {"max", report.max},
                     {"q25", report.q25},       {"q75", report.q75}};
    return j.dump(2);
}

}  // namespace seqlab
