#include "seqlab/train.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>

namespace seqlab {

Seq2SeqModel zeros_like(const Seq2SeqModel& model) {
    Seq2SeqModel g;
    g.dims = model.dims;
    g.encoder = zeros_like(model.encoder);
    g.decoder = zeros_like(model.decoder);
    g.predictor = PredictorParams{Matrix(model.predictor.w.rows, model.predictor.w.cols),
                                  Vec(model.predictor.b.size(), 0.0)};
    return g;
}

MlModel zeros_like(const MlModel& model) {
    MlModel g;
    g.dims = model.dims;
    g.cell = zeros_like(model.cell);
    g.predictor = PredictorParams{Matrix(model.predictor.w.rows, model.predictor.w.cols),
                                  Vec(model.predictor.b.size(), 0.0)};
    return g;
}

RnnCellParams zeros_like(const RnnCellParams& cell) {
    return RnnCellParams{Matrix(cell.w_in.rows, cell.w_in.cols),
                         Matrix(cell.w_rec.rows, cell.w_rec.cols),
                         Vec(cell.b.size(), 0.0)};
}

std::vector<std::span<double>> param_views(RnnCellParams& cell) {
    return {std::span<double>(cell.w_in.data), std::span<double>(cell.w_rec.data),
            std::span<double>(cell.b)};
}

std::vector<std::span<double>> param_views(PredictorParams& p) {
    return {std::span<double>(p.w.data), std::span<double>(p.b)};
}

namespace {

void append(std::vector<std::span<double>>& dst, std::vector<std::span<double>> src) {
    dst.insert(dst.end(), src.begin(), src.end());
}

}  // namespace

std::vector<std::span<double>> param_views(Seq2SeqModel& model) {
    std::vector<std::span<double>> views;
    append(views, param_views(model.encoder));
    append(views, param_views(model.decoder));
    append(views, param_views(model.predictor));
    return views;
}

std::vector<std::span<double>> param_views(MlModel& model) {
    std::vector<std::span<double>> views;
    append(views, param_views(model.cell));
    append(views, param_views(model.predictor));
    return views;
}

std::size_t param_count(const std::vector<std::span<double>>& views) {
    std::size_t n = 0;
    for (const auto& v : views) n += v.size();
    return n;
}

AdamState AdamState::for_params(const std::vector<std::span<double>>& views) {
    AdamState st;
    st.m.assign(param_count(views), 0.0);
    st.v.assign(param_count(views), 0.0);
    return st;
}

void adam_step(std::vector<std::span<double>> params,
               const std::vector<std::span<double>>& grads, AdamState& state,
               const TrainConfig& config) {
    if (params.size() != grads.size())
        throw std::invalid_argument("adam_step: param/grad view count mismatch");
    if (state.m.size() != param_count(params))
        throw std::invalid_argument("adam_step: state size mismatch");
    state.t += 1;
    const double b1 = config.beta1, b2 = config.beta2;
    const double corr1 = 1.0 - std::pow(b1, double(state.t));
    const double corr2 = 1.0 - std::pow(b2, double(state.t));
    std::size_t idx = 0;
    for (std::size_t c = 0; c < params.size(); ++c) {
        if (params[c].size() != grads[c].size())
            throw std::invalid_argument("adam_step: chunk shape mismatch");
        for (std::size_t i = 0; i < params[c].size(); ++i, ++idx) {
            const double g = grads[c][i];
            state.m[idx] = b1 * state.m[idx] + (1.0 - b1) * g;
            state.v[idx] = b2 * state.v[idx] + (1.0 - b2) * g * g;
            const double mhat = state.m[idx] / corr1;
            const double vhat = state.v[idx] / corr2;
            params[c][i] -= config.learning_rate * mhat / (std::sqrt(vhat) + config.epsilon);
        }
    }
}

double loss_mse(const std::vector<Vec>& pred, const std::vector<Vec>& truth) {
    if (pred.size() != truth.size())
        throw std::invalid_argument("loss_mse: sequence length mismatch");
    if (pred.empty()) throw std::invalid_argument("loss_mse: empty sequences");
    double acc = 0.0;
    for (std::size_t i = 0; i < pred.size(); ++i) {
        if (pred[i].size() != truth[i].size())
            throw std::invalid_argument("loss_mse: element dim mismatch");
        for (std::size_t j = 0; j < pred[i].size(); ++j) {
            const double d = pred[i][j] - truth[i][j];
            acc += d * d;
        }
    }
    return acc / double(pred.size());
}

namespace {

Vec tanh_backward(const Vec& cot, const Vec& activated) {
    Vec dz(cot.size());
    for (std::size_t i = 0; i < cot.size(); ++i)
        dz[i] = cot[i] * (1.0 - activated[i] * activated[i]);
    return dz;
}

// Backprop the encoder recursion given the cotangent of its final state.
// Intermediate states receive credit only through the recurrence.
void backprop_encoder(const RnnCellParams& enc, const std::vector<Vec>& xs,
                      const std::vector<Vec>& states, Vec ds, RnnCellParams& grads) {
    const Vec zero(enc.state_dim(), 0.0);
    for (std::size_t i = states.size(); i-- > 0;) {
        Vec dz = tanh_backward(ds, states[i]);
        add_outer(grads.w_in, dz, xs[i]);
        add_outer(grads.w_rec, dz, i == 0 ? zero : states[i - 1]);
        axpy(grads.b, dz);
        ds = matvec_t(enc.w_rec, dz);
    }
}

}  // namespace

std::pair<double, Seq2SeqModel> bptt_seq2seq(const Seq2SeqModel& model,
                                             const Sample& sample) {
    const std::size_t k = sample.target.size();
    std::vector<Vec> enc_states = encode(model.encoder, sample.input);
    const Vec& s_m = enc_states.back();
    std::vector<Vec> dec_states = decode_traditional(model, s_m, k);
    std::vector<Vec> preds(k);
    for (std::size_t i = 0; i < k; ++i)
        preds[i] = predictor_apply(model.predictor, dec_states[i]);
    const double loss = loss_mse(preds, sample.target);

    Seq2SeqModel grads = zeros_like(model);
    const double scale = 2.0 / double(k);
    const Vec zero_n2(model.decoder.state_dim(), 0.0);
    Vec ds_m(model.encoder.state_dim(), 0.0);
    Vec dsigma_carry(model.decoder.state_dim(), 0.0);
    for (std::size_t i = k; i-- > 0;) {
        Vec dpred(sample.target[i].size());
        for (std::size_t j = 0; j < dpred.size(); ++j)
            dpred[j] = scale * (preds[i][j] - sample.target[i][j]);
        add_outer(grads.predictor.w, dpred, dec_states[i]);
        axpy(grads.predictor.b, dpred);

        Vec dsigma = matvec_t(model.predictor.w, dpred);
        axpy(dsigma, dsigma_carry);
        Vec dz = tanh_backward(dsigma, dec_states[i]);
        add_outer(grads.decoder.w_in, dz, s_m);
        add_outer(grads.decoder.w_rec, dz, i == 0 ? zero_n2 : dec_states[i - 1]);
        axpy(grads.decoder.b, dz);
        axpy(ds_m, matvec_t(model.decoder.w_in, dz));
        dsigma_carry = matvec_t(model.decoder.w_rec, dz);
    }
    backprop_encoder(model.encoder, sample.input, enc_states, std::move(ds_m),
                     grads.encoder);
    return {loss, std::move(grads)};
}

std::pair<double, MlModel> bptt_ml(const MlModel& model, const Sample& sample) {
    const std::size_t k = sample.target.size();
    std::vector<Vec> enc_states = encode(model.cell, sample.input);

    // roll[i] is the state the i-th prediction reads; roll[0] is the final
    // encoder state.
    std::vector<Vec> roll(k);
    std::vector<Vec> preds(k);
    roll[0] = enc_states.back();
    for (std::size_t i = 0; i < k; ++i) {
        preds[i] = predictor_apply(model.predictor, roll[i]);
        if (i + 1 < k) roll[i + 1] = cell_step(model.cell, preds[i], roll[i]);
    }
    const double loss = loss_mse(preds, sample.target);

    MlModel grads = zeros_like(model);
    const double scale = 2.0 / double(k);
    std::vector<Vec> ds(k, Vec(model.cell.state_dim(), 0.0));
    std::vector<Vec> dpred_feedback(k, Vec(model.dims.d, 0.0));
    for (std::size_t i = k; i-- > 0;) {
        Vec dpred = dpred_feedback[i];
        for (std::size_t j = 0; j < dpred.size(); ++j)
            dpred[j] += scale * (preds[i][j] - sample.target[i][j]);
        add_outer(grads.predictor.w, dpred, roll[i]);
        axpy(grads.predictor.b, dpred);
        axpy(ds[i], matvec_t(model.predictor.w, dpred));

        if (i >= 1) {
            // roll[i] = tanh(w_in preds[i-1] + w_rec roll[i-1] + b)
            Vec dz = tanh_backward(ds[i], roll[i]);
            add_outer(grads.cell.w_in, dz, preds[i - 1]);
            add_outer(grads.cell.w_rec, dz, roll[i - 1]);
            axpy(grads.cell.b, dz);
            axpy(dpred_feedback[i - 1], matvec_t(model.cell.w_in, dz));
            axpy(ds[i - 1], matvec_t(model.cell.w_rec, dz));
        }
    }
    backprop_encoder(model.cell, sample.input, enc_states, std::move(ds[0]), grads.cell);
    return {loss, std::move(grads)};
}

namespace {

double sample_loss(const Seq2SeqModel& model, const Sample& sample) {
    return loss_mse(predict_traditional(model, sample.input, sample.target.size()),
                    sample.target);
}

double sample_loss(const MlModel& model, const Sample& sample) {
    return loss_mse(ml_rollout(model, sample.input, sample.target.size()),
                    sample.target);
}

void scale_views(const std::vector<std::span<double>>& views, double a) {
    for (const auto& v : views)
        for (double& x : v) x *= a;
}

void accumulate_views(const std::vector<std::span<double>>& dst,
                      const std::vector<std::span<double>>& src) {
    for (std::size_t c = 0; c < dst.size(); ++c)
        for (std::size_t i = 0; i < dst[c].size(); ++i) dst[c][i] += src[c][i];
}

double views_norm(const std::vector<std::span<double>>& views) {
    double acc = 0.0;
    for (const auto& v : views)
        for (double x : v) acc += x * x;
    return std::sqrt(acc);
}

template <typename Model>
TrainHistory train_impl(Model& model, const Dataset& dataset, const TrainConfig& config) {
    if (config.epochs < 1) throw std::invalid_argument("train: epochs must be >= 1");
    if (dataset.samples.empty()) throw std::invalid_argument("train: empty dataset");
    if (config.validation_fraction <= 0.0 || config.validation_fraction >= 1.0)
        throw std::invalid_argument("train: validation fraction must be in (0, 1)");

    std::vector<std::size_t> order(dataset.samples.size());
    std::iota(order.begin(), order.end(), 0);
    Rng split_rng(derive_seed(config.seed, "train/split"));
    std::shuffle(order.begin(), order.end(), split_rng.engine());
    std::size_t n_val = std::size_t(double(order.size()) * config.validation_fraction);
    n_val = std::min(n_val, order.size() - 1);
    std::vector<std::size_t> train_idx(order.begin(), order.end() - n_val);
    std::vector<std::size_t> val_idx(order.end() - n_val, order.end());

    auto views = param_views(model);
    AdamState adam = AdamState::for_params(views);
    Model grad_acc = zeros_like(model);
    auto grad_views = param_views(grad_acc);

    TrainHistory history;
    history.epochs.reserve(config.epochs);
    for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
        if (config.shuffle) {
            Rng epoch_rng(derive_seed(config.seed, "train/epoch/" + std::to_string(epoch)));
            std::shuffle(train_idx.begin(), train_idx.end(), epoch_rng.engine());
        }
        double epoch_loss = 0.0;
        for (std::size_t start = 0; start < train_idx.size(); start += config.batch_size) {
            const std::size_t end = std::min(start + config.batch_size, train_idx.size());
            scale_views(grad_views, 0.0);
            for (std::size_t i = start; i < end; ++i) {
                auto [loss, g] = [&] {
                    if constexpr (std::is_same_v<Model, Seq2SeqModel>)
                        return bptt_seq2seq(model, dataset.samples[train_idx[i]]);
                    else
                        return bptt_ml(model, dataset.samples[train_idx[i]]);
                }();
                epoch_loss += loss;
                accumulate_views(grad_views, param_views(g));
            }
            scale_views(grad_views, 1.0 / double(end - start));
            if (config.clip_norm > 0.0) {
                const double norm = views_norm(grad_views);
                if (norm > config.clip_norm) scale_views(grad_views, config.clip_norm / norm);
            }
            adam_step(views, grad_views, adam, config);
        }
        EpochStats stats;
        stats.train_loss = epoch_loss / double(train_idx.size());
        double val_loss = 0.0;
        for (std::size_t i : val_idx) val_loss += sample_loss(model, dataset.samples[i]);
        stats.val_loss = val_idx.empty() ? 0.0 : val_loss / double(val_idx.size());
        history.epochs.push_back(stats);
    }
    return history;
}

template <typename Model>
double grad_check_impl(const Model& model, const Sample& sample, double epsilon) {
    if (epsilon <= 0.0) throw std::invalid_argument("grad_check: epsilon must be > 0");
    Model work = model;
    auto analytic = [&] {
        if constexpr (std::is_same_v<Model, Seq2SeqModel>)
            return bptt_seq2seq(work, sample).second;
        else
            return bptt_ml(work, sample).second;
    }();
    auto a_views = param_views(analytic);
    auto w_views = param_views(work);
    double worst = 0.0;
    for (std::size_t c = 0; c < w_views.size(); ++c) {
        for (std::size_t i = 0; i < w_views[c].size(); ++i) {
            const double orig = w_views[c][i];
            w_views[c][i] = orig + epsilon;
            const double lp = sample_loss(work, sample);
            w_views[c][i] = orig - epsilon;
            const double lm = sample_loss(work, sample);
            w_views[c][i] = orig;
            const double numeric = (lp - lm) / (2.0 * epsilon);
            const double a = a_views[c][i];
            const double rel = std::abs(a - numeric) /
                               std::max({1.0, std::abs(a), std::abs(numeric)});
            worst = std::max(worst, rel);
        }
    }
    return worst;
}

}  // namespace

TrainHistory train(Seq2SeqModel& model, const Dataset& dataset,
                   const TrainConfig& config) {
    return train_impl(model, dataset, config);
}

TrainHistory train(MlModel& model, const Dataset& dataset, const TrainConfig& config) {
    return train_impl(model, dataset, config);
}

double grad_check(const Seq2SeqModel& model, const Sample& sample, double epsilon) {
    return grad_check_impl(model, sample, epsilon);
}

double grad_check(const MlModel& model, const Sample& sample, double epsilon) {
    return grad_check_impl(model, sample, epsilon);
}

void save_history_csv(const TrainHistory& history, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path);
    out << "epoch,train_loss,val_loss\n";
    for (std::size_t i = 0; i < history.epochs.size(); ++i)
        out << i + 1 << ',' << format_double(history.epochs[i].train_loss) << ','
            << format_double(history.epochs[i].val_loss) << '\n';
}

}  // namespace seqlab
