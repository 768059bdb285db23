#include "seqlab/nn.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include <json.hpp>

namespace seqlab {

Vec cell_step(const RnnCellParams& cell, const Vec& x, const Vec& s) {
    Vec z = matvec(cell.w_in, x);
    Vec rec = matvec(cell.w_rec, s);
    axpy(z, rec);
    axpy(z, cell.b);
    return tanh_map(z);
}

std::vector<Vec> encode(const RnnCellParams& encoder, const std::vector<Vec>& xs) {
    if (xs.empty()) throw std::invalid_argument("encode: empty input sequence");
    std::vector<Vec> states;
    states.reserve(xs.size());
    Vec s(encoder.state_dim(), 0.0);
    for (const Vec& x : xs) {
        s = cell_step(encoder, x, s);
        states.push_back(s);
    }
    return states;
}

std::vector<Vec> decode_traditional(const Seq2SeqModel& model, const Vec& s_ctx,
                                    std::size_t k) {
    if (k < 1) throw std::invalid_argument("decode_traditional: k must be >= 1");
    std::vector<Vec> states;
    states.reserve(k);
    Vec sigma(model.decoder.state_dim(), 0.0);
    for (std::size_t i = 0; i < k; ++i) {
        sigma = cell_step(model.decoder, s_ctx, sigma);
        states.push_back(sigma);
    }
    return states;
}

Vec predictor_apply(const PredictorParams& p, const Vec& state) {
    Vec out = matvec(p.w, state);
    axpy(out, p.b);
    return out;
}

std::vector<Vec> predict_traditional(const Seq2SeqModel& model,
                                     const std::vector<Vec>& xs, std::size_t k) {
    std::vector<Vec> enc = encode(model.encoder, xs);
    std::vector<Vec> dec = decode_traditional(model, enc.back(), k);
    std::vector<Vec> preds;
    preds.reserve(k);
    for (const Vec& sigma : dec) preds.push_back(predictor_apply(model.predictor, sigma));
    return preds;
}

std::vector<Vec> predict_traditional_rounds(const Seq2SeqModel& model,
                                            const std::vector<Vec>& xs,
                                            std::size_t k, std::size_t p) {
    if (p < 1) throw std::invalid_argument("predict_traditional_rounds: p must be >= 1");
    std::vector<Vec> window = xs;
    std::vector<Vec> all;
    all.reserve(k * p);
    for (std::size_t round = 0; round < p; ++round) {
        std::vector<Vec> preds = predict_traditional(model, window, k);
        for (const Vec& v : preds) {
            window.push_back(v);
            all.push_back(v);
        }
    }
    return all;
}

std::vector<std::vector<Vec>> ew_single_step_rounds(const Seq2SeqModel& model,
                                                    const std::vector<Vec>& xs,
                                                    std::size_t k,
                                                    std::size_t rounds) {
    if (rounds < 1)
        throw std::invalid_argument("ew_single_step_rounds: rounds must be >= 1");
    std::vector<Vec> window = xs;
    std::vector<std::vector<Vec>> per_round;
    per_round.reserve(rounds);
    for (std::size_t round = 0; round < rounds; ++round) {
        std::vector<Vec> preds = predict_traditional(model, window, k);
        window.push_back(preds.front());
        per_round.push_back(std::move(preds));
    }
    return per_round;
}

std::vector<Vec> ml_rollout(const MlModel& model, const std::vector<Vec>& xs,
                            std::size_t horizon) {
    if (horizon < 1) throw std::invalid_argument("ml_rollout: horizon must be >= 1");
    Vec s = encode(model.cell, xs).back();
    std::vector<Vec> preds;
    preds.reserve(horizon);
    for (std::size_t i = 0; i < horizon; ++i) {
        Vec x = predictor_apply(model.predictor, s);
        s = cell_step(model.cell, x, s);
        preds.push_back(std::move(x));
    }
    return preds;
}

namespace {

void fill_uniform(Matrix& m, double bound, Rng& rng) {
    for (double& v : m.data) v = rng.uniform(-bound, bound);
}

}  // namespace

RnnCellParams init_cell(std::size_t n, std::size_t d_in, Rng& rng) {
    RnnCellParams cell{Matrix(n, d_in), Matrix(n, n), Vec(n, 0.0)};
    fill_uniform(cell.w_in, 1.0 / std::sqrt(double(d_in)), rng);
    fill_uniform(cell.w_rec, 1.0 / std::sqrt(double(n)), rng);
    return cell;
}

PredictorParams init_predictor(std::size_t d, std::size_t n, Rng& rng) {
    PredictorParams p{Matrix(d, n), Vec(d, 0.0)};
    fill_uniform(p.w, 1.0 / std::sqrt(double(n)), rng);
    return p;
}

Seq2SeqModel init_seq2seq(const Seq2SeqDims& dims, Rng& rng) {
    Seq2SeqModel model;
    model.dims = dims;
    model.encoder = init_cell(dims.n1, dims.d, rng);
    model.decoder = init_cell(dims.n2, dims.n1, rng);
    model.predictor = init_predictor(dims.d, dims.n2, rng);
    return model;
}

MlModel init_ml(const MlDims& dims, Rng& rng) {
    MlModel model;
    model.dims = dims;
    model.cell = init_cell(dims.n, dims.d, rng);
    model.predictor = init_predictor(dims.d, dims.n, rng);
    return model;
}

namespace {

using nlohmann::json;

json matrix_to_json(const Matrix& m) {
    return json{{"rows", m.rows}, {"cols", m.cols}, {"data", m.data}};
}

Matrix matrix_from_json(const json& j) {
    Matrix m(j.at("rows").get<std::size_t>(), j.at("cols").get<std::size_t>());
    m.data = j.at("data").get<std::vector<double>>();
    if (m.data.size() != m.rows * m.cols)
        throw std::invalid_argument("model file: matrix data length mismatch");
    return m;
}

json cell_to_json(const RnnCellParams& c) {
    return json{{"w_in", matrix_to_json(c.w_in)},
                {"w_rec", matrix_to_json(c.w_rec)},
                {"b", c.b}};
}

RnnCellParams cell_from_json(const json& j) {
    return RnnCellParams{matrix_from_json(j.at("w_in")), matrix_from_json(j.at("w_rec")),
                         j.at("b").get<Vec>()};
}

json predictor_to_json(const PredictorParams& p) {
    return json{{"w", matrix_to_json(p.w)}, {"b", p.b}};
}

PredictorParams predictor_from_json(const json& j) {
    return PredictorParams{matrix_from_json(j.at("w")), j.at("b").get<Vec>()};
}

constexpr int kFormatVersion = 1;

}  // namespace

std::string to_json(const Seq2SeqModel& model) {
    json j{{"format_version", kFormatVersion},
           {"arch", "seq2seq"},
           {"dims",
            {{"d", model.dims.d},
             {"n1", model.dims.n1},
             {"n2", model.dims.n2},
             {"m", model.dims.m},
             {"k", model.dims.k}}},
           {"encoder", cell_to_json(model.encoder)},
           {"decoder", cell_to_json(model.decoder)},
           {"predictor", predictor_to_json(model.predictor)}};
    return j.dump(2);
}

std::string to_json(const MlModel& model) {
    json j{{"format_version", kFormatVersion},
           {"arch", "ml"},
           {"dims",
            {{"d", model.dims.d},
             {"n", model.dims.n},
             {"m", model.dims.m},
             {"k", model.dims.k}}},
           {"cell", cell_to_json(model.cell)},
           {"predictor", predictor_to_json(model.predictor)}};
    return j.dump(2);
}

Seq2SeqModel seq2seq_from_json(const std::string& text) {
    json j = json::parse(text);
    if (j.at("arch").get<std::string>() != "seq2seq")
        throw std::invalid_argument("model file: expected arch \"seq2seq\"");
    Seq2SeqModel model;
    const json& d = j.at("dims");
    model.dims = {d.at("d"), d.at("n1"), d.at("n2"), d.at("m"), d.at("k")};
    model.encoder = cell_from_json(j.at("encoder"));
    model.decoder = cell_from_json(j.at("decoder"));
    model.predictor = predictor_from_json(j.at("predictor"));
    return model;
}

MlModel ml_from_json(const std::string& text) {
    json j = json::parse(text);
    if (j.at("arch").get<std::string>() != "ml")
        throw std::invalid_argument("model file: expected arch \"ml\"");
    MlModel model;
    const json& d = j.at("dims");
    model.dims = {d.at("d"), d.at("n"), d.at("m"), d.at("k")};
    model.cell = cell_from_json(j.at("cell"));
    model.predictor = predictor_from_json(j.at("predictor"));
    return model;
}

namespace {

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_file(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path);
    out << text;
}

}  // namespace

void save_model(const Seq2SeqModel& model, const std::string& path) {
    write_file(path, to_json(model));
}

void save_model(const MlModel& model, const std::string& path) {
    write_file(path, to_json(model));
}

std::string model_arch_in_file(const std::string& path) {
    return nlohmann::json::parse(read_file(path)).at("arch").get<std::string>();
}

Seq2SeqModel load_seq2seq(const std::string& path) {
    return seq2seq_from_json(read_file(path));
}

MlModel load_ml(const std::string& path) { return ml_from_json(read_file(path)); }

}  // namespace seqlab
