#include <doctest.h>

#include <cmath>

#include "seqlab/nn.hpp"
#include "seqlab/train.hpp"

using namespace seqlab;

namespace {

// 1-neuron, 1-dimensional model with unit weights everywhere; every value
// can be traced by hand with std::tanh.
Seq2SeqModel scalar_seq2seq() {
    Seq2SeqModel m;
    m.dims = {1, 1, 1, 2, 2};
    m.encoder = {Matrix(1, 1, 1.0), Matrix(1, 1, 1.0), Vec{0.0}};
    m.decoder = {Matrix(1, 1, 1.0), Matrix(1, 1, 1.0), Vec{0.0}};
    m.predictor = {Matrix(1, 1, 1.0), Vec{0.0}};
    return m;
}

MlModel scalar_ml() {
    MlModel m;
    m.dims = {1, 1, 1, 2};
    m.cell = {Matrix(1, 1, 1.0), Matrix(1, 1, 1.0), Vec{0.0}};
    m.predictor = {Matrix(1, 1, 1.0), Vec{0.0}};
    return m;
}

Seq2SeqModel random_seq2seq(const Seq2SeqDims& dims, std::uint64_t seed) {
    Rng rng(seed);
    return init_seq2seq(dims, rng);
}

}  // namespace

TEST_CASE("cell_step") {
    RnnCellParams zero{Matrix(2, 1), Matrix(2, 2), Vec(2, 0.0)};
    CHECK(cell_step(zero, {0.7}, {0.1, -0.4}) == Vec{0.0, 0.0});

    RnnCellParams unit{Matrix(1, 1, 1.0), Matrix(1, 1, 1.0), Vec{0.0}};
    CHECK(cell_step(unit, {1.0}, {-1.0})[0] == 0.0);

    RnnCellParams in_only{Matrix(1, 1, 1.0), Matrix(1, 1, 0.0), Vec{0.0}};
    CHECK(cell_step(in_only, {0.5}, {0.0})[0] ==
          doctest::Approx(0.46211715726).epsilon(1e-10));

    CHECK_THROWS_AS(cell_step(unit, {1.0, 2.0}, {0.0}), std::invalid_argument);
}

TEST_CASE("encode") {
    RnnCellParams unit{Matrix(1, 1, 1.0), Matrix(1, 1, 1.0), Vec{0.0}};
    CHECK_THROWS_AS(encode(unit, {}), std::invalid_argument);

    auto single = encode(unit, {{0.5}});
    REQUIRE(single.size() == 1);
    CHECK(single[0][0] == cell_step(unit, {0.5}, {0.0})[0]);

    auto two = encode(unit, {{0.5}, {0.5}});
    const double s1 = std::tanh(0.5);
    const double s2 = std::tanh(0.5 + s1);
    CHECK(two[0][0] == doctest::Approx(s1).epsilon(1e-15));
    CHECK(two[1][0] == doctest::Approx(s2).epsilon(1e-15));
    CHECK(two[1][0] == doctest::Approx(0.745220).epsilon(1e-6));

    RnnCellParams zero{Matrix(3, 1), Matrix(3, 3), Vec(3, 0.0)};
    for (const Vec& s : encode(zero, {{1.0}, {2.0}}))
        for (double v : s) CHECK(v == 0.0);
}

TEST_CASE("decode_traditional") {
    Seq2SeqModel model = random_seq2seq({1, 3, 2, 4, 3}, 99);
    Vec ctx = encode(model.encoder, {{0.3}, {-0.2}}).back();

    auto one = decode_traditional(model, ctx, 1);
    REQUIRE(one.size() == 1);
    CHECK(one[0] == cell_step(model.decoder, ctx, Vec(2, 0.0)));

    auto ten = decode_traditional(model, ctx, 10);
    auto forty = decode_traditional(model, ctx, 40);
    for (int i = 0; i < 10; ++i) CHECK(ten[i] == forty[i]);

    Seq2SeqModel zero = model;
    zero.decoder = {Matrix(2, 3), Matrix(2, 2), Vec(2, 0.0)};
    for (const Vec& s : decode_traditional(zero, ctx, 5))
        for (double v : s) CHECK(v == 0.0);
}

TEST_CASE("predictor_apply") {
    PredictorParams bias_only{Matrix(2, 3), Vec{1.5, -0.5}};
    CHECK(predictor_apply(bias_only, {9.0, 9.0, 9.0}) == Vec{1.5, -0.5});

    PredictorParams ident{Matrix(1, 1, 1.0), Vec{0.0}};
    CHECK(predictor_apply(ident, {0.3}) == Vec{0.3});

    PredictorParams p{Matrix(1, 2), Vec{1.0}};
    p.w(0, 0) = 2.0;
    CHECK(predictor_apply(p, {0.5, 0.9}) == Vec{2.0});
}

TEST_CASE("predict_traditional") {
    Seq2SeqModel model = random_seq2seq({1, 3, 2, 4, 3}, 7);
    std::vector<Vec> xs{{0.1}, {0.4}, {-0.3}, {0.2}};

    // composition identity against the public pieces
    auto preds = predict_traditional(model, xs, 3);
    Vec ctx = encode(model.encoder, xs).back();
    auto dec = decode_traditional(model, ctx, 3);
    REQUIRE(preds.size() == 3);
    for (int i = 0; i < 3; ++i)
        CHECK(preds[i] == predictor_apply(model.predictor, dec[i]));

    // only the window itself matters
    Seq2SeqModel zero = model;
    zero.encoder = {Matrix(3, 1), Matrix(3, 3), Vec(3, 0.0)};
    zero.decoder = {Matrix(2, 3), Matrix(2, 2), Vec(2, 0.0)};
    zero.predictor.w = Matrix(1, 2);
    zero.predictor.b = Vec{0.25};
    for (const Vec& p : predict_traditional(zero, xs, 4)) CHECK(p == Vec{0.25});

    // scalar two-step trace: encode (0.5, 0.5), decode twice, identity readout
    Seq2SeqModel scalar = scalar_seq2seq();
    const double s1 = std::tanh(0.5);
    const double s2 = std::tanh(0.5 + s1);
    const double sig1 = std::tanh(s2);
    const double sig2 = std::tanh(s2 + sig1);
    auto sp = predict_traditional(scalar, {{0.5}, {0.5}}, 2);
    CHECK(sp[0][0] == doctest::Approx(sig1).epsilon(1e-15));
    CHECK(sp[1][0] == doctest::Approx(sig2).epsilon(1e-15));
}

TEST_CASE("predict_traditional_rounds") {
    Seq2SeqModel model = random_seq2seq({1, 3, 2, 4, 3}, 21);
    std::vector<Vec> xs{{0.1}, {0.4}, {-0.3}};

    CHECK(predict_traditional_rounds(model, xs, 3, 1) == predict_traditional(model, xs, 3));

    Seq2SeqModel zero = model;
    zero.encoder = {Matrix(3, 1), Matrix(3, 3), Vec(3, 0.0)};
    zero.decoder = {Matrix(2, 3), Matrix(2, 2), Vec(2, 0.0)};
    zero.predictor.w = Matrix(1, 2);
    zero.predictor.b = Vec{0.25};
    auto preds = predict_traditional_rounds(zero, xs, 3, 4);
    REQUIRE(preds.size() == 12);
    for (const Vec& p : preds) CHECK(p == Vec{0.25});

    // k=1, p=2: second round runs on the extended window
    auto two = predict_traditional_rounds(model, xs, 1, 2);
    std::vector<Vec> extended = xs;
    extended.push_back(two[0]);
    CHECK(two[1] == predict_traditional(model, extended, 1)[0]);
}

TEST_CASE("ew_single_step_rounds matches the round mechanics") {
    Seq2SeqModel model = random_seq2seq({1, 4, 3, 5, 4}, 31);
    std::vector<Vec> xs{{0.1}, {0.4}, {-0.3}, {0.7}, {-0.1}};

    auto rounds = ew_single_step_rounds(model, xs, 4, 3);
    REQUIRE(rounds.size() == 3);
    CHECK(rounds[0] == predict_traditional(model, xs, 4));

    // round 2 runs on xs + first prediction of round 1
    std::vector<Vec> x2 = xs;
    x2.push_back(rounds[0][0]);
    CHECK(rounds[1] == predict_traditional(model, x2, 4));

    // nested closed form of the round-1 second prediction
    Vec s_m = encode(model.encoder, xs).back();
    Vec zero(3, 0.0);
    Vec inner = cell_step(model.decoder, s_m, zero);
    Vec nested = predictor_apply(model.predictor, cell_step(model.decoder, s_m, inner));
    CHECK(rounds[0][1] == nested);

    // nested closed form of the round-2 first prediction
    Vec q = predictor_apply(model.predictor, inner);
    Vec h = cell_step(model.encoder, q, s_m);
    Vec nested2 = predictor_apply(model.predictor, cell_step(model.decoder, h, zero));
    CHECK(rounds[1][0] == nested2);
}

TEST_CASE("ml_rollout") {
    MlModel scalar = scalar_ml();
    auto preds = ml_rollout(scalar, {{0.5}}, 2);
    const double s1 = std::tanh(0.5);
    CHECK(preds[0][0] == doctest::Approx(0.462117).epsilon(1e-6));
    const double s2 = std::tanh(s1 + s1);
    CHECK(preds[1][0] == doctest::Approx(s2).epsilon(1e-15));
    CHECK(preds[1][0] == doctest::Approx(0.727894).epsilon(1e-5));

    MlModel zero = scalar;
    zero.cell = {Matrix(2, 1), Matrix(2, 2), Vec(2, 0.0)};
    zero.predictor = {Matrix(1, 2), Vec{0.3}};
    for (const Vec& p : ml_rollout(zero, {{1.0}, {2.0}}, 7)) CHECK(p == Vec{0.3});

    // prefix property, exact
    Rng rng(17);
    MlModel model = init_ml({1, 4, 3, 10}, rng);
    std::vector<Vec> xs{{0.1}, {-0.4}, {0.2}};
    auto ten = ml_rollout(model, xs, 10);
    auto forty = ml_rollout(model, xs, 40);
    for (int i = 0; i < 10; ++i) CHECK(ten[i] == forty[i]);
}

TEST_CASE("model serialization round-trips bit-exactly") {
    Seq2SeqModel model = random_seq2seq({1, 4, 3, 5, 4}, 13);
    Seq2SeqModel back = seq2seq_from_json(to_json(model));
    CHECK(back.dims.n1 == model.dims.n1);
    CHECK(back.encoder.w_in.data == model.encoder.w_in.data);
    CHECK(back.encoder.w_rec.data == model.encoder.w_rec.data);
    CHECK(back.decoder.w_in.data == model.decoder.w_in.data);
    CHECK(back.predictor.w.data == model.predictor.w.data);
    CHECK(back.predictor.b == model.predictor.b);

    Rng rng(14);
    MlModel ml = init_ml({1, 5, 6, 3}, rng);
    MlModel mlback = ml_from_json(to_json(ml));
    CHECK(mlback.cell.w_in.data == ml.cell.w_in.data);
    CHECK(mlback.cell.w_rec.data == ml.cell.w_rec.data);
    CHECK(mlback.cell.b == ml.cell.b);
    CHECK(mlback.predictor.w.data == ml.predictor.w.data);

    CHECK_THROWS_AS(ml_from_json(to_json(model)), std::invalid_argument);
}

TEST_CASE("init respects fan-in bounds and zero biases") {
    Rng rng(3);
    RnnCellParams cell = init_cell(16, 4, rng);
    for (double v : cell.w_in.data) CHECK(std::abs(v) <= 0.5);
    for (double v : cell.w_rec.data) CHECK(std::abs(v) <= 0.25);
    for (double v : cell.b) CHECK(v == 0.0);
}

TEST_CASE("recurrent states stay strictly inside (-1, 1)") {
    Rng rng(8);
    Seq2SeqModel model = init_seq2seq({1, 6, 5, 8, 6}, rng);
    std::vector<Vec> xs;
    for (int i = 0; i < 8; ++i) xs.push_back({rng.uniform(-5, 5)});
    for (const Vec& s : encode(model.encoder, xs))
        for (double v : s) CHECK(std::abs(v) < 1.0);
    Vec ctx = encode(model.encoder, xs).back();
    for (const Vec& s : decode_traditional(model, ctx, 6))
        for (double v : s) CHECK(std::abs(v) < 1.0);
}
