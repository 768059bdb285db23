#include <doctest.h>

#include <cmath>

#include "seqlab/consistency.hpp"
#include "seqlab/experiments.hpp"

using namespace seqlab;

namespace {

Seq2SeqModel zero_model() {
    Seq2SeqModel m;
    m.dims = {1, 2, 2, 3, 2};
    m.encoder = {Matrix(2, 1), Matrix(2, 2), Vec(2, 0.0)};
    m.decoder = {Matrix(2, 2), Matrix(2, 2), Vec(2, 0.0)};
    m.predictor = {Matrix(1, 2), Vec{0.0}};
    return m;
}

Dataset tiny_dataset(std::size_t m, std::size_t k, std::size_t count, std::uint64_t seed) {
    Dataset ds;
    Rng rng(seed);
    for (std::size_t c = 0; c < count; ++c) {
        Sample s;
        for (std::size_t i = 0; i < m; ++i) s.input.push_back({rng.uniform(-1, 1)});
        for (std::size_t i = 0; i < k; ++i) s.target.push_back({rng.uniform(-1, 1)});
        ds.samples.push_back(std::move(s));
    }
    return ds;
}

}  // namespace

TEST_CASE("residual") {
    Seq2SeqModel zero = zero_model();
    CHECK(residual(zero, {0.3, -0.5}) == Vec{0.0, 0.0});

    Rng rng(1);
    Seq2SeqModel model = init_seq2seq({1, 2, 2, 3, 2}, rng);
    Vec s{0.4, -0.2};
    Vec r1 = residual(model, s);
    CHECK(residual(model, s) == r1);  // pure function

    // independent step-by-step composition of the two sides
    Vec zero2(2, 0.0);
    Vec u = tanh_map([&] {
        Vec z = matvec(model.decoder.w_in, s);
        axpy(z, matvec(model.decoder.w_rec, zero2));
        axpy(z, model.decoder.b);
        return z;
    }());
    Vec lhs = tanh_map([&] {
        Vec z = matvec(model.decoder.w_in, s);
        axpy(z, matvec(model.decoder.w_rec, u));
        axpy(z, model.decoder.b);
        return z;
    }());
    Vec q = matvec(model.predictor.w, u);
    axpy(q, model.predictor.b);
    Vec h = tanh_map([&] {
        Vec z = matvec(model.encoder.w_in, q);
        axpy(z, matvec(model.encoder.w_rec, s));
        axpy(z, model.encoder.b);
        return z;
    }());
    Vec rhs = tanh_map([&] {
        Vec z = matvec(model.decoder.w_in, h);
        axpy(z, matvec(model.decoder.w_rec, zero2));
        axpy(z, model.decoder.b);
        return z;
    }());
    for (int i = 0; i < 2; ++i)
        CHECK(r1[i] == doctest::Approx(lhs[i] - rhs[i]).epsilon(1e-12));

    CHECK_THROWS_AS(residual(model, {0.1, 0.2, 0.3}), std::invalid_argument);
}

TEST_CASE("harvest_states") {
    Rng rng(2);
    Seq2SeqModel model = init_seq2seq({1, 3, 2, 4, 3}, rng);
    Dataset ds = tiny_dataset(4, 3, 10, 3);

    HiddenStateSet one = harvest_states(model, ds, 1);
    REQUIRE(one.states.size() == 1);
    CHECK(one.states[0] == encode(model.encoder, ds.samples[0].input).back());

    HiddenStateSet all = harvest_states(model, ds, 100);
    CHECK(all.states.size() == 10);
    for (const Vec& s : all.states)
        for (double v : s) CHECK(std::abs(v) < 1.0);

    HiddenStateSet again = harvest_states(model, ds, 100);
    CHECK(again.states == all.states);

    HiddenStateSet wide = harvest_states(model, ds, 100, true);
    CHECK(wide.states.size() == 10 * 3);  // s_m plus k-1 continuation states

    Dataset empty;
    CHECK_THROWS_AS(harvest_states(model, empty, 10), std::invalid_argument);
}

TEST_CASE("consistency_stats") {
    Seq2SeqModel zero = zero_model();
    HiddenStateSet states;
    states.states = {{0.1, 0.2}, {-0.3, 0.4}, {0.0, 0.0}};
    states.origin = {0, 1, 2};
    ConsistencyReport report = consistency_stats(zero, states);
    CHECK(report.count == 3);
    for (double n : report.residual_norms) CHECK(n == 0.0);
    CHECK(report.mean == 0.0);
    CHECK(report.median == 0.0);

    Rng rng(4);
    Seq2SeqModel model = init_seq2seq({1, 2, 3, 4, 3}, rng);
    ConsistencyReport r2 = consistency_stats(model, states);
    CHECK(r2.count == states.states.size());
    CHECK(r2.max >= r2.median);
    CHECK(r2.median >= 0.0);
}

TEST_CASE("verify_round_identities") {
    // path identities hold for arbitrary parameters
    for (std::uint64_t seed = 1; seed <= 50; ++seed) {
        Rng rng(seed);
        Seq2SeqModel model = init_seq2seq({1, 3, 2, 5, 2}, rng);
        std::vector<Vec> xs;
        for (int i = 0; i < 5; ++i) xs.push_back({rng.uniform(-1, 1)});
        RoundIdentityReport report = verify_round_identities(model, xs);
        CHECK(report.path_gap_first <= 1e-12);
        CHECK(report.path_gap_second <= 1e-12);
    }

    // zero model: both predictions equal the predictor bias, gap 0
    Seq2SeqModel zero = zero_model();
    zero.predictor.b = Vec{0.7};
    std::vector<Vec> xs{{0.2}, {0.1}, {-0.4}};
    RoundIdentityReport report = verify_round_identities(zero, xs);
    CHECK(report.cross_round_gap == 0.0);
}

TEST_CASE("training shrinks the cross-round gap vs an untrained model") {
    ExperimentConfig config;
    config.seed = 17;
    config.scale = desk_scale();
    Dataset ds = cell_dataset(config, SignalKind::sine);
    Seq2SeqModel trained = train_seq2seq_cell(config, SignalKind::sine, 50, 25, ds);

    Rng rng(derive_seed(17, "cross-round/untrained"));
    Seq2SeqModel untrained = init_seq2seq(trained.dims, rng);

    std::vector<double> trained_gaps, untrained_gaps;
    for (std::size_t i = 0; i < 100; ++i) {
        const auto& xs = ds.samples[i].input;
        trained_gaps.push_back(verify_round_identities(trained, xs).cross_round_gap);
        untrained_gaps.push_back(verify_round_identities(untrained, xs).cross_round_gap);
    }
    auto median_of = [](std::vector<double> v) {
        std::sort(v.begin(), v.end());
        return v[v.size() / 2];
    };
    CHECK(median_of(trained_gaps) < median_of(untrained_gaps));
}

TEST_CASE("tune_decoder freezes encoder and predictor") {
    Rng rng(6);
    Seq2SeqModel model = init_seq2seq({1, 3, 3, 4, 3}, rng);
    Dataset ds = tiny_dataset(4, 3, 30, 7);
    HiddenStateSet states = harvest_states(model, ds, 30);

    Seq2SeqModel before = model;
    TrainConfig cfg;
    cfg.learning_rate = 1e-3;
    TuneResult result = tune_decoder(model, states, 50, cfg);
    CHECK(result.objective_history.size() == 51);

    CHECK(model.encoder.w_in.data == before.encoder.w_in.data);
    CHECK(model.encoder.w_rec.data == before.encoder.w_rec.data);
    CHECK(model.encoder.b == before.encoder.b);
    CHECK(model.predictor.w.data == before.predictor.w.data);
    CHECK(model.predictor.b == before.predictor.b);
    CHECK(model.decoder.w_in.data != before.decoder.w_in.data);
}

TEST_CASE("tune_decoder at a global minimum leaves parameters unchanged") {
    Seq2SeqModel zero = zero_model();
    HiddenStateSet states;
    states.states = {{0.1, 0.2}, {-0.3, 0.4}};
    states.origin = {0, 1};
    Seq2SeqModel before = zero;
    TrainConfig cfg;
    cfg.learning_rate = 1e-3;
    TuneResult result = tune_decoder(zero, states, 10, cfg);
    for (double obj : result.objective_history) CHECK(obj == 0.0);
    CHECK(zero.decoder.w_in.data == before.decoder.w_in.data);
    CHECK(zero.decoder.w_rec.data == before.decoder.w_rec.data);
    CHECK(zero.decoder.b == before.decoder.b);
}

TEST_CASE("residual objective gradient matches finite differences") {
    Rng rng(8);
    Seq2SeqModel model = init_seq2seq({1, 3, 3, 4, 3}, rng);
    Dataset ds = tiny_dataset(4, 3, 5, 9);
    HiddenStateSet states = harvest_states(model, ds, 5);

    auto [objective, grads] = residual_objective_grad(model, states);
    auto objective_of = [&](const Seq2SeqModel& m) {
        double acc = 0.0;
        for (const Vec& s : states.states) {
            Vec r = residual(m, s);
            acc += dot(r, r);
        }
        return acc / double(states.states.size());
    };
    CHECK(objective == doctest::Approx(objective_of(model)).epsilon(1e-12));

    const double eps = 1e-6;
    Seq2SeqModel work = model;
    auto wviews = param_views(work.decoder);
    auto gviews = param_views(grads);
    double worst = 0.0;
    for (std::size_t c = 0; c < wviews.size(); ++c) {
        for (std::size_t i = 0; i < wviews[c].size(); ++i) {
            const double orig = wviews[c][i];
            wviews[c][i] = orig + eps;
            const double fp = objective_of(work);
            wviews[c][i] = orig - eps;
            const double fm = objective_of(work);
            wviews[c][i] = orig;
            const double numeric = (fp - fm) / (2 * eps);
            const double a = gviews[c][i];
            worst = std::max(worst, std::abs(a - numeric) /
                                        std::max({1.0, std::abs(a), std::abs(numeric)}));
        }
    }
    CHECK(worst < 1e-4);
}

TEST_CASE("tuning objective is non-increasing at small learning rate") {
    for (std::uint64_t seed = 1; seed <= 3; ++seed) {
        Rng rng(seed * 31);
        Seq2SeqModel model = init_seq2seq({1, 3, 3, 4, 3}, rng);
        Dataset ds = tiny_dataset(4, 3, 20, seed);
        HiddenStateSet states = harvest_states(model, ds, 20);
        TrainConfig cfg;
        cfg.learning_rate = 1e-4;
        TuneResult result = tune_decoder(model, states, 100, cfg);
        for (std::size_t i = 1; i < result.objective_history.size(); ++i)
            CHECK(result.objective_history[i] <= result.objective_history[i - 1] + 1e-12);
    }
}
