#include "seqlab/signals.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>

#include <json.hpp>

namespace seqlab {

std::string to_string(SignalKind kind) {
    return kind == SignalKind::sine ? "sine" : "trapezoid";
}

SignalKind signal_kind_from_string(const std::string& s) {
    if (s == "sine") return SignalKind::sine;
    if (s == "trapezoid") return SignalKind::trapezoid;
    throw std::invalid_argument("unknown signal kind: " + s);
}

double phase_warp(double t, double depth, double period) {
    if (period <= 0.0) throw std::invalid_argument("phase_warp: period must be > 0");
    return t + depth * std::sin(2.0 * std::numbers::pi * t / period);
}

namespace {

void check_config(const SignalConfig& c) {
    if (c.dt <= 0.0) throw std::invalid_argument("signal: dt must be > 0");
    if (c.count < 1) throw std::invalid_argument("signal: count must be >= 1");
    if (c.noise < 0.0) throw std::invalid_argument("signal: noise must be >= 0");
}

double trapezoid_shape(const SignalConfig& c, double t) {
    // t already reduced to [0, T)
    const double r = c.rise, w = c.top, f = c.fall;
    if (t < r) return c.amplitude * t / r;
    if (t < r + w) return c.amplitude;
    if (t < r + w + f) return c.amplitude * (r + w + f - t) / f;
    return 0.0;
}

}  // namespace

Series gen_sine(const SignalConfig& config, Rng& rng) {
    if (config.kind != SignalKind::sine)
        throw std::invalid_argument("gen_sine: config.kind is not sine");
    check_config(config);
    Series series{config, {}};
    series.values.reserve(config.count);
    for (std::size_t i = 1; i <= config.count; ++i) {
        const double t = double(i) * config.dt;
        const double warped = phase_warp(t, config.mod_depth, config.mod_period);
        const double v =
            config.noise * rng.gauss() + config.offset +
            config.amplitude * std::sin(2.0 * std::numbers::pi * warped / config.period);
        series.values.push_back(v);
    }
    return series;
}

Series gen_trapezoid(const SignalConfig& config, Rng& rng) {
    if (config.kind != SignalKind::trapezoid)
        throw std::invalid_argument("gen_trapezoid: config.kind is not trapezoid");
    check_config(config);
    const double segsum = config.rise + config.top + config.fall + config.rest;
    if (std::abs(segsum - config.period) > 1e-12)
        throw std::invalid_argument("gen_trapezoid: r + w + f + s_rest must equal T");
    Series series{config, {}};
    series.values.reserve(config.count);
    for (std::size_t i = 1; i <= config.count; ++i) {
        const double t = double(i) * config.dt;
        double warped = phase_warp(t, config.mod_depth, config.mod_period);
        warped = warped - config.period * std::floor(warped / config.period);
        const double v = config.noise * rng.gauss() + config.offset +
                         trapezoid_shape(config, warped);
        series.values.push_back(v);
    }
    return series;
}

Series gen_series(const SignalConfig& config, Rng& rng) {
    return config.kind == SignalKind::sine ? gen_sine(config, rng)
                                           : gen_trapezoid(config, rng);
}

std::vector<Sample> make_windows(const Series& series, std::size_t m, std::size_t k,
                                 std::size_t count, Rng& rng) {
    if (m < 1 || k < 1) throw std::invalid_argument("make_windows: m, k must be >= 1");
    const std::size_t n = series.values.size();
    if (m + k > n)
        throw std::invalid_argument("make_windows: window m+k exceeds series length");
    if (count < 1) throw std::invalid_argument("make_windows: count must be >= 1");
    std::vector<Sample> samples;
    samples.reserve(count);
    // start index p is 1-based; valid range [1, n - m - k + 1]
    const std::uint64_t pmax = n - m - k + 1;
    for (std::size_t c = 0; c < count; ++c) {
        const std::size_t p = std::size_t(rng.uniform_int(1, pmax));
        Sample s;
        s.kind = series.config.kind;
        s.start = p;
        s.input.reserve(m);
        s.target.reserve(k);
        for (std::size_t i = 0; i < m; ++i) s.input.push_back({series.values[p - 1 + i]});
        for (std::size_t i = 0; i < k; ++i)
            s.target.push_back({series.values[p - 1 + m + i]});
        samples.push_back(std::move(s));
    }
    return samples;
}

SignalConfig default_sine_config() {
    SignalConfig c;
    c.kind = SignalKind::sine;
    return c;
}

SignalConfig default_trapezoid_config() {
    SignalConfig c;
    c.kind = SignalKind::trapezoid;
    return c;
}

Dataset build_dataset(std::uint64_t seed, std::size_t m, std::size_t k,
                      std::size_t windows_per_kind, const SignalConfig& sine_cfg,
                      const SignalConfig& trap_cfg) {
    Rng sine_rng(derive_seed(seed, "series/sine"));
    Rng trap_rng(derive_seed(seed, "series/trapezoid"));
    Series sine = gen_sine(sine_cfg, sine_rng);
    Series trap = gen_trapezoid(trap_cfg, trap_rng);

    Rng sine_win(derive_seed(seed, "windows/sine"));
    Rng trap_win(derive_seed(seed, "windows/trapezoid"));
    Dataset ds;
    ds.samples = make_windows(sine, m, k, windows_per_kind, sine_win);
    std::vector<Sample> trap_samples = make_windows(trap, m, k, windows_per_kind, trap_win);
    ds.samples.insert(ds.samples.end(), std::make_move_iterator(trap_samples.begin()),
                      std::make_move_iterator(trap_samples.end()));

    Rng shuffle_rng(derive_seed(seed, "dataset/shuffle"));
    std::shuffle(ds.samples.begin(), ds.samples.end(), shuffle_rng.engine());
    return ds;
}

Dataset build_paper_dataset(std::uint64_t seed, std::size_t m, std::size_t k) {
    return build_dataset(seed, m, k, 4000, default_sine_config(),
                         default_trapezoid_config());
}

double ep_of(const std::vector<Vec>& pred, const std::vector<Vec>& truth) {
    if (pred.size() != truth.size())
        throw std::invalid_argument("ep_of: length mismatch");
    double acc = 0.0;
    for (std::size_t i = 0; i < pred.size(); ++i) {
        if (pred[i].size() != truth[i].size())
            throw std::invalid_argument("ep_of: element dim mismatch");
        for (std::size_t j = 0; j < pred[i].size(); ++j) {
            const double d = pred[i][j] - truth[i][j];
            acc += d * d;
        }
    }
    return std::sqrt(acc / double(pred.size()));
}

EvalReport eval_Ep(const PredictFn& predict, const Series& series, std::size_t m,
                   std::size_t k, std::size_t p, std::size_t trials, Rng& rng) {
    if (trials < 1) throw std::invalid_argument("eval_Ep: trials must be >= 1");
    const std::size_t kp = k * p;
    const std::size_t n = series.values.size();
    if (m + kp > n) throw std::invalid_argument("eval_Ep: series too short for m + kp");

    EvalReport report;
    report.trials = trials;
    report.per_horizon_rms.assign(kp, 0.0);
    double sum = 0.0, sumsq = 0.0;
    const std::uint64_t pmax = n - m - kp + 1;
    for (std::size_t trial = 0; trial < trials; ++trial) {
        const std::size_t start = std::size_t(rng.uniform_int(1, pmax));
        std::vector<Vec> input;
        input.reserve(m);
        for (std::size_t i = 0; i < m; ++i) input.push_back({series.values[start - 1 + i]});
        std::vector<Vec> truth;
        truth.reserve(kp);
        for (std::size_t i = 0; i < kp; ++i)
            truth.push_back({series.values[start - 1 + m + i]});

        std::vector<Vec> pred = predict(input, kp);
        if (pred.size() != kp) throw std::runtime_error("eval_Ep: engine returned wrong length");
        const double e = ep_of(pred, truth);
        sum += e;
        sumsq += e * e;
        for (std::size_t i = 0; i < kp; ++i) {
            double sq = 0.0;
            for (std::size_t j = 0; j < pred[i].size(); ++j) {
                const double d = pred[i][j] - truth[i][j];
                sq += d * d;
            }
            report.per_horizon_rms[i] += sq;
        }
    }
    report.mean = sum / double(trials);
    const double var = std::max(0.0, sumsq / double(trials) - report.mean * report.mean);
    report.stddev = std::sqrt(var);
    for (double& v : report.per_horizon_rms) v = std::sqrt(v / double(trials));
    return report;
}

std::string format_double(double v) {
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    if (ec != std::errc()) throw std::runtime_error("format_double failed");
    return std::string(buf, ptr);
}

void save_series_csv(const Series& series, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path);
    out << "t,value\n";
    for (std::size_t i = 0; i < series.values.size(); ++i) {
        const double t = double(i + 1) * series.config.dt;
        out << format_double(t) << ',' << format_double(series.values[i]) << '\n';
    }
}

void save_dataset_jsonl(const Dataset& dataset, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path);
    for (const Sample& s : dataset.samples) {
        nlohmann::json j;
        j["kind"] = to_string(s.kind);
        j["p"] = s.start;
        nlohmann::json input = nlohmann::json::array();
        for (const Vec& v : s.input)
            input.push_back(v.size() == 1 ? nlohmann::json(v[0]) : nlohmann::json(v));
        nlohmann::json target = nlohmann::json::array();
        for (const Vec& v : s.target)
            target.push_back(v.size() == 1 ? nlohmann::json(v[0]) : nlohmann::json(v));
        j["input"] = std::move(input);
        j["target"] = std::move(target);
        out << j.dump() << '\n';
    }
}

namespace {

Vec element_from_json(const nlohmann::json& j) {
    if (j.is_number()) return {j.get<double>()};
    return j.get<Vec>();
}

}  // namespace

Dataset load_dataset_jsonl(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open " + path);
    Dataset ds;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        nlohmann::json j = nlohmann::json::parse(line);
        Sample s;
        s.kind = signal_kind_from_string(j.at("kind").get<std::string>());
        s.start = j.at("p").get<std::size_t>();
        for (const auto& e : j.at("input")) s.input.push_back(element_from_json(e));
        for (const auto& e : j.at("target")) s.target.push_back(element_from_json(e));
        ds.samples.push_back(std::move(s));
    }
    return ds;
}

}  // namespace seqlab
