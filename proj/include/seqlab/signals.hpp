#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "seqlab/linalg.hpp"

namespace seqlab {

enum class SignalKind { sine, trapezoid };

std::string to_string(SignalKind kind);
SignalKind signal_kind_from_string(const std::string& s);

// Constants of the noisy phase-modulated waveforms.  The trapezoid segments
// must satisfy rise + top + fall + rest == period.
struct SignalConfig {
    SignalKind kind = SignalKind::sine;
    double noise = 0.15;   // white-noise amplitude a
    double offset = 0.0;   // A0
    double amplitude = 1.0;  // A
    double period = 1.0;     // T
    double mod_depth = 2.0;  // Delta
    double mod_period = 10.0;  // s_mod
    double rise = 0.1;   // trapezoid r
    double top = 0.4;    // trapezoid w
    double fall = 0.1;   // trapezoid f
    double rest = 0.4;   // trapezoid s_rest
    double dt = 0.01;
    std::size_t count = 20000;  // N
    std::uint64_t seed = 0;
};

struct Series {
    SignalConfig config;
    std::vector<double> values;  // value at t_i = i * dt, i starting at 1
};

// One training pair: m input elements and k target elements, both contiguous
// slices of a series starting at index p (1-based).
struct Sample {
    std::vector<Vec> input;
    std::vector<Vec> target;
    SignalKind kind = SignalKind::sine;
    std::size_t start = 0;
};

struct Dataset {
    std::vector<Sample> samples;
};

// Argument warp of the phase modulation: t -> t + depth * sin(2 pi t / period).
double phase_warp(double t, double depth, double period);

Series gen_sine(const SignalConfig& config, Rng& rng);
Series gen_trapezoid(const SignalConfig& config, Rng& rng);
Series gen_series(const SignalConfig& config, Rng& rng);

// Draws `count` window start indices uniformly and slices (input, target)
// pairs out of the series.
std::vector<Sample> make_windows(const Series& series, std::size_t m, std::size_t k,
                                 std::size_t count, Rng& rng);

// The full benchmark dataset: sine + trapezoid series of 20000 points each,
// 4000 windows from each, merged and shuffled.
Dataset build_paper_dataset(std::uint64_t seed, std::size_t m = 70, std::size_t k = 10);

// Same recipe with adjustable sizes (desk-scale runs).
Dataset build_dataset(std::uint64_t seed, std::size_t m, std::size_t k,
                      std::size_t windows_per_kind, const SignalConfig& sine_cfg,
                      const SignalConfig& trap_cfg);

SignalConfig default_sine_config();
SignalConfig default_trapezoid_config();

// A prediction engine under evaluation: maps (input window, horizon) to a
// predicted continuation of `horizon` elements.
using PredictFn =
    std::function<std::vector<Vec>(const std::vector<Vec>&, std::size_t)>;

struct EvalReport {
    double mean = 0.0;
    double stddev = 0.0;
    std::vector<double> per_horizon_rms;  // RMS deviation at each of the kp offsets
    std::size_t trials = 0;
};

// E_p over `trials` random windows: for each window predict kp points and
// take the root mean squared L2 deviation from the true continuation.
EvalReport eval_Ep(const PredictFn& predict, const Series& series, std::size_t m,
                   std::size_t k, std::size_t p, std::size_t trials, Rng& rng);

// E_p of a single predicted sequence against its ground truth.
double ep_of(const std::vector<Vec>& pred, const std::vector<Vec>& truth);

// Series file: CSV with header "t,value", shortest round-trip float text.
void save_series_csv(const Series& series, const std::string& path);

// Dataset file: JSON-lines, one sample per line.
void save_dataset_jsonl(const Dataset& dataset, const std::string& path);
Dataset load_dataset_jsonl(const std::string& path);

// Shortest text representation that round-trips the double exactly.
std::string format_double(double v);

}  // namespace seqlab
