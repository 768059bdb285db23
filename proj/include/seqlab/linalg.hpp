#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace seqlab {

using Vec = std::vector<double>;

// Dense row-major matrix of doubles.
struct Matrix {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<double> data;

    Matrix() = default;
    Matrix(std::size_t r, std::size_t c, double fill = 0.0)
        : rows(r), cols(c), data(r * c, fill) {
        if (r == 0 || c == 0)
            throw std::invalid_argument("Matrix: rows and cols must be >= 1");
    }

    double& operator()(std::size_t i, std::size_t j) { return data[i * cols + j]; }
    double operator()(std::size_t i, std::size_t j) const { return data[i * cols + j]; }
};

// y = M * v
Vec matvec(const Matrix& m, const Vec& v);

// y = M^T * v
Vec matvec_t(const Matrix& m, const Vec& v);

// M += a * u v^T (rank-one accumulate, used by backprop)
void add_outer(Matrix& m, const Vec& u, const Vec& v, double a = 1.0);

// y += a * x
void axpy(Vec& y, const Vec& x, double a = 1.0);

Vec tanh_map(const Vec& v);

double dot(const Vec& a, const Vec& b);
double norm2(const Vec& v);

// Deterministic PRNG: mt19937_64 behind a named wrapper.  Every task owns
// its own Rng; streams for subtasks are derived with derive_seed so that
// parallel evaluation stays reproducible.
class Rng {
  public:
    explicit Rng(std::uint64_t seed) : seed_(seed), engine_(seed) {}

    std::uint64_t seed() const { return seed_; }

    // standard normal draw
    double gauss() { return normal_(engine_); }

    // uniform on [lo, hi)
    double uniform(double lo, double hi) {
        return std::uniform_real_distribution<double>(lo, hi)(engine_);
    }

    // uniform integer on [lo, hi] inclusive
    std::uint64_t uniform_int(std::uint64_t lo, std::uint64_t hi) {
        return std::uniform_int_distribution<std::uint64_t>(lo, hi)(engine_);
    }

    std::mt19937_64& engine() { return engine_; }

  private:
    std::uint64_t seed_;
    std::mt19937_64 engine_;
    std::normal_distribution<double> normal_{0.0, 1.0};
};

// Splitmix64-style seed derivation: mixes a master seed with a textual tag
// (FNV-1a hashed) so independent tasks get independent, reproducible streams.
std::uint64_t derive_seed(std::uint64_t master, const std::string& tag);

}  // namespace seqlab
