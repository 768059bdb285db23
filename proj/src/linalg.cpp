#include "seqlab/linalg.hpp"

#include <cmath>

namespace seqlab {

namespace {

[[noreturn]] void shape_error(const char* op, std::size_t rows, std::size_t cols,
                              std::size_t dim) {
    throw std::invalid_argument(std::string(op) + ": shape mismatch, matrix " +
                                std::to_string(rows) + "x" + std::to_string(cols) +
                                " vs vector dim " + std::to_string(dim));
}

}  // namespace

Vec matvec(const Matrix& m, const Vec& v) {
    if (m.cols != v.size()) shape_error("matvec", m.rows, m.cols, v.size());
    Vec out(m.rows, 0.0);
    const double* row = m.data.data();
    for (std::size_t i = 0; i < m.rows; ++i, row += m.cols) {
        double acc = 0.0;
        for (std::size_t j = 0; j < m.cols; ++j) acc += row[j] * v[j];
        out[i] = acc;
    }
    return out;
}

Vec matvec_t(const Matrix& m, const Vec& v) {
    if (m.rows != v.size()) shape_error("matvec_t", m.rows, m.cols, v.size());
    Vec out(m.cols, 0.0);
    const double* row = m.data.data();
    for (std::size_t i = 0; i < m.rows; ++i, row += m.cols) {
        const double vi = v[i];
        for (std::size_t j = 0; j < m.cols; ++j) out[j] += row[j] * vi;
    }
    return out;
}

void add_outer(Matrix& m, const Vec& u, const Vec& v, double a) {
    if (m.rows != u.size() || m.cols != v.size())
        throw std::invalid_argument("add_outer: shape mismatch");
    double* row = m.data.data();
    for (std::size_t i = 0; i < m.rows; ++i, row += m.cols) {
        const double ui = a * u[i];
        for (std::size_t j = 0; j < m.cols; ++j) row[j] += ui * v[j];
    }
}

void axpy(Vec& y, const Vec& x, double a) {
    if (y.size() != x.size()) throw std::invalid_argument("axpy: length mismatch");
    for (std::size_t i = 0; i < y.size(); ++i) y[i] += a * x[i];
}

Vec tanh_map(const Vec& v) {
    Vec out(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) out[i] = std::tanh(v[i]);
    return out;
}

double dot(const Vec& a, const Vec& b) {
    if (a.size() != b.size()) throw std::invalid_argument("dot: length mismatch");
    double acc = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) acc += a[i] * b[i];
    return acc;
}

double norm2(const Vec& v) { return std::sqrt(dot(v, v)); }

std::uint64_t derive_seed(std::uint64_t master, const std::string& tag) {
    // FNV-1a over the tag, folded into the master seed, then splitmix64.
    std::uint64_t h = 14695981039346656037ULL;
    for (unsigned char c : tag) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    std::uint64_t z = master + 0x9e3779b97f4a7c15ULL + h;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

}  // namespace seqlab
