#pragma once

// Small shared builders for the test binaries.

#include <initializer_list>
#include <random>
#include <vector>

#include "saln/matrix.hpp"
#include "saln/rng.hpp"
#include "saln/spectral.hpp"

namespace testutil {

inline saln::Matrix mat(std::initializer_list<std::initializer_list<double>> rows) {
    const std::size_t r = rows.size();
    const std::size_t c = rows.begin()->size();
    saln::Matrix m(r, c);
    std::size_t i = 0;
    for (const auto& row : rows) {
        std::size_t j = 0;
        for (double v : row) m(i, j++) = v;
        ++i;
    }
    return m;
}

inline saln::FeatureBatch batch_of(std::initializer_list<std::initializer_list<double>> rows) {
    saln::FeatureBatch b;
    b.data = mat(rows);
    return b;
}

/// Batch of standard-normal features.
inline saln::FeatureBatch random_batch(std::size_t n, std::size_t d, std::uint64_t seed) {
    saln::FeatureBatch b;
    b.data = saln::Matrix(n, d);
    std::mt19937_64 rng(seed);
    for (double& v : b.data.values()) v = saln::normal01(rng);
    return b;
}

/// Symmetric matrix with uniform [-1, 1] entries.
inline saln::Matrix random_symmetric(std::size_t n, std::uint64_t seed) {
    saln::Matrix m(n, n);
    std::mt19937_64 rng(seed);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i; j < n; ++j) {
            const double v = saln::uniform_range(rng, -1.0, 1.0);
            m(i, j) = v;
            m(j, i) = v;
        }
    return m;
}

inline double max_abs(const std::vector<double>& v) {
    double best = 0.0;
    for (double x : v) best = std::max(best, std::abs(x));
    return best;
}

/// ||M||_inf: the max absolute row sum.
inline double inf_norm(const saln::Matrix& m) {
    double best = 0.0;
    for (std::size_t i = 0; i < m.rows(); ++i) {
        double acc = 0.0;
        for (std::size_t j = 0; j < m.cols(); ++j) acc += std::abs(m(i, j));
        best = std::max(best, acc);
    }
    return best;
}

/// max_k ||M v_k - lambda_k v_k||_inf over all eigenpairs.
inline double eigen_residual(const saln::Matrix& m, const std::vector<double>& values,
                             const saln::Matrix& vectors) {
    const std::size_t n = m.rows();
    double worst = 0.0;
    for (std::size_t k = 0; k < n; ++k)
        for (std::size_t i = 0; i < n; ++i) {
            double acc = 0.0;
            for (std::size_t j = 0; j < n; ++j) acc += m(i, j) * vectors(j, k);
            worst = std::max(worst, std::abs(acc - values[k] * vectors(i, k)));
        }
    return worst;
}

/// max |V^T V - I| entry.
inline double orthonormality_defect(const saln::Matrix& vectors) {
    const std::size_t n = vectors.rows();
    double worst = 0.0;
    for (std::size_t a = 0; a < n; ++a)
        for (std::size_t b = 0; b < n; ++b) {
            double dot = 0.0;
            for (std::size_t i = 0; i < n; ++i) dot += vectors(i, a) * vectors(i, b);
            worst = std::max(worst, std::abs(dot - (a == b ? 1.0 : 0.0)));
        }
    return worst;
}

} // namespace testutil
