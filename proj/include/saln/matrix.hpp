#pragma once

#include <cmath>
#include <cstddef>
#include <vector>

#include "saln/errors.hpp"

namespace saln {

/// Dense row-major matrix of doubles. Sized for batch-scale linear algebra;
/// no views, no sparsity.
class Matrix {
public:
    Matrix() = default;
    Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
        : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

    static Matrix identity(std::size_t n) {
        Matrix m(n, n);
        for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
        return m;
    }

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }
    std::size_t size() const { return data_.size(); }

    double& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
    double operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }

    double* row(std::size_t i) { return data_.data() + i * cols_; }
    const double* row(std::size_t i) const { return data_.data() + i * cols_; }

    double* data() { return data_.data(); }
    const double* data() const { return data_.data(); }

    std::vector<double>& values() { return data_; }
    const std::vector<double>& values() const { return data_; }

    bool all_finite() const {
        for (double v : data_)
            if (!std::isfinite(v)) return false;
        return true;
    }

    bool same_shape(const Matrix& o) const { return rows_ == o.rows_ && cols_ == o.cols_; }

    friend bool operator==(const Matrix& a, const Matrix& b) {
        return a.rows_ == b.rows_ && a.cols_ == b.cols_ && a.data_ == b.data_;
    }

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<double> data_;
};

/// C = A * B. ikj order keeps the inner loop contiguous in B and C.
inline Matrix matmul(const Matrix& a, const Matrix& b) {
    if (a.cols() != b.rows()) throw DimensionMismatch("matmul: inner dimensions differ");
    Matrix c(a.rows(), b.cols());
    for (std::size_t i = 0; i < a.rows(); ++i) {
        const double* arow = a.row(i);
        double* crow = c.row(i);
        for (std::size_t k = 0; k < a.cols(); ++k) {
            const double aik = arow[k];
            if (aik == 0.0) continue;
            const double* brow = b.row(k);
            for (std::size_t j = 0; j < b.cols(); ++j) crow[j] += aik * brow[j];
        }
    }
    return c;
}

/// C = A^T * B without forming the transpose.
inline Matrix matmul_at_b(const Matrix& a, const Matrix& b) {
    if (a.rows() != b.rows()) throw DimensionMismatch("matmul_at_b: row counts differ");
    Matrix c(a.cols(), b.cols());
    for (std::size_t k = 0; k < a.rows(); ++k) {
        const double* arow = a.row(k);
        const double* brow = b.row(k);
        for (std::size_t i = 0; i < a.cols(); ++i) {
            const double aki = arow[i];
            if (aki == 0.0) continue;
            double* crow = c.row(i);
            for (std::size_t j = 0; j < b.cols(); ++j) crow[j] += aki * brow[j];
        }
    }
    return c;
}

/// C = A * B^T without forming the transpose.
inline Matrix matmul_a_bt(const Matrix& a, const Matrix& b) {
    if (a.cols() != b.cols()) throw DimensionMismatch("matmul_a_bt: column counts differ");
    Matrix c(a.rows(), b.rows());
    for (std::size_t i = 0; i < a.rows(); ++i) {
        const double* arow = a.row(i);
        double* crow = c.row(i);
        for (std::size_t j = 0; j < b.rows(); ++j) {
            const double* brow = b.row(j);
            double acc = 0.0;
            for (std::size_t k = 0; k < a.cols(); ++k) acc += arow[k] * brow[k];
            crow[j] = acc;
        }
    }
    return c;
}

inline Matrix transpose(const Matrix& a) {
    Matrix t(a.cols(), a.rows());
    for (std::size_t i = 0; i < a.rows(); ++i)
        for (std::size_t j = 0; j < a.cols(); ++j) t(j, i) = a(i, j);
    return t;
}

} // namespace saln
