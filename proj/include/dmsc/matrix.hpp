#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace dmsc {

// Dense row-major matrix of doubles. The carrier type for every feature
// matrix, embedding, assignment distribution and gradient in the engine.
class Matrix {
public:
    Matrix() = default;
    Matrix(std::size_t rows, std::size_t cols, double value = 0.0);

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }
    std::size_t size() const { return data_.size(); }
    bool empty() const { return data_.empty(); }

    double& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
    double operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }

    double* data() { return data_.data(); }
    const double* data() const { return data_.data(); }

    std::span<double> row(std::size_t i) { return {data_.data() + i * cols_, cols_}; }
    std::span<const double> row(std::size_t i) const { return {data_.data() + i * cols_, cols_}; }

    void fill(double value);

    friend bool operator==(const Matrix&, const Matrix&) = default;

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<double> data_;
};

// a (r×k) * b (k×c)
Matrix matmul(const Matrix& a, const Matrix& b);
// a (r×k) * b^T (c×k)
Matrix matmul_nt(const Matrix& a, const Matrix& b);
// a^T (k×r) * b (k×c)
Matrix matmul_tn(const Matrix& a, const Matrix& b);

// y += alpha * x
void axpy(double alpha, const Matrix& x, Matrix& y);
void scale(Matrix& m, double alpha);

bool all_finite(const Matrix& m);
bool all_finite(std::span<const double> v);

double squared_distance(std::span<const double> a, std::span<const double> b);

// Columnwise concatenation of row-aligned blocks.
Matrix hcat(const std::vector<Matrix>& blocks);
// Inverse of hcat for the given per-block widths.
std::vector<Matrix> hsplit(const Matrix& m, const std::vector<std::size_t>& widths);

}  // namespace dmsc
