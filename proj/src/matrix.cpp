#include "dmsc/matrix.hpp"

#include <algorithm>
#include <cmath>

#include "dmsc/errors.hpp"

namespace dmsc {

Matrix::Matrix(std::size_t rows, std::size_t cols, double value)
    : rows_(rows), cols_(cols), data_(rows * cols, value) {}

void Matrix::fill(double value) { std::fill(data_.begin(), data_.end(), value); }

Matrix matmul(const Matrix& a, const Matrix& b) {
    if (a.cols() != b.rows()) throw shape_error("matmul: inner dimensions disagree");
    Matrix out(a.rows(), b.cols());
    const std::size_t n = a.rows(), k = a.cols(), m = b.cols();
    for (std::size_t i = 0; i < n; ++i) {
        double* out_row = out.data() + i * m;
        const double* a_row = a.data() + i * k;
        for (std::size_t p = 0; p < k; ++p) {
            const double av = a_row[p];
            if (av == 0.0) continue;
            const double* b_row = b.data() + p * m;
            for (std::size_t j = 0; j < m; ++j) out_row[j] += av * b_row[j];
        }
    }
    return out;
}

Matrix matmul_nt(const Matrix& a, const Matrix& b) {
    if (a.cols() != b.cols()) throw shape_error("matmul_nt: inner dimensions disagree");
    Matrix out(a.rows(), b.rows());
    const std::size_t n = a.rows(), k = a.cols(), m = b.rows();
    for (std::size_t i = 0; i < n; ++i) {
        const double* a_row = a.data() + i * k;
        double* out_row = out.data() + i * m;
        for (std::size_t j = 0; j < m; ++j) {
            const double* b_row = b.data() + j * k;
            double acc = 0.0;
            for (std::size_t p = 0; p < k; ++p) acc += a_row[p] * b_row[p];
            out_row[j] = acc;
        }
    }
    return out;
}

Matrix matmul_tn(const Matrix& a, const Matrix& b) {
    if (a.rows() != b.rows()) throw shape_error("matmul_tn: inner dimensions disagree");
    Matrix out(a.cols(), b.cols());
    const std::size_t k = a.rows(), n = a.cols(), m = b.cols();
    for (std::size_t p = 0; p < k; ++p) {
        const double* a_row = a.data() + p * n;
        const double* b_row = b.data() + p * m;
        for (std::size_t i = 0; i < n; ++i) {
            const double av = a_row[i];
            if (av == 0.0) continue;
            double* out_row = out.data() + i * m;
            for (std::size_t j = 0; j < m; ++j) out_row[j] += av * b_row[j];
        }
    }
    return out;
}

void axpy(double alpha, const Matrix& x, Matrix& y) {
    if (x.rows() != y.rows() || x.cols() != y.cols()) throw shape_error("axpy: shape mismatch");
    const double* xp = x.data();
    double* yp = y.data();
    for (std::size_t i = 0; i < x.size(); ++i) yp[i] += alpha * xp[i];
}

void scale(Matrix& m, double alpha) {
    double* p = m.data();
    for (std::size_t i = 0; i < m.size(); ++i) p[i] *= alpha;
}

bool all_finite(const Matrix& m) { return all_finite({m.data(), m.size()}); }

bool all_finite(std::span<const double> v) {
    for (double x : v) {
        if (!std::isfinite(x)) return false;
    }
    return true;
}

double squared_distance(std::span<const double> a, std::span<const double> b) {
    double acc = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double d = a[i] - b[i];
        acc += d * d;
    }
    return acc;
}

Matrix hcat(const std::vector<Matrix>& blocks) {
    if (blocks.empty()) return {};
    std::size_t cols = 0;
    for (const Matrix& b : blocks) {
        if (b.rows() != blocks[0].rows()) throw shape_error("hcat: row counts disagree");
        cols += b.cols();
    }
    Matrix out(blocks[0].rows(), cols);
    for (std::size_t i = 0; i < out.rows(); ++i) {
        std::size_t offset = 0;
        for (const Matrix& b : blocks) {
            std::copy_n(b.data() + i * b.cols(), b.cols(), out.data() + i * cols + offset);
            offset += b.cols();
        }
    }
    return out;
}

std::vector<Matrix> hsplit(const Matrix& m, const std::vector<std::size_t>& widths) {
    std::size_t total = 0;
    for (std::size_t w : widths) total += w;
    if (total != m.cols()) throw shape_error("hsplit: widths do not cover columns");
    std::vector<Matrix> out;
    out.reserve(widths.size());
    std::size_t offset = 0;
    for (std::size_t w : widths) {
        Matrix block(m.rows(), w);
        for (std::size_t i = 0; i < m.rows(); ++i) {
            std::copy_n(m.data() + i * m.cols() + offset, w, block.data() + i * w);
        }
        out.push_back(std::move(block));
        offset += w;
    }
    return out;
}

}  // namespace dmsc
