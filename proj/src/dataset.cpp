#include "dmsc/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>
#include <string>

#include "dmsc/errors.hpp"
#include "dmsc/rng.hpp"

namespace dmsc {

namespace {

std::ifstream open_input(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw parse_error(path.string(), 0, "cannot open file");
    return in;
}

std::ofstream open_output(const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw config_error("cannot write file: " + path.string());
    return out;
}

void write_full_precision(std::ofstream& out, double value) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.17g", value);
    out << buf;
}

}  // namespace

Matrix load_matrix(const std::filesystem::path& path) {
    std::ifstream in = open_input(path);
    std::string line;
    if (!std::getline(in, line)) throw parse_error(path.string(), 1, "missing header line");
    std::istringstream header(line);
    long long rows = -1, cols = -1;
    if (!(header >> rows >> cols) || rows < 0 || cols < 1) {
        throw parse_error(path.string(), 1, "header must be 'rows cols'");
    }
    Matrix m(static_cast<std::size_t>(rows), static_cast<std::size_t>(cols));
    for (long long i = 0; i < rows; ++i) {
        if (!std::getline(in, line)) {
            throw parse_error(path.string(), static_cast<std::size_t>(i + 2), "unexpected end of file");
        }
        std::istringstream row(line);
        for (long long j = 0; j < cols; ++j) {
            double value;
            if (!(row >> value)) {
                throw parse_error(path.string(), static_cast<std::size_t>(i + 2),
                                  "expected " + std::to_string(cols) + " values, failed at column " +
                                      std::to_string(j + 1));
            }
            m(static_cast<std::size_t>(i), static_cast<std::size_t>(j)) = value;
        }
        double extra;
        if (row >> extra) {
            throw parse_error(path.string(), static_cast<std::size_t>(i + 2), "trailing values on row");
        }
    }
    return m;
}

void save_matrix(const Matrix& m, const std::filesystem::path& path) {
    std::ofstream out = open_output(path);
    out << m.rows() << ' ' << m.cols() << '\n';
    for (std::size_t i = 0; i < m.rows(); ++i) {
        for (std::size_t j = 0; j < m.cols(); ++j) {
            if (j) out << ' ';
            write_full_precision(out, m(i, j));
        }
        out << '\n';
    }
    if (!out) throw config_error("failed while writing: " + path.string());
}

std::vector<int> load_labels(const std::filesystem::path& path) {
    std::ifstream in = open_input(path);
    std::vector<int> labels;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        std::istringstream row(line);
        long long value;
        if (!(row >> value)) throw parse_error(path.string(), line_no, "expected one integer");
        labels.push_back(static_cast<int>(value));
    }
    return labels;
}

void save_labels(const std::vector<int>& labels, const std::filesystem::path& path) {
    std::ofstream out = open_output(path);
    for (int label : labels) out << label << '\n';
    if (!out) throw config_error("failed while writing: " + path.string());
}

MultiViewDataset load_views(const std::vector<std::filesystem::path>& paths) {
    if (paths.empty()) throw config_error("load_views: no view files given");
    MultiViewDataset dataset;
    dataset.views.reserve(paths.size());
    for (const auto& path : paths) {
        Matrix view = load_matrix(path);
        if (!dataset.views.empty() && view.rows() != dataset.views.front().rows()) {
            throw config_error("load_views: row count of " + path.string() + " (" +
                               std::to_string(view.rows()) + ") does not match first view (" +
                               std::to_string(dataset.views.front().rows()) + ")");
        }
        dataset.views.push_back(std::move(view));
    }
    return dataset;
}

Matrix rescale_view(const Matrix& view) {
    if (view.empty()) return view;
    double lo = view.data()[0], hi = view.data()[0];
    for (std::size_t i = 0; i < view.size(); ++i) {
        lo = std::min(lo, view.data()[i]);
        hi = std::max(hi, view.data()[i]);
    }
    if (lo == -1.0 && hi == 1.0) return view;
    Matrix out(view.rows(), view.cols());
    if (lo == hi) return out;  // constant view -> zeros
    const double span = hi - lo;
    for (std::size_t i = 0; i < view.size(); ++i) {
        out.data()[i] = 2.0 * (view.data()[i] - lo) / span - 1.0;
    }
    return out;
}

MultiViewDataset rescale(const MultiViewDataset& dataset) {
    MultiViewDataset out;
    out.labels = dataset.labels;
    out.views.reserve(dataset.views.size());
    for (const Matrix& view : dataset.views) out.views.push_back(rescale_view(view));
    return out;
}

MultiViewDataset make_blobs(std::size_t n, std::size_t k, const std::vector<std::size_t>& dims,
                            double separation, double noise, std::uint64_t seed) {
    if (k < 1 || n < k) throw config_error("make_blobs: need n >= k >= 1");
    if (dims.empty()) throw config_error("make_blobs: need at least one view");
    Rng rng(seed);

    // Balanced labels, shuffled.
    std::vector<int> labels(n);
    for (std::size_t i = 0; i < n; ++i) labels[i] = static_cast<int>(i % k);
    rng.shuffle(labels);

    MultiViewDataset dataset;
    dataset.labels = labels;
    for (std::size_t d : dims) {
        if (d == 0) throw config_error("make_blobs: zero-width view");
        // Centers with pairwise distance >= separation, bounded rejection.
        const double range =
            separation * std::max(1.0, std::pow(static_cast<double>(k), 1.0 / static_cast<double>(d)));
        Matrix centers(k, d);
        for (std::size_t j = 0; j < k; ++j) {
            for (int attempt = 0; attempt < 1000; ++attempt) {
                for (std::size_t c = 0; c < d; ++c) centers(j, c) = rng.uniform(-range, range);
                bool ok = true;
                for (std::size_t j2 = 0; j2 < j && ok; ++j2) {
                    ok = squared_distance(centers.row(j), centers.row(j2)) >= separation * separation;
                }
                if (ok) break;
            }
        }
        Matrix view(n, d);
        for (std::size_t i = 0; i < n; ++i) {
            const auto center = centers.row(static_cast<std::size_t>(labels[i]));
            for (std::size_t c = 0; c < d; ++c) view(i, c) = center[c] + noise * rng.normal();
        }
        dataset.views.push_back(std::move(view));
    }
    return dataset;
}

}  // namespace dmsc
