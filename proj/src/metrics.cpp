#include "dmsc/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <string>

#include "dmsc/errors.hpp"

namespace dmsc {

namespace {

void check_lengths(const std::vector<int>& y, const std::vector<int>& s) {
    if (y.size() != s.size()) {
        throw config_error("label vectors have different lengths: " + std::to_string(y.size()) +
                           " vs " + std::to_string(s.size()));
    }
    if (y.empty()) throw config_error("label vectors are empty");
}

std::map<int, std::size_t> value_index(const std::vector<int>& labels) {
    std::map<int, std::size_t> index;
    for (int v : labels) index.emplace(v, 0);
    std::size_t next = 0;
    for (auto& [value, slot] : index) slot = next++;
    return index;
}

}  // namespace

ContingencyTable contingency(const std::vector<int>& y, const std::vector<int>& s) {
    check_lengths(y, s);
    const auto rows = value_index(y);
    const auto cols = value_index(s);

    ContingencyTable table;
    table.counts = Matrix(rows.size(), cols.size());
    table.row_values.reserve(rows.size());
    table.col_values.reserve(cols.size());
    for (const auto& [value, slot] : rows) table.row_values.push_back(value);
    for (const auto& [value, slot] : cols) table.col_values.push_back(value);

    for (std::size_t i = 0; i < y.size(); ++i) {
        table.counts(rows.at(y[i]), cols.at(s[i])) += 1.0;
    }
    table.row_totals.assign(rows.size(), 0.0);
    table.col_totals.assign(cols.size(), 0.0);
    for (std::size_t r = 0; r < rows.size(); ++r) {
        for (std::size_t c = 0; c < cols.size(); ++c) {
            table.row_totals[r] += table.counts(r, c);
            table.col_totals[c] += table.counts(r, c);
        }
    }
    table.total = static_cast<double>(y.size());
    return table;
}

HungarianResult hungarian(const Matrix& cost) {
    if (cost.rows() == 0 || cost.cols() == 0) throw config_error("hungarian: empty cost matrix");
    const std::size_t n = std::max(cost.rows(), cost.cols());

    // Square view with zero padding.
    auto at = [&](std::size_t i, std::size_t j) {
        return (i < cost.rows() && j < cost.cols()) ? cost(i, j) : 0.0;
    };

    // Potentials-based shortest augmenting path, 1-indexed internally.
    const double inf = std::numeric_limits<double>::infinity();
    std::vector<double> u(n + 1, 0.0), v(n + 1, 0.0);
    std::vector<std::size_t> match(n + 1, 0);  // match[j] = row matched to column j
    std::vector<std::size_t> way(n + 1, 0);

    for (std::size_t i = 1; i <= n; ++i) {
        match[0] = i;
        std::size_t j0 = 0;
        std::vector<double> minv(n + 1, inf);
        std::vector<bool> used(n + 1, false);
        do {
            used[j0] = true;
            const std::size_t i0 = match[j0];
            double delta = inf;
            std::size_t j1 = 0;
            for (std::size_t j = 1; j <= n; ++j) {
                if (used[j]) continue;
                const double cur = at(i0 - 1, j - 1) - u[i0] - v[j];
                if (cur < minv[j]) {
                    minv[j] = cur;
                    way[j] = j0;
                }
                if (minv[j] < delta) {
                    delta = minv[j];
                    j1 = j;
                }
            }
            for (std::size_t j = 0; j <= n; ++j) {
                if (used[j]) {
                    u[match[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
        } while (match[j0] != 0);
        do {
            const std::size_t j1 = way[j0];
            match[j0] = match[j1];
            j0 = j1;
        } while (j0 != 0);
    }

    HungarianResult result;
    result.assignment.assign(cost.rows(), 0);
    for (std::size_t j = 1; j <= n; ++j) {
        const std::size_t row = match[j] - 1;
        if (row < cost.rows()) {
            result.assignment[row] = j - 1;
            result.cost += at(row, j - 1);
        }
    }
    return result;
}

double acc(const std::vector<int>& y, const std::vector<int>& s) {
    const ContingencyTable table = contingency(y, s);
    Matrix negated(table.counts.rows(), table.counts.cols());
    for (std::size_t i = 0; i < negated.size(); ++i) negated.data()[i] = -table.counts.data()[i];
    const HungarianResult matching = hungarian(negated);
    return -matching.cost / table.total;
}

double nmi(const std::vector<int>& y, const std::vector<int>& s) {
    const ContingencyTable table = contingency(y, s);
    const double n = table.total;

    double info = 0.0;
    for (std::size_t r = 0; r < table.counts.rows(); ++r) {
        for (std::size_t c = 0; c < table.counts.cols(); ++c) {
            const double nij = table.counts(r, c);
            if (nij <= 0.0) continue;
            info += (nij / n) * std::log(nij * n / (table.row_totals[r] * table.col_totals[c]));
        }
    }
    double hy = 0.0, hs = 0.0;
    for (double t : table.row_totals) {
        if (t > 0.0) hy -= (t / n) * std::log(t / n);
    }
    for (double t : table.col_totals) {
        if (t > 0.0) hs -= (t / n) * std::log(t / n);
    }
    const double denom = std::max(hy, hs);
    if (info <= 0.0 || denom <= 0.0) return 0.0;
    return std::min(info / denom, 1.0);
}

double ari(const std::vector<int>& y, const std::vector<int>& s) {
    const ContingencyTable table = contingency(y, s);

    // Exact integer pair counts; the final ratio is the only division.
    auto pairs2 = [](long long m) { return m * (m - 1) / 2; };
    long long sum_cells = 0, sum_rows = 0, sum_cols = 0;
    for (std::size_t r = 0; r < table.counts.rows(); ++r) {
        for (std::size_t c = 0; c < table.counts.cols(); ++c) {
            sum_cells += pairs2(static_cast<long long>(table.counts(r, c)));
        }
    }
    for (double t : table.row_totals) sum_rows += pairs2(static_cast<long long>(t));
    for (double t : table.col_totals) sum_cols += pairs2(static_cast<long long>(t));
    const long long total_pairs = pairs2(static_cast<long long>(table.total));

    // ari = (index - expected) / (max_index - expected) with
    // expected = sum_rows*sum_cols/total_pairs and max_index = (sum_rows+sum_cols)/2,
    // cleared of fractions so exact cases stay exact.
    const __int128 numer = 2 * (static_cast<__int128>(total_pairs) * sum_cells -
                                static_cast<__int128>(sum_rows) * sum_cols);
    const __int128 denom = static_cast<__int128>(total_pairs) * (sum_rows + sum_cols) -
                           2 * static_cast<__int128>(sum_rows) * sum_cols;
    if (denom == 0) return 1.0;
    return static_cast<double>(numer) / static_cast<double>(denom);
}

}  // namespace dmsc
