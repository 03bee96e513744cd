#pragma once

#include <vector>

#include "dmsc/matrix.hpp"

namespace dmsc {

/// Cross-tabulation of two label vectors. Rows index the distinct values of
/// the first vector, columns those of the second, both in sorted order.
struct ContingencyTable {
    Matrix counts;                   // R × C
    std::vector<int> row_values;     // sorted distinct values of y
    std::vector<int> col_values;     // sorted distinct values of s
    std::vector<double> row_totals;  // length R
    std::vector<double> col_totals;  // length C
    double total = 0.0;
};

ContingencyTable contingency(const std::vector<int>& y, const std::vector<int>& s);

struct HungarianResult {
    std::vector<std::size_t> assignment;  // row i -> column assignment[i]
    double cost = 0.0;
};

/// Minimum-cost perfect matching. Rectangular inputs are zero-padded to square
/// internally; rows matched to padded columns get an assignment index >= the
/// original column count and contribute zero cost.
HungarianResult hungarian(const Matrix& cost);

/// Clustering accuracy: the best matching fraction over one-to-one cluster ->
/// class mappings, found by minimum-cost matching on the negated contingency
/// counts.
double acc(const std::vector<int>& y, const std::vector<int>& s);

/// Normalized mutual information I(y;s) / max{H(y), H(s)} with natural logs;
/// defined as 0 when the mutual information is 0.
double nmi(const std::vector<int>& y, const std::vector<int>& s);

/// Adjusted Rand index; the degenerate case with zero denominator (e.g. both
/// labelings constant) is reported as 1.
double ari(const std::vector<int>& y, const std::vector<int>& s);

}  // namespace dmsc
