#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

namespace dmsc {

/// One pairwise supervision pair over sample indices. `link` is +1 when the two
/// samples are known to share a cluster (must-link) and -1 when they are known
/// to belong to different clusters (cannot-link).
struct ConstraintPair {
    std::size_t i = 0;
    std::size_t k = 0;
    int link = +1;

    friend bool operator==(const ConstraintPair&, const ConstraintPair&) = default;
};

/// A set of pairwise constraints over a dataset of `sample_count` samples.
struct ConstraintSet {
    std::vector<ConstraintPair> pairs;
    std::size_t sample_count = 0;

    std::size_t size() const { return pairs.size(); }
    bool empty() const { return pairs.empty(); }
};

/// Draws `round(proportion * n)` distinct unordered sample pairs uniformly at
/// random (n = labels.size()) and marks each must-link when the two ground-truth
/// labels agree, cannot-link otherwise. Throws config_error when the request
/// exceeds the n*(n-1)/2 available pairs.
ConstraintSet generate_constraints(const std::vector<int>& labels, double proportion,
                                   std::uint64_t seed);

/// Text format: one "i k c" triple per line with c in {-1, +1}.
void save_constraints(const ConstraintSet& constraints, const std::filesystem::path& path);

/// Loads constraints and validates every index against `sample_count`,
/// normalising each pair to i < k and rejecting duplicates, self-pairs, and
/// contradictory duplicates.
ConstraintSet load_constraints(const std::filesystem::path& path, std::size_t sample_count);

}  // namespace dmsc
