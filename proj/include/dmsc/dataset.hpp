#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include "dmsc/matrix.hpp"

namespace dmsc {

// V row-aligned feature matrices over the same n samples, plus optional
// ground-truth labels.
struct MultiViewDataset {
    std::vector<Matrix> views;
    std::vector<int> labels;  // empty when absent

    std::size_t sample_count() const { return views.empty() ? 0 : views.front().rows(); }
    std::size_t view_count() const { return views.size(); }
    bool has_labels() const { return !labels.empty(); }
};

// View file format: header line "n D", then n whitespace-separated rows of D
// decimal reals. Full-precision printing makes save/load an exact round trip.
Matrix load_matrix(const std::filesystem::path& path);
void save_matrix(const Matrix& m, const std::filesystem::path& path);

// Label files: one integer per line.
std::vector<int> load_labels(const std::filesystem::path& path);
void save_labels(const std::vector<int>& labels, const std::filesystem::path& path);

MultiViewDataset load_views(const std::vector<std::filesystem::path>& paths);

// Affinely maps each view so its global min lands on -1 and max on +1.
// Constant views map to all zeros; views already spanning [-1, 1] are left
// untouched, which makes the operation idempotent.
Matrix rescale_view(const Matrix& view);
MultiViewDataset rescale(const MultiViewDataset& dataset);

// Synthetic multi-view Gaussian clusters with membership consistent across
// views. dims gives one feature width per view. Labels are balanced and
// shuffled; centers are drawn with pairwise distance at least `separation`
// per view, and points get isotropic noise of the given standard deviation.
MultiViewDataset make_blobs(std::size_t n, std::size_t k, const std::vector<std::size_t>& dims,
                            double separation, double noise, std::uint64_t seed);

}  // namespace dmsc
