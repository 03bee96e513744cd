#pragma once

#include <cstdint>
#include <vector>

#include "dmsc/matrix.hpp"
#include "dmsc/rng.hpp"

namespace dmsc {

struct KMeansResult {
    Matrix centers;                // K × d
    std::vector<int> assignments;  // length n, values in [0, K)
    double inertia = 0.0;          // sum of squared distances to assigned centers
    std::size_t iterations = 0;    // Lloyd iterations executed
};

/// Lloyd's algorithm from distance-weighted (k-means++ style) seeding.
/// Deterministic per seed. Stops when assignments stop changing, the maximum
/// center shift drops below `tol`, or `max_iter` is reached. A cluster left
/// empty by an update is re-seeded to the point farthest from its assigned
/// center.
KMeansResult kmeans(const Matrix& points, std::size_t k, std::uint64_t seed,
                    std::size_t max_iter = 300, double tol = 1e-9);

}  // namespace dmsc
