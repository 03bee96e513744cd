#include "dmsc/kmeans.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "dmsc/errors.hpp"

namespace dmsc {

namespace {

// Distance-weighted seeding: first center uniform, then each next center drawn
// with probability proportional to the squared distance to the nearest chosen
// center.
Matrix seed_centers(const Matrix& points, std::size_t k, Rng& rng) {
    const std::size_t n = points.rows();
    Matrix centers(k, points.cols());
    std::vector<double> best(n, std::numeric_limits<double>::infinity());

    auto place = [&](std::size_t slot, std::size_t point) {
        const auto src = points.row(point);
        std::copy(src.begin(), src.end(), centers.data() + slot * centers.cols());
        for (std::size_t i = 0; i < n; ++i) {
            best[i] = std::min(best[i], squared_distance(points.row(i), centers.row(slot)));
        }
    };

    place(0, rng.index(n));
    for (std::size_t slot = 1; slot < k; ++slot) {
        double total = 0.0;
        for (double w : best) total += w;
        if (total <= 0.0) {
            // All remaining points coincide with chosen centers; any pick works.
            place(slot, rng.index(n));
            continue;
        }
        double ticket = rng.uniform() * total;
        std::size_t pick = n - 1;
        for (std::size_t i = 0; i < n; ++i) {
            ticket -= best[i];
            if (ticket <= 0.0) {
                pick = i;
                break;
            }
        }
        place(slot, pick);
    }
    return centers;
}

std::size_t nearest_center(const Matrix& centers, std::span<const double> point) {
    std::size_t best = 0;
    double best_d = squared_distance(point, centers.row(0));
    for (std::size_t j = 1; j < centers.rows(); ++j) {
        const double d = squared_distance(point, centers.row(j));
        if (d < best_d) {
            best_d = d;
            best = j;
        }
    }
    return best;
}

}  // namespace

KMeansResult kmeans(const Matrix& points, std::size_t k, std::uint64_t seed, std::size_t max_iter,
                    double tol) {
    const std::size_t n = points.rows();
    if (k < 1) throw config_error("kmeans: need K >= 1");
    if (n < k) {
        throw config_error("kmeans: " + std::to_string(n) + " points cannot form " +
                           std::to_string(k) + " clusters");
    }

    Rng rng(seed);
    KMeansResult result;
    result.centers = seed_centers(points, k, rng);
    result.assignments.assign(n, -1);

    const std::size_t d = points.cols();
    Matrix next(k, d);
    std::vector<std::size_t> counts(k, 0);

    for (std::size_t iter = 0; iter < max_iter; ++iter) {
        result.iterations = iter + 1;

        bool changed = false;
        std::fill(counts.begin(), counts.end(), 0);
        for (std::size_t i = 0; i < n; ++i) {
            const int j = static_cast<int>(nearest_center(result.centers, points.row(i)));
            if (j != result.assignments[i]) {
                result.assignments[i] = j;
                changed = true;
            }
            ++counts[static_cast<std::size_t>(j)];
        }

        // Re-seed empty clusters to the point farthest from its current
        // center, taken from a cluster that can spare one.
        for (std::size_t j = 0; j < k; ++j) {
            if (counts[j] > 0) continue;
            std::size_t far = n;
            double far_d = -1.0;
            for (std::size_t i = 0; i < n; ++i) {
                const auto home = static_cast<std::size_t>(result.assignments[i]);
                if (counts[home] < 2) continue;
                const double dist = squared_distance(points.row(i), result.centers.row(home));
                if (dist > far_d) {
                    far_d = dist;
                    far = i;
                }
            }
            if (far == n) throw numeric_error("kmeans: cannot repopulate empty cluster");
            --counts[static_cast<std::size_t>(result.assignments[far])];
            result.assignments[far] = static_cast<int>(j);
            counts[j] = 1;
            changed = true;
        }

        next.fill(0.0);
        for (std::size_t i = 0; i < n; ++i) {
            const auto row = points.row(i);
            double* dst = next.data() + static_cast<std::size_t>(result.assignments[i]) * d;
            for (std::size_t c = 0; c < d; ++c) dst[c] += row[c];
        }
        for (std::size_t j = 0; j < k; ++j) {
            double* dst = next.data() + j * d;
            for (std::size_t c = 0; c < d; ++c) dst[c] /= static_cast<double>(counts[j]);
        }

        double max_shift = 0.0;
        for (std::size_t j = 0; j < k; ++j) {
            max_shift = std::max(max_shift, squared_distance(result.centers.row(j), next.row(j)));
        }
        result.centers = next;
        if (!changed || max_shift <= tol * tol) break;
    }

    result.inertia = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        result.assignments[i] = static_cast<int>(nearest_center(result.centers, points.row(i)));
        result.inertia += squared_distance(
            points.row(i), result.centers.row(static_cast<std::size_t>(result.assignments[i])));
    }
    return result;
}

}  // namespace dmsc
