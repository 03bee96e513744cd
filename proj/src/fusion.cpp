#include "dmsc/fusion.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "dmsc/errors.hpp"

namespace dmsc {

namespace {

constexpr double kLogFloor = 1e-12;   // guard inside log terms
constexpr double kDivFloor = 1e-300;  // guard against underflow-to-zero denominators

void check_state(const EmbeddingSet& z, const ClusterState& state) {
    const std::size_t views = state.view_count();
    const std::size_t k = state.cluster_count();
    if (k < 1 || views < 1) throw config_error("cluster state needs K >= 1 and V >= 1");
    if (!(state.alpha > 0.0)) throw config_error("degrees of freedom must be positive");
    if (state.centers.size() != views) {
        throw shape_error("center blocks (" + std::to_string(state.centers.size()) +
                          ") do not match view count (" + std::to_string(views) + ")");
    }
    if (z.view_count() != views) {
        throw shape_error("embedding views (" + std::to_string(z.view_count()) +
                          ") do not match cluster state views (" + std::to_string(views) + ")");
    }
    for (std::size_t v = 0; v < views; ++v) {
        if (state.centers[v].rows() != k) {
            throw shape_error("center block " + std::to_string(v) + " has " +
                              std::to_string(state.centers[v].rows()) + " rows, expected K=" +
                              std::to_string(k));
        }
        if (state.centers[v].cols() != z.per_view[v].cols()) {
            throw shape_error("view " + std::to_string(v) + " embedding width " +
                              std::to_string(z.per_view[v].cols()) + " does not match center width " +
                              std::to_string(state.centers[v].cols()));
        }
        if (z.per_view[v].rows() != z.per_view.front().rows()) {
            throw shape_error("embedding views are not row-aligned");
        }
    }
}

void check_pairs(const Matrix& z_concat, const ConstraintSet& constraints) {
    for (const ConstraintPair& pair : constraints.pairs) {
        if (pair.i >= z_concat.rows() || pair.k >= z_concat.rows()) {
            throw config_error("constraint pair (" + std::to_string(pair.i) + ", " +
                               std::to_string(pair.k) + ") is out of range for " +
                               std::to_string(z_concat.rows()) + " samples");
        }
    }
}

// Per-sample kernel terms shared by soft_assignment and clustering_gradients.
// For sample i: dist(j,v) = ‖z_i^(v) − m_j^(v)‖²/α, kernel(j,v) =
// (1 + dist)^{-(α+1)/2}, numer[j] = Σ_v π_j^(v) kernel(j,v), u = Σ_j numer[j].
struct KernelRow {
    Matrix dist;                // K × V
    Matrix kernel;              // K × V
    std::vector<double> numer;  // K
    double u = 0.0;
};

KernelRow kernel_row(const EmbeddingSet& z, const ClusterState& state, const Matrix& pi,
                     std::size_t i) {
    const std::size_t k = state.cluster_count();
    const std::size_t views = state.view_count();
    KernelRow row;
    row.dist = Matrix(k, views);
    row.kernel = Matrix(k, views);
    row.numer.assign(k, 0.0);
    const double exponent = -(state.alpha + 1.0) / 2.0;
    for (std::size_t j = 0; j < k; ++j) {
        for (std::size_t v = 0; v < views; ++v) {
            const double d =
                squared_distance(z.per_view[v].row(i), state.centers[v].row(j)) / state.alpha;
            const double kern = std::pow(1.0 + d, exponent);
            row.dist(j, v) = d;
            row.kernel(j, v) = kern;
            row.numer[j] += pi(j, v) * kern;
        }
        row.u += row.numer[j];
    }
    return row;
}

}  // namespace

Matrix view_weights(const Matrix& weight_logits) {
    Matrix pi(weight_logits.rows(), weight_logits.cols());
    for (std::size_t j = 0; j < weight_logits.rows(); ++j) {
        const auto logits = weight_logits.row(j);
        const double shift = *std::max_element(logits.begin(), logits.end());
        double denom = 0.0;
        for (std::size_t v = 0; v < logits.size(); ++v) {
            pi(j, v) = std::exp(logits[v] - shift);
            denom += pi(j, v);
        }
        for (std::size_t v = 0; v < logits.size(); ++v) pi(j, v) /= denom;
    }
    return pi;
}

Matrix soft_assignment(const EmbeddingSet& z, const ClusterState& state) {
    check_state(z, state);
    const std::size_t n = z.sample_count();
    const std::size_t k = state.cluster_count();
    const Matrix pi = view_weights(state.weight_logits);
    Matrix q(n, k);
    for (std::size_t i = 0; i < n; ++i) {
        const KernelRow row = kernel_row(z, state, pi, i);
        for (std::size_t j = 0; j < k; ++j) q(i, j) = row.numer[j] / row.u;
    }
    return q;
}

Matrix target_distribution(const Matrix& q) {
    const std::size_t n = q.rows();
    const std::size_t k = q.cols();
    std::vector<double> freq(k, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < k; ++j) freq[j] += q(i, j);
    }
    Matrix p(n, k);
    for (std::size_t i = 0; i < n; ++i) {
        double denom = 0.0;
        for (std::size_t j = 0; j < k; ++j) {
            p(i, j) = freq[j] > 0.0 ? q(i, j) * q(i, j) / freq[j] : 0.0;
            denom += p(i, j);
        }
        for (std::size_t j = 0; j < k; ++j) p(i, j) /= denom;
    }
    return p;
}

double clustering_loss(const Matrix& p, const Matrix& q) {
    if (p.rows() != q.rows() || p.cols() != q.cols()) {
        throw shape_error("clustering_loss: P and Q shapes differ");
    }
    double loss = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) {
        const double pi = p.data()[i];
        if (pi <= 0.0) continue;
        const double qi = std::max(q.data()[i], kLogFloor);
        loss += pi * std::log(pi / qi);
    }
    return loss;
}

double constraint_loss(const Matrix& z_concat, const ConstraintSet& constraints) {
    check_pairs(z_concat, constraints);
    double loss = 0.0;
    for (const ConstraintPair& pair : constraints.pairs) {
        const double d2 = squared_distance(z_concat.row(pair.i), z_concat.row(pair.k));
        loss += 2.0 * static_cast<double>(pair.link) * d2;
    }
    return loss;
}

LossReport total_loss(double l_rec, double l_clu, double l_con, double gamma, double lambda) {
    LossReport report;
    report.l_rec = l_rec;
    report.l_clu = l_clu;
    report.l_con = l_con;
    report.gamma = gamma;
    report.lambda = lambda;
    report.total = l_rec + gamma * l_clu + lambda * l_con;
    return report;
}

CluGradients clustering_gradients(const EmbeddingSet& z, const ClusterState& state, const Matrix& p) {
    check_state(z, state);
    const std::size_t n = z.sample_count();
    const std::size_t k = state.cluster_count();
    const std::size_t views = state.view_count();
    if (p.rows() != n || p.cols() != k) throw shape_error("clustering_gradients: P shape mismatch");

    const Matrix pi = view_weights(state.weight_logits);

    CluGradients g;
    g.embeddings.reserve(views);
    g.centers.reserve(views);
    for (std::size_t v = 0; v < views; ++v) {
        g.embeddings.emplace_back(n, z.per_view[v].cols());
        g.centers.emplace_back(k, z.per_view[v].cols());
    }
    g.weight_logits = Matrix(k, views);
    Matrix pi_grad(k, views);  // ∂L/∂π accumulated over samples

    for (std::size_t i = 0; i < n; ++i) {
        const KernelRow row = kernel_row(z, state, pi, i);
        for (std::size_t j = 0; j < k; ++j) {
            // ∂L/∂numer_ij with q_ij = numer_ij / u_i and row of P fixed.
            const double a = 1.0 / row.u - p(i, j) / std::max(row.numer[j], kDivFloor);
            for (std::size_t v = 0; v < views; ++v) {
                pi_grad(j, v) += a * row.kernel(j, v);
                // Chain through kernel = (1+d)^{-(α+1)/2} and d = ‖z−m‖²/α:
                // ∂kernel/∂d = -(α+1)/2 · kernel/(1+d).
                const double dloss_dd = a * pi(j, v) * (-(state.alpha + 1.0) / 2.0) *
                                        row.kernel(j, v) / (1.0 + row.dist(j, v));
                const double coeff = dloss_dd * 2.0 / state.alpha;
                const auto zi = z.per_view[v].row(i);
                const auto mj = state.centers[v].row(j);
                double* gz = g.embeddings[v].data() + i * g.embeddings[v].cols();
                double* gm = g.centers[v].data() + j * g.centers[v].cols();
                for (std::size_t c = 0; c < zi.size(); ++c) {
                    const double diff = zi[c] - mj[c];
                    gz[c] += coeff * diff;
                    gm[c] -= coeff * diff;
                }
            }
        }
    }

    // Softmax backprop: ∂L/∂w_jv = π_jv (∂L/∂π_jv − Σ_v' π_jv' ∂L/∂π_jv').
    for (std::size_t j = 0; j < k; ++j) {
        double mix = 0.0;
        for (std::size_t v = 0; v < views; ++v) mix += pi(j, v) * pi_grad(j, v);
        for (std::size_t v = 0; v < views; ++v) {
            g.weight_logits(j, v) = pi(j, v) * (pi_grad(j, v) - mix);
        }
    }
    return g;
}

Matrix constraint_gradients(const Matrix& z_concat, const ConstraintSet& constraints) {
    check_pairs(z_concat, constraints);
    Matrix g(z_concat.rows(), z_concat.cols());
    for (const ConstraintPair& pair : constraints.pairs) {
        const auto zi = z_concat.row(pair.i);
        const auto zk = z_concat.row(pair.k);
        double* gi = g.data() + pair.i * g.cols();
        double* gk = g.data() + pair.k * g.cols();
        const double c = 4.0 * static_cast<double>(pair.link);
        for (std::size_t col = 0; col < zi.size(); ++col) {
            const double diff = zi[col] - zk[col];
            gi[col] += c * diff;
            gk[col] -= c * diff;
        }
    }
    return g;
}

std::vector<int> pseudo_labels(const Matrix& q) {
    std::vector<int> labels(q.rows(), 0);
    for (std::size_t i = 0; i < q.rows(); ++i) {
        const auto row = q.row(i);
        std::size_t best = 0;
        for (std::size_t j = 1; j < row.size(); ++j) {
            if (row[j] > row[best]) best = j;
        }
        labels[i] = static_cast<int>(best);
    }
    return labels;
}

}  // namespace dmsc
