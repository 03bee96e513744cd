#pragma once

#include <vector>

#include "dmsc/autoencoder.hpp"
#include "dmsc/constraints.hpp"
#include "dmsc/matrix.hpp"

namespace dmsc {

/// Clustering-head parameters: per-view cluster centers, the unconstrained
/// view-weight logits, and the Student-t degrees of freedom.
struct ClusterState {
    std::vector<Matrix> centers;  // per view: K × d^(v)
    Matrix weight_logits;         // K × V, row j holds cluster j's logits over views
    double alpha = 1.0;

    std::size_t cluster_count() const { return weight_logits.rows(); }
    std::size_t view_count() const { return weight_logits.cols(); }
};

/// Soft assignment Q, its sharpened target P, and the argmax pseudo-labels.
struct AssignmentState {
    Matrix q;                 // n × K
    Matrix p;                 // n × K
    std::vector<int> labels;  // length n
};

/// Joint objective report; total = l_rec + gamma * l_clu + lambda * l_con
/// exactly as computed.
struct LossReport {
    double l_rec = 0.0;
    double l_clu = 0.0;
    double l_con = 0.0;
    double gamma = 0.0;
    double lambda = 0.0;
    double total = 0.0;
};

/// Per-cluster convex weights over views: rowwise softmax of the logits,
/// shifted by the row maximum so large-magnitude logits stay stable.
Matrix view_weights(const Matrix& weight_logits);

/// Multi-view Student-t soft assignment: q_ij is the view-weighted kernel mass
/// of sample i at center j, normalized over clusters and views jointly so each
/// row sums to 1.
Matrix soft_assignment(const EmbeddingSet& z, const ClusterState& state);

/// Self-training target: p_ij ∝ q_ij² / f_j with cluster frequency
/// f_j = Σ_i q_ij, renormalized per row. Soft-empty clusters (f_j = 0) are
/// excluded from the row normalization.
Matrix target_distribution(const Matrix& q);

/// KL divergence Σ_ij p_ij log(p_ij / q_ij) with 0·log(0/q) ≡ 0 and q floored
/// at 1e-12 inside the log as a numerical guard.
double clustering_loss(const Matrix& p, const Matrix& q);

/// Pairwise-constraint penalty over concatenated embeddings. Each stored
/// unordered pair contributes symmetrically (both orderings), i.e.
/// 2·c·‖z_i − z_k‖² per pair: must-links pull, cannot-links push.
double constraint_loss(const Matrix& z_concat, const ConstraintSet& constraints);

LossReport total_loss(double l_rec, double l_clu, double l_con, double gamma, double lambda);

/// Gradients of the KL clustering loss with P held fixed.
struct CluGradients {
    std::vector<Matrix> embeddings;  // per view: n × d^(v)
    std::vector<Matrix> centers;     // per view: K × d^(v)
    Matrix weight_logits;            // K × V
};

CluGradients clustering_gradients(const EmbeddingSet& z, const ClusterState& state, const Matrix& p);

/// Gradient of constraint_loss w.r.t. every row of the concatenated embedding:
/// 4·Σ_k c_ik (z_i − z_k) over the pairs touching i.
Matrix constraint_gradients(const Matrix& z_concat, const ConstraintSet& constraints);

/// Argmax cluster per row; ties resolve to the lowest index.
std::vector<int> pseudo_labels(const Matrix& q);

}  // namespace dmsc
