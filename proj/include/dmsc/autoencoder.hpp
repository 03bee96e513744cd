#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include "dmsc/matrix.hpp"
#include "dmsc/nn.hpp"
#include "dmsc/rng.hpp"

namespace dmsc {

/// Layer widths for one view's autoencoder. `hidden` are the encoder's internal
/// widths; the decoder mirrors them in reverse. The embedding layer and the
/// final reconstruction layer use identity activation, everything else ReLU.
struct LayerSpec {
    std::vector<std::size_t> hidden;
    std::size_t embedding = 10;
};

/// One fully connected autoencoder: input -> hidden... -> embedding (encoder),
/// embedding -> reversed hidden... -> input (decoder).
struct AutoencoderBranch {
    std::vector<DenseLayer> encoder;
    std::vector<DenseLayer> decoder;

    std::size_t input_dim() const { return encoder.front().in_dim(); }
    std::size_t embedding_dim() const { return encoder.back().out_dim(); }
};

/// Per-view embeddings produced by encoding a dataset.
struct EmbeddingSet {
    std::vector<Matrix> per_view;

    std::size_t view_count() const { return per_view.size(); }
    std::size_t sample_count() const { return per_view.empty() ? 0 : per_view.front().rows(); }
    /// Total width of the concatenated embedding.
    std::size_t total_dim() const;
    /// Concatenates the per-view embeddings column-wise, view order preserved.
    Matrix concat() const;
};

/// Builds a branch with Xavier-uniform weights and zero biases drawn from `rng`.
AutoencoderBranch make_branch(std::size_t input_dim, const LayerSpec& spec, Rng& rng);

/// Default widths: wide three-layer encoders for inputs of at least 64 columns,
/// a compact two-layer stack otherwise. The embedding is clamped below the
/// input width so the bottleneck actually compresses.
LayerSpec default_layer_spec(std::size_t input_dim);

Matrix encode(const AutoencoderBranch& branch, const Matrix& x);
Matrix decode(const AutoencoderBranch& branch, const Matrix& z);

/// Squared reconstruction error summed over samples and features:
/// sum_i ||x_i - x_hat_i||^2.
double reconstruction_loss(const AutoencoderBranch& branch, const Matrix& x);

/// Sum of per-view reconstruction losses over aligned views.
double reconstruction_loss(const std::vector<AutoencoderBranch>& branches,
                           const std::vector<Matrix>& views);

/// Encodes every view with its branch.
EmbeddingSet encode_all(const std::vector<AutoencoderBranch>& branches,
                        const std::vector<Matrix>& views);

struct PretrainConfig {
    std::size_t epochs = 400;
    std::size_t batch_size = 256;
    double learning_rate = 1e-3;
};

/// Trains each branch on the reconstruction objective with Adam. All branches
/// see the same shuffled minibatch order each epoch; the final short batch of
/// an epoch is kept. Returns history[view][epoch] = that epoch's mean
/// per-sample squared reconstruction error for the view. Throws
/// divergence_error naming the view and epoch when a batch loss stops being
/// finite.
std::vector<std::vector<double>> pretrain(std::vector<AutoencoderBranch>& branches,
                                          const std::vector<Matrix>& views,
                                          const PretrainConfig& config, Rng& rng);

/// Text checkpoint for one branch; full-precision round trip.
void save_branch(const AutoencoderBranch& branch, const std::filesystem::path& path);
AutoencoderBranch load_branch(const std::filesystem::path& path);

}  // namespace dmsc
