#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <vector>

#include "dmsc/matrix.hpp"
#include "dmsc/rng.hpp"

namespace dmsc {

enum class Activation { kRelu, kIdentity };

struct DenseLayer {
    Matrix weight;             // out × in
    std::vector<double> bias;  // out
    Activation activation = Activation::kRelu;

    std::size_t in_dim() const { return weight.cols(); }
    std::size_t out_dim() const { return weight.rows(); }
};

// Glorot-uniform initialization: entries uniform in ±sqrt(6/(fan_in+fan_out)).
Matrix xavier_init(std::size_t rows, std::size_t cols, Rng& rng);
Matrix xavier_init(std::size_t rows, std::size_t cols, std::uint64_t seed);

// Per-layer intermediates kept by forward for use in backward.
// inputs[l] is the batch fed to layer l, pre[l] its pre-activation.
struct ForwardCache {
    std::vector<Matrix> inputs;
    std::vector<Matrix> pre;
};

// Batched forward pass; rows are samples. Returns the activated output of the
// last layer and optionally fills the cache.
Matrix forward(const std::vector<DenseLayer>& layers, const Matrix& x, ForwardCache* cache = nullptr);

struct LayerGradients {
    Matrix weight;
    std::vector<double> bias;
};

struct BackwardResult {
    std::vector<LayerGradients> layers;
    Matrix input;  // gradient w.r.t. the batch fed to the first layer
};

// Backpropagation through the stack that produced `cache`. output_gradient is
// the loss gradient w.r.t. the activated output, same shape as the output.
BackwardResult backward(const std::vector<DenseLayer>& layers, const ForwardCache& cache,
                        const Matrix& output_gradient);

// Flat-vector views of a layer stack, used by the optimizer, the gradient
// checker and the checkpoint writer. Order: per layer, weights row-major then
// biases.
std::size_t param_count(const std::vector<DenseLayer>& layers);
void copy_params(const std::vector<DenseLayer>& layers, std::span<double> out);
void set_params(std::vector<DenseLayer>& layers, std::span<const double> in);
void copy_grads(const std::vector<LayerGradients>& grads, std::span<double> out);
void accumulate_grads(const std::vector<LayerGradients>& grads, std::span<double> out, double alpha);

// Text serialization of one layer: shape + activation header line, weight rows,
// then the bias row, all full precision.
class LineReader;
void write_layer(std::ostream& out, const DenseLayer& layer);
DenseLayer read_layer(LineReader& in);

}  // namespace dmsc
