#include "dmsc/nn.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <string>

#include "dmsc/errors.hpp"
#include "dmsc/textio.hpp"

namespace dmsc {

Matrix xavier_init(std::size_t rows, std::size_t cols, Rng& rng) {
    if (rows == 0 || cols == 0) throw shape_error("xavier_init: zero dimension");
    const double limit = std::sqrt(6.0 / static_cast<double>(rows + cols));
    Matrix m(rows, cols);
    for (std::size_t i = 0; i < m.size(); ++i) m.data()[i] = rng.uniform(-limit, limit);
    return m;
}

Matrix xavier_init(std::size_t rows, std::size_t cols, std::uint64_t seed) {
    Rng rng(seed);
    return xavier_init(rows, cols, rng);
}

namespace {

void apply_activation(Matrix& m, Activation act) {
    if (act == Activation::kIdentity) return;
    double* p = m.data();
    for (std::size_t i = 0; i < m.size(); ++i) {
        if (p[i] < 0.0) p[i] = 0.0;
    }
}

}  // namespace

Matrix forward(const std::vector<DenseLayer>& layers, const Matrix& x, ForwardCache* cache) {
    if (layers.empty()) throw config_error("forward: empty layer stack");
    if (x.cols() != layers.front().in_dim()) throw shape_error("forward: input width mismatch");
    if (cache) {
        cache->inputs.clear();
        cache->pre.clear();
        cache->inputs.reserve(layers.size());
        cache->pre.reserve(layers.size());
    }
    Matrix cur = x;
    for (const DenseLayer& layer : layers) {
        if (cur.cols() != layer.in_dim()) throw shape_error("forward: layer width mismatch");
        Matrix pre = matmul_nt(cur, layer.weight);
        for (std::size_t i = 0; i < pre.rows(); ++i) {
            double* row = pre.data() + i * pre.cols();
            for (std::size_t j = 0; j < pre.cols(); ++j) row[j] += layer.bias[j];
        }
        if (cache) {
            cache->inputs.push_back(std::move(cur));
            cache->pre.push_back(pre);
        }
        apply_activation(pre, layer.activation);
        cur = std::move(pre);
    }
    return cur;
}

BackwardResult backward(const std::vector<DenseLayer>& layers, const ForwardCache& cache,
                        const Matrix& output_gradient) {
    if (cache.inputs.size() != layers.size() || cache.pre.size() != layers.size()) {
        throw config_error("backward: cache does not match layer stack");
    }
    if (output_gradient.rows() != cache.pre.back().rows() ||
        output_gradient.cols() != cache.pre.back().cols()) {
        throw shape_error("backward: output gradient shape mismatch");
    }

    BackwardResult result;
    result.layers.resize(layers.size());

    Matrix grad = output_gradient;
    for (std::size_t l = layers.size(); l-- > 0;) {
        const DenseLayer& layer = layers[l];
        const Matrix& pre = cache.pre[l];
        if (layer.activation == Activation::kRelu) {
            for (std::size_t i = 0; i < grad.size(); ++i) {
                if (pre.data()[i] <= 0.0) grad.data()[i] = 0.0;
            }
        }
        LayerGradients& lg = result.layers[l];
        lg.weight = matmul_tn(grad, cache.inputs[l]);  // out × in
        lg.bias.assign(layer.out_dim(), 0.0);
        for (std::size_t i = 0; i < grad.rows(); ++i) {
            const double* row = grad.data() + i * grad.cols();
            for (std::size_t j = 0; j < grad.cols(); ++j) lg.bias[j] += row[j];
        }
        grad = matmul(grad, layer.weight);  // n × in
    }
    result.input = std::move(grad);
    return result;
}

std::size_t param_count(const std::vector<DenseLayer>& layers) {
    std::size_t n = 0;
    for (const DenseLayer& l : layers) n += l.weight.size() + l.bias.size();
    return n;
}

void copy_params(const std::vector<DenseLayer>& layers, std::span<double> out) {
    std::size_t pos = 0;
    for (const DenseLayer& l : layers) {
        std::copy_n(l.weight.data(), l.weight.size(), out.data() + pos);
        pos += l.weight.size();
        std::copy_n(l.bias.data(), l.bias.size(), out.data() + pos);
        pos += l.bias.size();
    }
}

void set_params(std::vector<DenseLayer>& layers, std::span<const double> in) {
    std::size_t pos = 0;
    for (DenseLayer& l : layers) {
        std::copy_n(in.data() + pos, l.weight.size(), l.weight.data());
        pos += l.weight.size();
        std::copy_n(in.data() + pos, l.bias.size(), l.bias.data());
        pos += l.bias.size();
    }
}

void copy_grads(const std::vector<LayerGradients>& grads, std::span<double> out) {
    std::size_t pos = 0;
    for (const LayerGradients& g : grads) {
        std::copy_n(g.weight.data(), g.weight.size(), out.data() + pos);
        pos += g.weight.size();
        std::copy_n(g.bias.data(), g.bias.size(), out.data() + pos);
        pos += g.bias.size();
    }
}

void accumulate_grads(const std::vector<LayerGradients>& grads, std::span<double> out, double alpha) {
    std::size_t pos = 0;
    for (const LayerGradients& g : grads) {
        for (std::size_t i = 0; i < g.weight.size(); ++i) out[pos + i] += alpha * g.weight.data()[i];
        pos += g.weight.size();
        for (std::size_t i = 0; i < g.bias.size(); ++i) out[pos + i] += alpha * g.bias[i];
        pos += g.bias.size();
    }
}

void write_layer(std::ostream& out, const DenseLayer& layer) {
    out << "layer " << layer.out_dim() << ' ' << layer.in_dim() << ' '
        << (layer.activation == Activation::kRelu ? "relu" : "identity") << '\n';
    for (std::size_t i = 0; i < layer.weight.rows(); ++i) {
        for (std::size_t j = 0; j < layer.weight.cols(); ++j) {
            if (j) out << ' ';
            write_double(out, layer.weight(i, j));
        }
        out << '\n';
    }
    for (std::size_t j = 0; j < layer.bias.size(); ++j) {
        if (j) out << ' ';
        write_double(out, layer.bias[j]);
    }
    out << '\n';
}

DenseLayer read_layer(LineReader& in) {
    auto header = in.tokens();
    std::string tag, act;
    long long rows = -1, cols = -1;
    if (!(header >> tag >> rows >> cols >> act) || tag != "layer" || rows < 1 || cols < 1) {
        throw in.fail("expected 'layer rows cols activation'");
    }
    DenseLayer layer;
    if (act == "relu") {
        layer.activation = Activation::kRelu;
    } else if (act == "identity") {
        layer.activation = Activation::kIdentity;
    } else {
        throw in.fail("unknown activation '" + act + "'");
    }
    layer.weight = Matrix(static_cast<std::size_t>(rows), static_cast<std::size_t>(cols));
    for (long long i = 0; i < rows; ++i) {
        auto row = in.tokens();
        for (long long j = 0; j < cols; ++j) {
            if (!(row >> layer.weight(static_cast<std::size_t>(i), static_cast<std::size_t>(j)))) {
                throw in.fail("expected " + std::to_string(cols) + " weight values");
            }
        }
    }
    layer.bias.resize(static_cast<std::size_t>(rows));
    auto row = in.tokens();
    for (long long j = 0; j < rows; ++j) {
        if (!(row >> layer.bias[static_cast<std::size_t>(j)])) {
            throw in.fail("expected " + std::to_string(rows) + " bias values");
        }
    }
    return layer;
}

}  // namespace dmsc
