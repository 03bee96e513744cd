#include "dmsc/autoencoder.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>
#include <utility>

#include "dmsc/adam.hpp"
#include "dmsc/errors.hpp"
#include "dmsc/textio.hpp"

namespace dmsc {

namespace {

DenseLayer make_layer(std::size_t out, std::size_t in, Activation act, Rng& rng) {
    DenseLayer layer;
    layer.weight = xavier_init(out, in, rng);
    layer.bias.assign(out, 0.0);
    layer.activation = act;
    return layer;
}

void check_views(const std::vector<AutoencoderBranch>& branches, const std::vector<Matrix>& views) {
    if (branches.size() != views.size()) {
        throw config_error("branch count (" + std::to_string(branches.size()) +
                           ") does not match view count (" + std::to_string(views.size()) + ")");
    }
    for (std::size_t v = 0; v < views.size(); ++v) {
        if (views[v].cols() != branches[v].input_dim()) {
            throw shape_error("view " + std::to_string(v) + " has width " +
                              std::to_string(views[v].cols()) + " but its branch expects " +
                              std::to_string(branches[v].input_dim()));
        }
        if (!views.empty() && views[v].rows() != views.front().rows()) {
            throw shape_error("views are not row-aligned");
        }
    }
}

Matrix gather_rows(const Matrix& m, const std::vector<std::size_t>& order, std::size_t begin,
                   std::size_t end) {
    Matrix out(end - begin, m.cols());
    for (std::size_t r = begin; r < end; ++r) {
        const auto src = m.row(order[r]);
        std::copy(src.begin(), src.end(), out.data() + (r - begin) * out.cols());
    }
    return out;
}

}  // namespace

std::size_t EmbeddingSet::total_dim() const {
    std::size_t total = 0;
    for (const Matrix& z : per_view) total += z.cols();
    return total;
}

Matrix EmbeddingSet::concat() const { return hcat(per_view); }

AutoencoderBranch make_branch(std::size_t input_dim, const LayerSpec& spec, Rng& rng) {
    if (input_dim == 0) throw config_error("make_branch: zero input width");
    if (spec.embedding == 0) throw config_error("make_branch: zero embedding width");
    if (spec.embedding >= std::max<std::size_t>(input_dim, 2)) {
        throw config_error("make_branch: embedding width " + std::to_string(spec.embedding) +
                           " does not compress input width " + std::to_string(input_dim));
    }
    for (std::size_t w : spec.hidden) {
        if (w == 0) throw config_error("make_branch: zero hidden width");
    }

    AutoencoderBranch branch;
    std::size_t prev = input_dim;
    for (std::size_t w : spec.hidden) {
        branch.encoder.push_back(make_layer(w, prev, Activation::kRelu, rng));
        prev = w;
    }
    branch.encoder.push_back(make_layer(spec.embedding, prev, Activation::kIdentity, rng));

    prev = spec.embedding;
    for (auto it = spec.hidden.rbegin(); it != spec.hidden.rend(); ++it) {
        branch.decoder.push_back(make_layer(*it, prev, Activation::kRelu, rng));
        prev = *it;
    }
    branch.decoder.push_back(make_layer(input_dim, prev, Activation::kIdentity, rng));
    return branch;
}

LayerSpec default_layer_spec(std::size_t input_dim) {
    if (input_dim == 0) throw config_error("default_layer_spec: zero input width");
    LayerSpec spec;
    if (input_dim >= 64) {
        spec.hidden = {500, 500, 2000};
        spec.embedding = 10;
    } else {
        const std::size_t wide = std::max<std::size_t>(16, 4 * input_dim);
        spec.hidden = {wide, std::max<std::size_t>(8, wide / 2)};
        spec.embedding = std::min<std::size_t>(10, std::max<std::size_t>(1, input_dim - 1));
    }
    if (input_dim == 1) spec.embedding = 1;
    return spec;
}

Matrix encode(const AutoencoderBranch& branch, const Matrix& x) { return forward(branch.encoder, x); }

Matrix decode(const AutoencoderBranch& branch, const Matrix& z) { return forward(branch.decoder, z); }

double reconstruction_loss(const AutoencoderBranch& branch, const Matrix& x) {
    const Matrix xhat = decode(branch, encode(branch, x));
    double loss = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double diff = x.data()[i] - xhat.data()[i];
        loss += diff * diff;
    }
    return loss;
}

double reconstruction_loss(const std::vector<AutoencoderBranch>& branches,
                           const std::vector<Matrix>& views) {
    check_views(branches, views);
    double total = 0.0;
    for (std::size_t v = 0; v < views.size(); ++v) total += reconstruction_loss(branches[v], views[v]);
    return total;
}

EmbeddingSet encode_all(const std::vector<AutoencoderBranch>& branches,
                        const std::vector<Matrix>& views) {
    check_views(branches, views);
    EmbeddingSet z;
    z.per_view.reserve(views.size());
    for (std::size_t v = 0; v < views.size(); ++v) z.per_view.push_back(encode(branches[v], views[v]));
    return z;
}

std::vector<std::vector<double>> pretrain(std::vector<AutoencoderBranch>& branches,
                                          const std::vector<Matrix>& views,
                                          const PretrainConfig& config, Rng& rng) {
    if (config.epochs < 1) throw config_error("pretrain: epochs must be >= 1");
    if (config.batch_size < 1) throw config_error("pretrain: batch size must be >= 1");
    check_views(branches, views);
    if (views.empty()) throw config_error("pretrain: no views");
    const std::size_t n = views.front().rows();
    if (n == 0) throw config_error("pretrain: empty dataset");

    const std::size_t view_count = views.size();

    // Encoder + decoder of each branch are trained as one stack with one flat
    // Adam state; the stacks are split back into the branches at the end.
    std::vector<std::vector<DenseLayer>> stacks(view_count);
    std::vector<std::size_t> encoder_sizes(view_count);
    for (std::size_t v = 0; v < view_count; ++v) {
        encoder_sizes[v] = branches[v].encoder.size();
        stacks[v] = std::move(branches[v].encoder);
        for (DenseLayer& layer : branches[v].decoder) stacks[v].push_back(std::move(layer));
        branches[v].decoder.clear();
    }

    std::vector<AdamState> opt(view_count);
    std::vector<std::vector<double>> params(view_count), grads(view_count);
    for (std::size_t v = 0; v < view_count; ++v) {
        opt[v].learning_rate = config.learning_rate;
        params[v].resize(param_count(stacks[v]));
        grads[v].resize(params[v].size());
    }

    // Guarantees the branches get their (possibly half-trained) layers back
    // even when training throws.
    auto reassemble = [&] {
        for (std::size_t v = 0; v < view_count; ++v) {
            auto& stack = stacks[v];
            branches[v].encoder.assign(std::make_move_iterator(stack.begin()),
                                       std::make_move_iterator(stack.begin() + encoder_sizes[v]));
            branches[v].decoder.assign(std::make_move_iterator(stack.begin() + encoder_sizes[v]),
                                       std::make_move_iterator(stack.end()));
        }
    };

    std::vector<std::vector<double>> history(view_count);
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);

    try {
        for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
            rng.shuffle(order);
            std::vector<double> epoch_loss(view_count, 0.0);
            for (std::size_t begin = 0; begin < n; begin += config.batch_size) {
                const std::size_t end = std::min(begin + config.batch_size, n);
                const double batch_n = static_cast<double>(end - begin);
                for (std::size_t v = 0; v < view_count; ++v) {
                    const Matrix batch = gather_rows(views[v], order, begin, end);
                    ForwardCache cache;
                    Matrix xhat = forward(stacks[v], batch, &cache);

                    double batch_loss = 0.0;
                    Matrix out_grad(xhat.rows(), xhat.cols());
                    for (std::size_t i = 0; i < xhat.size(); ++i) {
                        const double diff = xhat.data()[i] - batch.data()[i];
                        batch_loss += diff * diff;
                        out_grad.data()[i] = 2.0 * diff / batch_n;
                    }
                    if (!std::isfinite(batch_loss)) {
                        throw divergence_error("pretraining diverged on view " + std::to_string(v) +
                                               " at epoch " + std::to_string(epoch));
                    }
                    epoch_loss[v] += batch_loss;

                    const BackwardResult back = backward(stacks[v], cache, out_grad);
                    copy_grads(back.layers, grads[v]);
                    copy_params(stacks[v], params[v]);
                    adam_step(opt[v], params[v], grads[v]);
                    set_params(stacks[v], params[v]);
                }
            }
            for (std::size_t v = 0; v < view_count; ++v) {
                history[v].push_back(epoch_loss[v] / static_cast<double>(n));
            }
        }
    } catch (...) {
        reassemble();
        throw;
    }
    reassemble();
    return history;
}

void save_branch(const AutoencoderBranch& branch, const std::filesystem::path& path) {
    std::ofstream out = open_for_write(path);
    out << "dmsc branch 1\n";
    out << "encoder " << branch.encoder.size() << '\n';
    for (const DenseLayer& layer : branch.encoder) write_layer(out, layer);
    out << "decoder " << branch.decoder.size() << '\n';
    for (const DenseLayer& layer : branch.decoder) write_layer(out, layer);
    if (!out) throw config_error("failed while writing: " + path.string());
}

AutoencoderBranch load_branch(const std::filesystem::path& path) {
    LineReader in(path);
    in.expect("dmsc branch 1");

    auto read_stack = [&in](const std::string& name) {
        auto header = in.tokens();
        std::string tag;
        long long count = -1;
        if (!(header >> tag >> count) || tag != name || count < 1) {
            throw in.fail("expected '" + name + " count'");
        }
        std::vector<DenseLayer> layers;
        layers.reserve(static_cast<std::size_t>(count));
        for (long long i = 0; i < count; ++i) layers.push_back(read_layer(in));
        return layers;
    };

    AutoencoderBranch branch;
    branch.encoder = read_stack("encoder");
    branch.decoder = read_stack("decoder");
    for (std::size_t l = 1; l < branch.encoder.size(); ++l) {
        if (branch.encoder[l].in_dim() != branch.encoder[l - 1].out_dim()) {
            throw parse_error(path.string(), 0, "encoder layer widths do not chain");
        }
    }
    for (std::size_t l = 1; l < branch.decoder.size(); ++l) {
        if (branch.decoder[l].in_dim() != branch.decoder[l - 1].out_dim()) {
            throw parse_error(path.string(), 0, "decoder layer widths do not chain");
        }
    }
    if (branch.decoder.front().in_dim() != branch.encoder.back().out_dim()) {
        throw parse_error(path.string(), 0, "decoder input width does not match embedding width");
    }
    return branch;
}

}  // namespace dmsc
