#include "dmsc/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>
#include <utility>

#include "dmsc/errors.hpp"
#include "dmsc/kmeans.hpp"
#include "dmsc/metrics.hpp"
#include "dmsc/textio.hpp"

namespace dmsc {

namespace {

Matrix gather(const Matrix& m, std::span<const std::size_t> rows) {
    Matrix out(rows.size(), m.cols());
    for (std::size_t r = 0; r < rows.size(); ++r) {
        const auto src = m.row(rows[r]);
        std::copy(src.begin(), src.end(), out.data() + r * out.cols());
    }
    return out;
}

void write_matrix_block(std::ostream& out, const Matrix& m) {
    out << "matrix " << m.rows() << ' ' << m.cols() << '\n';
    for (std::size_t i = 0; i < m.rows(); ++i) {
        for (std::size_t j = 0; j < m.cols(); ++j) {
            if (j) out << ' ';
            write_double(out, m(i, j));
        }
        out << '\n';
    }
}

Matrix read_matrix_block(LineReader& in) {
    auto header = in.tokens();
    std::string tag;
    long long rows = -1, cols = -1;
    if (!(header >> tag >> rows >> cols) || tag != "matrix" || rows < 0 || cols < 0) {
        throw in.fail("expected 'matrix rows cols'");
    }
    Matrix m(static_cast<std::size_t>(rows), static_cast<std::size_t>(cols));
    for (long long i = 0; i < rows; ++i) {
        auto row = in.tokens();
        for (long long j = 0; j < cols; ++j) {
            if (!(row >> m(static_cast<std::size_t>(i), static_cast<std::size_t>(j)))) {
                throw in.fail("expected " + std::to_string(cols) + " values");
            }
        }
    }
    return m;
}

template <typename T>
void write_int_block(std::ostream& out, const std::string& name, const std::vector<T>& values) {
    out << name << ' ' << values.size() << '\n';
    for (std::size_t i = 0; i < values.size(); ++i) {
        if (i) out << ' ';
        out << values[i];
    }
    out << '\n';
}

template <typename T>
std::vector<T> read_int_block(LineReader& in, const std::string& name) {
    auto header = in.tokens();
    std::string tag;
    long long count = -1;
    if (!(header >> tag >> count) || tag != name || count < 0) {
        throw in.fail("expected '" + name + " count'");
    }
    std::vector<T> values(static_cast<std::size_t>(count));
    auto row = in.tokens();
    for (auto& value : values) {
        long long raw;
        if (!(row >> raw)) throw in.fail("expected " + std::to_string(count) + " integers");
        value = static_cast<T>(raw);
    }
    return values;
}

void write_adam_block(std::ostream& out, const AdamState& opt) {
    out << "adam ";
    write_double(out, opt.learning_rate);
    out << ' ';
    write_double(out, opt.beta1);
    out << ' ';
    write_double(out, opt.beta2);
    out << ' ';
    write_double(out, opt.epsilon);
    out << ' ' << opt.step << ' ' << opt.first_moment.size() << '\n';
    for (const auto* moments : {&opt.first_moment, &opt.second_moment}) {
        for (std::size_t i = 0; i < moments->size(); ++i) {
            if (i) out << ' ';
            write_double(out, (*moments)[i]);
        }
        out << '\n';
    }
}

AdamState read_adam_block(LineReader& in) {
    auto header = in.tokens();
    std::string tag;
    AdamState opt;
    long long len = -1;
    if (!(header >> tag >> opt.learning_rate >> opt.beta1 >> opt.beta2 >> opt.epsilon >> opt.step >>
          len) ||
        tag != "adam" || len < 0) {
        throw in.fail("expected 'adam lr beta1 beta2 epsilon step len'");
    }
    opt.first_moment.resize(static_cast<std::size_t>(len));
    opt.second_moment.resize(static_cast<std::size_t>(len));
    for (auto* moments : {&opt.first_moment, &opt.second_moment}) {
        auto row = in.tokens();
        for (auto& value : *moments) {
            if (!(row >> value)) throw in.fail("expected " + std::to_string(len) + " moment values");
        }
    }
    return opt;
}

std::vector<std::size_t> embedding_widths(const std::vector<AutoencoderBranch>& branches) {
    std::vector<std::size_t> widths;
    widths.reserve(branches.size());
    for (const auto& branch : branches) widths.push_back(branch.embedding_dim());
    return widths;
}

}  // namespace

void TrainingConfig::validate() const {
    if (k < 1) throw config_error("config: need at least one cluster");
    if (batch_size < 1) throw config_error("config: batch size must be >= 1");
    if (max_iter < 1) throw config_error("config: max iterations must be >= 1");
    if (!(delta > 0.0 && delta < 1.0)) throw config_error("config: delta must lie in (0, 1)");
    if (!std::isfinite(alpha) || !(alpha > 0.0)) {
        throw config_error("config: degrees of freedom must be positive");
    }
    if (!std::isfinite(gamma) || gamma < 0.0) throw config_error("config: gamma must be >= 0");
    if (!std::isfinite(lambda) || lambda < 0.0) throw config_error("config: lambda must be >= 0");
    if (!std::isfinite(beta) || beta < 0.0) throw config_error("config: beta must be >= 0");
    if (!std::isfinite(eta) || eta < 0.0) throw config_error("config: learning rate must be >= 0");
}

StoppingCheck stopping_check(const std::vector<int>& previous, const std::vector<int>& current,
                             double delta) {
    if (previous.size() != current.size()) {
        throw config_error("stopping_check: assignment lengths differ (" +
                           std::to_string(previous.size()) + " vs " + std::to_string(current.size()) +
                           ")");
    }
    if (previous.empty()) throw config_error("stopping_check: empty assignments");
    std::size_t changed = 0;
    for (std::size_t i = 0; i < previous.size(); ++i) changed += previous[i] != current[i];
    StoppingCheck check;
    check.change_fraction = static_cast<double>(changed) / static_cast<double>(previous.size());
    check.halt = check.change_fraction <= delta;
    return check;
}

AssignmentState evaluate_assignments(const std::vector<AutoencoderBranch>& branches,
                                     const std::vector<Matrix>& views, const ClusterState& state) {
    const EmbeddingSet z = encode_all(branches, views);
    AssignmentState result;
    result.q = soft_assignment(z, state);
    result.p = target_distribution(result.q);
    result.labels = pseudo_labels(result.q);
    return result;
}

InitResult init_cluster_state(const std::vector<AutoencoderBranch>& branches,
                              const MultiViewDataset& dataset, std::size_t k, std::uint64_t seed,
                              double alpha) {
    const EmbeddingSet z = encode_all(branches, dataset.views);
    const Matrix concat = z.concat();
    const KMeansResult km = kmeans(concat, k, seed);

    InitResult init;
    init.state.centers = hsplit(km.centers, embedding_widths(branches));
    init.state.weight_logits = Matrix(k, branches.size());  // zeros: weights start at 1/V
    init.state.alpha = alpha;
    init.assignments = km.assignments;
    return init;
}

FinetuneSession::FinetuneSession(std::vector<AutoencoderBranch> branches, ClusterState state,
                                 std::vector<int> initial_assignments, const TrainingConfig& config,
                                 std::size_t sample_count)
    : config_(config),
      branches_(std::move(branches)),
      state_(std::move(state)),
      labels_(initial_assignments),
      refresh_labels_(initial_assignments),
      initial_labels_(std::move(initial_assignments)),
      rng_(config.seed) {
    config_.validate();
    if (sample_count == 0) throw config_error("finetune: empty dataset");
    if (initial_labels_.size() != sample_count) {
        throw config_error("finetune: initial assignments do not cover the dataset");
    }
    if (branches_.empty()) throw config_error("finetune: no branches");
    if (state_.view_count() != branches_.size() || state_.cluster_count() != config_.k) {
        throw shape_error("finetune: cluster state does not match branches and K");
    }
    for (std::size_t v = 0; v < branches_.size(); ++v) {
        if (state_.centers[v].cols() != branches_[v].embedding_dim()) {
            throw shape_error("finetune: center width of view " + std::to_string(v) +
                              " does not match its embedding width");
        }
    }
    if (config_.update_interval == 0) {
        config_.update_interval = (sample_count + config_.batch_size - 1) / config_.batch_size;
    }

    order_.resize(sample_count);
    std::iota(order_.begin(), order_.end(), 0);
    cursor_ = sample_count;  // forces a shuffle before the first mini-batch

    branch_opt_.assign(branches_.size(), AdamState(config_.eta));
    center_opt_ = AdamState(config_.eta);
    logit_opt_ = AdamState(config_.eta);
}

void FinetuneSession::refresh(const MultiViewDataset& dataset, const ConstraintSet& constraints,
                              const std::vector<int>& eval_labels, std::size_t record_iteration) {
    const EmbeddingSet z = encode_all(branches_, dataset.views);
    const Matrix q = soft_assignment(z, state_);
    Matrix p = target_distribution(q);
    std::vector<int> labels = pseudo_labels(q);

    const StoppingCheck check = stopping_check(refresh_labels_, labels, config_.delta);

    // With FSP off the reconstruction term is excluded from the objective, and
    // with semi-supervision off the constraint term is weighted zero; the
    // report reflects the objective actually optimized.
    const double l_rec = config_.fsp_enabled ? reconstruction_loss(branches_, dataset.views) : 0.0;
    const double l_clu = clustering_loss(p, q);
    const double l_con = config_.semi_enabled && !constraints.empty()
                             ? constraint_loss(z.concat(), constraints)
                             : 0.0;
    const double lambda_eff = config_.semi_enabled ? config_.lambda : 0.0;

    TrainRecord record;
    record.iteration = record_iteration;
    record.losses = total_loss(l_rec, l_clu, l_con, config_.gamma, lambda_eff);
    record.change_fraction = check.change_fraction;
    if (!std::isfinite(record.losses.total)) {
        throw divergence_error("finetuning diverged at iteration " +
                               std::to_string(record_iteration));
    }
    if (!eval_labels.empty()) {
        record.has_metrics = true;
        record.acc = acc(eval_labels, labels);
        record.nmi = nmi(eval_labels, labels);
        record.ari = ari(eval_labels, labels);
    }
    history_.push_back(record);

    // The stopping rule compares consecutive in-loop refreshes, so it is armed
    // only from the second refresh on; the first one records its change
    // fraction against the initialization labels.
    if (refresh_count_ >= 1 && check.halt) {
        halted_by_criterion_ = true;
        finished_ = true;
    }

    target_ = std::move(p);
    labels_ = labels;
    refresh_labels_ = std::move(labels);
    ++refresh_count_;
}

void FinetuneSession::step(const MultiViewDataset& dataset, const ConstraintSet& constraints) {
    const std::size_t n = order_.size();
    const std::size_t views = branches_.size();

    if (cursor_ >= n) {
        rng_.shuffle(order_);
        cursor_ = 0;
    }
    const std::size_t begin = cursor_;
    const std::size_t end = std::min(begin + config_.batch_size, n);
    cursor_ = end;
    const std::size_t mb = end - begin;
    const double inv_m = 1.0 / static_cast<double>(mb);
    const std::span<const std::size_t> batch(order_.data() + begin, mb);

    // Encoder forward on the data mini-batch.
    std::vector<ForwardCache> enc_cache(views);
    EmbeddingSet zb;
    zb.per_view.reserve(views);
    for (std::size_t v = 0; v < views; ++v) {
        zb.per_view.push_back(forward(branches_[v].encoder, gather(dataset.views[v], batch),
                                      &enc_cache[v]));
    }

    // dZ[v] collects every loss term's gradient w.r.t. the batch embeddings.
    std::vector<Matrix> dz(views);
    for (std::size_t v = 0; v < views; ++v) {
        dz[v] = Matrix(mb, branches_[v].embedding_dim());
    }

    // Reconstruction path (decoder forward/backward) only under FSP.
    std::vector<ForwardCache> dec_cache(views);
    std::vector<BackwardResult> dec_back(views);
    double batch_rec = 0.0;
    if (config_.fsp_enabled) {
        for (std::size_t v = 0; v < views; ++v) {
            const Matrix xb = gather(dataset.views[v], batch);
            const Matrix xhat = forward(branches_[v].decoder, zb.per_view[v], &dec_cache[v]);
            Matrix out_grad(xhat.rows(), xhat.cols());
            for (std::size_t i = 0; i < xhat.size(); ++i) {
                const double diff = xhat.data()[i] - xb.data()[i];
                batch_rec += diff * diff;
                out_grad.data()[i] = 2.0 * diff * inv_m;
            }
            dec_back[v] = backward(branches_[v].decoder, dec_cache[v], out_grad);
            axpy(1.0, dec_back[v].input, dz[v]);
        }
    }

    // Clustering path: fixed target rows for the batch, fresh Q from the batch
    // embeddings.
    const Matrix pb = gather(target_, batch);
    const Matrix qb = soft_assignment(zb, state_);
    const double batch_clu = clustering_loss(pb, qb);
    const CluGradients cg = clustering_gradients(zb, state_, pb);
    for (std::size_t v = 0; v < views; ++v) {
        axpy(config_.gamma * inv_m, cg.embeddings[v], dz[v]);
    }

    // Constraint path on its own mini-batch of pairs; both endpoints get a
    // dedicated encoder pass.
    double batch_con = 0.0;
    std::vector<ForwardCache> con_cache;
    std::vector<Matrix> con_grads;  // per view, scaled, aligned with endpoint rows
    std::vector<std::size_t> endpoints;
    const bool constraints_active =
        config_.semi_enabled && config_.lambda > 0.0 && !constraints.empty();
    if (constraints_active) {
        const std::size_t mc = std::min(config_.batch_size, constraints.size());
        std::vector<std::size_t> pair_ids(constraints.size());
        std::iota(pair_ids.begin(), pair_ids.end(), 0);
        for (std::size_t j = 0; j < mc; ++j) {
            const std::size_t pick = j + rng_.index(pair_ids.size() - j);
            std::swap(pair_ids[j], pair_ids[pick]);
        }
        endpoints.reserve(2 * mc);
        for (std::size_t j = 0; j < mc; ++j) {
            endpoints.push_back(constraints.pairs[pair_ids[j]].i);
            endpoints.push_back(constraints.pairs[pair_ids[j]].k);
        }
        std::sort(endpoints.begin(), endpoints.end());
        endpoints.erase(std::unique(endpoints.begin(), endpoints.end()), endpoints.end());
        auto local_of = [&endpoints](std::size_t global) {
            return static_cast<std::size_t>(
                std::lower_bound(endpoints.begin(), endpoints.end(), global) - endpoints.begin());
        };
        ConstraintSet local;
        local.sample_count = endpoints.size();
        local.pairs.reserve(mc);
        for (std::size_t j = 0; j < mc; ++j) {
            const ConstraintPair& pair = constraints.pairs[pair_ids[j]];
            local.pairs.push_back({local_of(pair.i), local_of(pair.k), pair.link});
        }

        con_cache.resize(views);
        EmbeddingSet ze;
        ze.per_view.reserve(views);
        for (std::size_t v = 0; v < views; ++v) {
            ze.per_view.push_back(
                forward(branches_[v].encoder, gather(dataset.views[v], endpoints), &con_cache[v]));
        }
        const Matrix ze_concat = ze.concat();
        // Scaled up so the sampled sum estimates the full-constraint sum.
        const double pair_scale =
            static_cast<double>(constraints.size()) / static_cast<double>(mc);
        batch_con = constraint_loss(ze_concat, local) * pair_scale;
        Matrix dzc = constraint_gradients(ze_concat, local);
        scale(dzc, config_.lambda * pair_scale * inv_m);
        con_grads = hsplit(dzc, embedding_widths(branches_));
    }

    if (!std::isfinite(batch_rec) || !std::isfinite(batch_clu) || !std::isfinite(batch_con)) {
        throw divergence_error("finetuning diverged at iteration " + std::to_string(iteration_));
    }

    // One flat adaptive step per branch over encoder+decoder parameters.
    for (std::size_t v = 0; v < views; ++v) {
        auto& branch = branches_[v];
        const std::size_t enc_n = param_count(branch.encoder);
        const std::size_t dec_n = param_count(branch.decoder);
        std::vector<double> params(enc_n + dec_n);
        std::vector<double> grads(enc_n + dec_n, 0.0);

        const BackwardResult enc_back = backward(branch.encoder, enc_cache[v], dz[v]);
        accumulate_grads(enc_back.layers, std::span(grads).first(enc_n), 1.0);
        if (constraints_active) {
            const BackwardResult con_back = backward(branch.encoder, con_cache[v], con_grads[v]);
            accumulate_grads(con_back.layers, std::span(grads).first(enc_n), 1.0);
        }
        if (config_.fsp_enabled) {
            accumulate_grads(dec_back[v].layers, std::span(grads).subspan(enc_n), 1.0);
        }

        copy_params(branch.encoder, std::span(params).first(enc_n));
        copy_params(branch.decoder, std::span(params).subspan(enc_n));
        adam_step(branch_opt_[v], params, grads);
        set_params(branch.encoder, std::span<const double>(params).first(enc_n));
        set_params(branch.decoder, std::span<const double>(params).subspan(enc_n));
    }

    // Centers and view-weight logits receive the raw clustering gradient.
    {
        std::size_t total = 0;
        for (const Matrix& m : state_.centers) total += m.size();
        std::vector<double> params(total), grads(total);
        std::size_t pos = 0;
        for (std::size_t v = 0; v < views; ++v) {
            std::copy_n(state_.centers[v].data(), state_.centers[v].size(), params.data() + pos);
            for (std::size_t i = 0; i < cg.centers[v].size(); ++i) {
                grads[pos + i] = cg.centers[v].data()[i] * inv_m;
            }
            pos += state_.centers[v].size();
        }
        adam_step(center_opt_, params, grads);
        pos = 0;
        for (std::size_t v = 0; v < views; ++v) {
            std::copy_n(params.data() + pos, state_.centers[v].size(), state_.centers[v].data());
            pos += state_.centers[v].size();
        }
    }
    {
        std::vector<double> params(state_.weight_logits.size());
        std::vector<double> grads(state_.weight_logits.size());
        std::copy_n(state_.weight_logits.data(), params.size(), params.data());
        for (std::size_t i = 0; i < grads.size(); ++i) {
            grads[i] = cg.weight_logits.data()[i] * inv_m;
        }
        adam_step(logit_opt_, params, grads);
        std::copy_n(params.data(), params.size(), state_.weight_logits.data());
    }
}

bool FinetuneSession::run(const MultiViewDataset& dataset, const ConstraintSet& constraints,
                          const std::vector<int>& eval_labels, std::size_t iteration_budget) {
    if (dataset.views.size() != branches_.size()) {
        throw config_error("finetune: dataset views do not match the branches");
    }
    if (dataset.sample_count() != order_.size()) {
        throw config_error("finetune: dataset size changed between runs");
    }
    if (config_.semi_enabled && constraints.empty()) {
        throw config_error("finetune: semi-supervision is enabled but no constraints were given");
    }
    if (!constraints.empty() && constraints.sample_count != order_.size()) {
        throw config_error("finetune: constraints were built for a different sample count");
    }
    if (!eval_labels.empty() && eval_labels.size() != order_.size()) {
        throw config_error("finetune: evaluation labels do not cover the dataset");
    }

    std::size_t executed = 0;
    while (!finished_ && (iteration_budget == 0 || executed < iteration_budget)) {
        if (iteration_ % config_.update_interval == 0) {
            refresh(dataset, constraints, eval_labels, iteration_);
            if (finished_) break;
        }
        step(dataset, constraints);
        ++iteration_;
        ++executed;
        if (iteration_ >= config_.max_iter) {
            // Out of budget: take a final full-dataset snapshot so the record
            // and the returned labels reflect the end state.
            refresh(dataset, constraints, eval_labels, iteration_);
            finished_ = true;
        }
    }
    return finished_;
}

FinetuneResult finetune(std::vector<AutoencoderBranch> branches, const MultiViewDataset& dataset,
                        const ConstraintSet& constraints, const TrainingConfig& config,
                        const std::vector<int>& eval_labels) {
    config.validate();
    InitResult init = init_cluster_state(branches, dataset, config.k, config.seed, config.alpha);
    FinetuneSession session(std::move(branches), std::move(init.state), std::move(init.assignments),
                            config, dataset.sample_count());
    session.run(dataset, constraints, eval_labels);

    FinetuneResult result;
    result.branches = session.branches();
    result.state = session.cluster_state();
    result.assignments = session.assignments();
    result.initial_assignments = session.initial_assignments();
    result.history = session.history();
    result.iterations = session.iteration();
    result.halted_early = session.halted_by_criterion();
    return result;
}

void FinetuneSession::save(const std::filesystem::path& path) const {
    std::ofstream out = open_for_write(path);
    out << "dmsc checkpoint 1\n";
    out << "config " << config_.k << ' ';
    write_double(out, config_.gamma);
    out << ' ';
    write_double(out, config_.lambda);
    out << ' ';
    write_double(out, config_.alpha);
    out << ' ';
    write_double(out, config_.beta);
    out << ' ';
    write_double(out, config_.eta);
    out << ' ' << config_.batch_size << ' ' << config_.update_interval << ' ';
    write_double(out, config_.delta);
    out << ' ' << config_.max_iter << ' ' << config_.seed << ' ' << config_.fsp_enabled << ' '
        << config_.semi_enabled << '\n';
    out << "progress " << iteration_ << ' ' << refresh_count_ << ' ' << finished_ << ' '
        << halted_by_criterion_ << ' ' << cursor_ << '\n';
    out << "rng " << rng_ << '\n';
    write_int_block(out, "order", order_);

    out << "branches " << branches_.size() << '\n';
    for (const auto& branch : branches_) {
        out << "branch " << branch.encoder.size() << ' ' << branch.decoder.size() << '\n';
        for (const DenseLayer& layer : branch.encoder) write_layer(out, layer);
        for (const DenseLayer& layer : branch.decoder) write_layer(out, layer);
    }

    out << "centers " << state_.centers.size() << '\n';
    for (const Matrix& m : state_.centers) write_matrix_block(out, m);
    out << "logits\n";
    write_matrix_block(out, state_.weight_logits);
    out << "alpha ";
    write_double(out, state_.alpha);
    out << '\n';
    out << "target\n";
    write_matrix_block(out, target_);
    write_int_block(out, "labels", labels_);
    write_int_block(out, "refresh_labels", refresh_labels_);
    write_int_block(out, "initial_labels", initial_labels_);

    out << "optimizers " << branch_opt_.size() + 2 << '\n';
    for (const AdamState& opt : branch_opt_) write_adam_block(out, opt);
    write_adam_block(out, center_opt_);
    write_adam_block(out, logit_opt_);

    out << "history " << history_.size() << '\n';
    for (const TrainRecord& record : history_) {
        out << record.iteration << ' ';
        for (double value : {record.losses.l_rec, record.losses.l_clu, record.losses.l_con,
                             record.losses.gamma, record.losses.lambda, record.losses.total,
                             record.change_fraction}) {
            write_double(out, value);
            out << ' ';
        }
        out << record.has_metrics;
        if (record.has_metrics) {
            for (double value : {record.acc, record.nmi, record.ari}) {
                out << ' ';
                write_double(out, value);
            }
        }
        out << '\n';
    }
    if (!out) throw config_error("failed while writing: " + path.string());
}

FinetuneSession FinetuneSession::load(const std::filesystem::path& path) {
    LineReader in(path);
    in.expect("dmsc checkpoint 1");

    FinetuneSession session;
    {
        auto line = in.tokens();
        std::string tag;
        int fsp = 0, semi = 0;
        if (!(line >> tag >> session.config_.k >> session.config_.gamma >> session.config_.lambda >>
              session.config_.alpha >> session.config_.beta >> session.config_.eta >>
              session.config_.batch_size >> session.config_.update_interval >>
              session.config_.delta >> session.config_.max_iter >> session.config_.seed >> fsp >>
              semi) ||
            tag != "config") {
            throw in.fail("expected config line");
        }
        session.config_.fsp_enabled = fsp != 0;
        session.config_.semi_enabled = semi != 0;
    }
    {
        auto line = in.tokens();
        std::string tag;
        int finished = 0, halted = 0;
        if (!(line >> tag >> session.iteration_ >> session.refresh_count_ >> finished >> halted >>
              session.cursor_) ||
            tag != "progress") {
            throw in.fail("expected progress line");
        }
        session.finished_ = finished != 0;
        session.halted_by_criterion_ = halted != 0;
    }
    {
        auto line = in.tokens();
        std::string tag;
        if (!(line >> tag) || tag != "rng") throw in.fail("expected rng line");
        if (!(line >> session.rng_)) throw in.fail("bad rng state");
    }
    session.order_ = read_int_block<std::size_t>(in, "order");

    {
        auto line = in.tokens();
        std::string tag;
        long long count = -1;
        if (!(line >> tag >> count) || tag != "branches" || count < 1) {
            throw in.fail("expected 'branches count'");
        }
        session.branches_.resize(static_cast<std::size_t>(count));
        for (auto& branch : session.branches_) {
            auto header = in.tokens();
            std::string btag;
            long long enc = -1, dec = -1;
            if (!(header >> btag >> enc >> dec) || btag != "branch" || enc < 1 || dec < 1) {
                throw in.fail("expected 'branch enc dec'");
            }
            for (long long l = 0; l < enc; ++l) branch.encoder.push_back(read_layer(in));
            for (long long l = 0; l < dec; ++l) branch.decoder.push_back(read_layer(in));
        }
    }
    {
        auto line = in.tokens();
        std::string tag;
        long long count = -1;
        if (!(line >> tag >> count) || tag != "centers" || count < 1) {
            throw in.fail("expected 'centers count'");
        }
        session.state_.centers.resize(static_cast<std::size_t>(count));
        for (auto& m : session.state_.centers) m = read_matrix_block(in);
    }
    in.expect("logits");
    session.state_.weight_logits = read_matrix_block(in);
    {
        auto line = in.tokens();
        std::string tag;
        if (!(line >> tag >> session.state_.alpha) || tag != "alpha") {
            throw in.fail("expected alpha line");
        }
    }
    in.expect("target");
    session.target_ = read_matrix_block(in);
    session.labels_ = read_int_block<int>(in, "labels");
    session.refresh_labels_ = read_int_block<int>(in, "refresh_labels");
    session.initial_labels_ = read_int_block<int>(in, "initial_labels");

    {
        auto line = in.tokens();
        std::string tag;
        long long count = -1;
        if (!(line >> tag >> count) || tag != "optimizers" ||
            count != static_cast<long long>(session.branches_.size()) + 2) {
            throw in.fail("expected 'optimizers count' covering every branch plus centers and logits");
        }
        session.branch_opt_.clear();
        for (std::size_t v = 0; v < session.branches_.size(); ++v) {
            session.branch_opt_.push_back(read_adam_block(in));
        }
        session.center_opt_ = read_adam_block(in);
        session.logit_opt_ = read_adam_block(in);
    }
    {
        auto line = in.tokens();
        std::string tag;
        long long count = -1;
        if (!(line >> tag >> count) || tag != "history" || count < 0) {
            throw in.fail("expected 'history count'");
        }
        session.history_.reserve(static_cast<std::size_t>(count));
        for (long long r = 0; r < count; ++r) {
            auto row = in.tokens();
            TrainRecord record;
            int has_metrics = 0;
            if (!(row >> record.iteration >> record.losses.l_rec >> record.losses.l_clu >>
                  record.losses.l_con >> record.losses.gamma >> record.losses.lambda >>
                  record.losses.total >> record.change_fraction >> has_metrics)) {
                throw in.fail("bad history row");
            }
            record.has_metrics = has_metrics != 0;
            if (record.has_metrics && !(row >> record.acc >> record.nmi >> record.ari)) {
                throw in.fail("bad history metrics");
            }
            session.history_.push_back(record);
        }
    }

    // Structural sanity: everything must agree on n, V and K.
    session.config_.validate();
    const std::size_t n = session.order_.size();
    if (session.labels_.size() != n || session.refresh_labels_.size() != n ||
        session.initial_labels_.size() != n) {
        throw parse_error(path.string(), 0, "label blocks disagree on sample count");
    }
    if (session.state_.view_count() != session.branches_.size() ||
        session.state_.cluster_count() != session.config_.k) {
        throw parse_error(path.string(), 0, "cluster state does not match branches and K");
    }
    if (!session.target_.empty() &&
        (session.target_.rows() != n || session.target_.cols() != session.config_.k)) {
        throw parse_error(path.string(), 0, "target distribution has the wrong shape");
    }
    return session;
}

void save_checkpoint(const FinetuneSession& session, const std::filesystem::path& path) {
    session.save(path);
}

FinetuneSession load_checkpoint(const std::filesystem::path& path) {
    return FinetuneSession::load(path);
}

void save_train_records(const std::vector<TrainRecord>& records,
                        const std::filesystem::path& path) {
    std::ofstream out = open_for_write(path);
    const bool with_metrics =
        !records.empty() && std::all_of(records.begin(), records.end(),
                                        [](const TrainRecord& r) { return r.has_metrics; });
    out << "iteration,l_rec,l_clu,l_con,total,change_fraction";
    if (with_metrics) out << ",acc,nmi,ari";
    out << '\n';
    for (const TrainRecord& record : records) {
        out << record.iteration << ',';
        for (double value : {record.losses.l_rec, record.losses.l_clu, record.losses.l_con,
                             record.losses.total}) {
            write_double(out, value);
            out << ',';
        }
        write_double(out, record.change_fraction);
        if (with_metrics) {
            for (double value : {record.acc, record.nmi, record.ari}) {
                out << ',';
                write_double(out, value);
            }
        }
        out << '\n';
    }
    if (!out) throw config_error("failed while writing: " + path.string());
}

}  // namespace dmsc
