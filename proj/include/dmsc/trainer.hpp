#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <vector>

#include "dmsc/adam.hpp"
#include "dmsc/autoencoder.hpp"
#include "dmsc/constraints.hpp"
#include "dmsc/dataset.hpp"
#include "dmsc/fusion.hpp"
#include "dmsc/rng.hpp"

namespace dmsc {

struct TrainingConfig {
    std::size_t k = 2;                 // number of clusters
    double gamma = 0.1;                // clustering-loss weight
    double lambda = 1e-6;              // constraint-loss weight
    double alpha = 1.0;                // Student-t degrees of freedom
    double beta = 1.0;                 // constraint proportion (pairs = round(beta * n))
    double eta = 1e-3;                 // learning rate
    std::size_t batch_size = 256;      // m
    std::size_t update_interval = 0;   // U; 0 resolves to ceil(n / m)
    double delta = 1e-4;               // stopping threshold on the label-change fraction
    std::size_t max_iter = 20000;      // T
    std::uint64_t seed = 0;
    bool fsp_enabled = true;   // keep reconstruction losses during finetuning
    bool semi_enabled = true;  // keep the pairwise-constraint loss path

    void validate() const;  // throws config_error on out-of-range fields
};

/// One training-record row, written at every refresh point.
struct TrainRecord {
    std::size_t iteration = 0;
    LossReport losses;
    double change_fraction = 0.0;
    bool has_metrics = false;
    double acc = 0.0;
    double nmi = 0.0;
    double ari = 0.0;
};

struct StoppingCheck {
    bool halt = false;
    double change_fraction = 0.0;
};

/// Fraction of samples whose label changed between two assignment snapshots;
/// halt when it is <= delta.
StoppingCheck stopping_check(const std::vector<int>& previous, const std::vector<int>& current,
                             double delta);

/// Full-dataset evaluation of the clustering head: Q, P derived from Q, and
/// argmax labels.
AssignmentState evaluate_assignments(const std::vector<AutoencoderBranch>& branches,
                                     const std::vector<Matrix>& views, const ClusterState& state);

struct InitResult {
    ClusterState state;
    std::vector<int> assignments;
};

/// K-means over the concatenated embeddings; the centers are sliced back into
/// per-view blocks, the view-weight logits start at zero (weights 1/V).
InitResult init_cluster_state(const std::vector<AutoencoderBranch>& branches,
                              const MultiViewDataset& dataset, std::size_t k, std::uint64_t seed,
                              double alpha = 1.0);

/// Resumable finetuning loop: every U iterations Q, P and the pseudo-labels
/// are refreshed on the full dataset and a record row is appended; from the
/// second refresh on, training halts when the label-change fraction is
/// <= delta. Between refreshes each iteration applies one adaptive-optimizer
/// step on a data mini-batch (and a constraint mini-batch when enabled).
class FinetuneSession {
public:
    FinetuneSession(std::vector<AutoencoderBranch> branches, ClusterState state,
                    std::vector<int> initial_assignments, const TrainingConfig& config,
                    std::size_t sample_count);

    /// Advances up to `iteration_budget` iterations (0 = unlimited) and returns
    /// finished(). `eval_labels` may be empty; when given, metric snapshots are
    /// taken at refresh points. The same dataset and constraints must be passed
    /// across calls and across checkpoint resumes.
    bool run(const MultiViewDataset& dataset, const ConstraintSet& constraints,
             const std::vector<int>& eval_labels, std::size_t iteration_budget = 0);

    const std::vector<AutoencoderBranch>& branches() const { return branches_; }
    const ClusterState& cluster_state() const { return state_; }
    const std::vector<int>& assignments() const { return labels_; }
    const std::vector<int>& initial_assignments() const { return initial_labels_; }
    const std::vector<TrainRecord>& history() const { return history_; }
    const TrainingConfig& config() const { return config_; }
    std::size_t iteration() const { return iteration_; }
    bool finished() const { return finished_; }
    /// True when training stopped because the label-change fraction dropped to
    /// <= delta (as opposed to exhausting max_iter).
    bool halted_by_criterion() const { return halted_by_criterion_; }

    void save(const std::filesystem::path& path) const;
    static FinetuneSession load(const std::filesystem::path& path);

private:
    FinetuneSession() = default;

    void refresh(const MultiViewDataset& dataset, const ConstraintSet& constraints,
                 const std::vector<int>& eval_labels, std::size_t record_iteration);
    void step(const MultiViewDataset& dataset, const ConstraintSet& constraints);

    TrainingConfig config_;
    std::vector<AutoencoderBranch> branches_;
    ClusterState state_;
    Matrix target_;                    // P, refreshed every U iterations
    std::vector<int> labels_;          // current pseudo-labels S
    std::vector<int> refresh_labels_;  // S at the previous refresh
    std::vector<int> initial_labels_;  // S from K-means initialization
    std::vector<TrainRecord> history_;
    Rng rng_{0};
    std::vector<std::size_t> order_;  // mini-batch permutation
    std::size_t cursor_ = 0;
    std::size_t iteration_ = 0;
    std::size_t refresh_count_ = 0;
    bool finished_ = false;
    bool halted_by_criterion_ = false;
    std::vector<AdamState> branch_opt_;  // one flat state per branch (encoder+decoder)
    AdamState center_opt_;
    AdamState logit_opt_;
};

struct FinetuneResult {
    std::vector<AutoencoderBranch> branches;
    ClusterState state;
    std::vector<int> assignments;
    std::vector<int> initial_assignments;
    std::vector<TrainRecord> history;
    std::size_t iterations = 0;
    bool halted_early = false;
};

/// Initializes the cluster state and runs the finetuning loop to completion.
FinetuneResult finetune(std::vector<AutoencoderBranch> branches, const MultiViewDataset& dataset,
                        const ConstraintSet& constraints, const TrainingConfig& config,
                        const std::vector<int>& eval_labels = {});

/// Session checkpointing as free functions.
void save_checkpoint(const FinetuneSession& session, const std::filesystem::path& path);
FinetuneSession load_checkpoint(const std::filesystem::path& path);

/// Writes the record rows as comma-separated text with a header line:
/// iteration,l_rec,l_clu,l_con,total,change_fraction[,acc,nmi,ari].
void save_train_records(const std::vector<TrainRecord>& records, const std::filesystem::path& path);

}  // namespace dmsc
