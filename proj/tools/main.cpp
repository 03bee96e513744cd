// Command-line front end: synth | pretrain | finetune | eval | export-embeddings.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "dmsc/autoencoder.hpp"
#include "dmsc/constraints.hpp"
#include "dmsc/dataset.hpp"
#include "dmsc/errors.hpp"
#include "dmsc/fusion.hpp"
#include "dmsc/metrics.hpp"
#include "dmsc/rng.hpp"
#include "dmsc/textio.hpp"
#include "dmsc/trainer.hpp"

namespace fs = std::filesystem;

namespace {

// Layer widths per view: "h1,h2,...:embedding" blocks joined by ';', or
// "auto" to derive from the view width.
std::vector<dmsc::LayerSpec> parse_layer_specs(const std::string& text,
                                               const std::vector<std::size_t>& view_dims) {
    std::vector<dmsc::LayerSpec> specs;
    if (text == "auto") {
        specs.reserve(view_dims.size());
        for (std::size_t d : view_dims) specs.push_back(dmsc::default_layer_spec(d));
        return specs;
    }
    std::size_t start = 0;
    while (start <= text.size()) {
        const std::size_t stop = std::min(text.find(';', start), text.size());
        const std::string block = text.substr(start, stop - start);
        const std::size_t colon = block.find(':');
        if (colon == std::string::npos) {
            throw dmsc::config_error("--layers: block '" + block + "' is missing ':embedding'");
        }
        dmsc::LayerSpec spec;
        try {
            spec.embedding = std::stoul(block.substr(colon + 1));
            std::size_t pos = 0;
            const std::string hidden = block.substr(0, colon);
            while (pos < hidden.size()) {
                const std::size_t comma = std::min(hidden.find(',', pos), hidden.size());
                spec.hidden.push_back(std::stoul(hidden.substr(pos, comma - pos)));
                pos = comma + 1;
            }
        } catch (const std::logic_error&) {
            throw dmsc::config_error("--layers: cannot parse block '" + block + "'");
        }
        specs.push_back(std::move(spec));
        start = stop + 1;
    }
    if (specs.size() != view_dims.size()) {
        throw dmsc::config_error("--layers: " + std::to_string(specs.size()) +
                                 " blocks given for " + std::to_string(view_dims.size()) + " views");
    }
    return specs;
}

void require_file(const std::string& path, const char* role) {
    if (!fs::exists(path)) {
        throw dmsc::config_error(std::string(role) + " file does not exist: " + path);
    }
}

void require_files(const std::vector<std::string>& paths, const char* role) {
    for (const auto& path : paths) require_file(path, role);
}

std::vector<std::size_t> view_dims(const dmsc::MultiViewDataset& dataset) {
    std::vector<std::size_t> dims;
    dims.reserve(dataset.view_count());
    for (const auto& view : dataset.views) dims.push_back(view.cols());
    return dims;
}

dmsc::MultiViewDataset load_rescaled(const std::vector<std::string>& view_paths) {
    require_files(view_paths, "view");
    std::vector<fs::path> paths(view_paths.begin(), view_paths.end());
    return dmsc::rescale(dmsc::load_views(paths));
}

std::vector<dmsc::AutoencoderBranch> load_branches(const std::vector<std::string>& paths) {
    require_files(paths, "branch checkpoint");
    std::vector<dmsc::AutoencoderBranch> branches;
    branches.reserve(paths.size());
    for (const auto& path : paths) branches.push_back(dmsc::load_branch(path));
    return branches;
}

void print_metrics_report(const std::vector<int>& truth, const std::vector<int>& predicted) {
    const double a = dmsc::acc(truth, predicted);
    const double n = dmsc::nmi(truth, predicted);
    const double r = dmsc::ari(truth, predicted);
    std::printf("{\"acc\": %.6f, \"nmi\": %.6f, \"ari\": %.6f}\n", a, n, r);
    std::printf("%-8s %-8s %-8s\n", "ACC", "NMI", "ARI");
    std::printf("%-8.4f %-8.4f %-8.4f\n", a, n, r);
}

struct SynthArgs {
    std::size_t n = 600;
    std::size_t k = 3;
    std::vector<std::size_t> dims{8, 12};
    double separation = 6.0;
    double noise = 1.0;
    std::uint64_t seed = 0;
    std::string out = ".";
};

void cmd_synth(const SynthArgs& args) {
    const auto dataset = dmsc::make_blobs(args.n, args.k, args.dims, args.separation, args.noise,
                                          args.seed);
    fs::create_directories(args.out);
    for (std::size_t v = 0; v < dataset.view_count(); ++v) {
        dmsc::save_matrix(dataset.views[v], fs::path(args.out) / ("view_" + std::to_string(v) +
                                                                  ".txt"));
    }
    dmsc::save_labels(dataset.labels, fs::path(args.out) / "labels.txt");
    std::printf("wrote %zu views and labels for n=%zu k=%zu under %s\n", dataset.view_count(),
                args.n, args.k, args.out.c_str());
}

struct PretrainArgs {
    std::vector<std::string> views;
    std::string layers = "auto";
    std::size_t epochs = 400;
    std::size_t batch = 256;
    double eta = 1e-3;
    std::uint64_t seed = 0;
    std::string out = ".";
};

void cmd_pretrain(const PretrainArgs& args) {
    const auto dataset = load_rescaled(args.views);
    const auto specs = parse_layer_specs(args.layers, view_dims(dataset));

    dmsc::Rng rng(args.seed);
    std::vector<dmsc::AutoencoderBranch> branches;
    branches.reserve(dataset.view_count());
    for (std::size_t v = 0; v < dataset.view_count(); ++v) {
        branches.push_back(dmsc::make_branch(dataset.views[v].cols(), specs[v], rng));
    }

    dmsc::PretrainConfig config;
    config.epochs = args.epochs;
    config.batch_size = args.batch;
    config.learning_rate = args.eta;
    const auto history = dmsc::pretrain(branches, dataset.views, config, rng);

    fs::create_directories(args.out);
    for (std::size_t v = 0; v < branches.size(); ++v) {
        dmsc::save_branch(branches[v], fs::path(args.out) / ("branch_" + std::to_string(v) +
                                                             ".txt"));
    }
    std::ofstream loss_file = dmsc::open_for_write(fs::path(args.out) / "pretrain_history.csv");
    for (std::size_t epoch = 0; epoch < args.epochs; ++epoch) {
        loss_file << epoch;
        for (std::size_t v = 0; v < history.size(); ++v) {
            loss_file << ',';
            dmsc::write_double(loss_file, history[v][epoch]);
        }
        loss_file << '\n';
    }
    std::printf("pretrained %zu branches for %zu epochs; final losses:", branches.size(),
                args.epochs);
    for (const auto& h : history) std::printf(" %.6g", h.back());
    std::printf("\n");
}

struct FinetuneArgs {
    std::vector<std::string> views;
    std::vector<std::string> branches;
    std::string labels;
    std::string constraints;
    dmsc::TrainingConfig config;
    std::string out = ".";
};

void cmd_finetune(const FinetuneArgs& args) {
    const auto dataset = load_rescaled(args.views);
    auto branches = load_branches(args.branches);
    if (branches.size() != dataset.view_count()) {
        throw dmsc::config_error("got " + std::to_string(branches.size()) + " branch files for " +
                                 std::to_string(dataset.view_count()) + " views");
    }

    std::vector<int> labels;
    if (!args.labels.empty()) {
        require_file(args.labels, "label");
        labels = dmsc::load_labels(args.labels);
        if (labels.size() != dataset.sample_count()) {
            throw dmsc::config_error("label file covers " + std::to_string(labels.size()) +
                                     " samples, dataset has " +
                                     std::to_string(dataset.sample_count()));
        }
    }

    dmsc::ConstraintSet constraints;
    if (!args.constraints.empty()) {
        require_file(args.constraints, "constraint");
        constraints = dmsc::load_constraints(args.constraints, dataset.sample_count());
    } else if (args.config.semi_enabled) {
        if (labels.empty()) {
            throw dmsc::config_error(
                "semi-supervision needs --constraints, or --labels to derive them from");
        }
        constraints = dmsc::generate_constraints(labels, args.config.beta, args.config.seed);
        if (constraints.empty()) {
            throw dmsc::config_error("beta " + std::to_string(args.config.beta) +
                                     " yields no constraint pairs while semi-supervision is on");
        }
    }

    args.config.validate();
    auto init = dmsc::init_cluster_state(branches, dataset, args.config.k, args.config.seed,
                                         args.config.alpha);
    dmsc::FinetuneSession session(std::move(branches), std::move(init.state),
                                  std::move(init.assignments), args.config,
                                  dataset.sample_count());
    session.run(dataset, constraints, labels);

    fs::create_directories(args.out);
    dmsc::save_checkpoint(session, fs::path(args.out) / "final.ckpt");
    dmsc::save_train_records(session.history(), fs::path(args.out) / "record.csv");
    dmsc::save_labels(session.assignments(), fs::path(args.out) / "labels.txt");

    std::printf("finetuning %s after %zu iterations (%zu refreshes)\n",
                session.halted_by_criterion() ? "converged" : "hit the iteration cap",
                session.iteration(), session.history().size());
    if (!labels.empty()) print_metrics_report(labels, session.assignments());
}

struct EvalArgs {
    std::string labels;
    std::string predictions;
};

void cmd_eval(const EvalArgs& args) {
    require_file(args.labels, "label");
    require_file(args.predictions, "prediction");
    const auto truth = dmsc::load_labels(args.labels);
    const auto predicted = dmsc::load_labels(args.predictions);
    print_metrics_report(truth, predicted);
}

struct ExportArgs {
    std::vector<std::string> views;
    std::vector<std::string> branches;
    std::string checkpoint;
    std::string out = ".";
};

void cmd_export_embeddings(const ExportArgs& args) {
    const auto dataset = load_rescaled(args.views);
    std::vector<dmsc::AutoencoderBranch> branches;
    if (!args.checkpoint.empty()) {
        require_file(args.checkpoint, "checkpoint");
        branches = dmsc::load_checkpoint(args.checkpoint).branches();
    } else if (!args.branches.empty()) {
        branches = load_branches(args.branches);
    } else {
        throw dmsc::config_error("need --checkpoint or --branches to encode with");
    }
    const auto z = dmsc::encode_all(branches, dataset.views);

    fs::create_directories(args.out);
    for (std::size_t v = 0; v < z.view_count(); ++v) {
        dmsc::save_matrix(z.per_view[v], fs::path(args.out) / ("embedding_" + std::to_string(v) +
                                                               ".txt"));
    }
    dmsc::save_matrix(z.concat(), fs::path(args.out) / "embeddings.txt");
    std::printf("wrote %zu per-view embeddings and their concatenation under %s\n", z.view_count(),
                args.out.c_str());
}

void add_training_flags(CLI::App* cmd, dmsc::TrainingConfig& config) {
    cmd->add_option("--k", config.k, "number of clusters");
    cmd->add_option("--gamma", config.gamma, "clustering-loss weight");
    cmd->add_option("--lambda", config.lambda, "constraint-loss weight");
    cmd->add_option("--beta", config.beta, "constraint proportion (pairs = round(beta*n))");
    cmd->add_option("--alpha", config.alpha, "Student-t degrees of freedom");
    cmd->add_option("--eta", config.eta, "learning rate");
    cmd->add_option("--batch", config.batch_size, "mini-batch size");
    cmd->add_option("--interval", config.update_interval,
                    "iterations between target refreshes (0 = one epoch equivalent)");
    cmd->add_option("--delta", config.delta, "stopping threshold on the label-change fraction");
    cmd->add_option("--max-iter", config.max_iter, "iteration cap");
    cmd->add_option("--seed", config.seed, "random seed");
    cmd->add_flag("--no-fsp", [&config](std::int64_t) { config.fsp_enabled = false; },
                  "drop reconstruction losses during finetuning");
    cmd->add_flag("--no-semi", [&config](std::int64_t) { config.semi_enabled = false; },
                  "drop the pairwise-constraint loss");
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"deep multi-view semi-supervised clustering engine"};
    app.require_subcommand(1);
    app.set_config("--config", "", "flat key=value config file; flags take precedence");

    SynthArgs synth;
    auto* synth_cmd = app.add_subcommand("synth", "generate a synthetic multi-view blob dataset");
    synth_cmd->add_option("--n", synth.n, "sample count");
    synth_cmd->add_option("--k", synth.k, "cluster count");
    synth_cmd->add_option("--dims", synth.dims, "per-view feature widths")->delimiter(',');
    synth_cmd->add_option("--separation", synth.separation, "minimum center distance per view");
    synth_cmd->add_option("--noise", synth.noise, "isotropic noise scale");
    synth_cmd->add_option("--seed", synth.seed, "random seed");
    synth_cmd->add_option("--out", synth.out, "output directory");
    synth_cmd->callback([&synth] { cmd_synth(synth); });

    PretrainArgs pretrain;
    auto* pretrain_cmd = app.add_subcommand("pretrain", "pretrain per-view autoencoder branches");
    pretrain_cmd->add_option("--views", pretrain.views, "view files")->required()->expected(-1);
    pretrain_cmd->add_option("--layers", pretrain.layers,
                             "per-view 'h1,h2:emb' blocks joined by ';', or 'auto'");
    pretrain_cmd->add_option("--epochs", pretrain.epochs, "training epochs");
    pretrain_cmd->add_option("--batch", pretrain.batch, "mini-batch size");
    pretrain_cmd->add_option("--eta", pretrain.eta, "learning rate");
    pretrain_cmd->add_option("--seed", pretrain.seed, "random seed");
    pretrain_cmd->add_option("--out", pretrain.out, "output directory");
    pretrain_cmd->callback([&pretrain] { cmd_pretrain(pretrain); });

    FinetuneArgs finetune;
    auto* finetune_cmd = app.add_subcommand("finetune", "joint clustering finetuning");
    finetune_cmd->add_option("--views", finetune.views, "view files")->required()->expected(-1);
    finetune_cmd->add_option("--branches", finetune.branches, "pretrained branch checkpoints")
        ->required()
        ->expected(-1);
    finetune_cmd->add_option("--labels", finetune.labels,
                             "ground-truth labels (enables metric snapshots and constraint "
                             "generation)");
    finetune_cmd->add_option("--constraints", finetune.constraints, "constraint file to train with");
    finetune_cmd->add_option("--out", finetune.out, "output directory");
    add_training_flags(finetune_cmd, finetune.config);
    finetune_cmd->callback([&finetune] { cmd_finetune(finetune); });

    EvalArgs eval;
    auto* eval_cmd = app.add_subcommand("eval", "score predictions against ground truth");
    eval_cmd->add_option("--labels", eval.labels, "ground-truth label file")->required();
    eval_cmd->add_option("--predictions", eval.predictions, "predicted label file")->required();
    eval_cmd->callback([&eval] { cmd_eval(eval); });

    ExportArgs export_args;
    auto* export_cmd = app.add_subcommand("export-embeddings", "write per-view and concatenated "
                                                               "embeddings");
    export_cmd->add_option("--views", export_args.views, "view files")->required()->expected(-1);
    export_cmd->add_option("--branches", export_args.branches, "pretrained branch checkpoints")
        ->expected(-1);
    export_cmd->add_option("--checkpoint", export_args.checkpoint, "finetune checkpoint to read "
                                                                   "branches from");
    export_cmd->add_option("--out", export_args.out, "output directory");
    export_cmd->callback([&export_args] { cmd_export_embeddings(export_args); });

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    } catch (const dmsc::parse_error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 3;
    } catch (const dmsc::divergence_error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 4;
    } catch (const dmsc::config_error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
