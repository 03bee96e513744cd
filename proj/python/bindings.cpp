// numpy-facing bindings for the clustering engine's main operations.

#include <algorithm>
#include <cstdint>
#include <string>
#include <vector>

#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "dmsc/autoencoder.hpp"
#include "dmsc/constraints.hpp"
#include "dmsc/dataset.hpp"
#include "dmsc/errors.hpp"
#include "dmsc/fusion.hpp"
#include "dmsc/kmeans.hpp"
#include "dmsc/matrix.hpp"
#include "dmsc/metrics.hpp"
#include "dmsc/rng.hpp"
#include "dmsc/trainer.hpp"

namespace py = pybind11;

namespace {

using InputArray = py::array_t<double, py::array::c_style | py::array::forcecast>;

dmsc::Matrix to_matrix(const InputArray& arr) {
    if (arr.ndim() != 2) throw dmsc::config_error("expected a 2-D array");
    dmsc::Matrix m(static_cast<std::size_t>(arr.shape(0)), static_cast<std::size_t>(arr.shape(1)));
    std::copy_n(arr.data(), m.size(), m.data());
    return m;
}

std::vector<dmsc::Matrix> to_matrices(const std::vector<InputArray>& arrays) {
    std::vector<dmsc::Matrix> out;
    out.reserve(arrays.size());
    for (const auto& arr : arrays) out.push_back(to_matrix(arr));
    return out;
}

py::array_t<double> to_array(const dmsc::Matrix& m) {
    py::array_t<double> out({static_cast<py::ssize_t>(m.rows()),
                             static_cast<py::ssize_t>(m.cols())});
    std::copy_n(m.data(), m.size(), out.mutable_data());
    return out;
}

py::list to_arrays(const std::vector<dmsc::Matrix>& ms) {
    py::list out;
    for (const auto& m : ms) out.append(to_array(m));
    return out;
}

dmsc::EmbeddingSet to_embeddings(const std::vector<InputArray>& arrays) {
    return dmsc::EmbeddingSet{to_matrices(arrays)};
}

dmsc::ClusterState to_state(const std::vector<InputArray>& centers, const InputArray& logits,
                            double alpha) {
    return dmsc::ClusterState{to_matrices(centers), to_matrix(logits), alpha};
}

dmsc::ConstraintSet to_constraints(const std::vector<std::tuple<std::size_t, std::size_t, int>>& pairs,
                                   std::size_t sample_count) {
    dmsc::ConstraintSet set;
    set.sample_count = sample_count;
    set.pairs.reserve(pairs.size());
    for (const auto& [i, k, link] : pairs) set.pairs.push_back({i, k, link});
    return set;
}

std::vector<std::tuple<std::size_t, std::size_t, int>> from_constraints(
    const dmsc::ConstraintSet& set) {
    std::vector<std::tuple<std::size_t, std::size_t, int>> out;
    out.reserve(set.size());
    for (const auto& pair : set.pairs) out.emplace_back(pair.i, pair.k, pair.link);
    return out;
}

py::list history_rows(const std::vector<dmsc::TrainRecord>& records) {
    py::list rows;
    for (const auto& record : records) {
        py::dict row;
        row["iteration"] = record.iteration;
        row["l_rec"] = record.losses.l_rec;
        row["l_clu"] = record.losses.l_clu;
        row["l_con"] = record.losses.l_con;
        row["total"] = record.losses.total;
        row["change_fraction"] = record.change_fraction;
        if (record.has_metrics) {
            row["acc"] = record.acc;
            row["nmi"] = record.nmi;
            row["ari"] = record.ari;
        }
        rows.append(row);
    }
    return rows;
}

dmsc::TrainingConfig make_config(std::size_t k, double gamma, double lam, double alpha,
                                 double beta, double eta, std::size_t batch, std::size_t interval,
                                 double delta, std::size_t max_iter, std::uint64_t seed, bool fsp,
                                 bool semi) {
    dmsc::TrainingConfig config;
    config.k = k;
    config.gamma = gamma;
    config.lambda = lam;
    config.alpha = alpha;
    config.beta = beta;
    config.eta = eta;
    config.batch_size = batch;
    config.update_interval = interval;
    config.delta = delta;
    config.max_iter = max_iter;
    config.seed = seed;
    config.fsp_enabled = fsp;
    config.semi_enabled = semi;
    config.validate();
    return config;
}

}  // namespace

PYBIND11_MODULE(_core, mod) {
    mod.doc() = "deep multi-view semi-supervised clustering engine";

    py::register_exception<dmsc::parse_error>(mod, "ParseError", PyExc_ValueError);
    py::register_exception<dmsc::config_error>(mod, "ConfigError", PyExc_ValueError);
    py::register_exception<dmsc::divergence_error>(mod, "DivergenceError", PyExc_RuntimeError);

    py::class_<dmsc::AutoencoderBranch>(mod, "Branch", "one view's fully connected autoencoder")
        .def_property_readonly("input_dim", &dmsc::AutoencoderBranch::input_dim)
        .def_property_readonly("embedding_dim", &dmsc::AutoencoderBranch::embedding_dim)
        .def("encode",
             [](const dmsc::AutoencoderBranch& b, const InputArray& x) {
                 return to_array(dmsc::encode(b, to_matrix(x)));
             },
             py::arg("x"))
        .def("decode",
             [](const dmsc::AutoencoderBranch& b, const InputArray& z) {
                 return to_array(dmsc::decode(b, to_matrix(z)));
             },
             py::arg("z"))
        .def("reconstruction_loss",
             [](const dmsc::AutoencoderBranch& b, const InputArray& x) {
                 return dmsc::reconstruction_loss(b, to_matrix(x));
             },
             py::arg("x"))
        .def("save",
             [](const dmsc::AutoencoderBranch& b, const std::string& path) {
                 dmsc::save_branch(b, path);
             },
             py::arg("path"))
        .def_static("load", [](const std::string& path) { return dmsc::load_branch(path); },
                    py::arg("path"));

    mod.def("make_branch",
            [](std::size_t input_dim, const std::vector<std::size_t>& hidden,
               std::size_t embedding, std::uint64_t seed) {
                dmsc::Rng rng(seed);
                return dmsc::make_branch(input_dim, dmsc::LayerSpec{hidden, embedding}, rng);
            },
            py::arg("input_dim"), py::arg("hidden"), py::arg("embedding"), py::arg("seed") = 0,
            "new branch with Xavier-uniform weights");

    mod.def("default_layer_spec",
            [](std::size_t input_dim) {
                const auto spec = dmsc::default_layer_spec(input_dim);
                return py::make_tuple(spec.hidden, spec.embedding);
            },
            py::arg("input_dim"), "(hidden widths, embedding width) derived from the view width");

    mod.def("make_blobs",
            [](std::size_t n, std::size_t k, const std::vector<std::size_t>& dims,
               double separation, double noise, std::uint64_t seed) {
                const auto dataset = dmsc::make_blobs(n, k, dims, separation, noise, seed);
                return py::make_tuple(to_arrays(dataset.views), dataset.labels);
            },
            py::arg("n"), py::arg("k"), py::arg("dims"), py::arg("separation") = 6.0,
            py::arg("noise") = 1.0, py::arg("seed") = 0,
            "synthetic multi-view Gaussian clusters -> (views, labels)");

    mod.def("rescale_view",
            [](const InputArray& x) { return to_array(dmsc::rescale_view(to_matrix(x))); },
            py::arg("x"), "affine map of the view onto [-1, 1]");

    mod.def("generate_constraints",
            [](const std::vector<int>& labels, double proportion, std::uint64_t seed) {
                return from_constraints(dmsc::generate_constraints(labels, proportion, seed));
            },
            py::arg("labels"), py::arg("proportion"), py::arg("seed") = 0,
            "round(proportion * n) random (i, k, link) pairs from ground truth");

    mod.def("kmeans",
            [](const InputArray& points, std::size_t k, std::uint64_t seed, std::size_t max_iter,
               double tol) {
                const auto result = dmsc::kmeans(to_matrix(points), k, seed, max_iter, tol);
                py::dict out;
                out["centers"] = to_array(result.centers);
                out["assignments"] = result.assignments;
                out["inertia"] = result.inertia;
                out["iterations"] = result.iterations;
                return out;
            },
            py::arg("points"), py::arg("k"), py::arg("seed") = 0, py::arg("max_iter") = 300,
            py::arg("tol") = 1e-9, "Lloyd's algorithm from distance-weighted seeding");

    mod.def("view_weights",
            [](const InputArray& logits) { return to_array(dmsc::view_weights(to_matrix(logits))); },
            py::arg("logits"), "rowwise softmax of the view-weight logits");

    mod.def("soft_assignment",
            [](const std::vector<InputArray>& embeddings, const std::vector<InputArray>& centers,
               const InputArray& logits, double alpha) {
                return to_array(dmsc::soft_assignment(to_embeddings(embeddings),
                                                      to_state(centers, logits, alpha)));
            },
            py::arg("embeddings"), py::arg("centers"), py::arg("logits"), py::arg("alpha") = 1.0,
            "view-weighted Student-t soft assignment Q");

    mod.def("target_distribution",
            [](const InputArray& q) { return to_array(dmsc::target_distribution(to_matrix(q))); },
            py::arg("q"), "sharpened self-training target P");

    mod.def("clustering_loss",
            [](const InputArray& p, const InputArray& q) {
                return dmsc::clustering_loss(to_matrix(p), to_matrix(q));
            },
            py::arg("p"), py::arg("q"), "KL(P || Q)");

    mod.def("constraint_loss",
            [](const InputArray& z,
               const std::vector<std::tuple<std::size_t, std::size_t, int>>& constraints) {
                const auto m = to_matrix(z);
                return dmsc::constraint_loss(m, to_constraints(constraints, m.rows()));
            },
            py::arg("z"), py::arg("constraints"),
            "pairwise must-link / cannot-link penalty over concatenated embeddings");

    mod.def("pseudo_labels",
            [](const InputArray& q) { return dmsc::pseudo_labels(to_matrix(q)); }, py::arg("q"),
            "argmax cluster per row");

    mod.def("acc",
            [](const std::vector<int>& y, const std::vector<int>& s) { return dmsc::acc(y, s); },
            py::arg("y"), py::arg("s"), "best-match clustering accuracy");
    mod.def("nmi",
            [](const std::vector<int>& y, const std::vector<int>& s) { return dmsc::nmi(y, s); },
            py::arg("y"), py::arg("s"), "normalized mutual information");
    mod.def("ari",
            [](const std::vector<int>& y, const std::vector<int>& s) { return dmsc::ari(y, s); },
            py::arg("y"), py::arg("s"), "adjusted Rand index");

    mod.def("pretrain",
            [](std::vector<dmsc::AutoencoderBranch> branches, const std::vector<InputArray>& views,
               std::size_t epochs, std::size_t batch, double eta, std::uint64_t seed) {
                dmsc::PretrainConfig config{epochs, batch, eta};
                dmsc::Rng rng(seed);
                const auto history = dmsc::pretrain(branches, to_matrices(views), config, rng);
                return py::make_tuple(std::move(branches), history);
            },
            py::arg("branches"), py::arg("views"), py::arg("epochs") = 400,
            py::arg("batch") = 256, py::arg("eta") = 1e-3, py::arg("seed") = 0,
            "reconstruction training -> (trained branches, history[view][epoch])");

    mod.def("finetune",
            [](std::vector<dmsc::AutoencoderBranch> branches, const std::vector<InputArray>& views,
               const std::vector<std::tuple<std::size_t, std::size_t, int>>& constraints,
               const std::vector<int>& labels, std::size_t k, double gamma, double lam,
               double alpha, double beta, double eta, std::size_t batch, std::size_t interval,
               double delta, std::size_t max_iter, std::uint64_t seed, bool fsp, bool semi) {
                const auto config = make_config(k, gamma, lam, alpha, beta, eta, batch, interval,
                                                delta, max_iter, seed, fsp, semi);
                dmsc::MultiViewDataset dataset{to_matrices(views), {}};
                const auto result =
                    dmsc::finetune(std::move(branches), dataset,
                                   to_constraints(constraints, dataset.sample_count()), config,
                                   labels);
                py::dict out;
                out["branches"] = result.branches;
                out["labels"] = result.assignments;
                out["initial_labels"] = result.initial_assignments;
                out["centers"] = to_arrays(result.state.centers);
                out["weights"] = to_array(dmsc::view_weights(result.state.weight_logits));
                out["history"] = history_rows(result.history);
                out["iterations"] = result.iterations;
                out["halted_early"] = result.halted_early;
                return out;
            },
            py::arg("branches"), py::arg("views"),
            py::arg("constraints") = std::vector<std::tuple<std::size_t, std::size_t, int>>{},
            py::arg("labels") = std::vector<int>{}, py::arg("k") = 2, py::arg("gamma") = 0.1,
            py::arg("lam") = 1e-6, py::arg("alpha") = 1.0, py::arg("beta") = 1.0,
            py::arg("eta") = 1e-3, py::arg("batch") = 256, py::arg("interval") = 0,
            py::arg("delta") = 1e-4, py::arg("max_iter") = 20000, py::arg("seed") = 0,
            py::arg("fsp") = true, py::arg("semi") = true,
            "joint clustering finetuning -> dict of trained state and records");
}
