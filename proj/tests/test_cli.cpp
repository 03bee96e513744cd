// End-to-end checks of the command-line front end: artifact shapes, exit
// codes, and byte-level determinism. Each test shells out to the real binary.

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "dmsc/autoencoder.hpp"
#include "dmsc/dataset.hpp"

using namespace dmsc;
namespace fs = std::filesystem;

namespace {

fs::path scratch_dir() {
    const fs::path dir = fs::temp_directory_path() / "dmsc_test_cli";
    fs::create_directories(dir);
    return dir;
}

std::string slurp(const fs::path& path) {
    std::ifstream in(path);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

struct CommandResult {
    int exit_code = -1;
    std::string output;  // stdout and stderr combined
};

CommandResult run_cli(const std::string& args) {
    static int counter = 0;
    const fs::path capture = scratch_dir() / ("capture_" + std::to_string(counter++) + ".txt");
    const std::string command =
        std::string(DMSC_CLI_PATH) + " " + args + " > " + capture.string() + " 2>&1";
    const int status = std::system(command.c_str());
    CommandResult result;
    result.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    result.output = slurp(capture);
    return result;
}

std::size_t count_lines(const fs::path& path) {
    std::ifstream in(path);
    std::string line;
    std::size_t n = 0;
    while (std::getline(in, line)) {
        if (!line.empty()) ++n;
    }
    return n;
}

// Shared tiny dataset + pretrained branches, built once through the CLI.
struct Pipeline {
    fs::path data;
    fs::path models;
};

const Pipeline& pipeline() {
    static Pipeline p = [] {
        Pipeline fresh;
        fresh.data = scratch_dir() / "data";
        fresh.models = scratch_dir() / "models";
        auto synth = run_cli("synth --n 60 --k 3 --dims 3,4 --separation 9 --noise 0.6 --seed 5 "
                             "--out " + fresh.data.string());
        REQUIRE(synth.exit_code == 0);
        auto pre = run_cli("pretrain --views " + (fresh.data / "view_0.txt").string() + " " +
                           (fresh.data / "view_1.txt").string() +
                           " --layers '6:2;6:2' --epochs 40 --batch 16 --seed 1 --out " +
                           fresh.models.string());
        REQUIRE(pre.exit_code == 0);
        return fresh;
    }();
    return p;
}

std::string finetune_args(const fs::path& out) {
    const auto& p = pipeline();
    return "finetune --views " + (p.data / "view_0.txt").string() + " " +
           (p.data / "view_1.txt").string() + " --branches " +
           (p.models / "branch_0.txt").string() + " " + (p.models / "branch_1.txt").string() +
           " --labels " + (p.data / "labels.txt").string() +
           " --k 3 --batch 16 --max-iter 60 --seed 3 --out " + out.string();
}

}  // namespace

TEST_CASE("help exits zero and lists every subcommand") {
    const auto result = run_cli("--help");
    CHECK(result.exit_code == 0);
    for (const char* name : {"synth", "pretrain", "finetune", "eval", "export-embeddings"}) {
        CHECK(result.output.find(name) != std::string::npos);
    }
}

TEST_CASE("synth writes aligned view files and balanced labels") {
    const fs::path out = scratch_dir() / "synth_only";
    const auto result = run_cli("synth --n 24 --k 3 --dims 3,5 --seed 7 --out " + out.string());
    CHECK(result.exit_code == 0);

    const auto v0 = load_matrix(out / "view_0.txt");
    const auto v1 = load_matrix(out / "view_1.txt");
    CHECK(v0.rows() == 24);
    CHECK(v0.cols() == 3);
    CHECK(v1.rows() == 24);
    CHECK(v1.cols() == 5);

    const auto labels = load_labels(out / "labels.txt");
    REQUIRE(labels.size() == 24);
    std::vector<std::size_t> counts(3, 0);
    for (int label : labels) {
        REQUIRE(label >= 0);
        REQUIRE(label < 3);
        ++counts[static_cast<std::size_t>(label)];
    }
    for (std::size_t c : counts) CHECK(c == 8);
}

TEST_CASE("pretrain writes loadable branch checkpoints and a per-epoch history") {
    const auto& p = pipeline();
    const auto b0 = load_branch(p.models / "branch_0.txt");
    const auto b1 = load_branch(p.models / "branch_1.txt");
    CHECK(b0.input_dim() == 3);
    CHECK(b0.embedding_dim() == 2);
    CHECK(b1.input_dim() == 4);
    CHECK(b1.embedding_dim() == 2);

    const fs::path history = p.models / "pretrain_history.csv";
    REQUIRE(fs::exists(history));
    CHECK(count_lines(history) == 40);

    std::ifstream in(history);
    std::string line;
    std::getline(in, line);
    std::stringstream row(line);
    std::string cell;
    std::vector<std::string> cells;
    while (std::getline(row, cell, ',')) cells.push_back(cell);
    REQUIRE(cells.size() == 3);  // epoch index + one loss per view
    CHECK(cells[0] == "0");
    CHECK(std::stod(cells[1]) > 0.0);
    CHECK(std::stod(cells[2]) > 0.0);
}

TEST_CASE("finetune produces a checkpoint, records, labels, and a metrics line") {
    const fs::path out = scratch_dir() / "finetune_run";
    const auto result = run_cli(finetune_args(out));
    CHECK(result.exit_code == 0);
    CHECK(result.output.find("{\"acc\":") != std::string::npos);

    REQUIRE(fs::exists(out / "final.ckpt"));
    REQUIRE(fs::exists(out / "record.csv"));
    REQUIRE(fs::exists(out / "labels.txt"));

    const auto predicted = load_labels(out / "labels.txt");
    REQUIRE(predicted.size() == 60);
    for (int label : predicted) {
        CHECK(label >= 0);
        CHECK(label < 3);
    }

    std::ifstream in(out / "record.csv");
    std::string header;
    std::getline(in, header);
    CHECK(header == "iteration,l_rec,l_clu,l_con,total,change_fraction,acc,nmi,ari");
    CHECK(count_lines(out / "record.csv") >= 2);  // header plus at least one refresh
}

TEST_CASE("eval scores a prediction file against ground truth") {
    const auto& p = pipeline();
    const fs::path out = scratch_dir() / "finetune_eval";
    REQUIRE(run_cli(finetune_args(out)).exit_code == 0);

    const auto result = run_cli("eval --labels " + (p.data / "labels.txt").string() +
                                " --predictions " + (out / "labels.txt").string());
    CHECK(result.exit_code == 0);
    CHECK(result.output.find("{\"acc\":") != std::string::npos);
    CHECK(result.output.find("\"nmi\":") != std::string::npos);
    CHECK(result.output.find("\"ari\":") != std::string::npos);
    CHECK(result.output.find("ACC") != std::string::npos);

    // Perfect self-agreement sanity case.
    const auto self_eval = run_cli("eval --labels " + (p.data / "labels.txt").string() +
                                   " --predictions " + (p.data / "labels.txt").string());
    CHECK(self_eval.exit_code == 0);
    CHECK(self_eval.output.find("{\"acc\": 1.000000, \"nmi\": 1.000000, \"ari\": 1.000000}") !=
          std::string::npos);
}

TEST_CASE("export-embeddings reads branch files or a finetune checkpoint") {
    const auto& p = pipeline();
    const std::string views = (p.data / "view_0.txt").string() + " " +
                              (p.data / "view_1.txt").string();

    const fs::path from_branches = scratch_dir() / "export_branches";
    const auto a = run_cli("export-embeddings --views " + views + " --branches " +
                           (p.models / "branch_0.txt").string() + " " +
                           (p.models / "branch_1.txt").string() + " --out " +
                           from_branches.string());
    CHECK(a.exit_code == 0);
    const auto z0 = load_matrix(from_branches / "embedding_0.txt");
    const auto z1 = load_matrix(from_branches / "embedding_1.txt");
    const auto concat = load_matrix(from_branches / "embeddings.txt");
    CHECK(z0.rows() == 60);
    CHECK(z0.cols() == 2);
    CHECK(z1.cols() == 2);
    CHECK(concat.rows() == 60);
    CHECK(concat.cols() == 4);
    for (std::size_t i = 0; i < 60; ++i) {
        CHECK(concat(i, 0) == z0(i, 0));
        CHECK(concat(i, 2) == z1(i, 0));
    }

    const fs::path run = scratch_dir() / "finetune_export";
    REQUIRE(run_cli(finetune_args(run)).exit_code == 0);
    const fs::path from_ckpt = scratch_dir() / "export_ckpt";
    const auto b = run_cli("export-embeddings --views " + views + " --checkpoint " +
                           (run / "final.ckpt").string() + " --out " + from_ckpt.string());
    CHECK(b.exit_code == 0);
    CHECK(load_matrix(from_ckpt / "embeddings.txt").cols() == 4);

    // Without a parameter source there is nothing to encode with.
    const auto neither = run_cli("export-embeddings --views " + views + " --out " +
                                 (scratch_dir() / "export_none").string());
    CHECK(neither.exit_code == 2);
}

TEST_CASE("identical finetune invocations produce byte-identical artifacts") {
    const fs::path first = scratch_dir() / "repeat_a";
    const fs::path second = scratch_dir() / "repeat_b";
    REQUIRE(run_cli(finetune_args(first)).exit_code == 0);
    REQUIRE(run_cli(finetune_args(second)).exit_code == 0);

    CHECK(slurp(first / "record.csv") == slurp(second / "record.csv"));
    CHECK(slurp(first / "labels.txt") == slurp(second / "labels.txt"));
    CHECK(slurp(first / "final.ckpt") == slurp(second / "final.ckpt"));
}

TEST_CASE("configuration problems exit with code 2") {
    const auto& p = pipeline();

    const auto unknown_flag = run_cli("synth --does-not-exist 1");
    CHECK(unknown_flag.exit_code == 2);

    const auto missing_view = run_cli("pretrain --views " +
                                      (scratch_dir() / "no_such_view.txt").string());
    CHECK(missing_view.exit_code == 2);

    const auto missing_eval = run_cli("eval --labels " + (p.data / "labels.txt").string() +
                                      " --predictions " +
                                      (scratch_dir() / "no_such_pred.txt").string());
    CHECK(missing_eval.exit_code == 2);

    // Semi-supervision with a constraint budget that rounds to zero pairs.
    const fs::path out = scratch_dir() / "beta_zero";
    const auto empty_budget = run_cli(finetune_args(out) + " --beta 0");
    CHECK(empty_budget.exit_code == 2);
    CHECK(empty_budget.output.find("error:") != std::string::npos);

    const auto no_subcommand = run_cli("");
    CHECK(no_subcommand.exit_code == 2);
}

TEST_CASE("malformed input files exit with code 3") {
    const fs::path bad_view = scratch_dir() / "bad_view.txt";
    std::ofstream(bad_view) << "4 2\n0.0 0.0\n1.0 not-a-number\n";
    const auto result = run_cli("pretrain --views " + bad_view.string() + " --epochs 1");
    CHECK(result.exit_code == 3);
    CHECK(result.output.find("error:") != std::string::npos);
}

TEST_CASE("numerical divergence exits with code 4") {
    const fs::path out = scratch_dir() / "diverged";
    const auto result = run_cli(finetune_args(out) + " --eta 1e200 --no-semi");
    CHECK(result.exit_code == 4);
    CHECK(result.output.find("diverged") != std::string::npos);
}
