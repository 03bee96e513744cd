// Dataset and constraint plumbing: text round trips, rescaling, synthetic
// blobs, and pairwise-constraint generation and validation.

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <set>
#include <string>
#include <vector>

#include "dmsc/constraints.hpp"
#include "dmsc/dataset.hpp"
#include "dmsc/errors.hpp"
#include "dmsc/matrix.hpp"
#include "dmsc/rng.hpp"

using namespace dmsc;
namespace fs = std::filesystem;

namespace {

fs::path scratch_dir() {
    const fs::path dir = fs::temp_directory_path() / "dmsc_test_data";
    fs::create_directories(dir);
    return dir;
}

void write_text(const fs::path& path, const std::string& text) {
    std::ofstream out(path);
    out << text;
}

}  // namespace

TEST_CASE("matrix text round trip is exact") {
    Rng rng(5);
    Matrix m(7, 3);
    for (std::size_t i = 0; i < m.size(); ++i) m.data()[i] = rng.normal() * 1e3;
    m(0, 0) = 0.1;  // not exactly representable; full-precision print must recover it
    m(1, 1) = -1.0 / 3.0;
    m(2, 2) = 1e-300;

    const fs::path path = scratch_dir() / "roundtrip.txt";
    save_matrix(m, path);
    CHECK(load_matrix(path) == m);
}

TEST_CASE("matrix loader reports malformed content with its line") {
    const fs::path path = scratch_dir() / "bad_matrix.txt";

    write_text(path, "2 2\n1 2\n3\n");
    CHECK_THROWS_AS(load_matrix(path), parse_error);

    write_text(path, "2 2\n1 2\n3 x\n");
    CHECK_THROWS_WITH_AS(load_matrix(path), doctest::Contains(":3:"), parse_error);

    write_text(path, "nonsense\n");
    CHECK_THROWS_AS(load_matrix(path), parse_error);
}

TEST_CASE("label files round trip and reject junk") {
    const fs::path path = scratch_dir() / "labels.txt";
    const std::vector<int> labels{0, 2, 1, 1, 0, 3};
    save_labels(labels, path);
    CHECK(load_labels(path) == labels);

    write_text(path, "0\n1\ntwo\n");
    CHECK_THROWS_AS(load_labels(path), parse_error);
}

TEST_CASE("load_views demands row-aligned files") {
    const fs::path a = scratch_dir() / "va.txt";
    const fs::path b = scratch_dir() / "vb.txt";
    save_matrix(Matrix(4, 2, 1.0), a);
    save_matrix(Matrix(5, 3, 1.0), b);
    CHECK_THROWS_AS(load_views({a, b}), config_error);

    save_matrix(Matrix(4, 3, 2.0), b);
    const auto dataset = load_views({a, b});
    CHECK(dataset.view_count() == 2);
    CHECK(dataset.sample_count() == 4);
}

TEST_CASE("rescale_view maps onto [-1, 1] and is idempotent") {
    Matrix m(3, 2);
    m(0, 0) = 2.0;  m(0, 1) = 4.0;
    m(1, 0) = 6.0;  m(1, 1) = 10.0;
    m(2, 0) = 3.0;  m(2, 1) = 5.0;

    const Matrix scaled = rescale_view(m);
    double lo = scaled(0, 0), hi = scaled(0, 0);
    for (std::size_t i = 0; i < scaled.size(); ++i) {
        lo = std::min(lo, scaled.data()[i]);
        hi = std::max(hi, scaled.data()[i]);
    }
    CHECK(lo == -1.0);
    CHECK(hi == 1.0);
    // Global min 2 -> -1, global max 10 -> 1, so 6 -> 0.
    CHECK(scaled(1, 0) == 0.0);
    CHECK(rescale_view(scaled) == scaled);
}

TEST_CASE("rescale_view sends constant views to zero") {
    const Matrix scaled = rescale_view(Matrix(4, 3, 7.5));
    for (std::size_t i = 0; i < scaled.size(); ++i) CHECK(scaled.data()[i] == 0.0);
}

TEST_CASE("make_blobs produces consistent views with balanced labels") {
    const auto dataset = make_blobs(60, 3, {4, 7}, 6.0, 0.5, 99);
    REQUIRE(dataset.view_count() == 2);
    CHECK(dataset.views[0].rows() == 60);
    CHECK(dataset.views[0].cols() == 4);
    CHECK(dataset.views[1].cols() == 7);
    REQUIRE(dataset.labels.size() == 60);

    std::vector<int> counts(3, 0);
    for (int label : dataset.labels) {
        REQUIRE(label >= 0);
        REQUIRE(label < 3);
        ++counts[label];
    }
    for (int count : counts) CHECK(count == 20);
}

TEST_CASE("make_blobs is deterministic per seed") {
    const auto a = make_blobs(30, 2, {3}, 5.0, 1.0, 4);
    const auto b = make_blobs(30, 2, {3}, 5.0, 1.0, 4);
    const auto c = make_blobs(30, 2, {3}, 5.0, 1.0, 5);
    CHECK(a.views[0] == b.views[0]);
    CHECK(a.labels == b.labels);
    CHECK_FALSE(a.views[0] == c.views[0]);
}

TEST_CASE("make_blobs with zero noise collapses clusters to their centers") {
    const auto dataset = make_blobs(12, 3, {2}, 4.0, 0.0, 8);
    // All samples sharing a label must coincide exactly.
    for (std::size_t i = 0; i < 12; ++i) {
        for (std::size_t j = i + 1; j < 12; ++j) {
            if (dataset.labels[i] != dataset.labels[j]) continue;
            CHECK(dataset.views[0](i, 0) == dataset.views[0](j, 0));
            CHECK(dataset.views[0](i, 1) == dataset.views[0](j, 1));
        }
    }
}

TEST_CASE("generate_constraints draws the requested share of distinct pairs") {
    std::vector<int> labels(10);
    for (std::size_t i = 0; i < labels.size(); ++i) labels[i] = int(i % 2);

    const auto set = generate_constraints(labels, 1.0, 3);
    CHECK(set.sample_count == 10);
    REQUIRE(set.size() == 10);  // round(1.0 * n)

    std::set<std::pair<std::size_t, std::size_t>> seen;
    for (const auto& pair : set.pairs) {
        REQUIRE(pair.i < pair.k);  // normalized order, no self-pairs
        REQUIRE(pair.k < 10);
        CHECK(seen.insert({pair.i, pair.k}).second);  // distinct
        CHECK(pair.link == (labels[pair.i] == labels[pair.k] ? +1 : -1));
    }
}

TEST_CASE("generate_constraints covers the full pair budget") {
    const std::vector<int> labels{0, 0, 1, 1, 2};
    // proportion 2.0 on n=5 asks for all 10 unordered pairs
    const auto set = generate_constraints(labels, 2.0, 1);
    CHECK(set.size() == 10);
    CHECK_THROWS_AS(generate_constraints(labels, 2.2, 1), config_error);
}

TEST_CASE("generate_constraints rounds the pair count") {
    std::vector<int> labels(9, 0);
    CHECK(generate_constraints(labels, 0.5, 2).size() == 5);  // round(4.5) away from zero
    CHECK(generate_constraints(labels, 0.0, 2).size() == 0);
}

TEST_CASE("constraint files round trip") {
    std::vector<int> labels(25);
    for (std::size_t i = 0; i < labels.size(); ++i) labels[i] = int(i % 3);
    const auto set = generate_constraints(labels, 1.0, 6);

    const fs::path path = scratch_dir() / "constraints.txt";
    save_constraints(set, path);
    const auto loaded = load_constraints(path, 25);
    CHECK(loaded.pairs == set.pairs);
    CHECK(loaded.sample_count == 25);
}

TEST_CASE("constraint loader validates indices, links, and duplicates") {
    const fs::path path = scratch_dir() / "bad_constraints.txt";

    write_text(path, "0 1 1\n1 25 -1\n");
    CHECK_THROWS_AS(load_constraints(path, 10), parse_error);  // index out of range

    write_text(path, "0 1 2\n");
    CHECK_THROWS_AS(load_constraints(path, 10), parse_error);  // link not in {-1, +1}

    write_text(path, "3 3 1\n");
    CHECK_THROWS_AS(load_constraints(path, 10), parse_error);  // self-pair

    write_text(path, "0 1 1\n1 0 -1\n");
    CHECK_THROWS_AS(load_constraints(path, 10), parse_error);  // duplicate after normalization

    write_text(path, "2 1 -1\n");
    const auto loaded = load_constraints(path, 10);
    REQUIRE(loaded.size() == 1);
    CHECK(loaded.pairs[0].i == 1);  // stored with i < k
    CHECK(loaded.pairs[0].k == 2);
}
