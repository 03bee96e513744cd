// Core numerics: matrices, the deterministic random source, dense layers with
// backpropagation, the adaptive optimizer, and the finite-difference checker.

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstdint>
#include <numeric>
#include <sstream>
#include <vector>

#include "dmsc/adam.hpp"
#include "dmsc/errors.hpp"
#include "dmsc/gradcheck.hpp"
#include "dmsc/matrix.hpp"
#include "dmsc/nn.hpp"
#include "dmsc/rng.hpp"

using namespace dmsc;

namespace {

Matrix from_rows(const std::vector<std::vector<double>>& rows) {
    Matrix m(rows.size(), rows.empty() ? 0 : rows.front().size());
    for (std::size_t i = 0; i < rows.size(); ++i) {
        for (std::size_t j = 0; j < rows[i].size(); ++j) m(i, j) = rows[i][j];
    }
    return m;
}

Matrix random_matrix(std::size_t r, std::size_t c, Rng& rng, double scale = 1.0) {
    Matrix m(r, c);
    for (std::size_t i = 0; i < m.size(); ++i) m.data()[i] = scale * rng.normal();
    return m;
}

}  // namespace

TEST_CASE("matmul matches a hand-worked product") {
    const Matrix a = from_rows({{1, 2}, {3, 4}});
    const Matrix b = from_rows({{5, 6}, {7, 8}});
    const Matrix c = matmul(a, b);
    CHECK(c(0, 0) == 19.0);
    CHECK(c(0, 1) == 22.0);
    CHECK(c(1, 0) == 43.0);
    CHECK(c(1, 1) == 50.0);
}

TEST_CASE("matmul rejects mismatched inner dimensions") {
    CHECK_THROWS_AS(matmul(Matrix(2, 3), Matrix(2, 3)), shape_error);
}

TEST_CASE("transposed products agree with explicit transposes") {
    Rng rng(1);
    const Matrix a = random_matrix(4, 3, rng);
    const Matrix b = random_matrix(5, 3, rng);

    Matrix bt(b.cols(), b.rows());
    for (std::size_t i = 0; i < b.rows(); ++i) {
        for (std::size_t j = 0; j < b.cols(); ++j) bt(j, i) = b(i, j);
    }
    CHECK(matmul_nt(a, b) == matmul(a, bt));

    const Matrix c = random_matrix(4, 5, rng);
    Matrix ct(c.cols(), c.rows());
    for (std::size_t i = 0; i < c.rows(); ++i) {
        for (std::size_t j = 0; j < c.cols(); ++j) ct(j, i) = c(i, j);
    }
    CHECK(matmul_tn(c, a) == matmul(ct, a));
}

TEST_CASE("axpy and scale are elementwise") {
    Matrix y = from_rows({{1, 2}, {3, 4}});
    const Matrix x = from_rows({{10, 20}, {30, 40}});
    axpy(0.5, x, y);
    CHECK(y == from_rows({{6, 12}, {18, 24}}));
    scale(y, 2.0);
    CHECK(y == from_rows({{12, 24}, {36, 48}}));
}

TEST_CASE("squared_distance is a sum of squared gaps") {
    const std::vector<double> a{1, 2};
    const std::vector<double> b{4, 6};
    CHECK(squared_distance(a, b) == 25.0);
    CHECK(squared_distance(a, a) == 0.0);
}

TEST_CASE("hcat and hsplit invert each other") {
    Rng rng(2);
    const std::vector<Matrix> blocks{random_matrix(3, 2, rng), random_matrix(3, 4, rng),
                                     random_matrix(3, 1, rng)};
    const Matrix joined = hcat(blocks);
    CHECK(joined.rows() == 3);
    CHECK(joined.cols() == 7);
    CHECK(joined(1, 2) == blocks[1](1, 0));
    const auto split = hsplit(joined, {2, 4, 1});
    REQUIRE(split.size() == 3);
    for (std::size_t v = 0; v < 3; ++v) CHECK(split[v] == blocks[v]);
}

TEST_CASE("hcat rejects row-misaligned blocks") {
    CHECK_THROWS_AS(hcat({Matrix(3, 2), Matrix(4, 2)}), shape_error);
}

TEST_CASE("all_finite flags NaN and infinity") {
    Matrix m(2, 2, 1.0);
    CHECK(all_finite(m));
    m(0, 1) = std::numeric_limits<double>::quiet_NaN();
    CHECK_FALSE(all_finite(m));
    m(0, 1) = std::numeric_limits<double>::infinity();
    CHECK_FALSE(all_finite(m));
}

TEST_CASE("rng streams are reproducible per seed") {
    Rng a(42), b(42), c(43);
    bool all_equal = true;
    bool any_differs = false;
    for (int i = 0; i < 100; ++i) {
        const double x = a.uniform();
        all_equal = all_equal && x == b.uniform();
        any_differs = any_differs || x != c.uniform();
        CHECK(x >= 0.0);
        CHECK(x < 1.0);
    }
    CHECK(all_equal);
    CHECK(any_differs);
}

TEST_CASE("rng stream state round-trips through text") {
    Rng a(7);
    for (int i = 0; i < 17; ++i) a.uniform();
    std::stringstream ss;
    ss << a;
    Rng b(0);
    ss >> b;
    for (int i = 0; i < 50; ++i) CHECK(a.next_u64() == b.next_u64());
}

TEST_CASE("rng index stays in range and covers it") {
    Rng rng(3);
    std::vector<int> seen(5, 0);
    for (int i = 0; i < 500; ++i) {
        const auto k = rng.index(5);
        REQUIRE(k < 5);
        ++seen[k];
    }
    for (int count : seen) CHECK(count > 0);
}

TEST_CASE("rng shuffle permutes without loss") {
    Rng rng(9);
    std::vector<int> v(20);
    std::iota(v.begin(), v.end(), 0);
    auto shuffled = v;
    rng.shuffle(shuffled);
    CHECK(shuffled != v);  // 1/20! chance of a false alarm
    std::sort(shuffled.begin(), shuffled.end());
    CHECK(shuffled == v);
}

TEST_CASE("rng normal draws have unit-normal moments") {
    Rng rng(11);
    double sum = 0.0, sum_sq = 0.0;
    const int n = 20000;
    for (int i = 0; i < n; ++i) {
        const double x = rng.normal();
        sum += x;
        sum_sq += x * x;
    }
    CHECK(std::abs(sum / n) < 0.03);
    CHECK(std::abs(sum_sq / n - 1.0) < 0.05);
}

TEST_CASE("xavier_init respects the fan bound and the seed") {
    const auto w = xavier_init(6, 4, 123);
    const double bound = std::sqrt(6.0 / (6 + 4));
    bool any_nonzero = false;
    for (std::size_t i = 0; i < w.size(); ++i) {
        CHECK(std::abs(w.data()[i]) <= bound);
        any_nonzero = any_nonzero || w.data()[i] != 0.0;
    }
    CHECK(any_nonzero);
    CHECK(w == xavier_init(6, 4, 123));
    CHECK_FALSE(w == xavier_init(6, 4, 124));
}

TEST_CASE("dense forward matches hand-worked pre-activations") {
    DenseLayer layer;
    layer.weight = from_rows({{1, 2}, {3, 4}});
    layer.bias = {0.5, -1.0};
    layer.activation = Activation::kRelu;

    const Matrix x = from_rows({{1, 1}, {-1, 0}});
    const Matrix y = forward({layer}, x);
    CHECK(y(0, 0) == 3.5);
    CHECK(y(0, 1) == 6.0);
    CHECK(y(1, 0) == 0.0);  // pre-activation -0.5, clipped
    CHECK(y(1, 1) == 0.0);  // pre-activation -4, clipped

    layer.activation = Activation::kIdentity;
    const Matrix z = forward({layer}, x);
    CHECK(z(1, 0) == -0.5);
    CHECK(z(1, 1) == -4.0);
}

TEST_CASE("backward matches central finite differences") {
    Rng rng(17);
    std::vector<DenseLayer> layers(3);
    layers[0] = {xavier_init(5, 3, rng), std::vector<double>(5, 0.1), Activation::kRelu};
    layers[1] = {xavier_init(4, 5, rng), std::vector<double>(4, -0.1), Activation::kRelu};
    layers[2] = {xavier_init(2, 4, rng), std::vector<double>(2, 0.0), Activation::kIdentity};

    const Matrix x = random_matrix(6, 3, rng);
    const Matrix target = random_matrix(6, 2, rng);

    // Scalar objective: sum of squared errors against a fixed target.
    const auto loss_at = [&](std::span<const double> flat) {
        auto probe = layers;
        set_params(probe, flat);
        const Matrix out = forward(probe, x);
        double loss = 0.0;
        for (std::size_t i = 0; i < out.size(); ++i) {
            const double d = out.data()[i] - target.data()[i];
            loss += d * d;
        }
        return loss;
    };

    std::vector<double> flat(param_count(layers));
    copy_params(layers, flat);
    const auto fd = finite_difference_gradient(loss_at, flat, 1e-6);

    ForwardCache cache;
    const Matrix out = forward(layers, x, &cache);
    Matrix out_grad(out.rows(), out.cols());
    for (std::size_t i = 0; i < out.size(); ++i) {
        out_grad.data()[i] = 2.0 * (out.data()[i] - target.data()[i]);
    }
    const auto back = backward(layers, cache, out_grad);
    std::vector<double> analytic(flat.size(), 0.0);
    copy_grads(back.layers, analytic);

    for (std::size_t i = 0; i < flat.size(); ++i) {
        CHECK(analytic[i] == doctest::Approx(fd[i]).epsilon(1e-5));
    }

    // Gradient w.r.t. the batch itself, same oracle.
    const auto loss_at_input = [&](std::span<const double> flat_x) {
        Matrix probe = x;
        std::copy(flat_x.begin(), flat_x.end(), probe.data());
        const Matrix o = forward(layers, probe);
        double loss = 0.0;
        for (std::size_t i = 0; i < o.size(); ++i) {
            const double d = o.data()[i] - target.data()[i];
            loss += d * d;
        }
        return loss;
    };
    const std::vector<double> flat_x(x.data(), x.data() + x.size());
    const auto fd_x = finite_difference_gradient(loss_at_input, flat_x, 1e-6);
    for (std::size_t i = 0; i < flat_x.size(); ++i) {
        CHECK(back.input.data()[i] == doctest::Approx(fd_x[i]).epsilon(1e-5));
    }
}

TEST_CASE("flat parameter views round-trip") {
    Rng rng(23);
    std::vector<DenseLayer> layers(2);
    layers[0] = {xavier_init(4, 3, rng), {1, 2, 3, 4}, Activation::kRelu};
    layers[1] = {xavier_init(2, 4, rng), {5, 6}, Activation::kIdentity};

    CHECK(param_count(layers) == (4 * 3 + 4) + (2 * 4 + 2));
    std::vector<double> flat(param_count(layers));
    copy_params(layers, flat);
    CHECK(flat[12] == 1.0);  // first bias follows the first weight block

    auto restored = layers;
    for (auto& layer : restored) {
        layer.weight.fill(0.0);
        std::fill(layer.bias.begin(), layer.bias.end(), 0.0);
    }
    set_params(restored, flat);
    CHECK(restored[0].weight == layers[0].weight);
    CHECK(restored[1].bias == layers[1].bias);
}

TEST_CASE("adam matches a scalar reference implementation") {
    // Reference: the textbook update tracked per coordinate.
    const double lr = 0.1, b1 = 0.9, b2 = 0.999, eps = 1e-8;
    std::vector<double> ref{1.0, -2.0};
    double m0 = 0, m1 = 0, v0 = 0, v1 = 0;

    AdamState state(lr);
    std::vector<double> params{1.0, -2.0};

    const std::vector<std::vector<double>> grad_steps{{2.0, -1.0}, {0.5, 0.25}, {-3.0, 1.0}};
    for (std::size_t t = 1; t <= grad_steps.size(); ++t) {
        const auto& g = grad_steps[t - 1];
        m0 = b1 * m0 + (1 - b1) * g[0];
        m1 = b1 * m1 + (1 - b1) * g[1];
        v0 = b2 * v0 + (1 - b2) * g[0] * g[0];
        v1 = b2 * v1 + (1 - b2) * g[1] * g[1];
        const double c1 = 1 - std::pow(b1, static_cast<double>(t));
        const double c2 = 1 - std::pow(b2, static_cast<double>(t));
        ref[0] -= lr * (m0 / c1) / (std::sqrt(v0 / c2) + eps);
        ref[1] -= lr * (m1 / c1) / (std::sqrt(v1 / c2) + eps);

        adam_step(state, params, g);
        CHECK(params[0] == doctest::Approx(ref[0]).epsilon(1e-12));
        CHECK(params[1] == doctest::Approx(ref[1]).epsilon(1e-12));
    }
    CHECK(state.step == 3);
    CHECK(state.first_moment.size() == 2);
}

TEST_CASE("adam with zero gradients leaves parameters untouched") {
    AdamState state(0.05);
    std::vector<double> params{3.0, -4.0};
    const std::vector<double> zeros{0.0, 0.0};
    for (int t = 0; t < 5; ++t) adam_step(state, params, zeros);
    CHECK(params[0] == 3.0);
    CHECK(params[1] == -4.0);
}

TEST_CASE("finite differences recover a known quadratic gradient") {
    const auto f = [](std::span<const double> x) {
        double s = 0.0;
        for (std::size_t i = 0; i < x.size(); ++i) s += double(i + 1) * x[i] * x[i];
        return s;
    };
    const std::vector<double> point{1.0, -2.0, 0.5};
    const auto g = finite_difference_gradient(f, point, 1e-5);
    CHECK(g[0] == doctest::Approx(2.0 * 1 * 1.0).epsilon(1e-8));
    CHECK(g[1] == doctest::Approx(2.0 * 2 * -2.0).epsilon(1e-8));
    CHECK(g[2] == doctest::Approx(2.0 * 3 * 0.5).epsilon(1e-8));
}

TEST_CASE("finite differences reject non-finite objectives") {
    const auto f = [](std::span<const double>) { return std::numeric_limits<double>::quiet_NaN(); };
    const std::vector<double> point{1.0};
    CHECK_THROWS_AS(finite_difference_gradient(f, point, 1e-5), numeric_error);
}
