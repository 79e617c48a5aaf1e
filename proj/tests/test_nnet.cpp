#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>

#include "fex/nnet.hpp"
#include "fex/rng.hpp"
#include "helpers.hpp"

using namespace fex;
using namespace fex::nnet;

namespace {

MlpNetwork identity_net(std::size_t n) {
    MlpNetwork net({n, n}, Activation::Identity);
    for (std::size_t i = 0; i < n; ++i) net.weights()[0][i * n + i] = 1.0;
    return net;
}

LossProbe quadratic_probe() {
    return LossProbe{
        [](std::span<const double> y) {
            double s = 0.0;
            for (double v : y) s += v * v;
            return 0.5 * s;
        },
        [](std::span<const double> y) { return std::vector<double>(y.begin(), y.end()); },
    };
}

LossProbe mixed_probe() {
    return LossProbe{
        [](std::span<const double> y) {
            double s = 0.0;
            for (std::size_t i = 0; i < y.size(); ++i) {
                s += std::sin(static_cast<double>(i + 1)) * y[i] + 0.3 * y[i] * y[i];
            }
            return s;
        },
        [](std::span<const double> y) {
            std::vector<double> g(y.size());
            for (std::size_t i = 0; i < y.size(); ++i) {
                g[i] = std::sin(static_cast<double>(i + 1)) + 0.6 * y[i];
            }
            return g;
        },
    };
}

} // namespace

TEST_CASE("forward: identity network reproduces its input") {
    const MlpNetwork net = identity_net(2);
    CHECK(net.forward(std::vector<double>{1.0, 2.0}) == std::vector<double>{1.0, 2.0});
}

TEST_CASE("forward: zero-weight sigmoid head gives 0.5 everywhere") {
    const MlpNetwork net({3, 4}, Activation::Sigmoid);
    for (double v : net.forward(std::vector<double>{0.3, -2.0, 7.0})) {
        CHECK(v == doctest::Approx(0.5).epsilon(1e-15));
    }
}

TEST_CASE("forward: deterministic across calls") {
    const MlpNetwork net = MlpNetwork::xavier({4, 8, 3}, Activation::Softmax, 99);
    const std::vector<double> x{0.1, -0.4, 0.9, 0.2};
    CHECK(net.forward(x) == net.forward(x));
}

TEST_CASE("forward: softmax head is a probability vector") {
    const MlpNetwork net = MlpNetwork::xavier({5, 6, 4}, Activation::Softmax, 3);
    Rng rng(17);
    for (int t = 0; t < 10; ++t) {
        std::vector<double> x(5);
        for (double& v : x) v = rng.uniform(-2.0, 2.0);
        ProbVector(net.forward(x)).validate();
    }
}

TEST_CASE("forward rejects dimension mismatch") {
    const MlpNetwork net({3, 2}, Activation::Identity);
    CHECK_THROWS_AS(net.forward(std::vector<double>{1.0}), DimensionError);
}

TEST_CASE("network construction rejects zero-width layers") {
    CHECK_THROWS_AS(MlpNetwork({3, 0, 2}, Activation::Identity), ConfigError);
    CHECK_THROWS_AS(MlpNetwork({3}, Activation::Identity), ConfigError);
}

TEST_CASE("backward: linear-layer gradient is u x^T and u") {
    MlpNetwork net({1, 1}, Activation::Identity);
    net.weights()[0][0] = 1.0;
    const GradientBundle g =
        net.backward(std::vector<double>{2.0}, std::vector<double>{3.0});
    CHECK(g.weights[0][0] == doctest::Approx(6.0).epsilon(1e-15));
    CHECK(g.biases[0][0] == doctest::Approx(3.0).epsilon(1e-15));
}

TEST_CASE("backward: zero upstream gives zero gradients") {
    const MlpNetwork net = MlpNetwork::xavier({3, 5, 2}, Activation::Sigmoid, 7);
    const GradientBundle g = net.backward(std::vector<double>{0.2, 0.4, -0.1},
                                          std::vector<double>{0.0, 0.0});
    for (const auto& layer : g.weights)
        for (double v : layer) CHECK(v == 0.0);
    for (const auto& layer : g.biases)
        for (double v : layer) CHECK(v == 0.0);
}

TEST_CASE("backward matches central finite differences on random nets") {
    Rng rng(123);
    for (int trial = 0; trial < 20; ++trial) {
        const std::size_t in = 2 + rng.uniform_index(3);
        const std::size_t hidden = 2 + rng.uniform_index(4);
        const std::size_t out = 1 + rng.uniform_index(3);
        const Activation act = trial % 3 == 0   ? Activation::Identity
                               : trial % 3 == 1 ? Activation::Sigmoid
                                                : Activation::Softmax;
        const std::size_t out_adj = act == Activation::Softmax ? out + 1 : out;
        const MlpNetwork net =
            MlpNetwork::xavier({in, hidden, out_adj}, act, 1000 + trial);
        std::vector<double> x(in);
        for (double& v : x) v = rng.uniform(-1.0, 1.0);
        const double err = finite_diff_check(net, x, mixed_probe());
        CHECK(err <= 1e-4);
    }
}

TEST_CASE("finite_diff_check: identity net with quadratic probe") {
    const MlpNetwork net = identity_net(3);
    const double err =
        finite_diff_check(net, std::vector<double>{0.5, -1.0, 2.0}, quadratic_probe());
    CHECK(err <= 1e-6);
}

TEST_CASE("finite_diff_check: random two-layer net") {
    const MlpNetwork net = MlpNetwork::xavier({4, 6, 3}, Activation::Sigmoid, 42);
    const std::vector<double> x{0.3, -0.6, 0.1, 0.8};
    CHECK(finite_diff_check(net, x, quadratic_probe()) <= 1e-4);
}

TEST_CASE("adam: zero gradient leaves parameters unchanged") {
    MlpNetwork net = MlpNetwork::xavier({2, 3, 1}, Activation::Identity, 5);
    const auto before_w = net.weights();
    AdamState state = AdamState::for_network(net);
    adam_step(net, net.zero_gradients(), state, 0.1);
    CHECK(net.weights() == before_w);
}

TEST_CASE("adam: first step moves each parameter by about lr") {
    MlpNetwork net({2, 2}, Activation::Identity);
    AdamState state = AdamState::for_network(net);
    GradientBundle g = net.zero_gradients();
    g.weights[0] = {0.3, -1.7, 0.002, 5.0};
    g.biases[0] = {-0.04, 2.2};
    adam_step(net, g, state, 0.05);
    for (std::size_t i = 0; i < g.weights[0].size(); ++i) {
        const double moved = net.weights()[0][i];
        CHECK(std::abs(moved) == doctest::Approx(0.05).epsilon(1e-3));
        CHECK(moved * g.weights[0][i] < 0.0); // against the gradient
    }
}

TEST_CASE("adam: minimizes w^2 from w=1 within 200 steps") {
    // scalar problem f(w) = w^2 realized as a 1x1 identity net probed at x=1
    MlpNetwork net({1, 1}, Activation::Identity);
    net.weights()[0][0] = 1.0;
    AdamState state = AdamState::for_network(net);
    for (int step = 0; step < 200; ++step) {
        const double w = net.weights()[0][0];
        GradientBundle g = net.zero_gradients();
        g.weights[0][0] = 2.0 * w;
        adam_step(net, g, state, 0.05);
    }
    CHECK(std::abs(net.weights()[0][0]) < 0.1);
}

TEST_CASE("xavier initialization is seed-deterministic") {
    const MlpNetwork a = MlpNetwork::xavier({3, 5, 2}, Activation::Sigmoid, 77);
    const MlpNetwork b = MlpNetwork::xavier({3, 5, 2}, Activation::Sigmoid, 77);
    const MlpNetwork c = MlpNetwork::xavier({3, 5, 2}, Activation::Sigmoid, 78);
    CHECK(a.weights() == b.weights());
    CHECK(a.weights() != c.weights());
}
