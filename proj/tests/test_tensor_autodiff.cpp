#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <functional>
#include <random>
#include <vector>

#include "uwbrem/graph.hpp"
#include "uwbrem/param_store.hpp"
#include "uwbrem/tensor.hpp"

using uwbrem::nn::Graph;
using uwbrem::nn::NodeId;
using uwbrem::nn::ParamStore;
using uwbrem::nn::Tensor;

namespace {

Tensor random_tensor(std::vector<int> shape, uint64_t seed, double lo = -1.0, double hi = 1.0) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> dist(lo, hi);
    Tensor t(std::move(shape));
    for (int64_t i = 0; i < t.numel(); ++i) t[i] = dist(rng);
    return t;
}

using Builder = std::function<NodeId(Graph&, const std::vector<NodeId>&)>;

// Weighted sum of the op output against fixed coefficients, so every output
// element contributes a distinct gradient path.
Builder weighted(const std::function<NodeId(Graph&, const std::vector<NodeId>&)>& op, uint64_t wseed) {
    return [op, wseed](Graph& g, const std::vector<NodeId>& ins) {
        NodeId out = op(g, ins);
        Tensor w = random_tensor(g.value(out).shape(), wseed);
        return g.sum(g.mul(out, g.constant(std::move(w))));
    };
}

double forward_value(const std::vector<Tensor>& inputs, const Builder& build) {
    Graph g;
    std::vector<NodeId> ids;
    for (const Tensor& t : inputs) ids.push_back(g.variable(t));
    return g.value(build(g, ids))[0];
}

// Central finite differences against backward() over every input element.
double max_rel_error(const std::vector<Tensor>& inputs, const Builder& build, double h = 1e-5) {
    Graph g;
    std::vector<NodeId> ids;
    for (const Tensor& t : inputs) ids.push_back(g.variable(t));
    g.backward(build(g, ids));

    double worst = 0.0;
    for (size_t v = 0; v < inputs.size(); ++v) {
        const Tensor& analytic = g.grad(ids[v]);
        for (int64_t i = 0; i < inputs[v].numel(); ++i) {
            std::vector<Tensor> plus = inputs, minus = inputs;
            plus[v][i] += h;
            minus[v][i] -= h;
            const double numeric = (forward_value(plus, build) - forward_value(minus, build)) / (2 * h);
            const double denom = std::max({std::abs(analytic[i]), std::abs(numeric), 1e-4});
            worst = std::max(worst, std::abs(analytic[i] - numeric) / denom);
        }
    }
    return worst;
}

}  // namespace

TEST_CASE("tensor shape and data invariants") {
    Tensor t({2, 3});
    CHECK(t.numel() == 6);
    CHECK(t.rank() == 2);
    CHECK_THROWS_AS(Tensor({2, 0}), std::invalid_argument);
    CHECK_THROWS_AS(Tensor({2, 2}, {1.0, 2.0, 3.0}), std::invalid_argument);
    t.at2(1, 2) = 5.0;
    CHECK(t[5] == 5.0);
}

TEST_CASE("conv1d output length follows shape arithmetic") {
    Graph g;
    NodeId x = g.constant(random_tensor({1, 1, 8}, 1));
    NodeId k = g.constant(random_tensor({1, 1, 3}, 2));
    CHECK(g.value(g.conv1d(x, k, 1)).shape() == std::vector<int>{1, 1, 6});

    NodeId x2 = g.constant(random_tensor({2, 3, 11}, 3));
    NodeId k2 = g.constant(random_tensor({4, 3, 5}, 4));
    CHECK(g.value(g.conv1d(x2, k2, 2)).shape() == std::vector<int>{2, 4, 4});
}

TEST_CASE("relu clamps negatives") {
    Graph g;
    NodeId x = g.constant(Tensor({2}, {-1.0, 2.0}));
    const Tensor& out = g.value(g.relu(x));
    CHECK(out[0] == 0.0);
    CHECK(out[1] == 2.0);
}

TEST_CASE("softmax of equal logits is uniform") {
    Graph g;
    NodeId x = g.constant(Tensor::full({1, 5}, 0.7));
    const Tensor& s = g.value(g.softmax(x));
    for (int i = 0; i < 5; ++i) CHECK(s[i] == doctest::Approx(0.2).epsilon(1e-12));
}

TEST_CASE("backward of w*w") {
    Graph g;
    NodeId w = g.variable(Tensor::scalar(3.0));
    g.backward(g.mul(w, w));
    CHECK(g.grad(w)[0] == doctest::Approx(6.0));
}

TEST_CASE("gradient of mse against detached target is zero at the target") {
    Graph g;
    Tensor x = random_tensor({4}, 9);
    NodeId a = g.variable(x);
    NodeId b = g.constant(x);
    g.backward(g.mse(a, b));
    for (int i = 0; i < 4; ++i) CHECK(g.grad(a)[i] == 0.0);
}

TEST_CASE("finite differences agree for every op kind") {
    auto var = [](int i) {
        return [i](Graph&, const std::vector<NodeId>& ins) { return ins[static_cast<size_t>(i)]; };
    };
    (void)var;

    SUBCASE("add same shape") {
        CHECK(max_rel_error({random_tensor({2, 3}, 10), random_tensor({2, 3}, 11)},
                            weighted([](Graph& g, auto& in) { return g.add(in[0], in[1]); }, 100)) < 1e-4);
    }
    SUBCASE("add row bias") {
        CHECK(max_rel_error({random_tensor({3, 4}, 12), random_tensor({4}, 13)},
                            weighted([](Graph& g, auto& in) { return g.add(in[0], in[1]); }, 101)) < 1e-4);
    }
    SUBCASE("add channel bias") {
        CHECK(max_rel_error({random_tensor({2, 3, 5}, 14), random_tensor({3}, 15)},
                            weighted([](Graph& g, auto& in) { return g.add(in[0], in[1]); }, 102)) < 1e-4);
    }
    SUBCASE("sub") {
        CHECK(max_rel_error({random_tensor({2, 3}, 16), random_tensor({2, 3}, 17)},
                            weighted([](Graph& g, auto& in) { return g.sub(in[0], in[1]); }, 103)) < 1e-4);
    }
    SUBCASE("mul") {
        CHECK(max_rel_error({random_tensor({2, 3}, 18), random_tensor({2, 3}, 19)},
                            weighted([](Graph& g, auto& in) { return g.mul(in[0], in[1]); }, 104)) < 1e-4);
    }
    SUBCASE("scale") {
        CHECK(max_rel_error({random_tensor({5}, 20)},
                            weighted([](Graph& g, auto& in) { return g.scale(in[0], -2.5); }, 105)) < 1e-4);
    }
    SUBCASE("matmul") {
        CHECK(max_rel_error({random_tensor({3, 4}, 21), random_tensor({4, 2}, 22)},
                            weighted([](Graph& g, auto& in) { return g.matmul(in[0], in[1]); }, 106)) < 1e-4);
    }
    SUBCASE("conv1d stride 1") {
        CHECK(max_rel_error({random_tensor({2, 2, 7}, 23), random_tensor({3, 2, 3}, 24)},
                            weighted([](Graph& g, auto& in) { return g.conv1d(in[0], in[1], 1); }, 107)) < 1e-4);
    }
    SUBCASE("conv1d stride 2") {
        CHECK(max_rel_error({random_tensor({2, 3, 9}, 25), random_tensor({4, 3, 3}, 26)},
                            weighted([](Graph& g, auto& in) { return g.conv1d(in[0], in[1], 2); }, 108)) < 1e-4);
    }
    SUBCASE("relu away from kink") {
        Tensor x = random_tensor({3, 3}, 27);
        for (int64_t i = 0; i < x.numel(); ++i)
            if (std::abs(x[i]) < 0.1) x[i] = 0.5;
        CHECK(max_rel_error({x}, weighted([](Graph& g, auto& in) { return g.relu(in[0]); }, 109)) < 1e-4);
    }
    SUBCASE("softmax") {
        CHECK(max_rel_error({random_tensor({3, 4}, 28)},
                            weighted([](Graph& g, auto& in) { return g.softmax(in[0]); }, 110)) < 1e-4);
    }
    SUBCASE("log") {
        CHECK(max_rel_error({random_tensor({6}, 29, 0.5, 2.0)},
                            weighted([](Graph& g, auto& in) { return g.log(in[0]); }, 111)) < 1e-4);
    }
    SUBCASE("reshape") {
        CHECK(max_rel_error({random_tensor({2, 6}, 30)},
                            weighted([](Graph& g, auto& in) { return g.reshape(in[0], {3, 4}); }, 112)) < 1e-4);
    }
    SUBCASE("slice_cols") {
        CHECK(max_rel_error({random_tensor({3, 6}, 31)},
                            weighted([](Graph& g, auto& in) { return g.slice_cols(in[0], 1, 4); }, 113)) < 1e-4);
    }
    SUBCASE("concat_cols") {
        CHECK(max_rel_error({random_tensor({3, 2}, 32), random_tensor({3, 4}, 33)},
                            weighted([](Graph& g, auto& in) { return g.concat_cols(in[0], in[1]); }, 114)) < 1e-4);
    }
    SUBCASE("slice_len") {
        CHECK(max_rel_error({random_tensor({2, 3, 8}, 34)},
                            weighted([](Graph& g, auto& in) { return g.slice_len(in[0], 2, 7); }, 115)) < 1e-4);
    }
    SUBCASE("upsample1d") {
        CHECK(max_rel_error({random_tensor({2, 2, 5}, 35)},
                            weighted([](Graph& g, auto& in) { return g.upsample1d(in[0], 3); }, 116)) < 1e-4);
    }
    SUBCASE("sum") {
        CHECK(max_rel_error({random_tensor({4, 3}, 36)},
                            [](Graph& g, auto& in) { return g.sum(in[0]); }) < 1e-4);
    }
    SUBCASE("mse") {
        CHECK(max_rel_error({random_tensor({5}, 37), random_tensor({5}, 38)},
                            [](Graph& g, auto& in) { return g.mse(in[0], in[1]); }) < 1e-4);
    }
}

TEST_CASE("backward is linear in the loss combination") {
    const Tensor x = random_tensor({4}, 40);
    const double a = 1.7, b = -0.6;

    auto grad_of = [&](const std::function<NodeId(Graph&, NodeId)>& make) {
        Graph g;
        NodeId v = g.variable(x);
        g.backward(make(g, v));
        return std::vector<double>(g.grad(v).data(), g.grad(v).data() + 4);
    };

    auto f = [](Graph& g, NodeId v) { return g.sum(g.mul(v, v)); };
    auto h = [](Graph& g, NodeId v) { return g.sum(g.relu(v)); };
    const auto gf = grad_of(f);
    const auto gh = grad_of(h);
    const auto gc = grad_of([&](Graph& g, NodeId v) { return g.add(g.scale(f(g, v), a), g.scale(h(g, v), b)); });
    for (int i = 0; i < 4; ++i) CHECK(gc[static_cast<size_t>(i)] ==
                                      doctest::Approx(a * gf[static_cast<size_t>(i)] + b * gh[static_cast<size_t>(i)]).epsilon(1e-12));
}

TEST_CASE("backward requires a scalar loss") {
    Graph g;
    NodeId v = g.variable(random_tensor({3}, 41));
    CHECK_THROWS_AS(g.backward(g.relu(v)), std::invalid_argument);
}

TEST_CASE("non-finite results are rejected as soon as they appear") {
    Graph g;
    NodeId v = g.constant(Tensor({2}, {-1.0, 2.0}));
    CHECK_THROWS_AS(g.log(v), std::runtime_error);
}

TEST_CASE("parameter store rejects duplicates and tracks groups") {
    ParamStore store;
    store.add("a.w", "encoder", Tensor({2, 2}));
    CHECK_THROWS_AS(store.add("a.w", "decoder", Tensor({2, 2})), std::invalid_argument);
    store.add("b.w", "decoder", Tensor({3}));
    CHECK(store.entry("a.w").group == "encoder");
    CHECK(store.total_parameters() == 7);
}

TEST_CASE("unreachable parameters get zero gradient") {
    ParamStore store;
    store.add("used", "g1", Tensor({1}, {2.0}));
    store.add("unused", "g2", Tensor({1}, {5.0}));
    store.grad("unused")[0] = 123.0;  // stale value must be cleared
    Graph g(&store);
    NodeId w = g.param("used");
    g.backward(g.mul(w, w));
    CHECK(store.grad("used")[0] == doctest::Approx(4.0));
    CHECK(store.grad("unused")[0] == 0.0);
}

TEST_CASE("sgd step follows the momentum update rule") {
    SUBCASE("single step, no momentum") {
        ParamStore store;
        store.add("p", "g", Tensor({1}, {1.0}));
        store.grad("p")[0] = 2.0;
        store.sgd_step(0.1, 0.0);
        CHECK(store.value("p")[0] == doctest::Approx(0.8));
        CHECK(store.grad("p")[0] == 0.0);  // zeroed after the step
    }
    SUBCASE("zero gradient is a fixed point") {
        ParamStore store;
        store.add("p", "g", Tensor({1}, {1.25}));
        store.sgd_step(0.1, 0.9);
        CHECK(store.value("p")[0] == 1.25);
    }
    SUBCASE("quadratic bowl contracts to the minimum") {
        // f(p) = p^2, lr 0.1, no momentum: p_k = (1-2*lr)^k, 0.8^100 < 1e-8.
        ParamStore store;
        store.add("p", "g", Tensor({1}, {1.0}));
        for (int i = 0; i < 100; ++i) {
            Graph g(&store);
            NodeId p = g.param("p");
            g.backward(g.mul(p, p));
            store.sgd_step(0.1, 0.0);
        }
        CHECK(std::abs(store.value("p")[0]) < 1e-8);
    }
}

TEST_CASE("identical seeds give bit-identical trajectories") {
    auto run = [] {
        ParamStore store;
        store.add("w", "g", uwbrem::nn::he_uniform({4, 4}, 4, 77));
        std::vector<double> history;
        for (int step = 0; step < 5; ++step) {
            Graph g(&store);
            NodeId w = g.param("w");
            NodeId loss = g.sum(g.mul(w, w));
            g.backward(loss);
            store.sgd_step(0.05, 0.9);
            history.push_back(g.value(loss)[0]);
        }
        for (const auto& e : store.entries())
            for (int64_t i = 0; i < e.value.numel(); ++i) history.push_back(e.value[i]);
        return history;
    };
    CHECK(run() == run());
}
