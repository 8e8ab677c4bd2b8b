// Copyright (c) 2026 The smartft Authors
// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include <cmath>
#include <functional>

#include "smart/autodiff.hpp"
#include "smart/error.hpp"
#include "smart/losses.hpp"
#include "smart/rng.hpp"

using namespace smart;

namespace {

/// Central differences of a scalar function of one tensor.
Tensor numeric_grad(const std::function<double(const Tensor&)>& f, Tensor x, double h = 1e-5) {
    Tensor g(x.shape());
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double saved = x[i];
        x[i] = saved + h;
        const double up = f(x);
        x[i] = saved - h;
        const double down = f(x);
        x[i] = saved;
        g[i] = (up - down) / (2.0 * h);
    }
    return g;
}

void check_close(const Tensor& a, const Tensor& b, double rel = 1e-4, double floor = 1e-8) {
    REQUIRE(a.shape() == b.shape());
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double diff = std::abs(a[i] - b[i]);
        CHECK((diff <= floor || diff <= rel * std::max(std::abs(a[i]), std::abs(b[i]))));
    }
}

using UnaryGraph = std::function<Var(const Var&)>;

void check_unary(const UnaryGraph& graph, const Tensor& x0) {
    Tape tape;
    const Var x = tape.leaf(x0);
    const Gradients g = tape.backward(graph(x));
    const Tensor numeric = numeric_grad(
        [&](const Tensor& v) {
            Tape t;
            return graph(t.constant(v)).value().item();
        },
        x0);
    check_close(g.of(x), numeric);
}

}  // namespace

TEST_CASE("recorded values match eager results") {
    Tape tape;
    const Var x = tape.leaf(Tensor::scalar(1));
    const Var y = tape.leaf(Tensor::scalar(2));
    CHECK(add(x, y).value().item() == 3.0);
    const Var z = tape.leaf(Tensor::scalar(3));
    CHECK(mul(z, z).value().item() == 9.0);
    Rng rng(1);
    const Tensor logits = gaussian_tensor(rng, {4, 3}, 2.0);
    CHECK(softmax_rows(tape.leaf(logits)).value() == softmax_rows(logits));
}

TEST_CASE("simple derivatives") {
    Tape tape;
    const Var x = tape.leaf(Tensor::scalar(3));
    const Var c = tape.leaf(Tensor::scalar(5));
    const Gradients g = tape.backward(sum(mul(x, x)));
    CHECK(g.of(x).item() == 6.0);
    CHECK(g.of(c).item() == 0.0);
}

TEST_CASE("backward needs a scalar output") {
    Tape tape;
    const Var x = tape.leaf(Tensor::vector({1, 2}));
    CHECK_THROWS_AS(tape.backward(x), ContractViolation);
}

TEST_CASE("cross-tape operands are rejected") {
    Tape a, b;
    const Var x = a.leaf(Tensor::scalar(1));
    const Var y = b.leaf(Tensor::scalar(1));
    CHECK_THROWS_AS(add(x, y), ContractViolation);
}

TEST_CASE("stop_gradient freezes one factor") {
    Tape tape;
    const Var x = tape.leaf(Tensor::scalar(3));
    const Var frozen = stop_gradient(x);
    CHECK(frozen.value() == x.value());
    const Gradients g = tape.backward(sum(mul(x, frozen)));
    CHECK(g.of(x).item() == 3.0);

    Tape t2;
    const Var y = t2.leaf(Tensor::scalar(2));
    const Gradients g2 = t2.backward(sum(stop_gradient(y)));
    CHECK(g2.of(y).item() == 0.0);
}

TEST_CASE("softmax cross-entropy gradient is softmax minus one-hot") {
    Rng rng(7);
    for (int trial = 0; trial < 20; ++trial) {
        const Tensor logits = gaussian_tensor(rng, {1, 5}, 2.0);
        const std::size_t label = rng.below(5);
        Tape tape;
        const Var z = tape.leaf(logits);
        const Var loss = batch_task_loss(TaskLossKind::cross_entropy, softmax_rows(z), Labels{std::vector{label}});
        const Tensor g = tape.backward(loss).of(z);
        const Tensor p = softmax_rows(logits);
        for (std::size_t k = 0; k < 5; ++k) {
            CHECK(std::abs(g[k] - (p[k] - (k == label ? 1.0 : 0.0))) <= 1e-10);
        }
    }
}

TEST_CASE("every primitive matches finite differences") {
    Rng rng(13);
    const Tensor a = gaussian_tensor(rng, {3, 4}, 1.0);
    const Tensor b = gaussian_tensor(rng, {4, 2}, 1.0);
    const Tensor row = gaussian_tensor(rng, {1, 4}, 1.0);
    const Tensor w = gaussian_tensor(rng, {3, 4}, 1.0);

    auto weighted = [&](const Var& v, const Tensor& weights) {
        return sum(mul(v, v.tape()->constant(weights)));
    };
    check_unary([&](const Var& x) { return weighted(tanh(x), w); }, a);
    check_unary([&](const Var& x) { return weighted(relu(x), w); }, add(a, Tensor(a.shape(), 0.05)));
    check_unary([&](const Var& x) { return weighted(square(x), w); }, a);
    check_unary([&](const Var& x) { return sum(matmul(x, x.tape()->constant(b))); }, a);
    check_unary([&](const Var& x) { return sum(matmul(x.tape()->constant(a), x)); }, b);
    check_unary([&](const Var& x) { return weighted(add_row(x.tape()->constant(a), x), w); }, row);
    check_unary([&](const Var& x) { return weighted(mul_row(x.tape()->constant(a), x), w); }, row);
    check_unary([&](const Var& x) { return weighted(softmax_rows(x), w); }, a);
    check_unary([&](const Var& x) { return weighted(layer_norm_rows(x, 1e-5), w); }, a);
    check_unary([&](const Var& x) { return sum(mul(mean_rows(x), x.tape()->constant(row))); }, a);
    check_unary([&](const Var& x) { return weighted(transpose(transpose(x)), w); }, a);
    check_unary([&](const Var& x) { return sum(square(slice_cols(x, 1, 2))); }, a);
    check_unary([&](const Var& x) { return weighted(log_clamped(softmax_rows(x), 1e-12), w); }, a);
    check_unary(
        [&](const Var& x) {
            const Var parts[] = {slice_cols(x, 2, 2), slice_cols(x, 0, 2)};
            return weighted(concat_cols(parts), w);
        },
        a);
    check_unary(
        [&](const Var& x) {
            const std::size_t ids[] = {2, 0, 2};
            return weighted(gather_rows(x, ids), w);
        },
        a);
    check_unary([&](const Var& x) { return sum(square(slice_example(reshape(x, {3, 2, 2}), 1))); }, a);
}

TEST_CASE("backward is linear in the output") {
    Rng rng(21);
    const Tensor x0 = gaussian_tensor(rng, {2, 3}, 1.0);
    auto grad_of = [&](double alpha, double beta) {
        Tape tape;
        const Var x = tape.leaf(x0);
        const Var f = sum(tanh(x));
        const Var g = sum(square(softmax_rows(x)));
        return tape.backward(add(scale(f, alpha), scale(g, beta))).of(x);
    };
    const Tensor f = grad_of(1, 0), g = grad_of(0, 1), combo = grad_of(2.5, -0.75);
    for (std::size_t i = 0; i < x0.size(); ++i) {
        CHECK(std::abs(combo[i] - (2.5 * f[i] - 0.75 * g[i])) <= 1e-10);
    }
}

TEST_CASE("identical tapes give bitwise identical gradients") {
    Rng rng(8);
    const Tensor x0 = gaussian_tensor(rng, {4, 4}, 1.0);
    auto run = [&] {
        Tape tape;
        const Var x = tape.leaf(x0);
        return tape.backward(sum(layer_norm_rows(tanh(matmul(x, x)), 1e-5))).of(x);
    };
    CHECK(run() == run());
}
