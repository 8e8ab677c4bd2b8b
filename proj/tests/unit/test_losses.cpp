// Copyright (c) 2026 The smartft Authors
// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include <cmath>
#include <vector>

#include "smart/error.hpp"
#include "smart/losses.hpp"
#include "smart/rng.hpp"

using namespace smart;

namespace {

std::vector<double> random_simplex(Rng& rng, std::size_t k) {
    std::vector<double> p(k);
    double total = 0.0;
    for (auto& v : p) total += (v = rng.uniform() + 1e-3);
    for (auto& v : p) v /= total;
    return p;
}

using V = std::vector<double>;

}  // namespace

TEST_CASE("kl fixtures") {
    CHECK(kl(V{0.3, 0.7}, V{0.3, 0.7}) == 0.0);
    CHECK(std::abs(kl(V{1, 0}, V{0.5, 0.5}) - 0.6931471805599453) <= 1e-12);
    CHECK(std::abs(kl(V{0.5, 0.5}, V{0.9, 0.1}) - 0.5108256237659907) <= 1e-12);
    CHECK(std::abs(kl(V{0.9, 0.1}, V{0.5, 0.5}) - 0.3680642071684971) <= 1e-12);
    CHECK_THROWS_AS(kl(V{0.5, 0.6}, V{0.5, 0.5}), ContractViolation);
    CHECK_THROWS_AS(kl(V{0.5, 0.5}, V{1.0}), ContractViolation);
}

TEST_CASE("sym_kl fixtures and properties") {
    CHECK(sym_kl(V{0.2, 0.8}, V{0.2, 0.8}) == 0.0);
    CHECK(std::abs(sym_kl(V{0.5, 0.5}, V{0.9, 0.1}) - 0.8788898309344878) <= 1e-6);
    Rng rng(5);
    for (int i = 0; i < 200; ++i) {
        const auto p = random_simplex(rng, 4), q = random_simplex(rng, 4);
        CHECK(sym_kl(p, q) == doctest::Approx(sym_kl(q, p)).epsilon(1e-14));
        CHECK(sym_kl(p, q) >= 0.0);
        auto near = p;
        near[0] += 1e-12;
        near[1] -= 1e-12;
        CHECK(sym_kl(p, near) <= 1e-9);
    }
}

TEST_CASE("squared_smooth") {
    CHECK(squared_smooth(3, 3) == 0.0);
    CHECK(squared_smooth(2, 0) == 4.0);
    CHECK(squared_smooth(-1, 1) == 4.0);
}

TEST_CASE("task losses") {
    CHECK(std::abs(task_loss(TaskLossKind::cross_entropy, V{0.25, 0.25, 0.25, 0.25}, std::size_t{2}) -
                   1.3862943611198906) <= 1e-12);
    CHECK(task_loss(TaskLossKind::cross_entropy, V{1, 0, 0}, std::size_t{0}) == 0.0);
    CHECK(task_loss(TaskLossKind::cross_entropy, V{0, 1}, std::size_t{0}) == doctest::Approx(-std::log(1e-12)));
    CHECK(task_loss(TaskLossKind::squared_error, V{0.5}, 0.5) == 0.0);
    CHECK_THROWS_AS(task_loss(TaskLossKind::cross_entropy, V{0.5, 0.5}, std::size_t{2}), InputError);
    const Tensor out = Tensor::matrix({{0.5, 0.5}, {0.25, 0.75}});
    const double mean = batch_task_loss(TaskLossKind::cross_entropy, out, Labels{std::vector<std::size_t>{0, 1}});
    CHECK(mean == doctest::Approx(0.5 * (std::log(2.0) - std::log(0.75))).epsilon(1e-14));
}

TEST_CASE("taped losses agree with the eager forms") {
    Rng rng(3);
    const Tensor p = Tensor::matrix({{0.5, 0.5}, {0.1, 0.9}});
    const Tensor q = Tensor::matrix({{0.9, 0.1}, {0.2, 0.8}});
    Tape tape;
    const Var vp = tape.leaf(p), vq = tape.leaf(q);
    CHECK(batch_smooth_loss(SmoothLossKind::symmetrized_kl, vp, vq).value().item() ==
          doctest::Approx(batch_smooth_loss(SmoothLossKind::symmetrized_kl, p, q)).epsilon(1e-14));
    const auto per = per_example_smooth_loss(SmoothLossKind::symmetrized_kl, p, q);
    CHECK(per[0] == doctest::Approx(0.8788898309344878).epsilon(1e-12));
}

TEST_CASE("sym_kl gradient through softmax matches finite differences") {
    Rng rng(17);
    for (int trial = 0; trial < 10; ++trial) {
        const Tensor a = gaussian_tensor(rng, {2, 3}, 1.5);
        const Tensor b = gaussian_tensor(rng, {2, 3}, 1.5);
        auto value = [&](const Tensor& x) {
            return batch_smooth_loss(SmoothLossKind::symmetrized_kl, softmax_rows(x), softmax_rows(b));
        };
        Tape tape;
        const Var x = tape.leaf(a);
        const Var loss = batch_smooth_loss(SmoothLossKind::symmetrized_kl, softmax_rows(x),
                                           softmax_rows(tape.constant(b)));
        const Tensor g = tape.backward(loss).of(x);
        Tensor probe = a;
        for (std::size_t i = 0; i < a.size(); ++i) {
            const double saved = probe[i];
            probe[i] = saved + 1e-5;
            const double up = value(probe);
            probe[i] = saved - 1e-5;
            const double down = value(probe);
            probe[i] = saved;
            const double numeric = (up - down) / 2e-5;
            const double diff = std::abs(numeric - g[i]);
            CHECK((diff <= 1e-8 || diff <= 1e-4 * std::max(std::abs(numeric), std::abs(g[i]))));
        }
    }
}
