// Copyright (c) 2026 The smartft Authors
// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include <cmath>

#include "smart/adversarial.hpp"
#include "smart/losses.hpp"
#include "support.hpp"

using namespace smart;

TEST_CASE("project_ball") {
    CHECK(project_ball(Tensor::vector({0.25}), Tensor::vector({0}), 0.1, NormKind::infinity)[0] == 0.1);
    const Tensor inside = Tensor::vector({0.05, -0.02});
    CHECK(project_ball(inside, Tensor::vector({0, 0}), 0.1, NormKind::infinity) == inside);
    CHECK(project_ball(inside, Tensor::vector({0, 0}), 0.1, NormKind::two) == inside);
    const Tensor r = project_ball(Tensor::vector({3, 4}), Tensor::vector({0, 0}), 1.0, NormKind::two);
    CHECK(r[0] == doctest::Approx(0.6).epsilon(1e-15));
    CHECK(r[1] == doctest::Approx(0.8).epsilon(1e-15));
}

TEST_CASE("projection always lands in the ball") {
    Rng rng(4);
    for (int i = 0; i < 500; ++i) {
        const Tensor x = gaussian_tensor(rng, {2, 3}, 1.0);
        const Tensor far = add(x, gaussian_tensor(rng, {2, 3}, 5.0));
        const double eps = rng.uniform(0.0, 1.0);
        CHECK(max_example_distance(project_batch(far, x, eps, NormKind::infinity), x, NormKind::infinity) <= eps + 1e-15);
        CHECK(max_example_distance(project_batch(far, x, eps, NormKind::two), x, NormKind::two) <= eps + 1e-15);
    }
}

TEST_CASE("normalized ascent direction") {
    const Tensor d = normalized_ascent_direction(Tensor::vector({2, -4}), NormKind::infinity);
    CHECK(d == Tensor::vector({0.5, -1}));
    CHECK(normalized_ascent_direction(Tensor({2}), NormKind::infinity) == Tensor({2}));
    CHECK(normalized_ascent_direction(Tensor({2}), NormKind::two) == Tensor({2}));
    Rng rng(6);
    for (int i = 0; i < 100; ++i) {
        const Tensor g = gaussian_tensor(rng, {5}, 1.0);
        const double c = std::exp(rng.uniform(-5.0, 5.0));
        for (NormKind norm : {NormKind::infinity, NormKind::two}) {
            const Tensor a = normalized_ascent_direction(g, norm);
            const Tensor b = normalized_ascent_direction(scale(g, c), norm);
            for (std::size_t k = 0; k < 5; ++k) CHECK(std::abs(a[k] - b[k]) <= 1e-12);
        }
    }
}

TEST_CASE("degenerate balls return the clean point") {
    const Model model(testing::linear_softmax_config());
    Rng rng(2);
    const ModelParams p = testing::random_linear_softmax(rng);
    const Tensor x = Tensor::matrix({{0.3, -0.1}, {1.0, 2.0}});
    const Tensor clean = model.forward(p, x, DropoutPlan::eval());
    AdvConfig zero;
    zero.epsilon = 0.0;
    zero.sigma = 0.0;
    zero.steps = 3;
    CHECK(find_adversarial(model, p, x, clean, zero, rng, DropoutPlan::eval()) == x);
    AdvConfig none;
    none.epsilon = 0.1;
    none.sigma = 0.0;
    none.steps = 0;
    CHECK(find_adversarial(model, p, x, clean, none, rng, DropoutPlan::eval()) == x);

    const RegularizerValue r = smoothness_regularizer(model, p, Inputs{x}, zero, rng);
    CHECK(r.value == 0.0);
}

TEST_CASE("zero radius contributes zero gradient") {
    const Model model(testing::linear_softmax_config());
    Rng rng(2);
    const ModelParams p = testing::random_linear_softmax(rng);
    const Tensor x = Tensor::matrix({{0.3, -0.1}, {1.0, 2.0}});
    Tape tape;
    const ParamVars vars = bind_params(tape, p, true);
    const Var embedded = model.embed(tape, vars, Inputs{x});
    const Var clean = model.forward_from_embedding(tape, vars, embedded, DropoutPlan::eval());
    const Var reg = regularizer_term(model, tape, vars, embedded, clean, x, DropoutPlan::eval(), true);
    CHECK(reg.value().item() == 0.0);
    const Gradients g = tape.backward(reg);
    for (const auto& [name, v] : vars) CHECK(linf_norm(g.of(v)) == 0.0);
}

TEST_CASE("find_adversarial stays in the ball for every step count") {
    ModelConfig cfg;
    cfg.dropout = 0.0;
    const Model model(cfg);
    Rng rng(12);
    for (int trial = 0; trial < 20; ++trial) {
        const ModelParams p = model.init_params(rng);
        const Tensor x = gaussian_tensor(rng, {8, 2}, 1.0);
        const Tensor clean = model.forward(p, x, DropoutPlan::eval());
        for (NormKind norm : {NormKind::infinity, NormKind::two}) {
            AdvConfig adv;
            adv.epsilon = 0.1;
            adv.sigma = 0.5;  // deliberately outside the ball
            adv.eta = 0.3;
            adv.steps = static_cast<std::size_t>(trial % 4);
            adv.norm = norm;
            const Tensor xt = find_adversarial(model, p, x, clean, adv, rng, DropoutPlan::eval());
            CHECK(max_example_distance(xt, x, norm) <= 0.1 + 1e-12);
        }
    }
}

TEST_CASE("one ascent step does not lose ground on the linear-softmax fixture") {
    const Model model(testing::linear_softmax_config());
    Rng rng(44);
    for (int trial = 0; trial < 20; ++trial) {
        const ModelParams p = testing::random_linear_softmax(rng);
        const Tensor x = gaussian_tensor(rng, {1, 2}, 1.0);
        const Tensor clean = model.forward(p, x, DropoutPlan::eval());
        AdvConfig adv;
        adv.epsilon = 0.1;
        adv.sigma = 0.01;
        adv.eta = 0.02;
        adv.steps = 0;
        const std::uint64_t noise_seed = 1000 + trial;
        Rng n0(noise_seed), n1(noise_seed);
        const Tensor start = find_adversarial(model, p, x, clean, adv, n0, DropoutPlan::eval());
        adv.steps = 1;
        const Tensor stepped = find_adversarial(model, p, x, clean, adv, n1, DropoutPlan::eval());
        auto ls = [&](const Tensor& xt) {
            return batch_smooth_loss(SmoothLossKind::symmetrized_kl, model.forward(p, xt, DropoutPlan::eval()), clean);
        };
        CHECK(ls(stepped) >= ls(start));
        CHECK(ls(stepped) <= testing::grid_oracle_max(model, p, x[0], x[1], 0.1) * (1.0 + 1e-9));
    }
}

TEST_CASE("pass counters of the inner loop") {
    const Model model(testing::linear_softmax_config());
    Rng rng(1);
    const ModelParams p = testing::random_linear_softmax(rng);
    const Tensor x = Tensor::matrix({{0.1, 0.2}});
    const Tensor clean = model.forward(p, x, DropoutPlan::eval());
    AdvConfig adv;
    adv.epsilon = 0.1;
    adv.steps = 3;
    PassCounters passes;
    (void)find_adversarial(model, p, x, clean, adv, rng, DropoutPlan::eval(), &passes);
    CHECK(passes.forward == 3);
    CHECK(passes.backward == 3);
}

TEST_CASE("perturbed-branch parameter gradient matches finite differences at fixed x_tilde") {
    ModelConfig cfg;
    cfg.dropout = 0.0;
    cfg.activation = Activation::tanh;
    cfg.hidden = {5};
    const Model model(cfg);
    Rng rng(71);
    for (int trial = 0; trial < 5; ++trial) {
        const ModelParams p = model.init_params(rng);
        const Tensor x = gaussian_tensor(rng, {3, 2}, 1.0);
        const Tensor xt = add(x, uniform_tensor(rng, {3, 2}, -0.1, 0.1));
        for (bool clean_grad : {true, false}) {
            auto value = [&](const ModelParams& q) {
                const Tensor clean = clean_grad ? model.forward(q, x, DropoutPlan::eval())
                                                : model.forward(p, x, DropoutPlan::eval());
                return batch_smooth_loss(SmoothLossKind::symmetrized_kl, model.forward(q, xt, DropoutPlan::eval()),
                                         clean);
            };
            Tape tape;
            const ParamVars vars = bind_params(tape, p, true);
            const Var embedded = model.embed(tape, vars, Inputs{x});
            const Var clean = model.forward_from_embedding(tape, vars, embedded, DropoutPlan::eval());
            const Var reg = regularizer_term(model, tape, vars, embedded, clean, xt, DropoutPlan::eval(), clean_grad);
            CHECK(reg.value().item() == doctest::Approx(value(p)).epsilon(1e-12));
            const Gradients g = tape.backward(reg);
            ModelParams analytic;
            for (const auto& [name, v] : vars) analytic.emplace(name, g.of(v));
            const auto report = testing::finite_difference_check(value, p, analytic);
            INFO("worst ", report.worst, " at ", report.where);
            CHECK(report.violations == 0);
        }
    }
}

TEST_CASE("sigma above epsilon is a warning, not an error") {
    AdvConfig adv;
    adv.sigma = 2 * adv.epsilon;
    CHECK(adv.problems().empty());
    CHECK(adv.warnings().size() == 1);
}
