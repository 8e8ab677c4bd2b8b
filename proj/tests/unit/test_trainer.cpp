// Copyright (c) 2026 The smartft Authors
// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include <cmath>

#include "smart/error.hpp"
#include "smart/metrics.hpp"
#include "smart/trainer.hpp"
#include "support.hpp"

using namespace smart;

namespace {

SmartConfig synthetic_config() {
    SmartConfig c;
    c.lambda_s = 3.0;
    c.adversarial.epsilon = 0.1;
    c.adversarial.sigma = 0.01;
    c.adversarial.eta = 0.02;
    c.outer_steps = 20;
    c.batch_size = 8;
    c.peak_lr = 1e-2;
    return c;
}

ModelConfig small_mlp(double dropout = 0.1) {
    ModelConfig m;
    m.hidden = {6};
    m.dropout = dropout;
    return m;
}

Batch first_batch(const Dataset& d, std::size_t n) {
    std::vector<std::size_t> idx(n);
    for (std::size_t i = 0; i < n; ++i) idx[i] = i;
    return make_batch(d, idx);
}

}  // namespace

TEST_CASE("skipped terms add no tape nodes and leave the task loss bitwise") {
    const Model model(small_mlp());
    const Dataset data = gen_two_moons(10, 0.1, 1);
    const ModelParams p = initial_params(model, 0);
    const Batch batch = first_batch(data, 10);
    SmartConfig cfg = synthetic_config();
    cfg.lambda_s = 0.0;
    cfg.proximal.mu = 0.0;
    auto build = [&](Method method, std::size_t& nodes) {
        Tape tape;
        const ParamVars vars = bind_params(tape, p, true);
        Rng noise(1);
        PassCounters passes;
        const ObjectiveParts parts = iteration_objective(model, tape, vars, batch, cfg, method, p, p,
                                                         DropoutPlan::training(4), noise, passes);
        nodes = tape.size();
        CHECK(!parts.reg_loss);
        CHECK(!parts.breg_loss);
        return parts.total.value().item();
    };
    std::size_t smart_nodes = 0, vanilla_nodes = 0;
    const double s = build(Method::smart, smart_nodes);
    const double v = build(Method::vanilla, vanilla_nodes);
    CHECK(s == v);
    CHECK(smart_nodes == vanilla_nodes);
    CHECK(s == batch_task_loss(TaskLossKind::cross_entropy, model.forward(p, batch.inputs, DropoutPlan::training(4)),
                               batch.labels));
}

TEST_CASE("zero radius collapses the regularizer and a fresh teacher gives zero divergence") {
    const Model model(small_mlp(0.0));
    const Dataset data = gen_two_moons(10, 0.1, 2);
    const ModelParams p = initial_params(model, 3);
    const Batch batch = first_batch(data, 10);
    SmartConfig cfg = synthetic_config();
    cfg.adversarial.epsilon = 0.0;
    cfg.adversarial.sigma = 0.0;
    Tape tape;
    const ParamVars vars = bind_params(tape, p, true);
    Rng noise(1);
    PassCounters passes;
    const ObjectiveParts parts =
        iteration_objective(model, tape, vars, batch, cfg, Method::smart, p, p, DropoutPlan::eval(), noise, passes);
    CHECK(*parts.reg_loss == 0.0);
    CHECK(*parts.breg_loss <= 1e-12);
    CHECK(parts.total.value().item() == doctest::Approx(parts.task_loss).epsilon(1e-12));
}

TEST_CASE("full objective gradient matches finite differences at a fixed perturbation") {
    Rng rng(19);
    for (int trial = 0; trial < 4; ++trial) {
        ModelConfig mc = small_mlp(0.0);
        mc.activation = Activation::tanh;
        const Model model(mc);
        const Dataset data = gen_two_moons(6, 0.2, 10 + trial);
        const ModelParams p = model.init_params(rng);
        const ModelParams teacher = model.init_params(rng);
        const Batch batch = first_batch(data, 6);
        const Tensor x = model.embed(p, batch.inputs);
        const Tensor xt = add(x, uniform_tensor(rng, x.shape(), -0.1, 0.1));
        SmartConfig cfg = synthetic_config();
        cfg.proximal.mu = 2.0;
        auto objective = [&](const ModelParams& q) {
            Tape tape;
            const ParamVars vars = bind_params(tape, q, false);
            Rng noise(0);
            PassCounters passes;
            return iteration_objective(model, tape, vars, batch, cfg, Method::smart, q, teacher, DropoutPlan::eval(),
                                       noise, passes, xt)
                .total.value()
                .item();
        };
        Tape tape;
        const ParamVars vars = bind_params(tape, p, true);
        Rng noise(0);
        PassCounters passes;
        const ObjectiveParts parts = iteration_objective(model, tape, vars, batch, cfg, Method::smart, p, teacher,
                                                         DropoutPlan::eval(), noise, passes, xt);
        const Gradients g = tape.backward(parts.total);
        ModelParams analytic;
        for (const auto& [name, v] : vars) analytic.emplace(name, g.of(v));
        const auto report = testing::finite_difference_check(objective, p, analytic);
        INFO("worst ", report.worst, " at ", report.where);
        CHECK(report.violations == 0);
    }
}

TEST_CASE("smart with both coefficients zero reduces to vanilla bitwise") {
    const Model model(small_mlp());
    const Dataset data = gen_two_moons(20, 0.2, 5);
    SmartConfig cfg = synthetic_config();
    cfg.lambda_s = 0.0;
    cfg.proximal.mu = 0.0;
    const ModelParams init = initial_params(model, cfg.seed);
    const FinetuneResult s = smart_finetune(model, cfg, data, init);
    const FinetuneResult v = vanilla_finetune(model, cfg, data, init);
    CHECK(s.params == v.params);
    CHECK(s.records == v.records);
    CHECK(s.passes == v.passes);
}

TEST_CASE("zero learning rate leaves parameters unchanged") {
    const Model model(small_mlp());
    const Dataset data = gen_two_moons(10, 0.2, 5);
    SmartConfig cfg = synthetic_config();
    cfg.outer_steps = 1;
    const ModelParams init = initial_params(model, 0);
    CHECK(smart_finetune(model, cfg, data, init).params == init);
    cfg.outer_steps = 5;
    cfg.peak_lr = 0.0;
    CHECK(vanilla_finetune(model, cfg, data, init).params == init);
    CHECK(smart_finetune(model, cfg, data, init).params == init);
}

TEST_CASE("vanilla separates two points") {
    ModelConfig mc = small_mlp(0.0);
    const Model model(mc);
    Dataset data;
    data.task = TaskKind::classification;
    data.classes = 2;
    data.examples.push_back({std::vector<double>{-1.0, 0.0}, std::size_t{0}, {}});
    data.examples.push_back({std::vector<double>{1.0, 0.0}, std::size_t{1}, {}});
    SmartConfig cfg = synthetic_config();
    cfg.outer_steps = 200;
    cfg.peak_lr = 0.05;
    const FinetuneResult r = vanilla_finetune(model, cfg, data, initial_params(model, 0));
    CHECK(accuracy(model, r.params, data) == 1.0);
}

TEST_CASE("runs are deterministic") {
    const Model model(small_mlp());
    const Dataset data = gen_two_moons(20, 0.2, 5);
    const SmartConfig cfg = synthetic_config();
    const ModelParams init = initial_params(model, 0);
    const FinetuneResult a = smart_finetune(model, cfg, data, init);
    const FinetuneResult b = smart_finetune(model, cfg, data, init);
    CHECK(a.params == b.params);
    CHECK(a.records == b.records);
}

TEST_CASE("pass counts per update") {
    const Model model(small_mlp());
    const Dataset data = gen_two_moons(20, 0.2, 5);
    SmartConfig cfg = synthetic_config();
    cfg.outer_steps = 7;
    const ModelParams init = initial_params(model, 0);
    const FinetuneResult s = smart_finetune(model, cfg, data, init);
    CHECK(s.passes.forward == 4 * 7);
    CHECK(s.passes.backward == 2 * 7);
    const FinetuneResult v = vanilla_finetune(model, cfg, data, init);
    CHECK(v.passes.forward == 7);
    CHECK(v.passes.backward == 7);
    cfg.adversarial.steps = 3;
    const FinetuneResult deep = smart_finetune(model, cfg, data, init);
    CHECK(deep.passes.forward == (3 + 3) * 7);
    CHECK(deep.passes.backward == (1 + 3) * 7);
}

TEST_CASE("records: one per update, non-negative components, schedule fields") {
    const Model model(small_mlp());
    const Dataset data = gen_two_moons(20, 0.2, 5);
    SmartConfig cfg = synthetic_config();
    cfg.inner_steps = 3;
    cfg.outer_steps = 20;
    const FinetuneResult r = smart_finetune(model, cfg, data, initial_params(model, 0));
    REQUIRE(r.records.size() == 60);
    for (std::size_t i = 0; i < r.records.size(); ++i) {
        const TrainRecord& rec = r.records[i];
        CHECK(rec.step == i + 1);
        CHECK(rec.lr == lr_at(rec.step, 60, cfg.peak_lr, cfg.warmup_fraction));
        CHECK(rec.task_loss >= 0.0);
        CHECK(*rec.reg_loss >= 0.0);
        CHECK(*rec.breg_loss >= 0.0);
        const std::uint64_t t = i / 3 + 1;
        CHECK(*rec.beta == beta_at(t, 20, cfg.proximal.beta));
    }
    CHECK(r.records.back().lr == 0.0);
}

TEST_CASE("teacher follows the moving average once per outer iteration") {
    const Model model(small_mlp());
    const Dataset data = gen_two_moons(20, 0.2, 5);
    SmartConfig cfg = synthetic_config();
    cfg.inner_steps = 2;
    const ModelParams init = initial_params(model, 0);
    Trainer trainer(model, cfg, Method::smart, data, init);
    ModelParams expected = init;
    for (std::uint64_t t = 1; t <= 4; ++t) {
        trainer.step_outer();
        CHECK(trainer.state().global_step == 2 * t);
        CHECK(trainer.params() == trainer.state().live);
        expected = teacher_update(expected, trainer.params(), beta_at(t, cfg.outer_steps, cfg.proximal.beta));
        CHECK(trainer.state().teacher == expected);
    }

    cfg.proximal.mode = ProxMode::vbpp;
    Trainer vb(model, cfg, Method::smart, data, init);
    for (int t = 0; t < 3; ++t) {
        vb.step_outer();
        CHECK(vb.state().teacher == vb.params());
    }
}

TEST_CASE("audit hook sees every perturbation inside the ball") {
    const Model model(small_mlp());
    const Dataset data = gen_two_moons(20, 0.2, 5);
    SmartConfig cfg = synthetic_config();
    cfg.adversarial.sigma = 0.3;
    std::size_t calls = 0;
    double worst = 0.0;
    (void)smart_finetune(model, cfg, data, initial_params(model, 0), [&](const PerturbationAudit& a) {
        ++calls;
        worst = std::max(worst, max_example_distance(a.perturbed, a.clean, a.norm));
    });
    CHECK(calls == cfg.outer_steps);
    CHECK(worst <= cfg.adversarial.epsilon + 1e-12);
    CHECK(worst > 0.0);
}

TEST_CASE("invalid configs are rejected before training") {
    const Model model(small_mlp());
    const Dataset data = gen_two_moons(10, 0.2, 5);
    SmartConfig cfg = synthetic_config();
    cfg.inner_steps = 0;
    cfg.lambda_s = -1.0;
    try {
        (void)smart_finetune(model, cfg, data, initial_params(model, 0));
        FAIL("expected rejection");
    } catch (const InputError& err) {
        const std::string msg = err.what();
        CHECK(msg.find("smart.inner_steps") != std::string::npos);
        CHECK(msg.find("smart.lambda_s") != std::string::npos);
    }
    Dataset empty;
    CHECK_THROWS_AS((void)vanilla_finetune(model, synthetic_config(), empty, initial_params(model, 0)), InputError);
}

TEST_CASE("transformer training runs end to end") {
    ModelConfig mc;
    mc.arch = ArchKind::transformer;
    mc.classes = 4;
    mc.vocab_size = 4;
    mc.embed_dim = 4;
    mc.heads = 2;
    mc.ffn_dim = 8;
    mc.max_len = 5;
    const Model model(mc);
    const Dataset data = gen_token_sequences(12, 4, 5, "majority", 3);
    SmartConfig cfg = synthetic_config();
    cfg.outer_steps = 5;
    cfg.batch_size = 4;
    const FinetuneResult r = smart_finetune(model, cfg, data, initial_params(model, 1));
    CHECK(r.records.size() == 5);
    for (const auto& rec : r.records) CHECK(std::isfinite(rec.total));
}
