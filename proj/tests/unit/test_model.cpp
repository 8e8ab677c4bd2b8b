// Copyright (c) 2026 The smartft Authors
// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include <cmath>

#include "smart/error.hpp"
#include "smart/model.hpp"
#include "support.hpp"

using namespace smart;

namespace {

ModelConfig transformer_config() {
    ModelConfig cfg;
    cfg.arch = ArchKind::transformer;
    cfg.classes = 3;
    cfg.vocab_size = 5;
    cfg.embed_dim = 4;
    cfg.heads = 2;
    cfg.layers = 1;
    cfg.ffn_dim = 6;
    cfg.max_len = 4;
    cfg.dropout = 0.0;
    return cfg;
}

ModelParams zeros_like(const ModelParams& p) {
    ModelParams out;
    for (const auto& [name, t] : p) out.emplace(name, Tensor(t.shape()));
    return out;
}

}  // namespace

TEST_CASE("init_params") {
    Model model{ModelConfig{}};
    Rng a(1), b(1);
    const ModelParams p = model.init_params(a);
    CHECK(p == model.init_params(b));
    for (const auto& [name, t] : p) {
        if (name.ends_with(".bias")) CHECK(linf_norm(t) == 0.0);
    }
    ModelConfig wide;
    wide.input_dim = 64;
    wide.hidden = {160};
    Rng rng(3);
    const Tensor w = Model(wide).init_params(rng).at("layer0.weight");
    double var = 0.0;
    for (double v : w.values()) var += v * v;
    var /= static_cast<double>(w.size());
    CHECK(w.size() >= 10000);
    CHECK(std::abs(var * 64.0 - 1.0) < 0.2);
}

TEST_CASE("block names and shapes depend only on the config") {
    const Model model(transformer_config());
    Rng a(1), b(99);
    const ModelParams p = model.init_params(a), q = model.init_params(b);
    require_same_structure(p, q, "test");
    CHECK(p.count("embedding") == 1);
    CHECK(p.at("embedding").shape() == Shape{5, 4});
}

TEST_CASE("raw-vector embedding is the identity") {
    const Model model{ModelConfig{}};
    Rng rng(2);
    const ModelParams p = model.init_params(rng);
    const Tensor x = Tensor::matrix({{0.1, -0.2}, {0.3, 0.4}});
    CHECK(model.embed(p, Inputs{x}) == x);
}

TEST_CASE("token embedding is a table lookup") {
    const Model model(transformer_config());
    Rng rng(2);
    const ModelParams p = model.init_params(rng);
    const Tensor e = model.embed(p, Inputs{TokenBatch{2, {0, 0}}});
    CHECK(e.shape() == Shape{1, 2, 4});
    for (std::size_t k = 0; k < 4; ++k) {
        CHECK(e[k] == p.at("embedding")[k]);
        CHECK(e[4 + k] == p.at("embedding")[k]);
    }
    CHECK_THROWS_AS(model.embed(p, Inputs{TokenBatch{2, {0, 5}}}), InputError);
}

TEST_CASE("zero parameters give the uniform distribution") {
    ModelConfig cfg;
    cfg.classes = 3;
    const Model model(cfg);
    Rng rng(1);
    const ModelParams p = zeros_like(model.init_params(rng));
    const Tensor out = model.forward(p, Inputs{Tensor::matrix({{1, 2}, {-3, 4}})}, DropoutPlan::eval());
    for (double v : out.values()) CHECK(v == doctest::Approx(1.0 / 3.0).epsilon(1e-15));

    const Model t(transformer_config());
    const ModelParams zt = zeros_like(t.init_params(rng));
    const Tensor o = t.forward(zt, Inputs{TokenBatch{3, {1, 2, 3}}}, DropoutPlan::eval());
    for (double v : o.values()) CHECK(v == doctest::Approx(1.0 / 3.0).epsilon(1e-15));
}

TEST_CASE("outputs lie on the simplex and eval is deterministic") {
    Rng rng(5);
    for (const ModelConfig& cfg : {ModelConfig{}, transformer_config()}) {
        const Model model(cfg);
        for (int trial = 0; trial < 10; ++trial) {
            const ModelParams p = model.init_params(rng);
            Inputs in = cfg.arch == ArchKind::mlp ? Inputs{gaussian_tensor(rng, {6, 2}, 3.0)}
                                                  : Inputs{TokenBatch{3, {0, 1, 2, 4, 4, 3, 2, 2, 2}}};
            const Tensor a = model.forward(p, in, DropoutPlan::eval());
            CHECK(a == model.forward(p, in, DropoutPlan::eval()));
            for (std::size_t r = 0; r < a.rows(); ++r) {
                double total = 0.0;
                for (std::size_t k = 0; k < a.cols(); ++k) total += a.at(r, k);
                CHECK(std::abs(total - 1.0) <= 1e-12);
            }
        }
    }
}

TEST_CASE("embed then forward_from_embedding equals the fused forward") {
    Rng rng(6);
    const Model model(transformer_config());
    const ModelParams p = model.init_params(rng);
    const Inputs in = TokenBatch{4, {0, 1, 2, 3, 4, 4, 1, 0}};
    const DropoutPlan plan = DropoutPlan::training(77);
    CHECK(model.forward_from_embedding(p, model.embed(p, in), plan) == model.forward(p, in, plan));
}

TEST_CASE("dropout rate zero in train mode equals eval") {
    Rng rng(6);
    for (const ModelConfig& cfg : {ModelConfig{}, transformer_config()}) {
        ModelConfig c = cfg;
        c.dropout = 0.0;
        const Model model(c);
        const ModelParams p = model.init_params(rng);
        const Inputs in = c.arch == ArchKind::mlp ? Inputs{gaussian_tensor(rng, {5, 2}, 1.0)}
                                                  : Inputs{TokenBatch{2, {1, 2, 3, 4}}};
        CHECK(model.forward(p, in, DropoutPlan::training(3)) == model.forward(p, in, DropoutPlan::eval()));
    }
}

TEST_CASE("dropout zeroes the configured fraction and shares masks per seed") {
    ModelConfig cfg;
    cfg.hidden = {100};
    cfg.dropout = 0.3;
    cfg.activation = Activation::tanh;
    const Model model(cfg);
    ModelParams p;
    p["layer0.weight"] = Tensor({2, 100}, 0.0);
    p["layer0.bias"] = Tensor({1, 100}, 1.0);
    p["head.weight"] = Tensor({100, 2}, 0.0);
    p["head.bias"] = Tensor({1, 2}, 0.0);
    // Probe the masked hidden layer directly through the tape.
    double dropped = 0.0, seen = 0.0;
    for (std::uint64_t trial = 0; trial < 100; ++trial) {
        Tape tape;
        const ParamVars vars = bind_params(tape, p, true);
        const Var x = tape.constant(Tensor({1, 2}));
        const Var out = model.forward_from_embedding(tape, vars, x, DropoutPlan::training(trial));
        const Tensor g = tape.backward(sum(mul(out, tape.constant(Tensor::matrix({{1, 0}}))))).of(vars.at("head.weight"));
        for (std::size_t h = 0; h < 100; ++h) {
            dropped += g.at(h, 0) == 0.0 ? 1.0 : 0.0;
            seen += 1.0;
        }
    }
    CHECK(std::abs(dropped / seen - 0.3) < 0.02);

    Rng rng(1);
    const ModelParams q = model.init_params(rng);
    const Inputs in = Tensor::matrix({{0.5, -0.5}});
    CHECK(model.forward(q, in, DropoutPlan::training(5)) == model.forward(q, in, DropoutPlan::training(5)));
}

TEST_CASE("params_axpy") {
    Rng rng(8);
    const Model model{ModelConfig{}};
    const ModelParams x = model.init_params(rng), y = model.init_params(rng);
    CHECK(params_axpy(1.0, x, 0.0, y) == x);
    CHECK(params_axpy(0.5, x, 0.5, x) == x);
    ModelParams ones, zeros;
    ones["w"] = Tensor({3}, 1.0);
    zeros["w"] = Tensor({3}, 0.0);
    const ModelParams blend = params_axpy(0.01, ones, 0.99, zeros);
    for (double v : blend.at("w").values()) CHECK(v == 0.01);
    ModelParams other;
    other["v"] = Tensor({3});
    CHECK_THROWS_AS(params_axpy(1.0, ones, 1.0, other), ContractViolation);
}

TEST_CASE("config problems are all reported") {
    ModelConfig cfg;
    cfg.classes = 1;
    cfg.dropout = 1.0;
    CHECK(cfg.problems().size() == 2);
    ModelConfig t = transformer_config();
    t.heads = 3;
    CHECK(t.problems().size() == 1);
    CHECK_THROWS_AS(Model{t}, InputError);
}

TEST_CASE("parameter gradients of both architectures match finite differences") {
    Rng rng(31);
    for (const ModelConfig& base : {ModelConfig{}, transformer_config()}) {
        ModelConfig cfg = base;
        cfg.dropout = 0.0;
        cfg.activation = Activation::tanh;
        const Model model(cfg);
        const ModelParams p = model.init_params(rng);
        const Inputs in = cfg.arch == ArchKind::mlp ? Inputs{gaussian_tensor(rng, {3, 2}, 1.0)}
                                                    : Inputs{TokenBatch{3, {0, 1, 2, 4, 3, 1}}};
        const Tensor w = gaussian_tensor(rng, {batch_size(in), cfg.output_dim()}, 1.0);
        auto objective = [&](const ModelParams& q) { return sum(mul(model.forward(q, in, DropoutPlan::eval()), w)); };
        Tape tape;
        const ParamVars vars = bind_params(tape, p, true);
        const Var out = model.forward_from_embedding(tape, vars, model.embed(tape, vars, in), DropoutPlan::eval());
        const Gradients g = tape.backward(sum(mul(out, tape.constant(w))));
        ModelParams analytic;
        for (const auto& [name, v] : vars) analytic.emplace(name, g.of(v));
        const auto report = testing::finite_difference_check(objective, p, analytic);
        INFO("worst ", report.worst, " at ", report.where);
        CHECK(report.violations == 0);
    }
}
