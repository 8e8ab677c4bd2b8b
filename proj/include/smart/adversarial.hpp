// Copyright (c) 2026 The smartft Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "smart/losses.hpp"
#include "smart/model.hpp"
#include "smart/rng.hpp"
#include "smart/tensor.hpp"

namespace smart {

enum class NormKind { infinity, two };

const char* to_string(NormKind kind);

/// Inner maximization settings: ball radius, init noise, ascent step, step count, norm.
struct AdvConfig {
    double epsilon = 1e-5;
    double sigma = 1e-5;
    double eta = 1e-3;
    std::size_t steps = 1;
    NormKind norm = NormKind::infinity;

    std::vector<std::string> problems() const;
    /// Non-fatal advice, e.g. sigma larger than epsilon.
    std::vector<std::string> warnings() const;

    bool operator==(const AdvConfig&) const = default;
};

/// Model forward/backward tallies; shared by the trainer and the inner loop.
struct PassCounters {
    std::uint64_t forward = 0;
    std::uint64_t backward = 0;

    bool operator==(const PassCounters&) const = default;
};

/// Projects one example onto {z : ||z - x||_p <= epsilon}.
Tensor project_ball(const Tensor& x_tilde, const Tensor& x, double epsilon, NormKind norm);
/// Projects every example (leading dimension) of a batch independently.
Tensor project_batch(const Tensor& x_tilde, const Tensor& x, double epsilon, NormKind norm);

/// grad / ||grad||_p; the zero tensor when the norm vanishes (the step is skipped).
Tensor normalized_ascent_direction(const Tensor& grad, NormKind norm);

/// Largest per-example ||x_tilde - x||_p over a batch.
double max_example_distance(const Tensor& x_tilde, const Tensor& x, NormKind norm);

/// Noisy start plus `cfg.steps` normalized projected-ascent steps on
/// sum_i l_s(f(x_tilde_i), f(x_i)). Parameters are held constant and each
/// example follows its own gradient. `clean_outputs` must come from the same
/// dropout plan.
Tensor find_adversarial(const Model& model, const ModelParams& params, const Tensor& embedded,
                        const Tensor& clean_outputs, const AdvConfig& cfg, Rng& noise_rng,
                        const DropoutPlan& plan, PassCounters* passes = nullptr);

struct RegularizerValue {
    double value = 0.0;
    Tensor adversarial;
};

/// Batch mean of l_s(f(x_tilde), f(x)) at the points found by find_adversarial.
RegularizerValue smoothness_regularizer(const Model& model, const ModelParams& params, const Inputs& inputs,
                                        const AdvConfig& cfg, Rng& noise_rng,
                                        const DropoutPlan& plan = DropoutPlan::eval());

/// Differentiable regularizer on an existing tape: the perturbed branch is
/// embedded + (x_tilde - embedded.value()) with the offset held constant.
/// When `clean_branch_grad` is false the clean outputs are detached.
Var regularizer_term(const Model& model, Tape& tape, const ParamVars& params, const Var& embedded,
                     const Var& clean_outputs, const Tensor& x_tilde, const DropoutPlan& plan,
                     bool clean_branch_grad, Var* perturbed_input = nullptr);

}  // namespace smart
