// Copyright (c) 2026 The smartft Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "smart/losses.hpp"
#include "smart/model.hpp"

namespace smart {

/// First/second moment estimates with bias correction (Kingma & Ba).
struct AdamState {
    ModelParams m;
    ModelParams v;
    std::uint64_t step = 0;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;

    static AdamState zeros_like(const ModelParams& params);

    bool operator==(const AdamState&) const = default;
};

/// Applies one bias-corrected Adam update in place and advances the step count.
void adam_step(AdamState& state, ModelParams& params, const ModelParams& grads, double lr);

/// Global l2 norm over every block.
double global_norm(const ModelParams& grads);

struct ClipResult {
    ModelParams grads;
    double norm = 0.0;  // before clipping
};

/// Rescales all blocks by max_norm / norm when the global norm exceeds max_norm.
ClipResult clip_gradients(const ModelParams& grads, double max_norm);

/// Linear warmup from 0 to `peak` over warmup_fraction * total_steps, then
/// linear decay to 0 at total_steps:
///   step < w : peak * step / w
///   else     : peak * (total - step) / (total - w)
double lr_at(std::uint64_t step, std::uint64_t total_steps, double peak, double warmup_fraction);

enum class ProxMode { vbpp, mbpp, off };

const char* to_string(ProxMode mode);

struct BetaSchedule {
    double early = 0.99;
    double late = 0.999;
    double switch_fraction = 0.1;

    bool operator==(const BetaSchedule&) const = default;
};

struct ProxConfig {
    double mu = 1.0;
    ProxMode mode = ProxMode::mbpp;
    BetaSchedule beta;

    double effective_mu() const { return mode == ProxMode::off ? 0.0 : mu; }
    std::vector<std::string> problems() const;

    bool operator==(const ProxConfig&) const = default;
};

/// Early value while t <= switch_fraction * T (inclusive), late value afterwards.
double beta_at(std::uint64_t t, std::uint64_t total, const BetaSchedule& schedule);

/// (1 - beta) * current + beta * teacher.
ModelParams teacher_update(const ModelParams& teacher, const ModelParams& current, double beta);

/// Batch mean of l_s(f(x; params), f(x; teacher)) with eval-mode forwards.
double bregman_divergence(const Model& model, const ModelParams& params, const ModelParams& teacher,
                          const Inputs& inputs);

/// Differentiable form: the teacher outputs enter as constants.
Var bregman_term(SmoothLossKind kind, const Var& live_outputs, const Tensor& teacher_outputs);

}  // namespace smart
