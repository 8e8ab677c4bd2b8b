// Copyright (c) 2026 The smartft Authors
// SPDX-License-Identifier: Apache-2.0

#include "smart/optimizer.hpp"

#include <cmath>

#include "smart/error.hpp"

namespace smart {

AdamState AdamState::zeros_like(const ModelParams& params) {
    AdamState state;
    for (const auto& [name, value] : params) {
        state.m.emplace(name, Tensor(value.shape()));
        state.v.emplace(name, Tensor(value.shape()));
    }
    return state;
}

void adam_step(AdamState& state, ModelParams& params, const ModelParams& grads, double lr) {
    require_same_structure(params, grads, "adam_step");
    require_same_structure(params, state.m, "adam_step");
    require_same_structure(params, state.v, "adam_step");
    ++state.step;
    const double t = static_cast<double>(state.step);
    const double correction1 = 1.0 - std::pow(state.beta1, t);
    const double correction2 = 1.0 - std::pow(state.beta2, t);
    for (auto& [name, value] : params) {
        auto theta = value.data();
        auto g = grads.at(name).data();
        auto m = state.m.at(name).data();
        auto v = state.v.at(name).data();
        for (std::size_t i = 0; i < theta.size(); ++i) {
            m[i] = state.beta1 * m[i] + (1.0 - state.beta1) * g[i];
            v[i] = state.beta2 * v[i] + (1.0 - state.beta2) * g[i] * g[i];
            const double m_hat = m[i] / correction1;
            const double v_hat = v[i] / correction2;
            theta[i] -= lr * m_hat / (std::sqrt(v_hat) + state.eps);
        }
    }
}

double global_norm(const ModelParams& grads) {
    double total = 0.0;
    for (const auto& [name, g] : grads)
        for (double x : g.data()) total += x * x;
    return std::sqrt(total);
}

ClipResult clip_gradients(const ModelParams& grads, double max_norm) {
    if (!(max_norm > 0.0)) throw ContractViolation("clip_gradients: max_norm must be > 0");
    ClipResult result{grads, global_norm(grads)};
    if (result.norm > max_norm) {
        const double factor = max_norm / result.norm;
        for (auto& [name, g] : result.grads)
            for (double& x : g.data()) x *= factor;
    }
    return result;
}

double lr_at(std::uint64_t step, std::uint64_t total_steps, double peak, double warmup_fraction) {
    if (step > total_steps) throw ContractViolation("lr_at: step beyond total_steps");
    if (!(warmup_fraction > 0.0 && warmup_fraction < 1.0)) {
        throw ContractViolation("lr_at: warmup_fraction must lie in (0, 1)");
    }
    const double s = static_cast<double>(step);
    const double total = static_cast<double>(total_steps);
    const double warmup = warmup_fraction * total;
    if (s < warmup) return peak * s / warmup;
    return peak * (total - s) / (total - warmup);
}

const char* to_string(ProxMode mode) {
    switch (mode) {
        case ProxMode::vbpp: return "vbpp";
        case ProxMode::mbpp: return "mbpp";
        case ProxMode::off: return "off";
    }
    return "off";
}

std::vector<std::string> ProxConfig::problems() const {
    std::vector<std::string> out;
    if (!(mu >= 0.0) || !std::isfinite(mu)) out.push_back("smart.mu: must be >= 0");
    if (!(beta.early >= 0.0 && beta.early < 1.0)) out.push_back("smart.beta_early: must lie in [0, 1)");
    if (!(beta.late >= 0.0 && beta.late < 1.0)) out.push_back("smart.beta_late: must lie in [0, 1)");
    if (!(beta.switch_fraction >= 0.0 && beta.switch_fraction <= 1.0)) {
        out.push_back("smart.beta_switch: must lie in [0, 1]");
    }
    return out;
}

double beta_at(std::uint64_t t, std::uint64_t total, const BetaSchedule& schedule) {
    if (t < 1 || t > total) throw ContractViolation("beta_at: t must lie in [1, T]");
    return static_cast<double>(t) <= schedule.switch_fraction * static_cast<double>(total) ? schedule.early
                                                                                            : schedule.late;
}

ModelParams teacher_update(const ModelParams& teacher, const ModelParams& current, double beta) {
    if (!(beta >= 0.0 && beta < 1.0)) throw ContractViolation("teacher_update: beta must lie in [0, 1)");
    return params_axpy(1.0 - beta, current, beta, teacher);
}

double bregman_divergence(const Model& model, const ModelParams& params, const ModelParams& teacher,
                          const Inputs& inputs) {
    const Tensor live = model.forward(params, inputs, DropoutPlan::eval());
    const Tensor target = model.forward(teacher, inputs, DropoutPlan::eval());
    return batch_smooth_loss(smooth_loss_for(model.config().task), live, target);
}

Var bregman_term(SmoothLossKind kind, const Var& live_outputs, const Tensor& teacher_outputs) {
    return batch_smooth_loss(kind, live_outputs, live_outputs.tape()->constant(teacher_outputs));
}

}  // namespace smart
