// Copyright (c) 2026 The smartft Authors
// SPDX-License-Identifier: Apache-2.0

#include "smart/adversarial.hpp"

#include <algorithm>
#include <cmath>

#include "smart/error.hpp"

namespace smart {

namespace {

std::size_t example_size(const Tensor& batch) { return batch.size() / batch.shape()[0]; }

}  // namespace

const char* to_string(NormKind kind) { return kind == NormKind::infinity ? "inf" : "2"; }

std::vector<std::string> AdvConfig::problems() const {
    std::vector<std::string> out;
    if (!(epsilon >= 0.0) || !std::isfinite(epsilon)) out.push_back("smart.epsilon: must be >= 0");
    if (!(sigma >= 0.0) || !std::isfinite(sigma)) out.push_back("smart.sigma: must be >= 0");
    if (!(eta > 0.0) || !std::isfinite(eta)) out.push_back("smart.eta: must be > 0");
    return out;
}

std::vector<std::string> AdvConfig::warnings() const {
    std::vector<std::string> out;
    if (sigma > epsilon) out.push_back("smart.sigma exceeds smart.epsilon; noise larger than the ball is clipped");
    return out;
}

Tensor project_ball(const Tensor& x_tilde, const Tensor& x, double epsilon, NormKind norm) {
    if (x_tilde.shape() != x.shape()) {
        throw ContractViolation("project_ball: shape mismatch " + shape_to_string(x_tilde.shape()) + " vs " +
                                shape_to_string(x.shape()));
    }
    Tensor out(x.shape());
    auto src = x_tilde.data();
    auto center = x.data();
    auto dst = out.data();
    if (norm == NormKind::infinity) {
        for (std::size_t i = 0; i < dst.size(); ++i) {
            dst[i] = std::clamp(src[i], center[i] - epsilon, center[i] + epsilon);
        }
        return out;
    }
    double length = 0.0;
    for (std::size_t i = 0; i < dst.size(); ++i) length += (src[i] - center[i]) * (src[i] - center[i]);
    length = std::sqrt(length);
    if (length <= epsilon) return x_tilde;
    const double shrink = epsilon / length;
    for (std::size_t i = 0; i < dst.size(); ++i) dst[i] = center[i] + (src[i] - center[i]) * shrink;
    return out;
}

Tensor project_batch(const Tensor& x_tilde, const Tensor& x, double epsilon, NormKind norm) {
    if (x_tilde.shape() != x.shape()) {
        throw ContractViolation("project_batch: shape mismatch " + shape_to_string(x_tilde.shape()) + " vs " +
                                shape_to_string(x.shape()));
    }
    if (norm == NormKind::infinity) return project_ball(x_tilde, x, epsilon, norm);
    Tensor out(x.shape());
    const std::size_t n = example_size(x);
    for (std::size_t b = 0; b < x.shape()[0]; ++b) {
        auto piece = [&](const Tensor& t) {
            auto s = t.data().subspan(b * n, n);
            return Tensor({n}, std::vector<double>(s.begin(), s.end()));
        };
        const Tensor projected = project_ball(piece(x_tilde), piece(x), epsilon, norm);
        std::copy(projected.data().begin(), projected.data().end(),
                  out.data().begin() + static_cast<std::ptrdiff_t>(b * n));
    }
    return out;
}

Tensor normalized_ascent_direction(const Tensor& grad, NormKind norm) {
    const double length = norm == NormKind::infinity ? linf_norm(grad) : l2_norm(grad);
    if (length == 0.0) return Tensor(grad.shape());
    Tensor out(grad.shape());
    auto src = grad.data();
    auto dst = out.data();
    for (std::size_t i = 0; i < dst.size(); ++i) dst[i] = src[i] / length;
    return out;
}

double max_example_distance(const Tensor& x_tilde, const Tensor& x, NormKind norm) {
    if (x_tilde.shape() != x.shape()) throw ContractViolation("max_example_distance: shape mismatch");
    const std::size_t n = example_size(x);
    double worst = 0.0;
    for (std::size_t b = 0; b < x.shape()[0]; ++b) {
        double dist = 0.0;
        for (std::size_t i = b * n; i < (b + 1) * n; ++i) {
            const double d = std::abs(x_tilde[i] - x[i]);
            dist = norm == NormKind::infinity ? std::max(dist, d) : dist + d * d;
        }
        worst = std::max(worst, norm == NormKind::infinity ? dist : std::sqrt(dist));
    }
    return worst;
}

Tensor find_adversarial(const Model& model, const ModelParams& params, const Tensor& embedded,
                        const Tensor& clean_outputs, const AdvConfig& cfg, Rng& noise_rng,
                        const DropoutPlan& plan, PassCounters* passes) {
    const SmoothLossKind smooth = smooth_loss_for(model.config().task);
    Tensor x_tilde = project_batch(add(embedded, gaussian_tensor(noise_rng, embedded.shape(), cfg.sigma)), embedded,
                                   cfg.epsilon, cfg.norm);
    const std::size_t batch = embedded.shape()[0];
    const std::size_t n = example_size(embedded);
    for (std::size_t step = 0; step < cfg.steps; ++step) {
        Tape tape;
        const ParamVars vars = bind_params(tape, params, false);
        const Var point = tape.leaf(x_tilde);
        const Var out = model.forward_from_embedding(tape, vars, point, plan);
        // Examples are independent, so the gradient of the sum holds each
        // example's own gradient in its slice.
        const Var objective = summed_smooth_loss(smooth, tape.constant(clean_outputs), out);
        const Tensor grad = tape.backward(objective).of(point);
        if (passes) {
            ++passes->forward;
            ++passes->backward;
        }
        Tensor stepped = x_tilde;
        for (std::size_t b = 0; b < batch; ++b) {
            auto g = grad.data().subspan(b * n, n);
            const Tensor direction =
                normalized_ascent_direction(Tensor({n}, std::vector<double>(g.begin(), g.end())), cfg.norm);
            for (std::size_t i = 0; i < n; ++i) stepped[b * n + i] += cfg.eta * direction[i];
        }
        x_tilde = project_batch(stepped, embedded, cfg.epsilon, cfg.norm);
    }
    return x_tilde;
}

Var regularizer_term(const Model& model, Tape& tape, const ParamVars& params, const Var& embedded,
                     const Var& clean_outputs, const Tensor& x_tilde, const DropoutPlan& plan,
                     bool clean_branch_grad, Var* perturbed_input) {
    const Var offset = tape.constant(sub(x_tilde, embedded.value()));
    const Var perturbed = add(embedded, offset);
    if (perturbed_input) *perturbed_input = perturbed;
    const Var adv_outputs = model.forward_from_embedding(tape, params, perturbed, plan);
    const Var clean = clean_branch_grad ? clean_outputs : stop_gradient(clean_outputs);
    return batch_smooth_loss(smooth_loss_for(model.config().task), adv_outputs, clean);
}

RegularizerValue smoothness_regularizer(const Model& model, const ModelParams& params, const Inputs& inputs,
                                        const AdvConfig& cfg, Rng& noise_rng, const DropoutPlan& plan) {
    Tape tape;
    const ParamVars vars = bind_params(tape, params, false);
    const Var embedded = model.embed(tape, vars, inputs);
    const Var clean = model.forward_from_embedding(tape, vars, embedded, plan);
    Tensor x_tilde = find_adversarial(model, params, embedded.value(), clean.value(), cfg, noise_rng, plan);
    const Var value = regularizer_term(model, tape, vars, embedded, clean, x_tilde, plan, true);
    return {value.value().item(), std::move(x_tilde)};
}

}  // namespace smart
