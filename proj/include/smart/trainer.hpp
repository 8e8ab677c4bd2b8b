// Copyright (c) 2026 The smartft Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "smart/adversarial.hpp"
#include "smart/data.hpp"
#include "smart/losses.hpp"
#include "smart/model.hpp"
#include "smart/optimizer.hpp"

namespace smart {

enum class Method { smart, vanilla };

const char* to_string(Method method);

struct SmartConfig {
    double lambda_s = 1.0;
    AdvConfig adversarial;
    ProxConfig proximal;
    std::size_t inner_steps = 1;   // S
    std::size_t outer_steps = 100; // T
    std::size_t batch_size = 32;
    double peak_lr = 1e-3;
    double warmup_fraction = 0.1;
    double clip_norm = 1.0;
    std::uint64_t seed = 0;
    /// Let the regularizer's gradient reach theta through f(x; theta) as well as f(x_tilde; theta).
    bool clean_branch_grad = true;

    std::uint64_t total_updates() const { return static_cast<std::uint64_t>(outer_steps) * inner_steps; }
    bool regularizer_active() const { return lambda_s > 0.0; }
    bool bregman_active() const { return proximal.effective_mu() > 0.0; }

    std::vector<std::string> problems() const;
    void validate() const;

    bool operator==(const SmartConfig&) const = default;
};

/// One row per Adam update. Absent terms are left empty rather than zero.
struct TrainRecord {
    std::uint64_t step = 0;
    double lr = 0.0;
    std::optional<double> beta;
    double task_loss = 0.0;
    std::optional<double> reg_loss;
    std::optional<double> breg_loss;
    double total = 0.0;
    double grad_norm = 0.0;

    bool operator==(const TrainRecord&) const = default;
};

struct TrainState {
    ModelParams live;            // theta_bar, advanced in place by the inner loop
    ModelParams outer_snapshot;  // theta_t
    ModelParams teacher;         // theta_tilde_t
    AdamState adam;
    std::uint64_t outer_step = 0;   // completed outer iterations
    std::uint64_t inner_step = 0;   // position inside the current outer iteration
    std::uint64_t global_step = 0;  // completed Adam updates
    /// Root seed; every random stream is derived from it and the step index.
    std::uint64_t seed = 0;
    PassCounters passes;

    bool operator==(const TrainState&) const = default;
};

/// Everything the audit hook sees for one update.
struct PerturbationAudit {
    std::uint64_t global_step = 0;
    const Tensor& clean;
    const Tensor& perturbed;
    double epsilon = 0.0;
    NormKind norm = NormKind::infinity;
};

using AuditHook = std::function<void(const PerturbationAudit&)>;

struct ObjectiveParts {
    Var total;
    Var clean_outputs;
    double task_loss = 0.0;
    std::optional<double> reg_loss;
    std::optional<double> breg_loss;
};

/// L_B + lambda_s * R_s + mu * D_Breg on one tape. Terms with a zero
/// coefficient add no nodes. `x_tilde` fixes the perturbed points; when
/// empty they are searched with find_adversarial using `noise_rng`.
ObjectiveParts iteration_objective(const Model& model, Tape& tape, const ParamVars& params, const Batch& batch,
                                   const SmartConfig& config, Method method, const ModelParams& live,
                                   const ModelParams& teacher, const DropoutPlan& plan, Rng& noise_rng,
                                   PassCounters& passes, const std::optional<Tensor>& x_tilde = std::nullopt,
                                   const AuditHook& audit = {}, std::uint64_t global_step = 0);

/// Drives the outer (T) / inner (S) loop. Vanilla fine-tuning runs the same
/// loop with the regularizer and the proximal term structurally absent.
class Trainer {
public:
    Trainer(Model model, SmartConfig config, Method method, const Dataset& data, const ModelParams& initial);
    /// Continues from a saved state.
    Trainer(Model model, SmartConfig config, Method method, const Dataset& data, TrainState state,
            std::vector<TrainRecord> records);

    void set_audit_hook(AuditHook hook) { audit_ = std::move(hook); }

    bool finished() const { return state_.outer_step >= config_.outer_steps; }
    /// One outer iteration: S Adam updates, then the teacher update.
    void step_outer();
    void run();

    const Model& model() const { return model_; }
    const SmartConfig& config() const { return config_; }
    Method method() const { return method_; }
    const TrainState& state() const { return state_; }
    const std::vector<TrainRecord>& records() const { return records_; }
    /// Parameters after the last completed outer iteration.
    const ModelParams& params() const { return state_.outer_snapshot; }

private:
    void update();
    std::vector<std::size_t> batch_indices(std::uint64_t global_step);

    Model model_;
    SmartConfig config_;
    Method method_;
    const Dataset& data_;
    TrainState state_;
    std::vector<TrainRecord> records_;
    AuditHook audit_;
    std::uint64_t cached_epoch_ = UINT64_MAX;
    std::vector<std::size_t> epoch_order_;
};

struct FinetuneResult {
    ModelParams params;
    std::vector<TrainRecord> records;
    PassCounters passes;
};

FinetuneResult smart_finetune(const Model& model, const SmartConfig& config, const Dataset& data,
                              const ModelParams& initial, const AuditHook& audit = {});
FinetuneResult vanilla_finetune(const Model& model, const SmartConfig& config, const Dataset& data,
                                const ModelParams& initial);

/// Sub-stream ids used with derive_seed(seed, id).
namespace streams {
inline constexpr std::uint64_t init = 0;
inline constexpr std::uint64_t batches = 1;
inline constexpr std::uint64_t dropout = 2;
inline constexpr std::uint64_t noise = 3;
inline constexpr std::uint64_t probe = 4;
}  // namespace streams

/// Initial parameters for a run seed.
ModelParams initial_params(const Model& model, std::uint64_t seed);

void write_records_csv(const std::vector<TrainRecord>& records, const std::filesystem::path& path);

}  // namespace smart
