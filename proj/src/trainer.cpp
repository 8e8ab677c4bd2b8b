// Copyright (c) 2026 The smartft Authors
// SPDX-License-Identifier: Apache-2.0

#include "smart/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include "smart/error.hpp"
#include "smart/format.hpp"
#include "smart/rng.hpp"

namespace smart {

const char* to_string(Method method) { return method == Method::smart ? "smart" : "vanilla"; }

std::vector<std::string> SmartConfig::problems() const {
    std::vector<std::string> out;
    if (!(lambda_s >= 0.0) || !std::isfinite(lambda_s)) out.push_back("smart.lambda_s: must be >= 0");
    for (auto& p : adversarial.problems()) out.push_back(std::move(p));
    for (auto& p : proximal.problems()) out.push_back(std::move(p));
    if (inner_steps < 1) out.push_back("smart.inner_steps: must be >= 1");
    if (outer_steps < 1) out.push_back("smart.outer_steps: must be >= 1");
    if (batch_size < 1) out.push_back("smart.batch_size: must be >= 1");
    if (!(peak_lr >= 0.0) || !std::isfinite(peak_lr)) out.push_back("smart.lr: must be >= 0");
    if (!(warmup_fraction > 0.0 && warmup_fraction < 1.0)) out.push_back("smart.warmup: must lie in (0, 1)");
    if (!(clip_norm > 0.0)) out.push_back("smart.clip: must be > 0");
    return out;
}

void SmartConfig::validate() const {
    const auto issues = problems();
    if (issues.empty()) return;
    std::string msg = "invalid training config:";
    for (const auto& p : issues) msg += " " + p + ";";
    throw InputError(msg);
}

ModelParams initial_params(const Model& model, std::uint64_t seed) {
    Rng rng(derive_seed(seed, streams::init));
    return model.init_params(rng);
}

ObjectiveParts iteration_objective(const Model& model, Tape& tape, const ParamVars& params, const Batch& batch,
                                   const SmartConfig& config, Method method, const ModelParams& live,
                                   const ModelParams& teacher, const DropoutPlan& plan, Rng& noise_rng,
                                   PassCounters& passes, const std::optional<Tensor>& x_tilde,
                                   const AuditHook& audit, std::uint64_t global_step) {
    const TaskKind task = model.config().task;
    ObjectiveParts parts;
    const Var embedded = model.embed(tape, params, batch.inputs);
    parts.clean_outputs = model.forward_from_embedding(tape, params, embedded, plan);
    ++passes.forward;
    const Var task_loss = batch_task_loss(task_loss_for(task), parts.clean_outputs, batch.labels);
    parts.task_loss = task_loss.value().item();
    parts.total = task_loss;
    if (method == Method::vanilla) return parts;

    if (config.regularizer_active()) {
        const Tensor adversarial =
            x_tilde ? *x_tilde
                    : find_adversarial(model, live, embedded.value(), parts.clean_outputs.value(), config.adversarial,
                                       noise_rng, plan, &passes);
        Var perturbed;
        const Var reg = regularizer_term(model, tape, params, embedded, parts.clean_outputs, adversarial, plan,
                                         config.clean_branch_grad, &perturbed);
        ++passes.forward;
        if (audit) {
            audit(PerturbationAudit{global_step, embedded.value(), perturbed.value(), config.adversarial.epsilon,
                                    config.adversarial.norm});
        }
        parts.reg_loss = reg.value().item();
        parts.total = add(parts.total, scale(reg, config.lambda_s));
    }
    if (config.bregman_active()) {
        const Tensor target = model.forward(teacher, batch.inputs, DropoutPlan::eval());
        ++passes.forward;
        const Var breg = bregman_term(smooth_loss_for(task), parts.clean_outputs, target);
        parts.breg_loss = breg.value().item();
        parts.total = add(parts.total, scale(breg, config.proximal.effective_mu()));
    }
    return parts;
}

namespace {

void check_compatible(const Model& model, const Dataset& data) {
    data.validate();
    const ModelConfig& cfg = model.config();
    if (cfg.task != data.task) throw InputError("training data task does not match the model task");
    if (data.task == TaskKind::classification && data.classes > cfg.classes) {
        throw InputError("training data has " + std::to_string(data.classes) + " classes, the model outputs " +
                         std::to_string(cfg.classes));
    }
    const bool tokens = std::holds_alternative<std::vector<std::size_t>>(data.examples.front().input);
    if (tokens != (cfg.arch == ArchKind::transformer)) {
        throw InputError("training data input kind does not match the model architecture");
    }
}

}  // namespace

Trainer::Trainer(Model model, SmartConfig config, Method method, const Dataset& data, const ModelParams& initial)
    : model_(std::move(model)), config_(std::move(config)), method_(method), data_(data) {
    config_.validate();
    check_compatible(model_, data_);
    state_.live = initial;
    state_.outer_snapshot = initial;
    state_.teacher = initial;
    state_.adam = AdamState::zeros_like(initial);
    state_.seed = config_.seed;
}

Trainer::Trainer(Model model, SmartConfig config, Method method, const Dataset& data, TrainState state,
                 std::vector<TrainRecord> records)
    : model_(std::move(model)),
      config_(std::move(config)),
      method_(method),
      data_(data),
      state_(std::move(state)),
      records_(std::move(records)) {
    config_.validate();
    check_compatible(model_, data_);
    require_same_structure(state_.live, state_.teacher, "Trainer");
    if (state_.seed != config_.seed) throw InputError("Trainer: state seed differs from the config seed");
}

std::vector<std::size_t> Trainer::batch_indices(std::uint64_t global_step) {
    const std::size_t n = data_.size();
    const std::size_t size = std::min(config_.batch_size, n);
    std::vector<std::size_t> out;
    out.reserve(size);
    const std::uint64_t start = (global_step - 1) * size;
    for (std::size_t k = 0; k < size; ++k) {
        const std::uint64_t pos = start + k;
        const std::uint64_t epoch = pos / n;
        if (epoch != cached_epoch_) {
            Rng rng(derive_seed(derive_seed(state_.seed, streams::batches), epoch));
            epoch_order_ = permutation(rng, n);
            cached_epoch_ = epoch;
        }
        out.push_back(epoch_order_[pos % n]);
    }
    return out;
}

void Trainer::update() {
    const std::uint64_t step = state_.global_step + 1;
    const std::uint64_t t = state_.outer_step + 1;
    const auto indices = batch_indices(step);
    const Batch batch = make_batch(data_, indices);
    const DropoutPlan plan = DropoutPlan::training(derive_seed(derive_seed(state_.seed, streams::dropout), step));
    Rng noise_rng(derive_seed(derive_seed(state_.seed, streams::noise), step));

    Tape tape;
    const ParamVars vars = bind_params(tape, state_.live, true);
    const ObjectiveParts parts = iteration_objective(model_, tape, vars, batch, config_, method_, state_.live,
                                                     state_.teacher, plan, noise_rng, state_.passes, std::nullopt,
                                                     audit_, step);
    const Gradients grads = tape.backward(parts.total);
    ++state_.passes.backward;

    ModelParams grad_map;
    for (const auto& [name, var] : vars) grad_map.emplace(name, grads.of(var));
    const ClipResult clipped = clip_gradients(grad_map, config_.clip_norm);
    const double lr = lr_at(step, config_.total_updates(), config_.peak_lr, config_.warmup_fraction);
    adam_step(state_.adam, state_.live, clipped.grads, lr);

    TrainRecord record;
    record.step = step;
    record.lr = lr;
    if (method_ == Method::smart && config_.bregman_active()) {
        record.beta = config_.proximal.mode == ProxMode::vbpp ? 0.0
                                                              : beta_at(t, config_.outer_steps, config_.proximal.beta);
    }
    record.task_loss = parts.task_loss;
    record.reg_loss = parts.reg_loss;
    record.breg_loss = parts.breg_loss;
    record.total = parts.total.value().item();
    record.grad_norm = clipped.norm;
    records_.push_back(record);

    state_.global_step = step;
    ++state_.inner_step;
}

void Trainer::step_outer() {
    if (finished()) throw ContractViolation("Trainer::step_outer: training already finished");
    while (state_.inner_step < config_.inner_steps) update();
    const std::uint64_t t = state_.outer_step + 1;
    state_.outer_snapshot = state_.live;
    if (method_ == Method::smart && config_.bregman_active()) {
        if (config_.proximal.mode == ProxMode::vbpp) {
            state_.teacher = state_.live;
        } else {
            state_.teacher =
                teacher_update(state_.teacher, state_.live, beta_at(t, config_.outer_steps, config_.proximal.beta));
        }
    }
    state_.outer_step = t;
    state_.inner_step = 0;
}

void Trainer::run() {
    while (!finished()) step_outer();
}

FinetuneResult smart_finetune(const Model& model, const SmartConfig& config, const Dataset& data,
                              const ModelParams& initial, const AuditHook& audit) {
    Trainer trainer(model, config, Method::smart, data, initial);
    trainer.set_audit_hook(audit);
    trainer.run();
    return {trainer.params(), trainer.records(), trainer.state().passes};
}

FinetuneResult vanilla_finetune(const Model& model, const SmartConfig& config, const Dataset& data,
                                const ModelParams& initial) {
    Trainer trainer(model, config, Method::vanilla, data, initial);
    trainer.run();
    return {trainer.params(), trainer.records(), trainer.state().passes};
}

void write_records_csv(const std::vector<TrainRecord>& records, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw InputError("write_records_csv: cannot open " + path.string());
    auto optional = [](const std::optional<double>& v) { return v ? format_double(*v) : std::string(); };
    out << "step,lr,beta,task_loss,reg_loss,breg_loss,total,grad_norm\n";
    for (const auto& r : records) {
        out << r.step << ',' << format_double(r.lr) << ',' << optional(r.beta) << ',' << format_double(r.task_loss)
            << ',' << optional(r.reg_loss) << ',' << optional(r.breg_loss) << ',' << format_double(r.total) << ','
            << format_double(r.grad_norm) << '\n';
    }
    if (!out) throw InputError("write_records_csv: failed writing " + path.string());
}

}  // namespace smart
