// Copyright (c) 2026 The smartft Authors
// SPDX-License-Identifier: Apache-2.0

#include "smart/losses.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "smart/error.hpp"

namespace smart {

namespace {

constexpr double kSimplexTolerance = 1e-9;

void require_simplex(std::span<const double> p, const char* op) {
    double total = 0.0;
    for (double x : p) {
        if (!(x >= -kSimplexTolerance)) throw ContractViolation(std::string(op) + ": negative probability");
        total += x;
    }
    if (std::abs(total - 1.0) > kSimplexTolerance) {
        throw ContractViolation(std::string(op) + ": row sums to " + std::to_string(total) + ", not 1");
    }
}

double clamp_probability(double x) { return std::clamp(x, kProbabilityFloor, 1.0); }

void require_rows_match(const Tensor& p, const Tensor& q, const char* op) {
    if (p.shape() != q.shape() || p.rank() != 2) {
        throw ContractViolation(std::string(op) + ": shape mismatch " + shape_to_string(p.shape()) + " vs " +
                                shape_to_string(q.shape()));
    }
}

std::size_t label_count(const Labels& labels) {
    return std::visit([](const auto& v) { return v.size(); }, labels);
}

}  // namespace

TaskLossKind task_loss_for(TaskKind task) {
    return task == TaskKind::classification ? TaskLossKind::cross_entropy : TaskLossKind::squared_error;
}

SmoothLossKind smooth_loss_for(TaskKind task) {
    return task == TaskKind::classification ? SmoothLossKind::symmetrized_kl : SmoothLossKind::squared;
}

double kl(std::span<const double> p, std::span<const double> q) {
    if (p.size() != q.size()) throw ContractViolation("kl: distributions of different length");
    require_simplex(p, "kl");
    require_simplex(q, "kl");
    double total = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) {
        if (p[i] <= 0.0) continue;
        const double pc = clamp_probability(p[i]);
        total += pc * (std::log(pc) - std::log(clamp_probability(q[i])));
    }
    return std::max(total, 0.0);
}

double sym_kl(std::span<const double> p, std::span<const double> q) { return kl(p, q) + kl(q, p); }

double squared_smooth(double p, double q) { return (p - q) * (p - q); }

double task_loss(TaskLossKind kind, std::span<const double> output, const std::variant<std::size_t, double>& label) {
    if (kind == TaskLossKind::cross_entropy) {
        const auto* cls = std::get_if<std::size_t>(&label);
        if (!cls) throw InputError("task_loss: cross-entropy needs a class label");
        if (*cls >= output.size()) {
            throw InputError("task_loss: label " + std::to_string(*cls) + " outside " +
                             std::to_string(output.size()) + " classes");
        }
        return -std::log(clamp_probability(output[*cls]));
    }
    const auto* target = std::get_if<double>(&label);
    if (!target) throw InputError("task_loss: squared error needs a real target");
    if (output.size() != 1) throw ContractViolation("task_loss: regression output must be scalar");
    return (output[0] - *target) * (output[0] - *target);
}

// The eager batch losses evaluate the taped graph so both forms agree bitwise.
double batch_task_loss(TaskLossKind kind, const Tensor& outputs, const Labels& labels) {
    Tape tape;
    return batch_task_loss(kind, tape.constant(outputs), labels).value().item();
}

std::vector<double> per_example_smooth_loss(SmoothLossKind kind, const Tensor& p, const Tensor& q) {
    require_rows_match(p, q, "smooth_loss");
    const std::size_t rows = p.rows(), cols = p.cols();
    std::vector<double> out(rows, 0.0);
    for (std::size_t i = 0; i < rows; ++i) {
        double total = 0.0;
        for (std::size_t j = 0; j < cols; ++j) {
            const double a = p.at(i, j), b = q.at(i, j);
            if (kind == SmoothLossKind::squared) {
                total += (a - b) * (a - b);
            } else {
                total += (a - b) * (std::log(clamp_probability(a)) - std::log(clamp_probability(b)));
            }
        }
        out[i] = total;
    }
    return out;
}

double batch_smooth_loss(SmoothLossKind kind, const Tensor& p, const Tensor& q) {
    Tape tape;
    return batch_smooth_loss(kind, tape.constant(p), tape.constant(q)).value().item();
}

Var batch_task_loss(TaskLossKind kind, const Var& outputs, const Labels& labels) {
    const Tensor& out = outputs.value();
    const std::size_t rows = out.rows(), cols = out.cols();
    if (label_count(labels) != rows) throw ContractViolation("batch_task_loss: label count differs from batch size");
    Tape& tape = *outputs.tape();
    const double inv_rows = 1.0 / static_cast<double>(rows);
    if (kind == TaskLossKind::cross_entropy) {
        const auto* classes = std::get_if<std::vector<std::size_t>>(&labels);
        if (!classes) throw InputError("batch_task_loss: cross-entropy needs class labels");
        Tensor one_hot({rows, cols});
        for (std::size_t i = 0; i < rows; ++i) {
            if ((*classes)[i] >= cols) {
                throw InputError("batch_task_loss: label " + std::to_string((*classes)[i]) + " outside " +
                                 std::to_string(cols) + " classes");
            }
            one_hot.at(i, (*classes)[i]) = 1.0;
        }
        return scale(sum(mul(log_clamped(outputs, kProbabilityFloor), tape.constant(std::move(one_hot)))), -inv_rows);
    }
    const auto* targets = std::get_if<std::vector<double>>(&labels);
    if (!targets) throw InputError("batch_task_loss: squared error needs real targets");
    if (cols != 1) throw ContractViolation("batch_task_loss: regression output must be [B x 1]");
    const Var target = tape.constant(Tensor({rows, 1}, *targets));
    return scale(sum(square(sub(outputs, target))), inv_rows);
}

Var summed_smooth_loss(SmoothLossKind kind, const Var& p, const Var& q) {
    require_rows_match(p.value(), q.value(), "smooth_loss");
    if (kind == SmoothLossKind::squared) return sum(square(sub(p, q)));
    // KL(P||Q) + KL(Q||P) = sum (p - q)(log p - log q)
    return sum(mul(sub(p, q), sub(log_clamped(p, kProbabilityFloor), log_clamped(q, kProbabilityFloor))));
}

Var batch_smooth_loss(SmoothLossKind kind, const Var& p, const Var& q) {
    return scale(summed_smooth_loss(kind, p, q), 1.0 / static_cast<double>(p.value().rows()));
}

}  // namespace smart
