// Copyright (c) 2026 The smartft Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <span>
#include <variant>
#include <vector>

#include "smart/autodiff.hpp"
#include "smart/model.hpp"
#include "smart/tensor.hpp"

namespace smart {

/// Lower clamp applied to probabilities before every logarithm.
inline constexpr double kProbabilityFloor = 1e-12;

enum class TaskLossKind { cross_entropy, squared_error };
enum class SmoothLossKind { symmetrized_kl, squared };

TaskLossKind task_loss_for(TaskKind task);
SmoothLossKind smooth_loss_for(TaskKind task);

/// Class indices for classification, real targets for regression.
using Labels = std::variant<std::vector<std::size_t>, std::vector<double>>;

/// D_KL(P || Q) over one distribution each; 0 * log(0 / q) counts as 0.
double kl(std::span<const double> p, std::span<const double> q);
double sym_kl(std::span<const double> p, std::span<const double> q);
double squared_smooth(double p, double q);

/// Loss of one output row against its label.
double task_loss(TaskLossKind kind, std::span<const double> output, const std::variant<std::size_t, double>& label);

/// Batch means over rows of [B x k] outputs.
double batch_task_loss(TaskLossKind kind, const Tensor& outputs, const Labels& labels);
double batch_smooth_loss(SmoothLossKind kind, const Tensor& p, const Tensor& q);
/// l_s per row, in row order.
std::vector<double> per_example_smooth_loss(SmoothLossKind kind, const Tensor& p, const Tensor& q);

Var batch_task_loss(TaskLossKind kind, const Var& outputs, const Labels& labels);
/// Sum over rows of l_s(p_i, q_i); the batch mean is this scaled by 1/B.
Var summed_smooth_loss(SmoothLossKind kind, const Var& p, const Var& q);
Var batch_smooth_loss(SmoothLossKind kind, const Var& p, const Var& q);

}  // namespace smart
