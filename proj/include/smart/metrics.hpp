// Copyright (c) 2026 The smartft Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <vector>

#include "smart/data.hpp"
#include "smart/model.hpp"

namespace smart {

/// Eval-mode outputs for a whole dataset, computed in fixed-size chunks.
Tensor predict(const Model& model, const ModelParams& params, const Dataset& data);

/// Index of the largest entry; ties go to the lowest index.
std::size_t argmax(std::span<const double> row);

/// Fraction of argmax-correct predictions.
double accuracy(const Model& model, const ModelParams& params, const Dataset& data);

/// -(1/n) sum_i sum_j p_j(x_i) log f_j(x_i) against the soft labels.
double agreement_cross_entropy(const Model& model, const ModelParams& params, const Dataset& data);

/// Mean over examples of the largest l_s(f(x_tilde), f(x)) among `samples`
/// uniform draws from the l-inf ball of radius epsilon around the embedded input.
/// The unit draws depend only on the seed, so larger radii scale the same
/// directions outward.
double local_smoothness_probe(const Model& model, const ModelParams& params, const Dataset& data, double epsilon,
                              std::size_t samples, std::uint64_t seed);

struct GridBounds {
    double x0_min = -1.5, x0_max = 2.5;
    double x1_min = -1.0, x1_max = 1.5;

    bool operator==(const GridBounds&) const = default;
};

struct GridRow {
    double x0 = 0.0;
    double x1 = 0.0;
    double p1 = 0.0;
};

/// resolution x resolution lattice over the bounds; x0 varies fastest.
std::vector<GridRow> decision_boundary_grid(const Model& model, const ModelParams& params, const GridBounds& bounds,
                                            std::size_t resolution);

void write_grid_csv(const std::vector<GridRow>& grid, const std::filesystem::path& path);

}  // namespace smart
