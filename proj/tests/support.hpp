// Copyright (c) 2026 The smartft Authors
// SPDX-License-Identifier: Apache-2.0

// Shared fixtures and brute-force oracles for the test binaries.

#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <string>

#include "smart/losses.hpp"
#include "smart/model.hpp"
#include "smart/rng.hpp"

namespace smart::testing {

/// Largest |a - n| / max(|a|, |n|, floor) over every entry of every block,
/// with n a central difference of `objective` at step h.
struct FdReport {
    double worst = 0.0;
    std::string where;
    std::size_t checked = 0;
    std::size_t violations = 0;
};

inline bool fd_close(double analytic, double numeric, double rel, double abs_floor) {
    const double diff = std::abs(analytic - numeric);
    return diff <= abs_floor || diff <= rel * std::max(std::abs(analytic), std::abs(numeric));
}

inline FdReport finite_difference_check(const std::function<double(const ModelParams&)>& objective,
                                        const ModelParams& at, const ModelParams& analytic, double h = 1e-5,
                                        double rel = 1e-4, double abs_floor = 1e-8) {
    FdReport report;
    ModelParams probe = at;
    for (auto& [name, block] : probe) {
        const Tensor& grad = analytic.at(name);
        for (std::size_t i = 0; i < block.size(); ++i) {
            const double saved = block[i];
            block[i] = saved + h;
            const double up = objective(probe);
            block[i] = saved - h;
            const double down = objective(probe);
            block[i] = saved;
            const double numeric = (up - down) / (2.0 * h);
            const double diff = std::abs(grad[i] - numeric);
            const double scale = std::max({std::abs(grad[i]), std::abs(numeric), abs_floor / rel});
            const double err = diff / scale;
            ++report.checked;
            if (!fd_close(grad[i], numeric, rel, abs_floor)) ++report.violations;
            if (err > report.worst) {
                report.worst = err;
                report.where = name + "[" + std::to_string(i) + "]";
            }
        }
    }
    return report;
}

/// Two-input linear softmax classifier: softmax(x W + b).
inline ModelConfig linear_softmax_config(std::size_t classes = 2) {
    ModelConfig cfg;
    cfg.task = TaskKind::classification;
    cfg.classes = classes;
    cfg.arch = ArchKind::mlp;
    cfg.input_dim = 2;
    cfg.hidden = {};
    cfg.dropout = 0.0;
    return cfg;
}

inline ModelParams random_linear_softmax(Rng& rng, std::size_t classes = 2, double weight_scale = 3.0) {
    ModelParams p;
    p["head.weight"] = gaussian_tensor(rng, {2, classes}, weight_scale);
    p["head.bias"] = gaussian_tensor(rng, {1, classes}, 1.0);
    return p;
}

/// Maximum of l_s(f(x + d), f(x)) over a (n x n) lattice of the l-inf ball of radius epsilon.
inline double grid_oracle_max(const Model& model, const ModelParams& params, double x0, double x1, double epsilon,
                              std::size_t n = 201) {
    const Tensor clean = model.forward(params, Tensor::matrix({{x0, x1}}), DropoutPlan::eval());
    Tensor lattice({n * n, 2});
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            const double a = -epsilon + 2.0 * epsilon * static_cast<double>(i) / static_cast<double>(n - 1);
            const double b = -epsilon + 2.0 * epsilon * static_cast<double>(j) / static_cast<double>(n - 1);
            lattice.at(i * n + j, 0) = x0 + a;
            lattice.at(i * n + j, 1) = x1 + b;
        }
    }
    const Tensor out = model.forward(params, lattice, DropoutPlan::eval());
    double best = 0.0;
    const std::size_t k = out.cols();
    for (std::size_t r = 0; r < n * n; ++r) {
        best = std::max(best, sym_kl(out.data().subspan(r * k, k), clean.data()));
    }
    return best;
}

}  // namespace smart::testing
