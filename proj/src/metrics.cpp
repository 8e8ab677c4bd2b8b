// Copyright (c) 2026 The smartft Authors
// SPDX-License-Identifier: Apache-2.0

#include "smart/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include "smart/error.hpp"
#include "smart/format.hpp"
#include "smart/losses.hpp"
#include "smart/rng.hpp"

namespace smart {

namespace {

constexpr std::size_t kChunk = 256;

void require_matching_task(const Model& model, const Dataset& data) {
    if (model.config().task != data.task) throw InputError("dataset task does not match the model task");
    if (data.task == TaskKind::classification && data.classes > model.config().classes) {
        throw InputError("dataset has more classes than the model outputs");
    }
}

}  // namespace

Tensor predict(const Model& model, const ModelParams& params, const Dataset& data) {
    require_matching_task(model, data);
    std::vector<Tensor> chunks;
    std::vector<std::size_t> indices;
    for (std::size_t start = 0; start < data.size(); start += kChunk) {
        indices.clear();
        for (std::size_t i = start; i < std::min(data.size(), start + kChunk); ++i) indices.push_back(i);
        chunks.push_back(model.forward(params, make_batch(data, indices).inputs, DropoutPlan::eval()));
    }
    return chunks.size() == 1 ? chunks.front() : concat_rows(chunks);
}

std::size_t argmax(std::span<const double> row) {
    return static_cast<std::size_t>(std::max_element(row.begin(), row.end()) - row.begin());
}

double accuracy(const Model& model, const ModelParams& params, const Dataset& data) {
    if (data.task != TaskKind::classification) throw InputError("accuracy: needs a classification dataset");
    const Tensor out = predict(model, params, data);
    std::size_t correct = 0;
    for (std::size_t i = 0; i < data.size(); ++i) {
        auto row = out.data().subspan(i * out.cols(), out.cols());
        if (argmax(row) == std::get<std::size_t>(data.examples[i].label)) ++correct;
    }
    return static_cast<double>(correct) / static_cast<double>(data.size());
}

double agreement_cross_entropy(const Model& model, const ModelParams& params, const Dataset& data) {
    if (!data.has_soft_labels()) throw InputError("agreement_cross_entropy: dataset carries no soft labels");
    const Tensor out = predict(model, params, data);
    double total = 0.0;
    for (std::size_t i = 0; i < data.size(); ++i) {
        const auto& p = data.examples[i].soft_label;
        for (std::size_t j = 0; j < p.size(); ++j) {
            if (p[j] == 0.0) continue;
            total -= p[j] * std::log(std::clamp(out.at(i, j), kProbabilityFloor, 1.0));
        }
    }
    return total / static_cast<double>(data.size());
}

double local_smoothness_probe(const Model& model, const ModelParams& params, const Dataset& data, double epsilon,
                              std::size_t samples, std::uint64_t seed) {
    if (!(epsilon >= 0.0)) throw ContractViolation("local_smoothness_probe: epsilon must be >= 0");
    if (samples == 0) throw ContractViolation("local_smoothness_probe: need at least one sample");
    require_matching_task(model, data);
    const SmoothLossKind smooth = smooth_loss_for(model.config().task);
    Rng rng(seed);
    double total = 0.0;
    for (std::size_t i = 0; i < data.size(); ++i) {
        const std::size_t index[] = {i};
        const Tensor x = model.embed(params, make_batch(data, index).inputs);
        const Tensor fx = model.forward_from_embedding(params, x, DropoutPlan::eval());
        const std::size_t n = x.size();
        Shape batch_shape = x.shape();
        batch_shape[0] = samples;
        Tensor perturbed(batch_shape);
        Tensor anchor({samples, fx.cols()});
        for (std::size_t s = 0; s < samples; ++s) {
            for (std::size_t k = 0; k < n; ++k) perturbed[s * n + k] = x[k] + epsilon * rng.uniform(-1.0, 1.0);
            for (std::size_t k = 0; k < fx.cols(); ++k) anchor.at(s, k) = fx[k];
        }
        const Tensor out = model.forward_from_embedding(params, perturbed, DropoutPlan::eval());
        const auto values = per_example_smooth_loss(smooth, out, anchor);
        total += *std::max_element(values.begin(), values.end());
    }
    return total / static_cast<double>(data.size());
}

std::vector<GridRow> decision_boundary_grid(const Model& model, const ModelParams& params, const GridBounds& bounds,
                                            std::size_t resolution) {
    const ModelConfig& cfg = model.config();
    if (cfg.arch != ArchKind::mlp || cfg.input_dim != 2) throw InputError("decision_boundary_grid: needs a 2-input model");
    if (cfg.task != TaskKind::classification) throw InputError("decision_boundary_grid: needs a classifier");
    if (resolution == 0) throw InputError("decision_boundary_grid: resolution must be positive");
    auto coord = [resolution](double lo, double hi, std::size_t i) {
        return resolution == 1 ? lo : lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(resolution - 1);
    };
    Tensor points({resolution * resolution, 2});
    for (std::size_t r = 0; r < resolution; ++r) {
        for (std::size_t c = 0; c < resolution; ++c) {
            points.at(r * resolution + c, 0) = coord(bounds.x0_min, bounds.x0_max, c);
            points.at(r * resolution + c, 1) = coord(bounds.x1_min, bounds.x1_max, r);
        }
    }
    const Tensor probs = model.forward(params, points, DropoutPlan::eval());
    std::vector<GridRow> grid(points.rows());
    for (std::size_t i = 0; i < grid.size(); ++i) grid[i] = {points.at(i, 0), points.at(i, 1), probs.at(i, 1)};
    return grid;
}

void write_grid_csv(const std::vector<GridRow>& grid, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw InputError("write_grid_csv: cannot open " + path.string());
    out << "x0,x1,p1\n";
    for (const auto& row : grid) out << format_double(row.x0) << ',' << format_double(row.x1) << ',' << format_double(row.p1) << '\n';
}

}  // namespace smart
