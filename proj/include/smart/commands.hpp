// Copyright (c) 2026 The smartft Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "smart/config.hpp"
#include "smart/data.hpp"
#include "smart/trainer.hpp"

namespace smart {

struct RunData {
    Dataset train;  // after subsampling to data.fraction
    Dataset test;
};

/// Reads the configured files or runs the configured generator.
RunData load_run_data(const RunConfig& config);

struct RunMetrics {
    double train_acc = 0.0;
    double test_acc = 0.0;
    /// Mean worst-case l_s over sampled points of the probe ball around each training point.
    double smoothness_probe = 0.0;
    /// D_Breg(theta_T, theta_0) on the test set.
    double breg_to_init = 0.0;
    std::optional<double> test_agreement;
    std::size_t train_size = 0;
    std::size_t test_size = 0;
    PassCounters passes;
};

RunMetrics evaluate_run(const RunConfig& config, const Model& model, const ModelParams& initial,
                        const ModelParams& params, const RunData& data, const PassCounters& passes);
nlohmann::ordered_json metrics_to_json(const RunMetrics& metrics);

struct CellResult {
    ModelParams initial;
    ModelParams params;
    std::vector<TrainRecord> records;
    RunMetrics metrics;
};

/// One full training run in memory; train and sweep both go through here.
CellResult run_cell(const RunConfig& config, const RunData& data);

/// The config of one sweep cell: method, lambda_s, mu, split fraction and seed replaced.
RunConfig cell_config(const RunConfig& base, Method method, double lambda_s, double mu, double fraction,
                      std::uint64_t seed);

double median(std::vector<double> values);

// File-producing commands; each writes under config.run.out. A failed
// command leaves a FAILED file there holding the error line.
void cmd_gen_data(const RunConfig& config);
void cmd_train(const RunConfig& config, const std::optional<std::filesystem::path>& resume = std::nullopt);
void cmd_eval(const RunConfig& config, const std::filesystem::path& checkpoint);
void cmd_probe(const RunConfig& config, const std::filesystem::path& checkpoint);
void cmd_boundary(const RunConfig& config, const std::filesystem::path& checkpoint);
void cmd_sweep(const RunConfig& config);

/// "error kind=<kind> message=<json string>", never spanning lines.
std::string error_line(const std::exception& err);
int exit_code_for(const std::exception& err);

}  // namespace smart
