// Copyright (c) 2026 The smartft Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "smart/metrics.hpp"
#include "smart/model.hpp"
#include "smart/trainer.hpp"

namespace smart {

/// Where the training and test sets come from: files, or one of the generators.
struct DataSpec {
    std::string path;       // JSONL training set; empty selects the generator
    std::string test_path;  // JSONL test set; empty selects the generator
    std::string generator = "two_moons";  // two_moons | clusters | tokens
    std::size_t n_train = 40;
    std::size_t n_test = 1000;
    double noise = 0.25;
    double separation = 2.0;  // clusters
    std::size_t length = 8;   // tokens
    std::string rule = "majority";
    bool soft_labels = false;
    /// Training subset kept for the run, drawn by subsample_splits.
    double fraction = 1.0;
    /// Generator and subsampling seed; follows the run seed when absent.
    std::optional<std::uint64_t> seed;

    bool operator==(const DataSpec&) const = default;
};

struct RunSpec {
    std::string out = "runs/default";
    std::size_t eval_every = 0;        // outer iterations; 0 disables
    std::size_t checkpoint_every = 0;  // outer iterations; 0 disables
    double probe_epsilon = 0.1;
    std::size_t probe_samples = 32;
    std::size_t grid_resolution = 101;
    GridBounds grid;

    bool operator==(const RunSpec&) const = default;
};

struct SweepSpec {
    std::vector<std::string> methods = {"smart", "vanilla"};
    std::vector<double> lambdas = {1.0};
    std::vector<double> mus = {1.0};
    std::vector<double> fractions = {1.0};
    std::size_t seeds = 10;
    std::uint64_t first_seed = 0;

    bool operator==(const SweepSpec&) const = default;
};

struct RunConfig {
    ModelConfig model;
    SmartConfig smart;
    Method method = Method::smart;
    DataSpec data;
    RunSpec run;
    SweepSpec sweep;

    std::uint64_t data_seed() const { return data.seed.value_or(smart.seed); }
    bool operator==(const RunConfig&) const = default;
};

/// Thrown when configuration input is rejected; carries every offending key.
class ConfigError : public std::runtime_error {
public:
    explicit ConfigError(std::vector<std::string> issues);
    const std::vector<std::string>& issues() const noexcept { return issues_; }

private:
    std::vector<std::string> issues_;
};

/// "section.key" -> text value, in override order.
using Overrides = std::vector<std::pair<std::string, std::string>>;

/// Parses "section.key=value".
std::pair<std::string, std::string> parse_override(const std::string& text);

/// Applies the file (if any) then the overrides on top of the defaults and
/// validates the result. All problems are collected before throwing.
RunConfig load_run_config(const std::optional<std::filesystem::path>& file, const Overrides& overrides);

/// Every key with its current value, grouped by section; parses back to the same config.
std::string to_ini(const RunConfig& config);
void write_ini(const RunConfig& config, const std::filesystem::path& path);

/// Every "section.key" the loader accepts.
std::vector<std::string> config_keys();

nlohmann::ordered_json model_config_to_json(const ModelConfig& config);
ModelConfig model_config_from_json(const nlohmann::ordered_json& j);
nlohmann::ordered_json smart_config_to_json(const SmartConfig& config, Method method);
std::pair<SmartConfig, Method> smart_config_from_json(const nlohmann::ordered_json& j);

Method method_from_string(const std::string& text);

}  // namespace smart
