// Copyright (c) 2026 The smartft Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <filesystem>
#include <optional>
#include <vector>

#include "smart/model.hpp"
#include "smart/trainer.hpp"

namespace smart {

inline constexpr int kCheckpointVersion = 1;

/// {"version":1, "config":{...}, "tensors":{...}, "train_state":{...}}.
/// A checkpoint without train_state is a plain parameter snapshot.
struct Checkpoint {
    ModelConfig model;
    ModelParams params;
    std::optional<SmartConfig> smart;
    Method method = Method::smart;
    std::optional<TrainState> train_state;
    std::vector<TrainRecord> records;
};

Checkpoint make_checkpoint(const Trainer& trainer);
Checkpoint make_checkpoint(const ModelConfig& model, const ModelParams& params);

/// Writes through a temporary file and renames it into place.
void save_checkpoint(const Checkpoint& checkpoint, const std::filesystem::path& path);
/// Throws LoadError on unreadable, truncated, malformed or unsupported-version files.
Checkpoint load_checkpoint(const std::filesystem::path& path);

/// Loads a checkpoint that carries full training state.
Checkpoint resume_from_checkpoint(const std::filesystem::path& path);
/// Rebuilds a trainer that continues the saved trajectory exactly.
Trainer resume_trainer(const Checkpoint& checkpoint, const Dataset& data);

}  // namespace smart
