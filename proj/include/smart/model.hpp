// Copyright (c) 2026 The smartft Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <string>
#include <variant>
#include <vector>

#include "smart/autodiff.hpp"
#include "smart/rng.hpp"
#include "smart/tensor.hpp"

namespace smart {

enum class TaskKind { classification, regression };
enum class ArchKind { mlp, transformer };
enum class Activation { relu, tanh };

struct ModelConfig {
    TaskKind task = TaskKind::classification;
    std::size_t classes = 2;
    ArchKind arch = ArchKind::mlp;
    Activation activation = Activation::relu;
    double dropout = 0.1;

    // mlp
    std::size_t input_dim = 2;
    std::vector<std::size_t> hidden = {16, 16};

    // transformer
    std::size_t vocab_size = 16;
    std::size_t embed_dim = 16;
    std::size_t heads = 2;
    std::size_t layers = 1;
    std::size_t ffn_dim = 32;
    std::size_t max_len = 16;

    /// Width of f's output row: k for classification, 1 for regression.
    std::size_t output_dim() const { return task == TaskKind::classification ? classes : 1; }
    /// Every violated constraint, one message each; empty when valid.
    std::vector<std::string> problems() const;
    void validate() const;

    bool operator==(const ModelConfig&) const = default;
};

/// Block name -> tensor. Iteration order is the name order, which every
/// reduction over parameters (norms, checkpoints) relies on.
using ModelParams = std::map<std::string, Tensor>;
using ParamVars = std::map<std::string, Var>;

struct TokenBatch {
    std::size_t seq_len = 0;
    /// batch * seq_len ids, row-major.
    std::vector<std::size_t> ids;
};

/// Raw feature rows [B x input_dim] for the mlp, token sequences for the transformer.
using Inputs = std::variant<Tensor, TokenBatch>;

std::size_t batch_size(const Inputs& inputs);

/// Dropout is keyed by a seed so that two forwards with the same plan draw
/// identical masks; the clean and perturbed branches of one update share it.
struct DropoutPlan {
    bool train = false;
    std::uint64_t seed = 0;

    static DropoutPlan eval() { return {}; }
    static DropoutPlan training(std::uint64_t seed) { return {true, seed}; }
};

/// f(x; theta), split at the embedding boundary so perturbations can be
/// applied to the embedded input.
class Model {
public:
    explicit Model(ModelConfig config);

    const ModelConfig& config() const noexcept { return config_; }

    /// Weights ~ N(0, 1/fan_in), biases zero, layer-norm gains one.
    ModelParams init_params(Rng& rng) const;

    /// Identity for raw features; embedding-table lookup for tokens, shape [B, L, d].
    Tensor embed(const ModelParams& params, const Inputs& inputs) const;
    Var embed(Tape& tape, const ParamVars& params, const Inputs& inputs) const;

    /// Probability rows [B x k] for classification, [B x 1] scalars for regression.
    Var forward_from_embedding(Tape& tape, const ParamVars& params, const Var& embedded,
                               const DropoutPlan& plan) const;
    Tensor forward_from_embedding(const ModelParams& params, const Tensor& embedded,
                                  const DropoutPlan& plan) const;
    Tensor forward(const ModelParams& params, const Inputs& inputs, const DropoutPlan& plan) const;

    /// Shape of embed(inputs) for a batch of the given size.
    Shape embedding_shape(std::size_t batch, std::size_t seq_len = 0) const;

private:
    Var mlp_forward(Tape& tape, const ParamVars& params, const Var& x, Rng* mask_rng) const;
    Var transformer_forward(Tape& tape, const ParamVars& params, const Var& embedded, Rng* mask_rng) const;
    Var dropout(Tape& tape, const Var& x, Rng* mask_rng) const;
    Var activate(const Var& x) const;

    ModelConfig config_;
};

/// Binds every block onto the tape, as leaves (trainable) or constants.
ParamVars bind_params(Tape& tape, const ModelParams& params, bool trainable);

/// Blockwise a*x + b*y.
ModelParams params_axpy(double a, const ModelParams& x, double b, const ModelParams& y);
std::size_t parameter_count(const ModelParams& params);
/// Throws ContractViolation unless both maps have identical names and shapes.
void require_same_structure(const ModelParams& a, const ModelParams& b, const char* op);

/// Fixed sinusoidal position table [len x dim].
Tensor sinusoidal_positions(std::size_t len, std::size_t dim);

const char* to_string(TaskKind kind);
const char* to_string(ArchKind kind);
const char* to_string(Activation kind);

}  // namespace smart
