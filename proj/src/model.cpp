// Copyright (c) 2026 The smartft Authors
// SPDX-License-Identifier: Apache-2.0

#include "smart/model.hpp"

#include <cmath>

#include "smart/error.hpp"

namespace smart {

namespace {

constexpr double kLayerNormEps = 1e-5;

std::string block(std::size_t layer, const char* name) {
    return "block" + std::to_string(layer) + "." + name;
}

const Var& param(const ParamVars& params, const std::string& name) {
    auto it = params.find(name);
    if (it == params.end()) throw ContractViolation("model: missing parameter block '" + name + "'");
    return it->second;
}

bool ends_with(const std::string& s, const std::string& suffix) {
    return s.size() >= suffix.size() && s.compare(s.size() - suffix.size(), suffix.size(), suffix) == 0;
}

}  // namespace

const char* to_string(TaskKind kind) {
    return kind == TaskKind::classification ? "classification" : "regression";
}
const char* to_string(ArchKind kind) { return kind == ArchKind::mlp ? "mlp" : "transformer"; }
const char* to_string(Activation kind) { return kind == Activation::relu ? "relu" : "tanh"; }

std::vector<std::string> ModelConfig::problems() const {
    std::vector<std::string> out;
    if (task == TaskKind::classification && classes < 2) out.push_back("model.classes: must be >= 2");
    if (!(dropout >= 0.0 && dropout < 1.0)) out.push_back("model.dropout: must lie in [0, 1)");
    if (arch == ArchKind::mlp) {
        if (input_dim == 0) out.push_back("model.input_dim: must be positive");
        for (auto h : hidden)
            if (h == 0) out.push_back("model.hidden: layer widths must be positive");
    } else {
        if (vocab_size == 0) out.push_back("model.vocab_size: must be positive");
        if (embed_dim == 0) out.push_back("model.embed_dim: must be positive");
        if (heads == 0 || (embed_dim % heads) != 0) out.push_back("model.heads: must divide embed_dim");
        if (ffn_dim == 0) out.push_back("model.ffn_dim: must be positive");
        if (max_len == 0) out.push_back("model.max_len: must be positive");
    }
    return out;
}

void ModelConfig::validate() const {
    auto issues = problems();
    if (issues.empty()) return;
    std::string msg = "invalid model config:";
    for (const auto& p : issues) msg += " " + p + ";";
    throw InputError(msg);
}

std::size_t batch_size(const Inputs& inputs) {
    if (const auto* features = std::get_if<Tensor>(&inputs)) return features->rows();
    const auto& tokens = std::get<TokenBatch>(inputs);
    if (tokens.seq_len == 0) throw ContractViolation("TokenBatch: zero sequence length");
    return tokens.ids.size() / tokens.seq_len;
}

Model::Model(ModelConfig config) : config_(std::move(config)) { config_.validate(); }

ModelParams Model::init_params(Rng& rng) const {
    ModelParams params;
    // Blocks are drawn in declaration order so the stream layout is fixed.
    auto weight = [&](const std::string& name, std::size_t fan_in, std::size_t fan_out) {
        params[name] = gaussian_tensor(rng, {fan_in, fan_out}, 1.0 / std::sqrt(static_cast<double>(fan_in)));
    };
    auto constant = [&](const std::string& name, std::size_t width, double value) {
        params[name] = Tensor({1, width}, value);
    };
    const std::size_t out = config_.output_dim();
    if (config_.arch == ArchKind::mlp) {
        std::size_t fan_in = config_.input_dim;
        for (std::size_t i = 0; i < config_.hidden.size(); ++i) {
            const std::string prefix = "layer" + std::to_string(i);
            weight(prefix + ".weight", fan_in, config_.hidden[i]);
            constant(prefix + ".bias", config_.hidden[i], 0.0);
            fan_in = config_.hidden[i];
        }
        weight("head.weight", fan_in, out);
        constant("head.bias", out, 0.0);
        return params;
    }
    const std::size_t d = config_.embed_dim;
    weight("embedding", config_.vocab_size, d);
    for (std::size_t l = 0; l < config_.layers; ++l) {
        constant(block(l, "ln1.gain"), d, 1.0);
        constant(block(l, "ln1.bias"), d, 0.0);
        weight(block(l, "attn.query"), d, d);
        weight(block(l, "attn.key"), d, d);
        weight(block(l, "attn.value"), d, d);
        weight(block(l, "attn.out"), d, d);
        constant(block(l, "attn.out_bias"), d, 0.0);
        constant(block(l, "ln2.gain"), d, 1.0);
        constant(block(l, "ln2.bias"), d, 0.0);
        weight(block(l, "ffn.in"), d, config_.ffn_dim);
        constant(block(l, "ffn.in_bias"), config_.ffn_dim, 0.0);
        weight(block(l, "ffn.out"), config_.ffn_dim, d);
        constant(block(l, "ffn.out_bias"), d, 0.0);
    }
    constant("final_ln.gain", d, 1.0);
    constant("final_ln.bias", d, 0.0);
    weight("head.weight", d, out);
    constant("head.bias", out, 0.0);
    return params;
}

Shape Model::embedding_shape(std::size_t batch, std::size_t seq_len) const {
    if (config_.arch == ArchKind::mlp) return {batch, config_.input_dim};
    return {batch, seq_len, config_.embed_dim};
}

Tensor Model::embed(const ModelParams& params, const Inputs& inputs) const {
    Tape tape;
    return embed(tape, bind_params(tape, params, false), inputs).value();
}

Var Model::embed(Tape& tape, const ParamVars& params, const Inputs& inputs) const {
    if (config_.arch == ArchKind::mlp) {
        const auto* features = std::get_if<Tensor>(&inputs);
        if (!features) throw InputError("embed: the mlp expects raw feature vectors, got token ids");
        if (features->rank() != 2 || features->cols() != config_.input_dim) {
            throw ContractViolation("embed: features of shape " + shape_to_string(features->shape()) +
                                    " do not match input_dim " + std::to_string(config_.input_dim));
        }
        return tape.constant(*features);
    }
    const auto* tokens = std::get_if<TokenBatch>(&inputs);
    if (!tokens) throw InputError("embed: the transformer expects token ids, got raw features");
    if (tokens->seq_len == 0 || tokens->seq_len > config_.max_len) {
        throw InputError("embed: sequence length " + std::to_string(tokens->seq_len) + " outside [1, " +
                         std::to_string(config_.max_len) + "]");
    }
    if (tokens->ids.empty() || tokens->ids.size() % tokens->seq_len != 0) {
        throw InputError("embed: token buffer is not a whole number of sequences");
    }
    for (auto id : tokens->ids) {
        if (id >= config_.vocab_size) {
            throw InputError("embed: token id " + std::to_string(id) + " outside vocabulary of size " +
                             std::to_string(config_.vocab_size));
        }
    }
    const std::size_t batch = tokens->ids.size() / tokens->seq_len;
    Var rows = gather_rows(param(params, "embedding"), tokens->ids);
    return reshape(rows, {batch, tokens->seq_len, config_.embed_dim});
}

Var Model::activate(const Var& x) const {
    return config_.activation == Activation::relu ? relu(x) : tanh(x);
}

Var Model::dropout(Tape& tape, const Var& x, Rng* mask_rng) const {
    if (mask_rng == nullptr || config_.dropout == 0.0) return x;
    const double keep = 1.0 - config_.dropout;
    Tensor mask(x.value().shape());
    for (double& m : mask.data()) m = mask_rng->uniform() < keep ? 1.0 / keep : 0.0;
    return mul(x, tape.constant(std::move(mask)));
}

Var Model::mlp_forward(Tape& tape, const ParamVars& params, const Var& x, Rng* mask_rng) const {
    Var h = x;
    for (std::size_t i = 0; i < config_.hidden.size(); ++i) {
        const std::string prefix = "layer" + std::to_string(i);
        h = activate(add_row(matmul(h, param(params, prefix + ".weight")), param(params, prefix + ".bias")));
        h = dropout(tape, h, mask_rng);
    }
    return add_row(matmul(h, param(params, "head.weight")), param(params, "head.bias"));
}

Var Model::transformer_forward(Tape& tape, const ParamVars& params, const Var& embedded, Rng* mask_rng) const {
    const Shape& shape = embedded.value().shape();
    if (shape.size() != 3 || shape[2] != config_.embed_dim || shape[1] > config_.max_len) {
        throw ContractViolation("forward_from_embedding: embedded shape " + shape_to_string(shape) +
                                " incompatible with transformer config");
    }
    const std::size_t batch = shape[0], len = shape[1], d = config_.embed_dim;
    const std::size_t head_dim = d / config_.heads;
    const double attn_scale = 1.0 / std::sqrt(static_cast<double>(head_dim));
    const Var positions = tape.constant(sinusoidal_positions(len, d));

    auto norm = [&](const Var& x, const std::string& prefix) {
        return add_row(mul_row(layer_norm_rows(x, kLayerNormEps), param(params, prefix + ".gain")),
                       param(params, prefix + ".bias"));
    };

    std::vector<Var> logits;
    logits.reserve(batch);
    for (std::size_t b = 0; b < batch; ++b) {
        Var x = add(slice_example(embedded, b), positions);
        for (std::size_t l = 0; l < config_.layers; ++l) {
            const Var h = norm(x, block(l, "ln1"));
            const Var q = matmul(h, param(params, block(l, "attn.query")));
            const Var k = matmul(h, param(params, block(l, "attn.key")));
            const Var v = matmul(h, param(params, block(l, "attn.value")));
            std::vector<Var> heads;
            heads.reserve(config_.heads);
            for (std::size_t j = 0; j < config_.heads; ++j) {
                const std::size_t at = j * head_dim;
                const Var scores = scale(matmul(slice_cols(q, at, head_dim), transpose(slice_cols(k, at, head_dim))),
                                         attn_scale);
                heads.push_back(matmul(softmax_rows(scores), slice_cols(v, at, head_dim)));
            }
            Var attn = heads.size() == 1 ? heads.front() : concat_cols(heads);
            attn = add_row(matmul(attn, param(params, block(l, "attn.out"))), param(params, block(l, "attn.out_bias")));
            x = add(x, dropout(tape, attn, mask_rng));

            const Var h2 = norm(x, block(l, "ln2"));
            Var ffn = activate(add_row(matmul(h2, param(params, block(l, "ffn.in"))),
                                       param(params, block(l, "ffn.in_bias"))));
            ffn = add_row(matmul(ffn, param(params, block(l, "ffn.out"))), param(params, block(l, "ffn.out_bias")));
            x = add(x, dropout(tape, ffn, mask_rng));
        }
        Var pooled = mean_rows(norm(x, "final_ln"));
        pooled = dropout(tape, pooled, mask_rng);
        logits.push_back(add_row(matmul(pooled, param(params, "head.weight")), param(params, "head.bias")));
    }
    return batch == 1 ? logits.front() : concat_rows(logits);
}

Var Model::forward_from_embedding(Tape& tape, const ParamVars& params, const Var& embedded,
                                  const DropoutPlan& plan) const {
    Rng mask_rng(plan.seed);
    Rng* masks = plan.train ? &mask_rng : nullptr;
    Var out;
    if (config_.arch == ArchKind::mlp) {
        const Shape& shape = embedded.value().shape();
        if (shape.size() != 2 || shape[1] != config_.input_dim) {
            throw ContractViolation("forward_from_embedding: embedded shape " + shape_to_string(shape) +
                                    " does not match input_dim " + std::to_string(config_.input_dim));
        }
        out = mlp_forward(tape, params, embedded, masks);
    } else {
        out = transformer_forward(tape, params, embedded, masks);
    }
    return config_.task == TaskKind::classification ? softmax_rows(out) : out;
}

Tensor Model::forward_from_embedding(const ModelParams& params, const Tensor& embedded,
                                     const DropoutPlan& plan) const {
    Tape tape;
    const ParamVars vars = bind_params(tape, params, false);
    return forward_from_embedding(tape, vars, tape.constant(embedded), plan).value();
}

Tensor Model::forward(const ModelParams& params, const Inputs& inputs, const DropoutPlan& plan) const {
    Tape tape;
    const ParamVars vars = bind_params(tape, params, false);
    return forward_from_embedding(tape, vars, embed(tape, vars, inputs), plan).value();
}

ParamVars bind_params(Tape& tape, const ModelParams& params, bool trainable) {
    ParamVars vars;
    for (const auto& [name, value] : params) vars.emplace(name, trainable ? tape.leaf(value) : tape.constant(value));
    return vars;
}

void require_same_structure(const ModelParams& a, const ModelParams& b, const char* op) {
    if (a.size() != b.size()) {
        throw ContractViolation(std::string(op) + ": parameter sets differ in block count (" +
                                std::to_string(a.size()) + " vs " + std::to_string(b.size()) + ")");
    }
    for (auto ia = a.begin(), ib = b.begin(); ia != a.end(); ++ia, ++ib) {
        if (ia->first != ib->first) {
            throw ContractViolation(std::string(op) + ": block '" + ia->first + "' vs '" + ib->first + "'");
        }
        if (ia->second.shape() != ib->second.shape()) {
            throw ContractViolation(std::string(op) + ": block '" + ia->first + "' has shapes " +
                                    shape_to_string(ia->second.shape()) + " vs " +
                                    shape_to_string(ib->second.shape()));
        }
    }
}

ModelParams params_axpy(double a, const ModelParams& x, double b, const ModelParams& y) {
    require_same_structure(x, y, "params_axpy");
    ModelParams out;
    for (auto ix = x.begin(), iy = y.begin(); ix != x.end(); ++ix, ++iy) {
        Tensor blended(ix->second.shape());
        auto xs = ix->second.data();
        auto ys = iy->second.data();
        auto dst = blended.data();
        for (std::size_t i = 0; i < dst.size(); ++i) dst[i] = a * xs[i] + b * ys[i];
        out.emplace(ix->first, std::move(blended));
    }
    return out;
}

std::size_t parameter_count(const ModelParams& params) {
    std::size_t n = 0;
    for (const auto& [name, value] : params) n += value.size();
    return n;
}

Tensor sinusoidal_positions(std::size_t len, std::size_t dim) {
    Tensor table({len, dim});
    for (std::size_t pos = 0; pos < len; ++pos) {
        for (std::size_t i = 0; i < dim; ++i) {
            const double rate = std::pow(10000.0, -static_cast<double>(2 * (i / 2)) / static_cast<double>(dim));
            const double angle = static_cast<double>(pos) * rate;
            table.at(pos, i) = (i % 2 == 0) ? std::sin(angle) : std::cos(angle);
        }
    }
    return table;
}

}  // namespace smart
