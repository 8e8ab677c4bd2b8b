// Copyright (c) 2026 The smartft Authors
// SPDX-License-Identifier: Apache-2.0

#include "smart/checkpoint.hpp"

#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "smart/error.hpp"
#include "smart/config.hpp"

namespace smart {

namespace {

using Json = nlohmann::ordered_json;

Json params_to_json(const ModelParams& params) {
    Json out = Json::object();
    for (const auto& [name, value] : params) out[name] = {{"shape", value.shape()}, {"data", value.values()}};
    return out;
}

ModelParams params_from_json(const Json& j) {
    ModelParams params;
    for (const auto& [name, block] : j.items()) {
        params.emplace(name, Tensor(block.at("shape").get<Shape>(), block.at("data").get<std::vector<double>>()));
    }
    return params;
}

Json optional_to_json(const std::optional<double>& v) { return v ? Json(*v) : Json(nullptr); }

std::optional<double> optional_from_json(const Json& j) {
    if (j.is_null()) return std::nullopt;
    return j.get<double>();
}

Json record_to_json(const TrainRecord& r) {
    return {{"step", r.step},
            {"lr", r.lr},
            {"beta", optional_to_json(r.beta)},
            {"task_loss", r.task_loss},
            {"reg_loss", optional_to_json(r.reg_loss)},
            {"breg_loss", optional_to_json(r.breg_loss)},
            {"total", r.total},
            {"grad_norm", r.grad_norm}};
}

TrainRecord record_from_json(const Json& j) {
    TrainRecord r;
    r.step = j.at("step").get<std::uint64_t>();
    r.lr = j.at("lr").get<double>();
    r.beta = optional_from_json(j.at("beta"));
    r.task_loss = j.at("task_loss").get<double>();
    r.reg_loss = optional_from_json(j.at("reg_loss"));
    r.breg_loss = optional_from_json(j.at("breg_loss"));
    r.total = j.at("total").get<double>();
    r.grad_norm = j.at("grad_norm").get<double>();
    return r;
}

Json state_to_json(const TrainState& s, const std::vector<TrainRecord>& records) {
    Json records_json = Json::array();
    for (const auto& r : records) records_json.push_back(record_to_json(r));
    return {{"outer_step", s.outer_step},
            {"inner_step", s.inner_step},
            {"global_step", s.global_step},
            {"rng", {{"seed", s.seed}, {"counter", s.global_step}}},
            {"passes", {{"forward", s.passes.forward}, {"backward", s.passes.backward}}},
            {"adam",
             {{"step", s.adam.step},
              {"beta1", s.adam.beta1},
              {"beta2", s.adam.beta2},
              {"eps", s.adam.eps},
              {"m", params_to_json(s.adam.m)},
              {"v", params_to_json(s.adam.v)}}},
            {"outer_snapshot", params_to_json(s.outer_snapshot)},
            {"teacher", params_to_json(s.teacher)},
            {"records", records_json}};
}

}  // namespace

Checkpoint make_checkpoint(const ModelConfig& model, const ModelParams& params) {
    Checkpoint c;
    c.model = model;
    c.params = params;
    return c;
}

Checkpoint make_checkpoint(const Trainer& trainer) {
    Checkpoint c;
    c.model = trainer.model().config();
    c.params = trainer.state().live;
    c.smart = trainer.config();
    c.method = trainer.method();
    c.train_state = trainer.state();
    c.records = trainer.records();
    return c;
}

void save_checkpoint(const Checkpoint& checkpoint, const std::filesystem::path& path) {
    Json config = {{"model", model_config_to_json(checkpoint.model)}};
    if (checkpoint.smart) {
        config["smart"] = smart_config_to_json(*checkpoint.smart, checkpoint.method);
    }
    Json doc = {{"version", kCheckpointVersion}, {"config", config}, {"tensors", params_to_json(checkpoint.params)}};
    if (checkpoint.train_state) doc["train_state"] = state_to_json(*checkpoint.train_state, checkpoint.records);

    std::filesystem::path tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary);
        if (!out) throw InputError("save_checkpoint: cannot open " + tmp.string());
        out << doc.dump() << '\n';
        if (!out) throw InputError("save_checkpoint: failed writing " + tmp.string());
    }
    std::filesystem::rename(tmp, path);
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw LoadError("load_checkpoint: cannot open " + path.string());
    std::stringstream buffer;
    buffer << in.rdbuf();
    Json doc;
    try {
        doc = Json::parse(buffer.str());
    } catch (const Json::exception& err) {
        throw LoadError("load_checkpoint: " + path.string() + " is not a complete JSON document (" + err.what() + ")");
    }
    try {
        const int version = doc.at("version").get<int>();
        if (version != kCheckpointVersion) {
            throw LoadError("load_checkpoint: " + path.string() + " has unsupported version " + std::to_string(version));
        }
        Checkpoint c;
        const Json& config = doc.at("config");
        c.model = model_config_from_json(config.at("model"));
        c.params = params_from_json(doc.at("tensors"));
        if (config.contains("smart")) {
            auto [smart, method] = smart_config_from_json(config.at("smart"));
            c.smart = smart;
            c.method = method;
        }
        if (doc.contains("train_state")) {
            const Json& s = doc.at("train_state");
            TrainState state;
            state.live = c.params;
            state.outer_step = s.at("outer_step").get<std::uint64_t>();
            state.inner_step = s.at("inner_step").get<std::uint64_t>();
            state.global_step = s.at("global_step").get<std::uint64_t>();
            state.seed = s.at("rng").at("seed").get<std::uint64_t>();
            if (s.at("rng").at("counter").get<std::uint64_t>() != state.global_step) {
                throw LoadError("load_checkpoint: rng counter disagrees with the step counter");
            }
            state.passes.forward = s.at("passes").at("forward").get<std::uint64_t>();
            state.passes.backward = s.at("passes").at("backward").get<std::uint64_t>();
            const Json& adam = s.at("adam");
            state.adam.step = adam.at("step").get<std::uint64_t>();
            state.adam.beta1 = adam.at("beta1").get<double>();
            state.adam.beta2 = adam.at("beta2").get<double>();
            state.adam.eps = adam.at("eps").get<double>();
            state.adam.m = params_from_json(adam.at("m"));
            state.adam.v = params_from_json(adam.at("v"));
            state.outer_snapshot = params_from_json(s.at("outer_snapshot"));
            state.teacher = params_from_json(s.at("teacher"));
            require_same_structure(state.live, state.teacher, "load_checkpoint");
            require_same_structure(state.live, state.adam.m, "load_checkpoint");
            require_same_structure(state.live, state.adam.v, "load_checkpoint");
            require_same_structure(state.live, state.outer_snapshot, "load_checkpoint");
            for (const auto& r : s.at("records")) c.records.push_back(record_from_json(r));
            c.train_state = std::move(state);
        }
        return c;
    } catch (const LoadError&) {
        throw;
    } catch (const std::exception& err) {
        throw LoadError("load_checkpoint: " + path.string() + ": " + err.what());
    }
}

Checkpoint resume_from_checkpoint(const std::filesystem::path& path) {
    Checkpoint c = load_checkpoint(path);
    if (!c.train_state || !c.smart) {
        throw LoadError("resume_from_checkpoint: " + path.string() + " holds parameters only, no training state");
    }
    return c;
}

Trainer resume_trainer(const Checkpoint& checkpoint, const Dataset& data) {
    if (!checkpoint.train_state || !checkpoint.smart) {
        throw LoadError("resume_trainer: checkpoint holds no training state");
    }
    return Trainer(Model(checkpoint.model), *checkpoint.smart, checkpoint.method, data, *checkpoint.train_state,
                   checkpoint.records);
}

}  // namespace smart
