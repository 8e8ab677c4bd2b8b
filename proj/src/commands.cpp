// Copyright (c) 2026 The smartft Authors
// SPDX-License-Identifier: Apache-2.0

#include "smart/commands.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include "smart/checkpoint.hpp"
#include "smart/error.hpp"
#include "smart/format.hpp"
#include "smart/metrics.hpp"
#include "smart/rng.hpp"

namespace smart {

namespace fs = std::filesystem;

namespace {

using Json = nlohmann::ordered_json;

Dataset generate(const RunConfig& config, std::size_t n, std::uint64_t seed) {
    const DataSpec& d = config.data;
    if (d.generator == "two_moons") return gen_two_moons(n, d.noise, seed);
    if (d.generator == "clusters") {
        return gen_cluster_classification(n, config.model.classes, config.model.input_dim, d.separation, d.noise, seed,
                                          d.soft_labels);
    }
    if (d.generator == "tokens") return gen_token_sequences(n, config.model.vocab_size, d.length, d.rule, seed);
    throw InputError("unknown generator '" + d.generator + "'");
}

void write_json(const Json& j, const fs::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw InputError("cannot open " + path.string());
    out << j.dump(2) << '\n';
    if (!out) throw InputError("failed writing " + path.string());
}

void write_text(const std::string& text, const fs::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw InputError("cannot open " + path.string());
    out << text;
    if (!out) throw InputError("failed writing " + path.string());
}

/// Runs `body` with the output directory prepared; leaves FAILED behind on error.
template <class Body>
void guarded(const RunConfig& config, Body body) {
    const fs::path out = config.run.out;
    fs::create_directories(out);
    fs::remove(out / "FAILED");
    try {
        body(out);
    } catch (const std::exception& err) {
        std::ofstream sentinel(out / "FAILED", std::ios::binary);
        sentinel << error_line(err) << '\n';
        throw;
    }
}

bool is_classifier(const Model& model) { return model.config().task == TaskKind::classification; }

std::string eval_row(std::uint64_t t, const Model& model, const ModelParams& params, const RunData& data) {
    std::string row = std::to_string(t);
    if (is_classifier(model)) {
        row += "," + format_double(accuracy(model, params, data.train)) + "," +
               format_double(accuracy(model, params, data.test));
    } else {
        row += ",,";
    }
    return row + "\n";
}

/// Keeps the rows of an earlier evals.csv up to outer iteration `t`.
std::string earlier_evals(const fs::path& path, std::uint64_t t) {
    std::ifstream in(path, std::ios::binary);
    std::string kept;
    std::string line;
    bool header = true;
    while (std::getline(in, line)) {
        if (header) {
            header = false;
            continue;
        }
        if (line.empty()) continue;
        if (std::stoull(line.substr(0, line.find(','))) <= t) kept += line + "\n";
    }
    return kept;
}

std::string optional_cell(const std::optional<double>& v) { return v ? format_double(*v) : std::string(); }

}  // namespace

RunData load_run_data(const RunConfig& config) {
    const DataSpec& d = config.data;
    const std::uint64_t seed = config.data_seed();
    const std::size_t classes = config.model.task == TaskKind::classification ? config.model.classes : 0;
    RunData data;
    if (!d.path.empty()) {
        if (d.test_path.empty()) throw InputError("data.test_path is required when data.path is set");
        data.train = read_dataset(d.path, classes);
    } else {
        data.train = generate(config, d.n_train, derive_seed(seed, 0));
    }
    if (!d.test_path.empty()) {
        data.test = read_dataset(d.test_path, classes);
    } else {
        data.test = generate(config, d.n_test, derive_seed(seed, 1));
    }
    if (d.fraction < 1.0) {
        const double fractions[] = {d.fraction};
        data.train = subsample_splits(data.train, fractions, derive_seed(seed, 2)).front();
    }
    return data;
}

RunMetrics evaluate_run(const RunConfig& config, const Model& model, const ModelParams& initial,
                        const ModelParams& params, const RunData& data, const PassCounters& passes) {
    RunMetrics m;
    if (is_classifier(model)) {
        m.train_acc = accuracy(model, params, data.train);
        m.test_acc = accuracy(model, params, data.test);
    }
    m.smoothness_probe = local_smoothness_probe(model, params, data.train, config.run.probe_epsilon,
                                                config.run.probe_samples,
                                                derive_seed(config.smart.seed, streams::probe));
    m.breg_to_init = bregman_divergence(model, params, initial, make_batch(data.test).inputs);
    if (is_classifier(model) && data.test.has_soft_labels()) {
        m.test_agreement = agreement_cross_entropy(model, params, data.test);
    }
    m.train_size = data.train.size();
    m.test_size = data.test.size();
    m.passes = passes;
    return m;
}

Json metrics_to_json(const RunMetrics& m) {
    Json j;
    j["final_train_acc"] = m.train_acc;
    j["final_test_acc"] = m.test_acc;
    j["smoothness_probe"] = m.smoothness_probe;
    j["breg_to_init"] = m.breg_to_init;
    if (m.test_agreement) j["test_agreement"] = *m.test_agreement;
    j["train_size"] = m.train_size;
    j["test_size"] = m.test_size;
    j["forward_passes"] = m.passes.forward;
    j["backward_passes"] = m.passes.backward;
    return j;
}

CellResult run_cell(const RunConfig& config, const RunData& data) {
    const Model model(config.model);
    CellResult result;
    result.initial = initial_params(model, config.smart.seed);
    Trainer trainer(model, config.smart, config.method, data.train, result.initial);
    trainer.run();
    result.params = trainer.params();
    result.records = trainer.records();
    result.metrics = evaluate_run(config, model, result.initial, result.params, data, trainer.state().passes);
    return result;
}

RunConfig cell_config(const RunConfig& base, Method method, double lambda_s, double mu, double fraction,
                      std::uint64_t seed) {
    RunConfig c = base;
    c.method = method;
    c.smart.lambda_s = lambda_s;
    c.smart.proximal.mu = mu;
    c.smart.seed = seed;
    c.data.fraction = fraction;
    return c;
}

double median(std::vector<double> values) {
    if (values.empty()) throw ContractViolation("median: no values");
    std::sort(values.begin(), values.end());
    const std::size_t n = values.size();
    return n % 2 == 1 ? values[n / 2] : 0.5 * (values[n / 2 - 1] + values[n / 2]);
}

void cmd_gen_data(const RunConfig& config) {
    guarded(config, [&](const fs::path& out) {
        write_ini(config, out / "config.ini");
        const RunData data = load_run_data(config);
        write_dataset(data.train, out / "train.jsonl");
        write_dataset(data.test, out / "test.jsonl");
    });
}

void cmd_train(const RunConfig& config, const std::optional<fs::path>& resume) {
    guarded(config, [&](const fs::path& out) {
        write_ini(config, out / "config.ini");
        const RunData data = load_run_data(config);
        const Model model(config.model);
        const ModelParams initial = initial_params(model, config.smart.seed);

        std::optional<Trainer> trainer;
        std::string evals;
        if (resume) {
            const Checkpoint c = resume_from_checkpoint(*resume);
            if (c.model != config.model || *c.smart != config.smart || c.method != config.method) {
                throw InputError("resume: checkpoint " + resume->string() + " was written under a different config");
            }
            trainer.emplace(resume_trainer(c, data.train));
            if (config.run.eval_every > 0) evals = earlier_evals(out / "evals.csv", c.train_state->outer_step);
        } else {
            trainer.emplace(model, config.smart, config.method, data.train, initial);
        }

        if (config.run.checkpoint_every > 0) fs::create_directories(out / "checkpoints");
        while (!trainer->finished()) {
            trainer->step_outer();
            const std::uint64_t t = trainer->state().outer_step;
            if (config.run.eval_every > 0 && t % config.run.eval_every == 0) {
                evals += eval_row(t, model, trainer->params(), data);
            }
            if (config.run.checkpoint_every > 0 && t % config.run.checkpoint_every == 0) {
                save_checkpoint(make_checkpoint(*trainer), out / "checkpoints" / ("outer_" + std::to_string(t) + ".json"));
            }
        }

        write_records_csv(trainer->records(), out / "records.csv");
        if (config.run.eval_every > 0) write_text("outer_step,train_acc,test_acc\n" + evals, out / "evals.csv");
        save_checkpoint(make_checkpoint(*trainer), out / "final.json");
        const RunMetrics metrics =
            evaluate_run(config, model, initial, trainer->params(), data, trainer->state().passes);
        write_json(metrics_to_json(metrics), out / "metrics.json");
    });
}

void cmd_eval(const RunConfig& config, const fs::path& checkpoint) {
    guarded(config, [&](const fs::path& out) {
        const Checkpoint c = load_checkpoint(checkpoint);
        const Model model(c.model);
        const RunData data = load_run_data(config);
        Json j;
        if (is_classifier(model)) {
            j["train_acc"] = accuracy(model, c.params, data.train);
            j["test_acc"] = accuracy(model, c.params, data.test);
            if (data.test.has_soft_labels()) j["test_agreement"] = agreement_cross_entropy(model, c.params, data.test);
        }
        j["train_size"] = data.train.size();
        j["test_size"] = data.test.size();
        write_json(j, out / "eval.json");
    });
}

void cmd_probe(const RunConfig& config, const fs::path& checkpoint) {
    guarded(config, [&](const fs::path& out) {
        const Checkpoint c = load_checkpoint(checkpoint);
        const Model model(c.model);
        const RunData data = load_run_data(config);
        const std::uint64_t seed = derive_seed(config.smart.seed, streams::probe);
        Json j;
        j["epsilon"] = config.run.probe_epsilon;
        j["samples"] = config.run.probe_samples;
        j["train_probe"] =
            local_smoothness_probe(model, c.params, data.train, config.run.probe_epsilon, config.run.probe_samples, seed);
        j["test_probe"] =
            local_smoothness_probe(model, c.params, data.test, config.run.probe_epsilon, config.run.probe_samples, seed);
        write_json(j, out / "probe.json");
    });
}

void cmd_boundary(const RunConfig& config, const fs::path& checkpoint) {
    guarded(config, [&](const fs::path& out) {
        const Checkpoint c = load_checkpoint(checkpoint);
        const Model model(c.model);
        write_grid_csv(decision_boundary_grid(model, c.params, config.run.grid, config.run.grid_resolution),
                       out / "boundary.csv");
    });
}

void cmd_sweep(const RunConfig& config) {
    guarded(config, [&](const fs::path& out) {
        write_ini(config, out / "config.ini");
        struct Group {
            std::string key;
            std::vector<double> train_acc, test_acc, probe, breg;
        };
        std::vector<Group> groups;
        std::string rows;
        const SweepSpec& s = config.sweep;
        for (const auto& method_name : s.methods) {
            const Method method = method_from_string(method_name);
            // vanilla ignores lambda_s and mu, so it runs once per split and seed
            const std::vector<double> lambdas = method == Method::vanilla ? std::vector<double>{0.0} : s.lambdas;
            const std::vector<double> mus = method == Method::vanilla ? std::vector<double>{0.0} : s.mus;
            for (double lambda_s : lambdas) {
                for (double mu : mus) {
                    for (double fraction : s.fractions) {
                        Group g;
                        g.key = method_name + "," + format_double(lambda_s) + "," + format_double(mu) + "," +
                                format_double(fraction);
                        for (std::size_t k = 0; k < s.seeds; ++k) {
                            const std::uint64_t seed = s.first_seed + k;
                            const RunConfig cell = cell_config(config, method, lambda_s, mu, fraction, seed);
                            const RunMetrics m = run_cell(cell, load_run_data(cell)).metrics;
                            rows += g.key + "," + std::to_string(seed) + "," + format_double(m.train_acc) + "," +
                                    format_double(m.test_acc) + "," + format_double(m.smoothness_probe) + "," +
                                    format_double(m.breg_to_init) + "\n";
                            g.train_acc.push_back(m.train_acc);
                            g.test_acc.push_back(m.test_acc);
                            g.probe.push_back(m.smoothness_probe);
                            g.breg.push_back(m.breg_to_init);
                        }
                        groups.push_back(std::move(g));
                    }
                }
            }
        }
        for (const auto& g : groups) {
            rows += g.key + ",median," + format_double(median(g.train_acc)) + "," + format_double(median(g.test_acc)) +
                    "," + format_double(median(g.probe)) + "," + format_double(median(g.breg)) + "\n";
        }
        write_text("method,lambda_s,mu,fraction,seed,train_acc,test_acc,smoothness_probe,breg_to_init\n" + rows,
                   out / "summary.csv");
    });
}

std::string error_line(const std::exception& err) {
    std::string kind = "internal";
    if (dynamic_cast<const ConfigError*>(&err)) {
        kind = "config";
    } else if (dynamic_cast<const LoadError*>(&err)) {
        kind = "load";
    } else if (dynamic_cast<const InputError*>(&err)) {
        kind = "input";
    } else if (dynamic_cast<const ContractViolation*>(&err)) {
        kind = "contract";
    }
    return "error kind=" + kind + " message=" + Json(std::string(err.what())).dump();
}

int exit_code_for(const std::exception& err) {
    if (dynamic_cast<const ConfigError*>(&err)) return 2;
    if (dynamic_cast<const LoadError*>(&err)) return 4;
    if (dynamic_cast<const InputError*>(&err)) return 3;
    return 1;
}

}  // namespace smart
