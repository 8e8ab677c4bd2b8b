// Copyright (c) 2026 The smartft Authors
// SPDX-License-Identifier: Apache-2.0

#include "smart/config.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <sstream>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include "smart/error.hpp"
#include "smart/format.hpp"

namespace smart {

namespace {

using Json = nlohmann::ordered_json;

enum class Kind { real, integer, flag, text, integers, reals, texts };

struct Field {
    std::string section;
    std::string key;
    Kind kind;
    std::function<std::string(const RunConfig&)> get;
    /// Throws std::invalid_argument with a reason on bad text.
    std::function<void(RunConfig&, const std::string&)> set;

    std::string name() const { return section + "." + key; }
};

std::string trim(const std::string& s) {
    const auto first = s.find_first_not_of(" \t\r\n");
    if (first == std::string::npos) return {};
    const auto last = s.find_last_not_of(" \t\r\n");
    return s.substr(first, last - first + 1);
}

double parse_real(const std::string& text) {
    const std::string s = trim(text);
    double v = 0.0;
    auto [end, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (s.empty() || ec != std::errc() || end != s.data() + s.size() || !std::isfinite(v)) {
        throw std::invalid_argument("expected a finite real number");
    }
    return v;
}

std::uint64_t parse_uint(const std::string& text) {
    const std::string s = trim(text);
    std::uint64_t v = 0;
    auto [end, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (s.empty() || ec != std::errc() || end != s.data() + s.size()) {
        throw std::invalid_argument("expected a non-negative integer");
    }
    return v;
}

bool parse_flag(const std::string& text) {
    const std::string s = trim(text);
    if (s == "true" || s == "1") return true;
    if (s == "false" || s == "0") return false;
    throw std::invalid_argument("expected true or false");
}

std::vector<std::string> split_list(const std::string& text) {
    std::vector<std::string> out;
    const std::string s = trim(text);
    if (s.empty()) return out;
    std::stringstream stream(s);
    std::string item;
    while (std::getline(stream, item, ',')) out.push_back(trim(item));
    return out;
}

template <class T, class Fmt>
std::string join(const std::vector<T>& items, Fmt fmt) {
    std::string out;
    for (std::size_t i = 0; i < items.size(); ++i) {
        if (i) out += ",";
        out += fmt(items[i]);
    }
    return out;
}

template <class Access>
Field real(const char* section, const char* key, Access access) {
    return {section, key, Kind::real, [access](const RunConfig& c) { return format_double(access(c)); },
            [access](RunConfig& c, const std::string& v) { access(c) = parse_real(v); }};
}

template <class Access>
Field integer(const char* section, const char* key, Access access) {
    return {section, key, Kind::integer, [access](const RunConfig& c) { return std::to_string(access(c)); },
            [access](RunConfig& c, const std::string& v) {
                using T = std::remove_reference_t<decltype(access(c))>;
                access(c) = static_cast<T>(parse_uint(v));
            }};
}

template <class Access>
Field flag(const char* section, const char* key, Access access) {
    return {section, key, Kind::flag, [access](const RunConfig& c) { return std::string(access(c) ? "true" : "false"); },
            [access](RunConfig& c, const std::string& v) { access(c) = parse_flag(v); }};
}

template <class Access>
Field text(const char* section, const char* key, Access access) {
    return {section, key, Kind::text, [access](const RunConfig& c) { return access(c); },
            [access](RunConfig& c, const std::string& v) { access(c) = trim(v); }};
}

template <class E, class Access>
Field choice(const char* section, const char* key, Access access, std::vector<std::pair<std::string, E>> names) {
    return {section, key, Kind::text,
            [access, names](const RunConfig& c) {
                for (const auto& [name, value] : names) {
                    if (value == access(c)) return name;
                }
                return std::string("?");
            },
            [access, names](RunConfig& c, const std::string& v) {
                const std::string s = trim(v);
                std::string allowed;
                for (const auto& [name, value] : names) {
                    if (name == s) {
                        access(c) = value;
                        return;
                    }
                    allowed += (allowed.empty() ? "" : "|") + name;
                }
                throw std::invalid_argument("expected one of " + allowed);
            }};
}

template <class Access>
Field integers(const char* section, const char* key, Access access) {
    return {section, key, Kind::integers,
            [access](const RunConfig& c) {
                return join(access(c), [](std::size_t x) { return std::to_string(x); });
            },
            [access](RunConfig& c, const std::string& v) {
                std::vector<std::size_t> out;
                for (const auto& item : split_list(v)) out.push_back(parse_uint(item));
                access(c) = out;
            }};
}

template <class Access>
Field reals(const char* section, const char* key, Access access) {
    return {section, key, Kind::reals, [access](const RunConfig& c) { return join(access(c), format_double); },
            [access](RunConfig& c, const std::string& v) {
                std::vector<double> out;
                for (const auto& item : split_list(v)) out.push_back(parse_real(item));
                access(c) = out;
            }};
}

template <class Access>
Field texts(const char* section, const char* key, Access access) {
    return {section, key, Kind::texts,
            [access](const RunConfig& c) { return join(access(c), [](const std::string& s) { return s; }); },
            [access](RunConfig& c, const std::string& v) { access(c) = split_list(v); }};
}

const std::vector<Field>& fields() {
    static const std::vector<Field> table = [] {
        std::vector<Field> f;
        // model
        f.push_back(choice<TaskKind>("model", "task", [](auto& c) -> auto& { return c.model.task; },
                                     {{"classification", TaskKind::classification},
                                      {"regression", TaskKind::regression}}));
        f.push_back(integer("model", "classes", [](auto& c) -> auto& { return c.model.classes; }));
        f.push_back(choice<ArchKind>("model", "arch", [](auto& c) -> auto& { return c.model.arch; },
                                     {{"mlp", ArchKind::mlp}, {"transformer", ArchKind::transformer}}));
        f.push_back(choice<Activation>("model", "activation", [](auto& c) -> auto& { return c.model.activation; },
                                       {{"relu", Activation::relu}, {"tanh", Activation::tanh}}));
        f.push_back(real("model", "dropout", [](auto& c) -> auto& { return c.model.dropout; }));
        f.push_back(integer("model", "input_dim", [](auto& c) -> auto& { return c.model.input_dim; }));
        f.push_back(integers("model", "hidden", [](auto& c) -> auto& { return c.model.hidden; }));
        f.push_back(integer("model", "vocab_size", [](auto& c) -> auto& { return c.model.vocab_size; }));
        f.push_back(integer("model", "embed_dim", [](auto& c) -> auto& { return c.model.embed_dim; }));
        f.push_back(integer("model", "heads", [](auto& c) -> auto& { return c.model.heads; }));
        f.push_back(integer("model", "layers", [](auto& c) -> auto& { return c.model.layers; }));
        f.push_back(integer("model", "ffn_dim", [](auto& c) -> auto& { return c.model.ffn_dim; }));
        f.push_back(integer("model", "max_len", [](auto& c) -> auto& { return c.model.max_len; }));
        // smart
        f.push_back(choice<Method>("smart", "method", [](auto& c) -> auto& { return c.method; },
                                   {{"smart", Method::smart}, {"vanilla", Method::vanilla}}));
        f.push_back(real("smart", "lambda_s", [](auto& c) -> auto& { return c.smart.lambda_s; }));
        f.push_back(real("smart", "epsilon", [](auto& c) -> auto& { return c.smart.adversarial.epsilon; }));
        f.push_back(real("smart", "sigma", [](auto& c) -> auto& { return c.smart.adversarial.sigma; }));
        f.push_back(real("smart", "eta", [](auto& c) -> auto& { return c.smart.adversarial.eta; }));
        f.push_back(integer("smart", "adv_steps", [](auto& c) -> auto& { return c.smart.adversarial.steps; }));
        f.push_back(choice<NormKind>("smart", "norm", [](auto& c) -> auto& { return c.smart.adversarial.norm; },
                                     {{"inf", NormKind::infinity}, {"2", NormKind::two}}));
        f.push_back(real("smart", "mu", [](auto& c) -> auto& { return c.smart.proximal.mu; }));
        f.push_back(choice<ProxMode>("smart", "prox", [](auto& c) -> auto& { return c.smart.proximal.mode; },
                                     {{"mbpp", ProxMode::mbpp}, {"vbpp", ProxMode::vbpp}, {"off", ProxMode::off}}));
        f.push_back(real("smart", "beta_early", [](auto& c) -> auto& { return c.smart.proximal.beta.early; }));
        f.push_back(real("smart", "beta_late", [](auto& c) -> auto& { return c.smart.proximal.beta.late; }));
        f.push_back(
            real("smart", "beta_switch", [](auto& c) -> auto& { return c.smart.proximal.beta.switch_fraction; }));
        f.push_back(integer("smart", "inner_steps", [](auto& c) -> auto& { return c.smart.inner_steps; }));
        f.push_back(integer("smart", "outer_steps", [](auto& c) -> auto& { return c.smart.outer_steps; }));
        f.push_back(integer("smart", "batch_size", [](auto& c) -> auto& { return c.smart.batch_size; }));
        f.push_back(real("smart", "lr", [](auto& c) -> auto& { return c.smart.peak_lr; }));
        f.push_back(real("smart", "warmup", [](auto& c) -> auto& { return c.smart.warmup_fraction; }));
        f.push_back(real("smart", "clip", [](auto& c) -> auto& { return c.smart.clip_norm; }));
        f.push_back(integer("smart", "seed", [](auto& c) -> auto& { return c.smart.seed; }));
        f.push_back(flag("smart", "clean_branch_grad", [](auto& c) -> auto& { return c.smart.clean_branch_grad; }));
        // data
        f.push_back(text("data", "path", [](auto& c) -> auto& { return c.data.path; }));
        f.push_back(text("data", "test_path", [](auto& c) -> auto& { return c.data.test_path; }));
        f.push_back(text("data", "generator", [](auto& c) -> auto& { return c.data.generator; }));
        f.push_back(integer("data", "n_train", [](auto& c) -> auto& { return c.data.n_train; }));
        f.push_back(integer("data", "n_test", [](auto& c) -> auto& { return c.data.n_test; }));
        f.push_back(real("data", "noise", [](auto& c) -> auto& { return c.data.noise; }));
        f.push_back(real("data", "separation", [](auto& c) -> auto& { return c.data.separation; }));
        f.push_back(integer("data", "length", [](auto& c) -> auto& { return c.data.length; }));
        f.push_back(text("data", "rule", [](auto& c) -> auto& { return c.data.rule; }));
        f.push_back(flag("data", "soft_labels", [](auto& c) -> auto& { return c.data.soft_labels; }));
        f.push_back(real("data", "fraction", [](auto& c) -> auto& { return c.data.fraction; }));
        f.push_back({"data", "seed", Kind::text,
                     [](const RunConfig& c) { return c.data.seed ? std::to_string(*c.data.seed) : std::string("run"); },
                     [](RunConfig& c, const std::string& v) {
                         if (trim(v) == "run") {
                             c.data.seed.reset();
                         } else {
                             c.data.seed = parse_uint(v);
                         }
                     }});
        // run
        f.push_back(text("run", "out", [](auto& c) -> auto& { return c.run.out; }));
        f.push_back(integer("run", "eval_every", [](auto& c) -> auto& { return c.run.eval_every; }));
        f.push_back(integer("run", "checkpoint_every", [](auto& c) -> auto& { return c.run.checkpoint_every; }));
        f.push_back(real("run", "probe_epsilon", [](auto& c) -> auto& { return c.run.probe_epsilon; }));
        f.push_back(integer("run", "probe_samples", [](auto& c) -> auto& { return c.run.probe_samples; }));
        f.push_back(integer("run", "grid_resolution", [](auto& c) -> auto& { return c.run.grid_resolution; }));
        f.push_back(real("run", "grid_x0_min", [](auto& c) -> auto& { return c.run.grid.x0_min; }));
        f.push_back(real("run", "grid_x0_max", [](auto& c) -> auto& { return c.run.grid.x0_max; }));
        f.push_back(real("run", "grid_x1_min", [](auto& c) -> auto& { return c.run.grid.x1_min; }));
        f.push_back(real("run", "grid_x1_max", [](auto& c) -> auto& { return c.run.grid.x1_max; }));
        // sweep
        f.push_back(texts("sweep", "methods", [](auto& c) -> auto& { return c.sweep.methods; }));
        f.push_back(reals("sweep", "lambdas", [](auto& c) -> auto& { return c.sweep.lambdas; }));
        f.push_back(reals("sweep", "mus", [](auto& c) -> auto& { return c.sweep.mus; }));
        f.push_back(reals("sweep", "fractions", [](auto& c) -> auto& { return c.sweep.fractions; }));
        f.push_back(integer("sweep", "seeds", [](auto& c) -> auto& { return c.sweep.seeds; }));
        f.push_back(integer("sweep", "first_seed", [](auto& c) -> auto& { return c.sweep.first_seed; }));
        return f;
    }();
    return table;
}

const Field* find_field(const std::string& section, const std::string& key) {
    for (const auto& f : fields()) {
        if (f.section == section && f.key == key) return &f;
    }
    return nullptr;
}

void apply(RunConfig& config, const std::string& section, const std::string& key, const std::string& value,
           std::vector<std::string>& issues) {
    const Field* field = find_field(section, key);
    if (!field) {
        issues.push_back(section + "." + key + ": unknown key");
        return;
    }
    try {
        field->set(config, value);
    } catch (const std::invalid_argument& err) {
        issues.push_back(field->name() + ": " + err.what() + ", got '" + trim(value) + "'");
    }
}

std::vector<std::string> run_problems(const RunConfig& c) {
    std::vector<std::string> out;
    for (auto& p : c.model.problems()) out.push_back(std::move(p));
    for (auto& p : c.smart.problems()) out.push_back(std::move(p));

    const DataSpec& d = c.data;
    if (d.path.empty()) {
        if (d.generator == "two_moons") {
            if (c.model.arch != ArchKind::mlp || c.model.input_dim != 2 || c.model.classes != 2) {
                out.push_back("data.generator: two_moons needs an mlp with input_dim 2 and classes 2");
            }
            if (d.n_train < 2 || d.n_train % 2 != 0) out.push_back("data.n_train: two_moons needs an even count >= 2");
            if (d.n_test < 2 || d.n_test % 2 != 0) out.push_back("data.n_test: two_moons needs an even count >= 2");
        } else if (d.generator == "clusters") {
            if (c.model.arch != ArchKind::mlp) out.push_back("data.generator: clusters needs an mlp");
        } else if (d.generator == "tokens") {
            if (c.model.arch != ArchKind::transformer) out.push_back("data.generator: tokens needs a transformer");
            if (d.length == 0 || d.length > c.model.max_len) out.push_back("data.length: must lie in [1, model.max_len]");
            if (d.rule != "majority") out.push_back("data.rule: only majority is supported");
        } else {
            out.push_back("data.generator: expected one of two_moons|clusters|tokens, got '" + d.generator + "'");
        }
        if (d.n_train == 0) out.push_back("data.n_train: must be positive");
        if (d.n_test == 0) out.push_back("data.n_test: must be positive");
        if (!(d.noise >= 0.0)) out.push_back("data.noise: must be >= 0");
    }
    if (!(d.fraction > 0.0 && d.fraction <= 1.0)) out.push_back("data.fraction: must lie in (0, 1]");

    const RunSpec& r = c.run;
    if (r.out.empty()) out.push_back("run.out: must not be empty");
    if (!(r.probe_epsilon >= 0.0)) out.push_back("run.probe_epsilon: must be >= 0");
    if (r.probe_samples == 0) out.push_back("run.probe_samples: must be positive");
    if (r.grid_resolution < 2) out.push_back("run.grid_resolution: must be >= 2");
    if (!(r.grid.x0_min < r.grid.x0_max) || !(r.grid.x1_min < r.grid.x1_max)) {
        out.push_back("run.grid_*: each min must be below its max");
    }

    const SweepSpec& s = c.sweep;
    if (s.methods.empty()) out.push_back("sweep.methods: must not be empty");
    for (const auto& m : s.methods) {
        if (m != "smart" && m != "vanilla") out.push_back("sweep.methods: unknown method '" + m + "'");
    }
    if (s.lambdas.empty()) out.push_back("sweep.lambdas: must not be empty");
    for (double l : s.lambdas) {
        if (!(l >= 0.0)) out.push_back("sweep.lambdas: values must be >= 0");
    }
    if (s.mus.empty()) out.push_back("sweep.mus: must not be empty");
    for (double m : s.mus) {
        if (!(m >= 0.0)) out.push_back("sweep.mus: values must be >= 0");
    }
    if (s.fractions.empty()) out.push_back("sweep.fractions: must not be empty");
    for (double f : s.fractions) {
        if (!(f > 0.0 && f <= 1.0)) out.push_back("sweep.fractions: values must lie in (0, 1]");
    }
    if (s.seeds == 0) out.push_back("sweep.seeds: must be positive");
    return out;
}

std::string issues_message(const std::vector<std::string>& issues) {
    std::string msg = "invalid config:";
    for (std::size_t i = 0; i < issues.size(); ++i) msg += (i ? "; " : " ") + issues[i];
    return msg;
}

Json field_to_json(const Field& f, const RunConfig& c) {
    const std::string v = f.get(c);
    switch (f.kind) {
        case Kind::real:
            return parse_real(v);
        case Kind::integer:
            return parse_uint(v);
        case Kind::flag:
            return parse_flag(v);
        case Kind::text:
            return v;
        case Kind::integers: {
            Json out = Json::array();
            for (const auto& item : split_list(v)) out.push_back(parse_uint(item));
            return out;
        }
        case Kind::reals: {
            Json out = Json::array();
            for (const auto& item : split_list(v)) out.push_back(parse_real(item));
            return out;
        }
        case Kind::texts:
            return split_list(v);
    }
    return nullptr;
}

std::string json_to_text(const Field& f, const Json& j) {
    switch (f.kind) {
        case Kind::real:
            return format_double(j.get<double>());
        case Kind::integer:
            return std::to_string(j.get<std::uint64_t>());
        case Kind::flag:
            return j.get<bool>() ? "true" : "false";
        case Kind::text:
            return j.get<std::string>();
        case Kind::integers:
            return join(j.get<std::vector<std::uint64_t>>(), [](std::uint64_t x) { return std::to_string(x); });
        case Kind::reals:
            return join(j.get<std::vector<double>>(), format_double);
        case Kind::texts:
            return join(j.get<std::vector<std::string>>(), [](const std::string& s) { return s; });
    }
    return {};
}

Json section_to_json(const RunConfig& c, const std::string& section) {
    Json out = Json::object();
    for (const auto& f : fields()) {
        if (f.section == section) out[f.key] = field_to_json(f, c);
    }
    return out;
}

void section_from_json(RunConfig& c, const std::string& section, const Json& j) {
    std::vector<std::string> issues;
    for (const auto& [key, value] : j.items()) {
        const Field* f = find_field(section, key);
        if (!f) {
            issues.push_back(section + "." + key + ": unknown key");
            continue;
        }
        try {
            f->set(c, json_to_text(*f, value));
        } catch (const std::exception& err) {
            issues.push_back(f->name() + ": " + err.what());
        }
    }
    for (const auto& f : fields()) {
        if (f.section == section && !j.contains(f.key)) issues.push_back(f.name() + ": missing");
    }
    if (!issues.empty()) throw ConfigError(issues);
}

}  // namespace

ConfigError::ConfigError(std::vector<std::string> issues)
    : std::runtime_error(issues_message(issues)), issues_(std::move(issues)) {}

std::pair<std::string, std::string> parse_override(const std::string& text) {
    const auto eq = text.find('=');
    const auto dot = text.find('.');
    if (eq == std::string::npos || dot == std::string::npos || dot > eq) {
        throw ConfigError({"override '" + text + "': expected section.key=value"});
    }
    return {trim(text.substr(0, eq)), text.substr(eq + 1)};
}

RunConfig load_run_config(const std::optional<std::filesystem::path>& file, const Overrides& overrides) {
    RunConfig config;
    std::vector<std::string> issues;
    if (file) {
        std::ifstream in(*file);
        if (!in) throw ConfigError({"config file " + file->string() + ": cannot open"});
        boost::property_tree::ptree tree;
        try {
            boost::property_tree::ini_parser::read_ini(in, tree);
        } catch (const boost::property_tree::ini_parser_error& err) {
            throw ConfigError({"config file " + file->string() + " line " + std::to_string(err.line()) + ": " +
                               err.message()});
        }
        for (const auto& [section, body] : tree) {
            if (body.empty()) {
                issues.push_back(section + ": key outside any section");
                continue;
            }
            for (const auto& [key, value] : body) apply(config, section, key, value.data(), issues);
        }
    }
    for (const auto& [name, value] : overrides) {
        const auto dot = name.find('.');
        if (dot == std::string::npos) {
            issues.push_back(name + ": expected section.key");
            continue;
        }
        apply(config, name.substr(0, dot), name.substr(dot + 1), value, issues);
    }
    if (issues.empty()) issues = run_problems(config);
    if (!issues.empty()) throw ConfigError(issues);
    return config;
}

std::string to_ini(const RunConfig& config) {
    std::string out;
    std::string section;
    for (const auto& f : fields()) {
        if (f.section != section) {
            if (!section.empty()) out += "\n";
            section = f.section;
            out += "[" + section + "]\n";
        }
        out += f.key + " = " + f.get(config) + "\n";
    }
    return out;
}

void write_ini(const RunConfig& config, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw InputError("write_ini: cannot open " + path.string());
    out << to_ini(config);
    if (!out) throw InputError("write_ini: failed writing " + path.string());
}

std::vector<std::string> config_keys() {
    std::vector<std::string> out;
    for (const auto& f : fields()) out.push_back(f.name());
    return out;
}

Json model_config_to_json(const ModelConfig& config) {
    RunConfig c;
    c.model = config;
    return section_to_json(c, "model");
}

ModelConfig model_config_from_json(const Json& j) {
    RunConfig c;
    section_from_json(c, "model", j);
    return c.model;
}

Json smart_config_to_json(const SmartConfig& config, Method method) {
    RunConfig c;
    c.smart = config;
    c.method = method;
    return section_to_json(c, "smart");
}

std::pair<SmartConfig, Method> smart_config_from_json(const Json& j) {
    RunConfig c;
    section_from_json(c, "smart", j);
    return {c.smart, c.method};
}

Method method_from_string(const std::string& text) {
    if (text == "smart") return Method::smart;
    if (text == "vanilla") return Method::vanilla;
    throw InputError("unknown method '" + text + "'");
}

}  // namespace smart
