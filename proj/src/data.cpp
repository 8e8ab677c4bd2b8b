// Copyright (c) 2026 The smartft Authors
// SPDX-License-Identifier: Apache-2.0

#include "smart/data.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>

#include <nlohmann/json.hpp>

#include "smart/error.hpp"
#include "smart/rng.hpp"

namespace smart {

namespace {

using Json = nlohmann::ordered_json;

std::string format_real(double x) {
    std::ostringstream os;
    os.precision(17);
    os << x;
    return os.str();
}

bool is_tokens(const Example& e) { return std::holds_alternative<std::vector<std::size_t>>(e.input); }

std::size_t input_length(const Example& e) {
    return std::visit([](const auto& v) { return v.size(); }, e.input);
}

}  // namespace

bool Dataset::has_soft_labels() const {
    return !examples.empty() &&
           std::all_of(examples.begin(), examples.end(), [](const Example& e) { return !e.soft_label.empty(); });
}

void Dataset::validate() const {
    if (examples.empty()) throw InputError("dataset: no examples");
    const Example& first = examples.front();
    const bool tokens = is_tokens(first);
    const std::size_t length = input_length(first);
    const bool soft = !first.soft_label.empty();
    if (task == TaskKind::classification && classes < 2) throw InputError("dataset: classification needs >= 2 classes");
    for (std::size_t i = 0; i < examples.size(); ++i) {
        const Example& e = examples[i];
        const std::string where = "dataset example " + std::to_string(i) + ": ";
        if (is_tokens(e) != tokens) throw InputError(where + "mixes raw features and token inputs");
        if (input_length(e) != length || length == 0) throw InputError(where + "input length differs from the first example");
        if (task == TaskKind::classification) {
            const auto* cls = std::get_if<std::size_t>(&e.label);
            if (!cls) throw InputError(where + "classification example carries a real label");
            if (*cls >= classes) throw InputError(where + "label " + std::to_string(*cls) + " outside " + std::to_string(classes) + " classes");
        } else if (!std::holds_alternative<double>(e.label)) {
            throw InputError(where + "regression example carries a class label");
        }
        if (e.soft_label.empty() == soft) throw InputError(where + "soft labels present on some examples only");
        if (soft) {
            if (e.soft_label.size() != classes) throw InputError(where + "soft label length differs from class count");
            double total = 0.0;
            for (double p : e.soft_label) {
                if (p < 0.0) throw InputError(where + "negative soft-label probability");
                total += p;
            }
            if (std::abs(total - 1.0) > 1e-9) throw InputError(where + "soft label does not sum to 1");
        }
    }
}

Batch make_batch(const Dataset& data, std::span<const std::size_t> indices) {
    if (indices.empty()) throw ContractViolation("make_batch: empty batch");
    const Example& first = data.examples.at(indices.front());
    Batch batch;
    const bool soft = data.has_soft_labels();
    if (is_tokens(first)) {
        TokenBatch tokens;
        tokens.seq_len = input_length(first);
        tokens.ids.reserve(indices.size() * tokens.seq_len);
        for (auto i : indices) {
            const auto& ids = std::get<std::vector<std::size_t>>(data.examples.at(i).input);
            tokens.ids.insert(tokens.ids.end(), ids.begin(), ids.end());
        }
        batch.inputs = std::move(tokens);
    } else {
        const std::size_t dim = input_length(first);
        Tensor features({indices.size(), dim});
        for (std::size_t r = 0; r < indices.size(); ++r) {
            const auto& x = std::get<std::vector<double>>(data.examples.at(indices[r]).input);
            if (x.size() != dim) throw InputError("make_batch: ragged feature vectors");
            std::copy(x.begin(), x.end(), features.data().begin() + static_cast<std::ptrdiff_t>(r * dim));
        }
        batch.inputs = std::move(features);
    }
    if (data.task == TaskKind::classification) {
        std::vector<std::size_t> labels;
        labels.reserve(indices.size());
        for (auto i : indices) labels.push_back(std::get<std::size_t>(data.examples.at(i).label));
        batch.labels = std::move(labels);
    } else {
        std::vector<double> targets;
        targets.reserve(indices.size());
        for (auto i : indices) targets.push_back(std::get<double>(data.examples.at(i).label));
        batch.labels = std::move(targets);
    }
    if (soft) {
        for (auto i : indices) {
            const auto& p = data.examples.at(i).soft_label;
            batch.soft_labels.insert(batch.soft_labels.end(), p.begin(), p.end());
        }
    }
    return batch;
}

Batch make_batch(const Dataset& data) {
    std::vector<std::size_t> all(data.size());
    for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
    return make_batch(data, all);
}

std::pair<double, double> moon_point(std::size_t cls, double t) {
    if (cls == 0) return {std::cos(t), std::sin(t)};
    return {1.0 - std::cos(t), 0.5 - std::sin(t)};
}

Dataset gen_two_moons(std::size_t n, double noise_std, std::uint64_t seed) {
    if (n < 2 || n % 2 != 0) throw InputError("gen_two_moons: n must be even and >= 2");
    if (!(noise_std >= 0.0)) throw InputError("gen_two_moons: noise must be >= 0");
    Rng rng(seed);
    Dataset data;
    data.task = TaskKind::classification;
    data.classes = 2;
    data.provenance = {"two_moons", seed, {{"n", std::to_string(n)}, {"noise", format_real(noise_std)}}};
    data.examples.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        const std::size_t cls = i % 2;
        const double t = rng.uniform(0.0, std::numbers::pi);
        auto [x0, x1] = moon_point(cls, t);
        if (noise_std > 0.0) {
            x0 += noise_std * rng.normal();
            x1 += noise_std * rng.normal();
        }
        data.examples.push_back(Example{std::vector<double>{x0, x1}, cls, {}});
    }
    return data;
}

Dataset gen_cluster_classification(std::size_t n, std::size_t classes, std::size_t dim, double separation,
                                   double noise, std::uint64_t seed, bool soft_labels) {
    if (classes < 2) throw InputError("gen_cluster_classification: need >= 2 classes");
    if (dim == 0 || classes > 2 * dim) throw InputError("gen_cluster_classification: classes must be <= 2 * dim");
    if (n < classes) throw InputError("gen_cluster_classification: fewer examples than classes");
    if (!(noise >= 0.0)) throw InputError("gen_cluster_classification: noise must be >= 0");
    std::vector<std::vector<double>> centroids(classes, std::vector<double>(dim, 0.0));
    for (std::size_t j = 0; j < classes; ++j) centroids[j][j % dim] = ((j / dim) % 2 == 0 ? 1.0 : -1.0) * separation;

    Rng rng(seed);
    Dataset data;
    data.task = TaskKind::classification;
    data.classes = classes;
    data.provenance = {"clusters",
                       seed,
                       {{"n", std::to_string(n)},
                        {"classes", std::to_string(classes)},
                        {"dim", std::to_string(dim)},
                        {"separation", format_real(separation)},
                        {"noise", format_real(noise)},
                        {"soft_labels", soft_labels ? "1" : "0"}}};
    data.examples.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        const std::size_t cls = i % classes;
        std::vector<double> x = centroids[cls];
        for (double& v : x) v += noise * rng.normal();
        Example e{x, cls, {}};
        if (soft_labels) {
            std::vector<double> p(classes, 0.0);
            if (noise == 0.0) {
                p[cls] = 1.0;
            } else {
                std::vector<double> logit(classes);
                for (std::size_t j = 0; j < classes; ++j) {
                    double d2 = 0.0;
                    for (std::size_t k = 0; k < dim; ++k) d2 += (x[k] - centroids[j][k]) * (x[k] - centroids[j][k]);
                    logit[j] = -d2 / (2.0 * noise * noise);
                }
                const Tensor probs = softmax_rows(Tensor({1, classes}, logit));
                p.assign(probs.data().begin(), probs.data().end());
            }
            e.soft_label = std::move(p);
        }
        data.examples.push_back(std::move(e));
    }
    return data;
}

std::size_t majority_label(std::span<const std::size_t> tokens, std::size_t vocab) {
    std::vector<std::size_t> counts(vocab, 0);
    for (auto t : tokens) {
        if (t >= vocab) throw InputError("majority_label: token outside vocabulary");
        ++counts[t];
    }
    return static_cast<std::size_t>(std::max_element(counts.begin(), counts.end()) - counts.begin());
}

Dataset gen_token_sequences(std::size_t n, std::size_t vocab, std::size_t length, const std::string& rule,
                            std::uint64_t seed) {
    if (rule != "majority") throw InputError("gen_token_sequences: unknown labeling rule '" + rule + "'");
    if (n == 0 || vocab < 2 || length == 0) throw InputError("gen_token_sequences: need n >= 1, vocab >= 2, length >= 1");
    Rng rng(seed);
    Dataset data;
    data.task = TaskKind::classification;
    data.classes = vocab;
    data.provenance = {"tokens",
                       seed,
                       {{"n", std::to_string(n)},
                        {"vocab", std::to_string(vocab)},
                        {"length", std::to_string(length)},
                        {"rule", rule}}};
    data.examples.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        std::vector<std::size_t> seq(length);
        for (auto& t : seq) t = rng.below(vocab);
        const std::size_t label = majority_label(seq, vocab);
        data.examples.push_back(Example{std::move(seq), label, {}});
    }
    return data;
}

std::vector<Dataset> subsample_splits(const Dataset& data, std::span<const double> fractions, std::uint64_t seed) {
    const std::size_t n = data.size();
    std::vector<std::size_t> counts;
    for (double f : fractions) {
        if (!(f > 0.0 && f <= 1.0)) throw InputError("subsample_splits: fraction " + format_real(f) + " outside (0, 1]");
        const double want = f * static_cast<double>(n);
        if (want < 1.0) throw InputError("subsample_splits: fraction " + format_real(f) + " selects no examples");
        counts.push_back(std::max<std::size_t>(1, static_cast<std::size_t>(std::floor(want + 0.5))));
    }
    Rng rng(seed);
    std::vector<std::size_t> order = permutation(rng, n);
    if (data.task == TaskKind::classification) {
        // Interleave classes so every prefix is balanced to within one example.
        std::vector<std::size_t> seen(data.classes, 0), totals(data.classes, 0);
        for (const auto& e : data.examples) ++totals[std::get<std::size_t>(e.label)];
        struct Keyed {
            double key;
            std::size_t cls;
            std::size_t index;
        };
        std::vector<Keyed> keyed;
        keyed.reserve(n);
        for (auto i : order) {
            const std::size_t cls = std::get<std::size_t>(data.examples[i].label);
            const double key = (static_cast<double>(seen[cls]++) + 0.5) / static_cast<double>(totals[cls]);
            keyed.push_back({key, cls, i});
        }
        std::stable_sort(keyed.begin(), keyed.end(), [](const Keyed& a, const Keyed& b) {
            return a.key != b.key ? a.key < b.key : a.cls < b.cls;
        });
        for (std::size_t i = 0; i < n; ++i) order[i] = keyed[i].index;
    }
    std::vector<Dataset> splits;
    splits.reserve(counts.size());
    for (std::size_t s = 0; s < counts.size(); ++s) {
        Dataset split;
        split.task = data.task;
        split.classes = data.classes;
        split.provenance = data.provenance;
        split.provenance.params["split_fraction"] = format_real(fractions[s]);
        split.provenance.params["split_seed"] = std::to_string(seed);
        split.examples.reserve(counts[s]);
        for (std::size_t i = 0; i < counts[s]; ++i) split.examples.push_back(data.examples[order[i]]);
        splits.push_back(std::move(split));
    }
    return splits;
}

void write_dataset(const Dataset& data, const std::filesystem::path& path) {
    data.validate();
    std::ofstream out(path, std::ios::binary);
    if (!out) throw InputError("write_dataset: cannot open " + path.string());
    for (const Example& e : data.examples) {
        Json record;
        if (const auto* x = std::get_if<std::vector<double>>(&e.input)) {
            record["x"] = *x;
        } else {
            record["tokens"] = std::get<std::vector<std::size_t>>(e.input);
        }
        if (const auto* cls = std::get_if<std::size_t>(&e.label)) {
            record["y"] = *cls;
        } else {
            record["y"] = std::get<double>(e.label);
        }
        if (!e.soft_label.empty()) record["p"] = e.soft_label;
        out << record.dump() << '\n';
    }
    if (!out) throw InputError("write_dataset: failed writing " + path.string());
}

Dataset read_dataset(const std::filesystem::path& path, std::size_t classes) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw LoadError("read_dataset: cannot open " + path.string());
    Dataset data;
    data.provenance.generator = "file";
    data.provenance.params["path"] = path.string();
    std::string line;
    std::size_t line_no = 0;
    bool first = true;
    bool tokens = false, real_label = false;
    std::size_t max_label = 0, soft_width = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        const std::string where = path.string() + ":" + std::to_string(line_no) + ": ";
        Json record;
        try {
            record = Json::parse(line);
        } catch (const Json::exception& err) {
            throw LoadError(where + "malformed record (" + err.what() + ")");
        }
        if (!record.is_object() || !record.contains("y")) throw LoadError(where + "record needs an object with \"y\"");
        const bool has_x = record.contains("x"), has_tokens = record.contains("tokens");
        if (has_x == has_tokens) throw LoadError(where + "record needs exactly one of \"x\" or \"tokens\"");
        for (const auto& [key, value] : record.items()) {
            if (key != "x" && key != "tokens" && key != "y" && key != "p") throw LoadError(where + "unknown field \"" + key + "\"");
        }
        const auto& y = record["y"];
        if (!y.is_number()) throw LoadError(where + "\"y\" must be a number");
        const bool this_real = !(y.is_number_unsigned() || (y.is_number_integer() && y.get<long long>() >= 0));
        if (first) {
            tokens = has_tokens;
            real_label = this_real;
        } else if (tokens != has_tokens || real_label != this_real) {
            throw LoadError(where + "record schema differs from the first record");
        }
        Example e;
        try {
            if (has_tokens) {
                e.input = record["tokens"].get<std::vector<std::size_t>>();
            } else {
                e.input = record["x"].get<std::vector<double>>();
            }
            if (real_label) {
                e.label = y.get<double>();
            } else {
                e.label = y.get<std::size_t>();
                max_label = std::max(max_label, std::get<std::size_t>(e.label));
            }
            if (record.contains("p")) e.soft_label = record["p"].get<std::vector<double>>();
        } catch (const Json::exception& err) {
            throw LoadError(where + "bad field value (" + err.what() + ")");
        }
        if (first) {
            soft_width = e.soft_label.size();
        } else if ((soft_width == 0) != e.soft_label.empty()) {
            throw LoadError(where + "record schema differs from the first record");
        }
        data.examples.push_back(std::move(e));
        first = false;
    }
    if (data.examples.empty()) throw LoadError("read_dataset: " + path.string() + " holds no records");
    data.task = real_label ? TaskKind::regression : TaskKind::classification;
    if (!real_label) data.classes = classes != 0 ? classes : std::max(max_label + 1, std::max<std::size_t>(soft_width, 2));
    try {
        data.validate();
    } catch (const InputError& err) {
        throw LoadError(path.string() + ": " + err.what());
    }
    return data;
}

}  // namespace smart
