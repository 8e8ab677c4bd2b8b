// Copyright (c) 2026 The smartft Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "smart/losses.hpp"
#include "smart/model.hpp"

namespace smart {

struct Example {
    /// Raw feature vector or token-id sequence.
    std::variant<std::vector<double>, std::vector<std::size_t>> input;
    /// Class index or real target.
    std::variant<std::size_t, double> label;
    /// Annotation distribution over classes; empty when absent.
    std::vector<double> soft_label;

    bool operator==(const Example&) const = default;
};

/// Enough to regenerate a synthetic dataset bit-identically.
struct Provenance {
    std::string generator;
    std::uint64_t seed = 0;
    std::map<std::string, std::string> params;

    bool operator==(const Provenance&) const = default;
};

struct Dataset {
    TaskKind task = TaskKind::classification;
    std::size_t classes = 0;  // 0 for regression
    std::vector<Example> examples;
    Provenance provenance;

    std::size_t size() const noexcept { return examples.size(); }
    bool has_soft_labels() const;
    /// Throws InputError on mixed input kinds, ragged inputs, label/task mismatch or bad soft labels.
    void validate() const;

    bool operator==(const Dataset&) const = default;
};

struct Batch {
    Inputs inputs;
    Labels labels;
    /// [B x k] soft labels when every example carries one.
    std::vector<double> soft_labels;
};

Batch make_batch(const Dataset& data, std::span<const std::size_t> indices);
Batch make_batch(const Dataset& data);

/// Class-0 arc (cos t, sin t) and class-1 arc (1 - cos t, 0.5 - sin t).
std::pair<double, double> moon_point(std::size_t cls, double t);

/// n/2 points per moon, t ~ U[0, pi], plus N(0, noise_std^2) per coordinate.
Dataset gen_two_moons(std::size_t n, double noise_std, std::uint64_t seed);

/// Gaussian clusters around centroids separation * (+/- e_j); label i mod k.
/// With soft_labels the annotation distribution is the mixture posterior.
Dataset gen_cluster_classification(std::size_t n, std::size_t classes, std::size_t dim, double separation,
                                   double noise, std::uint64_t seed, bool soft_labels = false);

/// Uniform random token sequences labeled by `rule` ("majority": most frequent
/// token, ties to the lowest id). Classes equal the vocabulary size.
Dataset gen_token_sequences(std::size_t n, std::size_t vocab, std::size_t length, const std::string& rule,
                            std::uint64_t seed);

std::size_t majority_label(std::span<const std::size_t> tokens, std::size_t vocab);

/// Nested subsets drawn from one class-stratified shuffled order; split i holds
/// round_half_up(fraction_i * n) examples.
std::vector<Dataset> subsample_splits(const Dataset& data, std::span<const double> fractions, std::uint64_t seed);

/// One JSON object per line: {"x":[...]} or {"tokens":[...]}, "y", optional "p".
void write_dataset(const Dataset& data, const std::filesystem::path& path);
/// `classes` overrides the class count inferred from the labels when non-zero.
Dataset read_dataset(const std::filesystem::path& path, std::size_t classes = 0);

}  // namespace smart
