// Copyright (c) 2026 The smartft Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "smart/tensor.hpp"

namespace smart {

/// Counter-based generator: draw i is splitmix64(seed + (i + 1) * golden).
/// The full state is (seed, counter), so a stream can be persisted and
/// replayed exactly. Not thread-safe; use split() for independent children.
class Rng {
public:
    explicit Rng(std::uint64_t seed = 0, std::uint64_t counter = 0) noexcept
        : seed_(seed), counter_(counter) {}

    std::uint64_t next_u64() noexcept;
    /// Uniform on the open interval (0, 1) with 53 bits of resolution.
    double uniform() noexcept;
    double uniform(double lo, double hi) noexcept;
    /// Standard normal via Box-Muller: sqrt(-2 ln u1) * cos(2 pi u2). Consumes two draws.
    double normal() noexcept;
    /// Unbiased integer in [0, n).
    std::size_t below(std::size_t n);
    /// Child generator seeded from the next draw of this one.
    Rng split() noexcept { return Rng(next_u64()); }

    std::uint64_t seed() const noexcept { return seed_; }
    std::uint64_t counter() const noexcept { return counter_; }

    bool operator==(const Rng&) const = default;

private:
    std::uint64_t seed_;
    std::uint64_t counter_;
};

/// Deterministic seed derivation for named sub-streams (stream ids, step indices).
std::uint64_t derive_seed(std::uint64_t base, std::uint64_t stream) noexcept;

/// i.i.d. N(0, sigma^2) entries; sigma must be non-negative.
Tensor gaussian_tensor(Rng& rng, Shape shape, double sigma);
Tensor uniform_tensor(Rng& rng, Shape shape, double lo, double hi);
/// Fisher-Yates shuffle of 0..n-1.
std::vector<std::size_t> permutation(Rng& rng, std::size_t n);

}  // namespace smart
