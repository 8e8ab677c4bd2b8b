// Copyright (c) 2026 The smartft Authors
// SPDX-License-Identifier: Apache-2.0

#include "smart/rng.hpp"

#include <cmath>
#include <numbers>
#include <numeric>

#include "smart/error.hpp"

namespace smart {

namespace {

constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ULL;

std::uint64_t splitmix_finalize(std::uint64_t z) noexcept {
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

}  // namespace

std::uint64_t Rng::next_u64() noexcept {
    ++counter_;
    return splitmix_finalize(seed_ + counter_ * kGolden);
}

double Rng::uniform() noexcept {
    return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
}

double Rng::uniform(double lo, double hi) noexcept { return lo + (hi - lo) * uniform(); }

double Rng::normal() noexcept {
    const double u1 = uniform();
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

std::size_t Rng::below(std::size_t n) {
    if (n == 0) throw ContractViolation("Rng::below: empty range");
    const std::uint64_t bound = static_cast<std::uint64_t>(n);
    const std::uint64_t limit = -bound % bound;  // 2^64 mod n
    for (;;) {
        const std::uint64_t x = next_u64();
        const __uint128_t product = static_cast<__uint128_t>(x) * bound;
        if (static_cast<std::uint64_t>(product) >= limit) return static_cast<std::size_t>(product >> 64);
    }
}

std::uint64_t derive_seed(std::uint64_t base, std::uint64_t stream) noexcept {
    return splitmix_finalize(splitmix_finalize(base ^ kGolden) + stream * kGolden);
}

Tensor gaussian_tensor(Rng& rng, Shape shape, double sigma) {
    if (!(sigma >= 0.0)) throw ContractViolation("gaussian_tensor: sigma must be >= 0");
    Tensor out(std::move(shape));
    if (sigma == 0.0) return out;
    for (double& x : out.data()) x = sigma * rng.normal();
    return out;
}

Tensor uniform_tensor(Rng& rng, Shape shape, double lo, double hi) {
    Tensor out(std::move(shape));
    for (double& x : out.data()) x = rng.uniform(lo, hi);
    return out;
}

std::vector<std::size_t> permutation(Rng& rng, std::size_t n) {
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    for (std::size_t i = n; i > 1; --i) std::swap(order[i - 1], order[rng.below(i)]);
    return order;
}

}  // namespace smart
