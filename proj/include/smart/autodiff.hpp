// Copyright (c) 2026 The smartft Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

#include "smart/tensor.hpp"

namespace smart {

class Tape;

/// Handle to a node on a Tape. The node's value is fixed once recorded.
class Var {
public:
    Var() = default;

    const Tensor& value() const;
    bool requires_grad() const;
    Tape* tape() const noexcept { return tape_; }
    std::size_t id() const noexcept { return id_; }
    bool valid() const noexcept { return tape_ != nullptr; }

private:
    friend class Tape;
    Var(Tape* tape, std::size_t id) : tape_(tape), id_(id) {}

    Tape* tape_ = nullptr;
    std::size_t id_ = 0;
};

/// Result of a backward sweep: one adjoint per node that received gradient.
class Gradients {
public:
    /// Gradient with respect to v; a zero tensor of v's shape when v was not reached.
    Tensor of(const Var& v) const;

private:
    friend class Tape;
    const Tape* tape_ = nullptr;
    std::vector<Tensor> adjoints_;
};

/// Reverse-mode tape. Nodes are appended in evaluation order, so the record
/// order is already topological and one reverse pass visits each node once.
class Tape {
public:
    /// Accumulates a contribution into an operand's adjoint during backward.
    class Adjoints {
    public:
        void accumulate(const Var& operand, Tensor grad);

    private:
        friend class Tape;
        explicit Adjoints(Tape& tape) : tape_(tape) {}
        Tape& tape_;
        std::vector<Tensor> grads_;
    };

    using BackwardFn = std::function<void(const Tensor& grad_out, Adjoints& adjoints)>;

    Tape() = default;
    Tape(const Tape&) = delete;
    Tape& operator=(const Tape&) = delete;

    /// Differentiable input (parameters, perturbation targets).
    Var leaf(Tensor value);
    /// Non-differentiable input.
    Var constant(Tensor value);

    /// Appends a primitive application. The node requires grad iff any operand does;
    /// `backward` is dropped otherwise.
    Var record(Tensor value, std::span<const Var> operands, BackwardFn backward);

    /// Sweeps from a scalar output back to every node.
    Gradients backward(const Var& output);

    const Tensor& value(std::size_t id) const { return nodes_[id].value; }
    bool requires_grad(std::size_t id) const { return nodes_[id].requires_grad; }
    std::size_t size() const noexcept { return nodes_.size(); }

private:
    struct Node {
        Tensor value;
        bool requires_grad = false;
        BackwardFn backward;
    };

    std::vector<Node> nodes_;
};

/// Constant-valued copy: forward value unchanged, no adjoint flows to x.
Var stop_gradient(const Var& x);

Var add(const Var& a, const Var& b);
Var sub(const Var& a, const Var& b);
Var mul(const Var& a, const Var& b);
Var scale(const Var& a, double factor);
Var relu(const Var& a);
Var tanh(const Var& a);
Var square(const Var& a);
Var log_clamped(const Var& a, double lo);
Var matmul(const Var& a, const Var& b);
Var transpose(const Var& a);
Var add_row(const Var& a, const Var& row);
Var mul_row(const Var& a, const Var& row);
Var softmax_rows(const Var& a);
Var mean_rows(const Var& a);
Var slice_cols(const Var& a, std::size_t start, std::size_t count);
Var concat_cols(std::span<const Var> parts);
Var concat_rows(std::span<const Var> parts);
Var gather_rows(const Var& table, std::span<const std::size_t> ids);
Var layer_norm_rows(const Var& a, double eps);
Var slice_example(const Var& batch, std::size_t i);
Var reshape(const Var& a, Shape shape);
/// Scalar sum of all entries, shape [1].
Var sum(const Var& a);

}  // namespace smart
