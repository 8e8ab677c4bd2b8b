// Copyright (c) 2026 The smartft Authors
// SPDX-License-Identifier: Apache-2.0

#include "smart/autodiff.hpp"

#include <algorithm>
#include <cmath>

#include "smart/error.hpp"

namespace smart {

namespace {

Tape& common_tape(std::initializer_list<const Var*> vars) {
    Tape* tape = nullptr;
    for (const Var* v : vars) {
        if (!v->valid()) throw ContractViolation("autodiff: operand is not bound to a tape");
        if (tape == nullptr) {
            tape = v->tape();
        } else if (tape != v->tape()) {
            throw ContractViolation("autodiff: operands live on different tapes");
        }
    }
    return *tape;
}

Tape& common_tape(std::span<const Var> vars) {
    if (vars.empty()) throw ContractViolation("autodiff: no operands");
    Tape* tape = vars.front().tape();
    for (const Var& v : vars) {
        if (!v.valid()) throw ContractViolation("autodiff: operand is not bound to a tape");
        if (v.tape() != tape) throw ContractViolation("autodiff: operands live on different tapes");
    }
    return *tape;
}

// Column sums of a matrix, returned with the shape of `like`.
Tensor column_sums(const Tensor& g, const Shape& like) {
    Tensor out(like);
    const std::size_t c = g.cols();
    for (std::size_t i = 0; i < g.rows(); ++i)
        for (std::size_t j = 0; j < c; ++j) out[j] += g.at(i, j);
    return out;
}

}  // namespace

const Tensor& Var::value() const {
    if (!tape_) throw ContractViolation("Var::value on unbound variable");
    return tape_->value(id_);
}

bool Var::requires_grad() const { return tape_ && tape_->requires_grad(id_); }

Tensor Gradients::of(const Var& v) const {
    if (v.tape() != tape_) throw ContractViolation("Gradients::of: variable from another tape");
    if (v.id() < adjoints_.size() && !adjoints_[v.id()].empty()) return adjoints_[v.id()];
    return Tensor(v.value().shape());
}

void Tape::Adjoints::accumulate(const Var& operand, Tensor grad) {
    if (!operand.requires_grad()) return;
    Tensor& slot = grads_[operand.id()];
    if (slot.empty()) {
        slot = std::move(grad);
        return;
    }
    auto dst = slot.data();
    auto src = grad.data();
    for (std::size_t i = 0; i < dst.size(); ++i) dst[i] += src[i];
}

Var Tape::leaf(Tensor value) {
    nodes_.push_back(Node{std::move(value), true, {}});
    return Var(this, nodes_.size() - 1);
}

Var Tape::constant(Tensor value) {
    nodes_.push_back(Node{std::move(value), false, {}});
    return Var(this, nodes_.size() - 1);
}

Var Tape::record(Tensor value, std::span<const Var> operands, BackwardFn backward) {
    bool needs = false;
    for (const Var& v : operands) {
        if (v.tape() != this) throw ContractViolation("Tape::record: operand from another tape");
        needs = needs || v.requires_grad();
    }
    nodes_.push_back(Node{std::move(value), needs, needs ? std::move(backward) : BackwardFn{}});
    return Var(this, nodes_.size() - 1);
}

Gradients Tape::backward(const Var& output) {
    if (output.tape() != this) throw ContractViolation("Tape::backward: output from another tape");
    if (output.value().size() != 1) {
        throw ContractViolation("Tape::backward: output must be scalar, got shape " +
                                shape_to_string(output.value().shape()));
    }
    Adjoints adjoints(*this);
    adjoints.grads_.resize(nodes_.size());
    adjoints.grads_[output.id()] = Tensor(output.value().shape(), 1.0);
    for (std::size_t id = output.id() + 1; id-- > 0;) {
        const Node& node = nodes_[id];
        if (!node.requires_grad || !node.backward || adjoints.grads_[id].empty()) continue;
        const Tensor grad = adjoints.grads_[id];
        node.backward(grad, adjoints);
    }
    Gradients result;
    result.tape_ = this;
    result.adjoints_ = std::move(adjoints.grads_);
    return result;
}

Var stop_gradient(const Var& x) {
    Tape& tape = common_tape({&x});
    return tape.constant(x.value());
}

Var add(const Var& a, const Var& b) {
    Tape& tape = common_tape({&a, &b});
    const Var ops[] = {a, b};
    return tape.record(add(a.value(), b.value()), ops, [a, b](const Tensor& g, Tape::Adjoints& adj) {
        adj.accumulate(a, g);
        adj.accumulate(b, g);
    });
}

Var sub(const Var& a, const Var& b) {
    Tape& tape = common_tape({&a, &b});
    const Var ops[] = {a, b};
    return tape.record(sub(a.value(), b.value()), ops, [a, b](const Tensor& g, Tape::Adjoints& adj) {
        adj.accumulate(a, g);
        adj.accumulate(b, scale(g, -1.0));
    });
}

Var mul(const Var& a, const Var& b) {
    Tape& tape = common_tape({&a, &b});
    const Var ops[] = {a, b};
    return tape.record(mul(a.value(), b.value()), ops, [a, b](const Tensor& g, Tape::Adjoints& adj) {
        if (a.requires_grad()) adj.accumulate(a, mul(g, b.value()));
        if (b.requires_grad()) adj.accumulate(b, mul(g, a.value()));
    });
}

Var scale(const Var& a, double factor) {
    Tape& tape = common_tape({&a});
    const Var ops[] = {a};
    return tape.record(scale(a.value(), factor), ops, [a, factor](const Tensor& g, Tape::Adjoints& adj) {
        adj.accumulate(a, scale(g, factor));
    });
}

Var relu(const Var& a) {
    Tape& tape = common_tape({&a});
    const Var ops[] = {a};
    return tape.record(relu(a.value()), ops, [a](const Tensor& g, Tape::Adjoints& adj) {
        Tensor out = g;
        auto x = a.value().data();
        auto d = out.data();
        for (std::size_t i = 0; i < d.size(); ++i)
            if (!(x[i] > 0.0)) d[i] = 0.0;
        adj.accumulate(a, std::move(out));
    });
}

Var tanh(const Var& a) {
    Tape& tape = common_tape({&a});
    const Var ops[] = {a};
    Tensor y = tanh(a.value());
    if (!a.requires_grad()) return tape.record(std::move(y), ops, {});
    return tape.record(y, ops, [a, y](const Tensor& g, Tape::Adjoints& adj) {
        Tensor d = g;
        auto yv = y.data();
        auto dv = d.data();
        for (std::size_t i = 0; i < dv.size(); ++i) dv[i] *= 1.0 - yv[i] * yv[i];
        adj.accumulate(a, std::move(d));
    });
}

Var square(const Var& a) {
    Tape& tape = common_tape({&a});
    const Var ops[] = {a};
    return tape.record(square(a.value()), ops, [a](const Tensor& g, Tape::Adjoints& adj) {
        adj.accumulate(a, scale(mul(g, a.value()), 2.0));
    });
}

Var log_clamped(const Var& a, double lo) {
    Tape& tape = common_tape({&a});
    const Var ops[] = {a};
    return tape.record(log_clamped(a.value(), lo), ops, [a, lo](const Tensor& g, Tape::Adjoints& adj) {
        Tensor d = g;
        auto x = a.value().data();
        auto dv = d.data();
        for (std::size_t i = 0; i < dv.size(); ++i) dv[i] = (x[i] >= lo && x[i] <= 1.0) ? dv[i] / x[i] : 0.0;
        adj.accumulate(a, std::move(d));
    });
}

Var matmul(const Var& a, const Var& b) {
    Tape& tape = common_tape({&a, &b});
    const Var ops[] = {a, b};
    return tape.record(matmul(a.value(), b.value()), ops, [a, b](const Tensor& g, Tape::Adjoints& adj) {
        if (a.requires_grad()) adj.accumulate(a, matmul(g, transpose(b.value())));
        if (b.requires_grad()) adj.accumulate(b, matmul(transpose(a.value()), g));
    });
}

Var transpose(const Var& a) {
    Tape& tape = common_tape({&a});
    const Var ops[] = {a};
    return tape.record(transpose(a.value()), ops,
                       [a](const Tensor& g, Tape::Adjoints& adj) { adj.accumulate(a, transpose(g)); });
}

Var add_row(const Var& a, const Var& row) {
    Tape& tape = common_tape({&a, &row});
    const Var ops[] = {a, row};
    return tape.record(add_row(a.value(), row.value()), ops, [a, row](const Tensor& g, Tape::Adjoints& adj) {
        adj.accumulate(a, g);
        if (row.requires_grad()) adj.accumulate(row, column_sums(g, row.value().shape()));
    });
}

Var mul_row(const Var& a, const Var& row) {
    Tape& tape = common_tape({&a, &row});
    const Var ops[] = {a, row};
    return tape.record(mul_row(a.value(), row.value()), ops, [a, row](const Tensor& g, Tape::Adjoints& adj) {
        if (a.requires_grad()) adj.accumulate(a, mul_row(g, row.value()));
        if (row.requires_grad()) adj.accumulate(row, column_sums(mul(g, a.value()), row.value().shape()));
    });
}

Var softmax_rows(const Var& a) {
    Tape& tape = common_tape({&a});
    const Var ops[] = {a};
    Tensor y = softmax_rows(a.value());
    if (!a.requires_grad()) return tape.record(std::move(y), ops, {});
    return tape.record(y, ops, [a, y](const Tensor& g, Tape::Adjoints& adj) {
        const std::size_t r = y.rows(), c = y.cols();
        Tensor d({r, c});
        for (std::size_t i = 0; i < r; ++i) {
            double dot = 0.0;
            for (std::size_t j = 0; j < c; ++j) dot += g.at(i, j) * y.at(i, j);
            for (std::size_t j = 0; j < c; ++j) d.at(i, j) = y.at(i, j) * (g.at(i, j) - dot);
        }
        adj.accumulate(a, std::move(d));
    });
}

Var mean_rows(const Var& a) {
    Tape& tape = common_tape({&a});
    const Var ops[] = {a};
    return tape.record(mean_rows(a.value()), ops, [a](const Tensor& g, Tape::Adjoints& adj) {
        const std::size_t r = a.value().rows(), c = a.value().cols();
        Tensor d({r, c});
        for (std::size_t i = 0; i < r; ++i)
            for (std::size_t j = 0; j < c; ++j) d.at(i, j) = g[j] / static_cast<double>(r);
        adj.accumulate(a, std::move(d));
    });
}

Var slice_cols(const Var& a, std::size_t start, std::size_t count) {
    Tape& tape = common_tape({&a});
    const Var ops[] = {a};
    return tape.record(slice_cols(a.value(), start, count), ops,
                       [a, start, count](const Tensor& g, Tape::Adjoints& adj) {
                           Tensor d(a.value().shape());
                           for (std::size_t i = 0; i < g.rows(); ++i)
                               for (std::size_t j = 0; j < count; ++j) d.at(i, start + j) = g.at(i, j);
                           adj.accumulate(a, std::move(d));
                       });
}

Var concat_cols(std::span<const Var> parts) {
    Tape& tape = common_tape(parts);
    std::vector<Tensor> values;
    values.reserve(parts.size());
    for (const Var& p : parts) values.push_back(p.value());
    std::vector<Var> keep(parts.begin(), parts.end());
    return tape.record(concat_cols(values), parts, [keep](const Tensor& g, Tape::Adjoints& adj) {
        std::size_t offset = 0;
        for (const Var& p : keep) {
            const std::size_t c = p.value().cols();
            if (p.requires_grad()) adj.accumulate(p, slice_cols(g, offset, c));
            offset += c;
        }
    });
}

Var concat_rows(std::span<const Var> parts) {
    Tape& tape = common_tape(parts);
    std::vector<Tensor> values;
    values.reserve(parts.size());
    for (const Var& p : parts) values.push_back(p.value());
    std::vector<Var> keep(parts.begin(), parts.end());
    return tape.record(concat_rows(values), parts, [keep](const Tensor& g, Tape::Adjoints& adj) {
        std::size_t offset = 0;
        const std::size_t c = g.cols();
        for (const Var& p : keep) {
            const std::size_t r = p.value().rows();
            if (p.requires_grad()) {
                auto src = g.data().subspan(offset * c, r * c);
                adj.accumulate(p, Tensor({r, c}, std::vector<double>(src.begin(), src.end())));
            }
            offset += r;
        }
    });
}

Var gather_rows(const Var& table, std::span<const std::size_t> ids) {
    Tape& tape = common_tape({&table});
    const Var ops[] = {table};
    std::vector<std::size_t> keep(ids.begin(), ids.end());
    return tape.record(gather_rows(table.value(), ids), ops, [table, keep](const Tensor& g, Tape::Adjoints& adj) {
        Tensor d(table.value().shape());
        const std::size_t c = g.cols();
        for (std::size_t i = 0; i < keep.size(); ++i)
            for (std::size_t j = 0; j < c; ++j) d.at(keep[i], j) += g.at(i, j);
        adj.accumulate(table, std::move(d));
    });
}

Var layer_norm_rows(const Var& a, double eps) {
    Tape& tape = common_tape({&a});
    const Var ops[] = {a};
    Tensor y = layer_norm_rows(a.value(), eps);
    if (!a.requires_grad()) return tape.record(std::move(y), ops, {});
    return tape.record(y, ops, [a, y, eps](const Tensor& g, Tape::Adjoints& adj) {
        const Tensor& x = a.value();
        const std::size_t r = x.rows(), c = x.cols();
        const double n = static_cast<double>(c);
        Tensor d({r, c});
        for (std::size_t i = 0; i < r; ++i) {
            double mean = 0.0;
            for (std::size_t j = 0; j < c; ++j) mean += x.at(i, j);
            mean /= n;
            double var = 0.0;
            for (std::size_t j = 0; j < c; ++j) var += (x.at(i, j) - mean) * (x.at(i, j) - mean);
            var /= n;
            const double inv = 1.0 / std::sqrt(var + eps);
            double g_mean = 0.0, gy_mean = 0.0;
            for (std::size_t j = 0; j < c; ++j) {
                g_mean += g.at(i, j);
                gy_mean += g.at(i, j) * y.at(i, j);
            }
            g_mean /= n;
            gy_mean /= n;
            for (std::size_t j = 0; j < c; ++j) d.at(i, j) = inv * (g.at(i, j) - g_mean - y.at(i, j) * gy_mean);
        }
        adj.accumulate(a, std::move(d));
    });
}

Var slice_example(const Var& batch, std::size_t i) {
    Tape& tape = common_tape({&batch});
    const Var ops[] = {batch};
    return tape.record(slice_example(batch.value(), i), ops, [batch, i](const Tensor& g, Tape::Adjoints& adj) {
        Tensor d(batch.value().shape());
        const std::size_t n = g.size();
        std::copy(g.data().begin(), g.data().end(), d.data().begin() + static_cast<std::ptrdiff_t>(i * n));
        adj.accumulate(batch, std::move(d));
    });
}

Var reshape(const Var& a, Shape shape) {
    Tape& tape = common_tape({&a});
    const Var ops[] = {a};
    return tape.record(a.value().reshaped(std::move(shape)), ops, [a](const Tensor& g, Tape::Adjoints& adj) {
        adj.accumulate(a, g.reshaped(a.value().shape()));
    });
}

Var sum(const Var& a) {
    Tape& tape = common_tape({&a});
    const Var ops[] = {a};
    return tape.record(Tensor::scalar(sum(a.value())), ops, [a](const Tensor& g, Tape::Adjoints& adj) {
        adj.accumulate(a, Tensor(a.value().shape(), g.item()));
    });
}

}  // namespace smart
