// Copyright (c) 2026 The smartft Authors
// SPDX-License-Identifier: Apache-2.0

#include "smart/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "smart/error.hpp"

namespace smart {

namespace {

void require_same_shape(const Tensor& a, const Tensor& b, const char* op) {
    if (a.shape() != b.shape()) {
        throw ContractViolation(std::string(op) + ": shape mismatch " + shape_to_string(a.shape()) +
                                " vs " + shape_to_string(b.shape()));
    }
}

void require_matrix(const Tensor& a, const char* op) {
    if (a.rank() != 2) {
        throw ContractViolation(std::string(op) + ": expected a matrix, got shape " +
                                shape_to_string(a.shape()));
    }
}

template <typename F>
Tensor map(const Tensor& a, F f) {
    Tensor out(a.shape());
    auto src = a.data();
    auto dst = out.data();
    for (std::size_t i = 0; i < src.size(); ++i) dst[i] = f(src[i]);
    return out;
}

template <typename F>
Tensor zip(const Tensor& a, const Tensor& b, const char* op, F f) {
    require_same_shape(a, b, op);
    Tensor out(a.shape());
    auto x = a.data();
    auto y = b.data();
    auto dst = out.data();
    for (std::size_t i = 0; i < x.size(); ++i) dst[i] = f(x[i], y[i]);
    return out;
}

}  // namespace

std::string shape_to_string(const Shape& shape) {
    std::ostringstream os;
    os << '[';
    for (std::size_t i = 0; i < shape.size(); ++i) {
        if (i) os << ',';
        os << shape[i];
    }
    os << ']';
    return os.str();
}

std::size_t shape_numel(const Shape& shape) {
    std::size_t n = 1;
    for (auto d : shape) n *= d;
    return n;
}

Tensor::Tensor(Shape shape, double fill) : shape_(std::move(shape)) {
    for (auto d : shape_) {
        if (d == 0) throw ContractViolation("Tensor: zero-sized dimension in " + shape_to_string(shape_));
    }
    data_.assign(shape_numel(shape_), fill);
}

Tensor::Tensor(Shape shape, std::vector<double> data) : shape_(std::move(shape)), data_(std::move(data)) {
    for (auto d : shape_) {
        if (d == 0) throw ContractViolation("Tensor: zero-sized dimension in " + shape_to_string(shape_));
    }
    if (data_.size() != shape_numel(shape_)) {
        throw ContractViolation("Tensor: " + std::to_string(data_.size()) + " values do not fill shape " +
                                shape_to_string(shape_));
    }
}

Tensor Tensor::scalar(double value) { return Tensor({1}, std::vector<double>{value}); }

Tensor Tensor::vector(std::initializer_list<double> values) {
    return Tensor({values.size()}, std::vector<double>(values));
}

Tensor Tensor::matrix(std::initializer_list<std::initializer_list<double>> rows) {
    if (rows.size() == 0) throw ContractViolation("Tensor::matrix: no rows");
    const std::size_t cols = rows.begin()->size();
    std::vector<double> data;
    data.reserve(rows.size() * cols);
    for (const auto& row : rows) {
        if (row.size() != cols) throw ContractViolation("Tensor::matrix: ragged rows");
        data.insert(data.end(), row.begin(), row.end());
    }
    return Tensor({rows.size(), cols}, std::move(data));
}

Tensor Tensor::identity(std::size_t n) {
    Tensor out({n, n});
    for (std::size_t i = 0; i < n; ++i) out.at(i, i) = 1.0;
    return out;
}

std::size_t Tensor::rows() const {
    if (shape_.empty()) throw ContractViolation("Tensor::rows on empty tensor");
    return shape_.front();
}

std::size_t Tensor::cols() const {
    if (shape_.size() != 2) throw ContractViolation("Tensor::cols: expected a matrix, got " + shape_to_string(shape_));
    return shape_[1];
}

double Tensor::at(std::size_t r, std::size_t c) const { return data_[r * shape_[1] + c]; }
double& Tensor::at(std::size_t r, std::size_t c) { return data_[r * shape_[1] + c]; }

double Tensor::item() const {
    if (data_.size() != 1) throw ContractViolation("Tensor::item on shape " + shape_to_string(shape_));
    return data_[0];
}

Tensor Tensor::reshaped(Shape shape) const {
    if (shape_numel(shape) != data_.size()) {
        throw ContractViolation("reshape: " + shape_to_string(shape_) + " to " + shape_to_string(shape));
    }
    return Tensor(std::move(shape), data_);
}

Tensor add(const Tensor& a, const Tensor& b) {
    return zip(a, b, "add", [](double x, double y) { return x + y; });
}
Tensor sub(const Tensor& a, const Tensor& b) {
    return zip(a, b, "sub", [](double x, double y) { return x - y; });
}
Tensor mul(const Tensor& a, const Tensor& b) {
    return zip(a, b, "mul", [](double x, double y) { return x * y; });
}
Tensor scale(const Tensor& a, double factor) {
    return map(a, [factor](double x) { return x * factor; });
}
Tensor relu(const Tensor& a) {
    return map(a, [](double x) { return x > 0.0 ? x : 0.0; });
}
Tensor tanh(const Tensor& a) {
    return map(a, [](double x) { return std::tanh(x); });
}
Tensor square(const Tensor& a) {
    return map(a, [](double x) { return x * x; });
}
Tensor log_clamped(const Tensor& a, double lo) {
    return map(a, [lo](double x) { return std::log(std::clamp(x, lo, 1.0)); });
}

Tensor matmul(const Tensor& a, const Tensor& b) {
    require_matrix(a, "matmul");
    require_matrix(b, "matmul");
    if (a.cols() != b.rows()) {
        throw ContractViolation("matmul: inner dimensions differ " + shape_to_string(a.shape()) + " x " +
                                shape_to_string(b.shape()));
    }
    const std::size_t n = a.rows(), k = a.cols(), m = b.cols();
    Tensor out({n, m});
    auto A = a.data();
    auto B = b.data();
    auto C = out.data();
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t p = 0; p < k; ++p) {
            const double aip = A[i * k + p];
            const double* brow = &B[p * m];
            double* crow = &C[i * m];
            for (std::size_t j = 0; j < m; ++j) crow[j] += aip * brow[j];
        }
    }
    return out;
}

Tensor transpose(const Tensor& a) {
    require_matrix(a, "transpose");
    const std::size_t r = a.rows(), c = a.cols();
    Tensor out({c, r});
    for (std::size_t i = 0; i < r; ++i)
        for (std::size_t j = 0; j < c; ++j) out.at(j, i) = a.at(i, j);
    return out;
}

Tensor add_row(const Tensor& a, const Tensor& row) {
    require_matrix(a, "add_row");
    if (row.size() != a.cols()) {
        throw ContractViolation("add_row: shape mismatch " + shape_to_string(a.shape()) + " vs " +
                                shape_to_string(row.shape()));
    }
    Tensor out = a;
    const std::size_t c = a.cols();
    for (std::size_t i = 0; i < a.rows(); ++i)
        for (std::size_t j = 0; j < c; ++j) out.at(i, j) += row[j];
    return out;
}

Tensor mul_row(const Tensor& a, const Tensor& row) {
    require_matrix(a, "mul_row");
    if (row.size() != a.cols()) {
        throw ContractViolation("mul_row: shape mismatch " + shape_to_string(a.shape()) + " vs " +
                                shape_to_string(row.shape()));
    }
    Tensor out = a;
    const std::size_t c = a.cols();
    for (std::size_t i = 0; i < a.rows(); ++i)
        for (std::size_t j = 0; j < c; ++j) out.at(i, j) *= row[j];
    return out;
}

Tensor softmax_rows(const Tensor& a) {
    require_matrix(a, "softmax_rows");
    const std::size_t r = a.rows(), c = a.cols();
    Tensor out({r, c});
    for (std::size_t i = 0; i < r; ++i) {
        double hi = a.at(i, 0);
        for (std::size_t j = 1; j < c; ++j) hi = std::max(hi, a.at(i, j));
        double total = 0.0;
        for (std::size_t j = 0; j < c; ++j) {
            const double e = std::exp(a.at(i, j) - hi);
            out.at(i, j) = e;
            total += e;
        }
        for (std::size_t j = 0; j < c; ++j) out.at(i, j) /= total;
    }
    return out;
}

Tensor mean_rows(const Tensor& a) {
    require_matrix(a, "mean_rows");
    const std::size_t r = a.rows(), c = a.cols();
    Tensor out({1, c});
    for (std::size_t i = 0; i < r; ++i)
        for (std::size_t j = 0; j < c; ++j) out[j] += a.at(i, j);
    for (std::size_t j = 0; j < c; ++j) out[j] /= static_cast<double>(r);
    return out;
}

Tensor slice_cols(const Tensor& a, std::size_t start, std::size_t count) {
    require_matrix(a, "slice_cols");
    if (count == 0 || start + count > a.cols()) {
        throw ContractViolation("slice_cols: columns [" + std::to_string(start) + ", " +
                                std::to_string(start + count) + ") out of " + shape_to_string(a.shape()));
    }
    Tensor out({a.rows(), count});
    for (std::size_t i = 0; i < a.rows(); ++i)
        for (std::size_t j = 0; j < count; ++j) out.at(i, j) = a.at(i, start + j);
    return out;
}

Tensor concat_cols(std::span<const Tensor> parts) {
    if (parts.empty()) throw ContractViolation("concat_cols: no inputs");
    const std::size_t r = parts.front().rows();
    std::size_t c = 0;
    for (const auto& p : parts) {
        require_matrix(p, "concat_cols");
        if (p.rows() != r) throw ContractViolation("concat_cols: row count mismatch " + shape_to_string(p.shape()));
        c += p.cols();
    }
    Tensor out({r, c});
    std::size_t offset = 0;
    for (const auto& p : parts) {
        for (std::size_t i = 0; i < r; ++i)
            for (std::size_t j = 0; j < p.cols(); ++j) out.at(i, offset + j) = p.at(i, j);
        offset += p.cols();
    }
    return out;
}

Tensor concat_rows(std::span<const Tensor> parts) {
    if (parts.empty()) throw ContractViolation("concat_rows: no inputs");
    const std::size_t c = parts.front().cols();
    std::size_t r = 0;
    for (const auto& p : parts) {
        require_matrix(p, "concat_rows");
        if (p.cols() != c) throw ContractViolation("concat_rows: column count mismatch " + shape_to_string(p.shape()));
        r += p.rows();
    }
    std::vector<double> data;
    data.reserve(r * c);
    for (const auto& p : parts) data.insert(data.end(), p.values().begin(), p.values().end());
    return Tensor({r, c}, std::move(data));
}

Tensor gather_rows(const Tensor& table, std::span<const std::size_t> ids) {
    require_matrix(table, "gather_rows");
    if (ids.empty()) throw ContractViolation("gather_rows: no ids");
    const std::size_t c = table.cols();
    Tensor out({ids.size(), c});
    for (std::size_t i = 0; i < ids.size(); ++i) {
        if (ids[i] >= table.rows()) {
            throw ContractViolation("gather_rows: id " + std::to_string(ids[i]) + " outside table " +
                                    shape_to_string(table.shape()));
        }
        for (std::size_t j = 0; j < c; ++j) out.at(i, j) = table.at(ids[i], j);
    }
    return out;
}

Tensor layer_norm_rows(const Tensor& a, double eps) {
    require_matrix(a, "layer_norm_rows");
    const std::size_t r = a.rows(), c = a.cols();
    Tensor out({r, c});
    for (std::size_t i = 0; i < r; ++i) {
        double mean = 0.0;
        for (std::size_t j = 0; j < c; ++j) mean += a.at(i, j);
        mean /= static_cast<double>(c);
        double var = 0.0;
        for (std::size_t j = 0; j < c; ++j) {
            const double d = a.at(i, j) - mean;
            var += d * d;
        }
        var /= static_cast<double>(c);
        const double inv = 1.0 / std::sqrt(var + eps);
        for (std::size_t j = 0; j < c; ++j) out.at(i, j) = (a.at(i, j) - mean) * inv;
    }
    return out;
}

Tensor slice_example(const Tensor& batch, std::size_t i) {
    if (batch.rank() < 2) throw ContractViolation("slice_example: batch tensor needs rank >= 2");
    if (i >= batch.shape()[0]) {
        throw ContractViolation("slice_example: index " + std::to_string(i) + " outside " +
                                shape_to_string(batch.shape()));
    }
    Shape tail(batch.shape().begin() + 1, batch.shape().end());
    if (tail.size() == 1) tail.insert(tail.begin(), 1);
    const std::size_t n = shape_numel(tail);
    auto src = batch.data().subspan(i * n, n);
    return Tensor(std::move(tail), std::vector<double>(src.begin(), src.end()));
}

double sum(const Tensor& a) {
    double total = 0.0;
    for (double x : a.data()) total += x;
    return total;
}

double linf_norm(const Tensor& a) {
    double hi = 0.0;
    for (double x : a.data()) hi = std::max(hi, std::abs(x));
    return hi;
}

double l2_norm(const Tensor& a) {
    double total = 0.0;
    for (double x : a.data()) total += x * x;
    return std::sqrt(total);
}

bool all_finite(const Tensor& a) {
    return std::all_of(a.data().begin(), a.data().end(), [](double x) { return std::isfinite(x); });
}

}  // namespace smart
