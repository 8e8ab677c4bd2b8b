// Copyright (c) 2026 The smartft Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <initializer_list>
#include <span>
#include <string>
#include <vector>

namespace smart {

using Shape = std::vector<std::size_t>;

std::string shape_to_string(const Shape& shape);
std::size_t shape_numel(const Shape& shape);

/// Dense row-major array of doubles. Every dimension is positive and the
/// flat buffer always holds exactly product(shape) entries.
class Tensor {
public:
    Tensor() = default;
    explicit Tensor(Shape shape, double fill = 0.0);
    Tensor(Shape shape, std::vector<double> data);

    static Tensor scalar(double value);
    static Tensor vector(std::initializer_list<double> values);
    /// Builds a rows x cols matrix from nested rows; all rows must have equal length.
    static Tensor matrix(std::initializer_list<std::initializer_list<double>> rows);
    static Tensor identity(std::size_t n);

    const Shape& shape() const noexcept { return shape_; }
    std::size_t rank() const noexcept { return shape_.size(); }
    std::size_t size() const noexcept { return data_.size(); }
    bool empty() const noexcept { return data_.empty(); }

    /// Leading dimension; rank-2 helpers below require a matrix.
    std::size_t rows() const;
    std::size_t cols() const;

    std::span<const double> data() const noexcept { return data_; }
    std::span<double> data() noexcept { return data_; }
    const std::vector<double>& values() const noexcept { return data_; }

    double operator[](std::size_t i) const noexcept { return data_[i]; }
    double& operator[](std::size_t i) noexcept { return data_[i]; }
    double at(std::size_t r, std::size_t c) const;
    double& at(std::size_t r, std::size_t c);

    /// Scalar value of a one-element tensor.
    double item() const;

    Tensor reshaped(Shape shape) const;

    bool operator==(const Tensor& other) const = default;

private:
    Shape shape_;
    std::vector<double> data_;
};

// Elementwise (identical shapes required).
Tensor add(const Tensor& a, const Tensor& b);
Tensor sub(const Tensor& a, const Tensor& b);
Tensor mul(const Tensor& a, const Tensor& b);
Tensor scale(const Tensor& a, double factor);
Tensor relu(const Tensor& a);
Tensor tanh(const Tensor& a);
Tensor square(const Tensor& a);
/// log(clamp(a, lo, 1)).
Tensor log_clamped(const Tensor& a, double lo);

// Matrix primitives (rank 2).
Tensor matmul(const Tensor& a, const Tensor& b);
Tensor transpose(const Tensor& a);
/// a[r x c] + row[1 x c] broadcast over rows.
Tensor add_row(const Tensor& a, const Tensor& row);
/// a[r x c] * row[1 x c] broadcast over rows.
Tensor mul_row(const Tensor& a, const Tensor& row);
Tensor softmax_rows(const Tensor& a);
Tensor mean_rows(const Tensor& a);
Tensor slice_cols(const Tensor& a, std::size_t start, std::size_t count);
Tensor concat_cols(std::span<const Tensor> parts);
Tensor concat_rows(std::span<const Tensor> parts);
Tensor gather_rows(const Tensor& table, std::span<const std::size_t> ids);

/// Normalizes each row to zero mean and unit variance (biased variance, eps inside the sqrt).
Tensor layer_norm_rows(const Tensor& a, double eps);

/// Example i of a batch tensor [B, ...], returned with shape [...] (or [1, n] for rank-2 input).
Tensor slice_example(const Tensor& batch, std::size_t i);

double sum(const Tensor& a);
double linf_norm(const Tensor& a);
double l2_norm(const Tensor& a);
bool all_finite(const Tensor& a);

}  // namespace smart
