// Copyright (C) 2026 The deskdiff Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <functional>
#include <numeric>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "deskdiff/errors.hpp"

namespace deskdiff {

using Shape = std::vector<std::size_t>;

inline std::size_t element_count(const Shape& shape) {
    return std::accumulate(shape.begin(), shape.end(), std::size_t{1}, std::multiplies<>{});
}

// Dense row-major double tensor. Arithmetic on tensors of differing shapes throws ContractError.
struct Tensor {
    Shape shape;
    std::vector<double> data;

    Tensor() = default;
    explicit Tensor(Shape s, double fill = 0.0) : shape(std::move(s)), data(element_count(shape), fill) {}
    Tensor(Shape s, std::vector<double> values) : shape(std::move(s)), data(std::move(values)) {
        if (data.size() != element_count(shape)) {
            throw ContractError("tensor payload does not match its shape");
        }
    }

    std::size_t size() const noexcept { return data.size(); }
    std::size_t rows() const noexcept { return shape.empty() ? 1 : shape.front(); }
    std::size_t cols() const noexcept { return shape.empty() ? 0 : size() / rows(); }

    double& operator[](std::size_t i) { return data[i]; }
    double operator[](std::size_t i) const { return data[i]; }

    std::span<double> row(std::size_t r) { return {data.data() + r * cols(), cols()}; }
    std::span<const double> row(std::size_t r) const { return {data.data() + r * cols(), cols()}; }

    friend bool operator==(const Tensor&, const Tensor&) = default;
};

inline void require_same_shape(const Tensor& a, const Tensor& b, const char* what) {
    if (a.shape != b.shape) {
        throw ContractError(std::string(what) + ": tensor shape mismatch");
    }
}

// out = a * x + b * y
inline Tensor axpby(double a, const Tensor& x, double b, const Tensor& y) {
    require_same_shape(x, y, "axpby");
    Tensor out(x.shape);
    for (std::size_t i = 0; i < x.size(); ++i) {
        out[i] = a * x[i] + b * y[i];
    }
    return out;
}

inline Tensor scaled(double a, const Tensor& x) {
    Tensor out = x;
    for (double& v : out.data) v *= a;
    return out;
}

}  // namespace deskdiff
