// Copyright (C) 2026 The deskdiff Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cmath>
#include <span>

#include "deskdiff/errors.hpp"
#include "deskdiff/tensor.hpp"

namespace deskdiff {

// Conditioning vector broadcast to every row. Empty means unconditional.
using Condition = std::span<const double>;

// Raw network F(input, sigma, condition). Output shape must equal input shape.
// Implementations must tolerate concurrent const calls.
class RawNetwork {
public:
    virtual ~RawNetwork() = default;
    virtual Tensor evaluate(const Tensor& scaled_input, double sigma, Condition cond) const = 0;
};

struct Scalings {
    double c_skip;
    double c_out;
    double c_in;
};

// Karras preconditioner with v-prediction scalings (negative c_out).
struct Preconditioner {
    double sigma_data = 1.0;

    Scalings scalings(double sigma) const {
        if (!std::isfinite(sigma)) {
            throw ParameterError("scalings: non-finite sigma, use denoise_infinite for the terminal step");
        }
        if (sigma < 0.0) throw ParameterError("scalings: sigma must be >= 0");
        const double sd2 = sigma_data * sigma_data;
        const double total = sigma * sigma + sd2;
        const double root = std::sqrt(total);
        return {sd2 / total, -sigma * sigma_data / root, 1.0 / root};
    }
};

namespace detail {
inline Tensor checked_eval(const RawNetwork& f, const Tensor& input, double sigma, Condition cond) {
    Tensor out = f.evaluate(input, sigma, cond);
    if (out.shape != input.shape || out.size() != input.size()) {
        throw ContractError("raw network returned a tensor of a different shape");
    }
    return out;
}
}  // namespace detail

// D(x; sigma) = c_skip x + c_out F(c_in x; sigma). At sigma = 0 this is x and F is not called.
inline Tensor denoise(const Preconditioner& p, const RawNetwork& f, const Tensor& x, double sigma,
                      Condition cond = {}) {
    const Scalings c = p.scalings(sigma);
    if (c.c_out == 0.0) return x;
    const Tensor raw = detail::checked_eval(f, scaled(c.c_in, x), sigma, cond);
    return axpby(c.c_skip, x, c.c_out, raw);
}

// Limit of D(sigma0 n; sigma0) as sigma0 -> inf: -sigma_data F(n; sigma_cond).
// `unit_noise` is the standard-Gaussian factor, never VE-scaled.
inline Tensor denoise_infinite(const Preconditioner& p, const RawNetwork& f, const Tensor& unit_noise,
                               double sigma_cond, Condition cond = {}) {
    return scaled(-p.sigma_data, detail::checked_eval(f, unit_noise, sigma_cond, cond));
}

// F* such that denoise() with F = F* reproduces x0 exactly.
inline Tensor training_target(const Preconditioner& p, const Tensor& x0, const Tensor& x_noised, double sigma) {
    if (!(sigma > 0.0)) throw ParameterError("training_target: sigma must be > 0 (c_out vanishes at 0)");
    const Scalings c = p.scalings(sigma);
    return axpby(1.0 / c.c_out, x0, -c.c_skip / c.c_out, x_noised);
}

// Target for the pure-noise step, where the network sees unit noise directly.
inline Tensor training_target_infinite(const Preconditioner& p, const Tensor& x0) {
    return scaled(-1.0 / p.sigma_data, x0);
}

}  // namespace deskdiff
