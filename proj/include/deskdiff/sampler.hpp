// Copyright (C) 2026 The deskdiff Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <optional>
#include <random>

#include "deskdiff/errors.hpp"
#include "deskdiff/precond.hpp"
#include "deskdiff/schedule.hpp"
#include "deskdiff/tensor.hpp"

namespace deskdiff {

struct SamplerConfig {
    SigmaSchedule sigmas;
    bool ztsnr_first_step = false;
    double cfg_scale = 1.0;
    std::uint64_t seed = 0;
    Shape shape{1, 2};

    // img2img: start at `start_index` from `init` + sigmas[start_index] * n.
    std::optional<Tensor> init;
    std::size_t start_index = 0;
};

// Observer for per-step denoised estimates: (step, sigma, denoised).
using StepObserver = std::function<void(std::size_t, double, const Tensor&)>;

inline Tensor euler_step(const Tensor& x, const Tensor& denoised, double sigma_from, double sigma_to) {
    if (!(sigma_from > sigma_to) || sigma_to < 0.0) {
        throw ScheduleOrderError("euler_step: require sigma_from > sigma_to >= 0");
    }
    if (!std::isfinite(sigma_from)) throw ScheduleOrderError("euler_step: sigma_from must be finite");
    if (sigma_to == 0.0) {
        require_same_shape(x, denoised, "euler_step");
        return denoised;
    }
    const double ratio = (sigma_to - sigma_from) / sigma_from;
    // x + ratio * (x - d)
    return axpby(1.0 + ratio, x, -ratio, denoised);
}

inline Tensor gaussian_tensor(const Shape& shape, std::mt19937_64& rng) {
    Tensor out(shape);
    std::normal_distribution<double> normal(0.0, 1.0);
    for (double& v : out.data) v = normal(rng);
    return out;
}

namespace detail {

// d_u + scale (d_c - d_u); plain conditional estimate when scale == 1.
template <typename Estimate>
Tensor guided(double cfg_scale, Condition cond, std::optional<Condition> uncond, Estimate&& estimate) {
    Tensor d_cond = estimate(cond);
    if (cfg_scale == 1.0) return d_cond;
    const Tensor d_uncond = estimate(*uncond);
    return axpby(cfg_scale, d_cond, 1.0 - cfg_scale, d_uncond);
}

inline void validate(const SamplerConfig& config, std::optional<Condition> uncond) {
    const auto& sig = config.sigmas.sigmas;
    if (sig.size() < 2) throw ParameterError("sample: schedule needs at least two sigmas");
    for (std::size_t i = 0; i + 1 < sig.size(); ++i) {
        if (!(sig[i] > sig[i + 1])) throw ScheduleOrderError("sample: sigmas must be strictly decreasing");
    }
    if (!(config.cfg_scale >= 1.0)) throw ParameterError("sample: cfg_scale must be >= 1");
    if (config.cfg_scale > 1.0 && !uncond) {
        throw ParameterError("sample: guidance requires an unconditional input");
    }
    if (config.ztsnr_first_step) {
        if (sig.front() != config.sigmas.terminal_clamp) {
            throw ParameterError("sample: ztsnr_first_step requires sigmas[0] == terminal_clamp");
        }
        if (config.start_index != 0) throw ParameterError("sample: img2img cannot start at the infinite step");
    }
    if (config.start_index + 1 >= sig.size()) throw ParameterError("sample: start_index out of range");
    if (config.init && config.init->shape != config.shape) {
        throw ParameterError("sample: init latent shape differs from config shape");
    }
}

}  // namespace detail

// Analytic Euler step down from sigma = inf: sigma_1 n + D_inf(n).
inline Tensor ztsnr_first_step(const Tensor& unit_noise, double sigma_1, const Preconditioner& p,
                               const RawNetwork& f, double sigma_cond = kDefaultTerminalClamp,
                               Condition cond = {}) {
    return axpby(sigma_1, unit_noise, 1.0, denoise_infinite(p, f, unit_noise, sigma_cond, cond));
}

inline Tensor sample(const SamplerConfig& config, const Preconditioner& p, const RawNetwork& f,
                     Condition cond = {}, std::optional<Condition> uncond = std::nullopt,
                     const StepObserver& observe = {}) {
    detail::validate(config, uncond);
    const auto& sig = config.sigmas.sigmas;
    std::mt19937_64 rng(config.seed);
    const Tensor noise = gaussian_tensor(config.shape, rng);

    std::size_t i = config.start_index;
    Tensor x;
    if (config.ztsnr_first_step) {
        const double sigma_cond = config.sigmas.terminal_clamp;
        const Tensor d = detail::guided(config.cfg_scale, cond, uncond, [&](Condition c) {
            return denoise_infinite(p, f, noise, sigma_cond, c);
        });
        if (observe) observe(0, sig[0], d);
        // Fixed-step special case; the following steps are plain Euler with no shared history.
        x = axpby(sig[1], noise, 1.0, d);
        i = 1;
    } else if (config.init) {
        x = axpby(1.0, *config.init, sig[i], noise);
    } else {
        x = scaled(sig[i], noise);
    }

    for (; i + 1 < sig.size(); ++i) {
        const double sigma = sig[i];
        const Tensor d = detail::guided(config.cfg_scale, cond, uncond,
                                        [&](Condition c) { return denoise(p, f, x, sigma, c); });
        if (observe) observe(i, sigma, d);
        x = euler_step(x, d, sigma, sig[i + 1]);
    }
    return x;
}

}  // namespace deskdiff
