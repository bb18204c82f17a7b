// Copyright (C) 2026 The deskdiff Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cmath>
#include <cstddef>
#include <limits>
#include <vector>

#include "deskdiff/errors.hpp"

namespace deskdiff {

inline constexpr double kDefaultTerminalClamp = 20000.0;
inline constexpr double kMinTerminalClamp = 100.0;

// SD/SDXL-lineage training schedule endpoints.
inline constexpr std::size_t kDefaultTrainSteps = 1000;
inline constexpr double kSdxlBetaStart = 0.00085;
inline constexpr double kSdxlBetaEnd = 0.012;

// Discrete variance-preserving schedule indexed by timestep 0..num_steps-1.
struct NoiseSchedule {
    std::size_t num_steps = 0;
    std::vector<double> betas;
    std::vector<double> alpha_bars;
    // Terminal alpha-bar is exactly zero; the terminal beta is then 1.
    bool ztsnr = false;
};

// Sampling-order sigma table. `timesteps[i]` is the training timestep that produced
// `sigmas[i]`. Inference tables carry one extra trailing sigma of 0 with no timestep.
struct SigmaSchedule {
    std::vector<double> sigmas;
    std::vector<std::size_t> timesteps;
    double terminal_clamp = kDefaultTerminalClamp;

    bool ends_at_zero() const { return !sigmas.empty() && sigmas.back() == 0.0; }
};

// SNR = alpha_bar / (1 - alpha_bar) = 1 / sigma^2, and exactly 0 at alpha_bar = 0.
inline double snr_from_alpha_bar(double alpha_bar) {
    if (alpha_bar <= 0.0) return 0.0;
    return alpha_bar / (1.0 - alpha_bar);
}

inline double snr_from_sigma(double sigma) {
    if (!std::isfinite(sigma)) return 0.0;
    return 1.0 / (sigma * sigma);
}

// VP alpha-bar to VE sigma. Infinite at alpha_bar = 0.
inline double sigma_from_alpha_bar(double alpha_bar) {
    if (alpha_bar <= 0.0) return std::numeric_limits<double>::infinity();
    return std::sqrt((1.0 - alpha_bar) / alpha_bar);
}

inline double alpha_bar_from_sigma(double sigma) {
    if (!std::isfinite(sigma)) return 0.0;
    return 1.0 / (1.0 + sigma * sigma);
}

// "Scaled linear" betas: sqrt(beta) linear from sqrt(beta_start) to sqrt(beta_end).
inline NoiseSchedule build_vp_schedule(std::size_t num_steps = kDefaultTrainSteps,
                                       double beta_start = kSdxlBetaStart,
                                       double beta_end = kSdxlBetaEnd) {
    if (num_steps < 2) throw ParameterError("build_vp_schedule: num_steps must be >= 2");
    if (!(beta_start > 0.0 && beta_start <= beta_end && beta_end < 1.0)) {
        throw ParameterError("build_vp_schedule: require 0 < beta_start <= beta_end < 1");
    }
    NoiseSchedule s;
    s.num_steps = num_steps;
    s.betas.resize(num_steps);
    s.alpha_bars.resize(num_steps);
    const double lo = std::sqrt(beta_start);
    const double hi = std::sqrt(beta_end);
    double running = 1.0;
    for (std::size_t t = 0; t < num_steps; ++t) {
        const double frac = static_cast<double>(t) / static_cast<double>(num_steps - 1);
        const double root = lo + (hi - lo) * frac;
        s.betas[t] = root * root;
        running *= 1.0 - s.betas[t];
        s.alpha_bars[t] = running;
    }
    return s;
}

// Linear rescale of sqrt(alpha_bar) that keeps the first step and zeroes the last.
inline NoiseSchedule rescale_to_ztsnr(const NoiseSchedule& s) {
    if (s.ztsnr) throw IdempotenceError("rescale_to_ztsnr: schedule is already zero-terminal-SNR");
    if (s.alpha_bars.size() != s.num_steps || s.num_steps < 2) {
        throw ParameterError("rescale_to_ztsnr: malformed schedule");
    }
    const double first = std::sqrt(s.alpha_bars.front());
    const double last = std::sqrt(s.alpha_bars.back());
    if (!(first > last && last > 0.0)) {
        throw ParameterError("rescale_to_ztsnr: require alpha_bar_1 > alpha_bar_T > 0");
    }

    NoiseSchedule out;
    out.num_steps = s.num_steps;
    out.ztsnr = true;
    out.alpha_bars.resize(s.num_steps);
    out.betas.resize(s.num_steps);
    for (std::size_t t = 0; t < s.num_steps; ++t) {
        const double root = first * (std::sqrt(s.alpha_bars[t]) - last) / (first - last);
        out.alpha_bars[t] = root * root;
    }
    out.alpha_bars.front() = s.alpha_bars.front();
    out.alpha_bars.back() = 0.0;

    double prev = 1.0;
    for (std::size_t t = 0; t < s.num_steps; ++t) {
        out.betas[t] = 1.0 - out.alpha_bars[t] / prev;
        prev = out.alpha_bars[t];
    }
    out.betas.back() = 1.0;
    return out;
}

// Descending sigma table (timestep T-1 first). Non-finite sigmas become `terminal_clamp`.
inline SigmaSchedule sigma_view(const NoiseSchedule& s, double terminal_clamp = kDefaultTerminalClamp) {
    if (!(terminal_clamp >= kMinTerminalClamp) || !std::isfinite(terminal_clamp)) {
        throw ParameterError("sigma_view: terminal_clamp must be finite and >= 100");
    }
    SigmaSchedule out;
    out.terminal_clamp = terminal_clamp;
    out.sigmas.reserve(s.num_steps);
    out.timesteps.reserve(s.num_steps);
    for (std::size_t k = 0; k < s.num_steps; ++k) {
        const std::size_t t = s.num_steps - 1 - k;
        double sigma = sigma_from_alpha_bar(s.alpha_bars[t]);
        if (!std::isfinite(sigma)) sigma = terminal_clamp;
        out.sigmas.push_back(sigma);
        out.timesteps.push_back(t);
    }
    return out;
}

// Uniformly spaced timesteps from highest to lowest (endpoints included, rounded half-up),
// followed by a trailing 0 sigma that marks the fully denoised target.
inline SigmaSchedule inference_sigmas(const SigmaSchedule& table, std::size_t n_steps) {
    const std::size_t len = table.timesteps.size();
    if (len == 0 || table.sigmas.size() != len) {
        throw ParameterError("inference_sigmas: expects a full training sigma table");
    }
    if (n_steps < 2 || n_steps > len) {
        throw ParameterError("inference_sigmas: n_steps must be in [2, num_steps]");
    }
    SigmaSchedule out;
    out.terminal_clamp = table.terminal_clamp;
    out.sigmas.reserve(n_steps + 1);
    out.timesteps.reserve(n_steps);
    const std::size_t top = len - 1;
    const std::size_t denom = n_steps - 1;
    for (std::size_t i = 0; i < n_steps; ++i) {
        // round_half_up(top * (denom - i) / denom), in exact integer arithmetic
        const std::size_t index = (2 * top * (denom - i) + denom) / (2 * denom);
        const std::size_t position = top - index;
        out.sigmas.push_back(table.sigmas[position]);
        out.timesteps.push_back(table.timesteps[position]);
    }
    out.sigmas.push_back(0.0);
    return out;
}

// Noise std must grow with sqrt(area) to hold SNR when extra pixels carry redundant signal.
inline double scale_sigma_max_for_resolution(double sigma_max, double ref_area, double new_area) {
    if (!(ref_area > 0.0 && new_area > 0.0)) {
        throw ParameterError("scale_sigma_max_for_resolution: areas must be positive");
    }
    return sigma_max * std::sqrt(new_area / ref_area);
}

}  // namespace deskdiff
