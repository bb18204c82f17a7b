// Copyright (C) 2026 The deskdiff Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

#include "deskdiff/precond.hpp"
#include "deskdiff/sampler.hpp"
#include "deskdiff/schedule.hpp"
#include "deskdiff/tensor.hpp"
#include "deskdiff/train.hpp"

namespace deskdiff {

// Paired run: identical data and training budget, one model on the zero-terminal-SNR schedule
// and one on the stock schedule; both sampled from pure noise at their own sigma_max.
struct MeanLeakageConfig {
    std::vector<double> data_mean{3.0, -2.0};
    double data_std = 3.0;
    std::size_t data_count = 32768;
    std::size_t train_steps = 6000;
    std::size_t batch_size = 64;
    double learning_rate = 0.01;
    std::size_t inference_steps = 28;
    std::size_t num_samples = 10000;
    double terminal_clamp = kDefaultTerminalClamp;
    std::uint64_t seed = 7;
};

struct RunSummary {
    std::vector<double> sample_mean;
    double mean_error = 0.0;       // |sample_mean - data_mean|
    double relative_error = 0.0;   // mean_error / |data_mean|
    double projection = 0.0;       // <sample_mean, data_mean> / |data_mean|^2
    double sigma_max = 0.0;
};

struct MeanLeakageResult {
    RunSummary ztsnr;
    RunSummary no_ztsnr;
};

inline TrainingSet gaussian_training_set(std::span<const double> mean, double stddev, std::size_t count,
                                         std::uint64_t seed) {
    TrainingSet data;
    data.x0 = Tensor(Shape{count, mean.size()});
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    for (std::size_t r = 0; r < count; ++r) {
        for (std::size_t k = 0; k < mean.size(); ++k) data.x0[r * mean.size() + k] = mean[k] + stddev * normal(rng);
    }
    return data;
}

inline std::vector<double> column_means(const Tensor& t) {
    std::vector<double> out(t.cols(), 0.0);
    for (std::size_t r = 0; r < t.rows(); ++r) {
        for (std::size_t c = 0; c < t.cols(); ++c) out[c] += t[r * t.cols() + c];
    }
    for (double& v : out) v /= static_cast<double>(t.rows());
    return out;
}

inline RunSummary summarize_samples(const Tensor& samples, std::span<const double> data_mean, double sigma_max) {
    RunSummary s;
    s.sample_mean = column_means(samples);
    s.sigma_max = sigma_max;
    double err2 = 0.0, norm2 = 0.0, dot = 0.0;
    for (std::size_t k = 0; k < data_mean.size(); ++k) {
        const double diff = s.sample_mean[k] - data_mean[k];
        err2 += diff * diff;
        norm2 += data_mean[k] * data_mean[k];
        dot += s.sample_mean[k] * data_mean[k];
    }
    s.mean_error = std::sqrt(err2);
    s.relative_error = s.mean_error / std::sqrt(norm2);
    s.projection = dot / norm2;
    return s;
}

inline TrainConfig mean_leakage_train_config(const MeanLeakageConfig& cfg, const NoiseSchedule& schedule) {
    TrainConfig tc;
    tc.schedule = schedule;
    tc.terminal_clamp = cfg.terminal_clamp;
    tc.steps = cfg.train_steps;
    tc.batch_size = cfg.batch_size;
    tc.learning_rate = cfg.learning_rate;
    tc.cosine_decay = true;
    tc.seed = cfg.seed;
    return tc;
}

inline MeanLeakageResult run_mean_leakage(const MeanLeakageConfig& cfg) {
    const Preconditioner p{};
    const TrainingSet data = gaussian_training_set(cfg.data_mean, cfg.data_std, cfg.data_count, cfg.seed);
    const NoiseSchedule base = build_vp_schedule();
    const NoiseSchedule zt = rescale_to_ztsnr(base);

    MeanLeakageResult result;
    const Shape shape{cfg.num_samples, cfg.data_mean.size()};
    {
        const ToyNetwork net = train_toy(mean_leakage_train_config(cfg, zt), data, p);
        SamplerConfig sc;
        sc.sigmas = inference_sigmas(sigma_view(zt, cfg.terminal_clamp), cfg.inference_steps);
        sc.ztsnr_first_step = true;
        sc.seed = cfg.seed + 1;
        sc.shape = shape;
        result.ztsnr = summarize_samples(sample(sc, p, net), cfg.data_mean, sc.sigmas.sigmas.front());
    }
    {
        const ToyNetwork net = train_toy(mean_leakage_train_config(cfg, base), data, p);
        SamplerConfig sc;
        sc.sigmas = inference_sigmas(sigma_view(base, cfg.terminal_clamp), cfg.inference_steps);
        sc.seed = cfg.seed + 1;
        sc.shape = shape;
        result.no_ztsnr = summarize_samples(sample(sc, p, net), cfg.data_mean, sc.sigmas.sigmas.front());
    }
    return result;
}

}  // namespace deskdiff
