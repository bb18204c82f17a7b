// Copyright (C) 2026 The deskdiff Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <map>
#include <numbers>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "deskdiff/errors.hpp"
#include "deskdiff/manifest.hpp"
#include "deskdiff/precond.hpp"
#include "deskdiff/schedule.hpp"
#include "deskdiff/tensor.hpp"
#include "deskdiff/toy_network.hpp"

namespace deskdiff {

enum class MinSnrVariant {
    // min(snr, gamma) / (snr + 1): zero weight on the pure-noise step.
    standard,
    // (min(snr, gamma) + 1) / (snr + 1): unit weight on the pure-noise step.
    ztsnr_safe,
};

inline double minsnr_weight(double snr, double gamma, MinSnrVariant variant = MinSnrVariant::ztsnr_safe) {
    if (!(snr >= 0.0)) throw ParameterError("minsnr_weight: snr must be >= 0");
    if (!(gamma > 0.0)) throw ParameterError("minsnr_weight: gamma must be > 0");
    const double clipped = std::min(snr, gamma);
    switch (variant) {
        case MinSnrVariant::standard:
            return clipped / (snr + 1.0);
        case MinSnrVariant::ztsnr_safe:
            return (clipped + 1.0) / (snr + 1.0);
    }
    return 0.0;
}

struct TagWeightConfig {
    double alpha = 0.5;
    double low = 0.1;
    double high = 10.0;
};

// Per class, a tag's weight is clamp((median class frequency / tag frequency)^alpha).
// A sample's weight is the mean over all of its tags; untagged samples get 1.
inline std::map<std::string, double> tag_loss_weights(const Manifest& manifest, const TagWeightConfig& cfg = {}) {
    if (manifest.empty()) throw ParameterError("tag_loss_weights: empty manifest");
    if (!(cfg.alpha >= 0.0 && cfg.alpha <= 1.0)) throw ParameterError("tag_loss_weights: alpha must be in [0, 1]");
    if (!(cfg.low > 0.0 && cfg.low <= 1.0 && cfg.high >= 1.0)) {
        throw ParameterError("tag_loss_weights: require 0 < low <= 1 <= high");
    }

    std::map<std::string, std::map<std::string, double>> freq;  // class -> tag -> count
    for (const auto& item : manifest) {
        for (const auto& [cls, tags] : item.tags) {
            for (const auto& tag : tags) freq[cls][tag] += 1.0;
        }
    }

    std::map<std::string, std::map<std::string, double>> tag_weight;
    for (const auto& [cls, counts] : freq) {
        std::vector<double> values;
        values.reserve(counts.size());
        for (const auto& [tag, f] : counts) values.push_back(f);
        std::sort(values.begin(), values.end());
        const std::size_t n = values.size();
        const double median = n % 2 == 1 ? values[n / 2] : 0.5 * (values[n / 2 - 1] + values[n / 2]);
        for (const auto& [tag, f] : counts) {
            tag_weight[cls][tag] = std::clamp(std::pow(median / f, cfg.alpha), cfg.low, cfg.high);
        }
    }

    std::map<std::string, double> out;
    for (const auto& item : manifest) {
        double sum = 0.0;
        std::size_t count = 0;
        for (const auto& [cls, tags] : item.tags) {
            for (const auto& tag : tags) {
                sum += tag_weight[cls][tag];
                ++count;
            }
        }
        out[item.id] = count == 0 ? 1.0 : sum / static_cast<double>(count);
    }
    return out;
}

// Training examples: rows of `x0` are data points; `cond` is [N, cond_dim] or empty.
// `ids` (optional) key into TrainConfig::tag_weights.
struct TrainingSet {
    Tensor x0;
    Tensor cond;
    std::vector<std::string> ids;

    std::size_t size() const { return x0.rows(); }
    std::size_t dim() const { return x0.cols(); }
    std::size_t cond_dim() const { return cond.size() == 0 ? 0 : cond.cols(); }
};

struct TrainConfig {
    NoiseSchedule schedule = build_vp_schedule();
    double terminal_clamp = kDefaultTerminalClamp;
    double minsnr_gamma = 5.0;
    MinSnrVariant minsnr_variant = MinSnrVariant::ztsnr_safe;
    double learning_rate = 0.01;
    // Anneals the learning rate to zero along a half cosine over `steps`.
    bool cosine_decay = false;
    std::size_t steps = 2000;
    std::size_t batch_size = 64;
    std::uint64_t seed = 0;
    std::vector<std::size_t> hidden{64, 64};
    // Probability of zeroing a row's condition, for classifier-free guidance.
    double cond_dropout = 0.0;
    std::map<std::string, double> tag_weights;
};

// mean_b weights[b] * |output_b - target_b|^2, and its gradient with respect to `output`.
inline double weighted_loss(const Tensor& output, const Tensor& target, std::span<const double> weights,
                            Tensor* grad_output = nullptr) {
    require_same_shape(output, target, "weighted_loss");
    const std::size_t rows = output.rows();
    if (weights.size() != rows) throw ContractError("weighted_loss: one weight per row required");
    const std::size_t cols = output.cols();
    if (grad_output != nullptr) *grad_output = Tensor(output.shape);
    double total = 0.0;
    const double inv_rows = 1.0 / static_cast<double>(rows);
    for (std::size_t r = 0; r < rows; ++r) {
        double sq = 0.0;
        for (std::size_t c = 0; c < cols; ++c) {
            const double diff = output[r * cols + c] - target[r * cols + c];
            sq += diff * diff;
            if (grad_output != nullptr) (*grad_output)[r * cols + c] = 2.0 * weights[r] * diff * inv_rows;
        }
        total += weights[r] * sq;
    }
    return total * inv_rows;
}

// A noised batch in network coordinates.
struct TrainingBatch {
    Tensor features;
    Tensor targets;
    std::vector<double> weights;
};

// Draws one batch: uniform timesteps, VE noising x = x0 + sigma eps (equal to the VP sample
// divided by sqrt(alpha_bar)). At alpha_bar = 0 the network sees eps itself, conditioned on
// the terminal clamp, with the limiting target -x0 / sigma_data.
inline TrainingBatch draw_training_batch(const TrainConfig& config, const TrainingSet& data, const Preconditioner& p,
                                         const ToyNetwork& net, std::mt19937_64& rng) {
    const std::size_t rows = config.batch_size;
    const std::size_t dim = data.dim();
    const std::size_t cdim = data.cond_dim();
    std::uniform_int_distribution<std::size_t> pick(0, data.size() - 1);
    std::uniform_int_distribution<std::size_t> pick_t(0, config.schedule.num_steps - 1);
    std::normal_distribution<double> normal(0.0, 1.0);
    std::uniform_real_distribution<double> unit(0.0, 1.0);

    Tensor inputs(Shape{rows, dim});
    Tensor conds(Shape{rows, cdim});
    std::vector<double> sigmas(rows);
    TrainingBatch batch;
    batch.targets = Tensor(Shape{rows, dim});
    batch.weights.resize(rows);

    for (std::size_t b = 0; b < rows; ++b) {
        const std::size_t idx = pick(rng);
        const std::size_t t = pick_t(rng);
        const double alpha_bar = config.schedule.alpha_bars[t];
        auto x0 = data.x0.row(idx);
        auto in = inputs.row(b);
        auto tgt = batch.targets.row(b);
        if (alpha_bar > 0.0) {
            const double sigma = sigma_from_alpha_bar(alpha_bar);
            const Scalings c = p.scalings(sigma);
            for (std::size_t k = 0; k < dim; ++k) {
                const double x = x0[k] + sigma * normal(rng);
                in[k] = c.c_in * x;
                tgt[k] = (x0[k] - c.c_skip * x) / c.c_out;
            }
            sigmas[b] = sigma;
        } else {
            for (std::size_t k = 0; k < dim; ++k) {
                in[k] = normal(rng);
                tgt[k] = -x0[k] / p.sigma_data;
            }
            sigmas[b] = config.terminal_clamp;
        }
        if (cdim > 0) {
            const bool drop = config.cond_dropout > 0.0 && unit(rng) < config.cond_dropout;
            auto c = data.cond.row(idx);
            auto out = conds.row(b);
            for (std::size_t k = 0; k < cdim; ++k) out[k] = drop ? 0.0 : c[k];
        }
        double tag = 1.0;
        if (!config.tag_weights.empty() && idx < data.ids.size()) {
            if (auto it = config.tag_weights.find(data.ids[idx]); it != config.tag_weights.end()) tag = it->second;
        }
        batch.weights[b] = tag * minsnr_weight(snr_from_alpha_bar(alpha_bar), config.minsnr_gamma,
                                               config.minsnr_variant);
    }
    batch.features = net.features(inputs, sigmas, cdim > 0 ? &conds : nullptr);
    return batch;
}

// Called after every optimizer step with (step index, batch loss).
using LossCallback = std::function<void(std::size_t, double)>;

inline void validate_training(const TrainConfig& config, const TrainingSet& data) {
    if (data.size() == 0 || data.dim() == 0) throw ParameterError("train_toy: empty training set");
    if (data.cond.size() != 0 && data.cond.rows() != data.size()) {
        throw ParameterError("train_toy: condition rows differ from data rows");
    }
    if (config.schedule.alpha_bars.size() != config.schedule.num_steps || config.schedule.num_steps < 2) {
        throw ParameterError("train_toy: malformed schedule");
    }
    if (!(config.minsnr_gamma > 0.0)) throw ParameterError("train_toy: minsnr_gamma must be > 0");
    if (!(config.learning_rate > 0.0)) throw ParameterError("train_toy: learning_rate must be > 0");
    if (config.batch_size == 0) throw ParameterError("train_toy: batch_size must be positive");
}

// SGD on `net` for config.steps steps.
inline void train_in_place(ToyNetwork& net, const TrainConfig& config, const TrainingSet& data,
                           const Preconditioner& p, const LossCallback& on_step = {}) {
    validate_training(config, data);
    if (net.input_dim() != data.dim() || net.cond_dim() != data.cond_dim()) {
        throw ParameterError("train_toy: network dimensions do not match the data");
    }
    std::mt19937_64 rng(config.seed ^ 0x9e3779b97f4a7c15ULL);
    ToyNetwork::Cache cache;
    Tensor grad_out;
    for (std::size_t step = 0; step < config.steps; ++step) {
        const TrainingBatch batch = draw_training_batch(config, data, p, net, rng);
        const Tensor out = net.forward(batch.features, &cache);
        const double loss = weighted_loss(out, batch.targets, batch.weights, &grad_out);
        if (!std::isfinite(loss)) throw TrainingError("train_toy: loss is not finite", step);
        const std::vector<double> grad = net.backward(cache, grad_out);
        double lr = config.learning_rate;
        if (config.cosine_decay) {
            lr *= 0.5 * (1.0 + std::cos(std::numbers::pi * static_cast<double>(step) / static_cast<double>(config.steps)));
        }
        auto params = net.parameters();
        for (std::size_t k = 0; k < params.size(); ++k) params[k] -= lr * grad[k];
        if (on_step) on_step(step, loss);
    }
}

inline ToyNetwork train_toy(const TrainConfig& config, const TrainingSet& data, const Preconditioner& p,
                            const LossCallback& on_step = {}) {
    validate_training(config, data);
    ToyNetwork net(data.dim(), data.cond_dim(), config.hidden, config.seed);
    train_in_place(net, config, data, p, on_step);
    return net;
}

}  // namespace deskdiff
