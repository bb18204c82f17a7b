// Copyright (C) 2026 The deskdiff Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <span>
#include <vector>

#include "deskdiff/errors.hpp"
#include "deskdiff/precond.hpp"
#include "deskdiff/tensor.hpp"

namespace deskdiff {

// Noise-level feature appended to every input row.
inline double sigma_feature(double sigma) {
    if (!(sigma > 0.0) || !std::isfinite(sigma)) {
        throw ParameterError("toy network: sigma conditioning must be finite and > 0");
    }
    return std::log(sigma) / 10.0;
}

// Fully connected tanh MLP: [input + cond + 1] -> hidden... -> [input].
class ToyNetwork : public RawNetwork {
public:
    // Per-layer activations kept for the backward pass. activations[0] is the feature matrix.
    struct Cache {
        std::vector<Tensor> activations;
    };

    ToyNetwork() = default;

    ToyNetwork(std::size_t input_dim, std::size_t cond_dim, std::vector<std::size_t> hidden, std::uint64_t seed)
        : input_dim_(input_dim), cond_dim_(cond_dim) {
        if (input_dim == 0) throw ParameterError("ToyNetwork: input_dim must be positive");
        widths_.push_back(input_dim + cond_dim + 1);
        for (std::size_t h : hidden) {
            if (h == 0) throw ParameterError("ToyNetwork: hidden widths must be positive");
            widths_.push_back(h);
        }
        widths_.push_back(input_dim);
        params_.assign(parameter_count(widths_), 0.0);

        // Glorot-uniform weights, zero biases.
        std::mt19937_64 rng(seed);
        for (std::size_t l = 0; l + 1 < widths_.size(); ++l) {
            const std::size_t fan_in = widths_[l], fan_out = widths_[l + 1];
            const double a = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
            std::uniform_real_distribution<double> uni(-a, a);
            double* w = params_.data() + weight_offset(l);
            for (std::size_t k = 0; k < fan_in * fan_out; ++k) w[k] = uni(rng);
        }
    }

    // Rebuilds a network from serialized widths and flat parameters.
    ToyNetwork(std::vector<std::size_t> widths, std::size_t cond_dim, std::vector<double> params)
        : widths_(std::move(widths)), params_(std::move(params)), cond_dim_(cond_dim) {
        if (widths_.size() < 2) throw DataError("ToyNetwork: need at least two layer widths");
        input_dim_ = widths_.back();
        if (widths_.front() != input_dim_ + cond_dim_ + 1) {
            throw DataError("ToyNetwork: input width does not equal input_dim + cond_dim + 1");
        }
        if (params_.size() != parameter_count(widths_)) {
            throw DataError("ToyNetwork: parameter count does not match layer widths");
        }
    }

    static std::size_t parameter_count(const std::vector<std::size_t>& widths) {
        std::size_t n = 0;
        for (std::size_t l = 0; l + 1 < widths.size(); ++l) n += widths[l] * widths[l + 1] + widths[l + 1];
        return n;
    }

    std::size_t input_dim() const { return input_dim_; }
    std::size_t cond_dim() const { return cond_dim_; }
    const std::vector<std::size_t>& widths() const { return widths_; }
    std::span<const double> parameters() const { return params_; }
    std::span<double> parameters() { return params_; }

    // Builds the feature matrix from per-row inputs, sigmas and conditions.
    // `conds` may be empty (unconditional rows get zeros).
    Tensor features(const Tensor& x, std::span<const double> sigmas, const Tensor* conds) const {
        if (x.shape.size() != 2 || x.cols() != input_dim_) {
            throw ContractError("toy network: expected input of shape [batch, input_dim]");
        }
        const std::size_t rows = x.rows();
        if (sigmas.size() != rows) throw ContractError("toy network: one sigma per row required");
        Tensor feat(Shape{rows, widths_.front()});
        for (std::size_t r = 0; r < rows; ++r) {
            auto out = feat.row(r);
            auto in = x.row(r);
            std::copy(in.begin(), in.end(), out.begin());
            if (conds != nullptr && conds->cols() > 0) {
                auto c = conds->row(r);
                std::copy(c.begin(), c.end(), out.begin() + static_cast<std::ptrdiff_t>(input_dim_));
            }
            out[input_dim_ + cond_dim_] = sigma_feature(sigmas[r]);
        }
        return feat;
    }

    Tensor evaluate(const Tensor& scaled_input, double sigma, Condition cond) const override {
        if (!cond.empty() && cond.size() != cond_dim_) {
            throw ContractError("toy network: condition length differs from cond_dim");
        }
        const std::size_t rows = scaled_input.rows();
        std::vector<double> sigmas(rows, sigma);
        Tensor conds;
        if (!cond.empty()) {
            conds = Tensor(Shape{rows, cond_dim_});
            for (std::size_t r = 0; r < rows; ++r) std::copy(cond.begin(), cond.end(), conds.row(r).begin());
        }
        return forward(features(scaled_input, sigmas, cond.empty() ? nullptr : &conds));
    }

    Tensor forward(const Tensor& feat, Cache* cache = nullptr) const {
        if (feat.shape.size() != 2 || feat.cols() != widths_.front()) {
            throw ContractError("toy network: feature matrix has the wrong width");
        }
        const std::size_t rows = feat.rows();
        if (cache != nullptr) {
            cache->activations.clear();
            cache->activations.push_back(feat);
        }
        Tensor h = feat;
        const std::size_t layers = widths_.size() - 1;
        for (std::size_t l = 0; l < layers; ++l) {
            const std::size_t n_in = widths_[l], n_out = widths_[l + 1];
            const double* w = params_.data() + weight_offset(l);
            const double* b = w + n_in * n_out;
            Tensor z(Shape{rows, n_out});
            for (std::size_t r = 0; r < rows; ++r) {
                double* zr = z.data.data() + r * n_out;
                std::copy(b, b + n_out, zr);
                const double* hr = h.data.data() + r * n_in;
                for (std::size_t i = 0; i < n_in; ++i) {
                    const double hi = hr[i];
                    const double* wi = w + i * n_out;
                    for (std::size_t j = 0; j < n_out; ++j) zr[j] += hi * wi[j];
                }
            }
            if (l + 1 < layers) {
                for (double& v : z.data) v = std::tanh(v);
            }
            h = std::move(z);
            if (cache != nullptr && l + 1 < layers) cache->activations.push_back(h);
        }
        return h;
    }

    // Parameter gradient of sum(grad_out * output) given the cache of the matching forward call.
    std::vector<double> backward(const Cache& cache, const Tensor& grad_out) const {
        const std::size_t layers = widths_.size() - 1;
        if (cache.activations.size() != layers) throw ContractError("toy network: stale forward cache");
        std::vector<double> grad(params_.size(), 0.0);
        Tensor g = grad_out;
        const std::size_t rows = g.rows();
        for (std::size_t l = layers; l-- > 0;) {
            const std::size_t n_in = widths_[l], n_out = widths_[l + 1];
            const Tensor& h = cache.activations[l];
            const double* w = params_.data() + weight_offset(l);
            double* gw = grad.data() + weight_offset(l);
            double* gb = gw + n_in * n_out;
            for (std::size_t r = 0; r < rows; ++r) {
                const double* gr = g.data.data() + r * n_out;
                const double* hr = h.data.data() + r * n_in;
                for (std::size_t i = 0; i < n_in; ++i) {
                    const double hi = hr[i];
                    double* gwi = gw + i * n_out;
                    for (std::size_t j = 0; j < n_out; ++j) gwi[j] += hi * gr[j];
                }
                for (std::size_t j = 0; j < n_out; ++j) gb[j] += gr[j];
            }
            if (l == 0) break;
            Tensor prev(Shape{rows, n_in});
            for (std::size_t r = 0; r < rows; ++r) {
                const double* gr = g.data.data() + r * n_out;
                const double* hr = h.data.data() + r * n_in;
                double* pr = prev.data.data() + r * n_in;
                for (std::size_t i = 0; i < n_in; ++i) {
                    const double* wi = w + i * n_out;
                    double acc = 0.0;
                    for (std::size_t j = 0; j < n_out; ++j) acc += wi[j] * gr[j];
                    pr[i] = acc * (1.0 - hr[i] * hr[i]);
                }
            }
            g = std::move(prev);
        }
        return grad;
    }

private:
    std::size_t weight_offset(std::size_t layer) const {
        std::size_t off = 0;
        for (std::size_t l = 0; l < layer; ++l) off += widths_[l] * widths_[l + 1] + widths_[l + 1];
        return off;
    }

    std::vector<std::size_t> widths_;
    std::vector<double> params_;
    std::size_t input_dim_ = 0;
    std::size_t cond_dim_ = 0;
};

}  // namespace deskdiff
