// Copyright (C) 2026 The deskdiff Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <fstream>
#include <string>

#include <nlohmann/json.hpp>

#include "deskdiff/errors.hpp"
#include "deskdiff/schedule.hpp"
#include "deskdiff/tensor_file.hpp"
#include "deskdiff/toy_network.hpp"

namespace deskdiff {

// What a sampler needs to know about how a model was trained.
struct ModelInfo {
    bool ztsnr = false;
    std::size_t num_train_steps = kDefaultTrainSteps;
    double beta_start = kSdxlBetaStart;
    double beta_end = kSdxlBetaEnd;
    double terminal_clamp = kDefaultTerminalClamp;
    double sigma_data = 1.0;
};

struct SavedModel {
    ToyNetwork network;
    ModelInfo info;
};

inline std::string model_manifest_path(const std::string& weights_path) { return weights_path + ".json"; }

// Weights go to `path` as a 1-D f64 tensor (all layers concatenated, each weight matrix
// row-major [in, out] followed by its bias); shapes go to `path`.json.
inline void save_model(const std::string& path, const ToyNetwork& net, const ModelInfo& info) {
    const auto params = net.parameters();
    save_tensor(path, Tensor(Shape{params.size()}, std::vector<double>(params.begin(), params.end())));

    nlohmann::json layers = nlohmann::json::array();
    const auto& w = net.widths();
    for (std::size_t l = 0; l + 1 < w.size(); ++l) {
        layers.push_back({{"weight", {w[l], w[l + 1]}}, {"bias", {w[l + 1]}},
                          {"activation", l + 2 < w.size() ? "tanh" : "linear"}});
    }
    nlohmann::json manifest = {
        {"format", "deskdiff-toy-mlp"},
        {"widths", w},
        {"cond_dim", net.cond_dim()},
        {"layers", layers},
        {"ztsnr", info.ztsnr},
        {"num_train_steps", info.num_train_steps},
        {"beta_start", info.beta_start},
        {"beta_end", info.beta_end},
        {"terminal_clamp", info.terminal_clamp},
        {"sigma_data", info.sigma_data},
    };
    std::ofstream out(model_manifest_path(path));
    if (!out) throw DataError("cannot write model manifest for '" + path + "'");
    out << manifest.dump(2) << '\n';
}

inline SavedModel load_model(const std::string& path) {
    std::ifstream in(model_manifest_path(path));
    if (!in) throw DataError("missing model manifest '" + model_manifest_path(path) + "'");
    nlohmann::json m;
    try {
        m = nlohmann::json::parse(in);
    } catch (const nlohmann::json::exception& e) {
        throw DataError(std::string("model manifest: ") + e.what());
    }
    const LoadedTensor weights = load_tensor(path);
    if (weights.tensor.shape.size() != 1) throw DataError("model weights must be a 1-D tensor");
    try {
        SavedModel out{ToyNetwork(m.at("widths").get<std::vector<std::size_t>>(), m.at("cond_dim").get<std::size_t>(),
                                  weights.tensor.data),
                       {}};
        out.info.ztsnr = m.at("ztsnr").get<bool>();
        out.info.num_train_steps = m.at("num_train_steps").get<std::size_t>();
        out.info.beta_start = m.at("beta_start").get<double>();
        out.info.beta_end = m.at("beta_end").get<double>();
        out.info.terminal_clamp = m.at("terminal_clamp").get<double>();
        out.info.sigma_data = m.at("sigma_data").get<double>();
        return out;
    } catch (const nlohmann::json::exception& e) {
        throw DataError(std::string("model manifest: ") + e.what());
    }
}

}  // namespace deskdiff
