// Copyright (C) 2026 The deskdiff Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <algorithm>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "deskdiff/bucketing.hpp"
#include "deskdiff/config.hpp"
#include "deskdiff/csv.hpp"
#include "deskdiff/errors.hpp"
#include "deskdiff/experiment.hpp"
#include "deskdiff/manifest.hpp"
#include "deskdiff/model_io.hpp"
#include "deskdiff/sampler.hpp"
#include "deskdiff/schedule.hpp"
#include "deskdiff/stats.hpp"
#include "deskdiff/svg_plot.hpp"
#include "deskdiff/tensor_file.hpp"
#include "deskdiff/train.hpp"

namespace deskdiff::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 1;
inline constexpr int kExitData = 2;

namespace detail {

// Writes to `path`, or to `fallback` when path is empty or "-".
inline void emit(const std::string& path, std::ostream& fallback, const std::function<void(std::ostream&)>& body) {
    if (path.empty() || path == "-") {
        body(fallback);
        return;
    }
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot open '" + path + "' for writing");
    body(out);
}

inline std::ifstream open_input(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open '" + path + "'");
    return in;
}

inline std::vector<std::string> dim_header(const std::string& prefix, std::size_t n) {
    std::vector<std::string> h;
    for (std::size_t k = 0; k < n; ++k) h.push_back(prefix + std::to_string(k));
    return h;
}

inline void write_tensor_rows(std::ostream& out, const Tensor& t, const std::vector<std::string>& lead = {}) {
    for (std::size_t r = 0; r < t.rows(); ++r) {
        std::vector<std::string> cells = lead;
        for (double v : t.row(r)) cells.push_back(csv::num(v));
        csv::write_row(out, cells);
    }
}

inline NoiseSchedule make_schedule(std::size_t steps, double beta_start, double beta_end, bool ztsnr) {
    NoiseSchedule s = build_vp_schedule(steps, beta_start, beta_end);
    return ztsnr ? rescale_to_ztsnr(s) : s;
}

// ---- schedule ----------------------------------------------------------------------------

struct ScheduleArgs {
    std::size_t steps = kDefaultTrainSteps;
    bool ztsnr = false;
    double clamp = kDefaultTerminalClamp;
    std::size_t inference_steps = 0;
    double beta_start = kSdxlBetaStart;
    double beta_end = kSdxlBetaEnd;
    std::string output;
};

inline void run_schedule(const ScheduleArgs& a, std::ostream& out) {
    const NoiseSchedule s = make_schedule(a.steps, a.beta_start, a.beta_end, a.ztsnr);
    SigmaSchedule table = sigma_view(s, a.clamp);
    if (a.inference_steps > 0) table = inference_sigmas(table, a.inference_steps);
    emit(a.output, out, [&](std::ostream& o) {
        o << "index,timestep,alpha_bar,sigma,snr\n";
        for (std::size_t i = 0; i < table.timesteps.size(); ++i) {
            const std::size_t t = table.timesteps[i];
            const double ab = s.alpha_bars[t];
            csv::write_row(o, std::vector<std::string>{std::to_string(i), std::to_string(t), csv::num(ab),
                                                       csv::num(table.sigmas[i]), csv::num(snr_from_alpha_bar(ab))});
        }
    });
}

// ---- buckets -----------------------------------------------------------------------------

struct BucketArgs {
    long long max_area = 512LL * 768;
    int max_dim = 1024;
    int step = 64;
    double prune_threshold = kDefaultPruneThreshold;
    std::string manifest;
    std::string output;
    std::size_t epoch = 0;
    std::size_t world_size = 1;
    std::size_t batch_size = 1;
    std::uint64_t seed = 0;
};

inline Manifest load_manifest(const std::string& path) {
    auto in = open_input(path);
    return read_manifest(in);
}

inline void run_buckets_generate(const BucketArgs& a, std::ostream& out) {
    const BucketLayout layout = generate_buckets(a.max_area, a.max_dim, a.step);
    emit(a.output, out, [&](std::ostream& o) {
        o << "width,height,aspect\n";
        for (const auto& b : layout.buckets) {
            csv::write_row(o, std::vector<std::string>{std::to_string(b.width), std::to_string(b.height),
                                                       csv::num(b.aspect())});
        }
    });
}

inline void run_buckets_assign(const BucketArgs& a, std::ostream& out) {
    const BucketLayout layout = generate_buckets(a.max_area, a.max_dim, a.step);
    const Manifest manifest = load_manifest(a.manifest);
    emit(a.output, out, [&](std::ostream& o) {
        for (const auto& item : manifest) {
            const Assignment as = assign_bucket(layout, {item.width, item.height}, a.prune_threshold);
            nlohmann::json j = to_json(item);
            j["distance"] = as.distance;
            if (as.bucket) {
                j["bucket"] = *as.bucket;
                j["bucket_width"] = layout.buckets[*as.bucket].width;
                j["bucket_height"] = layout.buckets[*as.bucket].height;
            } else {
                j["bucket"] = nullptr;
            }
            o << j.dump() << '\n';
        }
    });
}

inline void run_buckets_plan(const BucketArgs& a, std::ostream& out) {
    const BucketLayout layout = generate_buckets(a.max_area, a.max_dim, a.step);
    const ManifestAssignment assigned = assign_manifest(load_manifest(a.manifest), layout, a.prune_threshold);
    const EpochPlan plan = plan_epoch(assigned.items, layout, a.epoch, a.world_size, a.batch_size, a.seed);
    emit(a.output, out, [&](std::ostream& o) {
        for (std::size_t rank = 0; rank < plan.ranks.size(); ++rank) {
            for (std::size_t b = 0; b < plan.ranks[rank].size(); ++b) {
                const Batch& batch = plan.ranks[rank][b];
                nlohmann::json j = {{"epoch", plan.epoch}, {"rank", rank}, {"batch", b}, {"ids", batch.ids},
                                    {"item_buckets", batch.item_buckets}};
                if (batch.bucket) {
                    j["bucket"] = *batch.bucket;
                    j["width"] = layout.buckets[*batch.bucket].width;
                    j["height"] = layout.buckets[*batch.bucket].height;
                } else {
                    j["bucket"] = nullptr;
                }
                o << j.dump() << '\n';
            }
        }
    });
}

// ---- stats -------------------------------------------------------------------------------

struct StatsArgs {
    std::vector<std::string> inputs;
    std::string stats;
    std::string input;
    std::string output;
    int channel_axis = -1;
    bool inverse = false;
    double legacy_scale = 0.0;
};

inline std::size_t axis_for(const Tensor& t, int requested) {
    return requested < 0 ? default_channel_axis(t) : static_cast<std::size_t>(requested);
}

inline void write_stats_csv(std::ostream& o, const ChannelStats& s) {
    o << "channel,mean,std,count\n";
    for (std::size_t c = 0; c < s.size(); ++c) {
        csv::write_row(o, std::vector<std::string>{std::to_string(c), csv::num(s.channels[c].mean),
                                                   csv::num(s.channels[c].stddev()),
                                                   std::to_string(s.channels[c].count)});
    }
}

inline ScaleShift read_stats_csv(std::istream& in) {
    const csv::Table t = csv::read(in);
    const auto mean = t.column("mean"), std = t.column("std");
    if (mean < 0 || std < 0) throw DataError("stats csv: needs mean and std columns");
    ScaleShift s;
    for (const auto& row : t.rows) {
        s.mean.push_back(csv::parse_double(row[static_cast<std::size_t>(mean)]));
        s.std.push_back(csv::parse_double(row[static_cast<std::size_t>(std)]));
    }
    return s;
}

inline void run_stats_welford(const StatsArgs& a, std::ostream& out) {
    if (a.inputs.empty()) throw ParameterError("stats welford: no input tensors");
    std::optional<ChannelStats> state;
    for (const auto& path : a.inputs) {
        const Tensor t = load_tensor(path).tensor;
        const std::size_t axis = axis_for(t, a.channel_axis);
        if (axis >= t.shape.size()) throw ParameterError("stats welford: channel axis out of range");
        if (!state) state.emplace(t.shape[axis]);
        welford_update(*state, t, axis);
    }
    emit(a.output, out, [&](std::ostream& o) { write_stats_csv(o, *state); });
}

inline void run_stats_normalize(const StatsArgs& a) {
    const LoadedTensor loaded = load_tensor(a.input);
    const std::size_t axis = axis_for(loaded.tensor, a.channel_axis);
    Tensor result;
    if (a.legacy_scale > 0.0) {
        result = a.inverse ? unscale_only(loaded.tensor, a.legacy_scale) : scale_only(loaded.tensor, a.legacy_scale);
    } else {
        if (a.stats.empty()) throw ParameterError("stats normalize: --stats or --legacy-scale required");
        auto in = open_input(a.stats);
        const ScaleShift s = read_stats_csv(in);
        result = a.inverse ? denormalize(loaded.tensor, s, axis) : normalize(loaded.tensor, s, axis);
    }
    save_tensor(a.output.empty() ? a.input : a.output, result, loaded.dtype);
}

// ---- train-toy / sample-toy --------------------------------------------------------------

struct TrainArgs {
    std::string config;
    std::string output = "model.nvt";
    std::string loss_log;
};

inline TrainingSet load_training_csv(const std::string& path) {
    auto in = open_input(path);
    const csv::Table t = csv::read(in);
    std::vector<std::size_t> xcols, ccols;
    std::ptrdiff_t idcol = -1;
    for (std::size_t i = 0; i < t.header.size(); ++i) {
        if (t.header[i] == "id") {
            idcol = static_cast<std::ptrdiff_t>(i);
        } else if (t.header[i].rfind("cond", 0) == 0) {
            ccols.push_back(i);
        } else {
            xcols.push_back(i);
        }
    }
    if (t.rows.empty() || xcols.empty()) throw DataError("training csv: no data");
    TrainingSet data;
    data.x0 = Tensor(Shape{t.rows.size(), xcols.size()});
    if (!ccols.empty()) data.cond = Tensor(Shape{t.rows.size(), ccols.size()});
    for (std::size_t r = 0; r < t.rows.size(); ++r) {
        for (std::size_t k = 0; k < xcols.size(); ++k) data.x0[r * xcols.size() + k] = csv::parse_double(t.rows[r][xcols[k]]);
        for (std::size_t k = 0; k < ccols.size(); ++k) data.cond[r * ccols.size() + k] = csv::parse_double(t.rows[r][ccols[k]]);
        data.ids.push_back(idcol >= 0 ? t.rows[r][static_cast<std::size_t>(idcol)] : std::to_string(r));
    }
    return data;
}

inline std::map<std::string, double> load_weight_csv(const std::string& path) {
    auto in = open_input(path);
    const csv::Table t = csv::read(in);
    const auto id = t.column("id"), w = t.column("weight");
    if (id < 0 || w < 0) throw DataError("weights csv: needs id and weight columns");
    std::map<std::string, double> out;
    for (const auto& row : t.rows) out[row[static_cast<std::size_t>(id)]] = csv::parse_double(row[static_cast<std::size_t>(w)]);
    return out;
}

inline void run_train_toy(const TrainArgs& a, std::ostream& out) {
    const KeyValueConfig kv = KeyValueConfig::load(a.config);
    ModelInfo info;
    info.ztsnr = kv.get_bool("ztsnr", true);
    info.num_train_steps = kv.get_size("num_train_steps", kDefaultTrainSteps);
    info.beta_start = kv.get_double("beta_start", kSdxlBetaStart);
    info.beta_end = kv.get_double("beta_end", kSdxlBetaEnd);
    info.terminal_clamp = kv.get_double("terminal_clamp", kDefaultTerminalClamp);
    info.sigma_data = kv.get_double("sigma_data", 1.0);

    TrainConfig tc;
    tc.schedule = make_schedule(info.num_train_steps, info.beta_start, info.beta_end, info.ztsnr);
    tc.terminal_clamp = info.terminal_clamp;
    tc.minsnr_gamma = kv.get_double("minsnr_gamma", 5.0);
    const std::string variant = kv.get("minsnr_variant", "ztsnr_safe");
    if (variant == "standard") {
        tc.minsnr_variant = MinSnrVariant::standard;
    } else if (variant == "ztsnr_safe") {
        tc.minsnr_variant = MinSnrVariant::ztsnr_safe;
    } else {
        throw DataError("config: minsnr_variant must be standard or ztsnr_safe");
    }
    tc.learning_rate = kv.get_double("learning_rate", 0.01);
    const std::string lr_schedule = kv.get("lr_schedule", "constant");
    if (lr_schedule != "constant" && lr_schedule != "cosine") throw DataError("config: lr_schedule must be constant or cosine");
    tc.cosine_decay = lr_schedule == "cosine";
    tc.steps = kv.get_size("steps", 3000);
    tc.batch_size = kv.get_size("batch_size", 64);
    tc.seed = kv.get_size("seed", 0);
    tc.cond_dropout = kv.get_double("cond_dropout", 0.0);
    tc.hidden.clear();
    for (double h : kv.get_list("hidden", {64, 64})) tc.hidden.push_back(static_cast<std::size_t>(h));

    TrainingSet data;
    if (kv.has("data")) {
        data = load_training_csv(kv.get("data", ""));
    } else {
        const std::vector<double> mean = kv.get_list("data_mean", {3.0, -2.0});
        data = gaussian_training_set(mean, kv.get_double("data_std", 0.0), kv.get_size("data_count", 1024), tc.seed);
    }
    if (kv.has("tag_weights")) tc.tag_weights = load_weight_csv(kv.get("tag_weights", ""));
    if (auto unused = kv.unused_keys(); !unused.empty()) throw DataError("config: unknown key '" + unused.front() + "'");

    const Preconditioner p{info.sigma_data};
    std::vector<std::pair<std::size_t, double>> losses;
    const ToyNetwork net = train_toy(tc, data, p, [&](std::size_t step, double loss) { losses.emplace_back(step, loss); });
    save_model(a.output, net, info);
    if (!a.loss_log.empty()) {
        emit(a.loss_log, out, [&](std::ostream& o) {
            o << "step,loss\n";
            for (const auto& [step, loss] : losses) {
                csv::write_row(o, std::vector<std::string>{std::to_string(step), csv::num(loss)});
            }
        });
    }
    out << "trained " << tc.steps << " steps; final loss " << csv::num(losses.empty() ? 0.0 : losses.back().second)
        << "; model written to " << a.output << '\n';
}

struct SampleArgs {
    std::string model;
    std::size_t steps = 28;
    std::optional<bool> ztsnr;
    double cfg = 1.0;
    std::uint64_t seed = 0;
    std::size_t samples = 256;
    std::vector<double> cond;
    std::string output;
    std::string intermediates;
};

inline void run_sample_toy(const SampleArgs& a, std::ostream& out) {
    const SavedModel model = load_model(a.model);
    const bool ztsnr = a.ztsnr.value_or(model.info.ztsnr);
    const NoiseSchedule s = make_schedule(model.info.num_train_steps, model.info.beta_start, model.info.beta_end, ztsnr);
    SamplerConfig sc;
    sc.sigmas = inference_sigmas(sigma_view(s, model.info.terminal_clamp), a.steps);
    sc.ztsnr_first_step = ztsnr;
    sc.cfg_scale = a.cfg;
    sc.seed = a.seed;
    sc.shape = Shape{a.samples, model.network.input_dim()};
    const Preconditioner p{model.info.sigma_data};

    std::optional<Condition> uncond;
    if (a.cfg > 1.0) uncond = Condition{};
    std::ostringstream steps;
    StepObserver observe;
    if (!a.intermediates.empty()) {
        std::vector<std::string> header{"step", "sigma"};
        const auto dims = dim_header("dim", model.network.input_dim());
        header.insert(header.end(), dims.begin(), dims.end());
        csv::write_row(steps, header);
        observe = [&](std::size_t step, double sigma, const Tensor& d) {
            write_tensor_rows(steps, d, {std::to_string(step), csv::num(sigma)});
        };
    }
    const Tensor x = sample(sc, p, model.network, a.cond, uncond, observe);
    emit(a.output, out, [&](std::ostream& o) {
        csv::write_row(o, dim_header("dim", x.cols()));
        write_tensor_rows(o, x);
    });
    if (!a.intermediates.empty()) emit(a.intermediates, out, [&](std::ostream& o) { o << steps.str(); });
}

// ---- demo-ztsnr --------------------------------------------------------------------------

struct DemoArgs {
    std::uint64_t seed = 7;
    std::size_t seeds = 1;
    std::size_t train_steps = MeanLeakageConfig{}.train_steps;
    std::size_t samples = MeanLeakageConfig{}.num_samples;
    std::string output;
};

inline void run_demo(const DemoArgs& a, std::ostream& out) {
    if (a.seeds == 0) throw ParameterError("demo-ztsnr: --seeds must be positive");
    std::ostringstream table;
    table << "seed,run,sigma_max,mean_x,mean_y,mean_error,relative_error\n";
    double zt_sum = 0.0, no_sum = 0.0;
    for (std::size_t k = 0; k < a.seeds; ++k) {
        MeanLeakageConfig cfg;
        cfg.seed = a.seed + k;
        cfg.train_steps = a.train_steps;
        cfg.num_samples = a.samples;
        const MeanLeakageResult r = run_mean_leakage(cfg);
        for (const auto& [name, run] : {std::pair{"ztsnr", r.ztsnr}, std::pair{"no_ztsnr", r.no_ztsnr}}) {
            csv::write_row(table, std::vector<std::string>{std::to_string(cfg.seed), name, csv::num(run.sigma_max),
                                                           csv::num(run.sample_mean[0]), csv::num(run.sample_mean[1]),
                                                           csv::num(run.mean_error), csv::num(run.relative_error)});
        }
        zt_sum += r.ztsnr.mean_error;
        no_sum += r.no_ztsnr.mean_error;
    }
    const double n = static_cast<double>(a.seeds);
    emit(a.output, out, [&](std::ostream& o) {
        o << table.str();
        o << "ztsnr_mean_error," << csv::num(zt_sum / n) << '\n';
        o << "no_ztsnr_mean_error," << csv::num(no_sum / n) << '\n';
    });
}

// ---- plot --------------------------------------------------------------------------------

struct PlotArgs {
    std::vector<std::string> inputs;
    std::string output = "plot.svg";
    std::string x;
    std::string y;
    std::string kind;
    std::string title;
    bool log_y = false;
};

inline void run_plot(const PlotArgs& a) {
    if (a.inputs.empty()) throw ParameterError("plot: no input csv");
    std::vector<plot::Series> series;
    plot::Spec spec;
    for (const auto& path : a.inputs) {
        auto in = open_input(path);
        const csv::Table t = csv::read(in);
        // Known layouts: sigma tables, sample dumps, loss logs, bucket lists.
        std::string x = a.x, y = a.y;
        std::string kind = a.kind;
        bool log_y = a.log_y;
        if (x.empty() && y.empty()) {
            if (t.column("sigma") >= 0 && t.column("index") >= 0) {
                x = "index", y = "sigma", log_y = true, kind = kind.empty() ? "line" : kind;
            } else if (t.column("dim0") >= 0 && t.column("dim1") >= 0) {
                x = "dim0", y = "dim1", kind = kind.empty() ? "scatter" : kind;
            } else if (t.column("step") >= 0 && t.column("loss") >= 0) {
                x = "step", y = "loss", log_y = true, kind = kind.empty() ? "line" : kind;
            } else if (t.column("width") >= 0 && t.column("height") >= 0) {
                x = "width", y = "height", kind = kind.empty() ? "scatter" : kind;
            } else if (t.header.size() >= 2) {
                x = t.header[0], y = t.header[1];
            }
        }
        const auto xi = t.column(x), yi = t.column(y);
        if (xi < 0 || yi < 0) throw DataError("plot: '" + path + "' lacks columns '" + x + "' and '" + y + "'");
        plot::Series s{path, {}, {}};
        for (const auto& row : t.rows) {
            s.x.push_back(csv::parse_double(row[static_cast<std::size_t>(xi)]));
            s.y.push_back(csv::parse_double(row[static_cast<std::size_t>(yi)]));
        }
        series.push_back(std::move(s));
        spec.x_label = x;
        spec.y_label = y;
        spec.log_y = log_y;
        spec.kind = kind == "scatter" ? plot::Kind::scatter : plot::Kind::line;
        if (!kind.empty() && kind != "line" && kind != "scatter") throw ParameterError("plot: --kind must be line or scatter");
    }
    spec.title = a.title.empty() ? spec.y_label + " vs " + spec.x_label : a.title;
    std::ofstream out(a.output);
    if (!out) throw DataError("cannot open '" + a.output + "' for writing");
    out << plot::render_svg(series, spec);
}

}  // namespace detail

// Entry point. `args` excludes the program name.
inline int run(const std::vector<std::string>& args, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
    CLI::App app{"deskdiff: zero-terminal-SNR diffusion toolkit"};
    app.require_subcommand(1);

    detail::ScheduleArgs sched;
    auto* c_sched = app.add_subcommand("schedule", "Emit a sigma table as CSV");
    c_sched->add_option("--steps", sched.steps, "Training timesteps");
    c_sched->add_flag("--ztsnr", sched.ztsnr, "Rescale to zero terminal SNR");
    c_sched->add_option("--clamp", sched.clamp, "Finite stand-in for sigma = inf");
    c_sched->add_option("--inference-steps", sched.inference_steps, "Uniformly spaced sampling steps (0 = full table)");
    c_sched->add_option("--beta-start", sched.beta_start);
    c_sched->add_option("--beta-end", sched.beta_end);
    c_sched->add_option("-o,--output", sched.output);

    detail::BucketArgs buck;
    auto* c_buck = app.add_subcommand("buckets", "Aspect-ratio bucketing");
    c_buck->require_subcommand(1);
    auto add_layout = [&](CLI::App* c) {
        c->add_option("--max-area", buck.max_area);
        c->add_option("--max-dim", buck.max_dim);
        c->add_option("--step", buck.step);
        c->add_option("-o,--output", buck.output);
    };
    auto* c_gen = c_buck->add_subcommand("generate", "Print the bucket layout as CSV");
    add_layout(c_gen);
    auto* c_assign = c_buck->add_subcommand("assign", "Annotate a JSONL manifest with bucket indices");
    add_layout(c_assign);
    c_assign->add_option("--manifest", buck.manifest)->required();
    c_assign->add_option("--prune-threshold", buck.prune_threshold);
    auto* c_plan = c_buck->add_subcommand("plan", "Emit one epoch's batches as JSONL");
    add_layout(c_plan);
    c_plan->add_option("--manifest", buck.manifest)->required();
    c_plan->add_option("--prune-threshold", buck.prune_threshold);
    c_plan->add_option("--epoch", buck.epoch);
    c_plan->add_option("--world-size", buck.world_size);
    c_plan->add_option("--batch-size", buck.batch_size);
    c_plan->add_option("--seed", buck.seed);

    detail::StatsArgs st;
    auto* c_stats = app.add_subcommand("stats", "Per-channel latent statistics");
    c_stats->require_subcommand(1);
    auto* c_welford = c_stats->add_subcommand("welford", "Stream tensor files into channel,mean,std,count CSV");
    c_welford->add_option("inputs", st.inputs)->required();
    c_welford->add_option("--channel-axis", st.channel_axis);
    c_welford->add_option("-o,--output", st.output);
    auto* c_norm = c_stats->add_subcommand("normalize", "Apply scale-and-shift to a tensor file");
    c_norm->add_option("--input", st.input)->required();
    c_norm->add_option("--stats", st.stats);
    c_norm->add_option("--legacy-scale", st.legacy_scale, "Scale-only factor, e.g. 0.13025");
    c_norm->add_flag("--inverse", st.inverse, "Denormalize instead");
    c_norm->add_option("--channel-axis", st.channel_axis);
    c_norm->add_option("-o,--output", st.output, "Defaults to rewriting --input");

    detail::TrainArgs tr;
    auto* c_train = app.add_subcommand("train-toy", "Train the toy denoiser from a key = value config");
    c_train->add_option("--config", tr.config)->required();
    c_train->add_option("-o,--output", tr.output);
    c_train->add_option("--loss-log", tr.loss_log);

    detail::SampleArgs sa;
    bool force_ztsnr = false, force_no_ztsnr = false;
    auto* c_sample = app.add_subcommand("sample-toy", "Sample a trained toy model");
    c_sample->add_option("--model", sa.model)->required();
    c_sample->add_option("--steps", sa.steps);
    auto* f_z = c_sample->add_flag("--ztsnr", force_ztsnr);
    c_sample->add_flag("--no-ztsnr", force_no_ztsnr)->excludes(f_z);
    c_sample->add_option("--cfg", sa.cfg);
    c_sample->add_option("--seed", sa.seed);
    c_sample->add_option("--samples", sa.samples);
    c_sample->add_option("--cond", sa.cond)->delimiter(',');
    c_sample->add_option("-o,--output", sa.output);
    c_sample->add_option("--intermediates", sa.intermediates);

    detail::DemoArgs demo;
    auto* c_demo = app.add_subcommand("demo-ztsnr", "Paired ZTSNR vs stock-schedule mean-leakage experiment");
    c_demo->add_option("--seed", demo.seed);
    c_demo->add_option("--seeds", demo.seeds, "Number of consecutive seeds");
    c_demo->add_option("--train-steps", demo.train_steps);
    c_demo->add_option("--samples", demo.samples);
    c_demo->add_option("-o,--output", demo.output);

    detail::PlotArgs pl;
    auto* c_plot = app.add_subcommand("plot", "Render CSV output as SVG");
    c_plot->add_option("inputs", pl.inputs)->required();
    c_plot->add_option("-o,--output", pl.output);
    c_plot->add_option("--x", pl.x);
    c_plot->add_option("--y", pl.y);
    c_plot->add_option("--kind", pl.kind);
    c_plot->add_option("--title", pl.title);
    c_plot->add_flag("--logy", pl.log_y);

    try {
        std::vector<std::string> reversed(args.rbegin(), args.rend());
        app.parse(reversed);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return kExitOk;
    } catch (const CLI::ParseError& e) {
        err << e.what() << '\n' << app.help();
        return kExitUsage;
    }

    try {
        if (c_sched->parsed()) {
            detail::run_schedule(sched, out);
        } else if (c_gen->parsed()) {
            detail::run_buckets_generate(buck, out);
        } else if (c_assign->parsed()) {
            detail::run_buckets_assign(buck, out);
        } else if (c_plan->parsed()) {
            detail::run_buckets_plan(buck, out);
        } else if (c_welford->parsed()) {
            detail::run_stats_welford(st, out);
        } else if (c_norm->parsed()) {
            detail::run_stats_normalize(st);
        } else if (c_train->parsed()) {
            detail::run_train_toy(tr, out);
        } else if (c_sample->parsed()) {
            if (force_ztsnr) sa.ztsnr = true;
            if (force_no_ztsnr) sa.ztsnr = false;
            detail::run_sample_toy(sa, out);
        } else if (c_demo->parsed()) {
            detail::run_demo(demo, out);
        } else if (c_plot->parsed()) {
            detail::run_plot(pl);
        }
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return kExitData;
    }
    return kExitOk;
}

}  // namespace deskdiff::cli
