// Copyright (C) 2026 The deskdiff Authors
// SPDX-License-Identifier: Apache-2.0

// Acceptance suite. Prints one PASS/FAIL line per criterion and exits nonzero if any fail.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <map>
#include <numeric>
#include <random>
#include <set>
#include <string>
#include <vector>

#include <fmt/core.h>

#include "deskdiff/bucketing.hpp"
#include "deskdiff/experiment.hpp"
#include "deskdiff/precond.hpp"
#include "deskdiff/sampler.hpp"
#include "deskdiff/schedule.hpp"
#include "deskdiff/stats.hpp"
#include "deskdiff/toy_network.hpp"
#include "deskdiff/train.hpp"

using namespace deskdiff;

namespace {

struct Outcome {
    bool pass = true;
    std::string detail;
};

// A fixed smooth raw network used for the first-step comparison.
struct SmoothNetwork : RawNetwork {
    Tensor evaluate(const Tensor& x, double sigma, Condition) const override {
        Tensor out(x.shape);
        const double s = std::log(sigma) / 10.0;
        for (std::size_t i = 0; i < x.size(); ++i) {
            out[i] = 0.8 * std::tanh(x[i] + 0.3 * s) + 0.2 * std::sin(1.7 * x[i]) - 0.5 + 0.1 * s;
        }
        return out;
    }
};

double max_abs(const Tensor& t) {
    double m = 0.0;
    for (double v : t.data) m = std::max(m, std::abs(v));
    return m;
}

double max_abs_diff(const Tensor& a, const Tensor& b) {
    double m = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
    return m;
}

Outcome sigma_max_reproduction() {
    const SigmaSchedule s = sigma_view(build_vp_schedule(1000, kSdxlBetaStart, kSdxlBetaEnd));
    const double top = s.sigmas.front();
    return {top >= 14.5 && top <= 14.7, fmt::format("terminal sigma {:.6f}", top)};
}

Outcome ztsnr_schedule() {
    const NoiseSchedule zt = rescale_to_ztsnr(build_vp_schedule());
    const SigmaSchedule view = sigma_view(zt);
    const SigmaSchedule ladder = inference_sigmas(view, 28);
    const double labels[] = {56.2, 25.9, 16.0, 11.1};
    Outcome o;
    o.pass = zt.alpha_bars.back() == 0.0 && view.sigmas.front() == kDefaultTerminalClamp &&
             ladder.sigmas.front() == kDefaultTerminalClamp;
    o.detail = fmt::format("terminal alpha_bar {}, first sigma {}, sigmas 2-5:", zt.alpha_bars.back(), view.sigmas.front());
    for (std::size_t k = 0; k < 4; ++k) {
        const double got = ladder.sigmas[k + 1];
        o.pass = o.pass && std::abs(got - labels[k]) <= 0.1 * labels[k];
        o.detail += fmt::format(" {:.2f}", got);
    }
    return o;
}

Outcome preconditioner_limits() {
    const Scalings s = Preconditioner{1.0}.scalings(20000.0);
    return {std::abs(s.c_skip) < 1e-8 && std::abs(s.c_out + 1.0) < 1e-8,
            fmt::format("c_skip {:.3e}, c_out + 1 {:.3e}", s.c_skip, s.c_out + 1.0)};
}

Outcome ztsnr_step_equivalence() {
    const Preconditioner p{};
    const SigmaSchedule ladder = inference_sigmas(sigma_view(rescale_to_ztsnr(build_vp_schedule())), 28);
    const double sigma0 = ladder.sigmas[0], sigma1 = ladder.sigmas[1];
    const SmoothNetwork f;
    double worst = 0.0;
    for (std::uint64_t seed = 0; seed < 100; ++seed) {
        std::mt19937_64 rng(seed);
        const Tensor n = gaussian_tensor(Shape{64, 2}, rng);
        const Tensor x = scaled(sigma0, n);
        const Tensor finite = euler_step(x, denoise(p, f, x, sigma0), sigma0, sigma1);
        const Tensor analytic = ztsnr_first_step(n, sigma1, p, f, sigma0);
        worst = std::max(worst, max_abs_diff(analytic, finite) / max_abs(finite));
    }
    return {worst < 1e-3, fmt::format("worst relative error {:.3e} over 100 seeds", worst)};
}

Outcome mean_leakage() {
    Outcome o;
    const auto start = std::chrono::steady_clock::now();
    for (std::uint64_t seed = 7; seed < 12; ++seed) {
        MeanLeakageConfig cfg;
        cfg.seed = seed;
        const MeanLeakageResult r = run_mean_leakage(cfg);
        const bool ok = r.ztsnr.relative_error < 0.10 && r.no_ztsnr.mean_error >= 2.0 * r.ztsnr.mean_error &&
                        r.no_ztsnr.projection < 1.0;
        o.pass = o.pass && ok;
        o.detail += fmt::format("seed {}: ztsnr {:.1f}%, stock {:.1f}% (x{:.2f}); ", seed, 100 * r.ztsnr.relative_error,
                                100 * r.no_ztsnr.relative_error, r.no_ztsnr.mean_error / r.ztsnr.mean_error);
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    o.pass = o.pass && secs < 120.0;
    o.detail += fmt::format("{:.1f}s", secs);
    return o;
}

bool partition_holds(const std::vector<BucketedItem>& items, const BucketLayout& layout, std::size_t world,
                     std::size_t bsz, std::uint64_t seed, std::size_t epoch) {
    const EpochPlan plan = plan_epoch(items, layout, epoch, world, bsz, seed);
    std::map<std::string, std::size_t> bucket_of;
    for (const auto& it : items) bucket_of[it.id] = it.bucket;
    std::set<std::string> seen;
    const std::size_t expected = items.size() / (world * bsz) * (world * bsz);
    std::size_t total = 0;
    if (plan.ranks.size() != world) return false;
    for (const auto& rank : plan.ranks) {
        if (rank.size() != plan.ranks[0].size()) return false;
        std::size_t catch_alls = 0;
        for (const auto& b : rank) {
            if (b.ids.size() != bsz || b.item_buckets.size() != bsz) return false;
            for (std::size_t k = 0; k < bsz; ++k) {
                if (!seen.insert(b.ids[k]).second) return false;
                if (bucket_of.at(b.ids[k]) != b.item_buckets[k]) return false;
                if (b.bucket && b.item_buckets[k] != *b.bucket) return false;
            }
            catch_alls += b.catch_all();
            total += bsz;
        }
        // Catch-all batches hold only remainders, fewer than bsz per bucket.
        if (catch_alls * bsz > layout.buckets.size() * (bsz - 1)) return false;
    }
    return total == expected;
}

Outcome bucketing() {
    Outcome o;
    const BucketLayout layout = generate_buckets();
    const std::vector<Resolution> hand{{256, 1024}, {448, 832}, {512, 768}, {576, 640}, {832, 448}, {1024, 384}, {512, 512}};
    bool layout_ok = true;
    for (const auto& r : hand) {
        layout_ok = layout_ok && std::find(layout.buckets.begin(), layout.buckets.end(), r) != layout.buckets.end();
    }
    o.detail = fmt::format("layout {} ({} buckets); ", layout_ok ? "ok" : "missing hand buckets", layout.buckets.size());

    std::mt19937_64 rng(2024);
    bool part_ok = true;
    for (int trial = 0; trial < 1000 && part_ok; ++trial) {
        const std::size_t world = 1 + rng() % 4, bsz = 1 + rng() % 8;
        const std::size_t n = world * bsz + rng() % 400;
        std::vector<BucketedItem> items;
        const std::size_t used = 1 + rng() % layout.buckets.size();
        for (std::size_t i = 0; i < n; ++i) items.push_back({fmt::format("m{}-{}", trial, i), rng() % used});
        part_ok = partition_holds(items, layout, world, bsz, rng(), rng() % 50);
    }
    o.detail += fmt::format("partition {}; ", part_ok ? "exact on 1000 manifests" : "VIOLATED");

    // Bucket sizes 25, 13, 7 with batch size 5 leave lists of 25, 10, 5 and a catch-all of 5.
    std::vector<BucketedItem> items;
    const std::size_t sizes[] = {25, 13, 7};
    for (std::size_t b = 0; b < 3; ++b) {
        for (std::size_t i = 0; i < sizes[b]; ++i) items.push_back({fmt::format("b{}-{}", b, i), b});
    }
    const std::vector<double> expect{25.0 / 45, 10.0 / 45, 5.0 / 45, 5.0 / 45};
    std::vector<double> counts(4, 0.0);
    constexpr std::size_t kTrials = 10000;
    for (std::size_t epoch = 0; epoch < kTrials; ++epoch) {
        const Batch first = plan_epoch(items, layout, epoch, 1, 5, 99).ranks[0].front();
        counts[first.bucket ? *first.bucket : 3] += 1.0;
    }
    bool freq_ok = true;
    o.detail += "first-draw z:";
    for (std::size_t k = 0; k < 4; ++k) {
        const double sd = std::sqrt(kTrials * expect[k] * (1 - expect[k]));
        const double z = (counts[k] - kTrials * expect[k]) / sd;
        freq_ok = freq_ok && std::abs(z) <= 3.0;
        o.detail += fmt::format(" {:+.2f}", z);
    }

    double worst = 0.0;
    std::uniform_int_distribution<int> dim(64, 4096);
    for (int k = 0; k < 10000; ++k) {
        const Resolution image{dim(rng), dim(rng)};
        const Resolution& bucket = layout.buckets[rng() % layout.buckets.size()];
        const double d = std::abs(image.log_aspect() - bucket.log_aspect());
        worst = std::max(worst, std::abs(crop_fraction(image, bucket) - (1.0 - std::exp(-d))));
    }
    o.detail += fmt::format("; crop fraction worst {:.2e}", worst);
    o.pass = layout_ok && part_ok && freq_ok && worst < 1e-9;
    return o;
}

Outcome welford() {
    std::mt19937_64 rng(77);
    std::normal_distribution<double> normal(4.8119, 9.9181);
    std::vector<double> v(100000);
    for (double& x : v) x = normal(rng);
    RunningMoments m;
    for (double x : v) m.push(x);
    const double mean = std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
    double ss = 0.0;
    for (double x : v) ss += (x - mean) * (x - mean);
    const double sd = std::sqrt(ss / static_cast<double>(v.size() - 1));
    const double err = std::max(std::abs(m.mean - mean), std::abs(m.stddev() - sd));

    const ScaleShift table = reference_anime_latent_stats();
    const double avg = std::accumulate(table.std.begin(), table.std.end(), 0.0) / static_cast<double>(table.std.size());
    return {err < 1e-10 && std::abs(avg - 7.4467) <= 1e-4 && std::abs(1.0 / avg - 0.1343) <= 1e-4,
            fmt::format("oracle gap {:.2e}; mean channel std {:.5f}, reciprocal {:.5f}", err, avg, 1.0 / avg)};
}

double probe_objective(const ToyNetwork& net, const Tensor& feat, const Tensor& probe) {
    const Tensor out = net.forward(feat);
    double acc = 0.0;
    for (std::size_t i = 0; i < out.size(); ++i) acc += probe[i] * out[i];
    return acc;
}

Outcome gradient_check() {
    ToyNetwork net(2, 1, {64, 64}, 21);
    std::mt19937_64 rng(22);
    const Tensor x = gaussian_tensor(Shape{6, 2}, rng);
    const Tensor cond = gaussian_tensor(Shape{6, 1}, rng);
    const std::vector<double> sigmas{0.03, 0.4, 2.0, 9.0, 14.6, 20000.0};
    const Tensor feat = net.features(x, sigmas, &cond);
    const Tensor probe = gaussian_tensor(Shape{6, 2}, rng);
    ToyNetwork::Cache cache;
    net.forward(feat, &cache);
    const std::vector<double> grad = net.backward(cache, probe);

    auto params = net.parameters();
    std::uniform_int_distribution<std::size_t> pick(0, params.size() - 1);
    constexpr double kStep = 1e-6;
    double worst = 0.0;
    for (int k = 0; k < 200; ++k) {
        const std::size_t i = pick(rng);
        const double saved = params[i];
        params[i] = saved + kStep;
        const double up = probe_objective(net, feat, probe);
        params[i] = saved - kStep;
        const double down = probe_objective(net, feat, probe);
        params[i] = saved;
        const double numeric = (up - down) / (2 * kStep);
        worst = std::max(worst, std::abs(numeric - grad[i]) / std::max({std::abs(numeric), std::abs(grad[i]), 1e-6}));
    }
    return {worst < 1e-4, fmt::format("worst relative error {:.2e} over 200 coordinates", worst)};
}

Outcome pooled_noise() {
    constexpr std::size_t kSide = 2000;
    std::mt19937_64 rng(5);
    std::normal_distribution<double> normal;
    std::vector<double> field(kSide * kSide);
    for (double& v : field) v = normal(rng);
    RunningMoments m;
    for (std::size_t r = 0; r < kSide; r += 2) {
        for (std::size_t c = 0; c < kSide; c += 2) {
            m.push(0.25 * (field[r * kSide + c] + field[r * kSide + c + 1] + field[(r + 1) * kSide + c] +
                           field[(r + 1) * kSide + c + 1]));
        }
    }
    return {std::abs(m.stddev() - 0.5) <= 0.005, fmt::format("pooled std {:.5f} over {} samples", m.stddev(), m.count)};
}

Outcome minsnr() {
    constexpr double kGamma = 5.0;
    bool ok = minsnr_weight(0.0, kGamma, MinSnrVariant::ztsnr_safe) == 1.0 &&
              minsnr_weight(0.0, kGamma, MinSnrVariant::standard) == 0.0;
    std::size_t mismatches = 0;
    for (int k = 0; k < 1000; ++k) {
        const double snr = std::pow(10.0, -4.0 + 8.0 * k / 999.0);
        const double clipped = std::min(snr, kGamma);
        mismatches += minsnr_weight(snr, kGamma, MinSnrVariant::standard) != clipped / (snr + 1.0);
        mismatches += minsnr_weight(snr, kGamma, MinSnrVariant::ztsnr_safe) != (clipped + 1.0) / (snr + 1.0);
    }
    ok = ok && mismatches == 0;
    return {ok, fmt::format("{} mismatches on 1000 SNR values", mismatches)};
}

}  // namespace

int main() {
    const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria{
        {"sigma_max reproduction", sigma_max_reproduction},
        {"ZTSNR schedule", ztsnr_schedule},
        {"preconditioner limits", preconditioner_limits},
        {"ZTSNR-step equivalence", ztsnr_step_equivalence},
        {"mean-leakage experiment", mean_leakage},
        {"bucketing", bucketing},
        {"Welford", welford},
        {"gradient check", gradient_check},
        {"sigma_max resolution rule", pooled_noise},
        {"MinSNR", minsnr},
    };
    int failures = 0;
    for (std::size_t i = 0; i < criteria.size(); ++i) {
        const auto start = std::chrono::steady_clock::now();
        Outcome o;
        try {
            o = criteria[i].second();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        failures += !o.pass;
        fmt::print("criterion {:2}: {} {} [{:.2f}s] {}\n", i + 1, o.pass ? "PASS" : "FAIL", criteria[i].first, secs, o.detail);
        std::fflush(stdout);
    }
    fmt::print("{} of {} criteria passed\n", criteria.size() - failures, criteria.size());
    return failures == 0 ? 0 : 1;
}
