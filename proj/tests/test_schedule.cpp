// Copyright (C) 2026 The deskdiff Authors
// SPDX-License-Identifier: Apache-2.0

#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>

#include "deskdiff/schedule.hpp"

using namespace deskdiff;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

// Reference values computed independently with 40-digit arithmetic (mpmath) from the
// scaled-linear beta definition.
namespace ref {
constexpr double kSigmaFirst = 0.029167158151720067;
constexpr double kSigmaLast = 14.614641229333636;
constexpr double kAlphaBarLast = 0.0046600985130772404;
// ZTSNR sigmas at timesteps 962, 925, 888, 851.
constexpr double kZtsnrSigmas[] = {56.1782389487, 25.8995759302, 15.960121215, 11.0936738708};
// Stock schedule, 5 steps: timesteps 999, 749, 500, 250, 0.
constexpr double kFiveStep[] = {14.6146412293, 4.08172936372, 1.61827882602, 0.695798937062, 0.0291671581517};
}  // namespace ref

TEST_CASE("build_vp_schedule matches the extended-precision oracle", "[schedule]") {
    const NoiseSchedule s = build_vp_schedule(1000, 0.00085, 0.012);
    REQUIRE(s.num_steps == 1000);
    REQUIRE(s.betas.size() == 1000);
    REQUIRE(s.alpha_bars.size() == 1000);
    CHECK_FALSE(s.ztsnr);
    CHECK_THAT(sigma_from_alpha_bar(s.alpha_bars.front()), WithinRel(ref::kSigmaFirst, 1e-12));
    CHECK_THAT(sigma_from_alpha_bar(s.alpha_bars.back()), WithinRel(ref::kSigmaLast, 1e-12));
    CHECK_THAT(s.alpha_bars.back(), WithinRel(ref::kAlphaBarLast, 1e-12));
    CHECK_THAT(sigma_from_alpha_bar(s.alpha_bars.back()), WithinAbs(14.6, 0.05));
    CHECK_THAT(s.betas.front(), WithinRel(0.00085, 1e-14));
    CHECK_THAT(s.betas.back(), WithinRel(0.012, 1e-14));
    for (std::size_t t = 1; t < s.num_steps; ++t) REQUIRE(s.alpha_bars[t] < s.alpha_bars[t - 1]);
}

TEST_CASE("build_vp_schedule with two constant betas is the direct product", "[schedule]") {
    const NoiseSchedule s = build_vp_schedule(2, 0.5, 0.5);
    CHECK_THAT(s.alpha_bars[0], WithinRel(0.5, 1e-15));
    CHECK_THAT(s.alpha_bars[1], WithinRel(0.25, 1e-15));
}

TEST_CASE("build_vp_schedule rejects bad parameters", "[schedule]") {
    CHECK_THROWS_AS(build_vp_schedule(1, 0.1, 0.2), ParameterError);
    CHECK_THROWS_AS(build_vp_schedule(10, 0.0, 0.2), ParameterError);
    CHECK_THROWS_AS(build_vp_schedule(10, 0.3, 0.2), ParameterError);
    CHECK_THROWS_AS(build_vp_schedule(10, 0.1, 1.0), ParameterError);
}

TEST_CASE("rescale_to_ztsnr pins both endpoints", "[schedule]") {
    const NoiseSchedule base = build_vp_schedule();
    const NoiseSchedule zt = rescale_to_ztsnr(base);
    CHECK(zt.ztsnr);
    CHECK(zt.alpha_bars.back() == 0.0);
    CHECK(zt.alpha_bars.front() == base.alpha_bars.front());
    CHECK(zt.betas.back() == 1.0);
    for (std::size_t t = 1; t < zt.num_steps; ++t) REQUIRE(zt.alpha_bars[t] < zt.alpha_bars[t - 1]);
    // Betas stay consistent with the running product.
    double running = 1.0;
    for (std::size_t t = 0; t + 1 < zt.num_steps; ++t) {
        running *= 1.0 - zt.betas[t];
        REQUIRE_THAT(running, WithinRel(zt.alpha_bars[t], 1e-9));
    }
}

TEST_CASE("rescale_to_ztsnr hand-evaluated example", "[schedule]") {
    NoiseSchedule s;
    s.num_steps = 3;
    s.alpha_bars = {0.81, 0.25, 0.04};
    s.betas = {0.19, 1 - 0.25 / 0.81, 1 - 0.04 / 0.25};
    const NoiseSchedule zt = rescale_to_ztsnr(s);
    // sqrt: [0.9, 0.5, 0.2] -> 0.9 * ([0.9, 0.5, 0.2] - 0.2) / 0.7
    const double mid = 0.9 * 0.3 / 0.7;
    CHECK_THAT(zt.alpha_bars[0], WithinAbs(0.81, 1e-15));
    CHECK_THAT(zt.alpha_bars[1], WithinAbs(mid * mid, 1e-15));
    CHECK_THAT(zt.alpha_bars[1], WithinAbs(0.14878, 1e-5));
    CHECK(zt.alpha_bars[2] == 0.0);
}

TEST_CASE("rescale_to_ztsnr refuses to rescale twice", "[schedule]") {
    const NoiseSchedule zt = rescale_to_ztsnr(build_vp_schedule());
    CHECK_THROWS_AS(rescale_to_ztsnr(zt), IdempotenceError);
}

TEST_CASE("sigma_view conversions", "[schedule]") {
    CHECK(sigma_from_alpha_bar(0.5) == 1.0);
    CHECK(snr_from_alpha_bar(0.0) == 0.0);
    CHECK(snr_from_sigma(std::numeric_limits<double>::infinity()) == 0.0);

    const NoiseSchedule base = build_vp_schedule();
    const SigmaSchedule v = sigma_view(base);
    CHECK_THAT(v.sigmas.front(), WithinAbs(14.6, 0.05));
    CHECK(v.timesteps.front() == 999);
    CHECK(v.timesteps.back() == 0);

    const SigmaSchedule zv = sigma_view(rescale_to_ztsnr(base), 20000.0);
    CHECK(zv.sigmas.front() == 20000.0);
    CHECK(zv.terminal_clamp == 20000.0);

    CHECK_THROWS_AS(sigma_view(base, 99.0), ParameterError);
    CHECK_NOTHROW(sigma_view(base, 100.0));
}

TEST_CASE("sigma tables are strictly decreasing and SNR strictly increasing in sampling order", "[schedule]") {
    for (bool zt : {false, true}) {
        NoiseSchedule s = build_vp_schedule();
        if (zt) s = rescale_to_ztsnr(s);
        const SigmaSchedule v = sigma_view(s);
        for (std::size_t i = 1; i < v.sigmas.size(); ++i) {
            REQUIRE(v.sigmas[i] < v.sigmas[i - 1]);
            REQUIRE(v.sigmas[i] > 0.0);
            const double snr_prev = snr_from_alpha_bar(s.alpha_bars[v.timesteps[i - 1]]);
            const double snr_here = snr_from_alpha_bar(s.alpha_bars[v.timesteps[i]]);
            REQUIRE(snr_here > snr_prev);
            REQUIRE_THAT(snr_here, WithinRel(snr_from_sigma(v.sigmas[i]), 1e-9));
        }
    }
}

TEST_CASE("inference_sigmas on the ZTSNR schedule reproduces the reference 28-step ladder", "[schedule]") {
    const SigmaSchedule table = sigma_view(rescale_to_ztsnr(build_vp_schedule()), 20000.0);
    const SigmaSchedule inf = inference_sigmas(table, 28);
    REQUIRE(inf.sigmas.size() == 29);
    REQUIRE(inf.timesteps.size() == 28);
    CHECK(inf.sigmas.front() == 20000.0);
    CHECK(inf.timesteps[1] == 962);
    for (int i = 0; i < 4; ++i) CHECK_THAT(inf.sigmas[i + 1], WithinRel(ref::kZtsnrSigmas[i], 1e-8));
    // Published labels 56.2, 25.9, 16.0, 11.1.
    const double published[] = {56.2, 25.9, 16.0, 11.1};
    for (int i = 0; i < 4; ++i) CHECK_THAT(inf.sigmas[i + 1], WithinRel(published[i], 0.01));
    CHECK(inf.sigmas.back() == 0.0);
    CHECK(inf.ends_at_zero());
}

TEST_CASE("inference_sigmas selection is a subsequence with a trailing zero", "[schedule]") {
    const SigmaSchedule table = sigma_view(build_vp_schedule());
    const SigmaSchedule five = inference_sigmas(table, 5);
    REQUIRE(five.sigmas.size() == 6);
    for (int i = 0; i < 5; ++i) CHECK_THAT(five.sigmas[i], WithinRel(ref::kFiveStep[i], 1e-9));
    CHECK(five.timesteps == std::vector<std::size_t>{999, 749, 500, 250, 0});

    const SigmaSchedule all = inference_sigmas(table, 1000);
    REQUIRE(all.sigmas.size() == 1001);
    for (std::size_t i = 0; i < 1000; ++i) REQUIRE(all.sigmas[i] == table.sigmas[i]);

    for (std::size_t n : {2u, 3u, 10u, 28u, 50u, 999u}) {
        const SigmaSchedule sel = inference_sigmas(table, n);
        std::size_t cursor = 0;
        for (std::size_t i = 0; i < n; ++i) {
            while (cursor < table.sigmas.size() && table.sigmas[cursor] != sel.sigmas[i]) ++cursor;
            REQUIRE(cursor < table.sigmas.size());
        }
        REQUIRE(sel.timesteps.front() == 999);
        REQUIRE(sel.timesteps.back() == 0);
    }
}

TEST_CASE("inference_sigmas range checks", "[schedule]") {
    const SigmaSchedule table = sigma_view(build_vp_schedule());
    CHECK_THROWS_AS(inference_sigmas(table, 1), ParameterError);
    CHECK_THROWS_AS(inference_sigmas(table, 1001), ParameterError);
}

TEST_CASE("scale_sigma_max_for_resolution", "[schedule]") {
    CHECK_THAT(scale_sigma_max_for_resolution(14.6, 1.0, 4.0), WithinRel(29.2, 1e-15));
    CHECK(scale_sigma_max_for_resolution(14.6, 5.0, 5.0) == 14.6);
    CHECK_THAT(scale_sigma_max_for_resolution(10.0, 100.0, 900.0), WithinRel(30.0, 1e-15));
    CHECK_THROWS_AS(scale_sigma_max_for_resolution(10.0, 0.0, 1.0), ParameterError);
}

TEST_CASE("2x2 mean pooling halves the std of iid Gaussian noise", "[schedule][sigma_max]") {
    constexpr std::size_t kSide = 2000;  // 4e6 pixels -> 1e6 pooled samples
    std::mt19937_64 rng(11);
    std::normal_distribution<double> normal(0.0, 1.0);
    std::vector<double> field(kSide * kSide);
    for (double& v : field) v = normal(rng);
    double sum = 0.0, sum2 = 0.0;
    std::size_t n = 0;
    for (std::size_t y = 0; y < kSide; y += 2) {
        for (std::size_t x = 0; x < kSide; x += 2) {
            const double m = 0.25 * (field[y * kSide + x] + field[y * kSide + x + 1] + field[(y + 1) * kSide + x] +
                                     field[(y + 1) * kSide + x + 1]);
            sum += m;
            sum2 += m * m;
            ++n;
        }
    }
    const double mean = sum / n;
    const double sd = std::sqrt(sum2 / n - mean * mean);
    CHECK(n == 1000000);
    CHECK_THAT(sd, WithinRel(0.5, 0.01));
}
