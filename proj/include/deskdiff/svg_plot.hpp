// Copyright (C) 2026 The deskdiff Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include <fmt/format.h>

#include "deskdiff/errors.hpp"

namespace deskdiff::plot {

enum class Kind { line, scatter };

struct Series {
    std::string name;
    std::vector<double> x;
    std::vector<double> y;
};

struct Spec {
    std::string title;
    std::string x_label;
    std::string y_label;
    Kind kind = Kind::line;
    bool log_y = false;
    int width = 720;
    int height = 480;
};

namespace detail {

inline std::string escape(const std::string& s) {
    std::string out;
    for (char c : s) {
        switch (c) {
            case '&': out += "&amp;"; break;
            case '<': out += "&lt;"; break;
            case '>': out += "&gt;"; break;
            case '"': out += "&quot;"; break;
            default: out += c;
        }
    }
    return out;
}

inline const char* palette(std::size_t i) {
    static const char* colors[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b"};
    return colors[i % 6];
}

struct Range {
    double lo = std::numeric_limits<double>::infinity();
    double hi = -std::numeric_limits<double>::infinity();

    void add(double v) {
        lo = std::min(lo, v);
        hi = std::max(hi, v);
    }
    void pad() {
        if (!(hi > lo)) {
            lo -= 0.5;
            hi += 0.5;
        }
    }
    double map(double v, double a, double b) const { return a + (v - lo) / (hi - lo) * (b - a); }
};

}  // namespace detail

// Self-contained SVG document. Non-positive y values are dropped on a log axis.
inline std::string render_svg(const std::vector<Series>& series, const Spec& spec) {
    if (series.empty()) throw ParameterError("plot: no series");
    const double left = 80, right = spec.width - 20.0, top = 40, bottom = spec.height - 60.0;
    auto ty = [&](double v) { return spec.log_y ? std::log10(v) : v; };
    auto usable = [&](double x, double y) { return std::isfinite(x) && std::isfinite(y) && (!spec.log_y || y > 0); };

    detail::Range rx, ry;
    for (const auto& s : series) {
        if (s.x.size() != s.y.size()) throw ParameterError("plot: series x/y length mismatch");
        for (std::size_t i = 0; i < s.x.size(); ++i) {
            if (!usable(s.x[i], s.y[i])) continue;
            rx.add(s.x[i]);
            ry.add(ty(s.y[i]));
        }
    }
    if (!std::isfinite(rx.lo)) throw ParameterError("plot: no plottable points");
    rx.pad();
    ry.pad();

    std::string svg = fmt::format(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{}\" height=\"{}\" viewBox=\"0 0 {} {}\" "
        "font-family=\"sans-serif\" font-size=\"12\">\n<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n",
        spec.width, spec.height, spec.width, spec.height);
    svg += fmt::format("<text x=\"{:.1f}\" y=\"22\" text-anchor=\"middle\" font-size=\"15\">{}</text>\n",
                       spec.width / 2.0, detail::escape(spec.title));
    svg += fmt::format("<rect x=\"{:.1f}\" y=\"{:.1f}\" width=\"{:.1f}\" height=\"{:.1f}\" fill=\"none\" stroke=\"black\"/>\n",
                       left, top, right - left, bottom - top);

    constexpr int kTicks = 5;
    for (int k = 0; k <= kTicks; ++k) {
        const double fx = rx.lo + (rx.hi - rx.lo) * k / kTicks;
        const double px = rx.map(fx, left, right);
        svg += fmt::format("<line x1=\"{0:.1f}\" y1=\"{1:.1f}\" x2=\"{0:.1f}\" y2=\"{2:.1f}\" stroke=\"#ddd\"/>"
                           "<text x=\"{0:.1f}\" y=\"{3:.1f}\" text-anchor=\"middle\">{4:.4g}</text>\n",
                           px, top, bottom, bottom + 16, fx);
        const double fy = ry.lo + (ry.hi - ry.lo) * k / kTicks;
        const double py = ry.map(fy, bottom, top);
        const double label = spec.log_y ? std::pow(10.0, fy) : fy;
        svg += fmt::format("<line x1=\"{0:.1f}\" y1=\"{1:.1f}\" x2=\"{2:.1f}\" y2=\"{1:.1f}\" stroke=\"#ddd\"/>"
                           "<text x=\"{3:.1f}\" y=\"{4:.1f}\" text-anchor=\"end\">{5:.4g}</text>\n",
                           left, py, right, left - 6, py + 4, label);
    }
    svg += fmt::format("<text x=\"{:.1f}\" y=\"{:.1f}\" text-anchor=\"middle\">{}</text>\n", (left + right) / 2,
                       spec.height - 20.0, detail::escape(spec.x_label));
    svg += fmt::format("<text x=\"18\" y=\"{0:.1f}\" text-anchor=\"middle\" transform=\"rotate(-90 18 {0:.1f})\">{1}{2}</text>\n",
                       (top + bottom) / 2, detail::escape(spec.y_label), spec.log_y ? " (log)" : "");

    for (std::size_t s = 0; s < series.size(); ++s) {
        const auto& sr = series[s];
        const char* color = detail::palette(s);
        if (spec.kind == Kind::line) {
            std::string points;
            for (std::size_t i = 0; i < sr.x.size(); ++i) {
                if (!usable(sr.x[i], sr.y[i])) continue;
                points += fmt::format("{:.2f},{:.2f} ", rx.map(sr.x[i], left, right), ry.map(ty(sr.y[i]), bottom, top));
            }
            svg += fmt::format("<polyline fill=\"none\" stroke=\"{}\" stroke-width=\"1.5\" points=\"{}\"/>\n", color, points);
        } else {
            svg += fmt::format("<g fill=\"{}\" fill-opacity=\"0.5\">\n", color);
            for (std::size_t i = 0; i < sr.x.size(); ++i) {
                if (!usable(sr.x[i], sr.y[i])) continue;
                svg += fmt::format("<circle cx=\"{:.2f}\" cy=\"{:.2f}\" r=\"1.8\"/>\n", rx.map(sr.x[i], left, right),
                                   ry.map(ty(sr.y[i]), bottom, top));
            }
            svg += "</g>\n";
        }
        const double ly = top + 16.0 + 16.0 * static_cast<double>(s);
        svg += fmt::format("<rect x=\"{:.1f}\" y=\"{:.1f}\" width=\"10\" height=\"10\" fill=\"{}\"/>"
                           "<text x=\"{:.1f}\" y=\"{:.1f}\">{}</text>\n",
                           right - 150, ly - 9, color, right - 135, ly, detail::escape(sr.name));
    }
    svg += "</svg>\n";
    return svg;
}

}  // namespace deskdiff::plot
