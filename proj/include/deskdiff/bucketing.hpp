// Copyright (C) 2026 The deskdiff Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "deskdiff/errors.hpp"
#include "deskdiff/manifest.hpp"

namespace deskdiff {

struct Resolution {
    int width = 0;
    int height = 0;

    double aspect() const { return static_cast<double>(width) / static_cast<double>(height); }
    double log_aspect() const { return std::log(static_cast<double>(width)) - std::log(static_cast<double>(height)); }
    long long area() const { return static_cast<long long>(width) * height; }

    friend auto operator<=>(const Resolution&, const Resolution&) = default;
};

struct BucketLayout {
    std::vector<Resolution> buckets;
    long long max_area = 512LL * 768;
    int max_dim = 1024;
    int step = 64;
};

inline constexpr double kDefaultPruneThreshold = 0.7;

// Widths 256..max_dim by `step`; each takes the largest step-multiple height within max_dim and
// max_area. Repeated with the axes swapped, deduplicated, plus 512x512, sorted by (w, h).
inline BucketLayout generate_buckets(long long max_area = 512LL * 768, int max_dim = 1024, int step = 64) {
    if (max_area <= 0 || max_dim <= 0 || step <= 0) throw ParameterError("generate_buckets: parameters must be positive");
    if (256 % step != 0 || max_dim % step != 0) {
        throw ParameterError("generate_buckets: step must divide 256 and max_dim");
    }
    BucketLayout layout{{}, max_area, max_dim, step};
    for (int pass = 0; pass < 2; ++pass) {
        for (int w = 256; w <= max_dim; w += step) {
            const long long fit = std::min<long long>(max_dim, max_area / w);
            const int h = static_cast<int>(fit / step * step);
            if (h <= 0) continue;
            layout.buckets.push_back(pass == 0 ? Resolution{w, h} : Resolution{h, w});
        }
    }
    layout.buckets.push_back({512, 512});
    std::sort(layout.buckets.begin(), layout.buckets.end());
    layout.buckets.erase(std::unique(layout.buckets.begin(), layout.buckets.end()), layout.buckets.end());
    return layout;
}

struct Assignment {
    std::optional<std::size_t> bucket;  // empty when pruned
    double distance = 0.0;              // |log bucket aspect - log image aspect| of the best bucket
};

// Nearest bucket in log-aspect; ties go to the larger area.
inline Assignment assign_bucket(const BucketLayout& layout, Resolution image,
                                double prune_threshold = kDefaultPruneThreshold) {
    if (image.width <= 0 || image.height <= 0) throw ParameterError("assign_bucket: image dims must be positive");
    if (layout.buckets.empty()) throw ParameterError("assign_bucket: empty layout");
    constexpr double kTie = 1e-12;
    const double target = image.log_aspect();
    std::size_t best = 0;
    double best_d = std::abs(layout.buckets[0].log_aspect() - target);
    for (std::size_t i = 1; i < layout.buckets.size(); ++i) {
        const double d = std::abs(layout.buckets[i].log_aspect() - target);
        if (d < best_d - kTie || (std::abs(d - best_d) <= kTie && layout.buckets[i].area() > layout.buckets[best].area())) {
            best = i;
            best_d = d;
        }
    }
    if (best_d > prune_threshold) return {std::nullopt, best_d};
    return {best, best_d};
}

struct BucketedItem {
    std::string id;
    std::size_t bucket = 0;
};

struct ManifestAssignment {
    std::vector<BucketedItem> items;
    std::vector<std::string> pruned;
};

inline ManifestAssignment assign_manifest(const Manifest& manifest, const BucketLayout& layout,
                                          double prune_threshold = kDefaultPruneThreshold) {
    ManifestAssignment out;
    for (const auto& item : manifest) {
        const Assignment a = assign_bucket(layout, {item.width, item.height}, prune_threshold);
        if (a.bucket) {
            out.items.push_back({item.id, *a.bucket});
        } else {
            out.pruned.push_back(item.id);
        }
    }
    return out;
}

struct Batch {
    // Empty for catch-all batches, whose items keep their own buckets in `item_buckets`.
    std::optional<std::size_t> bucket;
    std::vector<std::string> ids;
    std::vector<std::size_t> item_buckets;

    bool catch_all() const { return !bucket.has_value(); }
};

struct EpochPlan {
    std::size_t epoch = 0;
    std::size_t world_size = 1;
    std::size_t batch_size = 1;
    std::uint64_t seed = 0;
    std::vector<std::vector<Batch>> ranks;
};

inline std::uint64_t epoch_seed(std::uint64_t seed, std::size_t epoch) { return seed ^ static_cast<std::uint64_t>(epoch); }

// Shuffles, trims to a multiple of world_size * batch_size, stripes contiguously across ranks,
// then per rank builds same-bucket batches drawn with probability proportional to what remains.
inline EpochPlan plan_epoch(const std::vector<BucketedItem>& items, const BucketLayout& layout, std::size_t epoch,
                            std::size_t world_size, std::size_t batch_size, std::uint64_t seed) {
    if (world_size == 0 || batch_size == 0) throw ParameterError("plan_epoch: world_size and batch_size must be positive");
    const std::size_t global = world_size * batch_size;
    if (items.size() < global) throw ParameterError("plan_epoch: fewer items than world_size * batch_size");
    for (const auto& it : items) {
        if (it.bucket >= layout.buckets.size()) throw ParameterError("plan_epoch: bucket index out of range");
    }

    EpochPlan plan{epoch, world_size, batch_size, seed, {}};
    std::vector<std::size_t> order(items.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::mt19937_64 shuffle_rng(epoch_seed(seed, epoch));
    std::shuffle(order.begin(), order.end(), shuffle_rng);
    order.resize(items.size() / global * global);

    const std::size_t shard = order.size() / world_size;
    plan.ranks.resize(world_size);
    for (std::size_t rank = 0; rank < world_size; ++rank) {
        // One list per bucket in shuffled order; the final list is the catch-all.
        const std::size_t catch_all = layout.buckets.size();
        std::vector<std::vector<std::size_t>> lists(catch_all + 1);
        for (std::size_t k = rank * shard; k < (rank + 1) * shard; ++k) lists[items[order[k]].bucket].push_back(order[k]);
        for (std::size_t b = 0; b < catch_all; ++b) {
            const std::size_t keep = lists[b].size() / batch_size * batch_size;
            lists[catch_all].insert(lists[catch_all].end(), lists[b].begin() + static_cast<std::ptrdiff_t>(keep),
                                    lists[b].end());
            lists[b].resize(keep);
        }

        std::vector<std::size_t> live;  // indices of non-empty lists
        std::vector<std::size_t> cursor(lists.size(), 0);
        for (std::size_t b = 0; b < lists.size(); ++b) {
            if (!lists[b].empty()) live.push_back(b);
        }
        std::seed_seq seq{static_cast<std::uint64_t>(epoch_seed(seed, epoch)), static_cast<std::uint64_t>(rank)};
        std::mt19937_64 draw_rng(seq);
        auto& batches = plan.ranks[rank];
        while (!live.empty()) {
            std::vector<double> weights;
            weights.reserve(live.size());
            for (std::size_t b : live) weights.push_back(static_cast<double>(lists[b].size() - cursor[b]));
            std::discrete_distribution<std::size_t> choose(weights.begin(), weights.end());
            const std::size_t slot = choose(draw_rng);
            const std::size_t b = live[slot];

            Batch batch;
            if (b != catch_all) batch.bucket = b;
            for (std::size_t k = 0; k < batch_size; ++k) {
                const BucketedItem& item = items[lists[b][cursor[b]++]];
                batch.ids.push_back(item.id);
                batch.item_buckets.push_back(item.bucket);
            }
            batches.push_back(std::move(batch));
            if (cursor[b] == lists[b].size()) live.erase(live.begin() + static_cast<std::ptrdiff_t>(slot));
        }
    }
    return plan;
}

struct CropGeometry {
    Resolution scaled_size;
    int crop_x = 0;
    int crop_y = 0;
    Resolution crop_size;
};

// Aspect-preserving cover scale, then a uniform random crop along the overflowing axis.
template <typename Rng>
CropGeometry fit_geometry(Resolution image, Resolution bucket, Rng& rng) {
    if (image.width <= 0 || image.height <= 0 || bucket.width <= 0 || bucket.height <= 0) {
        throw ParameterError("fit_geometry: dims must be positive");
    }
    const double scale = std::max(static_cast<double>(bucket.width) / image.width,
                                  static_cast<double>(bucket.height) / image.height);
    CropGeometry g;
    g.scaled_size.width = std::max(bucket.width, static_cast<int>(std::lround(image.width * scale)));
    g.scaled_size.height = std::max(bucket.height, static_cast<int>(std::lround(image.height * scale)));
    g.crop_size = bucket;
    std::uniform_int_distribution<int> ux(0, g.scaled_size.width - bucket.width);
    std::uniform_int_distribution<int> uy(0, g.scaled_size.height - bucket.height);
    g.crop_x = ux(rng);
    g.crop_y = uy(rng);
    return g;
}

// Fraction of the scaled image discarded by the crop, before integer rounding.
inline double crop_fraction(Resolution image, Resolution bucket) {
    const double scale = std::max(static_cast<double>(bucket.width) / image.width,
                                  static_cast<double>(bucket.height) / image.height);
    const double scaled_area = (image.width * scale) * (image.height * scale);
    return 1.0 - static_cast<double>(bucket.area()) / scaled_area;
}

}  // namespace deskdiff
