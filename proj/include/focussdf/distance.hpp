// Exact Euclidean distance transforms and signed distance maps.
//
// edt_squared runs the separable squared-distance scheme of Felzenszwalb &
// Huttenlocher: a per-column sweep finds the nearest seed row within each
// column, then a per-row lower envelope of the parabolas
// (c - j)^2 + rowdist(r, j)^2 selects the global minimum. All squared
// distances are integers, so the result is exact; envelope breakpoints are
// the only floating-point quantities and cannot flip the minimum (a
// misclassified breakpoint implies a tie). brute_force_edt_squared is the
// O(N^2) all-pairs oracle with the identical contract.
//
// signed_distance follows the convention: foreground pixels carry minus the
// distance to the nearest background pixel, background pixels plus the
// distance to the nearest foreground pixel. On a pixel grid the zero level
// set falls between pixel centers, so no pixel is exactly zero and
// |value| >= 1 everywhere.
#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <vector>

#include "grid.hpp"

namespace focussdf {

namespace detail {

constexpr int kNoSeed = -1;

// Per-column distance (in rows, unsquared) to the nearest seed row.
// Columns without seeds are marked kNoSeed for every row.
inline Grid<int> column_seed_distance(const BinaryMask& seeds) {
    const int h = seeds.height(), w = seeds.width();
    Grid<int> dist(h, w, kNoSeed);
    for (int c = 0; c < w; ++c) {
        int last = kNoSeed;
        for (int r = 0; r < h; ++r) {
            if (seeds(r, c)) last = r;
            if (last != kNoSeed) dist(r, c) = r - last;
        }
        last = kNoSeed;
        for (int r = h - 1; r >= 0; --r) {
            if (seeds(r, c)) last = r;
            if (last != kNoSeed) {
                const int d = last - r;
                if (dist(r, c) == kNoSeed || d < dist(r, c)) dist(r, c) = d;
            }
        }
    }
    return dist;
}

// Lower envelope of parabolas (x - site)^2 + f(site) over one row.
// Sites with f == kNoSeed are absent. f values and outputs are exact int64.
inline void row_envelope(const int* rowdist, int width, std::int64_t* out) {
    thread_local std::vector<int> sites;
    thread_local std::vector<double> breaks;
    sites.clear();
    breaks.clear();
    sites.reserve(width);
    breaks.reserve(width + 1);

    auto f = [&](int j) {
        return static_cast<std::int64_t>(rowdist[j]) * rowdist[j];
    };

    for (int q = 0; q < width; ++q) {
        if (rowdist[q] == kNoSeed) continue;
        if (sites.empty()) {
            sites.push_back(q);
            breaks.push_back(-std::numeric_limits<double>::infinity());
            breaks.push_back(std::numeric_limits<double>::infinity());
            continue;
        }
        double s;
        for (;;) {
            const int v = sites.back();
            s = static_cast<double>((f(q) + static_cast<std::int64_t>(q) * q) -
                                    (f(v) + static_cast<std::int64_t>(v) * v)) /
                (2.0 * (q - v));
            // breaks[0] is -inf, so the stack never empties.
            if (s <= breaks[sites.size() - 1]) {
                sites.pop_back();
                breaks.pop_back();
            } else {
                break;
            }
        }
        breaks.back() = s;
        sites.push_back(q);
        breaks.push_back(std::numeric_limits<double>::infinity());
    }

    std::size_t k = 0;
    for (int c = 0; c < width; ++c) {
        while (breaks[k + 1] < c) ++k;
        const std::int64_t dc = c - sites[k];
        out[c] = dc * dc + f(sites[k]);
    }
}

}  // namespace detail

/// Exact squared Euclidean distance from every pixel center to the nearest
/// foreground pixel center. Requires at least one foreground pixel.
inline Grid<std::int64_t> edt_squared(const BinaryMask& mask) {
    if (mask.foreground_count() == 0)
        throw std::invalid_argument("edt: mask has no foreground pixels");
    const int h = mask.height(), w = mask.width();
    const Grid<int> rowdist = detail::column_seed_distance(mask);
    Grid<std::int64_t> out(h, w, 0);
    for (int r = 0; r < h; ++r)
        detail::row_envelope(&rowdist.data()[static_cast<std::size_t>(r) * w], w,
                             &out.data()[static_cast<std::size_t>(r) * w]);
    return out;
}

/// Exact Euclidean distance transform (square root of edt_squared).
inline DistanceMap edt(const BinaryMask& mask) {
    const Grid<std::int64_t> sq = edt_squared(mask);
    DistanceMap out(mask.height(), mask.width(), 0.0);
    for (std::size_t i = 0; i < sq.size(); ++i)
        out[i] = std::sqrt(static_cast<double>(sq[i]));
    return out;
}

/// All-pairs oracle for edt_squared; O(N * |foreground|), intended for
/// small grids in tests.
inline Grid<std::int64_t> brute_force_edt_squared(const BinaryMask& mask) {
    if (mask.foreground_count() == 0)
        throw std::invalid_argument("edt: mask has no foreground pixels");
    const int h = mask.height(), w = mask.width();
    std::vector<GridIndex> seeds;
    for (int r = 0; r < h; ++r)
        for (int c = 0; c < w; ++c)
            if (mask(r, c)) seeds.push_back({r, c});

    Grid<std::int64_t> out(h, w, 0);
    for (int r = 0; r < h; ++r) {
        for (int c = 0; c < w; ++c) {
            std::int64_t best = std::numeric_limits<std::int64_t>::max();
            for (const GridIndex& s : seeds) {
                const std::int64_t dr = r - s.row, dc = c - s.col;
                const std::int64_t d = dr * dr + dc * dc;
                if (d < best) best = d;
            }
            out(r, c) = best;
        }
    }
    return out;
}

namespace detail {

inline void require_two_classes(const BinaryMask& mask) {
    const std::size_t fg = mask.foreground_count();
    if (fg == 0 || fg == mask.size())
        throw std::invalid_argument(
            "signed_distance: mask is single-class (needs both foreground and background)");
}

inline SdfMap signed_from_squared(const BinaryMask& mask, const Grid<std::int64_t>& to_fg,
                                  const Grid<std::int64_t>& to_bg) {
    SdfMap out(mask.height(), mask.width(), 0.0);
    for (std::size_t i = 0; i < mask.size(); ++i)
        out[i] = mask[i] ? -std::sqrt(static_cast<double>(to_bg[i]))
                         : std::sqrt(static_cast<double>(to_fg[i]));
    return out;
}

}  // namespace detail

/// Signed distance map in pixel units: negative inside (distance to the
/// nearest background pixel), positive outside (distance to the nearest
/// foreground pixel). Requires both classes present.
inline SdfMap signed_distance(const BinaryMask& mask) {
    detail::require_two_classes(mask);
    return detail::signed_from_squared(mask, edt_squared(mask),
                                       edt_squared(mask.complement()));
}

/// All-pairs oracle for signed_distance; identical contract, exhaustive scan.
inline SdfMap brute_force_signed_distance(const BinaryMask& mask) {
    detail::require_two_classes(mask);
    return detail::signed_from_squared(mask, brute_force_edt_squared(mask),
                                       brute_force_edt_squared(mask.complement()));
}

/// z-score an unnormalized map over all of its pixels (population std).
/// The statistics are recorded so denormalize_sdf can undo the transform.
inline SdfMap normalize_sdf(const SdfMap& sdf) {
    if (sdf.normalized())
        throw std::invalid_argument("normalize_sdf: map is already normalized");
    const std::size_t n = sdf.size();
    double mean = 0.0;
    for (std::size_t i = 0; i < n; ++i) mean += sdf[i];
    mean /= static_cast<double>(n);
    double var = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double d = sdf[i] - mean;
        var += d * d;
    }
    var /= static_cast<double>(n);
    const double std_dev = std::sqrt(var);
    if (std_dev == 0.0)
        throw std::invalid_argument("normalize_sdf: degenerate map (zero standard deviation)");

    SdfMap out(sdf.height(), sdf.width(), 0.0);
    for (std::size_t i = 0; i < n; ++i) out[i] = (sdf[i] - mean) / std_dev;
    out.set_norm_params(NormParams{mean, std_dev});
    return out;
}

/// Invert normalize_sdf using the recorded parameters.
inline SdfMap denormalize_sdf(const SdfMap& sdf) {
    if (!sdf.normalized())
        throw std::invalid_argument("denormalize_sdf: map is not normalized");
    const NormParams p = *sdf.norm_params();
    SdfMap out(sdf.height(), sdf.width(), 0.0);
    for (std::size_t i = 0; i < sdf.size(); ++i) out[i] = sdf[i] * p.std + p.mean;
    return out;
}

}  // namespace focussdf
