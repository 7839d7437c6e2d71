// Segmentation metrics: Dice, IoU and the 95th-percentile Hausdorff
// distance over boundary point sets.
//
// HD95 pools the two directed boundary-to-boundary distance lists and takes
// their 95th percentile with linear interpolation between closest ranks.
// Directed distances are read off the exact EDT of the other mask's
// boundary set. A mask with an empty boundary (no foreground) makes HD95
// undefined; it is reported as such, never as 0.
#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <optional>
#include <stdexcept>
#include <vector>

#include "distance.hpp"
#include "grid.hpp"

namespace focussdf {

struct MetricsReport {
    double dice = 0.0;
    double iou = 0.0;
    std::optional<double> hd95;  // pixels; empty when either boundary is empty
    std::size_t fg_pixels_a = 0;
    std::size_t fg_pixels_b = 0;
};

namespace detail {

struct OverlapCounts {
    std::size_t a = 0, b = 0, inter = 0;
};

inline OverlapCounts overlap_counts(const BinaryMask& a, const BinaryMask& b) {
    if (!a.same_shape(b)) throw std::invalid_argument("metrics: dimension mismatch");
    OverlapCounts n;
    for (std::size_t i = 0; i < a.size(); ++i) {
        n.a += a[i];
        n.b += b[i];
        n.inter += a[i] & b[i];
    }
    return n;
}

}  // namespace detail

/// Dice coefficient 2|A∩B| / (|A| + |B|); 1.0 when both masks are empty.
inline double dice(const BinaryMask& a, const BinaryMask& b) {
    const auto n = detail::overlap_counts(a, b);
    if (n.a + n.b == 0) return 1.0;
    return 2.0 * static_cast<double>(n.inter) / static_cast<double>(n.a + n.b);
}

/// Jaccard index |A∩B| / |A∪B|; 1.0 when both masks are empty.
inline double iou(const BinaryMask& a, const BinaryMask& b) {
    const auto n = detail::overlap_counts(a, b);
    const std::size_t uni = n.a + n.b - n.inter;
    if (uni == 0) return 1.0;
    return static_cast<double>(n.inter) / static_cast<double>(uni);
}

/// Foreground pixels with at least one 4-neighbor that is background or
/// outside the grid, in row-major order.
inline std::vector<GridIndex> boundary_pixels(const BinaryMask& mask) {
    std::vector<GridIndex> out;
    const int h = mask.height(), w = mask.width();
    for (int r = 0; r < h; ++r) {
        for (int c = 0; c < w; ++c) {
            if (!mask(r, c)) continue;
            const bool edge = r == 0 || !mask(r - 1, c) || r == h - 1 || !mask(r + 1, c) ||
                              c == 0 || !mask(r, c - 1) || c == w - 1 || !mask(r, c + 1);
            if (edge) out.push_back({r, c});
        }
    }
    return out;
}

/// Percentile with linear interpolation between closest ranks:
/// h = (q/100)(n-1); result = v[floor(h)] + frac(h) * (v[floor(h)+1] - v[floor(h)]).
inline double percentile(std::vector<double> values, double q) {
    if (values.empty()) throw std::invalid_argument("percentile: empty list");
    if (!(q >= 0.0 && q <= 100.0))
        throw std::invalid_argument("percentile: q must be in [0, 100]");
    std::sort(values.begin(), values.end());
    const double h = (q / 100.0) * static_cast<double>(values.size() - 1);
    const std::size_t lo = static_cast<std::size_t>(h);
    const double frac = h - static_cast<double>(lo);
    if (frac == 0.0 || lo + 1 >= values.size()) return values[lo];
    return values[lo] + frac * (values[lo + 1] - values[lo]);
}

/// 95th percentile of the pooled directed boundary distances between two
/// masks. Undefined (nullopt) when either mask has an empty boundary.
inline std::optional<double> hd95(const BinaryMask& a, const BinaryMask& b) {
    if (!a.same_shape(b)) throw std::invalid_argument("hd95: dimension mismatch");
    const std::vector<GridIndex> pa = boundary_pixels(a);
    const std::vector<GridIndex> pb = boundary_pixels(b);
    if (pa.empty() || pb.empty()) return std::nullopt;

    BinaryMask seeds_a(a.height(), a.width()), seeds_b(b.height(), b.width());
    for (const GridIndex& p : pa) seeds_a.set(p.row, p.col, true);
    for (const GridIndex& p : pb) seeds_b.set(p.row, p.col, true);
    const DistanceMap dist_to_a = edt(seeds_a);
    const DistanceMap dist_to_b = edt(seeds_b);

    std::vector<double> pooled;
    pooled.reserve(pa.size() + pb.size());
    for (const GridIndex& p : pa) pooled.push_back(dist_to_b(p.row, p.col));
    for (const GridIndex& p : pb) pooled.push_back(dist_to_a(p.row, p.col));
    return percentile(std::move(pooled), 95.0);
}

/// Dice, IoU and HD95 for one mask pair.
inline MetricsReport evaluate_masks(const BinaryMask& a, const BinaryMask& b) {
    MetricsReport r;
    r.dice = dice(a, b);
    r.iou = iou(a, b);
    r.hd95 = hd95(a, b);
    r.fg_pixels_a = a.foreground_count();
    r.fg_pixels_b = b.foreground_count();
    return r;
}

}  // namespace focussdf
