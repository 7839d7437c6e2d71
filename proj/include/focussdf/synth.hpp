// Seeded synthetic shapes and SDF perturbations for the optimization demo.
//
// Randomness comes from SplitMix64 (Steele, Lea & Flood's 64-bit mix),
// with uniforms taken as 53-bit fractions and Gaussians from the Marsaglia
// polar method. Integer and uniform draws are exactly platform-stable;
// Gaussian draws additionally assume a correctly rounded std::log. All
// outputs are pure functions of the spec, seed included.
#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "grid.hpp"

namespace focussdf {

/// SplitMix64 pseudo-random generator.
class SplitMix64 {
public:
    explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next_u64() {
        std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ull);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
        return z ^ (z >> 31);
    }

    /// Uniform double in [0, 1) with 53 random bits.
    double next_unit() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    /// Standard normal deviate via the Marsaglia polar method.
    double next_gaussian() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        double u, v, s;
        do {
            u = 2.0 * next_unit() - 1.0;
            v = 2.0 * next_unit() - 1.0;
            s = u * u + v * v;
        } while (s >= 1.0 || s == 0.0);
        const double m = std::sqrt(-2.0 * std::log(s) / s);
        spare_ = v * m;
        have_spare_ = true;
        return u * m;
    }

private:
    std::uint64_t state_;
    double spare_ = 0.0;
    bool have_spare_ = false;
};

enum class ShapeKind { disk, annulus, curve, multi_blob };

struct ShapeSpec {
    ShapeKind kind = ShapeKind::disk;
    int height = 64;
    int width = 64;

    // Center defaults to the integer grid center (floor(h/2), floor(w/2)).
    double center_row = -1.0;
    double center_col = -1.0;
    double radius = 10.0;        // disk radius / annulus outer radius
    double inner_radius = 0.0;   // annulus only
    double half_width = 1.5;     // curve only
    int control_points = 4;      // curve only
    int blob_count = 3;          // multi_blob only
    double blob_radius_min = 3.0;
    double blob_radius_max = 8.0;
    std::uint64_t seed = 0;
};

struct PerturbSpec {
    double noise_sigma = 0.0;  // SDF amplitude of the smoothed noise field
    double bias = 0.0;         // uniform offset; positive shrinks foreground
    int smooth_radius = 2;     // box-blur radius applied to the noise field
    std::uint64_t seed = 0;
};

namespace detail {

inline double squared(double x) { return x * x; }

// Squared distance from a point to a segment, all in pixel coordinates.
inline double point_segment_dist_sq(double pr, double pc, double ar, double ac, double br,
                                    double bc) {
    const double dr = br - ar, dc = bc - ac;
    const double len_sq = dr * dr + dc * dc;
    double t = 0.0;
    if (len_sq > 0.0) {
        t = ((pr - ar) * dr + (pc - ac) * dc) / len_sq;
        t = t < 0.0 ? 0.0 : (t > 1.0 ? 1.0 : t);
    }
    return squared(pr - (ar + t * dr)) + squared(pc - (ac + t * dc));
}

inline void fill_disk(BinaryMask& mask, double cr, double cc, double radius) {
    if (radius < 0.0) return;  // covers nothing; (-r)^2 must not resurrect it
    const double r_sq = radius * radius;
    for (int r = 0; r < mask.height(); ++r)
        for (int c = 0; c < mask.width(); ++c)
            if (squared(r - cr) + squared(c - cc) <= r_sq) mask.set(r, c, true);
}

// Separable box blur with windows clamped at the borders (each output is
// the mean of the in-bounds taps).
inline Grid<double> box_blur(const Grid<double>& in, int radius) {
    if (radius <= 0) return in;
    const int h = in.height(), w = in.width();
    Grid<double> tmp(h, w, 0.0), out(h, w, 0.0);
    for (int r = 0; r < h; ++r) {
        for (int c = 0; c < w; ++c) {
            const int lo = c - radius < 0 ? 0 : c - radius;
            const int hi = c + radius >= w ? w - 1 : c + radius;
            double sum = 0.0;
            for (int k = lo; k <= hi; ++k) sum += in(r, k);
            tmp(r, c) = sum / (hi - lo + 1);
        }
    }
    for (int c = 0; c < w; ++c) {
        for (int r = 0; r < h; ++r) {
            const int lo = r - radius < 0 ? 0 : r - radius;
            const int hi = r + radius >= h ? h - 1 : r + radius;
            double sum = 0.0;
            for (int k = lo; k <= hi; ++k) sum += tmp(k, c);
            out(r, c) = sum / (hi - lo + 1);
        }
    }
    return out;
}

}  // namespace detail

/// Render a mask from a shape spec; deterministic in the seed. Throws if
/// the result would be single-class.
inline BinaryMask generate(const ShapeSpec& spec) {
    BinaryMask mask(spec.height, spec.width);
    const double cr = spec.center_row >= 0.0 ? spec.center_row : spec.height / 2;
    const double cc = spec.center_col >= 0.0 ? spec.center_col : spec.width / 2;
    SplitMix64 rng(spec.seed);

    switch (spec.kind) {
        case ShapeKind::disk:
            detail::fill_disk(mask, cr, cc, spec.radius);
            break;
        case ShapeKind::annulus: {
            if (!(spec.inner_radius < spec.radius))
                throw std::invalid_argument("generate: annulus needs inner_radius < radius");
            if (spec.radius >= 0.0) {
                const double out_sq = spec.radius * spec.radius;
                const double in_sq =
                    spec.inner_radius < 0.0 ? -1.0
                                            : spec.inner_radius * spec.inner_radius;
                for (int r = 0; r < spec.height; ++r)
                    for (int c = 0; c < spec.width; ++c) {
                        const double d = detail::squared(r - cr) + detail::squared(c - cc);
                        if (d > in_sq && d <= out_sq) mask.set(r, c, true);
                    }
            }
            break;
        }
        case ShapeKind::curve: {
            if (spec.control_points < 2)
                throw std::invalid_argument("generate: curve needs >= 2 control points");
            // Random polyline with a one-half-width margin from the frame.
            const double margin = spec.half_width + 1.0;
            std::vector<double> rows(spec.control_points), cols(spec.control_points);
            for (int i = 0; i < spec.control_points; ++i) {
                rows[i] = margin + rng.next_unit() * (spec.height - 1 - 2.0 * margin);
                cols[i] = margin + rng.next_unit() * (spec.width - 1 - 2.0 * margin);
            }
            const double hw_sq = spec.half_width * spec.half_width;
            for (int r = 0; r < spec.height; ++r)
                for (int c = 0; c < spec.width; ++c) {
                    for (int i = 0; i + 1 < spec.control_points; ++i) {
                        if (detail::point_segment_dist_sq(r, c, rows[i], cols[i], rows[i + 1],
                                                          cols[i + 1]) <= hw_sq) {
                            mask.set(r, c, true);
                            break;
                        }
                    }
                }
            break;
        }
        case ShapeKind::multi_blob: {
            if (spec.blob_count < 1)
                throw std::invalid_argument("generate: multi_blob needs blob_count >= 1");
            if (!(spec.blob_radius_min > 0.0) || spec.blob_radius_max < spec.blob_radius_min)
                throw std::invalid_argument("generate: bad blob radius range");
            for (int i = 0; i < spec.blob_count; ++i) {
                const double radius =
                    spec.blob_radius_min +
                    rng.next_unit() * (spec.blob_radius_max - spec.blob_radius_min);
                const double margin = radius + 1.0;
                const double br = margin + rng.next_unit() * (spec.height - 1 - 2.0 * margin);
                const double bc = margin + rng.next_unit() * (spec.width - 1 - 2.0 * margin);
                detail::fill_disk(mask, br, bc, radius);
            }
            break;
        }
    }

    const std::size_t fg = mask.foreground_count();
    if (fg == 0 || fg == mask.size())
        throw std::invalid_argument("generate: degenerate geometry produced a single-class mask");
    return mask;
}

/// Perturb a ground-truth SDF into a plausible "initial prediction":
/// gt + bias + a box-blurred Gaussian field re-standardized to population
/// std noise_sigma. Deterministic in the seed.
inline SdfMap perturb_sdf(const SdfMap& gt, const PerturbSpec& spec) {
    if (gt.normalized())
        throw std::invalid_argument("perturb_sdf: ground-truth SDF must be unnormalized");
    if (!(spec.noise_sigma >= 0.0) || !std::isfinite(spec.noise_sigma))
        throw std::invalid_argument("perturb_sdf: noise_sigma must be finite and >= 0");
    if (spec.smooth_radius < 0)
        throw std::invalid_argument("perturb_sdf: smooth_radius must be >= 0");

    SdfMap out(gt.height(), gt.width(), 0.0);
    for (std::size_t i = 0; i < gt.size(); ++i) out[i] = gt[i] + spec.bias;
    if (spec.noise_sigma == 0.0) return out;

    Grid<double> noise(gt.height(), gt.width(), 0.0);
    SplitMix64 rng(spec.seed);
    for (std::size_t i = 0; i < noise.size(); ++i) noise[i] = rng.next_gaussian();
    noise = detail::box_blur(noise, spec.smooth_radius);

    // Re-standardize so the field's population std is exactly noise_sigma
    // regardless of how much the blur attenuated it.
    const std::size_t n = noise.size();
    double mean = 0.0;
    for (std::size_t i = 0; i < n; ++i) mean += noise[i];
    mean /= static_cast<double>(n);
    double var = 0.0;
    for (std::size_t i = 0; i < n; ++i) var += detail::squared(noise[i] - mean);
    var /= static_cast<double>(n);
    const double std_dev = std::sqrt(var);
    if (std_dev > 0.0) {
        const double scale = spec.noise_sigma / std_dev;
        for (std::size_t i = 0; i < n; ++i) out[i] += (noise[i] - mean) * scale;
    }
    return out;
}

}  // namespace focussdf
