// Central finite-difference verification of the analytic gradients.
//
// The checker perturbs one pixel at a time by h = step_rel * scale (scale
// being the largest input magnitude, floored at 1) and compares
// (L(x + h e_i) - L(x - h e_i)) / (2h) against the analytic derivative.
// The reported error is the largest component deviation normalized by the
// largest gradient magnitude.
//
// For p = 1 the loss has subgradient kinks wherever a pixel residual or a
// forward-difference edge residual crosses zero, so the comparison skips
// pixels within `kink_margin` of any kink they touch. p = 2 is smooth and
// checks every pixel.
#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <vector>

#include "grid.hpp"
#include "loss.hpp"
#include "synth.hpp"

namespace focussdf {

namespace detail {

inline bool clears_kinks(const SdfMap& pred, const SdfMap& gt, const LossParams& params, int r,
                         int c, double margin) {
    if (params.p == 2) return true;
    if (std::abs(pred(r, c) - gt(r, c)) <= margin) return false;
    if (params.lambda > 0.0) {
        const auto edge_res = [&](int r0, int c0, int r1, int c1) {
            return (pred(r1, c1) - pred(r0, c0)) - (gt(r1, c1) - gt(r0, c0));
        };
        if (c > 0 && std::abs(edge_res(r, c - 1, r, c)) <= margin) return false;
        if (c + 1 < pred.width() && std::abs(edge_res(r, c, r, c + 1)) <= margin) return false;
        if (r > 0 && std::abs(edge_res(r - 1, c, r, c)) <= margin) return false;
        if (r + 1 < pred.height() && std::abs(edge_res(r, c, r + 1, c)) <= margin) return false;
    }
    return true;
}

}  // namespace detail

/// Max normalized deviation between focus_sdf_grad and central finite
/// differences on one instance.
inline double focus_grad_fd_error(const SdfMap& pred, const SdfMap& gt, const WeightMap& weights,
                                  const LossParams& params, double step_rel = 1e-5,
                                  double kink_margin = 1e-3) {
    double scale = 1.0;
    for (std::size_t i = 0; i < pred.size(); ++i)
        scale = std::max({scale, std::abs(pred[i]), std::abs(gt[i])});
    const double h = step_rel * scale;

    const Grid<double> analytic = focus_sdf_grad(pred, gt, weights, params);
    SdfMap probe = pred;

    double worst_dev = 0.0, grad_scale = 0.0;
    for (int r = 0; r < pred.height(); ++r) {
        for (int c = 0; c < pred.width(); ++c) {
            if (!detail::clears_kinks(pred, gt, params, r, c, kink_margin)) continue;
            const double saved = probe(r, c);
            probe(r, c) = saved + h;
            const double up = focus_sdf_loss(probe, gt, weights, params).total;
            probe(r, c) = saved - h;
            const double down = focus_sdf_loss(probe, gt, weights, params).total;
            probe(r, c) = saved;
            const double fd = (up - down) / (2.0 * h);
            worst_dev = std::max(worst_dev, std::abs(analytic(r, c) - fd));
            grad_scale = std::max({grad_scale, std::abs(analytic(r, c)), std::abs(fd)});
        }
    }
    return worst_dev / std::max(grad_scale, 1e-12);
}

/// Same check for the soft Dice gradient.
inline double dice_grad_fd_error(const Grid<double>& prob, const BinaryMask& mask, double smooth,
                                 double step_rel = 1e-5) {
    const auto [loss0, analytic] = soft_dice_loss(prob, mask, smooth);
    (void)loss0;
    const double h = step_rel;  // probabilities live in [0, 1]; scale is 1

    Grid<double> probe = prob;
    double worst_dev = 0.0, grad_scale = 0.0;
    for (std::size_t i = 0; i < prob.size(); ++i) {
        const double saved = probe[i];
        probe[i] = saved + h;
        const double up = soft_dice_loss(probe, mask, smooth).first;
        probe[i] = saved - h;
        const double down = soft_dice_loss(probe, mask, smooth).first;
        probe[i] = saved;
        const double fd = (up - down) / (2.0 * h);
        worst_dev = std::max(worst_dev, std::abs(analytic[i] - fd));
        grad_scale = std::max({grad_scale, std::abs(analytic[i]), std::abs(fd)});
    }
    return worst_dev / std::max(grad_scale, 1e-12);
}

struct GradCheckConfig {
    std::uint64_t seed = 1;
    int trials = 50;
    int size = 16;
    int p = 2;
    double threshold = 1e-6;
};

struct GradCheckReport {
    double max_rel_err_sdf = 0.0;
    double max_rel_err_dice = 0.0;
    int trials = 0;
    bool pass(double threshold) const {
        return max_rel_err_sdf <= threshold && max_rel_err_dice <= threshold;
    }
};

/// Seeded sweep over random instances spanning gamma in {0, 0.01, 0.1, 1}
/// and lambda in {0, 0.5, 1}; checks the SDF loss gradient and the soft
/// Dice gradient.
inline GradCheckReport run_gradient_check(const GradCheckConfig& config) {
    static constexpr double kGammas[] = {0.0, 0.01, 0.1, 1.0};
    static constexpr double kLambdas[] = {0.0, 0.5, 1.0};

    SplitMix64 rng(config.seed);
    GradCheckReport report;
    report.trials = config.trials;

    for (int trial = 0; trial < config.trials; ++trial) {
        const int n = config.size;
        SdfMap gt(n, n, 0.0), pred(n, n, 0.0);
        for (std::size_t i = 0; i < gt.size(); ++i) gt[i] = 2.0 * rng.next_gaussian();
        for (std::size_t i = 0; i < pred.size(); ++i) pred[i] = gt[i] + rng.next_gaussian();

        LossParams params;
        params.p = config.p;
        params.gamma = kGammas[trial % 4];
        params.lambda = kLambdas[(trial / 4) % 3];
        const WeightMap weights = weight_map(gt, params.gamma);
        report.max_rel_err_sdf =
            std::max(report.max_rel_err_sdf, focus_grad_fd_error(pred, gt, weights, params));

        Grid<double> prob(n, n, 0.0);
        BinaryMask mask(n, n);
        for (int r = 0; r < n; ++r)
            for (int c = 0; c < n; ++c) {
                prob(r, c) = 0.01 + 0.98 * rng.next_unit();
                mask.set(r, c, rng.next_unit() < 0.5);
            }
        report.max_rel_err_dice =
            std::max(report.max_rel_err_dice, dice_grad_fd_error(prob, mask, 1.0));
    }
    return report;
}

}  // namespace focussdf
