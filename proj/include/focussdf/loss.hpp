// Boundary-aware SDF regression loss with adaptive exponential weighting
// and a gradient-consistency term, plus comparator losses.
//
// For ground-truth map S, prediction P, per-pixel weights w and pixel count
// N, the loss is
//
//     L = (1/N) sum_i w_i |S_i - P_i|^p
//       + lambda (1/N) sum_i ( |gx(S)_i - gx(P)_i|^p + |gy(S)_i - gy(P)_i|^p )
//
// where gx/gy are forward differences (last column/row zero) and p is 1 or
// 2. Weights come from the ground-truth SDF: 1 where S <= 0, and
// exp(-gamma * S) where S > 0, so errors near the boundary dominate and
// far-field background errors decay exponentially. Weights always multiply
// unnormalized pixel-unit distances.
//
// focus_sdf_grad is the exact analytic derivative of L with respect to P:
// the weighted term contributes (p/N) w_i |P_i - S_i|^(p-1) sign(P_i - S_i)
// and the gradient term contributes the adjoint of the forward differences
// (a negative divergence of the per-axis residual subgradients). For p = 1
// the subgradient at a zero residual is 0.
//
// All reductions are sequential in row-major order, so results are
// bit-identical between runs.
#pragma once

#include <cmath>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>

#include "grid.hpp"

namespace focussdf {

struct LossParams {
    double gamma = 0.005;     // weight decay per pixel of boundary distance
    double lambda = 1.0;      // gradient-consistency coefficient
    int p = 1;                // residual exponent, 1 or 2
    double dice_weight = 1.0; // mask-head coefficient in combined_loss
    double dice_smooth = 1.0;

    void validate() const {
        if (!(gamma >= 0.0)) throw std::invalid_argument("LossParams: gamma must be >= 0");
        if (!(lambda >= 0.0)) throw std::invalid_argument("LossParams: lambda must be >= 0");
        if (p != 1 && p != 2) throw std::invalid_argument("LossParams: p must be 1 or 2");
        if (!(dice_weight >= 0.0))
            throw std::invalid_argument("LossParams: dice_weight must be >= 0");
        if (!(dice_smooth > 0.0))
            throw std::invalid_argument("LossParams: dice_smooth must be > 0");
    }
};

struct GradPair {
    Grid<double> gx;  // column-direction forward differences
    Grid<double> gy;  // row-direction forward differences
};

struct LossBreakdown {
    double weighted_term = 0.0;
    double gradient_term = 0.0;
    std::optional<double> dice_term;
    double total = 0.0;
};

namespace detail {

inline double pow_p(double x, int p) { return p == 2 ? x * x : std::abs(x); }

// d|t|^p / dt with the p = 1 subgradient at 0 taken as 0.
inline double dpow_p(double t, int p) {
    if (p == 2) return 2.0 * t;
    return t > 0.0 ? 1.0 : (t < 0.0 ? -1.0 : 0.0);
}

inline void require_same_shape(const SdfMap& a, const SdfMap& b, const char* what) {
    if (!a.same_shape(b)) throw std::invalid_argument(std::string(what) + ": dimension mismatch");
}

inline void require_same_units(const SdfMap& a, const SdfMap& b, const char* what) {
    if (a.normalized() != b.normalized())
        throw std::invalid_argument(std::string(what) +
                                    ": mixing normalized and unnormalized maps");
}

}  // namespace detail

/// Per-pixel weights from the ground-truth SDF: 1 on the inside branch
/// (value <= 0), exp(-gamma * value) outside. gamma multiplies raw pixel
/// distances, so the map must be unnormalized.
inline WeightMap weight_map(const SdfMap& gt, double gamma) {
    if (gt.normalized())
        throw std::invalid_argument("weight_map: ground-truth SDF must be unnormalized");
    if (!(gamma >= 0.0)) throw std::invalid_argument("weight_map: gamma must be >= 0");
    WeightMap w(gt.height(), gt.width(), 1.0);
    for (std::size_t i = 0; i < gt.size(); ++i) {
        const double s = gt[i];
        w[i] = s <= 0.0 ? 1.0 : std::exp(-gamma * s);
    }
    return w;
}

/// Forward differences with the replicate-edge convention: the last column
/// of gx and the last row of gy are zero.
inline GradPair spatial_gradient(const SdfMap& map) {
    const int h = map.height(), w = map.width();
    GradPair g{Grid<double>(h, w, 0.0), Grid<double>(h, w, 0.0)};
    for (int r = 0; r < h; ++r)
        for (int c = 0; c + 1 < w; ++c) g.gx(r, c) = map(r, c + 1) - map(r, c);
    for (int r = 0; r + 1 < h; ++r)
        for (int c = 0; c < w; ++c) g.gy(r, c) = map(r + 1, c) - map(r, c);
    return g;
}

namespace detail {

// Shared evaluation core; performs no finiteness check so the descent
// harness can map a blow-up to its own divergence error.
inline LossBreakdown focus_sdf_loss_impl(const SdfMap& pred, const SdfMap& gt,
                                         const WeightMap& weights, const LossParams& params) {
    const int h = pred.height(), w = pred.width();
    const double n = static_cast<double>(pred.size());

    double weighted = 0.0;
    for (std::size_t i = 0; i < pred.size(); ++i)
        weighted += weights[i] * pow_p(gt[i] - pred[i], params.p);
    weighted /= n;

    double grad = 0.0;
    for (int r = 0; r < h; ++r)
        for (int c = 0; c + 1 < w; ++c)
            grad += pow_p((gt(r, c + 1) - gt(r, c)) - (pred(r, c + 1) - pred(r, c)), params.p);
    for (int r = 0; r + 1 < h; ++r)
        for (int c = 0; c < w; ++c)
            grad += pow_p((gt(r + 1, c) - gt(r, c)) - (pred(r + 1, c) - pred(r, c)), params.p);
    grad /= n;

    LossBreakdown out;
    out.weighted_term = weighted;
    out.gradient_term = grad;
    out.total = weighted + params.lambda * grad;
    return out;
}

inline void validate_loss_inputs(const SdfMap& pred, const SdfMap& gt, const WeightMap& weights,
                                 const LossParams& params, const char* what) {
    params.validate();
    require_same_shape(pred, gt, what);
    require_same_units(pred, gt, what);
    if (!pred.same_shape(weights))
        throw std::invalid_argument(std::string(what) + ": weight map dimension mismatch");
}

}  // namespace detail

/// Evaluate the boundary-weighted loss. `weights` must be built from the
/// ground truth (weight_map); both maps must share dimensions and units.
inline LossBreakdown focus_sdf_loss(const SdfMap& pred, const SdfMap& gt,
                                    const WeightMap& weights, const LossParams& params) {
    detail::validate_loss_inputs(pred, gt, weights, params, "focus_sdf_loss");
    const LossBreakdown out = detail::focus_sdf_loss_impl(pred, gt, weights, params);
    if (!std::isfinite(out.total))
        throw std::invalid_argument("focus_sdf_loss: non-finite input");
    return out;
}

/// Analytic derivative of focus_sdf_loss.total with respect to the
/// prediction. Matches central finite differences; see gradcheck.hpp.
inline Grid<double> focus_sdf_grad(const SdfMap& pred, const SdfMap& gt,
                                   const WeightMap& weights, const LossParams& params) {
    detail::validate_loss_inputs(pred, gt, weights, params, "focus_sdf_grad");

    const int h = pred.height(), w = pred.width();
    const double inv_n = 1.0 / static_cast<double>(pred.size());
    Grid<double> g(h, w, 0.0);

    for (std::size_t i = 0; i < pred.size(); ++i)
        g[i] = inv_n * weights[i] * detail::dpow_p(pred[i] - gt[i], params.p);

    if (params.lambda > 0.0) {
        const double k = params.lambda * inv_n;
        for (int r = 0; r < h; ++r) {
            for (int c = 0; c + 1 < w; ++c) {
                const double res =
                    (pred(r, c + 1) - pred(r, c)) - (gt(r, c + 1) - gt(r, c));
                const double t = k * detail::dpow_p(res, params.p);
                g(r, c + 1) += t;
                g(r, c) -= t;
            }
        }
        for (int r = 0; r + 1 < h; ++r) {
            for (int c = 0; c < w; ++c) {
                const double res =
                    (pred(r + 1, c) - pred(r, c)) - (gt(r + 1, c) - gt(r, c));
                const double t = k * detail::dpow_p(res, params.p);
                g(r + 1, c) += t;
                g(r, c) -= t;
            }
        }
    }
    return g;
}

/// Soft Dice loss over a probability map against a binary mask:
/// 1 - (2 sum(p*g) + s) / (sum(p) + sum(g) + s), with its analytic gradient.
inline std::pair<double, Grid<double>> soft_dice_loss(const Grid<double>& prob,
                                                      const BinaryMask& mask, double smooth) {
    if (!mask.same_shape(prob))
        throw std::invalid_argument("soft_dice_loss: dimension mismatch");
    if (!(smooth > 0.0)) throw std::invalid_argument("soft_dice_loss: smooth must be > 0");

    double sum_p = 0.0, sum_g = 0.0, sum_pg = 0.0;
    for (std::size_t i = 0; i < prob.size(); ++i) {
        const double pv = prob[i];
        if (!(pv >= 0.0 && pv <= 1.0))
            throw std::invalid_argument("soft_dice_loss: probability out of [0, 1]");
        const double gv = mask[i];
        sum_p += pv;
        sum_g += gv;
        sum_pg += pv * gv;
    }
    const double num = 2.0 * sum_pg + smooth;
    const double den = sum_p + sum_g + smooth;
    const double loss = 1.0 - num / den;

    Grid<double> grad(prob.height(), prob.width(), 0.0);
    const double den2 = den * den;
    for (std::size_t i = 0; i < prob.size(); ++i)
        grad[i] = (num - 2.0 * mask[i] * den) / den2;
    return {loss, std::move(grad)};
}

/// Uniform-weight Lp regression baseline: (1/N) sum |S_i - P_i|^p.
/// Identical to focus_sdf_loss with gamma = 0 and lambda = 0.
inline double uniform_lp_loss(const SdfMap& pred, const SdfMap& gt, int p) {
    if (p != 1 && p != 2) throw std::invalid_argument("uniform_lp_loss: p must be 1 or 2");
    detail::require_same_shape(pred, gt, "uniform_lp_loss");
    detail::require_same_units(pred, gt, "uniform_lp_loss");
    double sum = 0.0;
    for (std::size_t i = 0; i < pred.size(); ++i)
        sum += detail::pow_p(gt[i] - pred[i], p);
    return sum / static_cast<double>(pred.size());
}

/// Joint mask + SDF supervision: the boundary-weighted SDF loss plus
/// dice_weight times the soft Dice loss of the probability head. The
/// ground-truth SDF must be unnormalized and its sign partition must match
/// the mask.
inline LossBreakdown combined_loss(const Grid<double>& prob, const BinaryMask& mask,
                                   const SdfMap& pred_sdf, const SdfMap& gt_sdf,
                                   const LossParams& params) {
    params.validate();
    if (!mask.same_shape(prob) || !gt_sdf.same_shape(mask))
        throw std::invalid_argument("combined_loss: dimension mismatch");
    for (std::size_t i = 0; i < mask.size(); ++i) {
        const bool inside = gt_sdf[i] < 0.0;
        if (inside != (mask[i] != 0))
            throw std::invalid_argument(
                "combined_loss: ground-truth SDF sign partition does not match mask");
    }

    const WeightMap weights = weight_map(gt_sdf, params.gamma);
    LossBreakdown out = focus_sdf_loss(pred_sdf, gt_sdf, weights, params);
    const double dice = soft_dice_loss(prob, mask, params.dice_smooth).first;
    out.dice_term = dice;
    out.total = out.weighted_term + params.lambda * out.gradient_term +
                params.dice_weight * dice;
    return out;
}

}  // namespace focussdf
