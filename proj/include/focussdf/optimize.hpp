// Fixed-step gradient-descent harness comparing loss geometries head to
// head. Each run descends a perturbed SDF toward the ground truth under
// one objective and traces loss plus Dice/IoU/HD95 of the thresholded
// prediction. Plain first-order descent keeps the comparison about the
// losses, not the optimizer; weights are frozen from the ground truth and
// never recomputed from the evolving prediction.
#pragma once

#include <cmath>
#include <cstdio>
#include <optional>
#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

#include "distance.hpp"
#include "grid.hpp"
#include "loss.hpp"
#include "metrics.hpp"
#include "synth.hpp"

namespace focussdf {

enum class LossKind { focus_sdf, uniform_lp };

inline const char* loss_kind_name(LossKind k) {
    return k == LossKind::focus_sdf ? "focus_sdf" : "uniform_lp";
}

struct DescentConfig {
    std::string name;  // label used in reports; defaults to the loss kind
    LossKind loss = LossKind::focus_sdf;
    LossParams params;
    int steps = 500;
    double learning_rate = 150.0;
    int eval_every = 25;

    void validate() const {
        if (steps < 1) throw std::invalid_argument("DescentConfig: steps must be >= 1");
        if (!(learning_rate > 0.0) || !std::isfinite(learning_rate))
            throw std::invalid_argument("DescentConfig: learning_rate must be finite and > 0");
        if (eval_every < 1) throw std::invalid_argument("DescentConfig: eval_every must be >= 1");
        params.validate();
    }
};

struct TrajectoryPoint {
    int step = 0;
    double loss_total = 0.0;
    double weighted_term = 0.0;
    double gradient_term = 0.0;
    double dice = 0.0;
    double iou = 0.0;
    std::optional<double> hd95;
};

struct DivergenceError : std::runtime_error {
    int step;
    explicit DivergenceError(int at_step)
        : std::runtime_error("descent diverged: non-finite loss at step " +
                             std::to_string(at_step)),
          step(at_step) {}
};

namespace detail {

inline TrajectoryPoint eval_point(int step, const SdfMap& pred, const SdfMap& gt,
                                  const WeightMap& weights, const LossParams& params,
                                  const BinaryMask& gt_mask) {
    // Inputs were validated up front in descend; a non-finite total here
    // can only mean the iteration blew up.
    const LossBreakdown bd = detail::focus_sdf_loss_impl(pred, gt, weights, params);
    if (!std::isfinite(bd.total)) throw DivergenceError(step);
    const MetricsReport m = evaluate_masks(mask_from_sdf(pred, 0.0), gt_mask);
    return {step, bd.total, bd.weighted_term, bd.gradient_term, m.dice, m.iou, m.hd95};
}

}  // namespace detail

/// Descend `init` toward `gt` under the configured objective, recording a
/// trajectory point at step 0, every eval_every steps, and the final step.
/// The uniform_lp objective is the same machinery with all-ones weights and
/// lambda = 0.
inline std::vector<TrajectoryPoint> descend(const SdfMap& init, const SdfMap& gt,
                                            const BinaryMask& gt_mask,
                                            const DescentConfig& config) {
    config.validate();
    if (!init.same_shape(gt) || !gt.same_shape(gt_mask))
        throw std::invalid_argument("descend: dimension mismatch");
    if (init.normalized() || gt.normalized())
        throw std::invalid_argument("descend: maps must be unnormalized");
    if (mask_from_sdf(gt, 0.0) != gt_mask)
        throw std::invalid_argument("descend: gt_mask does not match the SDF sign partition");

    LossParams eff = config.params;
    WeightMap weights(gt.height(), gt.width(), 1.0);
    if (config.loss == LossKind::focus_sdf) {
        weights = weight_map(gt, eff.gamma);
    } else {
        eff.lambda = 0.0;
    }

    std::vector<TrajectoryPoint> trajectory;
    trajectory.reserve(static_cast<std::size_t>(config.steps / config.eval_every) + 2);

    SdfMap pred = init;
    trajectory.push_back(detail::eval_point(0, pred, gt, weights, eff, gt_mask));
    for (int step = 1; step <= config.steps; ++step) {
        const Grid<double> g = focus_sdf_grad(pred, gt, weights, eff);
        for (std::size_t i = 0; i < pred.size(); ++i)
            pred[i] -= config.learning_rate * g[i];
        if (step % config.eval_every == 0 || step == config.steps)
            trajectory.push_back(detail::eval_point(step, pred, gt, weights, eff, gt_mask));
    }
    return trajectory;
}

struct ComparisonEntry {
    DescentConfig config;
    std::vector<TrajectoryPoint> trajectory;  // empty when the run failed
    std::string error;                        // empty when the run succeeded
};

struct ComparisonReport {
    BinaryMask gt_mask;
    SdfMap gt_sdf;
    SdfMap init;
    std::vector<ComparisonEntry> entries;
};

/// Run every config from the same perturbed start. A failing run records
/// its error and does not abort the others.
inline ComparisonReport compare(const ShapeSpec& shape, const PerturbSpec& perturb,
                                const std::vector<DescentConfig>& configs) {
    ComparisonReport report;
    report.gt_mask = generate(shape);
    report.gt_sdf = signed_distance(report.gt_mask);
    report.init = perturb_sdf(report.gt_sdf, perturb);

    for (const DescentConfig& config : configs) {
        ComparisonEntry entry;
        entry.config = config;
        if (entry.config.name.empty()) entry.config.name = loss_kind_name(config.loss);
        try {
            entry.trajectory = descend(report.init, report.gt_sdf, report.gt_mask, entry.config);
        } catch (const std::exception& e) {
            entry.error = e.what();
        }
        report.entries.push_back(std::move(entry));
    }
    return report;
}

namespace detail {

// Round-trippable float formatting, shared by the CSV and JSON emitters.
inline std::string format_g17(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

}  // namespace detail

inline constexpr const char* kTrajectoryCsvHeader =
    "config,step,loss_total,weighted_term,gradient_term,dice,iou,hd95";

/// Write all trajectories as CSV; an undefined HD95 renders as an empty
/// field.
inline void write_trajectories_csv(std::ostream& os, const ComparisonReport& report) {
    os << kTrajectoryCsvHeader << '\n';
    for (const ComparisonEntry& entry : report.entries) {
        for (const TrajectoryPoint& pt : entry.trajectory) {
            os << entry.config.name << ',' << pt.step << ',' << detail::format_g17(pt.loss_total)
               << ',' << detail::format_g17(pt.weighted_term) << ','
               << detail::format_g17(pt.gradient_term) << ',' << detail::format_g17(pt.dice)
               << ',' << detail::format_g17(pt.iou) << ','
               << (pt.hd95 ? detail::format_g17(*pt.hd95) : std::string()) << '\n';
        }
    }
}

}  // namespace focussdf
