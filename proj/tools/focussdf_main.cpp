// Command-line front door for the FocusSDF toolkit.
//
// Subcommands: sdf, loss, metrics, gradcheck, synth, demo. Data goes to
// stdout or files, diagnostics to stderr. Exit codes: 0 success, 1 usage
// error, 2 computation error. JSON numbers carry 17 significant digits
// (round-trippable); human-readable tables use 6.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include <focussdf/focussdf.hpp>

namespace {

using focussdf::detail::format_g17;

std::string format_g6(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.6g", v);
    return buf;
}

// Minimal JSON object emitter preserving field order and %.17g numbers.
class JsonObject {
public:
    JsonObject& field(const std::string& key, double v) { return raw(key, format_g17(v)); }
    JsonObject& field(const std::string& key, std::int64_t v) {
        return raw(key, std::to_string(v));
    }
    JsonObject& field(const std::string& key, bool v) { return raw(key, v ? "true" : "false"); }
    JsonObject& field(const std::string& key, std::optional<double> v) {
        return raw(key, v ? format_g17(*v) : "null");
    }
    JsonObject& field(const std::string& key, const std::string& v) {
        return raw(key, "\"" + v + "\"");
    }

    std::string str() const { return "{" + body_ + "}"; }

private:
    JsonObject& raw(const std::string& key, const std::string& v) {
        if (!body_.empty()) body_ += ",";
        body_ += "\"" + key + "\":" + v;
        return *this;
    }
    std::string body_;
};

// One-row CSV with a header, mirroring the JSON fields.
struct CsvRow {
    std::vector<std::string> keys, values;
    void add(const std::string& key, const std::string& value) {
        keys.push_back(key);
        values.push_back(value);
    }
    void add(const std::string& key, double v) { add(key, format_g17(v)); }
    void add(const std::string& key, std::int64_t v) { add(key, std::to_string(v)); }
    void add(const std::string& key, std::optional<double> v) {
        add(key, v ? format_g17(*v) : std::string());
    }
    void print(std::ostream& os) const {
        for (std::size_t i = 0; i < keys.size(); ++i) os << (i ? "," : "") << keys[i];
        os << '\n';
        for (std::size_t i = 0; i < values.size(); ++i) os << (i ? "," : "") << values[i];
        os << '\n';
    }
};

struct ComputationError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

const std::map<std::string, focussdf::ShapeKind> kShapeNames = {
    {"disk", focussdf::ShapeKind::disk},
    {"annulus", focussdf::ShapeKind::annulus},
    {"curve", focussdf::ShapeKind::curve},
    {"multi_blob", focussdf::ShapeKind::multi_blob},
};

void add_format_flag(CLI::App* cmd, std::string& format) {
    cmd->add_option("--format", format, "Output format")
        ->check(CLI::IsMember({"json", "csv"}))
        ->capture_default_str();
}

void cmd_sdf(const std::string& mask_path, const std::string& out_path, bool normalize) {
    const focussdf::BinaryMask mask = focussdf::load_mask(mask_path);
    focussdf::SdfMap sdf = focussdf::signed_distance(mask);
    if (normalize) sdf = focussdf::normalize_sdf(sdf);
    focussdf::save_sdf(sdf, out_path);
}

struct LossCli {
    std::string pred_path, gt_path, prob_path, mask_path;
    focussdf::LossParams params;
    std::string format = "json";
};

void cmd_loss(const LossCli& args) {
    const focussdf::SdfMap pred = focussdf::load_sdf(args.pred_path);
    const focussdf::SdfMap gt = focussdf::load_sdf(args.gt_path);
    if (pred.normalized() != gt.normalized())
        throw ComputationError("loss: prediction and ground truth disagree on normalization");

    focussdf::LossBreakdown bd;
    if (!args.prob_path.empty()) {
        const focussdf::SdfMap prob_map = focussdf::load_sdf(args.prob_path);
        const focussdf::BinaryMask mask = focussdf::load_mask(args.mask_path);
        bd = focussdf::combined_loss(prob_map.values(), mask, pred, gt, args.params);
    } else {
        const focussdf::WeightMap weights = focussdf::weight_map(gt, args.params.gamma);
        bd = focussdf::focus_sdf_loss(pred, gt, weights, args.params);
    }

    if (args.format == "json") {
        JsonObject obj;
        obj.field("total", bd.total)
            .field("weighted_term", bd.weighted_term)
            .field("gradient_term", bd.gradient_term);
        if (bd.dice_term) obj.field("dice_term", bd.dice_term);
        obj.field("gamma", args.params.gamma)
            .field("lambda", args.params.lambda)
            .field("p", static_cast<std::int64_t>(args.params.p));
        if (bd.dice_term) obj.field("dice_weight", args.params.dice_weight);
        std::cout << obj.str() << '\n';
    } else {
        CsvRow row;
        row.add("total", bd.total);
        row.add("weighted_term", bd.weighted_term);
        row.add("gradient_term", bd.gradient_term);
        if (bd.dice_term) row.add("dice_term", bd.dice_term);
        row.add("gamma", args.params.gamma);
        row.add("lambda", args.params.lambda);
        row.add("p", static_cast<std::int64_t>(args.params.p));
        if (bd.dice_term) row.add("dice_weight", args.params.dice_weight);
        row.print(std::cout);
    }
}

void cmd_metrics(const std::string& a_path, const std::string& b_path,
                 const std::string& format) {
    const focussdf::BinaryMask a = focussdf::load_mask(a_path);
    const focussdf::BinaryMask b = focussdf::load_mask(b_path);
    const focussdf::MetricsReport r = focussdf::evaluate_masks(a, b);
    if (format == "json") {
        std::cout << JsonObject()
                         .field("dice", r.dice)
                         .field("iou", r.iou)
                         .field("hd95", r.hd95)
                         .field("fg_pixels_a", static_cast<std::int64_t>(r.fg_pixels_a))
                         .field("fg_pixels_b", static_cast<std::int64_t>(r.fg_pixels_b))
                         .str()
                  << '\n';
    } else {
        CsvRow row;
        row.add("dice", r.dice);
        row.add("iou", r.iou);
        row.add("hd95", r.hd95);
        row.add("fg_pixels_a", static_cast<std::int64_t>(r.fg_pixels_a));
        row.add("fg_pixels_b", static_cast<std::int64_t>(r.fg_pixels_b));
        row.print(std::cout);
    }
}

void cmd_gradcheck(const focussdf::GradCheckConfig& config, const std::string& format) {
    const focussdf::GradCheckReport report = focussdf::run_gradient_check(config);
    const double max_err = std::max(report.max_rel_err_sdf, report.max_rel_err_dice);
    const bool pass = report.pass(config.threshold);
    if (format == "json") {
        std::cout << JsonObject()
                         .field("max_rel_err", max_err)
                         .field("max_rel_err_sdf", report.max_rel_err_sdf)
                         .field("max_rel_err_dice", report.max_rel_err_dice)
                         .field("threshold", config.threshold)
                         .field("trials", static_cast<std::int64_t>(config.trials))
                         .field("seed", static_cast<std::int64_t>(config.seed))
                         .field("p", static_cast<std::int64_t>(config.p))
                         .field("pass", pass)
                         .str()
                  << '\n';
    } else {
        CsvRow row;
        row.add("max_rel_err", max_err);
        row.add("max_rel_err_sdf", report.max_rel_err_sdf);
        row.add("max_rel_err_dice", report.max_rel_err_dice);
        row.add("threshold", config.threshold);
        row.add("trials", static_cast<std::int64_t>(config.trials));
        row.add("seed", static_cast<std::int64_t>(config.seed));
        row.add("p", static_cast<std::int64_t>(config.p));
        row.add("pass", pass ? "true" : "false");
        row.print(std::cout);
    }
    if (!pass)
        throw ComputationError("gradient check failed: max relative error " +
                               format_g17(max_err) + " exceeds threshold " +
                               format_g17(config.threshold));
}

struct SynthCli {
    focussdf::ShapeSpec spec;
    double thickness = -1.0;  // annulus convenience: inner = radius - thickness
    std::string out_mask, out_sdf;
    bool normalize = false;
};

void cmd_synth(SynthCli args) {
    if (args.thickness > 0.0) args.spec.inner_radius = args.spec.radius - args.thickness;
    const focussdf::BinaryMask mask = focussdf::generate(args.spec);
    focussdf::save_mask(mask, args.out_mask);
    if (!args.out_sdf.empty()) {
        focussdf::SdfMap sdf = focussdf::signed_distance(mask);
        if (args.normalize) sdf = focussdf::normalize_sdf(sdf);
        focussdf::save_sdf(sdf, args.out_sdf);
    }
}

struct DemoCli {
    focussdf::ShapeSpec shape;
    double thickness = 3.0;
    focussdf::PerturbSpec perturb;
    focussdf::LossParams params;
    int steps = 500;
    double lr = 150.0;
    int eval_every = 25;
    std::string out_csv = "trajectories.csv";
};

void cmd_demo(DemoCli args) {
    if (args.shape.kind == focussdf::ShapeKind::annulus && args.thickness > 0.0)
        args.shape.inner_radius = args.shape.radius - args.thickness;

    focussdf::DescentConfig focus;
    focus.name = "focus_sdf";
    focus.loss = focussdf::LossKind::focus_sdf;
    focus.params = args.params;
    focus.steps = args.steps;
    focus.learning_rate = args.lr;
    focus.eval_every = args.eval_every;

    focussdf::DescentConfig uniform = focus;
    uniform.name = "uniform_lp";
    uniform.loss = focussdf::LossKind::uniform_lp;

    const focussdf::ComparisonReport report =
        focussdf::compare(args.shape, args.perturb, {focus, uniform});

    std::ofstream csv(args.out_csv, std::ios::trunc);
    if (!csv) throw ComputationError("cannot open output CSV: " + args.out_csv);
    focussdf::write_trajectories_csv(csv, report);
    csv.flush();
    if (!csv) throw ComputationError("write failure: " + args.out_csv);

    std::printf("%-12s %6s %12s %10s %10s %10s\n", "config", "step", "loss_total", "dice",
                "iou", "hd95");
    std::string failures;
    for (const focussdf::ComparisonEntry& entry : report.entries) {
        if (!entry.error.empty()) {
            std::cerr << "config " << entry.config.name << " failed: " << entry.error << '\n';
            failures += (failures.empty() ? "" : "; ") + entry.config.name;
            continue;
        }
        const focussdf::TrajectoryPoint& first = entry.trajectory.front();
        const focussdf::TrajectoryPoint& last = entry.trajectory.back();
        for (const focussdf::TrajectoryPoint* pt : {&first, &last}) {
            std::printf("%-12s %6d %12s %10s %10s %10s\n", entry.config.name.c_str(), pt->step,
                        format_g6(pt->loss_total).c_str(), format_g6(pt->dice).c_str(),
                        format_g6(pt->iou).c_str(),
                        pt->hd95 ? format_g6(*pt->hd95).c_str() : "undef");
        }
    }
    std::printf("trajectories written to %s\n", args.out_csv.c_str());
    if (!failures.empty()) throw ComputationError("config(s) failed: " + failures);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"FocusSDF toolkit: signed distance maps, boundary-aware losses, metrics"};
    app.require_subcommand(1);

    // sdf
    std::string sdf_mask_path, sdf_out_path;
    bool sdf_normalize = false;
    CLI::App* sdf = app.add_subcommand("sdf", "Compute a signed distance map from a mask");
    sdf->add_option("mask", sdf_mask_path, "Input mask (PGM or PNG)")
        ->required()
        ->check(CLI::ExistingFile);
    sdf->add_option("-o,--out", sdf_out_path, "Output SDF1 file")->required();
    sdf->add_flag("--normalize", sdf_normalize, "z-score the map and record the parameters");
    sdf->callback([&] { cmd_sdf(sdf_mask_path, sdf_out_path, sdf_normalize); });

    // loss
    LossCli loss_args;
    CLI::App* loss = app.add_subcommand("loss", "Evaluate the boundary-weighted SDF loss");
    loss->add_option("--pred", loss_args.pred_path, "Predicted SDF1 file")
        ->required()
        ->check(CLI::ExistingFile);
    loss->add_option("--gt", loss_args.gt_path, "Ground-truth SDF1 file")
        ->required()
        ->check(CLI::ExistingFile);
    loss->add_option("--gamma", loss_args.params.gamma, "Weight decay per pixel of distance")
        ->capture_default_str();
    loss->add_option("--lambda", loss_args.params.lambda, "Gradient-consistency coefficient")
        ->capture_default_str();
    loss->add_option("--p", loss_args.params.p, "Residual exponent")
        ->check(CLI::IsMember({1, 2}))
        ->capture_default_str();
    CLI::Option* prob_opt =
        loss->add_option("--prob", loss_args.prob_path,
                         "Probability grid (SDF1 container) for the combined mask+SDF loss")
            ->check(CLI::ExistingFile);
    loss->add_option("--mask", loss_args.mask_path, "Ground-truth mask for the combined loss")
        ->check(CLI::ExistingFile)
        ->needs(prob_opt);
    prob_opt->needs(loss->get_option("--mask"));
    loss->add_option("--dice-weight", loss_args.params.dice_weight,
                     "Dice coefficient weight in the combined loss")
        ->capture_default_str();
    loss->add_option("--dice-smooth", loss_args.params.dice_smooth, "Dice smoothing constant")
        ->capture_default_str();
    add_format_flag(loss, loss_args.format);
    loss->callback([&] { cmd_loss(loss_args); });

    // metrics
    std::string metrics_a, metrics_b, metrics_format = "json";
    CLI::App* metrics = app.add_subcommand("metrics", "Dice, IoU and HD95 for two masks");
    metrics->add_option("--a", metrics_a, "First mask")->required()->check(CLI::ExistingFile);
    metrics->add_option("--b", metrics_b, "Second mask")->required()->check(CLI::ExistingFile);
    add_format_flag(metrics, metrics_format);
    metrics->callback([&] { cmd_metrics(metrics_a, metrics_b, metrics_format); });

    // gradcheck
    focussdf::GradCheckConfig gc;
    std::string gc_format = "json";
    CLI::App* gradcheck =
        app.add_subcommand("gradcheck", "Verify analytic gradients against finite differences");
    gradcheck->add_option("--seed", gc.seed, "RNG seed")->capture_default_str();
    gradcheck->add_option("--trials", gc.trials, "Number of random instances")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    gradcheck->add_option("--size", gc.size, "Instance side length")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    gradcheck->add_option("--p", gc.p, "Residual exponent")
        ->check(CLI::IsMember({1, 2}))
        ->capture_default_str();
    gradcheck->add_option("--threshold", gc.threshold, "Max allowed relative error")
        ->capture_default_str();
    add_format_flag(gradcheck, gc_format);
    gradcheck->callback([&] { cmd_gradcheck(gc, gc_format); });

    // synth
    SynthCli synth_args;
    std::string synth_kind = "disk";
    CLI::App* synth = app.add_subcommand("synth", "Generate a synthetic mask (and SDF)");
    synth->add_option("--kind", synth_kind, "Shape kind")
        ->check(CLI::IsMember({"disk", "annulus", "curve", "multi_blob"}))
        ->capture_default_str();
    synth->add_option("--height", synth_args.spec.height, "Grid height")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    synth->add_option("--width", synth_args.spec.width, "Grid width")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    synth->add_option("--center-row", synth_args.spec.center_row,
                      "Center row (default: grid center)");
    synth->add_option("--center-col", synth_args.spec.center_col,
                      "Center column (default: grid center)");
    synth->add_option("--radius", synth_args.spec.radius, "Disk/annulus outer radius")
        ->capture_default_str();
    synth->add_option("--inner-radius", synth_args.spec.inner_radius, "Annulus inner radius")
        ->capture_default_str();
    synth->add_option("--thickness", synth_args.thickness,
                      "Annulus thickness (sets inner radius = radius - thickness)");
    synth->add_option("--half-width", synth_args.spec.half_width, "Curve half-width")
        ->capture_default_str();
    synth->add_option("--control-points", synth_args.spec.control_points,
                      "Curve control points")
        ->capture_default_str();
    synth->add_option("--blobs", synth_args.spec.blob_count, "Blob count")
        ->capture_default_str();
    synth->add_option("--blob-radius-min", synth_args.spec.blob_radius_min, "Min blob radius")
        ->capture_default_str();
    synth->add_option("--blob-radius-max", synth_args.spec.blob_radius_max, "Max blob radius")
        ->capture_default_str();
    synth->add_option("--seed", synth_args.spec.seed, "RNG seed")->capture_default_str();
    synth->add_option("--out-mask", synth_args.out_mask, "Output mask path (PGM)")->required();
    synth->add_option("--out-sdf", synth_args.out_sdf, "Optional output SDF1 path");
    synth->add_flag("--normalize", synth_args.normalize, "z-score the SDF output");
    synth->callback([&] {
        synth_args.spec.kind = kShapeNames.at(synth_kind);
        cmd_synth(synth_args);
    });

    // demo
    DemoCli demo_args;
    demo_args.shape.kind = focussdf::ShapeKind::annulus;
    demo_args.shape.height = demo_args.shape.width = 128;
    demo_args.shape.radius = 40.0;
    demo_args.perturb.noise_sigma = 2.0;
    demo_args.perturb.bias = 1.5;
    demo_args.perturb.seed = 7;
    std::string demo_kind = "annulus";
    int demo_size = 128;
    CLI::App* demo = app.add_subcommand(
        "demo", "Descend a perturbed SDF under focus_sdf vs uniform_lp and trace metrics");
    demo->add_option("--shape", demo_kind, "Shape kind")
        ->check(CLI::IsMember({"disk", "annulus", "curve", "multi_blob"}))
        ->capture_default_str();
    demo->add_option("--size", demo_size, "Square grid side")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    demo->add_option("--r-out", demo_args.shape.radius, "Outer radius")->capture_default_str();
    demo->add_option("--thickness", demo_args.thickness, "Annulus thickness")
        ->capture_default_str();
    demo->add_option("--sigma", demo_args.perturb.noise_sigma, "Perturbation noise std")
        ->capture_default_str();
    demo->add_option("--bias", demo_args.perturb.bias, "Perturbation bias")
        ->capture_default_str();
    demo->add_option("--smooth-radius", demo_args.perturb.smooth_radius,
                     "Perturbation blur radius")
        ->capture_default_str();
    demo->add_option("--seed", demo_args.perturb.seed, "Perturbation seed")
        ->capture_default_str();
    demo->add_option("--steps", demo_args.steps, "Descent steps")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    demo->add_option("--lr", demo_args.lr, "Learning rate")->capture_default_str();
    demo->add_option("--eval-every", demo_args.eval_every, "Metric evaluation stride")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    demo->add_option("--gamma", demo_args.params.gamma, "focus_sdf weight decay")
        ->capture_default_str();
    demo->add_option("--lambda", demo_args.params.lambda, "Gradient-consistency coefficient")
        ->capture_default_str();
    demo->add_option("--p", demo_args.params.p, "Residual exponent")
        ->check(CLI::IsMember({1, 2}))
        ->capture_default_str();
    demo->add_option("--out", demo_args.out_csv, "Trajectory CSV path")->capture_default_str();
    demo->callback([&] {
        demo_args.shape.kind = kShapeNames.at(demo_kind);
        demo_args.shape.height = demo_args.shape.width = demo_size;
        cmd_demo(demo_args);
    });

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    }
    return 0;
}
