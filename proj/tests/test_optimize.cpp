#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <cmath>
#include <sstream>

#include <focussdf/optimize.hpp>

#include "test_support.hpp"

using namespace focussdf;

namespace {

struct Fixture {
    BinaryMask mask;
    SdfMap gt;
    SdfMap init;
};

Fixture make_fixture(int size = 48, double sigma = 1.0, double bias = 0.75) {
    ShapeSpec shape;
    shape.kind = ShapeKind::annulus;
    shape.height = shape.width = size;
    shape.radius = size * 0.3;
    shape.inner_radius = shape.radius - 3.0;
    PerturbSpec perturb;
    perturb.noise_sigma = sigma;
    perturb.bias = bias;
    perturb.seed = 7;
    Fixture f;
    f.mask = generate(shape);
    f.gt = signed_distance(f.mask);
    f.init = perturb_sdf(f.gt, perturb);
    return f;
}

DescentConfig make_config(LossKind kind, int p, double lambda, int steps, double lr,
                          int eval_every = 1) {
    DescentConfig c;
    c.loss = kind;
    c.params.p = p;
    c.params.lambda = lambda;
    c.params.gamma = 0.005;
    c.steps = steps;
    c.learning_rate = lr;
    c.eval_every = eval_every;
    return c;
}

}  // namespace

TEST_CASE("descending from the ground truth is a fixed point", "[optimize]") {
    const Fixture f = make_fixture();
    const auto traj = descend(f.gt, f.gt, f.mask,
                              make_config(LossKind::focus_sdf, 2, 1.0, 10, 50.0, 5));
    for (const TrajectoryPoint& pt : traj) {
        CHECK(pt.loss_total == 0.0);
        CHECK(pt.dice == 1.0);
        CHECK(pt.iou == 1.0);
        CHECK(pt.hd95.value() == 0.0);
    }
}

TEST_CASE("uniform quadratic descent decreases monotonically below the bound", "[optimize]") {
    const Fixture f = make_fixture();
    const double n = static_cast<double>(f.gt.size());
    const auto traj =
        descend(f.init, f.gt, f.mask, make_config(LossKind::uniform_lp, 2, 0.0, 120, n / 4.0));
    REQUIRE(traj.size() == 121);
    for (std::size_t i = 1; i < traj.size(); ++i)
        CHECK(traj[i].loss_total <= traj[i - 1].loss_total);
    CHECK(traj.back().loss_total < traj.front().loss_total);
}

TEST_CASE("trajectories are deterministic and uniform equals gamma0-lambda0 focus",
          "[optimize]") {
    const Fixture f = make_fixture();
    const DescentConfig uniform = make_config(LossKind::uniform_lp, 1, 0.0, 60, 30.0, 10);
    const auto t1 = descend(f.init, f.gt, f.mask, uniform);
    const auto t2 = descend(f.init, f.gt, f.mask, uniform);
    REQUIRE(t1.size() == t2.size());
    for (std::size_t i = 0; i < t1.size(); ++i) {
        CHECK(t1[i].loss_total == t2[i].loss_total);
        CHECK(t1[i].dice == t2[i].dice);
        CHECK(t1[i].hd95 == t2[i].hd95);
    }

    DescentConfig reduced = make_config(LossKind::focus_sdf, 1, 0.0, 60, 30.0, 10);
    reduced.params.gamma = 0.0;
    const auto t3 = descend(f.init, f.gt, f.mask, reduced);
    REQUIRE(t3.size() == t1.size());
    for (std::size_t i = 0; i < t1.size(); ++i) {
        CHECK(t3[i].loss_total == t1[i].loss_total);
        CHECK(t3[i].weighted_term == t1[i].weighted_term);
        CHECK(t3[i].dice == t1[i].dice);
    }
}

TEST_CASE("per-step decrease matches the first-order prediction", "[optimize]") {
    const Fixture f = make_fixture(32, 0.5, 0.5);
    const WeightMap weights = weight_map(f.gt, 0.005);
    LossParams params;
    params.gamma = 0.005;
    params.lambda = 1.0;
    params.p = 2;

    const double lr = 1.0;  // small against the |Omega| = 1024 stability bound
    const double before = focus_sdf_loss(f.init, f.gt, weights, params).total;
    const Grid<double> g = focus_sdf_grad(f.init, f.gt, weights, params);
    double grad_norm_sq = 0.0;
    for (std::size_t i = 0; i < g.size(); ++i) grad_norm_sq += g[i] * g[i];

    SdfMap stepped = f.init;
    for (std::size_t i = 0; i < stepped.size(); ++i) stepped[i] -= lr * g[i];
    const double after = focus_sdf_loss(stepped, f.gt, weights, params).total;

    const double ratio = (before - after) / (lr * grad_norm_sq);
    CHECK(ratio >= 0.5);
    CHECK(ratio <= 1.5);
}

TEST_CASE("divergence reports the offending step", "[optimize]") {
    const Fixture f = make_fixture(24, 0.5, 0.5);
    // p=2 with lr far above the stability bound explodes geometrically.
    const DescentConfig bad = make_config(LossKind::uniform_lp, 2, 0.0, 400, 1e7, 1);
    try {
        descend(f.init, f.gt, f.mask, bad);
        FAIL("expected divergence");
    } catch (const DivergenceError& e) {
        CHECK(e.step > 0);
        CHECK_THAT(e.what(), Catch::Matchers::ContainsSubstring("step"));
    }
}

TEST_CASE("descend validates inputs", "[optimize]") {
    const Fixture f = make_fixture(24);
    const DescentConfig ok = make_config(LossKind::focus_sdf, 1, 1.0, 5, 10.0);
    CHECK_THROWS_AS(descend(SdfMap(8, 8, 1.0), f.gt, f.mask, ok), std::invalid_argument);
    CHECK_THROWS_AS(descend(f.init, f.gt, f.mask.complement(), ok), std::invalid_argument);

    DescentConfig bad = ok;
    bad.learning_rate = -1.0;
    CHECK_THROWS_AS(descend(f.init, f.gt, f.mask, bad), std::invalid_argument);
    bad = ok;
    bad.steps = 0;
    CHECK_THROWS_AS(descend(f.init, f.gt, f.mask, bad), std::invalid_argument);
}

TEST_CASE("compare runs configs from a shared start and isolates failures", "[optimize]") {
    ShapeSpec shape;
    shape.kind = ShapeKind::annulus;
    shape.height = shape.width = 48;
    shape.radius = 14.0;
    shape.inner_radius = 11.0;
    PerturbSpec perturb;
    perturb.noise_sigma = 1.0;
    perturb.bias = 0.5;
    perturb.seed = 3;

    DescentConfig good = make_config(LossKind::focus_sdf, 1, 1.0, 40, 20.0, 10);
    good.name = "good";
    DescentConfig exploding = make_config(LossKind::uniform_lp, 2, 0.0, 400, 1e7, 1);
    exploding.name = "exploding";

    const ComparisonReport report = compare(shape, perturb, {good, exploding, good});
    REQUIRE(report.entries.size() == 3);
    CHECK(report.entries[0].error.empty());
    CHECK(!report.entries[1].error.empty());
    CHECK(report.entries[2].error.empty());

    // Identical configs from the same start give identical trajectories.
    const auto& t0 = report.entries[0].trajectory;
    const auto& t2 = report.entries[2].trajectory;
    REQUIRE(t0.size() == t2.size());
    for (std::size_t i = 0; i < t0.size(); ++i)
        CHECK(t0[i].loss_total == t2[i].loss_total);
}

TEST_CASE("trajectory CSV format", "[optimize]") {
    ShapeSpec shape;
    shape.kind = ShapeKind::disk;
    shape.height = shape.width = 32;
    shape.radius = 9.0;
    PerturbSpec perturb;
    perturb.noise_sigma = 0.5;
    perturb.seed = 2;

    DescentConfig config = make_config(LossKind::focus_sdf, 1, 1.0, 40, 20.0, 10);
    const ComparisonReport report = compare(shape, perturb, {config});

    std::ostringstream os;
    write_trajectories_csv(os, report);
    std::istringstream in(os.str());
    std::string line;
    REQUIRE(std::getline(in, line));
    CHECK(line == "config,step,loss_total,weighted_term,gradient_term,dice,iou,hd95");
    int rows = 0;
    while (std::getline(in, line)) {
        ++rows;
        CHECK(line.rfind("focus_sdf,", 0) == 0);
        CHECK(std::count(line.begin(), line.end(), ',') == 7);
    }
    CHECK(rows == 40 / 10 + 1);
}
