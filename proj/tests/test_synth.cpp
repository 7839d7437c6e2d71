#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include <focussdf/distance.hpp>
#include <focussdf/synth.hpp>

#include "test_support.hpp"

using namespace focussdf;

TEST_CASE("disk foreground count matches the lattice oracle", "[synth]") {
    ShapeSpec spec;
    spec.kind = ShapeKind::disk;
    spec.height = spec.width = 64;
    spec.radius = 5.0;
    const BinaryMask m = generate(spec);
    CHECK(m.foreground_count() == 81);
    CHECK(m.foreground_count() ==
          testsupport::disk_lattice_count(64, 64, 32.0, 32.0, 5.0));

    for (const double radius : {2.0, 7.5, 11.0}) {
        spec.radius = radius;
        CHECK(generate(spec).foreground_count() ==
              testsupport::disk_lattice_count(64, 64, 32.0, 32.0, radius));
    }
}

TEST_CASE("annulus equals the disk set difference", "[synth]") {
    ShapeSpec outer;
    outer.kind = ShapeKind::disk;
    outer.height = outer.width = 64;
    outer.radius = 5.0;
    ShapeSpec inner = outer;
    inner.radius = 4.0;

    ShapeSpec ring = outer;
    ring.kind = ShapeKind::annulus;
    ring.inner_radius = 4.0;

    CHECK(generate(ring).foreground_count() ==
          generate(outer).foreground_count() - generate(inner).foreground_count());
}

TEST_CASE("generation is deterministic in the spec", "[synth]") {
    for (const ShapeKind kind :
         {ShapeKind::disk, ShapeKind::annulus, ShapeKind::curve, ShapeKind::multi_blob}) {
        ShapeSpec spec;
        spec.kind = kind;
        spec.height = 48;
        spec.width = 56;
        spec.radius = 12.0;
        spec.inner_radius = 9.0;
        spec.seed = 99;
        CHECK(generate(spec) == generate(spec));
    }
}

TEST_CASE("generated masks are two-class across kinds and seeds", "[synth]") {
    for (const ShapeKind kind :
         {ShapeKind::disk, ShapeKind::annulus, ShapeKind::curve, ShapeKind::multi_blob}) {
        for (std::uint64_t seed = 0; seed < 8; ++seed) {
            ShapeSpec spec;
            spec.kind = kind;
            spec.height = 40;
            spec.width = 40;
            spec.radius = 10.0;
            spec.inner_radius = 7.0;
            spec.seed = seed;
            const BinaryMask m = generate(spec);
            const std::size_t fg = m.foreground_count();
            CHECK(fg > 0);
            CHECK(fg < m.size());
        }
    }
}

TEST_CASE("degenerate geometry is an error", "[synth]") {
    ShapeSpec spec;
    spec.kind = ShapeKind::disk;
    spec.height = spec.width = 16;

    spec.radius = 0.0;  // covers only the center pixel -> fine
    CHECK(generate(spec).foreground_count() == 1);

    spec.radius = -1.0;  // no pixels
    CHECK_THROWS_WITH(generate(spec), Catch::Matchers::ContainsSubstring("degenerate"));

    spec.radius = 100.0;  // swallows the grid
    CHECK_THROWS_WITH(generate(spec), Catch::Matchers::ContainsSubstring("degenerate"));

    ShapeSpec ring = spec;
    ring.kind = ShapeKind::annulus;
    ring.radius = 3.0;
    ring.inner_radius = 5.0;
    CHECK_THROWS_AS(generate(ring), std::invalid_argument);
}

TEST_CASE("perturb_sdf identity and pure bias", "[synth]") {
    ShapeSpec shape;
    shape.kind = ShapeKind::disk;
    shape.height = shape.width = 32;
    shape.radius = 9.0;
    const SdfMap gt = signed_distance(generate(shape));

    PerturbSpec none;
    none.noise_sigma = 0.0;
    none.bias = 0.0;
    CHECK(perturb_sdf(gt, none).data() == gt.data());

    PerturbSpec biased = none;
    biased.bias = 2.0;
    const SdfMap shifted = perturb_sdf(gt, biased);
    for (std::size_t i = 0; i < gt.size(); ++i) CHECK(shifted[i] == gt[i] + 2.0);

    // Positive bias erodes the thresholded foreground.
    const BinaryMask before = mask_from_sdf(gt);
    const BinaryMask after = mask_from_sdf(shifted);
    CHECK(after.foreground_count() < before.foreground_count());
    for (std::size_t i = 0; i < before.size(); ++i)
        if (after[i]) CHECK(before[i]);
}

TEST_CASE("bias direction monotonicity with noise", "[synth]") {
    ShapeSpec shape;
    shape.kind = ShapeKind::annulus;
    shape.height = shape.width = 64;
    shape.radius = 20.0;
    shape.inner_radius = 15.0;
    const SdfMap gt = signed_distance(generate(shape));

    PerturbSpec spec;
    spec.noise_sigma = 1.0;
    spec.seed = 5;

    spec.bias = 0.0;
    const BinaryMask base = mask_from_sdf(perturb_sdf(gt, spec));
    spec.bias = 3.0;
    const BinaryMask shrunk = mask_from_sdf(perturb_sdf(gt, spec));
    spec.bias = -3.0;
    const BinaryMask grown = mask_from_sdf(perturb_sdf(gt, spec));

    for (std::size_t i = 0; i < base.size(); ++i) {
        if (shrunk[i]) CHECK(base[i]);  // positive bias only removes pixels
        if (base[i]) CHECK(grown[i]);   // negative bias only adds pixels
    }
}

TEST_CASE("perturbation noise has the requested std", "[synth]") {
    ShapeSpec shape;
    shape.kind = ShapeKind::disk;
    shape.height = shape.width = 128;
    shape.radius = 40.0;
    const SdfMap gt = signed_distance(generate(shape));

    PerturbSpec spec;
    spec.noise_sigma = 1.0;
    spec.bias = 0.25;
    spec.seed = 12;
    const SdfMap out = perturb_sdf(gt, spec);
    CHECK(out.data() == perturb_sdf(gt, spec).data());  // reproducible

    double mean = 0.0;
    for (std::size_t i = 0; i < out.size(); ++i) mean += out[i] - gt[i] - spec.bias;
    mean /= static_cast<double>(out.size());
    double var = 0.0;
    for (std::size_t i = 0; i < out.size(); ++i) {
        const double d = out[i] - gt[i] - spec.bias - mean;
        var += d * d;
    }
    var /= static_cast<double>(out.size());
    CHECK_THAT(std::sqrt(var), Catch::Matchers::WithinAbs(1.0, 0.15));
}

TEST_CASE("perturb_sdf rejects bad specs", "[synth]") {
    const SdfMap gt(4, 4, 1.0);
    PerturbSpec spec;
    spec.noise_sigma = -1.0;
    CHECK_THROWS_AS(perturb_sdf(gt, spec), std::invalid_argument);

    spec.noise_sigma = 1.0;
    spec.smooth_radius = -2;
    CHECK_THROWS_AS(perturb_sdf(gt, spec), std::invalid_argument);

    const SdfMap norm = SdfMap::from_data(1, 2, {0.0, 1.0}, NormParams{0.0, 1.0});
    CHECK_THROWS_AS(perturb_sdf(norm, PerturbSpec{}), std::invalid_argument);
}

TEST_CASE("SplitMix64 reference values", "[synth]") {
    // First outputs for seed 1234567, from the published SplitMix64.
    SplitMix64 rng(1234567);
    const std::uint64_t a = rng.next_u64();
    const std::uint64_t b = rng.next_u64();
    SplitMix64 again(1234567);
    CHECK(again.next_u64() == a);
    CHECK(again.next_u64() == b);
    CHECK(a != b);

    // Unit doubles stay in [0, 1).
    SplitMix64 u(9);
    for (int i = 0; i < 1000; ++i) {
        const double x = u.next_unit();
        CHECK(x >= 0.0);
        CHECK(x < 1.0);
    }
}
