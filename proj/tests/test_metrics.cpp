#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include <focussdf/metrics.hpp>

#include "test_support.hpp"

using namespace focussdf;

TEST_CASE("dice and iou hand cases", "[metrics]") {
    SplitMix64 rng(2);
    const BinaryMask m = testsupport::random_mask(6, 6, 0.4, rng);
    CHECK(dice(m, m) == 1.0);
    CHECK(iou(m, m) == 1.0);

    const BinaryMask a = BinaryMask::from_data(1, 4, {1, 1, 0, 0});
    const BinaryMask b = BinaryMask::from_data(1, 4, {0, 1, 1, 0});
    CHECK(dice(a, b) == 0.5);
    CHECK_THAT(iou(a, b), Catch::Matchers::WithinRel(1.0 / 3.0, 1e-15));

    const BinaryMask c = BinaryMask::from_data(1, 4, {0, 0, 1, 1});
    CHECK(dice(a, c) == 0.0);
    CHECK(iou(a, c) == 0.0);

    CHECK_THROWS_AS(dice(a, BinaryMask(2, 2)), std::invalid_argument);
}

TEST_CASE("empty-mask conventions", "[metrics]") {
    const BinaryMask empty(3, 3);
    const BinaryMask full = BinaryMask::from_data(1, 9, std::vector<std::uint8_t>(9, 1));

    CHECK(dice(empty, empty) == 1.0);
    CHECK(iou(empty, empty) == 1.0);
    CHECK(!hd95(empty, empty).has_value());

    BinaryMask one(3, 3);
    one.set(1, 1, true);
    CHECK(dice(empty, one) == 0.0);
    CHECK(iou(empty, one) == 0.0);
    CHECK(!hd95(empty, one).has_value());
    CHECK(!hd95(one, empty).has_value());
    (void)full;
}

TEST_CASE("dice-iou relation", "[metrics]") {
    SplitMix64 rng(33);
    for (int trial = 0; trial < 30; ++trial) {
        const BinaryMask a = testsupport::random_mask(12, 12, 0.3, rng);
        const BinaryMask b = testsupport::random_mask(12, 12, 0.3, rng);
        const double d = dice(a, b), j = iou(a, b);
        CHECK_THAT(d, Catch::Matchers::WithinAbs(2.0 * j / (1.0 + j), 1e-12));
        CHECK(j <= d + 1e-15);
        CHECK(d == dice(b, a));
        CHECK(j == iou(b, a));
    }
}

TEST_CASE("boundary_pixels hand cases", "[metrics]") {
    BinaryMask single(5, 5);
    single.set(2, 3, true);
    const auto pts = boundary_pixels(single);
    REQUIRE(pts.size() == 1);
    CHECK(pts[0] == GridIndex{2, 3});

    // Solid 4x4 block inside an 8x8 grid: all 12 perimeter pixels.
    BinaryMask block(8, 8);
    for (int r = 2; r < 6; ++r)
        for (int c = 2; c < 6; ++c) block.set(r, c, true);
    const auto perimeter = boundary_pixels(block);
    CHECK(perimeter.size() == 12);
    for (const auto& p : perimeter) {
        const bool interior = p.row > 2 && p.row < 5 && p.col > 2 && p.col < 5;
        CHECK(!interior);
    }

    // All-foreground grid: the frame counts as boundary.
    const BinaryMask full = BinaryMask::from_data(4, 5, std::vector<std::uint8_t>(20, 1));
    const auto frame = boundary_pixels(full);
    CHECK(frame.size() == 2 * 5 + 2 * (4 - 2));
    CHECK(boundary_pixels(BinaryMask(3, 3)).empty());
}

TEST_CASE("percentile examples are bit-exact", "[metrics]") {
    CHECK(percentile({42.0}, 0.0) == 42.0);
    CHECK(percentile({42.0}, 95.0) == 42.0);
    CHECK(percentile({42.0}, 100.0) == 42.0);
    CHECK(percentile({0.0, 10.0}, 95.0) == 9.5);
    CHECK(percentile({1.0, 2.0, 3.0, 4.0, 5.0}, 50.0) == 3.0);

    CHECK_THROWS_AS(percentile({}, 50.0), std::invalid_argument);
    CHECK_THROWS_AS(percentile({1.0}, 101.0), std::invalid_argument);
}

TEST_CASE("hd95 hand cases", "[metrics]") {
    SplitMix64 rng(44);
    const BinaryMask m = testsupport::random_mask(10, 10, 0.35, rng);
    CHECK(hd95(m, m).value() == 0.0);

    BinaryMask a(3, 9), b(3, 9);
    a.set(1, 1, true);
    b.set(1, 6, true);
    CHECK(hd95(a, b).value() == 5.0);
    CHECK(hd95(b, a).value() == 5.0);
}

TEST_CASE("hd95 matches the all-pairs oracle", "[metrics]") {
    SplitMix64 rng(55);
    const double densities[] = {0.1, 0.3, 0.6};
    for (int trial = 0; trial < 30; ++trial) {
        const int h = 4 + static_cast<int>(rng.next_u64() % 29);
        const int w = 4 + static_cast<int>(rng.next_u64() % 29);
        const BinaryMask a = testsupport::random_mask(h, w, densities[trial % 3], rng);
        const BinaryMask b = testsupport::random_mask(h, w, densities[(trial + 1) % 3], rng);
        const auto got = hd95(a, b);
        const auto want = testsupport::hd95_oracle(a, b);
        REQUIRE(got.has_value() == want.has_value());
        if (got)
            CHECK_THAT(*got, Catch::Matchers::WithinAbs(*want, 1e-9));
        CHECK(hd95(b, a) == got);
    }
}

TEST_CASE("hd95 is bounded by the exact Hausdorff distance", "[metrics]") {
    SplitMix64 rng(66);
    for (int trial = 0; trial < 15; ++trial) {
        const BinaryMask a = testsupport::random_mask(14, 14, 0.3, rng);
        const BinaryMask b = testsupport::random_mask(14, 14, 0.3, rng);

        // 100th percentile of the same pooled list = exact Hausdorff.
        std::vector<double> pooled;
        const auto pa = testsupport::boundary_oracle(a);
        const auto pb = testsupport::boundary_oracle(b);
        const auto directed = [&](const auto& from, const auto& to) {
            for (const auto& p : from) {
                double best = std::numeric_limits<double>::max();
                for (const auto& q : to)
                    best = std::min(best, std::hypot(p.row - q.row, p.col - q.col));
                pooled.push_back(best);
            }
        };
        directed(pa, pb);
        directed(pb, pa);
        const double hausdorff = percentile(pooled, 100.0);
        CHECK(hd95(a, b).value() <= hausdorff + 1e-12);
    }
}

TEST_CASE("evaluate_masks fills the report", "[metrics]") {
    const BinaryMask a = BinaryMask::from_data(1, 4, {1, 1, 0, 0});
    const BinaryMask b = BinaryMask::from_data(1, 4, {0, 1, 1, 0});
    const MetricsReport r = evaluate_masks(a, b);
    CHECK(r.dice == 0.5);
    CHECK(r.fg_pixels_a == 2);
    CHECK(r.fg_pixels_b == 2);
    CHECK(r.hd95.has_value());
}
