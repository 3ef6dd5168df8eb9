#include "facemorph/alignment.hpp"
#include "facemorph/nasal.hpp"
#include "test_util.hpp"

#include <doctest.h>

#include <cmath>

using namespace facemorph;
using testutil::error_code;

namespace {

const LandmarkScheme kS{};

AlignedFace as_aligned(std::vector<Point2> pts) {
    AlignedFace a;
    a.points = std::move(pts);
    a.eye_l = kS.inner_eye_l;
    a.eye_r = kS.inner_eye_r;
    a.midline_x = (a.points[a.eye_l].x + a.points[a.eye_r].x) / 2.0;
    return a;
}

}  // namespace

TEST_CASE("symmetric face has zero tip deviation and nostril asymmetry") {
    const auto f = nasal_features(align_inner_eyes(symmetric_template()));
    CHECK(f.tip_dev == 0.0);
    CHECK(f.nostril_asym == 0.0);
}

TEST_CASE("hand-constructed distances") {
    auto pts = symmetric_template();
    pts[kS.nostril_l] = {206, 300};
    pts[kS.nostril_r] = {306, 300};
    pts[kS.inner_eye_l] = {206, 256};
    pts[kS.inner_eye_r] = {306, 256};
    pts[kS.cheek_l] = {56, 280};
    pts[kS.cheek_r] = {456, 280};
    pts[kS.forehead] = {256, 40};
    pts[kS.chin] = {256, 490};
    pts[kS.glabella] = {256, 250};
    pts[kS.nose_tip] = {259, 400};
    const auto f = nasal_features(as_aligned(pts));
    CHECK(f.aw_ic == 1.0);
    CHECK(f.aw_fw == 100.0 / 400.0);
    CHECK(f.nl_fh == doctest::Approx(std::hypot(3.0, 150.0) / 450.0).epsilon(1e-15));
    CHECK(f.tip_dev == 3.0);
    CHECK(f.nostril_asym == 0.0);

    pts[kS.nostril_r] = {306, 297.5};
    const auto g = nasal_features(as_aligned(pts));
    CHECK(g.nostril_asym == 2.5);
    CHECK(g.aw_ic == doctest::Approx(std::hypot(100.0, 2.5) / 100.0).epsilon(1e-15));
}

TEST_CASE("nose length endpoints are configurable") {
    auto pts = symmetric_template();
    LandmarkScheme s;
    s.nose_length_top = kS.inner_eye_l;
    s.nose_length_bottom = kS.nose_tip;
    const auto a = align_inner_eyes(pts);
    const auto f = nasal_features(a, s);
    CHECK(f.nl_fh == doctest::Approx(distance(a.points[kS.inner_eye_l], a.points[kS.nose_tip]) /
                                     distance(a.points[kS.forehead], a.points[kS.chin]))
                         .epsilon(1e-15));
}

TEST_CASE("degenerate denominators") {
    auto pts = symmetric_template();
    auto a = as_aligned(pts);
    a.points[kS.inner_eye_r] = a.points[kS.inner_eye_l];
    CHECK(error_code([&] { nasal_features(a); }) == ErrorCode::DegenerateDenominator);
    a = as_aligned(pts);
    a.points[kS.cheek_r] = a.points[kS.cheek_l];
    CHECK(error_code([&] { nasal_features(a); }) == ErrorCode::DegenerateDenominator);
    a = as_aligned(pts);
    a.points[kS.chin] = a.points[kS.forehead];
    CHECK(error_code([&] { nasal_features(a); }) == ErrorCode::DegenerateDenominator);
}

TEST_CASE("ratios survive scaling and rotation before alignment") {
    SplitMix64 rng(99);
    for (int trial = 0; trial < 50; ++trial) {
        const auto face = testutil::random_face(rng, 1.5);
        const auto base = nasal_features(align_inner_eyes(face));
        const double scale = rng.uniform(0.3, 3.0);
        const double deg = rng.uniform(-45.0, 45.0);
        const auto moved = testutil::transform(face, scale, deg, {rng.uniform(-50, 50), rng.uniform(-50, 50)});
        const auto f = nasal_features(align_inner_eyes(moved));
        CHECK(std::abs(f.aw_ic - base.aw_ic) < 1e-9);
        CHECK(std::abs(f.aw_fw - base.aw_fw) < 1e-9);
        CHECK(std::abs(f.nl_fh - base.nl_fh) < 1e-9);
    }
}

TEST_CASE("tip deviation and nostril asymmetry are mirror invariant") {
    SplitMix64 rng(3);
    for (int trial = 0; trial < 20; ++trial) {
        const auto a = as_aligned(testutil::random_face(rng, 2.0));
        std::vector<Point2> mirrored;
        for (const auto& p : a.points) mirrored.push_back({2.0 * a.midline_x - p.x, p.y});
        const auto f = nasal_features(a);
        const auto g = nasal_features(as_aligned(mirrored));
        CHECK(f.tip_dev == doctest::Approx(g.tip_dev).epsilon(1e-12));
        CHECK(f.nostril_asym == g.nostril_asym);
    }
}

TEST_CASE("all feature values are finite and non-negative") {
    SplitMix64 rng(12);
    for (int trial = 0; trial < 50; ++trial) {
        const auto f = nasal_features(align_inner_eyes(testutil::random_face(rng, 4.0)));
        for (auto k : kAllNasalFeatures) {
            CHECK(std::isfinite(f[k]));
            CHECK(f[k] >= 0.0);
        }
    }
}

TEST_CASE("improvement examples") {
    NasalFeatureVector before{.aw_ic = 0.85, .aw_fw = 0.24, .nl_fh = 0.30, .tip_dev = 1.0, .nostril_asym = 0.5};
    NasalFeatureVector after = before;
    after.aw_ic = 0.90;
    auto imp = improvement(before, after);
    CHECK(imp[NasalFeature::aw_ic].improved);
    CHECK(imp.significant_improved_count == 1);
    CHECK(imp.improved_any);

    // Narrowing: alar width shrinks, moving AW/IC away from 1.0 and AW/FW toward 0.20.
    before.aw_ic = 0.95;
    after.aw_ic = 0.90;
    after.aw_fw = 0.22;
    imp = improvement(before, after);
    CHECK_FALSE(imp[NasalFeature::aw_ic].improved);
    CHECK(imp[NasalFeature::aw_fw].improved);
    CHECK(imp.significant_improved_count == 1);

    imp = improvement(before, before);
    for (auto k : kAllNasalFeatures) CHECK_FALSE(imp[k].improved);
    CHECK(imp.significant_improved_count == 0);
    CHECK_FALSE(imp.improved_any);
}

TEST_CASE("tip and nostril improvements do not count as significant") {
    NasalFeatureVector before{.aw_ic = 0.8, .aw_fw = 0.25, .nl_fh = 0.3, .tip_dev = 4.0, .nostril_asym = 3.0};
    NasalFeatureVector after = before;
    after.tip_dev = 1.0;
    after.nostril_asym = 0.0;
    const auto imp = improvement(before, after);
    CHECK(imp[NasalFeature::tip_dev].improved);
    CHECK(imp[NasalFeature::nostril_asym].improved);
    CHECK(imp.significant_improved_count == 0);
    CHECK_FALSE(imp.improved_any);
}

TEST_CASE("reaching the ideal from elsewhere always improves") {
    const IdealProfile ideals;
    SplitMix64 rng(17);
    for (int i = 0; i < 200; ++i) {
        NasalFeatureVector before{rng.uniform(0, 2), rng.uniform(0, 1), rng.uniform(0, 1), rng.uniform(0, 5),
                                  rng.uniform(0, 5)};
        NasalFeatureVector after{1.0, 0.20, 1.0 / 3.0, 0.0, 0.0};
        const auto imp = improvement(before, after, ideals);
        for (auto k : kAllNasalFeatures) CHECK(imp[k].improved == (before[k] != ideals[k]));
    }
}

TEST_CASE("improved, worsened, unchanged partition every pair") {
    SplitMix64 rng(23);
    for (int i = 0; i < 1000; ++i) {
        // Coarse values make ties common.
        auto draw = [&] { return std::round(rng.uniform(0, 2) * 8) / 8; };
        NasalFeatureVector b{draw(), draw(), draw(), draw(), draw()};
        NasalFeatureVector a{draw(), draw(), draw(), draw(), draw()};
        const auto imp = improvement(b, a);
        int count = 0;
        for (auto k : kAllNasalFeatures) {
            const auto& c = imp[k];
            const int states = int(c.deviation_after < c.deviation_before) + int(c.deviation_after > c.deviation_before) +
                               int(c.deviation_after == c.deviation_before);
            CHECK(states == 1);
            CHECK(c.improved == (c.deviation_after < c.deviation_before));
            if (is_significant(k) && c.improved) ++count;
        }
        CHECK(imp.significant_improved_count == count);
        CHECK(imp.improved_any == (count >= 1));
    }
}

TEST_CASE("ideal profile validation") {
    IdealProfile p;
    CHECK_NOTHROW(p.validate());
    p.nl_fh = -0.1;
    CHECK(error_code([&] { p.validate(); }) == ErrorCode::InvalidArgument);
    p.nl_fh = std::nan("");
    CHECK(error_code([&] { p.validate(); }) == ErrorCode::InvalidArgument);
}

TEST_CASE("csv row shape") {
    const NasalFeatureVector v{0.8, 0.25, 0.3, 1.0, 0.5};
    const auto imp = improvement(v, v);
    const auto header = nasal_csv_header();
    const auto row = nasal_csv_row("S0001", v, v, imp);
    CHECK(header.rfind("subject_id,aw_ic_pre,aw_ic_post,aw_ic_improved", 0) == 0);
    CHECK(std::count(header.begin(), header.end(), ',') == std::count(row.begin(), row.end(), ','));
    CHECK(row.rfind("S0001,", 0) == 0);
}
