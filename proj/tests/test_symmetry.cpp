#include "facemorph/alignment.hpp"
#include "facemorph/error.hpp"
#include "facemorph/symmetry.hpp"
#include "oracles.hpp"
#include "test_util.hpp"

#include <doctest.h>

#include <algorithm>

using namespace facemorph;

TEST_CASE("exact mirror twins give zero") {
    const AlignedFace a = align_outer_eyes(symmetric_template());
    const SymmetryResult r = symmetry_score(a);
    CHECK(r.score == 0.0);
    CHECK(r.n_left == r.n_right);
    CHECK(r.n_left + r.n_right < kLandmarkCount);  // midline landmarks excluded
    for (const auto& m : r.per_landmark) CHECK(m.distance == 0.0);
}

TEST_CASE("3+3 toy set") {
    // Hand derivation: first two left points have coincident reflections;
    // (-1,3) reflects to (1,3), nearest right point (1.5,3) reflects back to
    // (-1.5,3), distance 0.5. S = 0.5 / 3.
    const std::vector<Point2> pts{{-1, 0}, {-2, 1}, {-1, 3}, {1, 0}, {2, 1}, {1.5, 3}};
    const SymmetryResult r = symmetry_score(pts, 0.0);
    CHECK(r.n_left == 3);
    CHECK(r.n_right == 3);
    REQUIRE(r.per_landmark.size() == 3);
    CHECK(r.per_landmark[0].distance == 0.0);
    CHECK(r.per_landmark[1].distance == 0.0);
    CHECK(r.per_landmark[2].distance == doctest::Approx(0.5));
    CHECK(r.per_landmark[2].right_index == 5);
    CHECK(r.score == doctest::Approx(0.5 / 3.0).epsilon(1e-12));
    CHECK(r.score == doctest::Approx(oracle::brute_symmetry(pts, 0.0)).epsilon(1e-15));
}

TEST_CASE("midline points belong to neither side") {
    const std::vector<Point2> pts{{0, 5}, {-1, 0}, {1, 0}, {0, -3}};
    const SymmetryResult r = symmetry_score(pts, 0.0);
    CHECK(r.n_left == 1);
    CHECK(r.n_right == 1);
    CHECK(r.score == 0.0);
}

TEST_CASE("empty side") {
    const std::vector<Point2> pts{{1, 0}, {2, 0}, {0, 0}};
    try {
        symmetry_score(pts, 0.0);
        FAIL("no throw");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::EmptySide);
    }
}

TEST_CASE("rigid translation with the midline leaves S unchanged") {
    SplitMix64 rng(8);
    const auto face = testutil::random_face(rng, 1.0);
    const AlignedFace a = align_outer_eyes(face);
    std::vector<Point2> moved;
    for (const auto& p : a.points) moved.push_back({p.x + 10.0, p.y + 10.0});
    const double s0 = symmetry_score(a).score;
    const double s1 = symmetry_score(moved, a.midline_x + 10.0).score;
    CHECK(s1 == doctest::Approx(s0).epsilon(1e-12));
}

TEST_CASE("KD-tree path equals brute-force reflection matching") {
    SplitMix64 rng(1234);
    for (int i = 0; i < 100; ++i) {
        const AlignedFace a = align_outer_eyes(testutil::random_face(rng, rng.uniform(0.1, 5.0)));
        const double kd = symmetry_score(a).score;
        const double bf = oracle::brute_symmetry(a.points, a.midline_x);
        REQUIRE(std::abs(kd - bf) <= 1e-12);
    }
}

TEST_CASE("score is the mean of per-landmark distances") {
    SplitMix64 rng(4);
    const auto r = symmetry_score(align_outer_eyes(testutil::random_face(rng)));
    double sum = 0.0;
    for (const auto& m : r.per_landmark) {
        CHECK(m.distance >= 0.0);
        sum += m.distance;
    }
    CHECK(std::abs(r.score - sum / static_cast<double>(r.per_landmark.size())) <= 1e-12);
}

TEST_CASE("mirroring an exactly symmetric face preserves S") {
    const auto pts = symmetric_template();
    std::vector<Point2> mirrored;
    for (const auto& p : pts) mirrored.push_back({512.0 - p.x, p.y});
    CHECK(symmetry_score(pts, 256.0).score == 0.0);
    CHECK(symmetry_score(mirrored, 256.0).score == 0.0);
}

TEST_CASE("S is zero exactly when every left point has a reflected twin") {
    auto pts = symmetric_template();
    CHECK(symmetry_score(pts, 256.0).score == 0.0);
    // Break one twin: S becomes positive.
    std::size_t right = 0;
    for (std::size_t i = 0; i < pts.size(); ++i)
        if (pts[i].x > 300.0) right = i;
    pts[right].y += 0.25;
    CHECK(symmetry_score(pts, 256.0).score > 0.0);
}

TEST_CASE("median S does not decrease with one-sided noise") {
    SplitMix64 rng(31);
    double previous = -1.0;
    for (double sigma : {0.0, 0.5, 1.0, 2.0, 4.0, 8.0}) {
        std::vector<double> scores;
        for (int t = 0; t < 100; ++t) {
            auto pts = symmetric_template();
            for (auto& p : pts)
                if (p.x > 256.0 && p.x < 450.0) {
                    p.x = std::max(256.5, p.x + sigma * rng.normal());
                    p.y += sigma * rng.normal();
                }
            scores.push_back(symmetry_score(pts, 256.0).score);
        }
        std::nth_element(scores.begin(), scores.begin() + 50, scores.end());
        CHECK(scores[50] >= previous);
        previous = scores[50];
    }
}

TEST_CASE("symmetry delta tie rule") {
    SymmetryResult a, b;
    a.score = 2.0;
    b.score = 1.5;
    auto d = symmetry_delta(a, b);
    CHECK(d.delta == -0.5);
    CHECK(d.improved);
    a.score = 1.0;
    b.score = 1.0;
    d = symmetry_delta(a, b);
    CHECK(d.delta == 0.0);
    CHECK_FALSE(d.improved);
    b.score = 1.2;
    d = symmetry_delta(a, b);
    CHECK(d.delta == doctest::Approx(0.2));
    CHECK_FALSE(d.improved);
}

TEST_CASE("csv row") {
    SymmetryResult r;
    r.score = 0.25;
    r.n_left = 3;
    r.n_right = 4;
    CHECK(symmetry_csv_row("img", r) == "img,0.25,3,4");
}
