#include "facemorph/alignment.hpp"
#include "facemorph/nasal.hpp"
#include "facemorph/symmetry.hpp"
#include "facemorph/synth.hpp"
#include "test_util.hpp"

#include <doctest.h>
#include <json.hpp>

#include <cmath>
#include <fstream>
#include <sstream>

using namespace facemorph;
using testutil::error_code;

namespace {

std::string slurp(const std::filesystem::path& p) {
    std::ifstream f(p, std::ios::binary);
    std::stringstream ss;
    ss << f.rdbuf();
    return ss.str();
}

SynthSpec small(std::uint64_t seed, std::size_t n = 40) {
    SynthSpec s;
    s.seed = seed;
    s.n_subjects = n;
    s.embedding_dim = 16;
    return s;
}

}  // namespace

TEST_CASE("SplitMix64 reference outputs") {
    SplitMix64 rng(1234567);
    CHECK(rng.next() == 6457827717110365317ULL);
    CHECK(rng.next() == 3203168211198807973ULL);
    CHECK(rng.next() == 9817491932198370423ULL);
    CHECK(rng.next() == 4593380528125082431ULL);
    CHECK(rng.next() == 16408922859458223821ULL);
}

TEST_CASE("uniform and normal draws are sane") {
    SplitMix64 rng(3);
    double sum = 0, sq = 0;
    const int n = 200000;
    for (int i = 0; i < n; ++i) {
        const double u = rng.uniform();
        CHECK_FALSE((u < 0.0 || u >= 1.0));
        const double z = rng.normal();
        sum += z;
        sq += z * z;
    }
    CHECK(std::abs(sum / n) < 0.01);
    CHECK(std::abs(sq / n - 1.0) < 0.02);
}

TEST_CASE("template is mirror symmetric on the 1/1024 grid") {
    const auto t = symmetric_template();
    REQUIRE(t.size() == kLandmarkCount);
    std::size_t on_mid = 0;
    for (const auto& p : t) {
        CHECK(p.x * 1024.0 == std::round(p.x * 1024.0));
        CHECK(p.y * 1024.0 == std::round(p.y * 1024.0));
        if (p.x == 256.0) {
            ++on_mid;
            continue;
        }
        const Point2 m{512.0 - p.x, p.y};
        CHECK(std::find(t.begin(), t.end(), m) != t.end());
    }
    CHECK(on_mid < 20);
    CHECK(symmetry_score(align_outer_eyes(t)).score == 0.0);
}

TEST_CASE("spec validation") {
    SynthSpec s;
    s.n_subjects = 0;
    CHECK(error_code([&] { s.validate(); }) == ErrorCode::EmptyCohort);
    s = SynthSpec{};
    s.planted_improve_probs[1] = 1.2;
    CHECK(error_code([&] { s.validate(); }) == ErrorCode::InvalidArgument);
    s = SynthSpec{};
    s.asymmetry_noise_px = -1;
    CHECK(error_code([&] { s.validate(); }) == ErrorCode::InvalidArgument);
    s = SynthSpec{};
    s.n_surgeons = 0;
    CHECK(error_code([&] { s.validate(); }) == ErrorCode::InvalidArgument);
}

TEST_CASE("same seed, same cohort; different seed, different cohort") {
    const auto a = generate(small(5));
    const auto b = generate(small(5));
    const auto c = generate(small(6));
    REQUIRE(a.cohort.pairs.size() == 40);
    for (std::size_t i = 0; i < 40; ++i) {
        CHECK(a.cohort.pairs[i].pre == b.cohort.pairs[i].pre);
        CHECK(a.cohort.pairs[i].post == b.cohort.pairs[i].post);
    }
    CHECK_FALSE(a.cohort.pairs[0].pre == c.cohort.pairs[0].pre);
    CHECK(ground_truth_json(a, small(5)) == ground_truth_json(b, small(5)));
}

TEST_CASE("ids, surgeons and coordinate modes") {
    auto spec = small(9, 7);
    spec.n_surgeons = 3;
    const auto s = generate(spec);
    CHECK(s.cohort.pairs[0].subject_id == "S0001");
    CHECK(s.cohort.pairs[6].subject_id == "S0007");
    CHECK(s.cohort.pairs[0].surgeon_id == "G1");
    CHECK(s.cohort.pairs[4].surgeon_id == "G2");
    CHECK(s.cohort.pairs[0].pre.image_id == "S0001_pre");
    CHECK(s.cohort.pairs[0].post.image_id == "S0001_post");
    CHECK(s.cohort.pairs[0].pre.landmarks.coord_mode() == CoordMode::pixel);
    CHECK(s.cohort.pairs[1].pre.landmarks.coord_mode() == CoordMode::normalized);
    CHECK(s.manifest[2].pre_record == "records/S0003_pre.json");
}

TEST_CASE("planted counts are exact") {
    SynthSpec spec;
    spec.n_subjects = 366;
    spec.embedding_dim = 4;
    const auto s = generate(spec);
    CHECK(s.truth.planted_counts[0] == 144);  // round(0.393 * 366)
    CHECK(s.truth.planted_counts[1] == 282);  // round(0.770 * 366)
    CHECK(s.truth.planted_counts[2] == 152);  // round(0.415 * 366)
    for (std::size_t f = 0; f < 3; ++f) {
        std::size_t k = 0;
        for (const auto& t : s.truth.subjects) k += t.nasal_improved[f];
        CHECK(k == s.truth.planted_counts[f]);
    }
}

TEST_CASE("noise-free fixtures are perfectly symmetric and nasal flags match truth") {
    auto spec = small(77, 60);
    spec.asymmetry_noise_px = 0.0;
    const auto s = generate(spec);
    for (std::size_t i = 0; i < s.cohort.pairs.size(); ++i) {
        const auto& p = s.cohort.pairs[i];
        CHECK(symmetry_score(align_outer_eyes(p.pre.landmarks)).score == 0.0);
        CHECK(symmetry_score(align_outer_eyes(p.post.landmarks)).score == 0.0);
        const auto imp =
            improvement(nasal_features(align_inner_eyes(p.pre.landmarks)), nasal_features(align_inner_eyes(p.post.landmarks)));
        CHECK(imp[NasalFeature::aw_ic].improved == s.truth.subjects[i].nasal_improved[0]);
        CHECK(imp[NasalFeature::aw_fw].improved == s.truth.subjects[i].nasal_improved[1]);
        CHECK(imp[NasalFeature::nl_fh].improved == s.truth.subjects[i].nasal_improved[2]);
        CHECK(s.truth.subjects[i].delta_s_sign == 0);
    }
}

TEST_CASE("asymmetry noise moves the symmetry score in the planted direction") {
    auto spec = small(13, 80);
    spec.asymmetry_noise_px = 2.0;
    const auto s = generate(spec);
    std::size_t agree = 0;
    for (std::size_t i = 0; i < s.cohort.pairs.size(); ++i) {
        const auto& p = s.cohort.pairs[i];
        const double pre = symmetry_score(align_outer_eyes(p.pre.landmarks)).score;
        const double post = symmetry_score(align_outer_eyes(p.post.landmarks)).score;
        CHECK(pre > 0.0);
        const int sign = post < pre ? -1 : 1;
        agree += sign == s.truth.subjects[i].delta_s_sign;
    }
    CHECK(agree >= 76);
}

TEST_CASE("age deltas and embeddings") {
    auto spec = small(21, 200);
    spec.age_shift_mean = -2.0;
    spec.age_shift_sigma = 1.0;
    const auto s = generate(spec);
    double mean = 0.0;
    for (std::size_t i = 0; i < s.cohort.pairs.size(); ++i) {
        const auto& p = s.cohort.pairs[i];
        CHECK(*p.post.apparent_age - *p.pre.apparent_age == s.truth.subjects[i].delta_age);
        CHECK(*p.pre.apparent_age >= 25.0);
        CHECK(*p.pre.apparent_age < 60.0);
        CHECK(p.pre.embedding->size() == 16);
        mean += s.truth.subjects[i].delta_age;
    }
    mean /= 200.0;
    CHECK(std::abs(mean + 2.0) < 0.3);
}

TEST_CASE("fixture on disk loads back to the same cohort") {
    testutil::TempDir dir;
    const auto spec = small(31, 12);
    const auto s = generate(spec);
    write_fixture(s, spec, dir.path);
    const auto loaded = load_cohort(dir.path / "manifest.csv", dir.path);
    REQUIRE(loaded.pairs.size() == 12);
    for (std::size_t i = 0; i < 12; ++i) {
        CHECK(loaded.pairs[i].subject_id == s.cohort.pairs[i].subject_id);
        CHECK(loaded.pairs[i].surgeon_id == s.cohort.pairs[i].surgeon_id);
        CHECK(loaded.pairs[i].procedure_tags == s.cohort.pairs[i].procedure_tags);
        CHECK(loaded.pairs[i].pre == s.cohort.pairs[i].pre);
        CHECK(loaded.pairs[i].post.embedding == s.cohort.pairs[i].post.embedding);
        CHECK(loaded.pairs[i].post.apparent_age == s.cohort.pairs[i].post.apparent_age);
    }
    const auto truth = nlohmann::json::parse(slurp(dir.path / "ground_truth.json"));
    CHECK(truth["seed"] == 31);
    CHECK(truth["subjects"].size() == 12);
    CHECK(truth["planted_counts"]["aw_fw"] == s.truth.planted_counts[1]);
}

TEST_CASE("rhinoplasty fraction tags subjects") {
    auto spec = small(4, 100);
    spec.rhinoplasty_fraction = 0.0;
    for (const auto& p : generate(spec).cohort.pairs) CHECK(p.procedure_tags.count("facelift") == 1);
    spec.rhinoplasty_fraction = 1.0;
    for (const auto& p : generate(spec).cohort.pairs) CHECK(p.procedure_tags.count("rhinoplasty") == 1);
}

TEST_CASE("all-improved planting yields every subject improved") {
    auto spec = small(8, 50);
    spec.planted_improve_probs = {1.0, 1.0, 1.0};
    const auto s = generate(spec);
    for (const auto& p : s.cohort.pairs) {
        const auto imp =
            improvement(nasal_features(align_inner_eyes(p.pre.landmarks)), nasal_features(align_inner_eyes(p.post.landmarks)));
        CHECK(imp.improved_any);
        CHECK(imp.significant_improved_count == 3);
    }
}

TEST_CASE("flags are recovered exactly when the effect exceeds ten times the jitter") {
    std::size_t mismatches = 0, checked = 0;
    for (std::uint64_t seed = 100; seed < 110; ++seed) {
        auto spec = small(seed, 366);
        spec.nasal_noise_fraction = 0.099;
        const auto s = generate(spec);
        for (std::size_t i = 0; i < s.cohort.pairs.size(); ++i) {
            const auto& p = s.cohort.pairs[i];
            const auto imp = improvement(nasal_features(align_inner_eyes(p.pre.landmarks)),
                                         nasal_features(align_inner_eyes(p.post.landmarks)));
            for (std::size_t f = 0; f < 3; ++f) {
                mismatches += imp[kAllNasalFeatures[f]].improved != s.truth.subjects[i].nasal_improved[f];
                ++checked;
            }
        }
    }
    CHECK(checked == 10 * 366 * 3);
    CHECK(mismatches == 0);
}
