#include "facemorph/synth.hpp"

#include "facemorph/error.hpp"

#include <fmt/format.h>
#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <numeric>

namespace facemorph {

namespace {

constexpr double kMid = 256.0;
constexpr double kGrid = 1024.0;
constexpr std::uint64_t kTemplateSeed = 0x5eedface;

// Structural landmarks pin the bounding box to [56, 456] x [16, 496] so the
// inner-eye alignment scale is a power of two.
constexpr std::size_t kTop = 0, kBottom = 200, kContourL = 127, kContourR = 356;
constexpr double kBoxMinX = 56.0, kBoxMaxX = 456.0, kBoxMinY = 16.0, kBoxMaxY = 496.0;

constexpr double kGlabellaY = 232.0;
constexpr double kForeheadY = 96.0;
constexpr double kFaceHeight = 312.0;
constexpr double kCheekY = 300.0;
constexpr double kPreIntercanthal = 64.0;
constexpr double kNostrilLift = 4.0;

// Ratio shifts applied by planting; each keeps the post value on the same
// side of its ideal as the pre value.
constexpr double kAwIcShift = 0.06;
constexpr double kAwFwShift = 0.015;
constexpr double kNlFhShift = 0.012;

double q(double v) { return std::round(v * kGrid) / kGrid; }

struct TemplateLayout {
    std::vector<Point2> points;
    std::vector<std::size_t> free_right;  // jitter targets
};

const LandmarkScheme kScheme{};

const TemplateLayout& layout() {
    static const TemplateLayout t = [] {
        TemplateLayout out;
        out.points.assign(kLandmarkCount, Point2{kMid, kMid});
        std::vector<bool> used(kLandmarkCount, false);
        auto put = [&](std::size_t i, Point2 p) {
            out.points[i] = p;
            used[i] = true;
        };
        put(kScheme.outer_eye_l, {156.0, 256.0});
        put(kScheme.outer_eye_r, {356.0, 256.0});
        put(kTop, {kMid, kBoxMinY});
        put(kBottom, {kMid, kBoxMaxY});
        put(kContourL, {kBoxMinX, 256.0});
        put(kContourR, {kBoxMaxX, 256.0});
        for (auto i : {kScheme.nose_tip, kScheme.nostril_l, kScheme.nostril_r, kScheme.inner_eye_l, kScheme.inner_eye_r,
                       kScheme.cheek_l, kScheme.cheek_r, kScheme.chin, kScheme.forehead, kScheme.glabella})
            used[i] = true;  // placed per subject

        SplitMix64 rng(kTemplateSeed);
        std::size_t pending = kLandmarkCount;
        for (std::size_t i = 0; i < kLandmarkCount; ++i) {
            if (used[i]) continue;
            if (pending == kLandmarkCount) {
                pending = i;
                continue;
            }
            const double x = q(rng.uniform(kBoxMinX + 10.0, kMid - 8.0));
            const double y = q(rng.uniform(40.0, 472.0));
            out.points[pending] = {x, y};
            out.points[i] = {2.0 * kMid - x, y};
            out.free_right.push_back(i);
            pending = kLandmarkCount;
        }
        return out;
    }();
    return t;
}

struct NasalGeometry {
    double intercanthal;
    double alar;
    double face_width;
    double nose_length;
};

std::vector<Point2> build_face(const NasalGeometry& g) {
    std::vector<Point2> p = layout().points;
    auto pair = [&](std::size_t l, std::size_t r, double half, double y) {
        const double h = q(half);
        p[l] = {kMid - h, y};
        p[r] = {kMid + h, y};
    };
    const double tip_y = q(kGlabellaY + g.nose_length);
    pair(kScheme.inner_eye_l, kScheme.inner_eye_r, g.intercanthal / 2.0, 256.0);
    pair(kScheme.nostril_l, kScheme.nostril_r, g.alar / 2.0, tip_y - kNostrilLift);
    pair(kScheme.cheek_l, kScheme.cheek_r, g.face_width / 2.0, kCheekY);
    p[kScheme.glabella] = {kMid, kGlabellaY};
    p[kScheme.nose_tip] = {kMid, tip_y};
    p[kScheme.forehead] = {kMid, kForeheadY};
    p[kScheme.chin] = {kMid, kForeheadY + kFaceHeight};
    return p;
}

void jitter_right(std::vector<Point2>& p, SplitMix64& rng, double sigma) {
    for (auto i : layout().free_right) {
        const double dx = rng.normal() * sigma;
        const double dy = rng.normal() * sigma;
        p[i].x = std::clamp(p[i].x + dx, kMid + 1.0, kBoxMaxX - 1.0);
        p[i].y = std::clamp(p[i].y + dy, kBoxMinY + 1.0, kBoxMaxY - 1.0);
    }
}

void jitter_nasal(std::vector<Point2>& p, SplitMix64& rng, double sigma) {
    for (auto i : {kScheme.nose_tip, kScheme.nostril_l, kScheme.nostril_r, kScheme.inner_eye_l, kScheme.inner_eye_r,
                   kScheme.cheek_l, kScheme.cheek_r, kScheme.chin, kScheme.forehead, kScheme.glabella}) {
        const double dx = rng.normal() * sigma;
        const double dy = rng.normal() * sigma;
        p[i].x += dx;
        p[i].y += dy;
    }
}

// Dyadic scale and quarter-pixel translation into the image keep coordinates exact.
std::vector<Point2> place(const std::vector<Point2>& tpl, SplitMix64& rng) {
    const double k = rng.uniform() < 0.5 ? 1.0 : 2.0;
    auto offset = [&](double lo_edge, double hi_edge) {
        const double lo = -lo_edge * k;
        const double hi = kSynthImageSize - hi_edge * k;
        const auto steps = static_cast<std::size_t>(std::floor((hi - lo) * 4.0));
        return lo + 0.25 * static_cast<double>(rng.below(steps + 1));
    };
    const double tx = offset(kBoxMinX, kBoxMaxX);
    const double ty = offset(kBoxMinY, kBoxMaxY);
    std::vector<Point2> out;
    out.reserve(tpl.size());
    for (const Point2& p : tpl) out.push_back({p.x * k + tx, p.y * k + ty});
    return out;
}

std::vector<bool> exact_count_subset(std::size_t n, double prob, SplitMix64& rng, std::size_t& count) {
    count = static_cast<std::size_t>(std::llround(prob * static_cast<double>(n)));
    std::vector<std::size_t> perm(n);
    std::iota(perm.begin(), perm.end(), 0);
    for (std::size_t i = n; i > 1; --i) std::swap(perm[i - 1], perm[rng.below(i)]);
    std::vector<bool> flags(n, false);
    for (std::size_t i = 0; i < count; ++i) flags[perm[i]] = true;
    return flags;
}

}  // namespace

double SplitMix64::normal() noexcept {
    const double u1 = 1.0 - uniform();  // (0, 1]
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

void SynthSpec::validate() const {
    if (n_subjects == 0) throw Error(ErrorCode::EmptyCohort, "n_subjects must be at least 1");
    auto prob = [](double p, const char* name) {
        if (!(p >= 0.0 && p <= 1.0)) throw Error(ErrorCode::InvalidArgument, fmt::format("{} must lie in [0, 1]", name));
    };
    auto nonneg = [](double v, const char* name) {
        if (!(std::isfinite(v) && v >= 0.0)) throw Error(ErrorCode::InvalidArgument, fmt::format("{} must be >= 0", name));
    };
    for (double p : planted_improve_probs) prob(p, "planted_improve_probs");
    prob(symmetry_improve_prob, "symmetry_improve_prob");
    prob(rhinoplasty_fraction, "rhinoplasty_fraction");
    nonneg(asymmetry_noise_px, "asymmetry_noise_px");
    nonneg(age_shift_sigma, "age_shift_sigma");
    nonneg(genuine_noise, "genuine_noise");
    nonneg(nasal_noise_fraction, "nasal_noise_fraction");
    if (!std::isfinite(age_shift_mean)) throw Error(ErrorCode::InvalidArgument, "age_shift_mean must be finite");
    if (embedding_dim < 2) throw Error(ErrorCode::InvalidArgument, "embedding_dim must be at least 2");
    if (n_surgeons == 0) throw Error(ErrorCode::InvalidArgument, "n_surgeons must be at least 1");
}

std::vector<Point2> symmetric_template() {
    const double aw = 0.85 * kPreIntercanthal;
    return build_face({kPreIntercanthal, aw, aw / 0.245, 0.295 * kFaceHeight});
}

SynthCohort generate(const SynthSpec& spec) {
    spec.validate();
    const std::size_t n = spec.n_subjects;
    SplitMix64 rng(spec.seed);

    SynthCohort out;
    out.cohort.name = fmt::format("synth-{}", spec.seed);
    std::array<std::vector<bool>, 3> planted;
    for (std::size_t f = 0; f < 3; ++f)
        planted[f] = exact_count_subset(n, spec.planted_improve_probs[f], rng, out.truth.planted_counts[f]);
    std::size_t sym_count = 0;
    const auto sym_improved = exact_count_subset(n, spec.symmetry_improve_prob, rng, sym_count);

    for (std::size_t i = 0; i < n; ++i) {
        const std::string sid = fmt::format("S{:04d}", i + 1);
        const std::string surgeon = fmt::format("G{}", i % spec.n_surgeons + 1);

        const double aw_ic = rng.uniform(0.80, 0.90);
        const double aw_fw = rng.uniform(0.23, 0.26);
        const double nl_fh = rng.uniform(0.28, 0.31);
        const NasalGeometry pre_geo{kPreIntercanthal, aw_ic * kPreIntercanthal, aw_ic * kPreIntercanthal / aw_fw,
                                    nl_fh * kFaceHeight};

        const double aw_ic_post = aw_ic + (planted[0][i] ? kAwIcShift : -kAwIcShift);
        const double aw_fw_post = aw_fw + (planted[1][i] ? -kAwFwShift : kAwFwShift);
        const double nl_fh_post = nl_fh + (planted[2][i] ? kNlFhShift : -kNlFhShift);
        NasalGeometry post_geo{};
        post_geo.face_width = pre_geo.face_width;
        post_geo.alar = aw_fw_post * post_geo.face_width;
        post_geo.intercanthal = post_geo.alar / aw_ic_post;
        post_geo.nose_length = nl_fh_post * kFaceHeight;

        SubjectTruth truth;
        truth.subject_id = sid;
        truth.surgeon_id = surgeon;
        for (std::size_t f = 0; f < 3; ++f) truth.nasal_improved[f] = planted[f][i];
        truth.min_effect_px = std::min({std::abs(post_geo.alar - pre_geo.alar) / 2.0,
                                        std::abs(post_geo.intercanthal - pre_geo.intercanthal) / 2.0,
                                        std::abs(post_geo.nose_length - pre_geo.nose_length)});

        auto pre_pts = build_face(pre_geo);
        auto post_pts = build_face(post_geo);

        const double sigma = spec.asymmetry_noise_px;
        const double post_sigma = sym_improved[i] ? 0.5 * sigma : 1.5 * sigma;
        jitter_right(pre_pts, rng, sigma);
        jitter_right(post_pts, rng, post_sigma);
        truth.delta_s_sign = sigma == 0.0 ? 0 : (sym_improved[i] ? -1 : 1);

        const double nasal_sigma = spec.nasal_noise_fraction * truth.min_effect_px;
        jitter_nasal(pre_pts, rng, nasal_sigma);
        jitter_nasal(post_pts, rng, nasal_sigma);

        const auto pre_img = place(pre_pts, rng);
        const auto post_img = place(post_pts, rng);

        const double pre_age = rng.uniform(25.0, 60.0);
        const double post_age = std::max(0.0, pre_age + spec.age_shift_mean + spec.age_shift_sigma * rng.normal());
        truth.delta_age = post_age - pre_age;

        std::vector<double> pre_emb(spec.embedding_dim), post_emb(spec.embedding_dim);
        for (auto& v : pre_emb) v = rng.normal();
        for (std::size_t d = 0; d < spec.embedding_dim; ++d) post_emb[d] = pre_emb[d] + spec.genuine_noise * rng.normal();

        truth.rhinoplasty = rng.uniform() < spec.rhinoplasty_fraction;
        const CoordMode mode = i % 2 == 0 ? CoordMode::pixel : CoordMode::normalized;

        auto record = [&](Role role, std::vector<Point2> pts, double age, std::vector<double> emb) {
            return FaceRecord{.image_id = fmt::format("{}_{}", sid, to_string(role)),
                              .subject_id = sid,
                              .role = role,
                              .landmarks = LandmarkSet(std::move(pts), kSynthImageSize, kSynthImageSize, mode),
                              .apparent_age = age,
                              .embedding = std::move(emb)};
        };
        SubjectPair pair{.subject_id = sid,
                         .surgeon_id = surgeon,
                         .procedure_tags = {truth.rhinoplasty ? "rhinoplasty" : "facelift"},
                         .pre = record(Role::pre, pre_img, pre_age, std::move(pre_emb)),
                         .post = record(Role::post, post_img, post_age, std::move(post_emb))};
        out.manifest.push_back(ManifestRow{.line = i + 2,
                                           .subject_id = sid,
                                           .surgeon_id = surgeon,
                                           .procedure_tags = pair.procedure_tags,
                                           .pre_record = "records/" + pair.pre.image_id + ".json",
                                           .post_record = "records/" + pair.post.image_id + ".json"});
        out.cohort.pairs.push_back(std::move(pair));
        out.truth.subjects.push_back(std::move(truth));
    }
    return out;
}

std::string ground_truth_json(const SynthCohort& synth, const SynthSpec& spec) {
    using ojson = nlohmann::ordered_json;
    ojson j;
    j["seed"] = spec.seed;
    j["n_subjects"] = spec.n_subjects;
    j["asymmetry_noise_px"] = spec.asymmetry_noise_px;
    j["planted_improve_probs"] = {{"aw_ic", spec.planted_improve_probs[0]},
                                  {"aw_fw", spec.planted_improve_probs[1]},
                                  {"nl_fh", spec.planted_improve_probs[2]}};
    j["planted_counts"] = {{"aw_ic", synth.truth.planted_counts[0]},
                           {"aw_fw", synth.truth.planted_counts[1]},
                           {"nl_fh", synth.truth.planted_counts[2]}};
    j["symmetry_improve_prob"] = spec.symmetry_improve_prob;
    j["age_shift"] = {{"mean", spec.age_shift_mean}, {"sigma", spec.age_shift_sigma}};
    j["embedding_dim"] = spec.embedding_dim;
    j["genuine_noise"] = spec.genuine_noise;
    j["nasal_noise_fraction"] = spec.nasal_noise_fraction;
    auto subjects = ojson::array();
    for (const auto& t : synth.truth.subjects) {
        subjects.push_back({{"subject_id", t.subject_id},
                            {"surgeon_id", t.surgeon_id},
                            {"nasal_improved", {{"aw_ic", t.nasal_improved[0]},
                                                {"aw_fw", t.nasal_improved[1]},
                                                {"nl_fh", t.nasal_improved[2]}}},
                            {"delta_s_sign", t.delta_s_sign},
                            {"delta_age", t.delta_age},
                            {"min_effect_px", t.min_effect_px},
                            {"rhinoplasty", t.rhinoplasty}});
    }
    j["subjects"] = std::move(subjects);
    return j.dump(2) + "\n";
}

void write_fixture(const SynthCohort& synth, const SynthSpec& spec, const std::filesystem::path& root) {
    namespace fs = std::filesystem;
    std::error_code ec;
    fs::create_directories(root / "records", ec);
    if (ec) throw Error(ErrorCode::IoError, fmt::format("cannot create {}: {}", (root / "records").string(), ec.message()));
    auto write = [](const fs::path& path, const std::string& text) {
        std::ofstream f(path, std::ios::binary | std::ios::trunc);
        if (!f) throw Error(ErrorCode::IoError, path.string());
        f << text;
        if (!f) throw Error(ErrorCode::IoError, path.string());
    };
    for (const auto& pair : synth.cohort.pairs) {
        for (const FaceRecord* rec : {&pair.pre, &pair.post})
            write(root / "records" / (rec->image_id + ".json"),
                  serialize_face_record(*rec, rec->landmarks.coord_mode()) + "\n");
    }
    write(root / "manifest.csv", format_manifest(synth.manifest));
    write(root / "ground_truth.json", ground_truth_json(synth, spec));
}

}  // namespace facemorph
