#include "facemorph/nasal.hpp"

#include "facemorph/error.hpp"

#include <fmt/format.h>

#include <cmath>

namespace facemorph {

std::string_view to_string(NasalFeature f) noexcept {
    switch (f) {
        case NasalFeature::aw_ic: return "aw_ic";
        case NasalFeature::aw_fw: return "aw_fw";
        case NasalFeature::nl_fh: return "nl_fh";
        case NasalFeature::tip_dev: return "tip_dev";
        case NasalFeature::nostril_asym: return "nostril_asym";
    }
    return "unknown";
}

double NasalFeatureVector::operator[](NasalFeature f) const noexcept {
    switch (f) {
        case NasalFeature::aw_ic: return aw_ic;
        case NasalFeature::aw_fw: return aw_fw;
        case NasalFeature::nl_fh: return nl_fh;
        case NasalFeature::tip_dev: return tip_dev;
        case NasalFeature::nostril_asym: return nostril_asym;
    }
    return 0.0;
}

double IdealProfile::operator[](NasalFeature f) const noexcept {
    switch (f) {
        case NasalFeature::aw_ic: return aw_ic;
        case NasalFeature::aw_fw: return aw_fw;
        case NasalFeature::nl_fh: return nl_fh;
        case NasalFeature::tip_dev: return tip_dev;
        case NasalFeature::nostril_asym: return nostril_asym;
    }
    return 0.0;
}

void IdealProfile::validate() const {
    for (auto f : kAllNasalFeatures) {
        const double v = (*this)[f];
        if (!std::isfinite(v) || v < 0.0)
            throw Error(ErrorCode::InvalidArgument, fmt::format("ideal for {} must be finite and >= 0", to_string(f)));
    }
}

NasalFeatureVector nasal_features(const AlignedFace& aligned, const LandmarkScheme& scheme) {
    const auto& p = aligned.points;
    if (p.size() != kLandmarkCount)
        throw Error(ErrorCode::WrongLandmarkCount, "nasal features need a full landmark set");

    const double alar = distance(p[scheme.nostril_l], p[scheme.nostril_r]);
    const double intercanthal = distance(p[scheme.inner_eye_l], p[scheme.inner_eye_r]);
    const double face_width = distance(p[scheme.cheek_l], p[scheme.cheek_r]);
    const double nose_length = distance(p[scheme.nose_length_top], p[scheme.nose_length_bottom]);
    const double face_height = distance(p[scheme.forehead], p[scheme.chin]);
    if (intercanthal < kMinDenominator) throw Error(ErrorCode::DegenerateDenominator, "intercanthal distance");
    if (face_width < kMinDenominator) throw Error(ErrorCode::DegenerateDenominator, "face width");
    if (face_height < kMinDenominator) throw Error(ErrorCode::DegenerateDenominator, "face height");

    const double mid = (p[scheme.inner_eye_l].x + p[scheme.inner_eye_r].x) / 2.0;
    return NasalFeatureVector{.aw_ic = alar / intercanthal,
                              .aw_fw = alar / face_width,
                              .nl_fh = nose_length / face_height,
                              .tip_dev = std::abs(p[scheme.nose_tip].x - mid),
                              .nostril_asym = std::abs(p[scheme.nostril_l].y - p[scheme.nostril_r].y)};
}

NasalImprovement improvement(const NasalFeatureVector& before, const NasalFeatureVector& after,
                             const IdealProfile& ideals) {
    NasalImprovement out;
    for (auto f : kAllNasalFeatures) {
        FeatureChange& c = out.per_feature[static_cast<std::size_t>(f)];
        c.deviation_before = std::abs(before[f] - ideals[f]);
        c.deviation_after = std::abs(after[f] - ideals[f]);
        c.improved = c.deviation_after < c.deviation_before;
        if (c.improved && is_significant(f)) ++out.significant_improved_count;
    }
    out.improved_any = out.significant_improved_count >= 1;
    return out;
}

std::string nasal_csv_header() {
    std::string h = "subject_id";
    for (auto f : kAllNasalFeatures) {
        const auto name = to_string(f);
        h += fmt::format(",{0}_pre,{0}_post,{0}_improved", name);
    }
    return h + ",significant_improved_count,improved_any";
}

std::string nasal_csv_row(const std::string& subject_id, const NasalFeatureVector& pre, const NasalFeatureVector& post,
                          const NasalImprovement& imp) {
    std::string row = subject_id;
    for (auto f : kAllNasalFeatures)
        row += fmt::format(",{:.17g},{:.17g},{}", pre[f], post[f], imp[f].improved ? 1 : 0);
    return row + fmt::format(",{},{}", imp.significant_improved_count, imp.improved_any ? 1 : 0);
}

}  // namespace facemorph
