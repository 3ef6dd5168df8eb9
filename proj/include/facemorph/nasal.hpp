#pragma once

#include "facemorph/alignment.hpp"
#include "facemorph/landmarks.hpp"

#include <array>
#include <cstddef>
#include <string>
#include <string_view>

namespace facemorph {

enum class NasalFeature : std::size_t { aw_ic = 0, aw_fw, nl_fh, tip_dev, nostril_asym };

inline constexpr std::size_t kNasalFeatureCount = 5;
inline constexpr std::size_t kSignificantFeatureCount = 3;  // aw_ic, aw_fw, nl_fh
inline constexpr std::array<NasalFeature, kNasalFeatureCount> kAllNasalFeatures{
    NasalFeature::aw_ic, NasalFeature::aw_fw, NasalFeature::nl_fh, NasalFeature::tip_dev, NasalFeature::nostril_asym};

std::string_view to_string(NasalFeature f) noexcept;
inline constexpr bool is_significant(NasalFeature f) noexcept { return static_cast<std::size_t>(f) < 3; }

struct NasalFeatureVector {
    double aw_ic = 0.0;
    double aw_fw = 0.0;
    double nl_fh = 0.0;
    double tip_dev = 0.0;       // canonical px, horizontal only
    double nostril_asym = 0.0;  // canonical px, vertical only

    double operator[](NasalFeature f) const noexcept;
    friend bool operator==(const NasalFeatureVector&, const NasalFeatureVector&) = default;
};

struct IdealProfile {
    double aw_ic = 1.0;
    double aw_fw = 0.20;
    double nl_fh = 1.0 / 3.0;
    double tip_dev = 0.0;
    double nostril_asym = 0.0;

    double operator[](NasalFeature f) const noexcept;
    void validate() const;
};

struct FeatureChange {
    double deviation_before = 0.0;  // |R_before - R_ideal|
    double deviation_after = 0.0;   // |R_after - R_ideal|
    bool improved = false;
};

struct NasalImprovement {
    std::array<FeatureChange, kNasalFeatureCount> per_feature{};
    int significant_improved_count = 0;
    bool improved_any = false;

    const FeatureChange& operator[](NasalFeature f) const noexcept { return per_feature[static_cast<std::size_t>(f)]; }
};

inline constexpr double kMinDenominator = 1e-6;

/// Five nasal measurements from an inner-eye-aligned face.
/// Throws DegenerateDenominator when intercanthal, face width, or face height collapse.
NasalFeatureVector nasal_features(const AlignedFace& aligned, const LandmarkScheme& scheme = {});

/// Strict ideal-proximity rule per feature; only the three ratios count toward
/// `significant_improved_count`.
NasalImprovement improvement(const NasalFeatureVector& before, const NasalFeatureVector& after,
                             const IdealProfile& ideals = {});

std::string nasal_csv_header();
std::string nasal_csv_row(const std::string& subject_id, const NasalFeatureVector& pre, const NasalFeatureVector& post,
                          const NasalImprovement& imp);

}  // namespace facemorph
