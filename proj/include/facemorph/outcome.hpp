#pragma once

#include "facemorph/landmarks.hpp"

#include <array>
#include <string>
#include <string_view>

namespace facemorph {

enum class OutcomeCategory { Both = 0, OnlySymmetric, OnlyYounger, Neither };

inline constexpr std::array<OutcomeCategory, 4> kAllOutcomeCategories{
    OutcomeCategory::Both, OutcomeCategory::OnlySymmetric, OutcomeCategory::OnlyYounger, OutcomeCategory::Neither};

std::string_view to_string(OutcomeCategory c) noexcept;

struct AgeDelta {
    double pre_age = 0.0;
    double post_age = 0.0;
    double delta = 0.0;
};

/// Throws MissingAge if either record lacks an apparent age.
AgeDelta age_delta(const FaceRecord& pre, const FaceRecord& post);

/// Sign-only classification; zero deltas are not improvements.
/// Throws InvalidArgument for non-finite deltas.
OutcomeCategory categorize(double delta_symmetry, double delta_age);

std::string outcome_csv_header();
std::string outcome_csv_row(const std::string& subject_id, const std::string& surgeon_id, double delta_s,
                            double delta_age, OutcomeCategory category);

}  // namespace facemorph
