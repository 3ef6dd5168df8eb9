#include "facemorph/outcome.hpp"

#include "facemorph/error.hpp"

#include <fmt/format.h>

#include <cmath>

namespace facemorph {

std::string_view to_string(OutcomeCategory c) noexcept {
    switch (c) {
        case OutcomeCategory::Both: return "Both";
        case OutcomeCategory::OnlySymmetric: return "OnlySymmetric";
        case OutcomeCategory::OnlyYounger: return "OnlyYounger";
        case OutcomeCategory::Neither: return "Neither";
    }
    return "Unknown";
}

AgeDelta age_delta(const FaceRecord& pre, const FaceRecord& post) {
    if (!pre.apparent_age) throw Error(ErrorCode::MissingAge, "image '" + pre.image_id + "'");
    if (!post.apparent_age) throw Error(ErrorCode::MissingAge, "image '" + post.image_id + "'");
    return {*pre.apparent_age, *post.apparent_age, *post.apparent_age - *pre.apparent_age};
}

OutcomeCategory categorize(double delta_symmetry, double delta_age) {
    if (!std::isfinite(delta_symmetry) || !std::isfinite(delta_age))
        throw Error(ErrorCode::InvalidArgument, "outcome deltas must be finite");
    const bool sym = delta_symmetry < 0.0;
    const bool age = delta_age < 0.0;
    if (sym && age) return OutcomeCategory::Both;
    if (sym) return OutcomeCategory::OnlySymmetric;
    if (age) return OutcomeCategory::OnlyYounger;
    return OutcomeCategory::Neither;
}

std::string outcome_csv_header() { return "subject_id,surgeon_id,delta_s,delta_age,category"; }

std::string outcome_csv_row(const std::string& subject_id, const std::string& surgeon_id, double delta_s,
                            double delta_age, OutcomeCategory category) {
    return fmt::format("{},{},{:.17g},{:.17g},{}", subject_id, surgeon_id, delta_s, delta_age, to_string(category));
}

}  // namespace facemorph
