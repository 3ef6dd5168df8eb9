#pragma once

#include "facemorph/landmarks.hpp"

#include <cstddef>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace facemorph {

/// a.b / (|a||b|), clamped to [-1, 1]. Throws DimensionMismatch or ZeroNorm.
double cosine_similarity(std::span<const double> a, std::span<const double> b);

enum class ImposterMode {
    pre_vs_post,  // pre_i vs post_j, i != j (ordered)
    all_cross,    // additionally pre_i vs pre_j and post_i vs post_j, i < j
};

/// Genuine and imposter comparison scores. When built from a cohort, the
/// subject indices behind each score are kept alongside so subsets can be
/// re-scored per surgeon.
struct ScoreSet {
    std::vector<double> genuine;
    std::vector<double> imposter;
    std::vector<std::size_t> genuine_subject;
    std::vector<std::pair<std::size_t, std::size_t>> imposter_subjects;

    /// Scores whose subjects all lie in `keep` (sorted subject indices).
    ScoreSet restrict_to(std::span<const std::size_t> keep) const;
};

/// Throws MissingEmbedding naming the first subject without embeddings.
ScoreSet build_scores(const Cohort& cohort, ImposterMode mode = ImposterMode::pre_vs_post);

struct OperatingPoint {
    double target_fmr = 0.0;
    double threshold = 0.0;  // +inf when no finite score meets the target
    double tmr = 0.0;
    double fmr = 0.0;  // achieved, always <= target_fmr
    std::size_t genuine_accepted = 0;
    std::size_t imposter_accepted = 0;
    std::size_t n_genuine = 0;
    std::size_t n_imposter = 0;
    bool degenerate_fmr = false;  // fewer than 1/target imposter comparisons
};

/// Smallest observed score t (or +inf) with P(imposter >= t) <= target_fmr.
/// Throws EmptyImposterSet, EmptyGenuineSet, InvalidArgument.
OperatingPoint tmr_at_fmr(const ScoreSet& scores, double target_fmr);

struct RocPoint {
    double threshold = 0.0;
    double fmr = 0.0;
    double tmr = 0.0;
    std::size_t imposter_accepted = 0;
    std::size_t genuine_accepted = 0;
};

/// One point per distinct score plus a leading +inf sentinel, thresholds descending.
std::vector<RocPoint> roc(const ScoreSet& scores);

std::string roc_csv(std::span<const RocPoint> curve);
std::string operating_point_json(const OperatingPoint& op);

}  // namespace facemorph
