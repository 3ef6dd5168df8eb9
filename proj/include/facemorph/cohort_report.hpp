#pragma once

#include "facemorph/biometric.hpp"
#include "facemorph/landmarks.hpp"
#include "facemorph/nasal.hpp"
#include "facemorph/outcome.hpp"
#include "facemorph/stats.hpp"

#include <array>
#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace facemorph {

struct FeatureGroupResult {
    NasalFeature feature = NasalFeature::aw_ic;
    std::size_t n = 0;
    std::size_t improved_count = 0;
    double improved_rate = 0.0;
    std::optional<WilcoxonResult> wilcoxon;  // on |R - R_ideal| before vs after
    std::string wilcoxon_error;
    std::optional<TTestResult> t_test;
    std::string t_test_error;
    bool significant = false;  // Wilcoxon p < alpha
};

struct NasalSummary {
    std::array<FeatureGroupResult, kNasalFeatureCount> per_feature{};
    std::array<std::size_t, kSignificantFeatureCount + 1> count_counts{};  // exactly 0..3 improved
    std::array<double, kSignificantFeatureCount + 1> count_distribution{};
    std::size_t improved_any = 0;
    double improved_any_rate = 0.0;
    std::vector<std::string> non_improved;  // subject ids improving on none of the three ratios
};

struct OutcomeSummary {
    std::array<std::size_t, 4> counts{};
    std::array<double, 4> distribution{};
};

struct BiometricSummary {
    std::optional<OperatingPoint> operating_point;
    std::string error;
};

struct GroupSummary {
    std::size_t n_subjects = 0;
    std::optional<NasalSummary> nasal;
    std::optional<OutcomeSummary> outcomes;
    std::optional<BiometricSummary> biometric;
};

struct SubjectFailure {
    std::string subject_id;
    std::string error;
};

struct CohortReport {
    std::string cohort;
    double alpha = 0.001;
    IdealProfile ideals;
    GroupSummary summary;
    std::map<std::string, GroupSummary> per_surgeon;
    std::vector<SubjectFailure> failures;
};

struct AggregateOptions {
    double alpha = 0.001;
    double target_fmr = 1e-4;
    IdealProfile ideals;
};

/// Per-subject results keyed by subject id. A present map must cover every
/// subject in the cohort, otherwise InconsistentCoverage.
struct AggregateInputs {
    std::optional<std::map<std::string, NasalImprovement>> nasal;
    std::optional<std::map<std::string, OutcomeCategory>> outcomes;
    std::optional<ScoreSet> scores;  // built from the same cohort, subject order preserved
};

CohortReport aggregate(const Cohort& cohort, const AggregateInputs& inputs, const AggregateOptions& options = {});

std::string report_json(const CohortReport& report);
std::string feature_rows_csv(const CohortReport& report);
std::string non_improved_csv(const CohortReport& report, const Cohort& cohort);

}  // namespace facemorph
