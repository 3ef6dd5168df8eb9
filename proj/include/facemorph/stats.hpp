#pragma once

#include <cstddef>
#include <span>

namespace facemorph {

struct WilcoxonResult {
    double p_value = 1.0;       // two-sided
    double w_plus = 0.0;        // sum of (mid)ranks of positive differences
    std::size_t n_used = 0;     // nonzero differences
    std::size_t n_dropped = 0;  // zero differences removed before ranking
    bool exact = false;
};

inline constexpr std::size_t kWilcoxonMinPairs = 5;
inline constexpr std::size_t kWilcoxonExactMaxN = 25;

/// Wilcoxon signed-rank test on after - before. Exact null distribution for
/// n <= 25, normal approximation with continuity and tie correction above.
/// Throws DimensionMismatch, AllZeroDifferences, TooFewPairs.
WilcoxonResult wilcoxon_signed_rank(std::span<const double> before, std::span<const double> after);

struct TTestResult {
    double p_value = 1.0;  // two-sided
    double t = 0.0;
    double mean_difference = 0.0;
    std::size_t dof = 0;
};

/// Paired t-test on after - before with n-1 degrees of freedom.
/// Throws DimensionMismatch, TooFewPairs, ZeroVariance.
TTestResult paired_t_test(std::span<const double> before, std::span<const double> after);

/// Two-sided tail probability P(|T| >= |t|) for Student's t.
double student_t_two_sided(double t, double dof);

}  // namespace facemorph
