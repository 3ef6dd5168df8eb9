#include "facemorph/stats.hpp"

#include "facemorph/error.hpp"

#include <boost/math/distributions/students_t.hpp>
#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <vector>

namespace facemorph {

namespace {

void require_same_length(std::span<const double> a, std::span<const double> b) {
    if (a.size() != b.size())
        throw Error(ErrorCode::DimensionMismatch, fmt::format("paired samples of length {} and {}", a.size(), b.size()));
    for (std::size_t i = 0; i < a.size(); ++i)
        if (!std::isfinite(a[i]) || !std::isfinite(b[i]))
            throw Error(ErrorCode::InvalidArgument, fmt::format("non-finite value at pair {}", i));
}

}  // namespace

WilcoxonResult wilcoxon_signed_rank(std::span<const double> before, std::span<const double> after) {
    require_same_length(before, after);
    std::vector<double> diffs;
    for (std::size_t i = 0; i < before.size(); ++i) {
        const double d = after[i] - before[i];
        if (d != 0.0) diffs.push_back(d);
    }
    WilcoxonResult res;
    res.n_used = diffs.size();
    res.n_dropped = before.size() - diffs.size();
    if (!before.empty() && diffs.empty()) throw Error(ErrorCode::AllZeroDifferences, "every pair is unchanged");
    if (diffs.size() < kWilcoxonMinPairs)
        throw Error(ErrorCode::TooFewPairs,
                    fmt::format("{} nonzero differences, need at least {}", diffs.size(), kWilcoxonMinPairs));

    const std::size_t n = diffs.size();
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return std::abs(diffs[a]) < std::abs(diffs[b]); });

    // Doubled midranks stay integral: tie group occupying ranks i+1..j gets i+j+1.
    std::vector<std::uint32_t> rank2(n);
    double tie_term = 0.0;
    for (std::size_t i = 0; i < n;) {
        std::size_t j = i + 1;
        while (j < n && std::abs(diffs[order[j]]) == std::abs(diffs[order[i]])) ++j;
        const auto r2 = static_cast<std::uint32_t>(i + j + 1);
        for (std::size_t k = i; k < j; ++k) rank2[order[k]] = r2;
        const double t = static_cast<double>(j - i);
        tie_term += t * t * t - t;
        i = j;
    }
    std::uint64_t w2 = 0;
    for (std::size_t i = 0; i < n; ++i)
        if (diffs[i] > 0.0) w2 += rank2[i];
    res.w_plus = static_cast<double>(w2) / 2.0;

    if (n <= kWilcoxonExactMaxN) {
        // Null distribution of the doubled statistic by subset-sum counting.
        const std::uint64_t total = std::accumulate(rank2.begin(), rank2.end(), std::uint64_t{0});
        std::vector<std::uint64_t> counts(total + 1, 0);
        counts[0] = 1;
        std::uint64_t reach = 0;
        for (auto r : rank2) {
            for (std::uint64_t s = reach + 1; s-- > 0;)
                if (counts[s]) counts[s + r] += counts[s];
            reach += r;
        }
        std::uint64_t lower = 0, upper = 0;
        for (std::uint64_t s = 0; s <= total; ++s) {
            if (s <= w2) lower += counts[s];
            if (s >= w2) upper += counts[s];
        }
        const double denom = std::ldexp(1.0, static_cast<int>(n));
        const double tail = static_cast<double>(std::min(lower, upper)) / denom;
        res.p_value = std::min(1.0, 2.0 * tail);
        res.exact = true;
        return res;
    }

    const double nn = static_cast<double>(n);
    const double mean = nn * (nn + 1.0) / 4.0;
    const double var = nn * (nn + 1.0) * (2.0 * nn + 1.0) / 24.0 - tie_term / 48.0;
    const double z = std::max(0.0, std::abs(res.w_plus - mean) - 0.5) / std::sqrt(var);
    res.p_value = std::min(1.0, std::erfc(z / std::sqrt(2.0)));
    return res;
}

double student_t_two_sided(double t, double dof) {
    if (t == 0.0) return 1.0;
    const boost::math::students_t dist(dof);
    return std::min(1.0, 2.0 * boost::math::cdf(boost::math::complement(dist, std::abs(t))));
}

TTestResult paired_t_test(std::span<const double> before, std::span<const double> after) {
    require_same_length(before, after);
    const std::size_t n = before.size();
    if (n < 2) throw Error(ErrorCode::TooFewPairs, fmt::format("{} pairs, need at least 2", n));
    std::vector<double> d(n);
    for (std::size_t i = 0; i < n; ++i) d[i] = after[i] - before[i];
    if (std::all_of(d.begin(), d.end(), [&](double v) { return v == d[0]; }))
        throw Error(ErrorCode::ZeroVariance, "all paired differences are equal");

    const double nn = static_cast<double>(n);
    const double mean = std::accumulate(d.begin(), d.end(), 0.0) / nn;
    double ss = 0.0;
    for (double v : d) ss += (v - mean) * (v - mean);
    const double sd = std::sqrt(ss / (nn - 1.0));

    TTestResult res;
    res.mean_difference = mean;
    res.dof = n - 1;
    res.t = mean / (sd / std::sqrt(nn));
    res.p_value = student_t_two_sided(res.t, nn - 1.0);
    return res;
}

}  // namespace facemorph
