#include "facemorph/stats.hpp"
#include "oracles.hpp"
#include "test_util.hpp"

#include <doctest.h>

#include <cmath>
#include <vector>

using namespace facemorph;
using testutil::error_code;

namespace {

std::vector<double> shifted(const std::vector<double>& v, const std::vector<double>& d) {
    std::vector<double> out(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) out[i] = v[i] + d[i];
    return out;
}

// Normal-approximation p computed from first principles for comparison above n = 25.
double normal_approx_oracle(const std::vector<double>& before, const std::vector<double>& after) {
    std::vector<double> d;
    for (std::size_t i = 0; i < before.size(); ++i)
        if (after[i] != before[i]) d.push_back(after[i] - before[i]);
    const double n = static_cast<double>(d.size());
    double w = 0.0, tie = 0.0;
    for (std::size_t i = 0; i < d.size(); ++i) {
        double less = 0, eq = 0;
        for (double x : d) {
            if (std::abs(x) < std::abs(d[i])) ++less;
            else if (std::abs(x) == std::abs(d[i])) ++eq;
        }
        if (d[i] > 0) w += less + (eq + 1) / 2;
        tie += eq * eq - 1;  // t members of a tie group sum to t^3 - t
    }
    const double mean = n * (n + 1) / 4;
    const double var = n * (n + 1) * (2 * n + 1) / 24 - tie / 48;
    const double z = (std::abs(w - mean) - 0.5) / std::sqrt(var);
    return std::min(1.0, std::erfc(std::max(z, 0.0) / std::sqrt(2.0)));
}

}  // namespace

TEST_CASE("equal shifts give the smallest exact p") {
    const std::vector<double> b{1, 2, 3, 4, 5, 6};
    const auto r = wilcoxon_signed_rank(b, shifted(b, std::vector<double>(6, 10.0)));
    CHECK(r.exact);
    CHECK(r.n_used == 6);
    CHECK(r.p_value == doctest::Approx(0.03125).epsilon(1e-15));
    CHECK(r.w_plus == 21.0);
}

TEST_CASE("balanced antisymmetric differences give p = 1") {
    const std::vector<double> b{0, 0, 0, 0, 0, 0};
    const std::vector<double> a{1, -1, 2, -2, 3, -3};
    const auto r = wilcoxon_signed_rank(b, a);
    CHECK(r.p_value == 1.0);
}

TEST_CASE("wilcoxon errors") {
    const std::vector<double> b{1, 2, 3, 4, 5, 6};
    CHECK(error_code([&] { wilcoxon_signed_rank(b, b); }) == ErrorCode::AllZeroDifferences);
    const std::vector<double> shorter{1, 2, 3};
    CHECK(error_code([&] { wilcoxon_signed_rank(b, shorter); }) == ErrorCode::DimensionMismatch);
    // Only four nonzero differences remain after dropping zeros.
    const std::vector<double> a{2, 3, 4, 5, 5, 6};
    CHECK(error_code([&] { wilcoxon_signed_rank(b, a); }) == ErrorCode::TooFewPairs);
}

TEST_CASE("zero differences are dropped and counted") {
    const std::vector<double> b{1, 2, 3, 4, 5, 6, 7};
    const std::vector<double> a{2, 3, 4, 5, 6, 6, 7};
    const auto r = wilcoxon_signed_rank(b, a);
    CHECK(r.n_used == 5);
    CHECK(r.n_dropped == 2);
    CHECK(r.p_value == doctest::Approx(oracle::wilcoxon_enumerate(b, a)).epsilon(1e-12));
}

TEST_CASE("exact p equals full enumeration, with and without ties") {
    SplitMix64 rng(777);
    for (int t = 0; t < 100; ++t) {
        const std::size_t n = 5 + rng.below(8);
        std::vector<double> b(n), a(n);
        const bool ties = t % 2 == 0;
        for (std::size_t i = 0; i < n; ++i) {
            b[i] = rng.normal();
            double d = rng.normal() + 0.3;
            if (ties) d = std::round(d * 2) / 2;
            if (d == 0.0) d = 0.5;
            a[i] = b[i] + d;
        }
        const auto r = wilcoxon_signed_rank(b, a);
        const double want = oracle::wilcoxon_enumerate(b, a);
        CHECK(r.exact);
        CHECK(std::abs(r.p_value - want) < 1e-12);
    }
}

TEST_CASE("exact path up to n = 25") {
    SplitMix64 rng(8);
    std::vector<double> b(25), a(25);
    for (std::size_t i = 0; i < 25; ++i) {
        b[i] = rng.normal();
        a[i] = b[i] + rng.normal() + 0.2;
    }
    const auto r = wilcoxon_signed_rank(b, a);
    CHECK(r.exact);
    CHECK(r.p_value >= 0.0);
    CHECK(r.p_value <= 1.0);
}

TEST_CASE("normal approximation above 25 pairs") {
    SplitMix64 rng(88);
    for (int t = 0; t < 20; ++t) {
        const std::size_t n = 26 + rng.below(300);
        std::vector<double> b(n), a(n);
        for (std::size_t i = 0; i < n; ++i) {
            b[i] = rng.normal();
            a[i] = b[i] + std::round((rng.normal() + 0.1 * t) * 4) / 4;
        }
        bool any = false;
        for (std::size_t i = 0; i < n; ++i) any = any || a[i] != b[i];
        if (!any) continue;
        const auto r = wilcoxon_signed_rank(b, a);
        CHECK_FALSE(r.exact);
        CHECK(r.p_value == doctest::Approx(normal_approx_oracle(b, a)).epsilon(1e-9));
    }
}

TEST_CASE("p-values stay in [0, 1] and respond to strong shifts") {
    SplitMix64 rng(21);
    std::vector<double> b(366), a(366);
    for (std::size_t i = 0; i < b.size(); ++i) {
        b[i] = rng.normal();
        a[i] = b[i] - 0.5 + 0.2 * rng.normal();
    }
    const auto w = wilcoxon_signed_rank(b, a);
    CHECK(w.p_value < 1e-10);
    const auto t = paired_t_test(b, a);
    CHECK(t.p_value < 1e-10);
    CHECK(t.t < 0.0);
}

TEST_CASE("paired t examples") {
    const std::vector<double> b{1, 2, 3, 4};
    CHECK(error_code([&] { paired_t_test(b, shifted(b, {2, 2, 2, 2})); }) == ErrorCode::ZeroVariance);
    const auto r = paired_t_test(b, shifted(b, {1, -1, 2, -2}));
    CHECK(r.t == 0.0);
    CHECK(r.p_value == 1.0);
    CHECK(r.dof == 3);
    const std::vector<double> one{1};
    CHECK(error_code([&] { paired_t_test(one, one); }) == ErrorCode::TooFewPairs);
    CHECK(error_code([&] { paired_t_test(b, one); }) == ErrorCode::DimensionMismatch);
}

TEST_CASE("paired t statistic by hand") {
    // d = (1, 2, 3, 6): mean 3, sample variance (4+1+0+9)/3 = 14/3, t = 3 / sqrt(14/12).
    const std::vector<double> b{0, 0, 0, 0};
    const std::vector<double> a{1, 2, 3, 6};
    const auto r = paired_t_test(b, a);
    CHECK(r.mean_difference == 3.0);
    CHECK(r.t == doctest::Approx(3.0 / std::sqrt(14.0 / 12.0)).epsilon(1e-14));
    CHECK(std::abs(r.p_value - oracle::t_two_sided_quadrature(r.t, 3.0)) < 1e-6);
}

TEST_CASE("t tail matches quadrature across degrees of freedom") {
    for (double nu : {1.0, 2.0, 3.0, 5.0, 10.0, 29.0, 100.0, 365.0}) {
        for (double t : {0.0, 0.1, 0.5, 1.0, 1.96, 2.5, 4.0, 8.0, -3.0}) {
            CHECK(std::abs(student_t_two_sided(t, nu) - oracle::t_two_sided_quadrature(t, nu)) < 1e-6);
        }
    }
}

TEST_CASE("paired t p-values match quadrature on random data") {
    SplitMix64 rng(1001);
    for (int k = 0; k < 50; ++k) {
        const std::size_t n = 2 + rng.below(40);
        std::vector<double> b(n), a(n);
        for (std::size_t i = 0; i < n; ++i) {
            b[i] = rng.normal();
            a[i] = b[i] + rng.normal() * 0.5 + 0.2;
        }
        const auto r = paired_t_test(b, a);
        CHECK(std::abs(r.p_value - oracle::t_two_sided_quadrature(r.t, static_cast<double>(n - 1))) < 1e-6);
    }
}
