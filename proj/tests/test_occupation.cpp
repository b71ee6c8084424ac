#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "popdyn/occupation.hpp"

#include <cmath>
#include <random>

using namespace popdyn;

namespace {

// Independent oracle: count set partitions of {1..n} by exhaustive
// enumeration (each element joins an existing block or opens a new one).
long long count_partitions(int element, int blocks, int n) {
    if (element == n) return 1;
    long long total = count_partitions(element + 1, blocks + 1, n); // new block
    return total + blocks * count_partitions(element + 1, blocks, n);
}

long long bell_brute_force(int n) { return n == 0 ? 1 : count_partitions(1, 1, n); }

} // namespace

TEST_CASE("poisson occupation closed forms") {
    CHECK(poisson_occupation(1.0, 0) == doctest::Approx(std::exp(-1.0)).epsilon(1e-14));
    CHECK(poisson_occupation(1.0, 2) ==
          doctest::Approx(std::exp(-1.0) / 2.0).epsilon(1e-14));
    CHECK(poisson_occupation(0.0, 0) == 1.0);
    CHECK(poisson_occupation(0.0, 1) == 0.0);
    CHECK(poisson_occupation(0.0, 7) == 0.0);
}

TEST_CASE("poisson occupation stays finite in log space through n = 1e5") {
    const double lp = poisson_occupation_log(50.0, 100000);
    CHECK(std::isfinite(lp));
    CHECK(lp < -1e5); // astronomically unlikely, but representable
}

TEST_CASE("poisson cluster expectations") {
    CHECK(poisson_cluster_expectation(2.0, 3) == doctest::Approx(8.0));
    CHECK(poisson_cluster_expectation(0.37, 1) == doctest::Approx(0.37));
    for (int k = 1; k <= 6; ++k) CHECK(poisson_cluster_expectation(1.0, k) == 1.0);
}

TEST_CASE("sub-poissonian bound values") {
    const Vessel unit{1.0};
    CHECK(sub_poissonian_bound(1.0, unit, 3) == doctest::Approx(1.0 / 6.0).epsilon(1e-14));
    CHECK(sub_poissonian_bound(1.0, unit, 0) == 1.0);
    CHECK(sub_poissonian_bound(2.0, unit, 3) ==
          doctest::Approx(4.0 / 3.0).epsilon(1e-14)); // bound, not a probability
}

TEST_CASE("poisson spectrum saturates the bound exactly up to the e^{-m} factor") {
    // Shared log-space construction makes the identity bitwise.
    const double mean = 3.7;
    for (long long n : {0LL, 1LL, 5LL, 20LL, 100LL})
        CHECK(poisson_occupation_log(mean, n) ==
              sub_poissonian_bound_log(mean, n) - mean);
}

TEST_CASE("ruelle check") {
    std::vector<std::pair<int, double>> samples;
    const double rho = 0.8, kappa = 1.0;
    for (int k = 1; k <= 6; ++k) samples.emplace_back(k, std::pow(rho, k));
    CHECK(ruelle_check(samples, kappa).pass());

    const auto neg = ruelle_check({{2, -0.1}}, 1.0);
    REQUIRE(neg.violations.size() == 1);
    CHECK(neg.violations[0].bound == 0.0);

    const auto over = ruelle_check({{2, 1.5}}, 1.0);
    REQUIRE(over.violations.size() == 1);
    CHECK(over.violations[0].bound == doctest::Approx(1.0));
}

TEST_CASE("bell numbers match brute-force partition enumeration") {
    const long long expected[] = {1, 1, 2, 5, 15, 52, 203, 877, 4140, 21147, 115975};
    for (int n = 0; n <= 10; ++n) {
        CHECK(bell_number(n) == BigNat(bell_brute_force(n)));
        CHECK(bell_number(n) == BigNat(expected[n]));
    }
    CHECK_THROWS_AS(bell_number(5001), std::invalid_argument);
}

TEST_CASE("touchard polynomial basics") {
    CHECK(touchard(0, BigRat(5, 2)) == BigRat(1));
    CHECK(touchard(2, BigRat(3)) == BigRat(12)); // b + b^2 at b = 3
    for (int n = 0; n <= 50; ++n) CHECK(touchard(n, BigRat(1)) == BigRat(bell_number(n)));
}

TEST_CASE("touchard dual computation agrees exactly for rationals up to n = 200") {
    // touchard() runs both the Stirling sum and the binomial recurrence and
    // throws on any mismatch; exercising a non-integer rational to n = 200
    // covers the exact-arithmetic claim.
    const BigRat b(7, 3);
    CHECK_NOTHROW(touchard(200, b));
    CHECK(touchard(3, b) == b + 3 * b * b + b * b * b);
}

TEST_CASE("touchard float route tracks the exact route") {
    for (int n : {5, 40, 120}) {
        const double exact = static_cast<double>(BigFloat(touchard(n, BigRat(0.37))));
        CHECK(touchard_real(n, 0.37) == doctest::Approx(exact).epsilon(1e-12));
    }
}

TEST_CASE("cox constants and first two occupation probabilities") {
    const Vessel unit{1.0};
    const CoxConstants cc = cox_constants(1.0, unit);
    const double einv = std::exp(-1.0);
    CHECK(cc.a_vessel == doctest::Approx(std::exp(-(1.0 - einv))).epsilon(1e-14));
    CHECK(cc.b_vessel == doctest::Approx(einv).epsilon(1e-15));

    const OccupationSpectrum s = cox_occupation(1.0, unit, 5);
    // Generating-function oracle at zeta = -1: p(0) = exp(kv (e^-1 - 1)).
    CHECK(s.probs[0] == doctest::Approx(std::exp(einv - 1.0)).epsilon(1e-13));
    CHECK(s.probs[0] == doctest::Approx(0.5314636054).epsilon(1e-9));
    CHECK(s.probs[1] == doctest::Approx(cc.a_vessel * cc.b_vessel).epsilon(1e-13));
    CHECK(s.probs[1] == doctest::Approx(0.1955145342).epsilon(1e-9));
    CHECK(s.provenance == SpectrumProvenance::CoxAnalytic);
}

TEST_CASE("cox spectrum mass, mean and over-dispersed variance") {
    for (double kv : {1.0, 2.0, 4.5}) {
        const Vessel v{kv}; // kappa = 1
        const OccupationSpectrum s = cox_occupation(1.0, v, 0);
        CHECK(s.mass_deficit >= 0.0);
        CHECK(s.mass_deficit <= 1e-10);
        double total = 0.0;
        for (double p : s.probs) {
            CHECK(p >= 0.0);
            total += p;
        }
        CHECK(total == doctest::Approx(1.0).epsilon(1e-10));
        CHECK(s.mean() == doctest::Approx(kv).epsilon(1e-8));
        CHECK(s.variance() == doctest::Approx(2.0 * kv).epsilon(1e-8));
    }
}

TEST_CASE("compound sampler matches the analytic spectrum (coarse check)") {
    const double kv = 1.5;
    const OccupationSpectrum analytic = cox_occupation(1.0, Vessel{kv}, 0);
    std::mt19937_64 rng(123);
    OccupationSpectrum empirical;
    empirical.provenance = SpectrumProvenance::Empirical;
    const int samples = 200000;
    for (int i = 0; i < samples; ++i) {
        const int n = cox_sample_count(kv, rng);
        if (empirical.probs.size() <= static_cast<std::size_t>(n))
            empirical.probs.resize(static_cast<std::size_t>(n) + 1, 0.0);
        empirical.probs[static_cast<std::size_t>(n)] += 1.0;
    }
    for (double& p : empirical.probs) p /= samples;
    CHECK(total_variation_distance(analytic, empirical) < 0.02);
}

TEST_CASE("heavy-tail lower bound sits below the cox probabilities") {
    const double kappa = 1.0;
    const Vessel v{std::exp(1.0)}; // b_vessel = 1 exactly up to rounding
    const OccupationSpectrum s = cox_occupation(kappa, v, 60);
    for (int n = 2; n <= 60; ++n)
        CHECK(s.probs[static_cast<std::size_t>(n)] >=
              heavy_tail_lower_bound(kappa, v, n) * (1.0 - 1e-12));
}

TEST_CASE("heavy-tail bound at b_vessel = 1: explicit small case") {
    const double kappa = 1.0;
    const Vessel v{std::exp(1.0)};
    const double expected = std::exp(-std::exp(1.0) * (1.0 - std::exp(-1.0))) *
                            cox_constants(kappa, v).b_vessel * 5.0 / 6.0;
    CHECK(heavy_tail_lower_bound(kappa, v, 3) == doctest::Approx(expected).epsilon(1e-10));
}

TEST_CASE("heavy-tail bound requires b_vessel >= 1") {
    CHECK_THROWS_WITH_AS(heavy_tail_lower_bound(1.0, Vessel{1.0}, 5),
                         doctest::Contains("enlarge the vessel"), std::invalid_argument);
}

TEST_CASE("tail asymptotic spot-check at n = 50") {
    const BigFloat lhs = BigFloat(bell_number(50)) / [] {
        BigFloat f(1);
        for (int k = 2; k <= 50; ++k) f *= k;
        return f;
    }();
    const BigFloat rhs = 1 / (sqrt(2 * boost::math::constants::pi<BigFloat>()) *
                              pow(log(BigFloat(50)), 50));
    CHECK(lhs >= rhs);
}

TEST_CASE("cluster expectation from correlations") {
    const Vessel v{2.0};
    // Constant product state: (rho |L|)^k.
    for (int k = 1; k <= 3; ++k) {
        const double rho = 1.4;
        const double got = cluster_expectation_from_correlations(
            [&](std::span<const double> xs) {
                double p = 1.0;
                for (std::size_t i = 0; i < xs.size(); ++i) p *= rho;
                return p;
            },
            v, k, 48);
        CHECK(got == doctest::Approx(std::pow(rho * v.volume, k)).epsilon(1e-10));
    }
    CHECK(cluster_expectation_from_correlations(
              [](std::span<const double>) { return 0.0; }, v, 2, 32) == 0.0);
    CHECK_THROWS_AS(cluster_expectation_from_correlations(
                        [](std::span<const double>) { return 1.0; }, v, 4, 8),
                    std::invalid_argument);
}

TEST_CASE("perturbed pair correlation against a direct double-sum oracle") {
    const Vessel v{2.0};
    const double rho = 1.1, eps = 0.25;
    auto g = [](double d) { return std::cos(1.3 * d); };
    auto rho2 = [&](std::span<const double> xs) {
        return rho * rho + eps * g(xs[0] - xs[1]);
    };
    const int m = 64;
    const double got = cluster_expectation_from_correlations(rho2, v, 2, m);

    // Brute-force midpoint double sum, written independently.
    const double h = v.volume / m;
    double acc = 0.0;
    for (int i = 0; i < m; ++i)
        for (int j = 0; j < m; ++j) {
            const double x = (i + 0.5) * h, y = (j + 0.5) * h;
            acc += rho * rho + eps * g(x - y);
        }
    acc *= h * h;
    CHECK(got == doctest::Approx(acc).epsilon(1e-13));
}

TEST_CASE("empirical spectrum bookkeeping") {
    OccupationSpectrum s;
    s.probs = {0.25, 0.5, 0.25};
    CHECK(s.mean() == doctest::Approx(1.0));
    CHECK(s.variance() == doctest::Approx(0.5));
    CHECK(s.factorial_moment(2) == doctest::Approx(0.5)); // only n=2 contributes
}
