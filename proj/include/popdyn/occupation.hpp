#pragma once

#include <boost/multiprecision/cpp_bin_float.hpp>
#include <boost/multiprecision/cpp_int.hpp>

#include <functional>
#include <random>
#include <span>
#include <utility>
#include <vector>

namespace popdyn {

/// Bounded counting region; |Lambda| in length units (d = 1).
struct Vessel {
    double volume = 1.0;
};

using BigNat = boost::multiprecision::cpp_int;
using BigRat = boost::multiprecision::cpp_rational;
using BigFloat = boost::multiprecision::cpp_bin_float_100;

enum class SpectrumProvenance { PoissonAnalytic, CoxAnalytic, Empirical };

/// Probability vector {p(n, Lambda)} with factorial-moment diagnostics.
struct OccupationSpectrum {
    std::vector<double> probs;
    SpectrumProvenance provenance = SpectrumProvenance::Empirical;
    int truncation_n = 0;
    double mass_deficit = 0.0;

    double mean() const;
    double variance() const;
    /// E[N (N-1) ... (N-k+1)].
    double factorial_moment(int k) const;
};

double total_variation_distance(const OccupationSpectrum& a, const OccupationSpectrum& b);

// --- Poisson state ---------------------------------------------------------

double poisson_occupation_log(double mean, long long n);
double poisson_occupation(double mean, long long n);
OccupationSpectrum poisson_spectrum(double mean);
double poisson_cluster_expectation(double mean, int k);

// --- Sub-Poissonian bounds -------------------------------------------------

double sub_poissonian_bound_log(double kappa_volume, long long n);
double sub_poissonian_bound(double kappa, const Vessel& vessel, long long n);

struct RuelleViolation {
    int order;
    double value;
    double bound; // the violated limit: 0 below, kappa^k above
};

struct RuelleReport {
    double kappa;
    std::vector<RuelleViolation> violations;
    bool pass() const { return violations.empty(); }
};

RuelleReport ruelle_check(const std::vector<std::pair<int, double>>& samples, double kappa);

// --- Exact combinatorics ---------------------------------------------------

/// Exact Bell number via the Bell-triangle recurrence. n <= 5000.
BigNat bell_number(int n);

/// Exact Touchard polynomial value. Computed by the binomial recurrence
/// T_{m+1}(b) = b sum_k C(m,k) T_k(b); for n <= 200 the Stirling-subset
/// sum is computed as well and both are asserted equal. n <= 5000.
BigRat touchard(int n, const BigRat& b);

/// High-precision float route (quad-ish precision), n <= 5000.
double touchard_real(int n, double b);

// --- Cox cluster (heavy-tail) state ----------------------------------------

struct CoxConstants {
    double a_vessel; // exp(-kappa |L| (1 - 1/e))
    double b_vessel; // kappa |L| / e
};

CoxConstants cox_constants(double kappa, const Vessel& vessel);

/// Occupation spectrum of the Cox cluster state: p(n) = a_L T_n(b_L) / n!,
/// Touchard values in exact rational arithmetic (high-precision floats past
/// n = 200). Extends past n_max until the mass deficit is <= 1e-10.
OccupationSpectrum cox_occupation(double kappa, const Vessel& vessel, int n_max);

/// Lower bound a_L b_L B_n / n! for the Cox occupation tail; requires
/// b_L >= 1 (enlarge the vessel otherwise).
double heavy_tail_lower_bound(double kappa, const Vessel& vessel, int n);
double heavy_tail_lower_bound_log(double kappa, const Vessel& vessel, int n);

/// Compound draw matching the Cox occupation law: parent count
/// M ~ Poisson(kappa |L|), N = sum of M independent Poisson(1) counts.
int cox_sample_count(double kappa_volume, std::mt19937_64& rng);

// --- Correlation-function integrals ----------------------------------------

/// Iterated midpoint-rule integral of a k-argument correlation function
/// over Lambda^k (Lambda = [0, volume]); k <= 3.
double cluster_expectation_from_correlations(
    const std::function<double(std::span<const double>)>& rho_k, const Vessel& vessel,
    int k, int nodes_per_axis);

} // namespace popdyn
