#include "popdyn/occupation.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace popdyn {

namespace {

constexpr int kExactArithmeticLimit = 200; // exact rationals up to here
constexpr int kCombinatoricsCap = 5000;
constexpr double kAnalyticDeficit = 1e-10;

void check_cap(int n) {
    if (n < 0) throw std::invalid_argument("order n must be >= 0");
    if (n > kCombinatoricsCap)
        throw std::invalid_argument("order n exceeds the practical cap " +
                                    std::to_string(kCombinatoricsCap));
}

void check_vessel(const Vessel& v) {
    if (!(v.volume > 0.0) || !std::isfinite(v.volume))
        throw std::invalid_argument("vessel volume must be positive and finite");
}

// Rows of Pascal's triangle, grown on demand (per call, no shared state).
struct BinomialTable {
    std::vector<std::vector<BigNat>> rows{{BigNat(1)}};
    const std::vector<BigNat>& row(std::size_t n) {
        while (rows.size() <= n) {
            const auto& prev = rows.back();
            std::vector<BigNat> next(prev.size() + 1, BigNat(1));
            for (std::size_t k = 1; k < prev.size(); ++k) next[k] = prev[k - 1] + prev[k];
            rows.push_back(std::move(next));
        }
        return rows[n];
    }
};

// T_0..T_n by the binomial recurrence.
std::vector<BigRat> touchard_sequence(int n, const BigRat& b) {
    BinomialTable binom;
    std::vector<BigRat> t(static_cast<std::size_t>(n) + 1);
    t[0] = 1;
    for (int m = 0; m < n; ++m) {
        const auto& c = binom.row(static_cast<std::size_t>(m));
        BigRat acc = 0;
        for (int k = 0; k <= m; ++k) acc += BigRat(c[static_cast<std::size_t>(k)]) * t[static_cast<std::size_t>(k)];
        t[static_cast<std::size_t>(m) + 1] = b * acc;
    }
    return t;
}

// T_n by the Stirling-subset sum, reusing a triangle grown row by row.
std::vector<BigRat> touchard_sequence_stirling(int n, const BigRat& b) {
    std::vector<BigRat> out(static_cast<std::size_t>(n) + 1);
    out[0] = 1;
    std::vector<BigNat> row{BigNat(1)}; // S(0, 0)
    for (int m = 1; m <= n; ++m) {
        std::vector<BigNat> next(static_cast<std::size_t>(m) + 1, BigNat(0));
        for (int k = 1; k <= m; ++k) {
            // S(m, k) = k S(m-1, k) + S(m-1, k-1)
            BigNat v = row[static_cast<std::size_t>(k) - 1];
            if (k < m) v += BigNat(k) * row[static_cast<std::size_t>(k)];
            next[static_cast<std::size_t>(k)] = std::move(v);
        }
        row = std::move(next);
        BigRat acc = 0;
        BigRat bk = 1;
        for (int k = 1; k <= m; ++k) {
            bk *= b;
            acc += BigRat(row[static_cast<std::size_t>(k)]) * bk;
        }
        out[static_cast<std::size_t>(m)] = std::move(acc);
    }
    return out;
}

std::vector<BigFloat> touchard_sequence_float(int n, const BigFloat& b) {
    BinomialTable binom;
    std::vector<BigFloat> t(static_cast<std::size_t>(n) + 1);
    t[0] = 1;
    for (int m = 0; m < n; ++m) {
        const auto& c = binom.row(static_cast<std::size_t>(m));
        BigFloat acc = 0;
        for (int k = 0; k <= m; ++k)
            acc += BigFloat(c[static_cast<std::size_t>(k)]) * t[static_cast<std::size_t>(k)];
        t[static_cast<std::size_t>(m) + 1] = b * acc;
    }
    return t;
}

} // namespace

double OccupationSpectrum::mean() const { return factorial_moment(1); }

double OccupationSpectrum::variance() const {
    const double m = mean();
    return factorial_moment(2) + m - m * m;
}

double OccupationSpectrum::factorial_moment(int k) const {
    if (k < 0) throw std::invalid_argument("factorial moment order must be >= 0");
    double acc = 0.0;
    for (std::size_t n = 0; n < probs.size(); ++n) {
        double f = 1.0;
        for (int j = 0; j < k; ++j) f *= static_cast<double>(n) - j;
        if (f > 0.0) acc += f * probs[n];
    }
    return acc;
}

double total_variation_distance(const OccupationSpectrum& a, const OccupationSpectrum& b) {
    const std::size_t n = std::max(a.probs.size(), b.probs.size());
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double pa = i < a.probs.size() ? a.probs[i] : 0.0;
        const double pb = i < b.probs.size() ? b.probs[i] : 0.0;
        acc += std::abs(pa - pb);
    }
    // Unassigned analytic tail mass counts as discrepancy at the far end.
    acc += a.mass_deficit + b.mass_deficit;
    return 0.5 * acc;
}

double poisson_occupation_log(double mean, long long n) {
    if (!(mean >= 0.0) || !std::isfinite(mean))
        throw std::invalid_argument("poisson mean must be >= 0 and finite");
    if (n < 0) throw std::invalid_argument("occupation number must be >= 0");
    if (mean == 0.0)
        return n == 0 ? 0.0 : -std::numeric_limits<double>::infinity();
    return sub_poissonian_bound_log(mean, n) - mean;
}

double poisson_occupation(double mean, long long n) {
    return std::exp(poisson_occupation_log(mean, n));
}

OccupationSpectrum poisson_spectrum(double mean) {
    if (!(mean >= 0.0) || !std::isfinite(mean))
        throw std::invalid_argument("poisson mean must be >= 0 and finite");
    OccupationSpectrum s;
    s.provenance = SpectrumProvenance::PoissonAnalytic;
    long double p = std::exp(static_cast<long double>(-mean));
    long double cum = 0.0;
    long long n = 0;
    for (;;) {
        s.probs.push_back(static_cast<double>(p));
        cum += p;
        if (1.0L - cum <= kAnalyticDeficit && n >= static_cast<long long>(mean)) break;
        if (n > 2000000) throw std::runtime_error("poisson spectrum truncation ran away");
        ++n;
        p *= mean / static_cast<long double>(n);
    }
    s.truncation_n = static_cast<int>(s.probs.size()) - 1;
    s.mass_deficit = std::max(0.0, static_cast<double>(1.0L - cum));
    return s;
}

double poisson_cluster_expectation(double mean, int k) {
    if (!(mean >= 0.0)) throw std::invalid_argument("mean must be >= 0");
    if (k < 1) throw std::invalid_argument("cluster order k must be >= 1");
    return std::pow(mean, k);
}

double sub_poissonian_bound_log(double kappa_volume, long long n) {
    if (!(kappa_volume > 0.0) || !std::isfinite(kappa_volume))
        throw std::invalid_argument("kappa * |Lambda| must be > 0 and finite");
    if (n < 0) throw std::invalid_argument("occupation number must be >= 0");
    return static_cast<double>(n) * std::log(kappa_volume) -
           std::lgamma(static_cast<double>(n) + 1.0);
}

double sub_poissonian_bound(double kappa, const Vessel& vessel, long long n) {
    check_vessel(vessel);
    if (!(kappa > 0.0)) throw std::invalid_argument("kappa must be > 0");
    return std::exp(sub_poissonian_bound_log(kappa * vessel.volume, n));
}

RuelleReport ruelle_check(const std::vector<std::pair<int, double>>& samples, double kappa) {
    if (!(kappa > 0.0)) throw std::invalid_argument("kappa must be > 0");
    RuelleReport report;
    report.kappa = kappa;
    for (const auto& [k, value] : samples) {
        if (k < 1) throw std::invalid_argument("correlation order must be >= 1");
        if (value < 0.0) {
            report.violations.push_back({k, value, 0.0});
            continue;
        }
        const double bound = std::pow(kappa, k);
        if (value > bound) report.violations.push_back({k, value, bound});
    }
    return report;
}

BigNat bell_number(int n) {
    check_cap(n);
    // Bell triangle, two rows at a time: row m starts with B_m.
    std::vector<BigNat> row{BigNat(1)};
    for (int m = 1; m <= n; ++m) {
        std::vector<BigNat> next;
        next.reserve(row.size() + 1);
        next.push_back(row.back());
        for (const BigNat& v : row) next.push_back(next.back() + v);
        row = std::move(next);
    }
    return row.front();
}

BigRat touchard(int n, const BigRat& b) {
    check_cap(n);
    if (!(b > 0)) throw std::invalid_argument("touchard argument b must be > 0");
    auto by_recurrence = touchard_sequence(n, b);
    if (n <= kExactArithmeticLimit) {
        auto by_stirling = touchard_sequence_stirling(n, b);
        for (int m = 0; m <= n; ++m)
            if (by_recurrence[static_cast<std::size_t>(m)] != by_stirling[static_cast<std::size_t>(m)])
                throw std::logic_error("touchard dual computation disagrees at order " +
                                       std::to_string(m));
    }
    return by_recurrence.back();
}

double touchard_real(int n, double b) {
    check_cap(n);
    if (!(b > 0.0)) throw std::invalid_argument("touchard argument b must be > 0");
    return static_cast<double>(touchard_sequence_float(n, BigFloat(b)).back());
}

CoxConstants cox_constants(double kappa, const Vessel& vessel) {
    check_vessel(vessel);
    if (!(kappa > 0.0)) throw std::invalid_argument("kappa must be > 0");
    const double kv = kappa * vessel.volume;
    const double einv = std::exp(-1.0);
    return {std::exp(-kv * (1.0 - einv)), kv * einv};
}

OccupationSpectrum cox_occupation(double kappa, const Vessel& vessel, int n_max) {
    const CoxConstants cc = cox_constants(kappa, vessel);
    if (n_max < 0) throw std::invalid_argument("n_max must be >= 0");

    OccupationSpectrum s;
    s.provenance = SpectrumProvenance::CoxAnalytic;

    const BigRat b_exact(cc.b_vessel); // exact binary value of the double
    const BigFloat a_hp = exp(BigFloat(-kappa * vessel.volume) +
                              BigFloat(cc.b_vessel)); // a_L = exp(-kv + b_L)

    BinomialTable binom;
    std::vector<BigRat> t_exact{BigRat(1)};
    std::vector<BigFloat> t_float; // continuation past the exact-arithmetic range

    BigFloat factorial(1);
    BigFloat mass(0);
    int n = 0;
    for (;;) {
        BigFloat tn;
        if (n <= kExactArithmeticLimit) {
            if (static_cast<int>(t_exact.size()) <= n) {
                const auto& c = binom.row(static_cast<std::size_t>(n) - 1);
                BigRat acc = 0;
                for (std::size_t k = 0; k < t_exact.size(); ++k) acc += BigRat(c[k]) * t_exact[k];
                t_exact.push_back(b_exact * acc);
            }
            tn = BigFloat(t_exact[static_cast<std::size_t>(n)]);
            if (n == kExactArithmeticLimit)
                for (const auto& q : t_exact) t_float.push_back(BigFloat(q));
        } else {
            const auto& c = binom.row(static_cast<std::size_t>(n) - 1);
            BigFloat acc = 0;
            for (std::size_t k = 0; k < t_float.size(); ++k) acc += BigFloat(c[k]) * t_float[k];
            t_float.push_back(BigFloat(cc.b_vessel) * acc);
            tn = t_float.back();
        }

        if (n > 0) factorial *= n;
        const BigFloat p = a_hp * tn / factorial;
        s.probs.push_back(static_cast<double>(p));
        mass += p;

        const double deficit = static_cast<double>(1 - mass);
        // Also push the n^2-weighted tail below the moment tolerances so
        // mean and variance of the truncated spectrum are 1e-8 accurate.
        const double moment_tail =
            static_cast<double>(p) * static_cast<double>(n + 2) * static_cast<double>(n + 2);
        if (n >= n_max && deficit <= kAnalyticDeficit && moment_tail <= 1e-11) {
            s.mass_deficit = std::max(0.0, deficit);
            break;
        }
        ++n;
        if (n > kCombinatoricsCap)
            throw std::runtime_error("cox occupation truncation exceeded the practical cap");
    }
    s.truncation_n = static_cast<int>(s.probs.size()) - 1;
    return s;
}

double heavy_tail_lower_bound_log(double kappa, const Vessel& vessel, int n) {
    const CoxConstants cc = cox_constants(kappa, vessel);
    if (cc.b_vessel < 1.0)
        throw std::invalid_argument("bound requires b_Lambda >= 1, enlarge the vessel");
    if (n < 2) throw std::invalid_argument("heavy-tail bound needs n >= 2");
    check_cap(n);
    BigNat fact = 1;
    for (int k = 2; k <= n; ++k) fact *= k;
    const BigFloat lg = log(BigFloat(bell_number(n))) + log(BigFloat(cc.b_vessel)) +
                        (BigFloat(-kappa * vessel.volume) + BigFloat(cc.b_vessel)) -
                        log(BigFloat(fact));
    return static_cast<double>(lg);
}

double heavy_tail_lower_bound(double kappa, const Vessel& vessel, int n) {
    return std::exp(heavy_tail_lower_bound_log(kappa, vessel, n));
}

int cox_sample_count(double kappa_volume, std::mt19937_64& rng) {
    if (!(kappa_volume > 0.0)) throw std::invalid_argument("kappa * |Lambda| must be > 0");
    std::poisson_distribution<int> parents(kappa_volume);
    std::poisson_distribution<int> offspring(1.0);
    const int m = parents(rng);
    int total = 0;
    for (int i = 0; i < m; ++i) total += offspring(rng);
    return total;
}

double cluster_expectation_from_correlations(
    const std::function<double(std::span<const double>)>& rho_k, const Vessel& vessel,
    int k, int nodes_per_axis) {
    check_vessel(vessel);
    if (k < 1 || k > 3)
        throw std::invalid_argument("cluster order k must be in [1, 3] (tensor quadrature cost)");
    if (nodes_per_axis < 1) throw std::invalid_argument("need at least one quadrature node");
    const double h = vessel.volume / nodes_per_axis;
    auto node = [&](int i) { return (i + 0.5) * h; };

    double acc = 0.0;
    double xs[3];
    if (k == 1) {
        for (int i = 0; i < nodes_per_axis; ++i) {
            xs[0] = node(i);
            acc += rho_k(std::span<const double>(xs, 1));
        }
        return acc * h;
    }
    if (k == 2) {
        for (int i = 0; i < nodes_per_axis; ++i) {
            xs[0] = node(i);
            for (int j = 0; j < nodes_per_axis; ++j) {
                xs[1] = node(j);
                acc += rho_k(std::span<const double>(xs, 2));
            }
        }
        return acc * h * h;
    }
    for (int i = 0; i < nodes_per_axis; ++i) {
        xs[0] = node(i);
        for (int j = 0; j < nodes_per_axis; ++j) {
            xs[1] = node(j);
            for (int l = 0; l < nodes_per_axis; ++l) {
                xs[2] = node(l);
                acc += rho_k(std::span<const double>(xs, 3));
            }
        }
    }
    return acc * h * h * h;
}

} // namespace popdyn
