#include "popdyn/homogeneous.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace popdyn {

namespace {

void check_riccati(const RiccatiParams& p) {
    if (!(p.b >= 0.0) || !(p.a >= 0.0) || !std::isfinite(p.alpha))
        throw std::invalid_argument("riccati parameters need b >= 0, a >= 0, finite alpha");
    if (p.a == 0.0)
        throw std::invalid_argument("degenerate Riccati; use linear_solve with effective rates");
}

} // namespace

double linear_solve(double b_plus, double b_minus, double rho0, double t) {
    if (!(b_plus >= 0.0) || !(b_minus >= 0.0) || !(rho0 >= 0.0) || !(t >= 0.0))
        throw std::invalid_argument("linear_solve arguments must be nonnegative");
    if (b_minus == 0.0) return rho0 + b_plus * t;
    const double decay = std::exp(-b_minus * t);
    // -expm1 keeps (1 - e^{-b t})/b accurate for tiny b_minus * t.
    return rho0 * decay + (-std::expm1(-b_minus * t)) * (b_plus / b_minus);
}

RiccatiSolution riccati_derived(const RiccatiParams& p) {
    check_riccati(p);
    const double disc = p.alpha * p.alpha + 4.0 * p.a * p.b;
    const double omega = std::sqrt(disc);
    RiccatiSolution s;
    s.omega = omega;
    s.lambda_plus = (p.alpha + omega) / (2.0 * p.a);
    s.lambda_minus = (p.alpha - omega) / (2.0 * p.a);
    const double fourab = 4.0 * p.a * p.b;
    if (p.alpha >= 0.0) {
        const double root = p.alpha + omega;
        s.delta = root == 0.0 ? 0.0 : fourab / (root * root);
    } else {
        // alpha + omega loses digits when alpha < 0; use the conjugate
        // identity (alpha + omega)(omega - alpha) = 4ab.
        const double conj = omega - p.alpha;
        s.delta = fourab == 0.0 ? std::numeric_limits<double>::infinity()
                                : (conj * conj) / fourab;
    }
    return s;
}

double riccati_solve(const RiccatiParams& p, double rho0, double t) {
    check_riccati(p);
    if (!(rho0 >= 0.0) || !(t >= 0.0))
        throw std::invalid_argument("riccati_solve needs rho0 >= 0 and t >= 0");
    const RiccatiSolution s = riccati_derived(p);
    if (s.omega == 0.0) {
        // b = 0 and alpha = 0: pure competition decay.
        return rho0 / (1.0 + p.a * rho0 * t);
    }
    const double e = std::exp(-s.omega * t);
    // lambda_plus * delta == -lambda_minus, which keeps the numerator
    // finite in the b = 0, alpha < 0 case where delta alone diverges.
    const double num =
        s.lambda_plus * (rho0 - s.lambda_minus) + s.lambda_minus * (s.lambda_plus - rho0) * e;
    const double den = (rho0 - s.lambda_minus) + (s.lambda_plus - rho0) * e;
    if (std::abs(den) < 1e-30) throw std::runtime_error("Riccati pole");
    return num / den;
}

} // namespace popdyn
