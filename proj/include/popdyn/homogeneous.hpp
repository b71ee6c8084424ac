#pragma once

namespace popdyn {

/// Closed-form solution of the local linear model
/// d/dt rho = b_plus - b_minus * rho: exponential relaxation toward
/// b_plus/b_minus, or linear growth rho0 + b_plus*t when b_minus = 0.
double linear_solve(double b_plus, double b_minus, double rho0, double t);

/// Coefficients of the homogeneous quadratic ODE
/// d/dt rho = b + alpha*rho - a*rho^2.
struct RiccatiParams {
    double b = 0.0;     // immigration rate, >= 0
    double a = 0.0;     // competition integral, >= 0
    double alpha = 0.0; // net linear rate, any sign
};

struct RiccatiSolution {
    double lambda_plus;  // stable steady state
    double lambda_minus; // unstable (nonpositive) root
    double omega;        // relaxation rate sqrt(alpha^2 + 4ab)
    double delta;        // 4ab / (alpha + omega)^2; +inf when b = 0, alpha < 0
};

/// Derived constants of the closed-form solution. Requires a > 0.
RiccatiSolution riccati_derived(const RiccatiParams& p);

/// Closed-form trajectory value at time t from rho0 >= 0. Evaluated with
/// decaying exponentials only; regular in the degenerate b = 0 cases.
double riccati_solve(const RiccatiParams& p, double rho0, double t);

} // namespace popdyn
