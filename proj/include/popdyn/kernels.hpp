#pragma once

#include "popdyn/grid.hpp"

#include <string>
#include <string_view>
#include <vector>

namespace popdyn {

enum class KernelKind { Zero, Constant, Gaussian, PeriodicGaussian, ShiftedGaussian };

/// Closed-form rate/kernel function. Gaussian variants carry mass c and
/// width r; the base shape is G(x; c, r) = c / (r sqrt(2 pi)) * exp(-x^2 / (2 r^2)).
/// PeriodicGaussian is the lattice sum of G over shifts of `period`;
/// ShiftedGaussian is the symmetric half-mass pair at +-s.
struct KernelSpec {
    KernelKind kind = KernelKind::Zero;
    double c = 0.0;      // mass (Gaussian family) or value (Constant)
    double r = 1.0;      // width, > 0 for Gaussian variants
    double s = 0.0;      // shift
    double period = 0.0; // PeriodicGaussian only, > 0
};

KernelSpec zero_kernel();
KernelSpec constant_kernel(double v);
KernelSpec gaussian_kernel(double c, double r);
KernelSpec periodic_gaussian_kernel(double c, double r, double s, double period);
KernelSpec shifted_gaussian_kernel(double c, double r, double s);

inline bool is_zero_kernel(const KernelSpec& k) {
    return k.kind == KernelKind::Zero || k.c == 0.0;
}

double kernel_eval(const KernelSpec& spec, double x);

/// Integral over the whole line (Gaussian family: c; one period for the
/// periodic variant; 0 for Zero). Throws for Constant, whose integral
/// needs a domain length.
double kernel_analytic_integral(const KernelSpec& spec);

/// Radius beyond which the kernel is below 1e-14 of its peak.
/// Infinite for Constant; one period for PeriodicGaussian.
double kernel_support_radius(const KernelSpec& spec);

/// Samples the kernel at grid nodes. With `centered` set (convolution
/// kernels), node i holds the value at the signed torus displacement
/// (x_i for i <= N/2, x_i - L beyond), preserving evenness on the torus.
/// A kernel wider than L/2 at the truncation level appends an
/// aliasing-risk note to `warnings` (when given) instead of failing.
Field discretize(const KernelSpec& spec, const Grid1D& grid, bool centered,
                 std::vector<std::string>* warnings = nullptr);

/// Canonical text forms: zero, const(v), gaussian(c,r), pgaussian(c,r,s),
/// sgaussian(c,r,s). The periodic variant's period is contextual
/// (scenario domain length) and not part of the text form.
std::string format_kernel(const KernelSpec& spec);
KernelSpec parse_kernel(std::string_view text, double period_for_periodic);

} // namespace popdyn
