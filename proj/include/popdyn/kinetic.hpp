#pragma once

#include "popdyn/grid.hpp"
#include "popdyn/kernels.hpp"

#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace popdyn {

/// The four model functions: interaction kernels a± (convolved against
/// the density) and environment rates b± (pointwise).
struct RateKernels {
    KernelSpec a_plus;
    KernelSpec a_minus;
    KernelSpec b_plus;
    KernelSpec b_minus;
};

/// Grid samples of the model functions: rates at nodes, kernels on the
/// centered torus displacement.
struct DiscretizedRates {
    Field b_plus;
    Field b_minus;
    Field a_plus;
    Field a_minus;
};

DiscretizedRates discretize_rates(const Grid1D& grid, const RateKernels& rates,
                                  std::vector<std::string>* warnings = nullptr);

/// Right-hand side of the nonlocal density equation
///   d/dt rho = b+ + a+ * rho - (b- + a- * rho) rho
/// with precomputed kernel spectra. One instance per integration;
/// not thread-safe across concurrent callers.
class KineticOperator {
  public:
    KineticOperator(const Grid1D& grid, const RateKernels& rates,
                    std::vector<std::string>* warnings = nullptr);

    const Grid1D& grid() const { return grid_; }
    const DiscretizedRates& rates() const { return disc_; }

    void rhs(const Field& rho, Field& out);
    Field rhs(const Field& rho);
    double rhs_sup_norm(const Field& rho);

    /// dt * (largest per-capita loss rate + kernel gain rate) for the
    /// fixed-step stability guard.
    double growth_scale(const Field& rho);

  private:
    Grid1D grid_;
    DiscretizedRates disc_;
    SpectralConvolver conv_;
    std::vector<std::complex<double>> a_plus_spec_;
    std::vector<std::complex<double>> a_minus_spec_;
    Field conv_plus_;
    Field conv_minus_;
    double a_plus_mass_ = 0.0;
};

struct KineticProblem {
    Grid1D grid;
    RateKernels rates;
    KernelSpec rho0_spec;              // used unless rho0_field is set
    std::optional<Field> rho0_field;
    double t_end = 0.0;
    double dt = 1e-3;                  // fixed step; maximum step when adaptive
    bool adaptive = false;             // step-doubling error control
    double adaptive_tol = 1e-6;        // relative local tolerance per step
    double divergence_cap = 1e9;
    double steady_stop_tol = 0.0;      // > 0 enables early exit at snapshots
};

struct Trajectory {
    std::vector<double> times;
    std::vector<Field> snapshots;
    bool diverged = false;
    double blow_up_time = 0.0;
    std::optional<double> steady_time;
};

Field initial_density(const KineticProblem& prob);

/// Classic fourth-order one-step integration, fixed-step by default or
/// step-doubling adaptive when the problem requests it; snapshots land
/// exactly on the requested times (0 is always recorded first). Densities
/// beyond the divergence cap flag the trajectory instead of failing; NaN is
/// a hard error, as is negativity beyond the roundoff band (fixed-step runs
/// that leave the stability guard are in the divergence regime and are no
/// longer policed for negativity).
Trajectory integrate_kinetic(const KineticProblem& prob,
                             const std::vector<double>& snapshot_times);

/// First recorded snapshot whose rhs sup-norm is below tol * (1 + sup rho).
std::optional<std::pair<double, Field>> detect_steady_state(const Trajectory& traj,
                                                            KineticOperator& op,
                                                            double tol);

} // namespace popdyn
