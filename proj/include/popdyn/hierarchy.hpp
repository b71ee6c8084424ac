#pragma once

#include "popdyn/kinetic.hpp"

#include <vector>

namespace popdyn {

/// Second-order correlation samples rho2(x_i, x_j) on the product grid.
/// Kept symmetric after every operation.
struct PairField {
    Grid1D grid;
    std::vector<double> values; // row-major n x n

    double& at(int i, int j) { return values[static_cast<std::size_t>(i) * grid.n_points + j]; }
    double at(int i, int j) const {
        return values[static_cast<std::size_t>(i) * grid.n_points + j];
    }
};

PairField make_pair_field(const Grid1D& grid, double fill = 0.0);
/// rho2(x, y) = rho(x) rho(y).
PairField product_pair(const Field& rho);
double pair_max_asymmetry(const PairField& p);
double pair_max_abs(const PairField& p);

enum class ClosureRule { MeanField, Kirkwood };

/// Closed third-order value at three node indices. MeanField: product of
/// densities; Kirkwood: rho2(1,2) rho2(1,3) rho2(2,3) / (rho(1) rho(2) rho(3)),
/// guarded against vanishing density.
double closure_eval(ClosureRule rule, const Field& rho1, const PairField& rho2, int i1,
                    int i2, int i3);

/// Coupled right-hand sides of the first two chain members. Holds the
/// discretized model functions; one instance per integration.
class ChainOperator {
  public:
    ChainOperator(const Grid1D& grid, const RateKernels& rates,
                  std::vector<std::string>* warnings = nullptr);

    const Grid1D& grid() const { return grid_; }
    const DiscretizedRates& rates() const { return disc_; }

    /// d/dt rho1 = b+ + a+ * rho1 - b- rho1 - int a-(x-y) rho2(x,y) dy.
    Field rhs_order1(const Field& rho1, const PairField& rho2);

    /// Five term groups of the pair equation; the third-order integrals
    /// use the closure. Output is re-symmetrized (assembly asymmetry
    /// beyond 1e-10 is a hard error).
    PairField rhs_order2(const Field& rho1, const PairField& rho2, ClosureRule closure);

  private:
    Grid1D grid_;
    DiscretizedRates disc_;
    SpectralConvolver conv_;
    std::vector<std::complex<double>> a_plus_spec_;
    std::vector<std::complex<double>> a_minus_spec_;
    bool a_plus_zero_;
    bool a_minus_zero_;
};

struct PairProblem {
    Grid1D grid;
    RateKernels rates;
    ClosureRule closure = ClosureRule::MeanField;
    bool re_close = false; // re-close rho2 = rho1 (x) rho1 at every stage
    double dt = 1e-3;
    double t_end = 0.0;
    double divergence_cap = 1e9;
};

struct PairTrajectory {
    std::vector<double> times;
    std::vector<Field> rho1;
    std::vector<PairField> rho2;
    bool diverged = false;
    double blow_up_time = 0.0;
};

/// Fourth-order fixed-step integration of the truncated pair hierarchy.
/// Grids above 256 nodes are rejected (the y-quadratures cost O(N^2 N)).
PairTrajectory integrate_pair_dynamics(const PairProblem& prob, const Field& rho1_0,
                                       const PairField& rho2_0,
                                       const std::vector<double>& snapshot_times);

} // namespace popdyn
