#include "popdyn/hierarchy.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace popdyn {

namespace {

constexpr double kKirkwoodDensityFloor = 1e-12;
constexpr double kAsymmetryTolerance = 1e-10;

void check_kirkwood_density(double v) {
    if (v < kKirkwoodDensityFloor)
        throw std::runtime_error("Kirkwood division by vanishing density");
}

} // namespace

PairField make_pair_field(const Grid1D& grid, double fill) {
    PairField p;
    p.grid = grid;
    p.values.assign(static_cast<std::size_t>(grid.n_points) * grid.n_points, fill);
    return p;
}

PairField product_pair(const Field& rho) {
    PairField p = make_pair_field(rho.grid);
    const int n = rho.grid.n_points;
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            p.at(i, j) = rho.values[static_cast<std::size_t>(i)] *
                         rho.values[static_cast<std::size_t>(j)];
    return p;
}

double pair_max_asymmetry(const PairField& p) {
    const int n = p.grid.n_points;
    double m = 0.0;
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j)
            m = std::max(m, std::abs(p.at(i, j) - p.at(j, i)));
    return m;
}

double pair_max_abs(const PairField& p) {
    double m = 0.0;
    for (double v : p.values) m = std::max(m, std::abs(v));
    return m;
}

double closure_eval(ClosureRule rule, const Field& rho1, const PairField& rho2, int i1,
                    int i2, int i3) {
    require_same_grid(rho1.grid, rho2.grid, "closure_eval");
    const auto r = [&](int i) { return rho1.values[static_cast<std::size_t>(i)]; };
    if (rule == ClosureRule::MeanField) return r(i1) * r(i2) * r(i3);
    check_kirkwood_density(r(i1));
    check_kirkwood_density(r(i2));
    check_kirkwood_density(r(i3));
    return rho2.at(i1, i2) * rho2.at(i1, i3) * rho2.at(i2, i3) / (r(i1) * r(i2) * r(i3));
}

ChainOperator::ChainOperator(const Grid1D& grid, const RateKernels& rates,
                             std::vector<std::string>* warnings)
    : grid_(grid), disc_(discretize_rates(grid, rates, warnings)), conv_(grid) {
    a_plus_spec_ = conv_.kernel_spectrum(disc_.a_plus);
    a_minus_spec_ = conv_.kernel_spectrum(disc_.a_minus);
    a_plus_zero_ = max_abs(disc_.a_plus) == 0.0;
    a_minus_zero_ = max_abs(disc_.a_minus) == 0.0;
}

Field ChainOperator::rhs_order1(const Field& rho1, const PairField& rho2) {
    require_same_grid(grid_, rho1.grid, "chain rhs order 1");
    require_same_grid(grid_, rho2.grid, "chain rhs order 1");
    const int n = grid_.n_points;
    const double h = grid_.spacing;

    Field out = make_field(grid_);
    Field conv_plus = make_field(grid_);
    if (!a_plus_zero_) conv_.convolve(rho1, a_plus_spec_, conv_plus);

    for (int i = 0; i < n; ++i) {
        // Competition term: per-row quadrature of a-(x_i - y) rho2(x_i, y).
        double competition = 0.0;
        if (!a_minus_zero_) {
            const double* row = &rho2.values[static_cast<std::size_t>(i) * n];
            for (int j = 0; j < n; ++j) {
                const int d = i - j >= 0 ? i - j : i - j + n;
                competition += disc_.a_minus.values[static_cast<std::size_t>(d)] * row[j];
            }
            competition *= h;
        }
        out.values[static_cast<std::size_t>(i)] =
            disc_.b_plus.values[static_cast<std::size_t>(i)] +
            conv_plus.values[static_cast<std::size_t>(i)] -
            disc_.b_minus.values[static_cast<std::size_t>(i)] *
                rho1.values[static_cast<std::size_t>(i)] -
            competition;
    }
    return out;
}

PairField ChainOperator::rhs_order2(const Field& rho1, const PairField& rho2,
                                    ClosureRule closure) {
    require_same_grid(grid_, rho1.grid, "chain rhs order 2");
    require_same_grid(grid_, rho2.grid, "chain rhs order 2");
    const int n = grid_.n_points;
    const double h = grid_.spacing;
    const auto r = [&](int i) { return rho1.values[static_cast<std::size_t>(i)]; };
    const auto aminus = [&](int i, int j) {
        const int d = i - j >= 0 ? i - j : i - j + n;
        return disc_.a_minus.values[static_cast<std::size_t>(d)];
    };

    PairField out = make_pair_field(grid_);

    // Gain convolutions in the first argument: C(i, j) = (a+ *_1 rho2)(x_i, x_j).
    PairField conv1 = make_pair_field(grid_);
    if (!a_plus_zero_) {
        Field column = make_field(grid_);
        Field conv_col = make_field(grid_);
        for (int j = 0; j < n; ++j) {
            for (int i = 0; i < n; ++i)
                column.values[static_cast<std::size_t>(i)] = rho2.at(i, j);
            conv_.convolve(column, a_plus_spec_, conv_col);
            for (int i = 0; i < n; ++i)
                conv1.at(i, j) = conv_col.values[static_cast<std::size_t>(i)];
        }
    }

    Field conv_minus_rho = make_field(grid_);
    if (!a_minus_zero_ && closure == ClosureRule::MeanField)
        conv_.convolve(rho1, a_minus_spec_, conv_minus_rho);

    if (!a_minus_zero_ && closure == ClosureRule::Kirkwood)
        for (int i = 0; i < n; ++i) check_kirkwood_density(r(i));

    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) {
            double v = disc_.b_plus.values[static_cast<std::size_t>(i)] * r(j) +
                       disc_.b_plus.values[static_cast<std::size_t>(j)] * r(i);
            v += conv1.at(i, j) + conv1.at(j, i);
            // Within-pair competition enters once per ordering of the pair;
            // with an even kernel both orderings coincide, hence the factor 2.
            v -= (disc_.b_minus.values[static_cast<std::size_t>(i)] +
                  disc_.b_minus.values[static_cast<std::size_t>(j)] + 2.0 * aminus(i, j)) *
                 rho2.at(i, j);

            if (!a_minus_zero_) {
                if (closure == ClosureRule::MeanField) {
                    // int [a-(x_i - y) + a-(x_j - y)] rho(x_i) rho(x_j) rho(y) dy
                    v -= r(i) * r(j) *
                         (conv_minus_rho.values[static_cast<std::size_t>(i)] +
                          conv_minus_rho.values[static_cast<std::size_t>(j)]);
                } else {
                    // Kirkwood: rho2(i,j)/(rho_i rho_j) *
                    //   int [a-(x_i-y) + a-(x_j-y)] rho2(i,y) rho2(j,y) / rho(y) dy
                    double acc = 0.0;
                    for (int y = 0; y < n; ++y)
                        acc += (aminus(i, y) + aminus(j, y)) * rho2.at(i, y) *
                               rho2.at(j, y) / r(y);
                    v -= rho2.at(i, j) / (r(i) * r(j)) * acc * h;
                }
            }
            out.at(i, j) = v;
        }
    }

    const double asym = pair_max_asymmetry(out);
    const double scale = std::max(1.0, pair_max_abs(out));
    if (asym > kAsymmetryTolerance * scale)
        throw std::logic_error("pair rhs assembly asymmetry " + std::to_string(asym) +
                               " exceeds tolerance");
    for (int i = 0; i < n; ++i) {
        for (int j = i + 1; j < n; ++j) {
            const double m = 0.5 * (out.at(i, j) + out.at(j, i));
            out.at(i, j) = m;
            out.at(j, i) = m;
        }
    }
    return out;
}

namespace {

struct PairState {
    Field rho1;
    PairField rho2;
};

void axpy(PairState& y, double a, const PairState& x) {
    for (std::size_t i = 0; i < y.rho1.values.size(); ++i)
        y.rho1.values[i] += a * x.rho1.values[i];
    for (std::size_t i = 0; i < y.rho2.values.size(); ++i)
        y.rho2.values[i] += a * x.rho2.values[i];
}

} // namespace

PairTrajectory integrate_pair_dynamics(const PairProblem& prob, const Field& rho1_0,
                                       const PairField& rho2_0,
                                       const std::vector<double>& snapshot_times) {
    if (prob.grid.n_points > 256)
        throw std::invalid_argument("pair dynamics limited to N <= 256 nodes");
    if (!(prob.dt > 0.0)) throw std::invalid_argument("dt must be > 0");
    require_same_grid(prob.grid, rho1_0.grid, "pair dynamics");
    require_same_grid(prob.grid, rho2_0.grid, "pair dynamics");
    if (prob.re_close && prob.closure != ClosureRule::MeanField)
        throw std::invalid_argument("re-close mode is defined for the mean-field closure");
    for (std::size_t i = 0; i < snapshot_times.size(); ++i) {
        if (snapshot_times[i] < 0.0 || snapshot_times[i] > prob.t_end)
            throw std::invalid_argument("snapshot time outside [0, t_end]");
        if (i > 0 && snapshot_times[i] <= snapshot_times[i - 1])
            throw std::invalid_argument("snapshot times must be strictly increasing");
    }

    ChainOperator op(prob.grid, prob.rates);
    PairState state{rho1_0, prob.re_close ? product_pair(rho1_0) : rho2_0};

    PairTrajectory traj;
    traj.times.push_back(0.0);
    traj.rho1.push_back(state.rho1);
    traj.rho2.push_back(state.rho2);

    auto derivative = [&](const PairState& s) {
        PairState d;
        if (prob.re_close) {
            const PairField closed = product_pair(s.rho1);
            d.rho1 = op.rhs_order1(s.rho1, closed);
            d.rho2 = make_pair_field(prob.grid); // re-closed afterwards, unused
        } else {
            d.rho1 = op.rhs_order1(s.rho1, s.rho2);
            d.rho2 = op.rhs_order2(s.rho1, s.rho2, prob.closure);
        }
        return d;
    };

    double t = 0.0;
    std::size_t next_snap = 0;
    if (next_snap < snapshot_times.size() && snapshot_times[next_snap] == 0.0) ++next_snap;

    while (next_snap < snapshot_times.size()) {
        const double target = snapshot_times[next_snap];
        while (t < target) {
            const double dt = std::min(prob.dt, target - t);
            const PairState k1 = derivative(state);
            PairState stage = state;
            axpy(stage, 0.5 * dt, k1);
            if (prob.re_close) stage.rho2 = product_pair(stage.rho1);
            const PairState k2 = derivative(stage);
            stage = state;
            axpy(stage, 0.5 * dt, k2);
            if (prob.re_close) stage.rho2 = product_pair(stage.rho1);
            const PairState k3 = derivative(stage);
            stage = state;
            axpy(stage, dt, k3);
            if (prob.re_close) stage.rho2 = product_pair(stage.rho1);
            const PairState k4 = derivative(stage);

            axpy(state, dt / 6.0, k1);
            axpy(state, dt / 3.0, k2);
            axpy(state, dt / 3.0, k3);
            axpy(state, dt / 6.0, k4);
            if (prob.re_close) state.rho2 = product_pair(state.rho1);
            t += dt;

            double mx = std::max(max_abs(state.rho1), pair_max_abs(state.rho2));
            if (mx > prob.divergence_cap) {
                traj.diverged = true;
                traj.blow_up_time = t;
                return traj;
            }
            bool has_nan = false;
            for (double v : state.rho1.values)
                if (std::isnan(v)) has_nan = true;
            if (has_nan)
                throw std::runtime_error("pair integration produced NaN at t = " +
                                         std::to_string(t));
        }
        traj.times.push_back(t);
        traj.rho1.push_back(state.rho1);
        traj.rho2.push_back(state.rho2);
        ++next_snap;
    }
    return traj;
}

} // namespace popdyn
