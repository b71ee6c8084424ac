#include "popdyn/kinetic.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace popdyn {

DiscretizedRates discretize_rates(const Grid1D& grid, const RateKernels& rates,
                                  std::vector<std::string>* warnings) {
    DiscretizedRates d;
    d.b_plus = discretize(rates.b_plus, grid, false, warnings);
    d.b_minus = discretize(rates.b_minus, grid, false, warnings);
    d.a_plus = discretize(rates.a_plus, grid, true, warnings);
    d.a_minus = discretize(rates.a_minus, grid, true, warnings);
    return d;
}

KineticOperator::KineticOperator(const Grid1D& grid, const RateKernels& rates,
                                 std::vector<std::string>* warnings)
    : grid_(grid),
      disc_(discretize_rates(grid, rates, warnings)),
      conv_(grid),
      conv_plus_(make_field(grid)),
      conv_minus_(make_field(grid)) {
    a_plus_spec_ = conv_.kernel_spectrum(disc_.a_plus);
    a_minus_spec_ = conv_.kernel_spectrum(disc_.a_minus);
    a_plus_mass_ = integrate(disc_.a_plus);
}

void KineticOperator::rhs(const Field& rho, Field& out) {
    require_same_grid(grid_, rho.grid, "kinetic rhs");
    conv_.convolve(rho, a_plus_spec_, conv_plus_);
    conv_.convolve(rho, a_minus_spec_, conv_minus_);
    out.grid = grid_;
    out.values.resize(rho.values.size());
    const std::size_t n = rho.values.size();
    for (std::size_t i = 0; i < n; ++i) {
        out.values[i] = disc_.b_plus.values[i] + conv_plus_.values[i] -
                        (disc_.b_minus.values[i] + conv_minus_.values[i]) * rho.values[i];
    }
}

Field KineticOperator::rhs(const Field& rho) {
    Field out;
    rhs(rho, out);
    return out;
}

double KineticOperator::rhs_sup_norm(const Field& rho) {
    Field out;
    rhs(rho, out);
    return max_abs(out);
}

double KineticOperator::growth_scale(const Field& rho) {
    conv_.convolve(rho, a_minus_spec_, conv_minus_);
    double loss = 0.0;
    for (std::size_t i = 0; i < rho.values.size(); ++i)
        loss = std::max(loss, disc_.b_minus.values[i] + conv_minus_.values[i]);
    return loss + a_plus_mass_;
}

Field initial_density(const KineticProblem& prob) {
    if (prob.rho0_field) {
        require_same_grid(prob.grid, prob.rho0_field->grid, "initial density");
        return *prob.rho0_field;
    }
    return discretize(prob.rho0_spec, prob.grid, false);
}

namespace {

void rk4_step(KineticOperator& op, Field& rho, double dt, Field& k1, Field& k2, Field& k3,
              Field& k4, Field& stage) {
    const std::size_t n = rho.values.size();
    op.rhs(rho, k1);
    stage.grid = rho.grid;
    stage.values.resize(n);
    for (std::size_t i = 0; i < n; ++i)
        stage.values[i] = rho.values[i] + 0.5 * dt * k1.values[i];
    op.rhs(stage, k2);
    for (std::size_t i = 0; i < n; ++i)
        stage.values[i] = rho.values[i] + 0.5 * dt * k2.values[i];
    op.rhs(stage, k3);
    for (std::size_t i = 0; i < n; ++i)
        stage.values[i] = rho.values[i] + dt * k3.values[i];
    op.rhs(stage, k4);
    for (std::size_t i = 0; i < n; ++i)
        rho.values[i] += dt / 6.0 *
                         (k1.values[i] + 2.0 * k2.values[i] + 2.0 * k3.values[i] +
                          k4.values[i]);
}

} // namespace

Trajectory integrate_kinetic(const KineticProblem& prob,
                             const std::vector<double>& snapshot_times) {
    if (!(prob.t_end >= 0.0)) throw std::invalid_argument("t_end must be >= 0");
    if (!(prob.dt > 0.0)) throw std::invalid_argument("dt must be > 0");
    for (std::size_t i = 0; i < snapshot_times.size(); ++i) {
        if (snapshot_times[i] < 0.0 || snapshot_times[i] > prob.t_end)
            throw std::invalid_argument("snapshot time outside [0, t_end]");
        if (i > 0 && snapshot_times[i] <= snapshot_times[i - 1])
            throw std::invalid_argument("snapshot times must be strictly increasing");
    }

    if (prob.adaptive && !(prob.adaptive_tol > 0.0))
        throw std::invalid_argument("adaptive tolerance must be > 0");

    KineticOperator op(prob.grid, prob.rates);
    Field rho = initial_density(prob);

    if (!prob.adaptive) {
        const double guard = prob.dt * op.growth_scale(rho);
        if (guard > 0.5)
            throw std::invalid_argument("fixed-step stability guard violated: dt * rate = " +
                                        std::to_string(guard) + " > 0.5");
    }

    Trajectory traj;
    traj.times.push_back(0.0);
    traj.snapshots.push_back(rho);

    Field k1, k2, k3, k4, stage;
    double t = 0.0;
    std::size_t next_snap = 0;
    if (next_snap < snapshot_times.size() && snapshot_times[next_snap] == 0.0) ++next_snap;

    const double band_scale = 1e-12;

    if (prob.adaptive) {
        Field big, half;
        double dt = prob.dt;
        while (next_snap < snapshot_times.size()) {
            const double target = snapshot_times[next_snap];
            while (t < target) {
                const double step = std::min(dt, target - t);
                big = rho;
                rk4_step(op, big, step, k1, k2, k3, k4, stage);
                half = rho;
                rk4_step(op, half, 0.5 * step, k1, k2, k3, k4, stage);
                rk4_step(op, half, 0.5 * step, k1, k2, k3, k4, stage);

                double scale = 1.0;
                for (double v : rho.values) scale = std::max(scale, std::abs(v));
                double err = 0.0;
                for (std::size_t i = 0; i < big.values.size(); ++i)
                    err = std::max(err, std::abs(big.values[i] - half.values[i]));
                err /= 15.0; // one extra order from step doubling

                if (err <= prob.adaptive_tol * scale) {
                    for (std::size_t i = 0; i < half.values.size(); ++i)
                        half.values[i] += (half.values[i] - big.values[i]) / 15.0;
                    rho = std::move(half);
                    half = Field{};
                    t += step;

                    double mx = 0.0;
                    bool has_nan = false;
                    for (double v : rho.values) {
                        mx = std::max(mx, std::abs(v));
                        if (std::isnan(v)) has_nan = true;
                    }
                    if (mx > prob.divergence_cap) {
                        traj.diverged = true;
                        traj.blow_up_time = t;
                        return traj;
                    }
                    if (has_nan)
                        throw std::runtime_error("kinetic integration produced NaN at t = " +
                                                 std::to_string(t));
                    const double band = band_scale * mx;
                    for (double& v : rho.values) {
                        if (v < -band)
                            throw std::runtime_error(
                                "density went negative beyond the roundoff band at t = " +
                                std::to_string(t));
                        if (v < 0.0) v = 0.0;
                    }
                }
                const double factor =
                    err > 0.0 ? 0.9 * std::pow(prob.adaptive_tol * scale / err, 0.2) : 4.0;
                dt = std::min(prob.dt, step * std::min(4.0, std::max(0.2, factor)));
                if (dt < 1e-14 * std::max(1.0, t))
                    throw std::runtime_error("adaptive step size underflow at t = " +
                                             std::to_string(t));
            }
            traj.times.push_back(t);
            traj.snapshots.push_back(rho);
            ++next_snap;

            if (prob.steady_stop_tol > 0.0) {
                double sup = 0.0;
                for (double v : rho.values) sup = std::max(sup, v);
                if (op.rhs_sup_norm(rho) < prob.steady_stop_tol * (1.0 + sup)) {
                    traj.steady_time = t;
                    return traj;
                }
            }
        }
        return traj;
    }
    // Blow-up handling: once the per-step loss rate leaves the fixed-step
    // stability region (the dt * rate <= 0.5 guard), the solution is in the
    // documented unbounded-growth regime. From that point negativity is no
    // longer policed and the state runs to the divergence cap; clipping
    // instead would re-seed the competition shadows and fake a saturation.
    bool stiff_blowup = false;
    while (next_snap < snapshot_times.size()) {
        const double target = snapshot_times[next_snap];
        while (t < target) {
            const double step = std::min(prob.dt, target - t);
            rk4_step(op, rho, step, k1, k2, k3, k4, stage);
            t += step;

            double mx = 0.0;
            bool has_nan = false;
            for (double v : rho.values) {
                mx = std::max(mx, std::abs(v));
                if (std::isnan(v)) has_nan = true;
            }
            if (mx > prob.divergence_cap) {
                traj.diverged = true;
                traj.blow_up_time = t;
                return traj;
            }
            if (has_nan)
                throw std::runtime_error("kinetic integration produced NaN at t = " +
                                         std::to_string(t));
            if (!stiff_blowup) {
                const double band = band_scale * mx;
                bool beyond_band = false;
                for (double v : rho.values)
                    if (v < -band) beyond_band = true;
                if (beyond_band) {
                    if (prob.dt * op.growth_scale(rho) > 0.5) {
                        stiff_blowup = true;
                    } else {
                        double mn = 0.0;
                        for (double v : rho.values) mn = std::min(mn, v);
                        throw std::runtime_error(
                            "density went negative beyond the roundoff band at t = " +
                            std::to_string(t) + " (min = " + std::to_string(mn) + ")");
                    }
                }
                if (!stiff_blowup)
                    for (double& v : rho.values)
                        if (v < 0.0) v = 0.0;
            }
        }
        traj.times.push_back(t);
        traj.snapshots.push_back(rho);
        ++next_snap;

        if (prob.steady_stop_tol > 0.0) {
            double sup = 0.0;
            for (double v : rho.values) sup = std::max(sup, v);
            if (op.rhs_sup_norm(rho) < prob.steady_stop_tol * (1.0 + sup)) {
                traj.steady_time = t;
                return traj;
            }
        }
    }
    return traj;
}

std::optional<std::pair<double, Field>> detect_steady_state(const Trajectory& traj,
                                                            KineticOperator& op,
                                                            double tol) {
    if (traj.diverged) return std::nullopt;
    for (std::size_t i = 0; i < traj.snapshots.size(); ++i) {
        const Field& rho = traj.snapshots[i];
        double sup = 0.0;
        for (double v : rho.values) sup = std::max(sup, v);
        if (op.rhs_sup_norm(rho) < tol * (1.0 + sup))
            return std::make_pair(traj.times[i], rho);
    }
    return std::nullopt;
}

} // namespace popdyn
