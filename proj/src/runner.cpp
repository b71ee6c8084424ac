#include "popdyn/runner.hpp"

#include "popdyn/homogeneous.hpp"
#include "popdyn/ibm.hpp"
#include "popdyn/occupation.hpp"
#include "popdyn/svg.hpp"

#include <json.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace popdyn {

namespace {

namespace fs = std::filesystem;
using nlohmann::json;

std::ofstream open_out(const fs::path& path) {
    std::ofstream os(path, std::ios::binary); // binary keeps LF endings everywhere
    if (!os) throw std::runtime_error("cannot open output file " + path.string());
    return os;
}

std::string csv_num(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.12g", v);
    return buf;
}

struct RunContext {
    json metadata;
    std::vector<std::string> warnings;
    std::chrono::steady_clock::time_point started = std::chrono::steady_clock::now();
};

void finish_metadata(RunContext& ctx, const Scenario& s, const fs::path& dir) {
    char hash[32];
    std::snprintf(hash, sizeof hash, "%016llx",
                  static_cast<unsigned long long>(scenario_hash(s)));
    ctx.metadata["tool_version"] = kToolVersion;
    ctx.metadata["scenario_name"] = s.name;
    ctx.metadata["scenario_hash"] = hash;
    ctx.metadata["scenario"] = serialize_scenario(s);
    ctx.metadata["warnings"] = ctx.warnings;
    ctx.metadata["wall_time_s"] =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - ctx.started)
            .count();
    auto os = open_out(dir / "metadata.json");
    os << ctx.metadata.dump(2) << "\n";
}

int run_riccati(const Scenario& s, const fs::path& dir, const RunOptions& opt,
                RunContext& ctx) {
    RiccatiParams p{s.coeff_b, s.coeff_a, s.coeff_alpha};
    const RiccatiSolution sol = riccati_derived(p);
    ctx.metadata["lambda_plus"] = sol.lambda_plus;
    ctx.metadata["lambda_minus"] = sol.lambda_minus;
    ctx.metadata["omega"] = sol.omega;
    ctx.metadata["delta"] = sol.delta;

    PlotSeries series{"rho(t)", {}, {}};
    {
        auto os = open_out(dir / "trajectory.csv");
        os << "t,rho\n";
        const int steps = static_cast<int>(std::ceil(s.t_end / s.dt));
        for (int i = 0; i <= steps; ++i) {
            const double t = std::min(s.t_end, i * s.dt);
            const double rho = riccati_solve(p, s.rho0_value, t);
            os << csv_num(t) << "," << csv_num(rho) << "\n";
            series.x.push_back(t);
            series.y.push_back(rho);
            if (t >= s.t_end) break;
        }
    }
    if (opt.svg) {
        auto os = open_out(dir / "plot.svg");
        os << render_line_plot(s.name, "t", "rho", {series});
    }
    return kExitOk;
}

int run_kinetic(const Scenario& s, const fs::path& dir, const RunOptions& opt,
                RunContext& ctx) {
    KineticProblem prob = scenario_kinetic_problem(s);
    KineticOperator op(prob.grid, prob.rates, &ctx.warnings);
    const Trajectory traj = integrate_kinetic(prob, s.snapshot_times);

    std::vector<PlotSeries> series;
    {
        auto summary = open_out(dir / "summary.csv");
        summary << "time,mass,min,max,rhs_norm\n";
        for (std::size_t i = 0; i < traj.snapshots.size(); ++i) {
            const Field& rho = traj.snapshots[i];
            char name[48];
            std::snprintf(name, sizeof name, "snapshot_%03zu.csv", i);
            auto os = open_out(dir / name);
            os << "x,rho\n";
            for (int k = 0; k < rho.grid.n_points; ++k)
                os << csv_num(grid_node(rho.grid, k)) << ","
                   << csv_num(rho.values[static_cast<std::size_t>(k)]) << "\n";

            const auto [mn, mx] =
                std::minmax_element(rho.values.begin(), rho.values.end());
            summary << csv_num(traj.times[i]) << "," << csv_num(integrate(rho)) << ","
                    << csv_num(*mn) << "," << csv_num(*mx) << ","
                    << csv_num(op.rhs_sup_norm(rho)) << "\n";

            PlotSeries ps;
            ps.label = "t = " + csv_num(traj.times[i]);
            for (int k = 0; k < rho.grid.n_points; ++k) {
                ps.x.push_back(grid_node(rho.grid, k));
                ps.y.push_back(rho.values[static_cast<std::size_t>(k)]);
            }
            series.push_back(std::move(ps));
        }
    }
    if (opt.svg) {
        auto os = open_out(dir / "plot.svg");
        os << render_line_plot(s.name, "x", "rho", series);
    }
    ctx.metadata["diverged"] = traj.diverged;
    if (traj.diverged) ctx.metadata["blow_up_time"] = traj.blow_up_time;
    if (traj.steady_time) ctx.metadata["steady_time"] = *traj.steady_time;
    return traj.diverged ? kExitDiverged : kExitOk;
}

int run_pair(const Scenario& s, const fs::path& dir, const RunOptions& opt,
             RunContext& ctx) {
    PairProblem prob = scenario_pair_problem(s);
    const Field rho1_0 = discretize(parse_kernel(s.rho0, s.length), prob.grid, false,
                                    &ctx.warnings);
    const PairField rho2_0 = product_pair(rho1_0);
    const PairTrajectory traj = integrate_pair_dynamics(prob, rho1_0, rho2_0,
                                                        s.snapshot_times);

    std::vector<PlotSeries> series;
    auto diag = open_out(dir / "diag.csv");
    diag << "snapshot,time,x,rho2_diag,trunc_diag,trunc_mid\n";
    const int n = prob.grid.n_points;
    for (std::size_t i = 0; i < traj.rho1.size(); ++i) {
        char name[48];
        std::snprintf(name, sizeof name, "rho1_%03zu.csv", i);
        {
            auto os = open_out(dir / name);
            write_field_csv(traj.rho1[i], os);
        }
        std::snprintf(name, sizeof name, "rho2_%03zu.csv", i);
        {
            auto os = open_out(dir / name);
            const PairField& p = traj.rho2[i];
            for (int a = 0; a < n; ++a) {
                for (int b = 0; b < n; ++b) {
                    if (b) os << ",";
                    os << csv_num(p.at(a, b));
                }
                os << "\n";
            }
        }
        const Field& r1 = traj.rho1[i];
        const PairField& r2 = traj.rho2[i];
        const int mid = n / 2;
        for (int k = 0; k < n; ++k) {
            const double rk = r1.values[static_cast<std::size_t>(k)];
            const double rmid = r1.values[static_cast<std::size_t>(mid)];
            diag << i << "," << csv_num(traj.times[i]) << ","
                 << csv_num(grid_node(prob.grid, k)) << "," << csv_num(r2.at(k, k)) << ","
                 << csv_num(r2.at(k, k) - rk * rk) << ","
                 << csv_num(r2.at(k, mid) - rk * rmid) << "\n";
        }
        PlotSeries ps;
        ps.label = "t = " + csv_num(traj.times[i]);
        for (int k = 0; k < n; ++k) {
            ps.x.push_back(grid_node(prob.grid, k));
            ps.y.push_back(r1.values[static_cast<std::size_t>(k)]);
        }
        series.push_back(std::move(ps));
    }
    if (opt.svg) {
        auto os = open_out(dir / "plot.svg");
        os << render_line_plot(s.name + " (rho1)", "x", "rho", series);
    }
    ctx.metadata["diverged"] = traj.diverged;
    if (traj.diverged) ctx.metadata["blow_up_time"] = traj.blow_up_time;
    return traj.diverged ? kExitDiverged : kExitOk;
}

int run_ibm(const Scenario& s, const fs::path& dir, const RunOptions& opt,
            RunContext& ctx) {
    const std::uint64_t base_seed = opt.seed_override.value_or(s.seed);
    const RateKernels rk = scenario_rate_kernels(s);
    ModelRates rates{rk.b_plus, rk.b_minus, rk.a_plus, rk.a_minus};
    const KernelSpec rho0 = parse_kernel(s.rho0, s.length);
    const VesselInterval vessel{s.vessel_lo, s.vessel_hi};

    bool blown_up = false;
    bool absorbed = false;
    std::vector<int> pooled_counts;
    std::optional<std::ofstream> events;
    if (opt.events) {
        events.emplace(open_out(dir / "events.csv"));
        *events << "replica,time,kind,position,population\n";
    }
    auto counts_csv = open_out(dir / "counts.csv");
    counts_csv << "time,count\n";

    for (int rep = 0; rep < s.replicas; ++rep) {
        const std::uint64_t seed = replica_seed(base_seed, static_cast<std::uint64_t>(rep));
        std::mt19937_64 init_rng(seed);
        const Configuration cfg0 = sample_poisson_configuration(rho0, s.length, init_rng);

        if (events) {
            // Event-level log replays the trajectory with a fresh simulator.
            BirthDeathSimulator sim(cfg0, rates, seed + 1);
            while (true) {
                const auto rec = sim.step();
                if (!rec || rec->time > s.t_end) break;
                *events << rep << "," << csv_num(rec->time) << ","
                        << (rec->kind == JumpRecord::Kind::Birth ? "birth" : "death") << ","
                        << csv_num(rec->position) << "," << rec->population_after << "\n";
            }
        }

        const IbmTrajectory traj = simulate(cfg0, rates, s.t_end, s.thinning, seed + 1);
        blown_up = blown_up || traj.blown_up;
        absorbed = absorbed || traj.absorbed;
        if (rep == 0)
            for (std::size_t i = 0; i < traj.snapshots.size(); ++i)
                counts_csv << csv_num(traj.snapshot_times[i]) << ","
                           << traj.snapshots[i].positions.size() << "\n";
        const std::size_t start = static_cast<std::size_t>(
            static_cast<double>(traj.snapshots.size()) * s.burn_in);
        for (std::size_t i = start; i < traj.snapshots.size(); ++i)
            pooled_counts.push_back(count_in_vessel(traj.snapshots[i], vessel));
    }

    {
        std::vector<double> hist;
        for (int n : pooled_counts) {
            if (hist.size() <= static_cast<std::size_t>(n))
                hist.resize(static_cast<std::size_t>(n) + 1, 0.0);
            hist[static_cast<std::size_t>(n)] += 1.0;
        }
        auto os = open_out(dir / "occupation.csv");
        os << "n,p_empirical\n";
        for (std::size_t n = 0; n < hist.size(); ++n)
            os << n << "," << csv_num(hist[n] / static_cast<double>(pooled_counts.size()))
               << "\n";
    }
    {
        const auto est =
            factorial_moments_from_counts(pooled_counts, vessel.volume(), 4);
        auto os = open_out(dir / "moments.csv");
        os << "k,c_k,c_stderr,s_k,s_stderr\n";
        for (std::size_t k = 0; k < est.c.size(); ++k)
            os << (k + 1) << "," << csv_num(est.c[k]) << "," << csv_num(est.c_stderr[k])
               << "," << csv_num(est.s[k]) << "," << csv_num(est.s_stderr[k]) << "\n";
    }
    ctx.metadata["base_seed"] = base_seed;
    ctx.metadata["replicas"] = s.replicas;
    ctx.metadata["burn_in"] = s.burn_in;
    ctx.metadata["pooled_snapshots"] = pooled_counts.size();
    ctx.metadata["blown_up"] = blown_up;
    ctx.metadata["absorbed"] = absorbed;
    return blown_up ? kExitDiverged : kExitOk;
}

int run_occupation(const Scenario& s, const fs::path& dir, const RunOptions&,
                   RunContext& ctx) {
    const Vessel vessel{s.volume};
    const double mean = s.kappa * s.volume;
    const OccupationSpectrum cox = cox_occupation(s.kappa, vessel, s.n_max);
    const CoxConstants cc = cox_constants(s.kappa, vessel);
    const bool heavy_ok = cc.b_vessel >= 1.0;

    auto os = open_out(dir / "occupation.csv");
    os << "n,p_poisson,p_cox,subpoisson_bound,heavy_tail_bound\n";
    const int n_rows = std::max(s.n_max, cox.truncation_n);
    for (int n = 0; n <= n_rows; ++n) {
        const double p_cox =
            n < static_cast<int>(cox.probs.size()) ? cox.probs[static_cast<std::size_t>(n)] : 0.0;
        os << n << "," << csv_num(poisson_occupation(mean, n)) << "," << csv_num(p_cox)
           << "," << csv_num(sub_poissonian_bound(s.kappa, vessel, n)) << ",";
        if (heavy_ok && n >= 2)
            os << csv_num(heavy_tail_lower_bound(s.kappa, vessel, n));
        else
            os << "nan";
        os << "\n";
    }
    ctx.metadata["cox_mean"] = cox.mean();
    ctx.metadata["cox_variance"] = cox.variance();
    ctx.metadata["cox_mass_deficit"] = cox.mass_deficit;
    ctx.metadata["b_vessel"] = cc.b_vessel;
    return kExitOk;
}

} // namespace

int run_scenario(const Scenario& scenario, const fs::path& out_dir,
                 const RunOptions& options) {
    fs::create_directories(out_dir);
    RunContext ctx;
    int code = kExitOk;
    switch (scenario.kind) {
        case ScenarioKind::Riccati:
            code = run_riccati(scenario, out_dir, options, ctx);
            break;
        case ScenarioKind::Kinetic:
            code = run_kinetic(scenario, out_dir, options, ctx);
            break;
        case ScenarioKind::Pair:
            code = run_pair(scenario, out_dir, options, ctx);
            break;
        case ScenarioKind::Ibm:
            code = run_ibm(scenario, out_dir, options, ctx);
            break;
        case ScenarioKind::Occupation:
            code = run_occupation(scenario, out_dir, options, ctx);
            break;
    }
    ctx.metadata["exit_code"] = code;
    finish_metadata(ctx, scenario, out_dir);
    return code;
}

} // namespace popdyn
