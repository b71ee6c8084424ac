#pragma once

#include "popdyn/hierarchy.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace popdyn {

enum class ScenarioKind { Riccati, Kinetic, Ibm, Pair, Occupation };

std::string to_string(ScenarioKind kind);

/// Fully resolved run description. Kernel/rate entries use the canonical
/// kernel text forms; the periodic-Gaussian period is the domain length.
struct Scenario {
    std::string name;
    ScenarioKind kind = ScenarioKind::Kinetic;

    // domain (kinetic / pair / ibm)
    double length = 40.0;
    int n_points = 512;

    // model functions (canonical kernel text)
    std::string a_plus = "zero";
    std::string a_minus = "zero";
    std::string b_plus = "zero";
    std::string b_minus = "zero";
    std::string rho0 = "zero";

    // time stepping
    double t_end = 50.0;
    double dt = 1e-3;
    std::vector<double> snapshot_times;
    double steady_tol = 0.0;
    bool adaptive = false;
    double adaptive_tol = 1e-6;

    // riccati coefficients
    double coeff_b = 0.0;
    double coeff_a = 0.0;
    double coeff_alpha = 0.0;
    double rho0_value = 0.0;

    // ibm
    std::uint64_t seed = 1;
    int replicas = 1;
    double vessel_lo = 0.0;
    double vessel_hi = 0.0;
    double thinning = 1.0;
    double burn_in = 0.2;

    // pair
    ClosureRule closure = ClosureRule::MeanField;
    bool re_close = false;

    // occupation
    double kappa = 1.0;
    double volume = 1.0;
    int n_max = 0;

    bool operator==(const Scenario&) const = default;
};

/// Parses a flat `key = value` document ('#' comments, lists as [a, b, c],
/// vessel as lo:hi). Errors carry the offending line number; missing
/// required fields are listed together.
Scenario parse_scenario(const std::string& text);

/// Canonical serialization; parse(serialize(s)) == s exactly.
std::string serialize_scenario(const Scenario& s);

/// FNV-1a over the canonical serialization.
std::uint64_t scenario_hash(const Scenario& s);

std::vector<std::string> preset_names();
Scenario make_preset(const std::string& name);

// Conversions to module-level problem descriptions.
RateKernels scenario_rate_kernels(const Scenario& s);
KineticProblem scenario_kinetic_problem(const Scenario& s);
PairProblem scenario_pair_problem(const Scenario& s);

} // namespace popdyn
