#pragma once

#include "popdyn/kernels.hpp"
#include "popdyn/occupation.hpp"

#include <cstdint>
#include <optional>
#include <random>
#include <span>
#include <utility>
#include <vector>

namespace popdyn {

/// Finite multiset of particle positions on a torus of length torus_length.
/// Duplicate positions are allowed.
struct Configuration {
    std::vector<double> positions;
    double torus_length = 0.0;
};

/// Birth/death model functions evaluated on torus displacement. The
/// interaction kernels a± must be even and integrable: Zero, Gaussian,
/// ShiftedGaussian, or PeriodicGaussian with zero shift and period equal
/// to the torus length.
struct ModelRates {
    KernelSpec b_plus;
    KernelSpec b_minus;
    KernelSpec a_plus;
    KernelSpec a_minus;
};

void validate_model_rates(const ModelRates& rates, double torus_length);

struct JumpRecord {
    enum class Kind { Birth, Death };
    double time;
    Kind kind;
    double position;
    std::int64_t population_after;
};

double wrap_position(double x, double torus_length);
/// Signed displacement x - y wrapped into [-L/2, L/2].
double torus_displacement(double x, double y, double torus_length);

std::uint64_t splitmix64(std::uint64_t& state);
/// Independent per-replica seed stream derived from (base, index).
std::uint64_t replica_seed(std::uint64_t base_seed, std::uint64_t replica_index);

// --- Rate functionals (contract-level, computed from scratch) --------------

/// Integral of the birth intensity over the torus:
/// int b+ + |cfg| * int a+.
double total_birth_rate(const Configuration& cfg, const ModelRates& rates);

/// b-(x_i) + sum_{j != i} a-(x_i - x_j), self term excluded.
double death_rate_of(std::size_t i, const Configuration& cfg, const ModelRates& rates);

/// Draws from the normalized birth intensity E+(., cfg)/total: environment
/// term via an inverse-CDF table, parent dispersal via direct normal
/// sampling. Throws when the total birth rate vanishes.
double sample_birth_location(const Configuration& cfg, const ModelRates& rates,
                             std::mt19937_64& rng);

/// One exact jump of the process: exponential waiting time, event type by
/// rate, death victim by individual rate. Returns nothing at an absorbing
/// state (zero total rate). The record's time field holds the waiting time;
/// trajectory-level absolute times come from BirthDeathSimulator.
std::optional<std::pair<JumpRecord, Configuration>> gillespie_step(
    const Configuration& cfg, const ModelRates& rates, std::mt19937_64& rng);

// --- Event-driven simulator (cached rates) ---------------------------------

/// Inverse-CDF sampler for a nonnegative density on [0, L).
class DensityTable {
  public:
    DensityTable(const KernelSpec& density, double length, int bins = 16384);
    double mass() const { return mass_; }
    double sample(std::mt19937_64& rng) const;

  private:
    double length_;
    double mass_;
    double bin_width_ = 0.0;
    std::vector<double> cumulative_; // empty for the Constant fast path
};

/// Markov jump process simulator with per-particle death-rate caching;
/// cache updates are truncated at the kernel support radius and refreshed
/// by periodic full recomputation.
class BirthDeathSimulator {
  public:
    BirthDeathSimulator(Configuration initial, const ModelRates& rates,
                        std::uint64_t seed);

    const Configuration& configuration() const { return cfg_; }
    double time() const { return time_; }
    double total_birth_rate() const;
    double total_death_rate() const { return total_death_; }
    std::span<const double> cached_death_rates() const { return death_rates_; }

    std::optional<JumpRecord> step();

    /// Two-phase stepping for drivers that snapshot between events:
    /// step_wait draws the waiting time and returns the tentative event
    /// time (nothing at an absorbing state); step_apply then realizes the
    /// event. Calls must alternate; step() is the fused form.
    std::optional<double> step_wait();
    JumpRecord step_apply();

    /// Full O(N^2) recomputation of the death-rate cache.
    void recompute_death_rates();

  private:
    double sample_birth_position();
    void apply_birth(double y);
    void apply_death(std::size_t victim);

    Configuration cfg_;
    ModelRates rates_;
    std::mt19937_64 rng_;
    DensityTable env_table_;
    double a_plus_mass_;
    double a_minus_radius_;
    std::vector<double> death_rates_;
    double total_death_ = 0.0;
    double time_ = 0.0;
    std::uint64_t events_since_refresh_ = 0;
};

struct IbmTrajectory {
    std::vector<double> snapshot_times;
    std::vector<Configuration> snapshots;
    std::int64_t births = 0;
    std::int64_t deaths = 0;
    bool blown_up = false;
    bool absorbed = false;
    double end_time = 0.0;
};

IbmTrajectory simulate(const Configuration& initial, const ModelRates& rates,
                       double t_end, double snapshot_interval, std::uint64_t seed,
                       std::size_t population_cap = 1000000);

/// Poisson point sample on [0, L) with intensity given by the density kernel.
Configuration sample_poisson_configuration(const KernelSpec& density, double torus_length,
                                           std::mt19937_64& rng);

// --- Local counting statistics ----------------------------------------------

struct VesselInterval {
    double lo = 0.0;
    double hi = 0.0;
    double volume() const { return hi - lo; }
};

int count_in_vessel(const Configuration& cfg, const VesselInterval& vessel);

/// Normalized vessel-count histogram over the snapshots past burn-in
/// (fraction of the snapshot list). Needs >= 100 usable snapshots.
OccupationSpectrum estimate_occupation(const std::vector<Configuration>& snapshots,
                                       const VesselInterval& vessel,
                                       double burn_in_fraction = 0.2);

struct FactorialMomentEstimate {
    std::vector<double> c;        // falling-factorial means, k = 1..k_max
    std::vector<double> c_stderr;
    std::vector<double> s;        // s_k = c_k^{1/k} / |vessel|
    std::vector<double> s_stderr; // delta-method errors
};

FactorialMomentEstimate factorial_moments_from_counts(std::span<const int> counts,
                                                      double vessel_volume, int k_max);

FactorialMomentEstimate empirical_factorial_moments(
    const std::vector<Configuration>& snapshots, const VesselInterval& vessel, int k_max,
    double burn_in_fraction = 0.2);

} // namespace popdyn
