#include "popdyn/ibm.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace popdyn {

namespace {

constexpr std::uint64_t kCacheRefreshInterval = 8192;

bool is_valid_interaction_kernel(const KernelSpec& k, double torus_length) {
    switch (k.kind) {
        case KernelKind::Zero:
        case KernelKind::Gaussian:
        case KernelKind::ShiftedGaussian:
            return true;
        case KernelKind::PeriodicGaussian:
            return k.s == 0.0 && k.period == torus_length;
        case KernelKind::Constant:
            return k.c == 0.0;
    }
    return false;
}

double env_birth_mass(const KernelSpec& b_plus, double length) {
    if (is_zero_kernel(b_plus)) return 0.0;
    if (b_plus.kind == KernelKind::Constant) return b_plus.c * length;
    return DensityTable(b_plus, length).mass();
}

double interaction_mass(const KernelSpec& a) {
    return is_zero_kernel(a) ? 0.0 : kernel_analytic_integral(a);
}

double sample_dispersal(const KernelSpec& a, std::mt19937_64& rng) {
    std::normal_distribution<double> normal(0.0, a.r);
    switch (a.kind) {
        case KernelKind::Gaussian:
        case KernelKind::PeriodicGaussian: // s = 0, period = L: wrapping realizes the sum
            return normal(rng);
        case KernelKind::ShiftedGaussian: {
            std::uniform_real_distribution<double> u(0.0, 1.0);
            const double side = u(rng) < 0.5 ? -a.s : a.s;
            return side + normal(rng);
        }
        default:
            throw std::logic_error("dispersal sampling for non-Gaussian kernel");
    }
}

} // namespace

void validate_model_rates(const ModelRates& rates, double torus_length) {
    if (!(torus_length > 0.0))
        throw std::invalid_argument("torus length must be positive");
    if (!is_valid_interaction_kernel(rates.a_plus, torus_length))
        throw std::invalid_argument("a+ must be an even integrable kernel: " +
                                    format_kernel(rates.a_plus));
    if (!is_valid_interaction_kernel(rates.a_minus, torus_length))
        throw std::invalid_argument("a- must be an even integrable kernel: " +
                                    format_kernel(rates.a_minus));
}

double wrap_position(double x, double torus_length) {
    double r = std::fmod(x, torus_length);
    if (r < 0.0) r += torus_length;
    if (r >= torus_length) r = 0.0;
    return r;
}

double torus_displacement(double x, double y, double torus_length) {
    return std::remainder(x - y, torus_length);
}

std::uint64_t splitmix64(std::uint64_t& state) {
    state += 0x9E3779B97F4A7C15ull;
    std::uint64_t z = state;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
}

std::uint64_t replica_seed(std::uint64_t base_seed, std::uint64_t replica_index) {
    // splitmix64 output at stream position replica_index + 1 of the base seed.
    std::uint64_t state = base_seed + replica_index * 0x9E3779B97F4A7C15ull;
    return splitmix64(state);
}

double total_birth_rate(const Configuration& cfg, const ModelRates& rates) {
    validate_model_rates(rates, cfg.torus_length);
    return env_birth_mass(rates.b_plus, cfg.torus_length) +
           static_cast<double>(cfg.positions.size()) * interaction_mass(rates.a_plus);
}

double death_rate_of(std::size_t i, const Configuration& cfg, const ModelRates& rates) {
    if (i >= cfg.positions.size())
        throw std::invalid_argument("death_rate_of: particle index out of range");
    const double xi = cfg.positions[i];
    double rate = kernel_eval(rates.b_minus, xi);
    if (!is_zero_kernel(rates.a_minus)) {
        for (std::size_t j = 0; j < cfg.positions.size(); ++j) {
            if (j == i) continue;
            rate += kernel_eval(rates.a_minus,
                                torus_displacement(xi, cfg.positions[j], cfg.torus_length));
        }
    }
    return rate;
}

DensityTable::DensityTable(const KernelSpec& density, double length, int bins)
    : length_(length) {
    if (!(length > 0.0)) throw std::invalid_argument("density table needs length > 0");
    if (density.kind == KernelKind::Zero || density.c == 0.0) {
        mass_ = 0.0;
        return;
    }
    if (density.kind == KernelKind::Constant) {
        mass_ = density.c * length;
        return;
    }
    if (bins < 2) throw std::invalid_argument("density table needs >= 2 bins");
    bin_width_ = length / bins;
    cumulative_.resize(static_cast<std::size_t>(bins));
    double acc = 0.0;
    for (int k = 0; k < bins; ++k) {
        const double w = kernel_eval(density, (k + 0.5) * bin_width_) * bin_width_;
        if (w < 0.0) throw std::invalid_argument("density table needs a nonnegative density");
        acc += w;
        cumulative_[static_cast<std::size_t>(k)] = acc;
    }
    mass_ = acc;
    if (mass_ <= 0.0) cumulative_.clear();
}

double DensityTable::sample(std::mt19937_64& rng) const {
    if (mass_ <= 0.0) throw std::logic_error("sampling from a zero-mass density");
    std::uniform_real_distribution<double> u(0.0, 1.0);
    if (cumulative_.empty()) return u(rng) * length_; // constant density
    const double target = u(rng) * mass_;
    const auto it = std::lower_bound(cumulative_.begin(), cumulative_.end(), target);
    const std::size_t k = std::min(static_cast<std::size_t>(it - cumulative_.begin()),
                                   cumulative_.size() - 1);
    const double lo = k == 0 ? 0.0 : cumulative_[k - 1];
    const double w = cumulative_[k] - lo;
    const double frac = w > 0.0 ? (target - lo) / w : 0.5;
    return wrap_position((static_cast<double>(k) + frac) * bin_width_, length_);
}

double sample_birth_location(const Configuration& cfg, const ModelRates& rates,
                             std::mt19937_64& rng) {
    validate_model_rates(rates, cfg.torus_length);
    DensityTable env(rates.b_plus, cfg.torus_length);
    const double parent_mass = interaction_mass(rates.a_plus);
    const double total =
        env.mass() + parent_mass * static_cast<double>(cfg.positions.size());
    if (!(total > 0.0))
        throw std::invalid_argument("no birth possible: total birth rate is zero");
    std::uniform_real_distribution<double> u(0.0, 1.0);
    if (u(rng) * total < env.mass()) return env.sample(rng);
    std::uniform_int_distribution<std::size_t> pick(0, cfg.positions.size() - 1);
    const double parent = cfg.positions[pick(rng)];
    return wrap_position(parent + sample_dispersal(rates.a_plus, rng), cfg.torus_length);
}

std::optional<std::pair<JumpRecord, Configuration>> gillespie_step(
    const Configuration& cfg, const ModelRates& rates, std::mt19937_64& rng) {
    validate_model_rates(rates, cfg.torus_length);
    BirthDeathSimulator sim(cfg, rates, 0);
    // Reuse the caller's generator rather than the simulator's own.
    const double birth_total = sim.total_birth_rate();
    const double death_total = sim.total_death_rate();
    const double rate = birth_total + death_total;
    if (!(rate > 0.0)) return std::nullopt;

    std::exponential_distribution<double> expo(rate);
    const double wait = expo(rng);
    std::uniform_real_distribution<double> u(0.0, 1.0);

    Configuration next = sim.configuration(); // positions wrapped onto [0, L)
    JumpRecord rec;
    rec.time = wait;
    if (u(rng) * rate < birth_total) {
        rec.kind = JumpRecord::Kind::Birth;
        rec.position = sample_birth_location(cfg, rates, rng);
        next.positions.push_back(rec.position);
    } else {
        rec.kind = JumpRecord::Kind::Death;
        const auto rates_cache = sim.cached_death_rates();
        double target = u(rng) * death_total;
        std::size_t victim = rates_cache.size() - 1;
        for (std::size_t i = 0; i < rates_cache.size(); ++i) {
            target -= rates_cache[i];
            if (target <= 0.0) {
                victim = i;
                break;
            }
        }
        rec.position = next.positions[victim];
        next.positions.erase(next.positions.begin() + static_cast<std::ptrdiff_t>(victim));
    }
    rec.population_after = static_cast<std::int64_t>(next.positions.size());
    return std::make_pair(rec, std::move(next));
}

BirthDeathSimulator::BirthDeathSimulator(Configuration initial, const ModelRates& rates,
                                         std::uint64_t seed)
    : cfg_(std::move(initial)),
      rates_(rates),
      rng_(seed),
      env_table_(rates.b_plus, cfg_.torus_length),
      a_plus_mass_(interaction_mass(rates.a_plus)),
      a_minus_radius_(is_zero_kernel(rates.a_minus)
                          ? 0.0
                          : std::min(kernel_support_radius(rates.a_minus),
                                     0.5 * cfg_.torus_length)) {
    validate_model_rates(rates_, cfg_.torus_length);
    for (double& x : cfg_.positions) x = wrap_position(x, cfg_.torus_length);
    recompute_death_rates();
}

double BirthDeathSimulator::total_birth_rate() const {
    return env_table_.mass() +
           a_plus_mass_ * static_cast<double>(cfg_.positions.size());
}

void BirthDeathSimulator::recompute_death_rates() {
    const std::size_t n = cfg_.positions.size();
    death_rates_.assign(n, 0.0);
    for (std::size_t i = 0; i < n; ++i)
        death_rates_[i] = kernel_eval(rates_.b_minus, cfg_.positions[i]);
    if (!is_zero_kernel(rates_.a_minus)) {
        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t j = i + 1; j < n; ++j) {
                const double d = torus_displacement(cfg_.positions[i], cfg_.positions[j],
                                                    cfg_.torus_length);
                if (std::abs(d) > a_minus_radius_) continue;
                const double a = kernel_eval(rates_.a_minus, d);
                death_rates_[i] += a;
                death_rates_[j] += a;
            }
        }
    }
    total_death_ = 0.0;
    for (double r : death_rates_) total_death_ += r;
    events_since_refresh_ = 0;
}

double BirthDeathSimulator::sample_birth_position() {
    const double total = total_birth_rate();
    std::uniform_real_distribution<double> u(0.0, 1.0);
    if (u(rng_) * total < env_table_.mass()) return env_table_.sample(rng_);
    std::uniform_int_distribution<std::size_t> pick(0, cfg_.positions.size() - 1);
    const double parent = cfg_.positions[pick(rng_)];
    return wrap_position(parent + sample_dispersal(rates_.a_plus, rng_),
                         cfg_.torus_length);
}

void BirthDeathSimulator::apply_birth(double y) {
    double own = kernel_eval(rates_.b_minus, y);
    if (!is_zero_kernel(rates_.a_minus)) {
        for (std::size_t j = 0; j < cfg_.positions.size(); ++j) {
            const double d = torus_displacement(y, cfg_.positions[j], cfg_.torus_length);
            if (std::abs(d) > a_minus_radius_) continue;
            const double a = kernel_eval(rates_.a_minus, d);
            own += a;
            death_rates_[j] += a;
            total_death_ += a;
        }
    }
    cfg_.positions.push_back(y);
    death_rates_.push_back(own);
    total_death_ += own;
}

void BirthDeathSimulator::apply_death(std::size_t victim) {
    const double x = cfg_.positions[victim];
    total_death_ -= death_rates_[victim];
    // Swap-remove keeps the scan O(N).
    cfg_.positions[victim] = cfg_.positions.back();
    cfg_.positions.pop_back();
    death_rates_[victim] = death_rates_.back();
    death_rates_.pop_back();
    if (!is_zero_kernel(rates_.a_minus)) {
        for (std::size_t j = 0; j < cfg_.positions.size(); ++j) {
            const double d = torus_displacement(cfg_.positions[j], x, cfg_.torus_length);
            if (std::abs(d) > a_minus_radius_) continue;
            const double a = kernel_eval(rates_.a_minus, d);
            death_rates_[j] -= a;
            total_death_ -= a;
        }
    }
    if (total_death_ < 0.0) total_death_ = 0.0;
}

std::optional<double> BirthDeathSimulator::step_wait() {
    const double birth_total = total_birth_rate();
    const double rate = birth_total + total_death_;
    if (!(rate > 0.0)) return std::nullopt;
    std::exponential_distribution<double> expo(rate);
    time_ += expo(rng_);
    return time_;
}

std::optional<JumpRecord> BirthDeathSimulator::step() {
    if (!step_wait()) return std::nullopt;
    return step_apply();
}

JumpRecord BirthDeathSimulator::step_apply() {
    const double birth_total = total_birth_rate();
    const double rate = birth_total + total_death_;
    std::uniform_real_distribution<double> u(0.0, 1.0);

    JumpRecord rec;
    rec.time = time_;
    if (u(rng_) * rate < birth_total) {
        rec.kind = JumpRecord::Kind::Birth;
        rec.position = sample_birth_position();
        apply_birth(rec.position);
    } else {
        rec.kind = JumpRecord::Kind::Death;
        double target = u(rng_) * total_death_;
        std::size_t victim = death_rates_.size() - 1;
        for (std::size_t i = 0; i < death_rates_.size(); ++i) {
            target -= death_rates_[i];
            if (target <= 0.0) {
                victim = i;
                break;
            }
        }
        rec.position = cfg_.positions[victim];
        apply_death(victim);
    }
    rec.population_after = static_cast<std::int64_t>(cfg_.positions.size());

    if (++events_since_refresh_ >= kCacheRefreshInterval) recompute_death_rates();
    return rec;
}

IbmTrajectory simulate(const Configuration& initial, const ModelRates& rates, double t_end,
                       double snapshot_interval, std::uint64_t seed,
                       std::size_t population_cap) {
    if (!(t_end >= 0.0)) throw std::invalid_argument("t_end must be >= 0");
    if (!(snapshot_interval > 0.0))
        throw std::invalid_argument("snapshot interval must be > 0");

    BirthDeathSimulator sim(initial, rates, seed);
    IbmTrajectory traj;
    traj.snapshot_times.push_back(0.0);
    traj.snapshots.push_back(sim.configuration());

    std::size_t snap_index = 1;
    auto record_until = [&](double limit) {
        // The configuration is piecewise constant between events, so the
        // current state is the state at every snapshot time before `limit`.
        for (; static_cast<double>(snap_index) * snapshot_interval <= std::min(limit, t_end);
             ++snap_index) {
            traj.snapshot_times.push_back(static_cast<double>(snap_index) * snapshot_interval);
            traj.snapshots.push_back(sim.configuration());
        }
    };

    while (true) {
        const auto event_time = sim.step_wait();
        if (!event_time) {
            record_until(t_end);
            traj.absorbed = true;
            traj.end_time = t_end;
            return traj;
        }
        record_until(*event_time);
        if (*event_time > t_end) {
            traj.end_time = t_end;
            return traj;
        }
        const JumpRecord rec = sim.step_apply();
        if (rec.kind == JumpRecord::Kind::Birth)
            ++traj.births;
        else
            ++traj.deaths;
        if (sim.configuration().positions.size() > population_cap) {
            traj.blown_up = true;
            traj.end_time = rec.time;
            return traj;
        }
    }
}

Configuration sample_poisson_configuration(const KernelSpec& density, double torus_length,
                                           std::mt19937_64& rng) {
    DensityTable table(density, torus_length);
    Configuration cfg;
    cfg.torus_length = torus_length;
    if (table.mass() <= 0.0) return cfg;
    std::poisson_distribution<int> count(table.mass());
    const int n = count(rng);
    cfg.positions.reserve(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) cfg.positions.push_back(table.sample(rng));
    return cfg;
}

int count_in_vessel(const Configuration& cfg, const VesselInterval& vessel) {
    int n = 0;
    for (double x : cfg.positions)
        if (x >= vessel.lo && x < vessel.hi) ++n;
    return n;
}

namespace {

std::size_t burn_in_offset(std::size_t total, double fraction) {
    if (!(fraction >= 0.0 && fraction < 1.0))
        throw std::invalid_argument("burn-in fraction must be in [0, 1)");
    return static_cast<std::size_t>(static_cast<double>(total) * fraction);
}

} // namespace

OccupationSpectrum estimate_occupation(const std::vector<Configuration>& snapshots,
                                       const VesselInterval& vessel,
                                       double burn_in_fraction) {
    if (!(vessel.hi > vessel.lo))
        throw std::invalid_argument("vessel interval must have hi > lo");
    const std::size_t start = burn_in_offset(snapshots.size(), burn_in_fraction);
    const std::size_t usable = snapshots.size() - start;
    if (usable < 100)
        throw std::invalid_argument("need >= 100 snapshots past burn-in, have " +
                                    std::to_string(usable));
    std::vector<double> hist;
    for (std::size_t i = start; i < snapshots.size(); ++i) {
        const int n = count_in_vessel(snapshots[i], vessel);
        if (hist.size() <= static_cast<std::size_t>(n))
            hist.resize(static_cast<std::size_t>(n) + 1, 0.0);
        hist[static_cast<std::size_t>(n)] += 1.0;
    }
    OccupationSpectrum s;
    s.provenance = SpectrumProvenance::Empirical;
    s.probs = std::move(hist);
    for (double& p : s.probs) p /= static_cast<double>(usable);
    s.truncation_n = static_cast<int>(s.probs.size()) - 1;
    s.mass_deficit = 0.0;
    return s;
}

FactorialMomentEstimate factorial_moments_from_counts(std::span<const int> counts,
                                                      double vessel_volume, int k_max) {
    if (k_max < 1 || k_max > 5)
        throw std::invalid_argument("factorial moment order must be in [1, 5]");
    if (!(vessel_volume > 0.0)) throw std::invalid_argument("vessel volume must be > 0");
    if (counts.empty()) throw std::invalid_argument("no counts supplied");
    const double m = static_cast<double>(counts.size());

    FactorialMomentEstimate est;
    for (int k = 1; k <= k_max; ++k) {
        double sum = 0.0, sum2 = 0.0;
        for (int n : counts) {
            double f = 1.0;
            for (int j = 0; j < k; ++j) f *= static_cast<double>(n - j);
            if (n < k) f = 0.0;
            sum += f;
            sum2 += f * f;
        }
        const double mean = sum / m;
        const double var = std::max(0.0, sum2 / m - mean * mean);
        const double se = counts.size() > 1 ? std::sqrt(var / (m - 1.0)) : 0.0;
        est.c.push_back(mean);
        est.c_stderr.push_back(se);
        const double s_k = mean > 0.0 ? std::pow(mean, 1.0 / k) / vessel_volume : 0.0;
        est.s.push_back(s_k);
        // Delta method: d(c^{1/k})/dc = c^{1/k - 1} / k.
        const double ds = mean > 0.0
                              ? std::pow(mean, 1.0 / k - 1.0) / k * se / vessel_volume
                              : 0.0;
        est.s_stderr.push_back(ds);
    }
    return est;
}

FactorialMomentEstimate empirical_factorial_moments(
    const std::vector<Configuration>& snapshots, const VesselInterval& vessel, int k_max,
    double burn_in_fraction) {
    if (!(vessel.hi > vessel.lo))
        throw std::invalid_argument("vessel interval must have hi > lo");
    const std::size_t start = burn_in_offset(snapshots.size(), burn_in_fraction);
    std::vector<int> counts;
    counts.reserve(snapshots.size() - start);
    for (std::size_t i = start; i < snapshots.size(); ++i)
        counts.push_back(count_in_vessel(snapshots[i], vessel));
    return factorial_moments_from_counts(counts, vessel.volume(), k_max);
}

} // namespace popdyn
