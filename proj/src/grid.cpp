#include "popdyn/grid.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <memory>
#include <mutex>
#include <ostream>
#include <stdexcept>

namespace popdyn {

namespace {
// FFTW planning is not thread-safe; execution with distinct buffers is.
std::mutex& planner_mutex() {
    static std::mutex m;
    return m;
}
} // namespace

Grid1D make_grid(double length, int n_points) {
    if (!(length > 0.0) || !std::isfinite(length))
        throw std::invalid_argument("grid length must be positive and finite");
    if (n_points < 8)
        throw std::invalid_argument("grid needs at least 8 points, got " +
                                    std::to_string(n_points));
    Grid1D g;
    g.length = length;
    g.n_points = n_points;
    g.spacing = length / n_points;
    return g;
}

std::string grid_repr(const Grid1D& g) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "{L=%g,N=%d}", g.length, g.n_points);
    return buf;
}

void require_same_grid(const Grid1D& a, const Grid1D& b, const char* context) {
    if (!same_grid(a, b))
        throw std::invalid_argument(std::string(context) + ": grid mismatch " +
                                    grid_repr(a) + " vs " + grid_repr(b));
}

Field make_field(const Grid1D& g, double fill) {
    if (g.n_points <= 0) throw std::invalid_argument("field on an empty grid");
    Field f;
    f.grid = g;
    f.values.assign(static_cast<std::size_t>(g.n_points), fill);
    return f;
}

double integrate(const Field& f) {
    double s = 0.0;
    for (double v : f.values) s += v;
    return f.grid.spacing * s;
}

double max_abs(const Field& f) {
    double m = 0.0;
    for (double v : f.values) m = std::max(m, std::abs(v));
    return m;
}

bool nonnegative_within_band(const Field& f, double band_scale) {
    const double band = band_scale * max_abs(f);
    for (double v : f.values)
        if (v < -band) return false;
    return true;
}

SpectralConvolver::SpectralConvolver(const Grid1D& grid) : grid_(grid) {
    const int n = grid.n_points;
    real_buf_ = fftw_alloc_real(static_cast<std::size_t>(n));
    cplx_buf_ = reinterpret_cast<std::complex<double>*>(
        fftw_alloc_complex(static_cast<std::size_t>(n / 2 + 1)));
    std::lock_guard<std::mutex> lock(planner_mutex());
    plan_fwd_ = fftw_plan_dft_r2c_1d(n, real_buf_,
                                     reinterpret_cast<fftw_complex*>(cplx_buf_),
                                     FFTW_ESTIMATE);
    plan_bwd_ = fftw_plan_dft_c2r_1d(n, reinterpret_cast<fftw_complex*>(cplx_buf_),
                                     real_buf_, FFTW_ESTIMATE);
    if (!plan_fwd_ || !plan_bwd_) throw std::runtime_error("fftw plan creation failed");
}

SpectralConvolver::~SpectralConvolver() {
    std::lock_guard<std::mutex> lock(planner_mutex());
    if (plan_fwd_) fftw_destroy_plan(static_cast<fftw_plan>(plan_fwd_));
    if (plan_bwd_) fftw_destroy_plan(static_cast<fftw_plan>(plan_bwd_));
    fftw_free(real_buf_);
    fftw_free(cplx_buf_);
}

std::vector<std::complex<double>> SpectralConvolver::kernel_spectrum(const Field& k) {
    require_same_grid(grid_, k.grid, "kernel_spectrum");
    const int n = grid_.n_points;
    std::copy(k.values.begin(), k.values.end(), real_buf_);
    fftw_execute(static_cast<fftw_plan>(plan_fwd_));
    // Fold in h (quadrature weight) and 1/N (FFTW normalization).
    const double scale = grid_.spacing / n;
    std::vector<std::complex<double>> spec(static_cast<std::size_t>(n / 2 + 1));
    for (std::size_t i = 0; i < spec.size(); ++i) spec[i] = cplx_buf_[i] * scale;
    return spec;
}

void SpectralConvolver::convolve(const Field& f,
                                 const std::vector<std::complex<double>>& kernel_spec,
                                 Field& out) {
    require_same_grid(grid_, f.grid, "convolve_periodic");
    const int n = grid_.n_points;
    if (kernel_spec.size() != static_cast<std::size_t>(n / 2 + 1))
        throw std::invalid_argument("kernel spectrum size does not match grid");
    std::copy(f.values.begin(), f.values.end(), real_buf_);
    fftw_execute(static_cast<fftw_plan>(plan_fwd_));
    for (std::size_t i = 0; i < kernel_spec.size(); ++i) cplx_buf_[i] *= kernel_spec[i];
    fftw_execute(static_cast<fftw_plan>(plan_bwd_));
    out.grid = grid_;
    out.values.assign(real_buf_, real_buf_ + n);
}

Field SpectralConvolver::convolve(const Field& f, const Field& k) {
    Field out;
    convolve(f, kernel_spectrum(k), out);
    return out;
}

Field convolve_periodic(const Field& f, const Field& k) {
    require_same_grid(f.grid, k.grid, "convolve_periodic");
    thread_local std::map<int, std::unique_ptr<SpectralConvolver>> cache;
    auto& slot = cache[f.grid.n_points];
    if (!slot || !same_grid(slot->grid(), f.grid))
        slot = std::make_unique<SpectralConvolver>(f.grid);
    return slot->convolve(f, k);
}

void write_field_csv(const Field& f, std::ostream& os) {
    os << "x,value\n";
    char buf[80];
    for (int i = 0; i < f.grid.n_points; ++i) {
        std::snprintf(buf, sizeof buf, "%.12g,%.12g\n", grid_node(f.grid, i),
                      f.values[static_cast<std::size_t>(i)]);
        os << buf;
    }
}

} // namespace popdyn
