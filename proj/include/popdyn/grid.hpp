#pragma once

#include <complex>
#include <iosfwd>
#include <string>
#include <vector>

namespace popdyn {

/// Uniform periodic grid on a torus of circumference `length`:
/// node i sits at x_i = i * spacing, i in [0, n_points).
struct Grid1D {
    double length = 0.0;
    int n_points = 0;
    double spacing = 0.0;
};

Grid1D make_grid(double length, int n_points);

inline bool same_grid(const Grid1D& a, const Grid1D& b) {
    return a.length == b.length && a.n_points == b.n_points;
}

inline double grid_node(const Grid1D& g, int i) { return i * g.spacing; }

std::string grid_repr(const Grid1D& g);

/// Throws std::invalid_argument naming both grids when they differ.
void require_same_grid(const Grid1D& a, const Grid1D& b, const char* context);

/// Density samples on a Grid1D (particles per unit length).
struct Field {
    Grid1D grid;
    std::vector<double> values;
};

Field make_field(const Grid1D& g, double fill = 0.0);

/// Rectangle rule: h * sum of values. Spectrally accurate for smooth
/// periodic data.
double integrate(const Field& f);

double max_abs(const Field& f);

/// True when every entry is >= -band_scale * max|values| (roundoff band).
bool nonnegative_within_band(const Field& f, double band_scale = 1e-12);

/// Periodic convolution g[i] = h * sum_j k[(i-j) mod N] * f[j].
/// FFT-backed; matches the direct sum to better than 1e-10 relative
/// for N <= 1024.
Field convolve_periodic(const Field& f, const Field& k);

/// FFT workspace for one grid size. Not thread-safe; use one instance
/// per thread (the free convolve_periodic keeps a thread-local cache).
class SpectralConvolver {
  public:
    explicit SpectralConvolver(const Grid1D& grid);
    ~SpectralConvolver();
    SpectralConvolver(const SpectralConvolver&) = delete;
    SpectralConvolver& operator=(const SpectralConvolver&) = delete;

    const Grid1D& grid() const { return grid_; }

    /// Forward transform of a kernel field, pre-scaled so that a single
    /// inverse transform of spectrum*fft(f) yields the h-weighted
    /// convolution.
    std::vector<std::complex<double>> kernel_spectrum(const Field& k);

    void convolve(const Field& f, const std::vector<std::complex<double>>& kernel_spec,
                  Field& out);
    Field convolve(const Field& f, const Field& k);

  private:
    Grid1D grid_;
    void* plan_fwd_ = nullptr;
    void* plan_bwd_ = nullptr;
    double* real_buf_ = nullptr;
    std::complex<double>* cplx_buf_ = nullptr;
};

/// Two-column CSV "x,value" with header, rows in node order, LF endings.
void write_field_csv(const Field& f, std::ostream& os);

} // namespace popdyn
