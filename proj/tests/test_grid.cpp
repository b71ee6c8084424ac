#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "popdyn/grid.hpp"
#include "popdyn/kernels.hpp"

#include <cmath>
#include <random>
#include <sstream>
#include <thread>

using namespace popdyn;

namespace {

// Normative definition: direct O(N^2) circular sum. Summation runs over the
// kernel displacement so that circular shifts of f reorder nothing.
Field convolve_direct(const Field& f, const Field& k) {
    const int n = f.grid.n_points;
    Field g = make_field(f.grid);
    for (int i = 0; i < n; ++i) {
        double acc = 0.0;
        for (int d = 0; d < n; ++d) {
            int j = (i - d) % n;
            if (j < 0) j += n;
            acc += k.values[static_cast<std::size_t>(d)] * f.values[static_cast<std::size_t>(j)];
        }
        g.values[static_cast<std::size_t>(i)] = f.grid.spacing * acc;
    }
    return g;
}

Field random_field(const Grid1D& g, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> u(-1.0, 2.0);
    Field f = make_field(g);
    for (double& v : f.values) v = u(rng);
    return f;
}

} // namespace

TEST_CASE("grid construction and invariants") {
    const Grid1D g = make_grid(10.0, 64);
    CHECK(g.spacing == doctest::Approx(10.0 / 64).epsilon(1e-15));
    CHECK(g.spacing * g.n_points == doctest::Approx(g.length).epsilon(1e-15));
    CHECK(grid_node(g, 3) == doctest::Approx(3 * g.spacing));
    CHECK_THROWS_AS(make_grid(10.0, 4), std::invalid_argument);
    CHECK_THROWS_AS(make_grid(-1.0, 64), std::invalid_argument);
}

TEST_CASE("integrate: constant field") {
    const Grid1D g = make_grid(10.0, 128);
    const Field f = make_field(g, 1.0);
    CHECK(integrate(f) == doctest::Approx(10.0).epsilon(1e-14));
}

TEST_CASE("integrate: periodic sine vanishes") {
    const Grid1D g = make_grid(7.5, 96);
    Field f = make_field(g);
    for (int i = 0; i < g.n_points; ++i)
        f.values[static_cast<std::size_t>(i)] =
            std::sin(2.0 * M_PI * grid_node(g, i) / g.length);
    CHECK(std::abs(integrate(f)) < 1e-12);
}

TEST_CASE("integrate: unit-mass Gaussian centered mid-domain") {
    const Grid1D g = make_grid(40.0, 512);
    Field f = make_field(g);
    for (int i = 0; i < g.n_points; ++i) {
        const double x = grid_node(g, i) - 20.0;
        f.values[static_cast<std::size_t>(i)] =
            1.0 / std::sqrt(2.0 * M_PI) * std::exp(-0.5 * x * x);
    }
    CHECK(integrate(f) == doctest::Approx(1.0).epsilon(1e-8));
}

TEST_CASE("convolve_periodic: discrete delta is the identity") {
    const Grid1D g = make_grid(12.0, 64);
    std::mt19937_64 rng(7);
    const Field f = random_field(g, rng);
    Field delta = make_field(g);
    delta.values[0] = 1.0 / g.spacing;
    const Field out = convolve_periodic(f, delta);
    for (int i = 0; i < g.n_points; ++i)
        CHECK(out.values[static_cast<std::size_t>(i)] ==
              doctest::Approx(f.values[static_cast<std::size_t>(i)]).epsilon(1e-12));
}

TEST_CASE("convolve_periodic: constant field is an eigenfunction") {
    const Grid1D g = make_grid(20.0, 128);
    const Field f = make_field(g, 3.25);
    const Field k = discretize(gaussian_kernel(2.0, 1.0), g, true);
    const Field out = convolve_periodic(f, k);
    const double expected = 3.25 * integrate(k);
    for (double v : out.values) CHECK(v == doctest::Approx(expected).epsilon(1e-12));
}

TEST_CASE("convolve_periodic matches the direct-sum oracle") {
    std::mt19937_64 rng(42);
    for (int n : {64, 64, 64, 257, 1024}) {
        const Grid1D g = make_grid(5.0, n);
        const Field f = random_field(g, rng);
        const Field k = random_field(g, rng);
        const Field fast = convolve_periodic(f, k);
        const Field direct = convolve_direct(f, k);
        double scale = std::max(1e-30, max_abs(direct));
        for (int i = 0; i < g.n_points; ++i)
            CHECK(std::abs(fast.values[static_cast<std::size_t>(i)] -
                           direct.values[static_cast<std::size_t>(i)]) /
                      scale <
                  1e-10);
    }
}

TEST_CASE("convolution linearity") {
    const Grid1D g = make_grid(9.0, 128);
    std::mt19937_64 rng(11);
    const Field f1 = random_field(g, rng);
    const Field f2 = random_field(g, rng);
    const Field k = random_field(g, rng);
    const double a = 1.7, b = -0.45;
    Field combo = make_field(g);
    for (int i = 0; i < g.n_points; ++i)
        combo.values[static_cast<std::size_t>(i)] =
            a * f1.values[static_cast<std::size_t>(i)] +
            b * f2.values[static_cast<std::size_t>(i)];
    const Field lhs = convolve_periodic(combo, k);
    const Field c1 = convolve_periodic(f1, k);
    const Field c2 = convolve_periodic(f2, k);
    for (int i = 0; i < g.n_points; ++i)
        CHECK(std::abs(lhs.values[static_cast<std::size_t>(i)] -
                       (a * c1.values[static_cast<std::size_t>(i)] +
                        b * c2.values[static_cast<std::size_t>(i)])) < 1e-10);
}

TEST_CASE("convolution commutes with circular shifts at the index level") {
    const Grid1D g = make_grid(6.0, 32);
    std::mt19937_64 rng(3);
    const Field f = random_field(g, rng);
    const Field k = random_field(g, rng);
    const int n = g.n_points;
    const int m = 9;
    Field shifted = make_field(g);
    for (int i = 0; i < n; ++i)
        shifted.values[static_cast<std::size_t>((i + m) % n)] =
            f.values[static_cast<std::size_t>(i)];
    // Exact (bitwise) for the normative direct sum.
    const Field a = convolve_direct(shifted, k);
    const Field b = convolve_direct(f, k);
    for (int i = 0; i < n; ++i)
        CHECK(a.values[static_cast<std::size_t>((i + m) % n)] ==
              b.values[static_cast<std::size_t>(i)]);
    // The fast transform matches the shifted direct sum to roundoff.
    const Field fa = convolve_periodic(shifted, k);
    for (int i = 0; i < n; ++i)
        CHECK(fa.values[static_cast<std::size_t>((i + m) % n)] ==
              doctest::Approx(b.values[static_cast<std::size_t>(i)]).epsilon(1e-12));
}

TEST_CASE("integrate of convolution factorizes") {
    const Grid1D g = make_grid(15.0, 256);
    std::mt19937_64 rng(23);
    const Field f = random_field(g, rng);
    const Field k = random_field(g, rng);
    const Field c = convolve_periodic(f, k);
    CHECK(integrate(c) ==
          doctest::Approx(integrate(f) * integrate(k)).epsilon(1e-9));
}

TEST_CASE("grid mismatch raises a structural error naming both grids") {
    const Field f = make_field(make_grid(10.0, 64));
    const Field k = make_field(make_grid(10.0, 128));
    CHECK_THROWS_WITH_AS(convolve_periodic(f, k),
                         doctest::Contains("{L=10,N=64}"), std::invalid_argument);
}

TEST_CASE("nonnegativity band") {
    const Grid1D g = make_grid(4.0, 16);
    Field f = make_field(g, 1.0);
    f.values[3] = -0.5e-12; // within the band
    CHECK(nonnegative_within_band(f));
    f.values[3] = -1e-9;
    CHECK_FALSE(nonnegative_within_band(f));
}

TEST_CASE("concurrent convolutions on independent fields") {
    const Grid1D g = make_grid(10.0, 128);
    std::mt19937_64 rng(99);
    std::vector<Field> inputs, kernels, expected;
    for (int i = 0; i < 8; ++i) {
        inputs.push_back(random_field(g, rng));
        kernels.push_back(random_field(g, rng));
        expected.push_back(convolve_direct(inputs.back(), kernels.back()));
    }
    std::vector<Field> results(8);
    std::vector<std::thread> workers;
    for (int w = 0; w < 8; ++w)
        workers.emplace_back([&, w]() {
            for (int rep = 0; rep < 50; ++rep)
                results[static_cast<std::size_t>(w)] =
                    convolve_periodic(inputs[static_cast<std::size_t>(w)],
                                      kernels[static_cast<std::size_t>(w)]);
        });
    for (auto& th : workers) th.join();
    for (int w = 0; w < 8; ++w) {
        double sup = 0.0;
        for (int i = 0; i < g.n_points; ++i)
            sup = std::max(sup, std::abs(results[static_cast<std::size_t>(w)].values[static_cast<std::size_t>(i)] -
                                         expected[static_cast<std::size_t>(w)].values[static_cast<std::size_t>(i)]));
        CHECK(sup < 1e-10);
    }
}

TEST_CASE("field CSV serialization") {
    const Grid1D g = make_grid(2.0, 8);
    Field f = make_field(g, 0.5);
    std::ostringstream os;
    write_field_csv(f, os);
    const std::string text = os.str();
    CHECK(text.substr(0, 8) == "x,value\n");
    CHECK(text.find("0.25,0.5\n") != std::string::npos);
}
