#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "popdyn/kernels.hpp"

#include <cmath>
#include <random>

using namespace popdyn;

TEST_CASE("gaussian peak value") {
    const KernelSpec k = gaussian_kernel(1.0, 1.0);
    CHECK(kernel_eval(k, 0.0) == doctest::Approx(1.0 / std::sqrt(2.0 * M_PI)).epsilon(1e-12));
}

TEST_CASE("shifted gaussian at the origin: both half masses coincide") {
    const KernelSpec k = shifted_gaussian_kernel(1.0, 1.0, 2.0);
    const double expected = 1.0 / std::sqrt(2.0 * M_PI) * std::exp(-2.0);
    CHECK(kernel_eval(k, 0.0) == doctest::Approx(expected).epsilon(1e-12));
}

TEST_CASE("periodic gaussian repeats over its period") {
    const KernelSpec k = periodic_gaussian_kernel(1.0, 0.5, 0.0, 10.0);
    CHECK(kernel_eval(k, 0.0) == doctest::Approx(kernel_eval(k, 10.0)).epsilon(1e-13));
    CHECK(kernel_eval(k, 3.2) == doctest::Approx(kernel_eval(k, 13.2)).epsilon(1e-13));
}

TEST_CASE("evenness is exact for gaussian and shifted gaussian") {
    const KernelSpec g = gaussian_kernel(2.0, 1.3);
    const KernelSpec s = shifted_gaussian_kernel(1.5, 2.0, 7.0);
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> u(-20.0, 20.0);
    for (int i = 0; i < 200; ++i) {
        const double x = u(rng);
        CHECK(kernel_eval(g, x) == kernel_eval(g, -x));
        CHECK(kernel_eval(s, x) == kernel_eval(s, -x));
    }
}

TEST_CASE("analytic integrals") {
    CHECK(kernel_analytic_integral(gaussian_kernel(2.0, 5.0)) == 2.0);
    CHECK(kernel_analytic_integral(shifted_gaussian_kernel(1.0, 3.0, 10.0)) == 1.0);
    CHECK(kernel_analytic_integral(periodic_gaussian_kernel(3.0, 1.0, 2.0, 40.0)) == 3.0);
    CHECK(kernel_analytic_integral(zero_kernel()) == 0.0);
    CHECK_THROWS_WITH_AS(kernel_analytic_integral(constant_kernel(1.0)),
                         doctest::Contains("multiply v by L"), std::invalid_argument);
}

TEST_CASE("discretize: zero kernel") {
    const Grid1D grid = make_grid(10.0, 32);
    const Field f = discretize(zero_kernel(), grid, true);
    for (double v : f.values) CHECK(v == 0.0);
}

TEST_CASE("discretized gaussian integrates to its mass, refining with the grid") {
    const KernelSpec k = gaussian_kernel(1.0, 1.0);
    const Grid1D coarse = make_grid(40.0, 256);
    const Grid1D fine = make_grid(40.0, 512);
    const double ec = std::abs(integrate(discretize(k, coarse, true)) - 1.0);
    const double ef = std::abs(integrate(discretize(k, fine, true)) - 1.0);
    CHECK(ef < 1e-8);
    CHECK(ef <= ec + 1e-15);
}

TEST_CASE("centered shifted gaussian is even under index reversal") {
    const Grid1D grid = make_grid(60.0, 1024);
    const Field f = discretize(shifted_gaussian_kernel(1.0, 2.0, 10.0), grid, true);
    const int n = grid.n_points;
    for (int i = 1; i < n; ++i)
        CHECK(f.values[static_cast<std::size_t>(i)] ==
              f.values[static_cast<std::size_t>((n - i) % n)]);
}

TEST_CASE("periodic gaussian truncation is window independent") {
    // Doubling the truncation window may only move values below 1e-13 rel.
    const double p = 10.0;
    const KernelSpec k = periodic_gaussian_kernel(1.0, 0.8, 3.0, p);
    for (double x : {0.0, 1.7, 4.9, 8.3}) {
        const double v = kernel_eval(k, x);
        double wide = 0.0;
        for (int n = -64; n <= 64; ++n) {
            const double z = (x - 3.0 + n * p) / 0.8;
            wide += 1.0 / (0.8 * std::sqrt(2.0 * M_PI)) * std::exp(-0.5 * z * z);
        }
        CHECK(v == doctest::Approx(wide).epsilon(1e-13));
    }
}

TEST_CASE("aliasing warning for kernels wider than half the domain") {
    const Grid1D grid = make_grid(60.0, 128);
    std::vector<std::string> warnings;
    discretize(shifted_gaussian_kernel(1.0, 3.0, 10.0), grid, true, &warnings);
    CHECK(warnings.size() == 1); // support 10 + 8.03*3 > 30
    warnings.clear();
    discretize(gaussian_kernel(1.0, 1.0), grid, true, &warnings);
    CHECK(warnings.empty());
}

TEST_CASE("canonical text forms round-trip") {
    const double L = 40.0;
    for (const char* text : {"zero", "const(0.1)", "gaussian(2,0.5)", "pgaussian(20,3,5)",
                             "sgaussian(1,3,10)", "gaussian(1,1)"}) {
        const KernelSpec k = parse_kernel(text, L);
        CHECK(format_kernel(k) == text);
    }
    CHECK(parse_kernel("pgaussian(10,1,5)", L).period == L);
}

TEST_CASE("malformed kernel text is rejected") {
    CHECK_THROWS_AS(parse_kernel("gaussian(1)", 40.0), std::invalid_argument);
    CHECK_THROWS_AS(parse_kernel("gauss(1,1)", 40.0), std::invalid_argument);
    CHECK_THROWS_AS(parse_kernel("gaussian(1,1)x", 40.0), std::invalid_argument);
    CHECK_THROWS_AS(parse_kernel("gaussian(1,-1)", 40.0), std::invalid_argument);
    CHECK_THROWS_AS(parse_kernel("const(-2)", 40.0), std::invalid_argument);
}

TEST_CASE("support radius honors the 1e-14 peak truncation") {
    const KernelSpec g = gaussian_kernel(1.0, 2.0);
    const double r = kernel_support_radius(g);
    CHECK(kernel_eval(g, r * 1.001) < 1e-14 * kernel_eval(g, 0.0));
    CHECK(kernel_eval(g, r * 0.97) > 1e-14 * kernel_eval(g, 0.0));
    CHECK(kernel_support_radius(zero_kernel()) == 0.0);
    CHECK(std::isinf(kernel_support_radius(constant_kernel(1.0))));
}
