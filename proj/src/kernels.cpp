#include "popdyn/kernels.hpp"

#include <cctype>
#include <charconv>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

namespace popdyn {

namespace {

constexpr double kTwoPi = 6.283185307179586476925286766559;
constexpr double kTailCut = 1e-14;
// exp(-x^2 / (2 r^2)) < 1e-14  <=>  |x| > r * sqrt(2 * 14 ln 10)
const double kTailRadiusFactor = std::sqrt(-2.0 * std::log(kTailCut));

double gauss(double x, double c, double r) {
    const double z = x / r;
    return c / (r * std::sqrt(kTwoPi)) * std::exp(-0.5 * z * z);
}

void check_gaussian_args(double c, double r) {
    if (!(c >= 0.0) || !std::isfinite(c))
        throw std::invalid_argument("kernel mass c must be >= 0");
    if (!(r > 0.0) || !std::isfinite(r))
        throw std::invalid_argument("kernel width r must be > 0");
}

} // namespace

KernelSpec zero_kernel() { return {}; }

KernelSpec constant_kernel(double v) {
    if (!(v >= 0.0) || !std::isfinite(v))
        throw std::invalid_argument("constant kernel value must be >= 0");
    KernelSpec k;
    k.kind = KernelKind::Constant;
    k.c = v;
    return k;
}

KernelSpec gaussian_kernel(double c, double r) {
    check_gaussian_args(c, r);
    KernelSpec k;
    k.kind = KernelKind::Gaussian;
    k.c = c;
    k.r = r;
    return k;
}

KernelSpec periodic_gaussian_kernel(double c, double r, double s, double period) {
    check_gaussian_args(c, r);
    if (!(period > 0.0) || !std::isfinite(period))
        throw std::invalid_argument("periodic gaussian needs period > 0");
    KernelSpec k;
    k.kind = KernelKind::PeriodicGaussian;
    k.c = c;
    k.r = r;
    k.s = s;
    k.period = period;
    return k;
}

KernelSpec shifted_gaussian_kernel(double c, double r, double s) {
    check_gaussian_args(c, r);
    KernelSpec k;
    k.kind = KernelKind::ShiftedGaussian;
    k.c = c;
    k.r = r;
    k.s = s;
    return k;
}

double kernel_eval(const KernelSpec& spec, double x) {
    switch (spec.kind) {
        case KernelKind::Zero:
            return 0.0;
        case KernelKind::Constant:
            return spec.c;
        case KernelKind::Gaussian:
            return gauss(x, spec.c, spec.r);
        case KernelKind::ShiftedGaussian:
            return 0.5 * (gauss(x + spec.s, spec.c, spec.r) +
                          gauss(x - spec.s, spec.c, spec.r));
        case KernelKind::PeriodicGaussian: {
            if (spec.c == 0.0) return 0.0;
            const double p = spec.period;
            const double peak = spec.c / (spec.r * std::sqrt(kTwoPi));
            const double cutoff = kTailCut * peak;
            // Start at the image nearest to x and expand until terms vanish.
            const double n0 = std::round((x - spec.s) / p);
            double sum = gauss(x - spec.s - n0 * p, spec.c, spec.r);
            for (double n = n0 + 1;; ++n) {
                const double term = gauss(x - spec.s - n * p, spec.c, spec.r);
                sum += term;
                if (term < cutoff) break;
            }
            for (double n = n0 - 1;; --n) {
                const double term = gauss(x - spec.s - n * p, spec.c, spec.r);
                sum += term;
                if (term < cutoff) break;
            }
            return sum;
        }
    }
    return 0.0;
}

double kernel_analytic_integral(const KernelSpec& spec) {
    switch (spec.kind) {
        case KernelKind::Zero:
            return 0.0;
        case KernelKind::Constant:
            throw std::invalid_argument(
                "integral requires a finite domain; multiply v by L at the call site");
        case KernelKind::Gaussian:
        case KernelKind::ShiftedGaussian:
        case KernelKind::PeriodicGaussian:
            return spec.c;
    }
    return 0.0;
}

double kernel_support_radius(const KernelSpec& spec) {
    switch (spec.kind) {
        case KernelKind::Zero:
            return 0.0;
        case KernelKind::Constant:
            return spec.c == 0.0 ? 0.0 : std::numeric_limits<double>::infinity();
        case KernelKind::Gaussian:
            return spec.c == 0.0 ? 0.0 : spec.r * kTailRadiusFactor;
        case KernelKind::ShiftedGaussian:
            return spec.c == 0.0 ? 0.0 : std::abs(spec.s) + spec.r * kTailRadiusFactor;
        case KernelKind::PeriodicGaussian:
            return spec.c == 0.0 ? 0.0 : spec.period;
    }
    return 0.0;
}

Field discretize(const KernelSpec& spec, const Grid1D& grid, bool centered,
                 std::vector<std::string>* warnings) {
    Field f = make_field(grid);
    const int n = grid.n_points;
    for (int i = 0; i < n; ++i) {
        double x = grid_node(grid, i);
        if (centered && i > n / 2) x -= grid.length;
        f.values[static_cast<std::size_t>(i)] = kernel_eval(spec, x);
    }
    if (warnings && centered) {
        if (spec.kind == KernelKind::Gaussian || spec.kind == KernelKind::ShiftedGaussian) {
            if (kernel_support_radius(spec) > 0.5 * grid.length)
                warnings->push_back("kernel " + format_kernel(spec) +
                                    " wider than L/2 on " + grid_repr(grid) +
                                    ": aliasing risk");
        } else if (spec.kind == KernelKind::PeriodicGaussian) {
            const double ratio = grid.length / spec.period;
            if (std::abs(ratio - std::round(ratio)) > 1e-9)
                warnings->push_back("periodic kernel " + format_kernel(spec) +
                                    " period does not divide L on " + grid_repr(grid) +
                                    ": aliasing risk");
        }
    }
    return f;
}

namespace {

std::string fmt_num(double v) {
    char buf[32];
    auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

struct ArgParser {
    std::string_view text;
    std::size_t pos = 0;

    void skip_ws() {
        while (pos < text.size() && std::isspace(static_cast<unsigned char>(text[pos])))
            ++pos;
    }
    bool consume(char c) {
        skip_ws();
        if (pos < text.size() && text[pos] == c) {
            ++pos;
            return true;
        }
        return false;
    }
    double number() {
        skip_ws();
        double v = 0.0;
        auto res = std::from_chars(text.data() + pos, text.data() + text.size(), v);
        if (res.ec != std::errc())
            throw std::invalid_argument("malformed kernel text: '" + std::string(text) +
                                        "' (expected number at offset " +
                                        std::to_string(pos) + ")");
        pos = static_cast<std::size_t>(res.ptr - text.data());
        return v;
    }
};

} // namespace

std::string format_kernel(const KernelSpec& spec) {
    switch (spec.kind) {
        case KernelKind::Zero:
            return "zero";
        case KernelKind::Constant:
            return "const(" + fmt_num(spec.c) + ")";
        case KernelKind::Gaussian:
            return "gaussian(" + fmt_num(spec.c) + "," + fmt_num(spec.r) + ")";
        case KernelKind::PeriodicGaussian:
            return "pgaussian(" + fmt_num(spec.c) + "," + fmt_num(spec.r) + "," +
                   fmt_num(spec.s) + ")";
        case KernelKind::ShiftedGaussian:
            return "sgaussian(" + fmt_num(spec.c) + "," + fmt_num(spec.r) + "," +
                   fmt_num(spec.s) + ")";
    }
    return "zero";
}

KernelSpec parse_kernel(std::string_view text, double period_for_periodic) {
    ArgParser p{text};
    p.skip_ws();
    std::size_t start = p.pos;
    while (p.pos < text.size() &&
           (std::isalpha(static_cast<unsigned char>(text[p.pos])) || text[p.pos] == '_'))
        ++p.pos;
    const std::string head(text.substr(start, p.pos - start));

    auto args = [&](int count) {
        std::vector<double> out;
        if (!p.consume('('))
            throw std::invalid_argument("malformed kernel text: '" + std::string(text) +
                                        "' (expected '(' after " + head + ")");
        for (int i = 0; i < count; ++i) {
            if (i > 0 && !p.consume(','))
                throw std::invalid_argument("malformed kernel text: '" + std::string(text) +
                                            "' (expected ',')");
            out.push_back(p.number());
        }
        if (!p.consume(')'))
            throw std::invalid_argument("malformed kernel text: '" + std::string(text) +
                                        "' (expected ')')");
        p.skip_ws();
        if (p.pos != text.size())
            throw std::invalid_argument("malformed kernel text: '" + std::string(text) +
                                        "' (trailing characters)");
        return out;
    };

    if (head == "zero") {
        p.skip_ws();
        if (p.pos != text.size())
            throw std::invalid_argument("malformed kernel text: '" + std::string(text) + "'");
        return zero_kernel();
    }
    if (head == "const") {
        auto a = args(1);
        return constant_kernel(a[0]);
    }
    if (head == "gaussian") {
        auto a = args(2);
        return gaussian_kernel(a[0], a[1]);
    }
    if (head == "pgaussian") {
        auto a = args(3);
        return periodic_gaussian_kernel(a[0], a[1], a[2], period_for_periodic);
    }
    if (head == "sgaussian") {
        auto a = args(3);
        return shifted_gaussian_kernel(a[0], a[1], a[2]);
    }
    throw std::invalid_argument("malformed kernel text: '" + std::string(text) +
                                "' (unknown kernel '" + head + "')");
}

} // namespace popdyn
