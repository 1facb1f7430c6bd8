#include "bls/kernels.hpp"

#include <cmath>
#include <stdexcept>

#include "bls/bessel.hpp"

namespace bls {

namespace {
constexpr double kTwoPi = 6.283185307179586476925287;

// 16-point Gauss-Legendre nodes/weights on [-1, 1]
constexpr int kGL = 16;
constexpr double kGLx[kGL] = {
    -0.9894009349916499, -0.9445750230732326, -0.8656312023878318, -0.7554044083550030,
    -0.6178762444026438, -0.4580167776572274, -0.2816035507792589, -0.0950125098376374,
    0.0950125098376374,  0.2816035507792589,  0.4580167776572274,  0.6178762444026438,
    0.7554044083550030,  0.8656312023878318,  0.9445750230732326,  0.9894009349916499};
constexpr double kGLw[kGL] = {
    0.0271524594117541, 0.0622535239386479, 0.0951585116824928, 0.1246289712555339,
    0.1495959888165767, 0.1691565193950025, 0.1826034150449236, 0.1894506104550685,
    0.1894506104550685, 0.1826034150449236, 0.1691565193950025, 0.1495959888165767,
    0.1246289712555339, 0.0951585116824928, 0.0622535239386479, 0.0271524594117541};

double glpanel(double a, double b, const ModelParams& p, std::span<const int32_t> x) {
    const double c = 0.5 * (a + b), h = 0.5 * (b - a);
    double s = 0.0;
    for (int i = 0; i < kGL; ++i) s += kGLw[i] * transition_kernel(p, c + h * kGLx[i], x);
    return s * h;
}
}  // namespace

double transition_kernel(const ModelParams& params, double t, std::span<const int32_t> x) {
    params.validate();
    check_dim(params, x);
    if (t < 0) throw std::invalid_argument("transition_kernel: t must be >= 0");
    if (t == 0.0) {
        for (int32_t c : x)
            if (c != 0) return 0.0;
        return 1.0;
    }
    const double s = t / params.d;
    double prod = 1.0;
    for (int32_t c : x) {
        prod *= scaled_bessel_i(c, s);
        if (prod == 0.0) return 0.0;
    }
    return prod;
}

double transition_kernel(const ModelParams& params, double t, const Site& x) {
    return transition_kernel(params, t, std::span<const int32_t>(x));
}

double transition_kernel_origin(const ModelParams& params, double t) {
    params.validate();
    if (t < 0) throw std::invalid_argument("transition_kernel: t must be >= 0");
    if (t == 0.0) return 1.0;
    return std::pow(scaled_bessel_i(0, t / params.d), params.d);
}

double gaussian_kernel(const ModelParams& params, double t, std::span<const double> x) {
    params.validate();
    if (static_cast<int>(x.size()) != params.d)
        throw std::invalid_argument("gaussian_kernel: dimension mismatch");
    if (!(t > 0)) throw std::invalid_argument("gaussian_kernel: t must be > 0");
    double q = 0.0;
    for (double c : x) q += c * c;
    return std::pow(kTwoPi * t, -0.5 * params.d) * std::exp(-q / (2.0 * t));
}

double gaussian_kernel_origin(const ModelParams& params, double t) {
    if (!(t > 0)) throw std::invalid_argument("gaussian_kernel: t must be > 0");
    return std::pow(kTwoPi * t, -0.5 * params.d);
}

double kernel_comparison(const ModelParams& params, double t) {
    params.validate();
    if (!(t > 0)) throw std::invalid_argument("kernel_comparison: t must be > 0");
    const double s = t / params.d;
    // (e^{-s} I_0(s) * sqrt(2 pi s))^d
    return std::pow(scaled_bessel_i(0, s) * std::sqrt(kTwoPi * s), params.d);
}

double green_asymptotic_constant(int d) {
    if (d <= 2) throw std::domain_error("green_asymptotic_constant: d must be >= 3");
    return 0.5 * d * std::tgamma(0.5 * d - 1.0) * std::pow(M_PI, -0.5 * d);
}

GreenResult green_function(const ModelParams& params, std::span<const int32_t> x,
                           double tol) {
    params.validate();
    params.require_transient();
    check_dim(params, x);

    double q = 0.0;
    for (int32_t c : x) q += static_cast<double>(c) * c;

    // crossover chosen so the two-term-corrected tail is below tol
    double T = std::max(500.0, 30.0 * (1.0 + q));
    const int d = params.d;
    const double C = std::pow(d / kTwoPi, 0.5 * d);

    // per-coordinate 1/s expansion coefficients of sqrt(2 pi s) e^{-s} I_m(s)
    double sum_c1 = 0.0, sum_c2 = 0.0, prod_c1_pairs = 0.0;
    {
        double acc = 0.0;
        for (int32_t c : x) {
            const double m2 = 4.0 * static_cast<double>(c) * c;
            const double c1 = -(m2 - 1.0) / 8.0;
            const double c2 = (m2 - 1.0) * (m2 - 9.0) / 128.0;
            prod_c1_pairs += acc * c1;
            acc += c1;
            sum_c1 += c1;
            sum_c2 += c2;
        }
    }
    auto tail = [&](double T0, double* err) {
        const double a = 0.5 * d - 1.0;
        const double I0 = std::pow(T0, -a) / a;
        const double I1 = std::pow(T0, -a - 1.0) / (a + 1.0);
        const double I2 = std::pow(T0, -a - 2.0) / (a + 2.0);
        const double second = d * d * (sum_c2 + prod_c1_pairs) * I2;
        // third order is unavailable; bound it by the magnitude of the second
        // order term scaled by its own decay factor
        *err = C * std::abs(second) * (std::abs(sum_c1) + 1.0) * d / T0;
        return C * (I0 + d * sum_c1 * I1 + second);
    };

    double terr = 0.0;
    double tl = tail(T, &terr);
    int guard = 0;
    while (terr > 0.25 * tol && guard++ < 40) {
        T *= 2.0;
        tl = tail(T, &terr);
    }
    if (terr > tol) throw std::runtime_error("green_function: cannot certify tolerance");

    // geometric panels [0,1],[1,2],...,[T/2,T]
    double integral = glpanel(0.0, 1.0, params, x);
    double a = 1.0;
    while (a < T) {
        double b = std::min(2.0 * a, T);
        integral += glpanel(a, b, params, x);
        a = b;
    }
    return {integral + tl, terr};
}

GreenResult green_function(const ModelParams& params, const Site& x, double tol) {
    return green_function(params, std::span<const int32_t>(x), tol);
}

}  // namespace bls
