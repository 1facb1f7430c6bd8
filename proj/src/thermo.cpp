#include "bls/thermo.hpp"

#include <cmath>
#include <stdexcept>

#include "bls/bessel.hpp"
#include "bls/kernels.hpp"

namespace bls {

namespace {

constexpr double kTwoPi = 6.283185307179586476925287;

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

// p_{beta t}(0) as a function of continuous t
double p0_at(const ModelParams& p, double t) {
    return std::pow(scaled_bessel_i(0, p.beta * t / p.d), p.d);
}

// Closed-form tail int_T^infty t^{-extra} p_{beta t}(0) dt from the three-term
// local-CLT expansion; valid for beta*T/d >> 1.
double analytic_p0_tail(const ModelParams& p, double T, int extra) {
    const int d = p.d;
    const double C = std::pow(d / (kTwoPi * p.beta), 0.5 * d);
    // (1 + 1/(8s) + 9/(128 s^2))^d in powers of 1/t, s = beta t / d
    const double sd = static_cast<double>(d) / p.beta;  // s = t / sd inverse
    const double a1 = d * (1.0 / 8.0) * sd;
    const double a2 = (d * (9.0 / 128.0) + 0.5 * d * (d - 1) / 64.0) * sd * sd;
    const double base = 0.5 * d + extra - 1.0;  // integral exponent - 1
    const double I0 = std::pow(T, -base) / base;
    const double I1 = std::pow(T, -base - 1.0) / (base + 1.0);
    const double I2 = std::pow(T, -base - 2.0) / (base + 2.0);
    return C * (I0 + a1 * I1 + a2 * I2);
}

// Numeric tail of the same integral using the exact kernel; substitution
// t = T / v^2 turns the power-law decay into a bounded smooth integrand.
double numeric_p0_tail(const ModelParams& p, double T, int extra, double mu = 0.0) {
    auto g = [&](double v) {
        const double t = T / (v * v);
        double val = p0_at(p, t) * 2.0 * T / (v * v * v);
        if (extra == 1) val /= t;
        if (mu < 0.0) val *= std::exp(p.beta * mu * t);
        return val;
    };
    // panels on (0,1]; integrand -> const * v^{d-3+2*extra} as v -> 0
    double total = 0.0;
    const int panels = 8;
    for (int pi = 0; pi < panels; ++pi) {
        const double a = static_cast<double>(pi) / panels;
        const double b = static_cast<double>(pi + 1) / panels;
        const double c = 0.5 * (a + b), h = 0.5 * (b - a);
        double s = 0.0;
        for (int i = 0; i < kGL; ++i) s += kGLw[i] * g(c + h * kGLx[i]);
        total += s * h;
    }
    return total;
}

// sum_{j > J} f(j) with f smooth ~ power law: midpoint Euler-Maclaurin,
// tail integral supplied by the caller.
struct SeriesTail {
    double analytic;
    double numeric;
};

void require_convergent(const ModelParams& p, double mu) {
    if (mu == 0.0 && p.d <= 2)
        throw std::domain_error("series divergent: mu = 0 requires d >= 3");
}

double series_sum(const ModelParams& p, double mu, int extra, long head,
                  bool analytic_tail) {
    // sum_j e^{beta mu j} p_{beta j}(0) / j^extra, exact head + tail integral
    require_convergent(p, mu);
    double s = 0.0;
    for (long j = 1; j <= head; ++j) {
        double term = p0_at(p, static_cast<double>(j));
        if (extra == 1) term /= static_cast<double>(j);
        if (mu < 0.0) term *= std::exp(p.beta * mu * j);
        s += term;
        if (mu < 0.0 && term < 1e-18 * s && j > 8) return s;  // geometric cutoff
    }
    const double T = head + 0.5;
    if (mu == 0.0 && analytic_tail) return s + analytic_p0_tail(p, T, extra);
    return s + numeric_p0_tail(p, T, extra, mu);
}

}  // namespace

double critical_density(const ModelParams& params, double tol) {
    params.validate();
    params.require_transient();
    (void)tol;  // head length fixed well below 1e-10 truncation error
    return params.beta * series_sum(params, 0.0, 0, 100000, false);
}

double critical_density_accelerated(const ModelParams& params, double tol) {
    params.validate();
    params.require_transient();
    (void)tol;
    return params.beta * series_sum(params, 0.0, 0, 2000, true);
}

double rho(const ModelParams& params, double mu, double tol) {
    params.validate();
    if (mu > 0) throw std::domain_error("rho: mu must be <= 0");
    if (mu == 0.0) return critical_density(params, tol);
    return params.beta * series_sum(params, mu, 0, 20000, false);
}

double M_mass(const ModelParams& params, double mu, double tol) {
    params.validate();
    if (mu > 0) throw std::domain_error("M_mass: mu must be <= 0");
    (void)tol;
    return series_sum(params, mu, 1, 20000, false);
}

double invert_density(const ModelParams& params, double x, double tol) {
    params.validate();
    if (!(x > 0)) throw std::domain_error("invert_density: x must be > 0");
    const double rc = critical_density(params, tol);
    if (x > rc + tol) throw std::domain_error("invert_density: x exceeds rho_c, no mu <= 0 solves rho(mu) = x");
    if (x >= rc) return 0.0;

    double lo = -1.0;
    while (rho(params, lo, tol) > x) lo *= 2.0;
    double hi = 0.0;
    for (int it = 0; it < 200; ++it) {
        const double mid = 0.5 * (lo + hi);
        const double r = rho(params, mid, tol);
        if (std::abs(r - x) < 0.5 * tol) return mid;
        (r > x ? hi : lo) = mid;
        if (hi - lo < 1e-15 * std::max(1.0, std::abs(lo))) break;
    }
    return 0.5 * (lo + hi);
}

ExtendedReal log_mgf(const ModelParams& params, double t) {
    params.validate();
    if (t > -params.mu) return ExtendedReal::infinity();
    return ExtendedReal::finite(M_mass(params, params.mu + t) - M_mass(params, params.mu));
}

ExtendedReal rate_function(const ModelParams& params, double x) {
    params.validate();
    if (x < 0) return ExtendedReal::infinity();
    if (x == 0.0) return ExtendedReal::finite(M_mass(params, params.mu));
    const double rc = critical_density(params);
    if (x > rc) return ExtendedReal::infinity();
    const double b = invert_density(params, x);
    return ExtendedReal::finite(x * (b - params.mu) - M_mass(params, b) +
                                M_mass(params, params.mu));
}

double tail_mass(const ModelParams& params, long n, double tol) {
    params.validate();
    params.require_transient();
    if (params.mu != 0.0) throw std::domain_error("tail_mass: defined at mu = 0");
    if (n < 0) throw std::invalid_argument("tail_mass: n must be >= 0");
    (void)tol;
    double s = 0.0;
    const long head_end = n + 20000;
    for (long j = n + 1; j <= head_end; ++j)
        s += p0_at(params, static_cast<double>(j)) / static_cast<double>(j);
    return s + analytic_p0_tail(params, head_end + 0.5, 1);
}

double density_tail(const ModelParams& params, long n) {
    params.validate();
    if (n < 0) throw std::invalid_argument("density_tail: n must be >= 0");
    double s = 0.0;
    if (params.mu < 0.0) {
        for (long j = n + 1; j <= n + 400000; ++j) {
            const double term =
                std::exp(params.beta * params.mu * j) * p0_at(params, static_cast<double>(j));
            s += term;
            if (term < 1e-18 * std::max(s, 1e-300) && j > n + 8) break;
        }
        return params.beta * s;
    }
    params.require_transient();
    const long head_end = n + 20000;
    for (long j = n + 1; j <= head_end; ++j) s += p0_at(params, static_cast<double>(j));
    return params.beta * (s + analytic_p0_tail(params, head_end + 0.5, 0));
}

double markovian_tail_mass(const ModelParams& params, long n) {
    params.validate();
    params.require_transient();
    const double T = params.beta * n;
    const double Tcross = std::max(T, 400.0);
    double head = 0.0;
    if (T < Tcross) {
        // quadrature of t^{-1} p_t(0) over [T, Tcross] in geometric panels
        double a = std::max(T, 1e-12);
        while (a < Tcross) {
            const double b = std::min(2.0 * a, Tcross);
            const double c = 0.5 * (a + b), h = 0.5 * (b - a);
            double s = 0.0;
            for (int i = 0; i < kGL; ++i) {
                const double t = c + h * kGLx[i];
                s += kGLw[i] * transition_kernel_origin(params, t) / t;
            }
            head += s * h;
            a = b;
        }
    }
    // analytic tail beyond Tcross, expressed in the j variable t = beta*j
    ModelParams q = params;
    return head + analytic_p0_tail(q, Tcross / params.beta, 1);
}

double tail_constant(const ModelParams& params) {
    params.validate();
    params.require_transient();
    const int d = params.d;
    return std::pow(d / kTwoPi, 0.5 * d) * (2.0 / d) * std::pow(params.beta, -0.5 * d);
}

ThermoReport thermo_report(const ModelParams& params, double tol) {
    ThermoReport r;
    ModelParams at_zero = params;
    at_zero.mu = 0.0;  // rho_c and c2 are mu = 0 quantities
    r.rho_c = critical_density(at_zero, tol);
    r.c2 = tail_mass(at_zero, 0, tol);
    return r;
}

}  // namespace bls
