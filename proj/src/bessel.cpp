#include "bls/bessel.hpp"

#include <cmath>
#include <cstdlib>
#include <stdexcept>

namespace bls {

namespace {

constexpr double kTwoPi = 6.283185307179586476925287;

// Hankel expansion for e^{-x} I_n(x), valid when 4n^2 << x.
double asymptotic_scaled(long n, double x) {
    const double mu = 4.0 * static_cast<double>(n) * static_cast<double>(n);
    double term = 1.0, sum = 1.0;
    double prev = std::abs(term);
    for (int k = 0; k < 30; ++k) {
        const double tk = 2.0 * k + 1.0;
        term *= -(mu - tk * tk) / (8.0 * x * (k + 1.0));
        if (std::abs(term) > prev) break;  // divergent tail reached
        sum += term;
        prev = std::abs(term);
        if (std::abs(term) < 1e-17 * std::abs(sum)) break;
    }
    return sum / std::sqrt(kTwoPi * x);
}

// Power series summed outward from the peak term, carried in log space so
// the e^{-x} factor never underflows.
double series_scaled(long n, double x) {
    const double h = 0.5 * x;
    // peak index of t_k = h^{n+2k} / (k! (n+k)!)
    const double kpeak_f = 0.5 * (std::sqrt(static_cast<double>(n) * n + x * x) - n);
    const long kpeak = std::max<long>(0, static_cast<long>(kpeak_f));
    const double log_peak = (n + 2.0 * kpeak) * std::log(h) - std::lgamma(kpeak + 1.0) -
                            std::lgamma(n + kpeak + 1.0) - x;
    if (log_peak < -745.0) return 0.0;  // result below double range

    // sum relative to the peak term
    double sum = 1.0;
    double t = 1.0;
    for (long k = kpeak + 1;; ++k) {
        t *= h * h / (static_cast<double>(k) * (n + k));
        sum += t;
        if (t < 1e-18 * sum) break;
    }
    t = 1.0;
    for (long k = kpeak; k > 0; --k) {
        t *= static_cast<double>(k) * (n + k) / (h * h);
        sum += t;
        if (t < 1e-18 * sum) break;
    }
    return std::exp(log_peak) * sum;
}

}  // namespace

double scaled_bessel_i(long n, double x) {
    if (x < 0) throw std::domain_error("scaled_bessel_i: x must be >= 0");
    n = std::labs(n);  // I_{-n} = I_n
    if (x == 0.0) return n == 0 ? 1.0 : 0.0;
    if (x >= 60.0 && 4.0 * static_cast<double>(n) * n <= 0.5 * x)
        return asymptotic_scaled(n, x);
    return series_scaled(n, x);
}

double scaled_i0_correction(double x) {
    double term = 1.0, sum = 1.0;
    double prev = 1.0;
    for (int k = 0; k < 30; ++k) {
        const double tk = 2.0 * k + 1.0;
        term *= tk * tk / (8.0 * x * (k + 1.0));
        if (term > prev) break;
        sum += term;
        prev = term;
        if (term < 1e-17 * sum) break;
    }
    return sum;
}

}  // namespace bls
