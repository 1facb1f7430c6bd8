#include "bls/rng.hpp"

#include <cmath>

namespace bls {

namespace {
// log(k!) with a small cache for the inversion range
double log_factorial(long k) {
    static const double table[16] = {
        0.0, 0.0, 0.6931471805599453, 1.791759469228055, 3.1780538303479458,
        4.787491742782046, 6.579251212010101, 8.525161361065415, 10.60460290274525,
        12.801827480081469, 15.104412573075516, 17.502307845873887, 19.987214495661885,
        22.552163853123425, 25.19122118273868, 27.89927138384089};
    if (k < 16) return table[k];
    return std::lgamma(static_cast<double>(k) + 1.0);
}
}  // namespace

long RngStream::poisson(double mean) {
    if (mean <= 0.0) return 0;
    if (mean < 12.0) {
        // multiplication method
        const double L = std::exp(-mean);
        long k = 0;
        double prod = uniform();
        while (prod > L) {
            ++k;
            prod *= uniform();
        }
        return k;
    }
    // Hoermann's PTRS transformed rejection for large means
    const double b = 0.931 + 2.53 * std::sqrt(mean);
    const double a = -0.059 + 0.02483 * b;
    const double inv_alpha = 1.1239 + 1.1328 / (b - 3.4);
    const double v_r = 0.9277 - 3.6224 / (b - 2.0);
    const double log_mean = std::log(mean);
    for (;;) {
        double u = uniform() - 0.5;
        double v = uniform();
        double us = 0.5 - std::abs(u);
        long k = static_cast<long>(std::floor((2.0 * a / us + b) * u + mean + 0.43));
        if (us >= 0.07 && v <= v_r) return k;
        if (k < 0 || (us < 0.013 && v > us)) continue;
        if (std::log(v * inv_alpha / (a / (us * us) + b)) <=
            k * log_mean - mean - log_factorial(k))
            return k;
    }
}

}  // namespace bls
