#pragma once

namespace bls {

// Exponentially scaled modified Bessel function of integer order,
// e^{-x} I_n(x), for x >= 0. Stable for all x (no overflow): the power
// series is summed outward from its peak term in log space, and a Hankel
// asymptotic expansion takes over for large x and small order.
double scaled_bessel_i(long n, double x);

// 1 + 1/(8x) + 9/(128 x^2) + ... : the scaled large-x expansion of
// sqrt(2 pi x) e^{-x} I_0(x), used by accelerated series tails.
double scaled_i0_correction(double x);

}  // namespace bls
