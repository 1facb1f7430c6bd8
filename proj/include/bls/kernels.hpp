#pragma once

#include <span>

#include "bls/params.hpp"

namespace bls {

// p_t(x): transition kernel of the rate-1 continuous-time simple random walk
// on Z^d (jump rate 1/(2d) per direction). Factorizes over coordinates:
// p_t(x) = prod_i e^{-t/d} I_{x_i}(t/d).
double transition_kernel(const ModelParams& params, double t, std::span<const int32_t> x);
double transition_kernel(const ModelParams& params, double t, const Site& x);

// p_t(0), the return density.
double transition_kernel_origin(const ModelParams& params, double t);

// Gaussian density (2 pi t)^{-d/2} exp(-|x|^2 / 2t) on R^d.
double gaussian_kernel(const ModelParams& params, double t, std::span<const double> x);
double gaussian_kernel_origin(const ModelParams& params, double t);

// p_t(0) / gauss_{t/d}(0); tends to 1 as t -> infinity (local CLT).
double kernel_comparison(const ModelParams& params, double t);

struct GreenResult {
    double value = 0.0;
    double error = 0.0;  // certified truncation bound
};

// G(0,x) = int_0^infty p_t(x) dt for d >= 3, with certified truncation error
// below tol. Quadrature up to a crossover time plus an asymptotic tail with
// two correction orders.
GreenResult green_function(const ModelParams& params, std::span<const int32_t> x,
                           double tol = 1e-9);
GreenResult green_function(const ModelParams& params, const Site& x, double tol = 1e-9);

// Leading constant of G(0,x) ~ green_asymptotic_constant(d) * |x|^{2-d}.
double green_asymptotic_constant(int d);

}  // namespace bls
