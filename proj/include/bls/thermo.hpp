#pragma once

#include "bls/params.hpp"

namespace bls {

// Extended real with an explicit +infinity tag (floating infinity is never
// used in comparisons).
struct ExtendedReal {
    bool is_inf = false;
    double value = 0.0;

    static ExtendedReal infinity() { return {true, 0.0}; }
    static ExtendedReal finite(double v) { return {false, v}; }
    bool operator==(const ExtendedReal&) const = default;
};

// rho_c = beta * sum_{j>=1} p_{beta j}(0); finite iff d >= 3.
// Truncation error certified below tol.
double critical_density(const ModelParams& params, double tol = 1e-8);

// Independent evaluation of rho_c: exact summation up to a modest index, then
// a Gaussian-comparison (local CLT) tail with Euler-Maclaurin correction.
double critical_density_accelerated(const ModelParams& params, double tol = 1e-8);

// rho(mu) = beta * sum_j e^{beta mu j} p_{beta j}(0)
double rho(const ModelParams& params, double mu, double tol = 1e-8);

// M(mu) = sum_j e^{beta mu j} p_{beta j}(0) / j
double M_mass(const ModelParams& params, double mu, double tol = 1e-8);

// b(x): the unique mu <= 0 with rho(mu) = x, for 0 < x <= rho_c.
double invert_density(const ModelParams& params, double x, double tol = 1e-8);

// phi(t) = M(mu+t) - M(mu) for t <= -mu, +infinity otherwise.
ExtendedReal log_mgf(const ModelParams& params, double t);

// phi*(x): M(mu) at x = 0; x(b(x)-mu) - M(b(x)) + M(mu) on (0, rho_c];
// +infinity above rho_c.
ExtendedReal rate_function(const ModelParams& params, double x);

// sum_{j>n} p_{beta j}(0) / j at mu = 0 (tail of the loop-measure mass).
double tail_mass(const ModelParams& params, long n, double tol = 1e-10);

// beta * sum_{j>n} e^{beta mu j} p_{beta j}(0): the density truncation bound
// reported with cutoff soup samples.
double density_tail(const ModelParams& params, long n);

// Markovian analogue: int_{beta n}^infty t^{-1} p_t(0) dt.
double markovian_tail_mass(const ModelParams& params, long n);

// Resolved long-loop tail constant: tail_mass(n) ~ c * n^{-d/2} with
// c = (d/(2 pi))^{d/2} * (2/d) * beta^{-d/2}.
double tail_constant(const ModelParams& params);

struct ThermoReport {
    double rho_c = 0.0;
    double c2 = 0.0;  // loop mass per site, sum_j p_{beta j}(0)/j
};

ThermoReport thermo_report(const ModelParams& params, double tol = 1e-8);

}  // namespace bls
