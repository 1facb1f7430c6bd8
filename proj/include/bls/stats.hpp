#pragma once

#include <vector>

namespace bls {

struct KsResult {
    double statistic = 0.0;
    double p_value = 1.0;
};

// Two-sample Kolmogorov-Smirnov with the asymptotic p-value. Ties are
// handled by comparing empirical CDFs at the pooled points (conservative
// for discrete data).
KsResult ks_two_sample(std::vector<double> a, std::vector<double> b);

struct Chi2Result {
    double statistic = 0.0;
    double p_value = 1.0;
    long dof = 0;
};

// Two-sample homogeneity chi-square over shared categories. Categories with
// combined expected count below 5 are pooled into the last bin.
Chi2Result chi2_two_sample(const std::vector<long>& a, const std::vector<long>& b);

// One-sample goodness of fit against given probabilities.
Chi2Result chi2_goodness(const std::vector<long>& counts,
                         const std::vector<double>& probs);

struct DispersionResult {
    double index = 0.0;  // sample variance / sample mean
    double mean = 0.0;
    double variance = 0.0;
    long n = 0;
};

DispersionResult poisson_dispersion(const std::vector<long>& counts);

// Upper regularized incomplete gamma Q(a, x), the chi-square tail.
double gamma_q(double a, double x);

// Kolmogorov distribution tail P(K > x).
double kolmogorov_tail(double x);

}  // namespace bls
