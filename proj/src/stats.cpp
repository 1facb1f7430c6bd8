#include "bls/stats.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace bls {

namespace {

// series expansion of P(a, x), valid for x < a + 1
double gamma_p_series(double a, double x) {
    double ap = a;
    double sum = 1.0 / a;
    double del = sum;
    for (int i = 0; i < 500; ++i) {
        ap += 1.0;
        del *= x / ap;
        sum += del;
        if (std::abs(del) < std::abs(sum) * 1e-15) break;
    }
    return sum * std::exp(-x + a * std::log(x) - std::lgamma(a));
}

// continued fraction for Q(a, x), valid for x >= a + 1
double gamma_q_cf(double a, double x) {
    const double tiny = 1e-300;
    double b = x + 1.0 - a;
    double c = 1.0 / tiny;
    double d = 1.0 / b;
    double h = d;
    for (int i = 1; i <= 500; ++i) {
        const double an = -static_cast<double>(i) * (static_cast<double>(i) - a);
        b += 2.0;
        d = an * d + b;
        if (std::abs(d) < tiny) d = tiny;
        c = b + an / c;
        if (std::abs(c) < tiny) c = tiny;
        d = 1.0 / d;
        const double delta = d * c;
        h *= delta;
        if (std::abs(delta - 1.0) < 1e-15) break;
    }
    return h * std::exp(-x + a * std::log(x) - std::lgamma(a));
}

}  // namespace

double gamma_q(double a, double x) {
    if (a <= 0) throw std::invalid_argument("gamma_q: a must be > 0");
    if (x < 0) throw std::invalid_argument("gamma_q: x must be >= 0");
    if (x == 0.0) return 1.0;
    if (x < a + 1.0) return 1.0 - gamma_p_series(a, x);
    return gamma_q_cf(a, x);
}

double kolmogorov_tail(double x) {
    if (x <= 0) return 1.0;
    double sum = 0.0;
    for (int k = 1; k <= 100; ++k) {
        const double term = std::exp(-2.0 * k * k * x * x);
        sum += (k % 2 == 1) ? term : -term;
        if (term < 1e-16) break;
    }
    return std::clamp(2.0 * sum, 0.0, 1.0);
}

KsResult ks_two_sample(std::vector<double> a, std::vector<double> b) {
    if (a.empty() || b.empty())
        throw std::invalid_argument("ks_two_sample: empty sample");
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    const double na = static_cast<double>(a.size());
    const double nb = static_cast<double>(b.size());
    size_t i = 0, j = 0;
    double d = 0.0;
    while (i < a.size() && j < b.size()) {
        const double v = std::min(a[i], b[j]);
        while (i < a.size() && a[i] <= v) ++i;
        while (j < b.size() && b[j] <= v) ++j;
        d = std::max(d, std::abs(static_cast<double>(i) / na -
                                 static_cast<double>(j) / nb));
    }
    KsResult r;
    r.statistic = d;
    const double ne = std::sqrt(na * nb / (na + nb));
    r.p_value = kolmogorov_tail((ne + 0.12 + 0.11 / ne) * d);
    return r;
}

Chi2Result chi2_two_sample(const std::vector<long>& a, const std::vector<long>& b) {
    if (a.size() != b.size() || a.empty())
        throw std::invalid_argument("chi2_two_sample: need equal-size nonempty counts");
    // pool sparse categories (combined expected < 5) into one bin
    double ta = 0.0, tb = 0.0;
    for (size_t k = 0; k < a.size(); ++k) {
        ta += static_cast<double>(a[k]);
        tb += static_cast<double>(b[k]);
    }
    if (ta <= 0 || tb <= 0)
        throw std::invalid_argument("chi2_two_sample: empty sample");
    std::vector<double> ca, cb;
    double pa = 0.0, pb = 0.0;
    for (size_t k = 0; k < a.size(); ++k) {
        pa += static_cast<double>(a[k]);
        pb += static_cast<double>(b[k]);
        if (pa + pb >= 5.0 || k + 1 == a.size()) {
            ca.push_back(pa);
            cb.push_back(pb);
            pa = pb = 0.0;
        }
    }
    if (ca.size() >= 2 && ca.back() + cb.back() < 5.0) {
        ca[ca.size() - 2] += ca.back();
        cb[cb.size() - 2] += cb.back();
        ca.pop_back();
        cb.pop_back();
    }
    Chi2Result r;
    if (ca.size() < 2) {
        r.dof = 0;
        return r;
    }
    double stat = 0.0;
    for (size_t k = 0; k < ca.size(); ++k) {
        const double tot = ca[k] + cb[k];
        const double ea = tot * ta / (ta + tb);
        const double eb = tot * tb / (ta + tb);
        if (ea > 0) stat += (ca[k] - ea) * (ca[k] - ea) / ea;
        if (eb > 0) stat += (cb[k] - eb) * (cb[k] - eb) / eb;
    }
    r.statistic = stat;
    r.dof = static_cast<long>(ca.size()) - 1;
    r.p_value = gamma_q(0.5 * static_cast<double>(r.dof), 0.5 * stat);
    return r;
}

Chi2Result chi2_goodness(const std::vector<long>& counts,
                         const std::vector<double>& probs) {
    if (counts.size() != probs.size() || counts.empty())
        throw std::invalid_argument("chi2_goodness: size mismatch or empty");
    double n = 0.0;
    for (long c : counts) n += static_cast<double>(c);
    double stat = 0.0;
    long dof = -1;
    for (size_t k = 0; k < counts.size(); ++k) {
        const double e = n * probs[k];
        if (e <= 0) continue;
        stat += (counts[k] - e) * (counts[k] - e) / e;
        ++dof;
    }
    Chi2Result r;
    r.statistic = stat;
    r.dof = std::max(dof, 0L);
    r.p_value = (r.dof > 0) ? gamma_q(0.5 * static_cast<double>(r.dof), 0.5 * stat) : 1.0;
    return r;
}

DispersionResult poisson_dispersion(const std::vector<long>& counts) {
    if (counts.size() < 2)
        throw std::invalid_argument("poisson_dispersion: need at least 2 counts");
    DispersionResult r;
    r.n = static_cast<long>(counts.size());
    double sum = 0.0;
    for (long c : counts) sum += static_cast<double>(c);
    r.mean = sum / static_cast<double>(r.n);
    double ss = 0.0;
    for (long c : counts) {
        const double dd = static_cast<double>(c) - r.mean;
        ss += dd * dd;
    }
    r.variance = ss / static_cast<double>(r.n - 1);
    r.index = (r.mean > 0) ? r.variance / r.mean : 0.0;
    return r;
}

}  // namespace bls
