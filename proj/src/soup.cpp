#include "bls/soup.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "bls/bessel.hpp"
#include "bls/thermo.hpp"

namespace bls {

namespace {

double p0(const ModelParams& p, long j) {
    return std::pow(scaled_bessel_i(0, p.beta * j / p.d), p.d);
}

constexpr long kBulkCap = 256;

}  // namespace

long LatticeBox::volume() const {
    long v = 1;
    for (int i = 0; i < dim; ++i) v *= side;
    return v;
}

int LatticeBox::lo(int axis) const {
    const int base = -(side / 2);
    if (offset.empty()) return base;
    return base + offset[static_cast<size_t>(axis)];
}

bool LatticeBox::contains(std::span<const int32_t> x) const {
    for (int i = 0; i < dim; ++i) {
        const int l = lo(i);
        if (x[static_cast<size_t>(i)] < l || x[static_cast<size_t>(i)] >= l + side)
            return false;
    }
    return true;
}

bool LatticeBox::contains(const PathSkeleton& path) const {
    const size_t n = path.jump_count();
    for (size_t k = 0; k <= n; ++k)
        if (!contains(path.site_after(k))) return false;
    return true;
}

Site LatticeBox::uniform_site(RngStream& rng) const {
    Site s(static_cast<size_t>(dim));
    for (int i = 0; i < dim; ++i)
        s[static_cast<size_t>(i)] =
            lo(i) + static_cast<int32_t>(rng.uniform_int(static_cast<uint64_t>(side)));
    return s;
}

void LatticeBox::validate() const {
    if (side < 1) throw std::invalid_argument("LatticeBox: side must be >= 1");
    if (dim < 1) throw std::invalid_argument("LatticeBox: dim must be >= 1");
    if (!offset.empty() && static_cast<int>(offset.size()) != dim)
        throw std::invalid_argument("LatticeBox: offset dimension mismatch");
}

double SoupSample::total_duration() const {
    double t = 0.0;
    for (const Loop& l : loops) t += l.length();
    return t;
}

SoupIntensity::SoupIntensity(const LatticeBox& box, const ModelParams& params,
                             long j_max) {
    box.validate();
    params.validate();
    if (params.mu == 0.0) {
        params.require_transient();
        if (j_max <= 0)
            throw std::invalid_argument("SoupIntensity: mu = 0 requires a finite j_max");
    }
    if (j_max <= 0) j_max = 100000;
    j_max_ = j_max;
    bulk_ = std::min(j_max, kBulkCap);
    volume_ = static_cast<double>(box.volume());
    beta_ = params.beta;

    bulk_mean_.resize(static_cast<size_t>(bulk_));
    for (long j = 1; j <= bulk_; ++j) {
        const double lam =
            std::exp(params.beta * params.mu * j) * p0(params, j) / static_cast<double>(j);
        bulk_mean_[static_cast<size_t>(j - 1)] = volume_ * lam;
        total_mean_ += volume_ * lam;
        if (params.mu < 0.0 && volume_ * lam < 1e-18 * std::max(total_mean_, 1e-300) &&
            j > 8) {
            bulk_ = j;
            bulk_mean_.resize(static_cast<size_t>(bulk_));
            j_max_ = std::max(j_max_, bulk_);
            break;
        }
    }
    if (j_max_ > bulk_ && !(params.mu < 0.0 && bulk_ < kBulkCap)) {
        tail_cdf_.reserve(static_cast<size_t>(j_max_ - bulk_));
        double cum = 0.0;
        for (long j = bulk_ + 1; j <= j_max_; ++j) {
            const double lam = std::exp(params.beta * params.mu * j) * p0(params, j) /
                               static_cast<double>(j);
            cum += volume_ * lam;
            tail_cdf_.push_back(cum);
        }
        tail_mean_ = cum;
        total_mean_ += cum;
    }
    truncated_tail_mass_ = density_tail(params, j_max_);
}

double SoupIntensity::lambda(long j) const {
    if (j < 1 || j > j_max_) return 0.0;
    if (j <= bulk_) return bulk_mean_[static_cast<size_t>(j - 1)] / volume_;
    const size_t i = static_cast<size_t>(j - bulk_ - 1);
    if (i >= tail_cdf_.size()) return 0.0;
    const double prev = (i == 0) ? 0.0 : tail_cdf_[i - 1];
    return (tail_cdf_[i] - prev) / volume_;
}

std::vector<long> SoupIntensity::sample_windings(RngStream& rng) const {
    std::vector<long> windings;
    for (long j = 1; j <= bulk_; ++j) {
        const long c = rng.poisson(bulk_mean_[static_cast<size_t>(j - 1)]);
        for (long k = 0; k < c; ++k) windings.push_back(j);
    }
    if (tail_mean_ > 0.0) {
        const long c = rng.poisson(tail_mean_);
        for (long k = 0; k < c; ++k) {
            const double u = rng.uniform() * tail_mean_;
            const auto it = std::lower_bound(tail_cdf_.begin(), tail_cdf_.end(), u);
            windings.push_back(bulk_ + 1 + (it - tail_cdf_.begin()));
        }
    }
    return windings;
}

double SoupIntensity::sample_total_duration(RngStream& rng) const {
    double total = 0.0;
    for (long j = 1; j <= bulk_; ++j)
        total += beta_ * static_cast<double>(j) *
                 static_cast<double>(rng.poisson(bulk_mean_[static_cast<size_t>(j - 1)]));
    if (tail_mean_ > 0.0) {
        const long c = rng.poisson(tail_mean_);
        for (long k = 0; k < c; ++k) {
            const double u = rng.uniform() * tail_mean_;
            const auto it = std::lower_bound(tail_cdf_.begin(), tail_cdf_.end(), u);
            total += beta_ * static_cast<double>(bulk_ + 1 + (it - tail_cdf_.begin()));
        }
    }
    return total;
}

SoupSample sample_soup(const SoupIntensity& intensity, const LatticeBox& box,
                       const ModelParams& params, RngStream& rng) {
    SoupSample s;
    s.box = box;
    s.params = params;
    s.j_max = intensity.j_max();
    s.truncated_tail_mass = intensity.truncated_tail_mass();
    const std::vector<long> windings = intensity.sample_windings(rng);
    for (long j : windings) {
        if (box.boundary == LatticeBox::Boundary::kDirichlet) {
            // thinning: keep the bridge only when it stays inside the box
            const Site x = box.uniform_site(rng);
            Loop l = sample_loop(params, x, j, rng);
            if (box.contains(l.skel)) s.loops.push_back(std::move(l));
        } else {
            const Site x = box.uniform_site(rng);
            s.loops.push_back(sample_loop(params, x, j, rng));
        }
    }
    return s;
}

SoupSample sample_soup(const LatticeBox& box, const ModelParams& params, long j_max,
                       RngStream& rng) {
    SoupIntensity intensity(box, params, j_max);
    return sample_soup(intensity, box, params, rng);
}

OccupationField occupation_field(const SoupSample& sample) {
    OccupationField f;
    f.normalizer = static_cast<double>(sample.box.volume());
    for (const Loop& l : sample.loops) {
        const PathSkeleton& p = l.skel;
        const size_t n = p.jump_count();
        double prev = 0.0;
        for (size_t k = 0; k <= n; ++k) {
            const double end = (k < n) ? p.jump_times[k] : p.duration;
            if (end > prev) f.values[pack_site(p.site_after(k))] += end - prev;
            prev = std::max(prev, end);
        }
    }
    return f;
}

double mean_density(const SoupSample& sample) {
    return sample.total_duration() / static_cast<double>(sample.box.volume());
}

Estimate exceedance_probability(const LatticeBox& box, const ModelParams& params,
                                double rho_target, long j_max, long n_reps,
                                RngStream& rng) {
    if (n_reps < 1) throw std::invalid_argument("exceedance_probability: n_reps >= 1");
    if (rho_target < 0)
        throw std::invalid_argument("exceedance_probability: rho_target >= 0");
    const SoupIntensity intensity(box, params, j_max);
    const double vol = static_cast<double>(box.volume());
    long hits_count = 0;
    for (long r = 0; r < n_reps; ++r) {
        RngStream sub = rng.substream(static_cast<uint64_t>(r));
        if (intensity.sample_total_duration(sub) / vol > rho_target) ++hits_count;
    }
    const double p = static_cast<double>(hits_count) / static_cast<double>(n_reps);
    Estimate e;
    e.value = p;
    e.std_error = std::sqrt(std::max(p * (1.0 - p), 1.0 / n_reps) / n_reps);
    return e;
}

long default_j_max(const LatticeBox& box, const ModelParams& params, double rho_eps) {
    if (rho_eps > 0.0) {
        const double threshold = rho_eps * static_cast<double>(box.volume()) / params.beta;
        return 4 * static_cast<long>(std::ceil(threshold));
    }
    return 10000;
}

}  // namespace bls
