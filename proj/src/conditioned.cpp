#include "bls/conditioned.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

#include "bls/bessel.hpp"
#include "bls/stats.hpp"
#include "bls/thermo.hpp"

namespace bls {

namespace {

double p0(const ModelParams& p, long j) {
    return std::pow(scaled_bessel_i(0, p.beta * j / p.d), p.d);
}

ModelParams at_mu_zero(const ModelParams& params) {
    ModelParams q = params;
    q.mu = 0.0;
    return q;
}

// zero-truncated Poisson(z): the normalized weights z^{k-1}/k!
long zt_poisson(double z, RngStream& rng) {
    for (;;) {
        const long k = rng.poisson(z);
        if (k > 0) return k;
    }
}

double occupation_at_origin(const SoupSample& s) {
    const Site zero = origin(s.box.dim);
    double t = 0.0;
    for (const Loop& l : s.loops) t += local_time(l, zero);
    return t;
}

}  // namespace

std::vector<LatticeBox> ConditionedConfig::grid_boxes() const {
    box.validate();
    if (grid_side < 1) throw std::invalid_argument("ConditionedConfig: grid_side >= 1");
    const int d = box.dim;
    const long total = [&] {
        long t = 1;
        for (int i = 0; i < d; ++i) t *= grid_side;
        return t;
    }();
    std::vector<LatticeBox> boxes;
    boxes.reserve(static_cast<size_t>(total));
    for (long idx = 0; idx < total; ++idx) {
        LatticeBox b = box;
        b.offset = origin(d);
        long rem = idx;
        for (int i = 0; i < d; ++i) {
            const int g = static_cast<int>(rem % grid_side);
            rem /= grid_side;
            b.offset[static_cast<size_t>(i)] =
                static_cast<int32_t>((g - grid_side / 2) * box.side);
        }
        boxes.push_back(std::move(b));
    }
    return boxes;
}

double z_lambda(const LatticeBox& box, const ModelParams& params, double rho_eps) {
    box.validate();
    if (!(rho_eps > 0)) throw std::invalid_argument("z_lambda: rho_eps must be > 0");
    const double threshold = rho_eps * static_cast<double>(box.volume()) / params.beta;
    const long j_min = static_cast<long>(std::floor(threshold)) + 1;
    return static_cast<double>(box.volume()) * tail_mass(at_mu_zero(params), j_min - 1);
}

BigLoopLaw::BigLoopLaw(const LatticeBox& box, const ModelParams& params,
                       double rho_eps, long cut_multiplier)
    : box_(box), params_(at_mu_zero(params)) {
    box.validate();
    params_.validate();
    params_.require_transient();
    if (!(rho_eps > 0)) throw std::invalid_argument("BigLoopLaw: rho_eps must be > 0");
    const double threshold = rho_eps * static_cast<double>(box.volume()) / params_.beta;
    j_min_ = static_cast<long>(std::floor(threshold)) + 1;
    j_cut_ = j_min_ * std::max(cut_multiplier, 2L);
    z_ = static_cast<double>(box.volume()) * tail_mass(params_, j_min_ - 1);
    cdf_.reserve(static_cast<size_t>(j_cut_ - j_min_ + 1));
    double cum = 0.0;
    for (long j = j_min_; j <= j_cut_; ++j) {
        cum += p0(params_, j) / static_cast<double>(j);
        cdf_.push_back(cum);
    }
    table_mass_ = cum;
}

double BigLoopLaw::table_coverage() const {
    return table_mass_ / (z_ / static_cast<double>(box_.volume()));
}

long BigLoopLaw::median_winding() const {
    const auto it =
        std::lower_bound(cdf_.begin(), cdf_.end(), 0.5 * table_mass_);
    return j_min_ + (it - cdf_.begin());
}

long BigLoopLaw::sample_winding(RngStream& rng) const {
    const double u = rng.uniform() * table_mass_;
    const auto it = std::lower_bound(cdf_.begin(), cdf_.end(), u);
    return j_min_ + (it - cdf_.begin());
}

Loop BigLoopLaw::sample(RngStream& rng) const {
    const long j = sample_winding(rng);
    Site x = box_.uniform_site(rng);
    return sample_loop(params_, x, j, rng);
}

Loop big_loop_sample(const BigLoopLaw& law, RngStream& rng) {
    return law.sample(rng);
}

RejectionSample rejection_conditioned_sample(const LatticeBox& box,
                                             const ModelParams& params, double rho,
                                             long j_max, RngStream& rng,
                                             long max_attempts) {
    if (rho < 0) throw std::invalid_argument("rejection_conditioned_sample: rho >= 0");
    if (max_attempts < 1)
        throw std::invalid_argument("rejection_conditioned_sample: max_attempts >= 1");
    const SoupIntensity intensity(box, params, j_max);
    const double vol = static_cast<double>(box.volume());
    for (long attempt = 0; attempt < max_attempts; ++attempt) {
        RngStream sub = rng.substream(static_cast<uint64_t>(attempt));
        const std::vector<long> windings = intensity.sample_windings(sub);
        double total = 0.0;
        for (long j : windings) total += params.beta * static_cast<double>(j);
        if (!(total / vol > rho)) continue;
        // accepted: build the geometry from the same stream
        RejectionSample out;
        out.attempts = attempt + 1;
        out.sample.box = box;
        out.sample.params = params;
        out.sample.j_max = intensity.j_max();
        out.sample.truncated_tail_mass = intensity.truncated_tail_mass();
        for (long j : windings) {
            Site x = box.uniform_site(sub);
            Loop l = sample_loop(params, x, j, sub);
            if (box.boundary == LatticeBox::Boundary::kDirichlet &&
                !box.contains(l.skel))
                continue;
            out.sample.loops.push_back(std::move(l));
        }
        return out;
    }
    std::ostringstream msg;
    msg << "rejection_conditioned_sample: " << max_attempts
        << " attempts exhausted (empirical exceedance rate < "
        << 1.0 / static_cast<double>(max_attempts) << ")";
    throw std::runtime_error(msg.str());
}

DecomposedSample decomposed_conditioned_sample(const ConditionedConfig& config,
                                               const ModelParams& params,
                                               RngStream& rng) {
    const ModelParams p0params = at_mu_zero(params);
    const auto boxes = config.grid_boxes();
    const long j_max = config.j_max > 0
                           ? config.j_max
                           : default_j_max(config.box, p0params, config.rho_eps);
    const SoupIntensity intensity(config.box, p0params, j_max);
    const BigLoopLaw law(config.box, p0params, config.rho_eps);
    const double z = law.z_lambda();

    DecomposedSample out;
    for (size_t b = 0; b < boxes.size(); ++b) {
        RngStream sub = rng.substream(static_cast<uint64_t>(b));
        if (config.include_soup) {
            SoupSample s = sample_soup(intensity, boxes[b], p0params, sub);
            out.soups.push_back(std::move(s));
        }
        const long k = config.poissonized ? zt_poisson(z, sub) : 1;
        out.long_count.push_back(k);
        for (long i = 0; i < k; ++i) {
            Loop l = law.sample(sub);
            // rebase into this grid translate
            if (!boxes[b].offset.empty()) {
                for (int a = 0; a < boxes[b].dim; ++a) {
                    const int32_t off = boxes[b].offset[static_cast<size_t>(a)];
                    l.base[static_cast<size_t>(a)] += off;
                    l.skel.start[static_cast<size_t>(a)] += off;
                    for (size_t q = static_cast<size_t>(a); q < l.skel.sites.size();
                         q += static_cast<size_t>(boxes[b].dim))
                        l.skel.sites[q] += off;
                }
            }
            out.long_loops.push_back(std::move(l));
        }
    }
    return out;
}

CountStats long_loops_hitting(const ConditionedConfig& config,
                              const ModelParams& params, const SiteSet& K,
                              long n_samples, RngStream& rng) {
    if (n_samples < 1) throw std::invalid_argument("long_loops_hitting: n_samples >= 1");
    ConditionedConfig cfg = config;
    cfg.include_soup = false;
    CountStats stats;
    stats.counts.reserve(static_cast<size_t>(n_samples));
    for (long s = 0; s < n_samples; ++s) {
        RngStream sub = rng.substream(static_cast<uint64_t>(s));
        const DecomposedSample sample = decomposed_conditioned_sample(cfg, params, sub);
        long c = 0;
        for (const Loop& l : sample.long_loops)
            if (!K.empty() && hits(l, K)) ++c;
        stats.counts.push_back(c);
    }
    const DispersionResult d = poisson_dispersion(stats.counts);
    stats.mean = d.mean;
    stats.variance = d.variance;
    stats.dispersion = d.index;
    return stats;
}

TiltingReport tilting_check(const LatticeBox& box, const ModelParams& params,
                            double rho_eps, long n_attempts, long n_tilted,
                            RngStream& rng) {
    params.validate();
    if (!(params.mu < 0))
        throw std::domain_error("tilting_check: requires mu < 0");
    const double rho_mu = rho(params, params.mu);
    const double target = rho_mu + rho_eps;
    const double rho_c = critical_density(params);
    if (target > rho_c)
        throw std::domain_error(
            "tilting_check: rho(mu) + rho_eps exceeds rho_c; use the interlacement "
            "regime");

    TiltingReport rep;
    rep.target_density = target;
    rep.mu_tilted = invert_density(params, target);

    const SoupIntensity intensity(box, params, 0);
    const double vol = static_cast<double>(box.volume());
    constexpr long kGeometryCap = 4000;
    std::vector<double> accepted_density;
    std::vector<double> conditioned_lt0;
    for (long attempt = 0; attempt < n_attempts; ++attempt) {
        RngStream sub = rng.substream(static_cast<uint64_t>(attempt));
        const std::vector<long> windings = intensity.sample_windings(sub);
        double total = 0.0;
        for (long j : windings) total += params.beta * static_cast<double>(j);
        const double density = total / vol;
        if (!(density > target)) continue;
        accepted_density.push_back(density);
        if (static_cast<long>(conditioned_lt0.size()) < kGeometryCap) {
            SoupSample s;
            s.box = box;
            s.params = params;
            for (long j : windings) {
                Site x = box.uniform_site(sub);
                s.loops.push_back(sample_loop(params, x, j, sub));
            }
            conditioned_lt0.push_back(occupation_at_origin(s));
        }
    }
    rep.attempts = n_attempts;
    rep.accepted = static_cast<long>(accepted_density.size());
    if (rep.accepted == 0)
        throw std::runtime_error("tilting_check: no accepted samples; increase attempts");
    double sum = 0.0;
    for (double v : accepted_density) sum += v;
    rep.conditioned_mean = sum / static_cast<double>(rep.accepted);
    double ss = 0.0;
    for (double v : accepted_density) ss += (v - rep.conditioned_mean) * (v - rep.conditioned_mean);
    rep.conditioned_std_error =
        std::sqrt(ss / std::max<long>(rep.accepted - 1, 1)) /
        std::sqrt(static_cast<double>(rep.accepted));
    rep.mean_rel_error = std::abs(rep.conditioned_mean / target - 1.0);

    // tilted, unconditioned reference sample of the local time at the origin
    ModelParams tilted = params;
    tilted.mu = rep.mu_tilted;
    const SoupIntensity tilted_intensity(box, tilted, 0);
    std::vector<double> tilted_lt0;
    RngStream trng = rng.substream(0x717EDULL);
    for (long r = 0; r < n_tilted; ++r) {
        RngStream sub = trng.substream(static_cast<uint64_t>(r));
        SoupSample s = sample_soup(tilted_intensity, box, tilted, sub);
        tilted_lt0.push_back(occupation_at_origin(s));
    }
    if (!conditioned_lt0.empty() && !tilted_lt0.empty()) {
        const KsResult ks = ks_two_sample(conditioned_lt0, tilted_lt0);
        rep.ks_statistic = ks.statistic;
        rep.ks_p_value = ks.p_value;
    }
    return rep;
}

EventOverlap exceedance_event_overlap(const LatticeBox& box, const ModelParams& params,
                                      double rho_eps, long j_max, long n_reps,
                                      RngStream& rng) {
    const ModelParams p = at_mu_zero(params);
    const SoupIntensity intensity(box, p, j_max);
    const double vol = static_cast<double>(box.volume());
    const double rho_threshold = critical_density(p) + rho_eps;
    const double len_threshold = rho_eps * vol;
    long n_rho = 0, n_lambda = 0, n_diff = 0;
    for (long r = 0; r < n_reps; ++r) {
        RngStream sub = rng.substream(static_cast<uint64_t>(r));
        const std::vector<long> windings = intensity.sample_windings(sub);
        double total = 0.0;
        bool has_long = false;
        for (long j : windings) {
            total += p.beta * static_cast<double>(j);
            if (p.beta * static_cast<double>(j) > len_threshold) has_long = true;
        }
        const bool a_rho = total / vol > rho_threshold;
        if (a_rho) ++n_rho;
        if (has_long) ++n_lambda;
        if (a_rho != has_long) ++n_diff;
    }
    EventOverlap o;
    o.n_reps = n_reps;
    o.p_rho = static_cast<double>(n_rho) / static_cast<double>(n_reps);
    o.p_lambda = static_cast<double>(n_lambda) / static_cast<double>(n_reps);
    o.p_symdiff = static_cast<double>(n_diff) / static_cast<double>(n_reps);
    return o;
}

}  // namespace bls
