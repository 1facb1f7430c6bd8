#include "bls/interlacements.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <unordered_map>

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

int64_t norm_sq(std::span<const int32_t> x) {
    int64_t q = 0;
    for (int32_t c : x) q += static_cast<int64_t>(c) * c;
    return q;
}

// leading-order hitting probability from far away: Cap * C_d * |x|^{2-d}
double far_return_value(double capacity, const ModelParams& p,
                        std::span<const int32_t> x) {
    const double r2 = static_cast<double>(norm_sq(x));
    return capacity * green_asymptotic_constant(p.d) *
           std::pow(r2, 0.5 * (2.0 - p.d));
}

// enumerate the ball |x| <= R as a dense index set
struct Domain {
    std::vector<Site> sites;
    std::unordered_map<uint64_t, int> index;
};

Domain make_ball_domain(int d, int radius) {
    Domain dom;
    Site cur(static_cast<size_t>(d), 0);
    const int64_t r2 = static_cast<int64_t>(radius) * radius;
    // recursive box scan, keep |x|^2 <= R^2
    std::vector<int> stack(static_cast<size_t>(d), -radius);
    for (;;) {
        for (int i = 0; i < d; ++i) cur[static_cast<size_t>(i)] = stack[static_cast<size_t>(i)];
        if (norm_sq(cur) <= r2) {
            dom.index.emplace(pack_site(cur), static_cast<int>(dom.sites.size()));
            dom.sites.push_back(cur);
        }
        int axis = d - 1;
        while (axis >= 0 && ++stack[static_cast<size_t>(axis)] > radius) {
            stack[static_cast<size_t>(axis)] = -radius;
            --axis;
        }
        if (axis < 0) break;
    }
    return dom;
}

}  // namespace

double EquilibriumData::escape_at(std::span<const int32_t> z) const {
    const uint64_t key = pack_site(z);
    for (size_t i = 0; i < sites.size(); ++i)
        if (pack_site(sites[i]) == key) return escape[i];
    return 0.0;
}

EquilibriumData equilibrium_solve(const SiteSet& K, const ModelParams& params,
                                  int domain_radius) {
    params.validate();
    params.require_transient();
    if (K.empty()) throw std::invalid_argument("equilibrium_solve: K empty");
    if (domain_radius < K.diameter() + 4)
        throw std::invalid_argument("equilibrium_solve: domain_radius too small");

    const int d = params.d;
    const Domain dom = make_ball_domain(d, domain_radius);
    const size_t n = dom.sites.size();
    const double deg = 2.0 * d;

    // role per site: K (h = 1) or unknown
    std::vector<char> in_k(n, 0);
    for (size_t i = 0; i < n; ++i)
        if (K.contains(dom.sites[i])) in_k[i] = 1;

    // neighbor structure: interior indices plus exterior neighbor sites
    std::vector<std::vector<int>> nbr(n);
    std::vector<std::vector<Site>> outside(n);
    for (size_t i = 0; i < n; ++i) {
        Site y = dom.sites[i];
        for (int a = 0; a < d; ++a)
            for (int s = -1; s <= 1; s += 2) {
                y[static_cast<size_t>(a)] += s;
                const auto it = dom.index.find(pack_site(y));
                if (it != dom.index.end())
                    nbr[i].push_back(it->second);
                else
                    outside[i].push_back(y);
                y[static_cast<size_t>(a)] -= s;
            }
    }

    std::vector<double> h(n, 0.0);
    for (size_t i = 0; i < n; ++i)
        if (in_k[i]) h[i] = 1.0;

    const double omega = 2.0 / (1.0 + std::sin(1.5707963267948966 / domain_radius));
    double cap = 0.0, cap_prev = 0.0;
    std::vector<double> escape(K.size(), 0.0);
    for (int outer = 0; outer < 4; ++outer) {
        // exterior boundary values from the current capacity estimate
        std::vector<double> bval(n, 0.0);
        for (size_t i = 0; i < n; ++i)
            for (const Site& y : outside[i]) bval[i] += far_return_value(cap, params, y);
        // SOR sweeps on the unknowns
        for (int sweep = 0; sweep < 40 * domain_radius + 200; ++sweep) {
            double max_delta = 0.0;
            for (size_t i = 0; i < n; ++i) {
                if (in_k[i]) continue;
                double acc = bval[i];
                for (int j : nbr[i]) acc += h[static_cast<size_t>(j)];
                const double target = acc / deg;
                const double delta = omega * (target - h[i]);
                h[i] += delta;
                max_delta = std::max(max_delta, std::abs(delta));
            }
            if (max_delta < 1e-13) break;
        }
        // e_K from the solved hitting probability
        cap_prev = cap;
        cap = 0.0;
        for (size_t zi = 0; zi < K.size(); ++zi) {
            const auto it = dom.index.find(pack_site(K.sites()[zi]));
            const size_t i = static_cast<size_t>(it->second);
            double ret = 0.0;
            for (int j : nbr[i])
                ret += in_k[static_cast<size_t>(j)] ? 1.0 : h[static_cast<size_t>(j)];
            for (const Site& y : outside[i]) ret += far_return_value(cap_prev, params, y);
            escape[zi] = 1.0 - ret / deg;
            cap += escape[zi];
        }
    }

    EquilibriumData eq;
    eq.sites = K.sites();
    eq.escape = std::move(escape);
    eq.capacity = cap;
    eq.method = EquilibriumData::Method::kSolve;
    eq.error = std::abs(cap - cap_prev) +
               cap * std::pow(static_cast<double>(domain_radius), -2.0);
    return eq;
}

EquilibriumData equilibrium_mc(const SiteSet& K, const ModelParams& params,
                               long n_walks, int escape_radius, RngStream& rng) {
    params.validate();
    params.require_transient();
    if (K.empty()) throw std::invalid_argument("equilibrium_mc: K empty");
    if (n_walks < 1) throw std::invalid_argument("equilibrium_mc: n_walks >= 1");
    const int d = params.d;
    const int64_t r2 = static_cast<int64_t>(escape_radius) * escape_radius;
    const double cgreen = green_asymptotic_constant(d);

    std::vector<long> escapes(K.size(), 0);
    std::vector<double> corr(K.size(), 0.0);  // sum of |x_exit|^{2-d}
    for (size_t zi = 0; zi < K.size(); ++zi) {
        RngStream zrng = rng.substream(static_cast<uint64_t>(zi));
        const Site& z = K.sites()[zi];
        for (long w = 0; w < n_walks; ++w) {
            Site x = z;
            // first jump, then run until K is hit or the sphere is reached
            for (;;) {
                const uint64_t dir = zrng.uniform_int(static_cast<uint64_t>(2 * d));
                x[dir >> 1] += (dir & 1) ? 1 : -1;
                if (K.contains(x)) break;
                const int64_t q = norm_sq(x);
                if (q >= r2) {
                    ++escapes[zi];
                    corr[zi] += std::pow(static_cast<double>(q), 0.5 * (2.0 - d));
                    break;
                }
            }
        }
    }
    // self-consistent radius correction: e_z = (escapes - cap * C * corr) / n
    const double nn = static_cast<double>(n_walks);
    double a = 0.0, b = 0.0;
    for (size_t zi = 0; zi < K.size(); ++zi) {
        a += static_cast<double>(escapes[zi]) / nn;
        b += cgreen * corr[zi] / nn;
    }
    // cap solves cap = a - cap * b
    const double capacity = a / (1.0 + b);

    EquilibriumData eq;
    eq.sites = K.sites();
    eq.method = EquilibriumData::Method::kMonteCarlo;
    eq.escape.resize(K.size());
    double var = 0.0;
    for (size_t zi = 0; zi < K.size(); ++zi) {
        const double p = static_cast<double>(escapes[zi]) / nn;
        eq.escape[zi] = p - capacity * cgreen * corr[zi] / nn;
        var += p * (1.0 - p) / nn;
    }
    eq.capacity = capacity;
    eq.error = std::sqrt(var);
    return eq;
}

Horizons default_horizons(const SiteSet& K) {
    const double diam = std::max(K.diameter(), 1);
    return {20.0 * diam * diam, 20.0 * diam * diam};
}

InterlacementSample sample_interlacements(const SiteSet& K, double u,
                                          const ModelParams& params,
                                          const Horizons& horizons,
                                          const EquilibriumData& eq, RngStream& rng) {
    params.validate();
    params.require_transient();
    if (u < 0) throw std::invalid_argument("sample_interlacements: u >= 0");
    InterlacementSample out;
    out.level = u;
    out.horizons = horizons;
    const int d = params.d;
    out.residual_return_bound =
        static_cast<double>(K.size()) * std::pow(d / (kTwoPi), 0.5 * d) *
        std::pow(std::max(horizons.backward, 1.0), 1.0 - 0.5 * d) / (0.5 * d - 1.0);
    if (u == 0.0 || K.empty()) return out;

    std::vector<double> cdf(eq.escape.size());
    double cum = 0.0;
    for (size_t i = 0; i < eq.escape.size(); ++i) {
        cum += std::max(eq.escape[i], 0.0);
        cdf[i] = cum;
    }
    const long count = rng.poisson(u * eq.capacity);
    for (long t = 0; t < count; ++t) {
        const double v = rng.uniform() * cum;
        const size_t zi = static_cast<size_t>(
            std::lower_bound(cdf.begin(), cdf.end(), v) - cdf.begin());
        TrajectoryWindow w;
        w.entry = eq.sites[zi];
        w.forward = sample_walk(params, w.entry, horizons.forward, rng);
        for (int attempt = 0; attempt < 100000; ++attempt) {
            PathSkeleton back = sample_walk(params, w.entry, horizons.backward, rng);
            bool re_hits = false;
            const size_t nj = back.jump_count();
            for (size_t k = 1; k <= nj && !re_hits; ++k)
                if (K.contains(back.site_after(k))) re_hits = true;
            if (!re_hits) {
                w.backward = std::move(back);
                break;
            }
        }
        out.trajectories.push_back(std::move(w));
    }
    return out;
}

InterlacementSample sample_interlacements(const SiteSet& K, double u,
                                          const ModelParams& params,
                                          const Horizons& horizons, RngStream& rng) {
    const EquilibriumData eq = equilibrium_solve(K, params, K.diameter() + 20);
    return sample_interlacements(K, u, params, horizons, eq, rng);
}

HittingReport hitting_asymptotics_check(const SiteSet& K, const Site& z,
                                        const Site& x, double t1, double t2,
                                        long n_samples, const ModelParams& params,
                                        const EquilibriumData& eq, RngStream& rng) {
    params.validate();
    params.require_transient();
    if (K.contains(x))
        throw std::invalid_argument("hitting_asymptotics_check: x must be outside K");
    const int d = params.d;
    long hits_count = 0;
    for (long w = 0; w < n_samples; ++w) {
        RngStream sub = rng.substream(static_cast<uint64_t>(w));
        Site cur = x;
        double t = 0.0;
        for (;;) {
            t += sub.exponential(1.0);
            if (t > t2) break;
            const uint64_t dir = sub.uniform_int(static_cast<uint64_t>(2 * d));
            cur[dir >> 1] += (dir & 1) ? 1 : -1;
            if (K.contains(cur)) {
                if (t >= t1 && cur == z) ++hits_count;
                break;
            }
        }
    }
    HittingReport rep;
    rep.n_samples = n_samples;
    rep.empirical = static_cast<double>(hits_count) / static_cast<double>(n_samples);
    rep.empirical_std_error =
        std::sqrt(std::max(rep.empirical * (1.0 - rep.empirical),
                           1.0 / static_cast<double>(n_samples)) /
                  static_cast<double>(n_samples));
    // kernel integral over [t1, t2] in geometric panels
    double integral = 0.0;
    double a = t1;
    while (a < t2) {
        const double b = std::min(2.0 * a, t2);
        const double c = 0.5 * (a + b), h = 0.5 * (b - a);
        double s = 0.0;
        for (int i = 0; i < kGL; ++i)
            s += kGLw[i] * transition_kernel(params, c + h * kGLx[i], x);
        integral += s * h;
        a = b;
    }
    rep.predicted = eq.escape_at(z) * integral;
    rep.ratio = (rep.predicted > 0) ? rep.empirical / rep.predicted : 0.0;
    return rep;
}

namespace {

// D_K truncated to [0, horizon]: entry at time 0, last exit of K before the
// horizon
double truncated_dwell(const PathSkeleton& p, const SiteSet& K, double horizon) {
    double last_exit = 0.0;
    const size_t n = p.jump_count();
    double prev = 0.0;
    for (size_t k = 0; k <= n; ++k) {
        const double end = (k < n) ? p.jump_times[k] : p.duration;
        if (prev >= horizon) break;
        if (end > prev && K.contains(p.site_after(k)))
            last_exit = std::min(end, horizon);
        prev = end;
    }
    return last_exit;
}

}  // namespace

WindowComparison long_loop_vs_interlacement(const LatticeBox& box,
                                            const ModelParams& params,
                                            double rho_eps, const SiteSet& K,
                                            long n_target, RngStream& rng) {
    if (K.empty() || n_target < 1)
        throw std::invalid_argument("long_loop_vs_interlacement: bad arguments");
    const Horizons horizons = default_horizons(K);
    const double T = horizons.forward;
    const EquilibriumData eq = equilibrium_solve(K, params, K.diameter() + 20);
    const BigLoopLaw law(box, params, rho_eps);
    const Site marked = K.sites().front();

    std::unordered_map<uint64_t, size_t> entry_index;
    for (size_t i = 0; i < K.size(); ++i) entry_index[pack_site(K.sites()[i])] = i;

    std::vector<long> entry_a(K.size(), 0), entry_b(K.size(), 0);
    std::vector<double> visited_a, visited_b, dwell_a, dwell_b, lt_a, lt_b;

    RngStream loop_rng = rng.substream(1);
    long collected = 0;
    const long max_attempts = 400 * n_target;
    for (long attempt = 0; attempt < max_attempts && collected < n_target; ++attempt) {
        Loop l = law.sample(loop_rng);
        if (!hits(l, K)) continue;
        const Loop canon = canonical_rep(l, K);
        const double win = std::min(T, canon.skel.duration);
        ++entry_a[entry_index.at(pack_site(canon.skel.start))];
        visited_a.push_back(static_cast<double>(visited_in(canon.skel, K, 0.0, win)));
        dwell_a.push_back(truncated_dwell(canon.skel, K, win));
        lt_a.push_back(local_time_in(canon.skel, marked, 0.0, win));
        ++collected;
    }

    RngStream traj_rng = rng.substream(2);
    std::vector<double> cdf(eq.escape.size());
    double cum = 0.0;
    for (size_t i = 0; i < eq.escape.size(); ++i) {
        cum += std::max(eq.escape[i], 0.0);
        cdf[i] = cum;
    }
    for (long t = 0; t < n_target; ++t) {
        const double v = traj_rng.uniform() * cum;
        const size_t zi = static_cast<size_t>(
            std::lower_bound(cdf.begin(), cdf.end(), v) - cdf.begin());
        const PathSkeleton fwd = sample_walk(params, eq.sites[zi], T, traj_rng);
        ++entry_b[zi];
        visited_b.push_back(static_cast<double>(visited_in(fwd, K, 0.0, T)));
        dwell_b.push_back(truncated_dwell(fwd, K, T));
        lt_b.push_back(local_time_in(fwd, marked, 0.0, T));
    }

    WindowComparison cmp;
    cmp.n_loops = collected;
    cmp.n_trajectories = n_target;
    cmp.horizon = T;
    cmp.entry = chi2_two_sample(entry_a, entry_b);
    cmp.visited = ks_two_sample(visited_a, visited_b);
    cmp.dwell = ks_two_sample(dwell_a, dwell_b);
    cmp.local_time = ks_two_sample(lt_a, lt_b);
    return cmp;
}

}  // namespace bls
