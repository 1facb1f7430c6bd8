#include "bls/paths.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <unordered_map>

#include "bls/bessel.hpp"

namespace bls {

namespace {

// iterate constant pieces: f(site_span, t_begin, t_end)
template <class F>
void for_each_piece(const PathSkeleton& p, F&& f) {
    const size_t n = p.jump_count();
    double prev = 0.0;
    for (size_t k = 0; k <= n; ++k) {
        const double end = (k < n) ? p.jump_times[k] : p.duration;
        if (end > prev) f(p.site_after(k), prev, end);
        prev = std::max(prev, end);
    }
}

// jump count of a 1-d rate-s... bridge: even m with weight e^{-s} s^m / m!
// times binom(m, m/2) 2^{-m}; total mass e^{-s} I_0(s)
long sample_even_jump_count(double s, RngStream& rng) {
    if (s <= 0.0) return 0;
    const double total = scaled_bessel_i(0, s);
    const double target = rng.uniform() * total;
    if (s < 30.0) {
        double w = std::exp(-s);
        double cum = w;
        long m = 0;
        while (cum < target) {
            m += 2;
            w *= s * s / (static_cast<double>(m) * m);
            cum += w;
            if (m > 4 * s + 400) break;  // exhaustion guard (prob ~ 0)
        }
        return m;
    }
    // outward scan from the even mode, in the fixed order m0, m0+2, m0-2, ...
    long m0 = 2 * static_cast<long>(s / 2.0);
    const double logw0 = -s + m0 * std::log(0.5 * s) - 2.0 * std::lgamma(0.5 * m0 + 1.0);
    const double w0 = std::exp(logw0);
    double cum = w0;
    double wup = w0, wdn = w0;
    long mup = m0, mdn = m0;
    const long span = static_cast<long>(20.0 * std::sqrt(s)) + 200;
    while (cum < target) {
        mup += 2;
        wup *= s * s / (static_cast<double>(mup) * mup);
        cum += wup;
        if (cum >= target) return mup;
        if (mdn >= 2) {
            wdn *= (static_cast<double>(mdn) * mdn) / (s * s);
            mdn -= 2;
            cum += wdn;
            if (cum >= target) return mdn;
        }
        if (mup - m0 > span) return mup;  // exhaustion guard
    }
    return m0;
}

struct JumpEvent {
    double time;
    int coord;
    int8_t step;
};

PathSkeleton assemble(const ModelParams& params, const Site& x, double t,
                      std::vector<JumpEvent>& events) {
    std::sort(events.begin(), events.end(),
              [](const JumpEvent& a, const JumpEvent& b) { return a.time < b.time; });
    PathSkeleton p;
    p.dim = params.d;
    p.start = x;
    p.duration = t;
    p.jump_times.reserve(events.size());
    p.sites.reserve(events.size() * params.d);
    Site cur = x;
    for (const auto& e : events) {
        cur[static_cast<size_t>(e.coord)] += e.step;
        p.jump_times.push_back(e.time);
        p.sites.insert(p.sites.end(), cur.begin(), cur.end());
    }
    return p;
}

int64_t sq_dist(std::span<const int32_t> a, std::span<const int32_t> b) {
    int64_t q = 0;
    for (size_t i = 0; i < a.size(); ++i) {
        const int64_t diff = static_cast<int64_t>(a[i]) - b[i];
        q += diff * diff;
    }
    return q;
}

}  // namespace

size_t PathSkeleton::piece_index(double t) const {
    return static_cast<size_t>(
        std::upper_bound(jump_times.begin(), jump_times.end(), t) - jump_times.begin());
}

Site PathSkeleton::at(double t) const {
    auto s = site_after(piece_index(t));
    return Site(s.begin(), s.end());
}

void PathSkeleton::validate() const {
    if (static_cast<int>(start.size()) != dim)
        throw std::invalid_argument("PathSkeleton: start dimension mismatch");
    double prev = 0.0;
    for (size_t k = 0; k < jump_count(); ++k) {
        if (!(jump_times[k] > prev) || !(jump_times[k] < duration))
            throw std::invalid_argument("PathSkeleton: jump times not ordered in (0, duration)");
        prev = jump_times[k];
        auto a = site_after(k);
        auto b = site_after(k + 1);
        int64_t l1 = 0;
        for (int i = 0; i < dim; ++i) l1 += std::abs(static_cast<int64_t>(a[i]) - b[i]);
        if (l1 != 1) throw std::invalid_argument("PathSkeleton: non-nearest-neighbor jump");
    }
}

PathSkeleton sample_bridge(const ModelParams& params, const Site& x, double t,
                           RngStream& rng) {
    params.validate();
    check_dim(params, x);
    if (!(t > 0)) throw std::invalid_argument("sample_bridge: t must be > 0");
    const double s = t / params.d;
    std::vector<JumpEvent> events;
    for (int c = 0; c < params.d; ++c) {
        const long m = sample_even_jump_count(s, rng);
        std::vector<int8_t> steps(static_cast<size_t>(m));
        for (long k = 0; k < m; ++k) steps[static_cast<size_t>(k)] = (k < m / 2) ? 1 : -1;
        for (long k = m - 1; k > 0; --k)  // Fisher-Yates
            std::swap(steps[static_cast<size_t>(k)],
                      steps[rng.uniform_int(static_cast<uint64_t>(k + 1))]);
        for (long k = 0; k < m; ++k)
            events.push_back({rng.uniform() * t, c, steps[static_cast<size_t>(k)]});
    }
    return assemble(params, x, t, events);
}

Loop sample_loop(const ModelParams& params, const Site& x, long winding,
                 RngStream& rng) {
    if (winding < 1) throw std::invalid_argument("sample_loop: winding must be >= 1");
    Loop l;
    l.base = x;
    l.winding = winding;
    l.skel = sample_bridge(params, x, params.beta * static_cast<double>(winding), rng);
    return l;
}

PathSkeleton sample_walk(const ModelParams& params, const Site& x, double t,
                         RngStream& rng) {
    params.validate();
    check_dim(params, x);
    PathSkeleton p;
    p.dim = params.d;
    p.start = x;
    p.duration = t;
    Site cur = x;
    double clock = 0.0;
    for (;;) {
        clock += rng.exponential(1.0);
        if (clock >= t) break;
        const uint64_t dir = rng.uniform_int(static_cast<uint64_t>(2 * params.d));
        const size_t coord = dir >> 1;
        cur[coord] += (dir & 1) ? 1 : -1;
        p.jump_times.push_back(clock);
        p.sites.insert(p.sites.end(), cur.begin(), cur.end());
    }
    return p;
}

Loop shift(const Loop& loop, double s) {
    const double L = loop.skel.duration;
    double sm = std::fmod(s, L);
    if (sm < 0) sm += L;
    if (sm == 0.0) return loop;

    const PathSkeleton& p = loop.skel;
    const size_t n = p.jump_count();
    const size_t k0 = p.piece_index(sm);

    Loop out;
    out.winding = loop.winding;
    auto st = p.site_after(k0);
    out.base = Site(st.begin(), st.end());
    PathSkeleton& q = out.skel;
    q.dim = p.dim;
    q.start = out.base;
    q.duration = L;
    q.jump_times.reserve(n);
    q.sites.reserve(n * p.dim);
    for (size_t k = k0; k < n; ++k) {
        q.jump_times.push_back(p.jump_times[k] - sm);
        auto site = p.site_after(k + 1);
        q.sites.insert(q.sites.end(), site.begin(), site.end());
    }
    for (size_t k = 0; k < k0; ++k) {
        q.jump_times.push_back(p.jump_times[k] + L - sm);
        auto site = p.site_after(k + 1);
        q.sites.insert(q.sites.end(), site.begin(), site.end());
    }
    return out;
}

double local_time(const PathSkeleton& path, std::span<const int32_t> x) {
    const uint64_t key = pack_site(x);
    double total = 0.0;
    for_each_piece(path, [&](std::span<const int32_t> s, double a, double b) {
        if (pack_site(s) == key) total += b - a;
    });
    return total;
}

double local_time(const Loop& loop, std::span<const int32_t> x) {
    return local_time(loop.skel, x);
}

double local_time(const TrajectoryWindow& w, std::span<const int32_t> x) {
    return local_time(w.forward, x) + local_time(w.backward, x);
}

double local_time_in(const PathSkeleton& path, std::span<const int32_t> x, double t0,
                     double t1) {
    const uint64_t key = pack_site(x);
    double total = 0.0;
    for_each_piece(path, [&](std::span<const int32_t> s, double a, double b) {
        const double lo = std::max(a, t0), hi = std::min(b, t1);
        if (hi > lo && pack_site(s) == key) total += hi - lo;
    });
    return total;
}

long visited_in(const PathSkeleton& path, const SiteSet& K, double t0, double t1) {
    std::unordered_set<uint64_t> seen;
    for_each_piece(path, [&](std::span<const int32_t> s, double a, double b) {
        if (b > t0 && a < t1) {
            const uint64_t key = pack_site(s);
            if (K.contains_key(key)) seen.insert(key);
        }
    });
    return static_cast<long>(seen.size());
}

bool hits(const PathSkeleton& path, const SiteSet& K) {
    if (K.empty()) return false;
    const size_t n = path.jump_count();
    for (size_t k = 0; k <= n; ++k)
        if (K.contains(path.site_after(k))) return true;
    return false;
}

bool hits(const Loop& loop, const SiteSet& K) { return hits(loop.skel, K); }

namespace {

// Longest circular K-avoiding stretch of a loop: (length, end time).
// Requires the loop to visit K.
std::pair<double, double> longest_avoiding(const Loop& loop, const SiteSet& K) {
    struct Run {
        double len, end;
    };
    std::vector<Run> runs;
    double cur_len = 0.0, cur_end = 0.0;
    bool in_run = false;
    bool first_piece_avoids = false, first_seen = false;
    double first_run_len = 0.0;
    for_each_piece(loop.skel, [&](std::span<const int32_t> s, double a, double b) {
        const bool avoid = !K.contains(s);
        if (!first_seen) {
            first_seen = true;
            first_piece_avoids = avoid;
        }
        if (avoid) {
            if (!in_run) {
                cur_len = 0.0;
                in_run = true;
            }
            cur_len += b - a;
            cur_end = b;
        } else if (in_run) {
            runs.push_back({cur_len, cur_end});
            in_run = false;
        }
    });
    if (in_run) runs.push_back({cur_len, cur_end});
    if (runs.empty()) return {0.0, 0.0};  // loop never leaves K
    if (first_piece_avoids) first_run_len = runs.front().len;
    // merge the wrap-around run (loop is closed, so last and first pieces can
    // form one circular stretch)
    if (first_piece_avoids && in_run && runs.size() > 1) {
        runs.back().len += first_run_len;
        runs.back().end = runs.front().end;
        runs.erase(runs.begin());
    }
    auto best = std::max_element(runs.begin(), runs.end(),
                                 [](const Run& a, const Run& b) { return a.len < b.len; });
    return {best->len, best->end};
}

}  // namespace

double d_K(const Loop& loop, const SiteSet& K) {
    if (!hits(loop, K)) return 0.0;
    return loop.skel.duration - longest_avoiding(loop, K).first;
}

double d_K(const TrajectoryWindow& w, const SiteSet& K) {
    double first_entry = -1.0, last_exit = 0.0;
    for_each_piece(w.forward, [&](std::span<const int32_t> s, double a, double b) {
        if (K.contains(s)) {
            if (first_entry < 0) first_entry = a;
            last_exit = b;
        }
    });
    if (first_entry < 0) return 0.0;
    return last_exit - first_entry;
}

Loop canonical_rep(const Loop& loop, const SiteSet& K) {
    if (!hits(loop, K))
        throw std::invalid_argument("canonical_rep: loop does not intersect K");
    auto [len, end] = longest_avoiding(loop, K);
    if (len == 0.0) return loop;  // loop never leaves K; any anchor works
    const double s = std::fmod(end, loop.skel.duration);
    return shift(loop, s);
}

std::vector<uint64_t> particle_map(std::span<const Loop> loops,
                                   std::span<const TrajectoryWindow> windows,
                                   const SiteSet& K, const ModelParams& params,
                                   RngStream& rng) {
    std::vector<uint64_t> particles;
    const double beta = params.beta;
    for (const Loop& l : loops) {
        if (!hits(l, K)) {
            rng.uniform();  // keep the stream aligned regardless of geometry
            continue;
        }
        const Loop canon = canonical_rep(l, K);
        const double U = rng.uniform() * beta;
        const double L = canon.skel.duration;
        for (long k = 0; k < l.winding; ++k) {
            double tau = std::fmod(U + beta * static_cast<double>(k), L);
            auto pos = canon.skel.site_after(canon.skel.piece_index(tau));
            const uint64_t key = pack_site(pos);
            if (K.contains_key(key)) particles.push_back(key);
        }
    }
    for (const TrajectoryWindow& w : windows) {
        const double U = rng.uniform() * beta;
        for (long k = 1;; ++k) {
            const double tau = beta * static_cast<double>(k) - U;
            if (tau >= w.forward.duration) break;
            auto pos = w.forward.site_after(w.forward.piece_index(tau));
            const uint64_t key = pack_site(pos);
            if (K.contains_key(key)) particles.push_back(key);
        }
    }
    return particles;
}

// --- interaction energies ----------------------------------------------------

namespace {

struct Segment {
    double t0, t1;
    Site site;
};

struct Slot {
    std::vector<Segment> segs;  // times relative to slot start, within [0, beta)
    Site base;                  // position at slot start
    bool base_valid = false;
};

// extract constant pieces of `p` over absolute times [a, b), shifted to [0, b-a)
void extract_segments(const PathSkeleton& p, double a, double b,
                      std::vector<Segment>& out) {
    for_each_piece(p, [&](std::span<const int32_t> s, double lo, double hi) {
        const double l = std::max(lo, a), h = std::min(hi, b);
        if (h > l) out.push_back({l - a, h - a, Site(s.begin(), s.end())});
    });
}

std::vector<Slot> build_slots(const PathRef& ref, const ModelParams& params) {
    const double beta = params.beta;
    std::vector<Slot> slots;
    if (ref.loop) {
        const Loop& l = *ref.loop;
        for (long k = 0; k < l.winding; ++k) {
            Slot s;
            const double a = beta * static_cast<double>(k);
            extract_segments(l.skel, a, a + beta, s.segs);
            s.base = l.skel.at(a);
            s.base_valid = true;
            slots.push_back(std::move(s));
        }
        return slots;
    }
    const TrajectoryWindow& w = *ref.window;
    // slot k of the unified indexing maps to integer offset 0,-1,1,-2,2,...
    const long fwd_slots = static_cast<long>(w.forward.duration / beta);
    const long bwd_slots = static_cast<long>(w.backward.duration / beta);
    for (long i = 0; i < 2 * (fwd_slots + bwd_slots) + 2; ++i) {
        const long theta = (i % 2 == 0) ? i / 2 : -(i / 2 + 1);
        Slot s;
        if (theta >= 0) {
            if (theta >= fwd_slots) continue;
            const double a = beta * static_cast<double>(theta);
            extract_segments(w.forward, a, a + beta, s.segs);
            s.base = w.forward.at(a);
            s.base_valid = true;
        } else {
            // absolute times [theta*beta, theta*beta + beta) < 0; backward
            // skeleton time s corresponds to path time -s
            const double hi = -static_cast<double>(theta) * beta;  // backward time
            const double lo = hi - beta;
            if (hi > w.backward.duration) continue;
            std::vector<Segment> rev;
            extract_segments(w.backward, lo, hi, rev);
            // reverse into forward-time order within the slot
            for (auto it = rev.rbegin(); it != rev.rend(); ++it)
                s.segs.push_back({beta - it->t1, beta - it->t0, it->site});
            if (!s.segs.empty()) {
                s.base = s.segs.front().site;
                s.base_valid = true;
            }
        }
        if (!s.segs.empty()) slots.push_back(std::move(s));
    }
    return slots;
}

double pair_integral(const std::vector<Segment>& a, const std::vector<Segment>& b,
                     const PairPotential& v) {
    double total = 0.0;
    size_t i = 0, j = 0;
    while (i < a.size() && j < b.size()) {
        const double lo = std::max(a[i].t0, b[j].t0);
        const double hi = std::min(a[i].t1, b[j].t1);
        if (hi > lo) {
            const double val = v(sq_dist(a[i].site, b[j].site));
            if (std::isinf(val) && val > 0) return val;  // hard core
            total += val * (hi - lo);
        }
        if (a[i].t1 < b[j].t1)
            ++i;
        else
            ++j;
    }
    return total;
}

double slot_energy(std::span<const PathRef> paths, const PairPotential& v,
                   const ModelParams& params, const SiteSet* K) {
    std::vector<Slot> all;
    for (const PathRef& r : paths) {
        auto s = build_slots(r, params);
        for (auto& slot : s) {
            if (K && (!slot.base_valid || !K->contains(slot.base))) continue;
            all.push_back(std::move(slot));
        }
    }
    double total = 0.0;
    for (size_t i = 0; i < all.size(); ++i)
        for (size_t j = i + 1; j < all.size(); ++j) {
            const double e = pair_integral(all[i].segs, all[j].segs, v);
            if (std::isinf(e) && e > 0) return e;
            total += e;
        }
    return total;
}

}  // namespace

double interaction_V(std::span<const PathRef> paths, const PairPotential& v,
                     const ModelParams& params) {
    return slot_energy(paths, v, params, nullptr);
}

double interaction_V_K(std::span<const PathRef> paths, const PairPotential& v,
                       const SiteSet& K, const ModelParams& params) {
    return slot_energy(paths, v, params, &K);
}

double interaction_Vtilde_K(std::span<const PathRef> paths, const PairPotential& v,
                            const SiteSet& K, const ModelParams& params) {
    (void)params;
    // per path: total time at each K-site (the double integral decouples)
    struct KTime {
        std::vector<std::pair<Site, double>> at;
    };
    std::vector<KTime> per_path;
    for (const PathRef& r : paths) {
        std::unordered_map<uint64_t, std::pair<Site, double>> acc;
        auto absorb = [&](const PathSkeleton& p) {
            for_each_piece(p, [&](std::span<const int32_t> s, double a, double b) {
                if (K.contains(s)) {
                    auto& e = acc[pack_site(s)];
                    if (e.first.empty()) e.first = Site(s.begin(), s.end());
                    e.second += b - a;
                }
            });
        };
        if (r.loop) {
            absorb(r.loop->skel);
        } else {
            absorb(r.window->forward);
            absorb(r.window->backward);
        }
        KTime kt;
        for (auto& [key, e] : acc) kt.at.emplace_back(std::move(e.first), e.second);
        per_path.push_back(std::move(kt));
    }
    double total = 0.0;
    for (size_t i = 0; i < per_path.size(); ++i)
        for (size_t j = i + 1; j < per_path.size(); ++j)
            for (const auto& [xa, ta] : per_path[i].at)
                for (const auto& [xb, tb] : per_path[j].at) {
                    const double val = v(sq_dist(xa, xb));
                    if (std::isinf(val) && val > 0) return val;
                    total += 0.5 * val * ta * tb;
                }
    return total;
}

}  // namespace bls
