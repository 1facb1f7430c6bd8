#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "bls/params.hpp"
#include "bls/rng.hpp"

namespace bls {

// A finite piecewise-constant lattice path: start site, jump times and the
// site entered at each jump. Evaluation is cadlag on [0, duration).
struct PathSkeleton {
    int dim = 0;
    Site start;
    std::vector<double> jump_times;  // strictly increasing, in (0, duration)
    std::vector<int32_t> sites;      // flat, jump_count * dim
    double duration = 0.0;

    size_t jump_count() const { return jump_times.size(); }
    std::span<const int32_t> site_after(size_t k) const {
        if (k == 0) return {start.data(), static_cast<size_t>(dim)};
        return {sites.data() + (k - 1) * dim, static_cast<size_t>(dim)};
    }
    std::span<const int32_t> end_site() const { return site_after(jump_count()); }
    // index k such that the path sits on site_after(k) at time t
    size_t piece_index(double t) const;
    Site at(double t) const;

    void validate() const;  // nearest-neighbor chain, ordered times
};

// A closed path of duration beta * winding, representing winding particles.
struct Loop {
    Site base;
    long winding = 0;
    PathSkeleton skel;

    double length() const { return skel.duration; }
};

// A doubly-infinite trajectory seen through a finite window K: entry point,
// forward skeleton, and backward skeleton (time s on `backward` is path time
// -s; it never revisits K after its first jump).
struct TrajectoryWindow {
    Site entry;
    PathSkeleton forward;
    PathSkeleton backward;
};

// --- sampling ---------------------------------------------------------------

// Exact continuous-time simple-random-walk bridge from x to x of duration t:
// coordinates are independent rate-1/d one-dimensional bridges (jump count
// weighted by e^{-s} s^m / m! times the discrete bridge mass, times uniform
// order statistics), merged by jump time.
PathSkeleton sample_bridge(const ModelParams& params, const Site& x, double t,
                           RngStream& rng);

Loop sample_loop(const ModelParams& params, const Site& x, long winding,
                 RngStream& rng);

// Unconditioned continuous-time SRW from x run for duration t.
PathSkeleton sample_walk(const ModelParams& params, const Site& x, double t,
                         RngStream& rng);

// --- path operations --------------------------------------------------------

// Rotation of the loop parametrization by s (mod beta * winding).
Loop shift(const Loop& loop, double s);

// Shifting a window only relabels its parametrization; the stored
// entry-anchored representation (and every shift-invariant observable) is
// unchanged.
inline TrajectoryWindow shift(const TrajectoryWindow& w, double) { return w; }

// Total Lebesgue time the path spends at x.
double local_time(const PathSkeleton& path, std::span<const int32_t> x);
double local_time(const Loop& loop, std::span<const int32_t> x);
double local_time(const TrajectoryWindow& w, std::span<const int32_t> x);

// Time spent at x during path times [t0, t1] (clipped to the skeleton).
double local_time_in(const PathSkeleton& path, std::span<const int32_t> x, double t0,
                     double t1);

// Distinct sites of K visited during [t0, t1].
long visited_in(const PathSkeleton& path, const SiteSet& K, double t0, double t1);

// True if the path occupies a site of K at some time.
bool hits(const PathSkeleton& path, const SiteSet& K);
bool hits(const Loop& loop, const SiteSet& K);

// D_K: loop duration minus the longest K-avoiding (circular) stretch; 0 for
// loops that never touch K. For windows: first entrance to last exit of K.
double d_K(const Loop& loop, const SiteSet& K);
double d_K(const TrajectoryWindow& w, const SiteSet& K);

// The unique rotation placing the longest K-avoiding stretch at the end, so
// the loop starts at an entrance to K. Throws if the loop misses K.
Loop canonical_rep(const Loop& loop, const SiteSet& K);

// --- particle map -----------------------------------------------------------

// Positions in K read at times in beta Z after re-anchoring each path at an
// entrance to K and applying an independent uniform shift on [0, beta).
// Returns the particle multiset as packed site keys.
std::vector<uint64_t> particle_map(std::span<const Loop> loops,
                                   std::span<const TrajectoryWindow> windows,
                                   const SiteSet& K, const ModelParams& params,
                                   RngStream& rng);

// --- interaction energies ---------------------------------------------------

// Pair potential as a function of the squared Euclidean distance between
// lattice sites; may return +infinity (hard core).
using PairPotential = std::function<double(int64_t sq_dist)>;

// A path reference for energy evaluation: loops use beta-slots k = 0..j-1,
// windows enumerate slots over Z through the bijection 0,-1,1,-2,2,...
struct PathRef {
    const Loop* loop = nullptr;
    const TrajectoryWindow* window = nullptr;
    PathRef(const Loop& l) : loop(&l) {}             // NOLINT implicit
    PathRef(const TrajectoryWindow& w) : window(&w) {}  // NOLINT implicit
};

// Full beta-slot-aligned interaction energy (all ordered slot pairs, halved).
double interaction_V(std::span<const PathRef> paths, const PairPotential& v,
                     const ModelParams& params);

// Slot-aligned energy restricted to slots whose base position lies in K.
double interaction_V_K(std::span<const PathRef> paths, const PairPotential& v,
                       const SiteSet& K, const ModelParams& params);

// Time-integral pair energy over path pairs, both arguments restricted to K.
double interaction_Vtilde_K(std::span<const PathRef> paths, const PairPotential& v,
                            const SiteSet& K, const ModelParams& params);

}  // namespace bls
