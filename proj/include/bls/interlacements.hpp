#pragma once

#include <vector>

#include "bls/conditioned.hpp"
#include "bls/params.hpp"
#include "bls/paths.hpp"
#include "bls/rng.hpp"
#include "bls/stats.hpp"

namespace bls {

struct EquilibriumData {
    enum class Method { kSolve, kMonteCarlo };

    std::vector<Site> sites;     // K, fixed order
    std::vector<double> escape;  // e_K(z) per site
    double capacity = 0.0;
    Method method = Method::kSolve;
    double error = 0.0;  // certified (solve) or statistical (mc) bound

    double escape_at(std::span<const int32_t> z) const;
};

// e_K and Cap(K) from the discrete Dirichlet problem for the hitting
// probability on a ball of radius domain_radius, with exterior values from
// the Green's-function asymptotic, iterated to self-consistency.
EquilibriumData equilibrium_solve(const SiteSet& K, const ModelParams& params,
                                  int domain_radius);

// Independent Monte Carlo estimate: walks from each z in K after one jump,
// escape counted past escape_radius with the return-probability correction.
EquilibriumData equilibrium_mc(const SiteSet& K, const ModelParams& params,
                               long n_walks, int escape_radius, RngStream& rng);

struct Horizons {
    double forward = 0.0;
    double backward = 0.0;
};

// default horizon: 20 * max(diam K, 1)^2 in each direction
Horizons default_horizons(const SiteSet& K);

struct InterlacementSample {
    double level = 0.0;
    std::vector<TrajectoryWindow> trajectories;
    Horizons horizons;
    double residual_return_bound = 0.0;  // post-horizon backward return budget
};

// The interlacement process at level u seen through K: Poisson(u Cap(K))
// trajectories, entry via e_K / Cap(K), forward part an unconditioned walk,
// backward part conditioned by rejection to avoid K within the horizon.
InterlacementSample sample_interlacements(const SiteSet& K, double u,
                                          const ModelParams& params,
                                          const Horizons& horizons,
                                          const EquilibriumData& eq, RngStream& rng);
InterlacementSample sample_interlacements(const SiteSet& K, double u,
                                          const ModelParams& params,
                                          const Horizons& horizons, RngStream& rng);

struct HittingReport {
    double empirical = 0.0;
    double empirical_std_error = 0.0;
    double predicted = 0.0;  // e_K(z) * int_{t1}^{t2} p_t(x) dt
    double ratio = 0.0;
    long n_samples = 0;
};

// P_x(walk hits K at z with H_K in [t1, t2]) vs the kernel prediction.
HittingReport hitting_asymptotics_check(const SiteSet& K, const Site& z,
                                        const Site& x, double t1, double t2,
                                        long n_samples, const ModelParams& params,
                                        const EquilibriumData& eq, RngStream& rng);

struct WindowComparison {
    Chi2Result entry;      // entry-point distribution on K
    KsResult visited;      // distinct K sites seen in [0, horizon]
    KsResult dwell;        // D_K truncated at the horizon
    KsResult local_time;   // local time at a marked site in [0, horizon]
    long n_loops = 0;
    long n_trajectories = 0;
    double horizon = 0.0;
};

// Window statistics of the conditioned long-loop layer (re-anchored at its
// entrance to K) against interlacement trajectories at level u = rho_eps.
WindowComparison long_loop_vs_interlacement(const LatticeBox& box,
                                            const ModelParams& params,
                                            double rho_eps, const SiteSet& K,
                                            long n_target, RngStream& rng);

}  // namespace bls
