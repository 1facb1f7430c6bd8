#pragma once

#include <vector>

#include "bls/params.hpp"
#include "bls/paths.hpp"
#include "bls/rng.hpp"

namespace bls {

// The box Lambda = [-N/2, N/2)^d + offset.
struct LatticeBox {
    enum class Boundary { kFree, kDirichlet };

    int side = 0;
    int dim = 3;
    Boundary boundary = Boundary::kFree;
    Site offset;  // empty means the origin

    long volume() const;
    int lo(int axis) const;
    bool contains(std::span<const int32_t> x) const;
    bool contains(const PathSkeleton& path) const;  // every visited site inside
    Site uniform_site(RngStream& rng) const;

    void validate() const;
};

struct SoupSample {
    std::vector<Loop> loops;
    LatticeBox box;
    ModelParams params;
    long j_max = 0;
    double truncated_tail_mass = 0.0;  // beta * sum_{j > j_max} intensity

    double total_duration() const;
};

struct OccupationField {
    std::unordered_map<uint64_t, double> values;  // packed site -> local time
    double normalizer = 0.0;                      // |Lambda|
};

// Per-winding Poisson intensities of the soup in a box, with a bulk of
// exact per-j draws and a compound-Poisson tail read from a CDF table.
class SoupIntensity {
  public:
    SoupIntensity(const LatticeBox& box, const ModelParams& params, long j_max);

    long j_max() const { return j_max_; }
    double total_mean() const { return total_mean_; }  // expected loop count
    double lambda(long j) const;                       // per-site mean for winding j
    double truncated_tail_mass() const { return truncated_tail_mass_; }

    // all loop windings of one soup draw (order is not meaningful)
    std::vector<long> sample_windings(RngStream& rng) const;
    // total loop duration of one draw, geometry never materialized
    double sample_total_duration(RngStream& rng) const;

  private:
    long j_max_ = 0;
    long bulk_ = 0;
    double volume_ = 0.0;
    double beta_ = 0.0;
    std::vector<double> bulk_mean_;  // box-total Poisson mean, j = 1..bulk
    std::vector<double> tail_cdf_;   // cumulative box-total mean, j = bulk+1..j_max
    double tail_mean_ = 0.0;
    double total_mean_ = 0.0;
    double truncated_tail_mass_ = 0.0;
};

// One draw of the Poisson loop soup restricted to windings <= j_max. Free
// boundary lets bridges exit the box; dirichlet keeps a bridge only if it
// stays inside (exact Poisson thinning).
SoupSample sample_soup(const LatticeBox& box, const ModelParams& params, long j_max,
                       RngStream& rng);
SoupSample sample_soup(const SoupIntensity& intensity, const LatticeBox& box,
                       const ModelParams& params, RngStream& rng);

OccupationField occupation_field(const SoupSample& sample);

// Box-averaged occupation: sum over all of Z^d of local times over |Lambda|.
double mean_density(const SoupSample& sample);

struct Estimate {
    double value = 0.0;
    double std_error = 0.0;
};

// P(mean density > rho_target) by Monte Carlo over n_reps independent draws.
Estimate exceedance_probability(const LatticeBox& box, const ModelParams& params,
                                double rho_target, long j_max, long n_reps,
                                RngStream& rng);

// default winding cutoff: generous multiple of the long-loop threshold at
// mu = 0, plain 10^4 for density studies
long default_j_max(const LatticeBox& box, const ModelParams& params, double rho_eps);

}  // namespace bls
