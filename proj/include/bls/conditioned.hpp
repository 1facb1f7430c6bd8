#pragma once

#include <vector>

#include "bls/soup.hpp"

namespace bls {

// Geometry of the conditioned study: a base box Lambda, the excess density
// rho_eps, and a centered grid of grid_side^d translated copies.
struct ConditionedConfig {
    LatticeBox box;
    double rho_eps = 0.5;
    int grid_side = 1;
    long j_max = 0;  // soup winding cutoff; 0 picks the default
    bool poissonized = false;
    bool include_soup = true;

    double long_loop_threshold() const {
        return rho_eps * static_cast<double>(box.volume());
    }
    std::vector<LatticeBox> grid_boxes() const;
};

// Z_Lambda: total mass of loops rooted in the box with duration above
// rho_eps * |Lambda| (mu = 0).
double z_lambda(const LatticeBox& box, const ModelParams& params, double rho_eps);

// Winding law of a single conditioned long loop: mass (1/j) p_{beta j}(0)
// restricted to j > rho_eps |Lambda| / beta, tabulated up to a cutoff.
class BigLoopLaw {
  public:
    BigLoopLaw(const LatticeBox& box, const ModelParams& params, double rho_eps,
               long cut_multiplier = 512);

    long j_min() const { return j_min_; }
    long j_cut() const { return j_cut_; }
    double z_lambda() const { return z_; }
    double table_coverage() const;  // tabulated fraction of the tail mass
    long median_winding() const;
    long sample_winding(RngStream& rng) const;
    Loop sample(RngStream& rng) const;  // uniform base in the box + bridge

  private:
    LatticeBox box_;
    ModelParams params_;
    long j_min_ = 0;
    long j_cut_ = 0;
    double z_ = 0.0;
    std::vector<double> cdf_;
    double table_mass_ = 0.0;
};

struct RejectionSample {
    SoupSample sample;
    long attempts = 0;
};

// Exact draw from the soup conditioned on mean density > rho, by repeated
// sampling. Winding counts decide acceptance before any geometry is built.
RejectionSample rejection_conditioned_sample(const LatticeBox& box,
                                             const ModelParams& params, double rho,
                                             long j_max, RngStream& rng,
                                             long max_attempts);

Loop big_loop_sample(const BigLoopLaw& law, RngStream& rng);

struct DecomposedSample {
    std::vector<SoupSample> soups;   // one per grid box (empty if soup disabled)
    std::vector<Loop> long_loops;
    std::vector<long> long_count;    // long loops contributed by each box
};

// Per box: an independent unconditioned soup plus a long-loop layer with
// exactly one loop (default) or a zero-truncated-Poisson(Z_Lambda) number
// of loops (poissonized).
DecomposedSample decomposed_conditioned_sample(const ConditionedConfig& config,
                                               const ModelParams& params,
                                               RngStream& rng);

struct CountStats {
    double mean = 0.0;
    double variance = 0.0;
    double dispersion = 0.0;
    std::vector<long> counts;
};

// Number of distinct long loops intersecting K per decomposed sample, across
// the whole grid (only the long-loop layer is materialized).
CountStats long_loops_hitting(const ConditionedConfig& config,
                              const ModelParams& params, const SiteSet& K,
                              long n_samples, RngStream& rng);

struct TiltingReport {
    double mu_tilted = 0.0;
    double target_density = 0.0;       // rho(mu) + rho_eps = rho(mu_tilted)
    double conditioned_mean = 0.0;     // E[mean density | exceedance]
    double conditioned_std_error = 0.0;
    double mean_rel_error = 0.0;       // |conditioned_mean/target - 1|
    long accepted = 0;
    long attempts = 0;
    double ks_statistic = 0.0;         // local time at 0, conditioned vs tilted
    double ks_p_value = 1.0;
};

// Subcritical check: conditioning at mu on density > rho(mu) + rho_eps vs
// the unconditioned soup at the tilted potential b(rho(mu) + rho_eps).
TiltingReport tilting_check(const LatticeBox& box, const ModelParams& params,
                            double rho_eps, long n_attempts, long n_tilted,
                            RngStream& rng);

struct EventOverlap {
    double p_rho = 0.0;      // P(mean density > rho_c + rho_eps)
    double p_lambda = 0.0;   // P(some winding above the long-loop threshold)
    double p_symdiff = 0.0;  // P(exactly one of the two)
    long n_reps = 0;
};

EventOverlap exceedance_event_overlap(const LatticeBox& box, const ModelParams& params,
                                      double rho_eps, long j_max, long n_reps,
                                      RngStream& rng);

}  // namespace bls
