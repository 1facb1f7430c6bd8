#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "bls/interlacements.hpp"
#include "bls/kernels.hpp"
#include "bls/stats.hpp"

using namespace bls;

namespace {
const ModelParams kD3{3, 1.0, 0.0};
}

TEST_CASE("escape probability of a point") {
    const EquilibriumData eq = equilibrium_solve(SiteSet::point(3), kD3, 20);
    REQUIRE(eq.escape.size() == 1);
    // e_{{0}}(0) = 1 / G(0, 0)
    const double oracle = 1.0 / green_function(kD3, origin(3)).value;
    CHECK(eq.escape[0] == doctest::Approx(oracle).epsilon(0.005));
    CHECK(eq.capacity == doctest::Approx(eq.escape[0]).epsilon(1e-12));
    CHECK(eq.method == EquilibriumData::Method::kSolve);
    CHECK(eq.error < 0.01);
    CHECK(eq.escape_at(origin(3)) == eq.escape[0]);
    CHECK(eq.escape_at(Site{5, 5, 5}) == 0.0);
}

TEST_CASE("equilibrium solver argument checks") {
    CHECK_THROWS_AS((void)equilibrium_solve(SiteSet(), kD3, 20),
                    std::invalid_argument);
    CHECK_THROWS_AS((void)equilibrium_solve(SiteSet::point(3), kD3, 3),
                    std::invalid_argument);
    ModelParams d2{2, 1.0, 0.0};
    CHECK_THROWS_AS((void)equilibrium_solve(SiteSet::point(2), d2, 20),
                    std::domain_error);
}

TEST_CASE("capacity monotonicity and subadditivity") {
    const double cap_pt = equilibrium_solve(SiteSet::point(3), kD3, 15).capacity;
    const double cap_ball = equilibrium_solve(SiteSet::ball(3, 1), kD3, 15).capacity;
    const double cap_box = equilibrium_solve(SiteSet::box(3, 1), kD3, 15).capacity;
    CHECK(cap_pt < cap_ball);
    CHECK(cap_ball < cap_box);
    CHECK(cap_ball < 7.0 * cap_pt);   // subadditive over the 7 sites
    CHECK(cap_box < 27.0 * cap_pt);
}

TEST_CASE("solver is stable in the domain radius") {
    const EquilibriumData small = equilibrium_solve(SiteSet::ball(3, 1), kD3, 12);
    const EquilibriumData large = equilibrium_solve(SiteSet::ball(3, 1), kD3, 20);
    CHECK(std::abs(small.capacity - large.capacity) <= small.error + large.error);
}

TEST_CASE("two-point capacity matches the Green's function formula") {
    // Cap({0, x}) = 2 / (G(0) + G(x))
    const Site far = {24, 0, 0};
    const SiteSet K(std::vector<Site>{origin(3), far});
    const EquilibriumData eq = equilibrium_solve(K, kD3, 30);
    const double g0 = green_function(kD3, origin(3)).value;
    const double gx = green_function(kD3, far).value;
    CHECK(eq.capacity == doctest::Approx(2.0 / (g0 + gx)).epsilon(0.02));
    // both sites carry the same equilibrium weight by symmetry
    CHECK(eq.escape[0] == doctest::Approx(eq.escape[1]).epsilon(0.01));
}

TEST_CASE("monte carlo capacity agrees with the solver") {
    const EquilibriumData solve = equilibrium_solve(SiteSet::ball(3, 1), kD3, 20);
    RngStream rng = RngStream::from(31, 1);
    const EquilibriumData mc =
        equilibrium_mc(SiteSet::ball(3, 1), kD3, 40000, 40, rng);
    CHECK(mc.method == EquilibriumData::Method::kMonteCarlo);
    CHECK(mc.error > 0.0);
    CHECK(std::abs(mc.capacity - solve.capacity) <= 3.0 * mc.error + solve.error);
}

TEST_CASE("monte carlo capacity is stable in the escape radius") {
    RngStream a = RngStream::from(32, 1);
    RngStream b = RngStream::from(32, 2);
    const EquilibriumData near = equilibrium_mc(SiteSet::point(3), kD3, 60000, 25, a);
    const EquilibriumData farr = equilibrium_mc(SiteSet::point(3), kD3, 60000, 50, b);
    CHECK(std::abs(near.capacity - farr.capacity) <=
          3.0 * (near.error + farr.error) + 0.003);
}

TEST_CASE("interlacement sampling basics") {
    const SiteSet K = SiteSet::ball(3, 1);
    const EquilibriumData eq = equilibrium_solve(K, kD3, 15);
    const Horizons horizons = default_horizons(K);
    CHECK(horizons.forward == 20.0 * 4.0);

    RngStream rng = RngStream::from(33, 1);
    const InterlacementSample empty = sample_interlacements(K, 0.0, kD3, horizons, eq, rng);
    CHECK(empty.trajectories.empty());
    CHECK(empty.residual_return_bound > 0.0);

    const double u = 1.0;
    long total = 0, first_jump[6] = {0, 0, 0, 0, 0, 0};
    const long reps = 3000;
    long empty_draws = 0;
    for (long r = 0; r < reps; ++r) {
        RngStream sub = rng.substream(static_cast<uint64_t>(r));
        const InterlacementSample s = sample_interlacements(K, u, kD3, horizons, eq, sub);
        if (s.trajectories.empty()) ++empty_draws;
        total += static_cast<long>(s.trajectories.size());
        for (const TrajectoryWindow& w : s.trajectories) {
            CHECK(K.contains(w.entry));
            CHECK(w.forward.start == w.entry);
            CHECK(w.forward.duration == horizons.forward);
            // the backward part never returns to K after its first jump
            for (size_t k = 1; k <= w.backward.jump_count(); ++k)
                CHECK_FALSE(K.contains(w.backward.site_after(k)));
            if (w.forward.jump_count() > 0) {
                // first jump of the forward walk is isotropic
                const auto from = w.forward.site_after(0);
                const auto to = w.forward.site_after(1);
                for (int ax = 0; ax < 3; ++ax) {
                    const int df = to[static_cast<size_t>(ax)] - from[static_cast<size_t>(ax)];
                    if (df != 0) first_jump[2 * ax + (df > 0 ? 0 : 1)] += 1;
                }
            }
        }
    }
    const double mean = static_cast<double>(total) / reps;
    const double lam = u * eq.capacity;
    CHECK(mean == doctest::Approx(lam).epsilon(3.5 / std::sqrt(lam * reps)));
    const double p_empty = static_cast<double>(empty_draws) / reps;
    const double expected = std::exp(-lam);
    CHECK(std::abs(p_empty - expected) <
          3.5 * std::sqrt(expected * (1.0 - expected) / reps));
    const Chi2Result iso = chi2_goodness(
        std::vector<long>(first_jump, first_jump + 6),
        std::vector<double>(6, 1.0 / 6.0));
    CHECK(iso.p_value > 0.001);
}

TEST_CASE("restriction to a smaller window") {
    // trajectories sampled through ball(1) and restricted to {0} avoid it
    // with probability exp(-u Cap({0})), up to the forward-horizon cutoff
    const SiteSet K2 = SiteSet::ball(3, 1);
    const SiteSet K1 = SiteSet::point(3);
    const EquilibriumData eq2 = equilibrium_solve(K2, kD3, 15);
    const double cap1 = equilibrium_solve(K1, kD3, 20).capacity;
    const Horizons horizons{2000.0, 2000.0};
    const double u = 1.0;
    RngStream rng = RngStream::from(34, 1);
    const long reps = 2000;
    long avoid = 0;
    const Site zero = origin(3);
    for (long r = 0; r < reps; ++r) {
        RngStream sub = rng.substream(static_cast<uint64_t>(r));
        const InterlacementSample s = sample_interlacements(K2, u, kD3, horizons, eq2, sub);
        bool hit0 = false;
        for (const TrajectoryWindow& w : s.trajectories) {
            if (w.entry == zero || hits(w.forward, K1)) hit0 = true;
            if (hit0) break;
        }
        if (!hit0) ++avoid;
    }
    const double p_avoid = static_cast<double>(avoid) / reps;
    const double expected = std::exp(-u * cap1);
    const double sigma = std::sqrt(expected * (1.0 - expected) / reps);
    // allow 2% truncation slack on top of the statistical band
    CHECK(std::abs(p_avoid - expected) < 3.5 * sigma + 0.02);
}

TEST_CASE("residual return bound shrinks with the horizon") {
    const SiteSet K = SiteSet::ball(3, 1);
    const EquilibriumData eq = equilibrium_solve(K, kD3, 15);
    RngStream rng = RngStream::from(35, 1);
    const InterlacementSample a =
        sample_interlacements(K, 0.0, kD3, {500.0, 500.0}, eq, rng);
    const InterlacementSample b =
        sample_interlacements(K, 0.0, kD3, {2000.0, 2000.0}, eq, rng);
    CHECK(b.residual_return_bound < a.residual_return_bound);
    CHECK(b.residual_return_bound > 0.0);
}

TEST_CASE("windowed hitting asymptotics") {
    const SiteSet K = SiteSet::point(3);
    const EquilibriumData eq = equilibrium_solve(K, kD3, 20);
    Site x = {10, 0, 0};
    RngStream rng = RngStream::from(36, 1);
    const HittingReport rep =
        hitting_asymptotics_check(K, origin(3), x, 50.0, 200.0, 100000, kD3, eq, rng);
    CHECK(rep.predicted > 0.0);
    CHECK(rep.empirical > 0.0);
    CHECK(rep.ratio == doctest::Approx(1.0).epsilon(0.2));
    CHECK_THROWS_AS((void)hitting_asymptotics_check(K, origin(3), origin(3), 1.0,
                                                    2.0, 10, kD3, eq, rng),
                    std::invalid_argument);
}

TEST_CASE("long loops look like interlacements through a point window") {
    LatticeBox box{10, 3, LatticeBox::Boundary::kFree, {}};
    RngStream rng = RngStream::from(37, 1);
    const WindowComparison cmp =
        long_loop_vs_interlacement(box, kD3, 0.3, SiteSet::point(3), 400, rng);
    CHECK(cmp.n_loops == 400);
    CHECK(cmp.n_trajectories == 400);
    CHECK(cmp.horizon == 20.0);
    CHECK(cmp.entry.p_value == 1.0);  // a single entry site
    CHECK(cmp.dwell.p_value > 1e-3);
    CHECK(cmp.local_time.p_value > 1e-3);
}
