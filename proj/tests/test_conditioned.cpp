#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <set>

#include "bls/conditioned.hpp"
#include "bls/stats.hpp"
#include "bls/thermo.hpp"

using namespace bls;

namespace {
const ModelParams kCrit{3, 1.0, 0.0};
}

TEST_CASE("grid boxes tile a centered block") {
    ConditionedConfig cfg;
    cfg.box = {6, 3, LatticeBox::Boundary::kFree, {}};
    cfg.grid_side = 3;
    const auto boxes = cfg.grid_boxes();
    REQUIRE(boxes.size() == 27);
    std::set<std::vector<int32_t>> offsets;
    for (const auto& b : boxes) {
        CHECK(b.side == 6);
        for (int32_t o : b.offset) CHECK((o == -6 || o == 0 || o == 6));
        offsets.insert(b.offset);
    }
    CHECK(offsets.size() == 27);  // all translates distinct
    cfg.grid_side = 1;
    const auto single = cfg.grid_boxes();
    REQUIRE(single.size() == 1);
    CHECK(single[0].offset == origin(3));
    CHECK(cfg.long_loop_threshold() == doctest::Approx(cfg.rho_eps * 216.0));
}

TEST_CASE("z_lambda is volume times the tail mass") {
    LatticeBox box{8, 3, LatticeBox::Boundary::kFree, {}};
    const double rho_eps = 0.5;
    const long j_min = static_cast<long>(std::floor(rho_eps * 512.0)) + 1;
    CHECK(z_lambda(box, kCrit, rho_eps) ==
          doctest::Approx(512.0 * tail_mass(kCrit, j_min - 1)).epsilon(1e-12));
    CHECK_THROWS_AS((void)z_lambda(box, kCrit, 0.0), std::invalid_argument);
}

TEST_CASE("big loop law: support, coverage, median") {
    LatticeBox box{10, 3, LatticeBox::Boundary::kFree, {}};
    const BigLoopLaw law(box, kCrit, 1.0);
    CHECK(law.j_min() == 1001);
    CHECK(law.j_cut() == 512 * 1001);
    CHECK(law.z_lambda() ==
          doctest::Approx(z_lambda(box, kCrit, 1.0)).epsilon(1e-12));
    CHECK(law.table_coverage() > 0.99);
    CHECK(law.table_coverage() < 1.0);
    // winding tail ~ j^{-d/2}: the median sits near j_min 2^{2/d}
    const double median = static_cast<double>(law.median_winding());
    CHECK(median / 1001.0 == doctest::Approx(std::pow(2.0, 2.0 / 3.0)).epsilon(0.02));

    RngStream rng = RngStream::from(21, 1);
    long below_median = 0;
    const long reps = 20000;
    for (long r = 0; r < reps; ++r) {
        const long j = law.sample_winding(rng);
        CHECK(j >= law.j_min());
        CHECK(j <= law.j_cut());
        if (j < law.median_winding()) ++below_median;
    }
    CHECK(static_cast<double>(below_median) / reps ==
          doctest::Approx(0.5).epsilon(0.03));
}

TEST_CASE("big loop sample geometry") {
    LatticeBox box{4, 3, LatticeBox::Boundary::kFree, {}};
    const BigLoopLaw law(box, kCrit, 0.05);
    CHECK(law.j_min() == 4);
    RngStream rng = RngStream::from(22, 1);
    for (int r = 0; r < 200; ++r) {
        const Loop l = big_loop_sample(law, rng);
        CHECK(l.winding >= 4);
        CHECK(box.contains(l.base));
        CHECK(l.skel.duration == doctest::Approx(static_cast<double>(l.winding)));
        l.skel.validate();
    }
}

TEST_CASE("rejection sampling: trivial and conditioned draws") {
    LatticeBox box{6, 3, LatticeBox::Boundary::kFree, {}};
    RngStream rng = RngStream::from(23, 1);
    // rho = 0 accepts the first attempt almost surely (the soup is nonempty)
    const RejectionSample free_draw =
        rejection_conditioned_sample(box, kCrit, 0.0, 400, rng, 100);
    CHECK(free_draw.attempts == 1);
    CHECK(mean_density(free_draw.sample) > 0.0);

    const double rho_target = critical_density(kCrit) + 0.8;
    RngStream rng2 = RngStream::from(23, 2);
    long attempts = 0;
    const long draws = 60;
    const long j_max = default_j_max(box, kCrit, 0.8);
    for (long r = 0; r < draws; ++r) {
        RngStream sub = rng2.substream(static_cast<uint64_t>(r));
        const RejectionSample rs =
            rejection_conditioned_sample(box, kCrit, rho_target, j_max, sub, 500000);
        attempts += rs.attempts;
        CHECK(mean_density(rs.sample) > rho_target);
    }
    // acceptance rate vs the direct exceedance estimate
    RngStream rng3 = RngStream::from(23, 3);
    const Estimate exceed =
        exceedance_probability(box, kCrit, rho_target, j_max, 60000, rng3);
    const double rate = static_cast<double>(draws) / static_cast<double>(attempts);
    const double rate_se = rate / std::sqrt(static_cast<double>(draws));
    CHECK(std::abs(rate - exceed.value) < 3.5 * (rate_se + exceed.std_error));

    CHECK_THROWS_AS((void)rejection_conditioned_sample(box, kCrit, 1e9, 400,
                                                       rng, 5),
                    std::runtime_error);
}

TEST_CASE("decomposed sample structure") {
    ConditionedConfig cfg;
    cfg.box = {6, 3, LatticeBox::Boundary::kFree, {}};
    cfg.rho_eps = 0.3;
    cfg.grid_side = 3;
    RngStream rng = RngStream::from(24, 1);
    const DecomposedSample s = decomposed_conditioned_sample(cfg, kCrit, rng);
    const auto boxes = cfg.grid_boxes();
    REQUIRE(s.soups.size() == 27);
    REQUIRE(s.long_count.size() == 27);
    REQUIRE(s.long_loops.size() == 27);  // exactly one per box by default
    const long j_min = static_cast<long>(std::floor(0.3 * 216.0)) + 1;
    for (size_t b = 0; b < 27; ++b) {
        CHECK(s.long_count[b] == 1);
        CHECK(boxes[b].contains(s.long_loops[b].base));
        CHECK(s.long_loops[b].winding >= j_min);
        s.long_loops[b].skel.validate();
    }
    // soup layer can be switched off
    cfg.include_soup = false;
    RngStream rng2 = RngStream::from(24, 2);
    const DecomposedSample bare = decomposed_conditioned_sample(cfg, kCrit, rng2);
    CHECK(bare.soups.empty());
    CHECK(bare.long_loops.size() == 27);
    // replay determinism
    RngStream a = RngStream::from(24, 3), b2 = RngStream::from(24, 3);
    const DecomposedSample da = decomposed_conditioned_sample(cfg, kCrit, a);
    const DecomposedSample db = decomposed_conditioned_sample(cfg, kCrit, b2);
    REQUIRE(da.long_loops.size() == db.long_loops.size());
    for (size_t i = 0; i < da.long_loops.size(); ++i) {
        CHECK(da.long_loops[i].base == db.long_loops[i].base);
        CHECK(da.long_loops[i].skel.jump_times == db.long_loops[i].skel.jump_times);
    }
}

TEST_CASE("poissonized long-loop count is zero-truncated Poisson") {
    ConditionedConfig cfg;
    cfg.box = {6, 3, LatticeBox::Boundary::kFree, {}};
    cfg.rho_eps = 0.5;
    cfg.grid_side = 1;
    cfg.poissonized = true;
    cfg.include_soup = false;
    const double z = z_lambda(cfg.box, kCrit, 0.5);
    RngStream rng = RngStream::from(25, 1);
    const long reps = 4000;
    long multi = 0;
    for (long r = 0; r < reps; ++r) {
        RngStream sub = rng.substream(static_cast<uint64_t>(r));
        const DecomposedSample s = decomposed_conditioned_sample(cfg, kCrit, sub);
        REQUIRE(s.long_count.size() == 1);
        CHECK(s.long_count[0] >= 1);
        if (s.long_count[0] >= 2) ++multi;
    }
    // P(k >= 2 | k >= 1) = 1 - z e^{-z} / (1 - e^{-z})
    const double p2 = 1.0 - z * std::exp(-z) / (1.0 - std::exp(-z));
    const double phat = static_cast<double>(multi) / reps;
    const double sigma = std::sqrt(p2 * (1.0 - p2) / reps);
    CHECK(std::abs(phat - p2) < 3.5 * sigma + 1e-12);
}

TEST_CASE("long loops hitting a window") {
    ConditionedConfig cfg;
    cfg.box = {8, 3, LatticeBox::Boundary::kFree, {}};
    cfg.rho_eps = 0.3;
    cfg.grid_side = 1;
    const long samples = 300;
    RngStream rng = RngStream::from(26, 1);
    const CountStats point =
        long_loops_hitting(cfg, kCrit, SiteSet::point(3), samples, rng);
    RngStream rng2 = RngStream::from(26, 1);  // same stream: coupled samples
    const CountStats ball =
        long_loops_hitting(cfg, kCrit, SiteSet::ball(3, 1), samples, rng2);
    CHECK(point.counts.size() == 300);
    for (long c : point.counts) CHECK((c == 0 || c == 1));
    CHECK(point.mean > 0.05);
    CHECK(ball.mean >= point.mean);  // larger window is hit at least as often

    RngStream rng3 = RngStream::from(26, 2);
    const CountStats none = long_loops_hitting(cfg, kCrit, SiteSet(), 50, rng3);
    for (long c : none.counts) CHECK(c == 0);
}

TEST_CASE("tilting check matches the tilted ensemble") {
    ModelParams p{3, 1.0, -0.5};
    LatticeBox box{6, 3, LatticeBox::Boundary::kFree, {}};
    RngStream rng = RngStream::from(27, 1);
    const TiltingReport rep = tilting_check(box, p, 0.08, 200000, 800, rng);
    CHECK(rep.accepted > 200);
    CHECK(rep.target_density == doctest::Approx(rho(p, -0.5) + 0.08));
    CHECK(rep.mu_tilted == doctest::Approx(invert_density(p, rep.target_density)));
    CHECK(rho(p, rep.mu_tilted) == doctest::Approx(rep.target_density).epsilon(1e-8));
    CHECK(rep.conditioned_mean > rep.target_density);  // overshoot is positive
    CHECK(rep.mean_rel_error < 0.12);
    // the tilted equivalence is asymptotic in the volume; at this box size
    // the local-time laws should already be close
    CHECK(rep.ks_statistic < 0.2);

    CHECK_THROWS_AS((void)tilting_check(box, kCrit, 0.1, 10, 10, rng),
                    std::domain_error);
    CHECK_THROWS_AS((void)tilting_check(box, p, 5.0, 10, 10, rng),
                    std::domain_error);
}

TEST_CASE("exceedance event vs long-loop event") {
    LatticeBox box{8, 3, LatticeBox::Boundary::kFree, {}};
    const double rho_eps = 0.8;
    RngStream rng = RngStream::from(28, 1);
    const EventOverlap o = exceedance_event_overlap(
        box, kCrit, rho_eps, default_j_max(box, kCrit, rho_eps), 60000, rng);
    CHECK(o.p_rho > 0.0);
    CHECK(o.p_lambda > 0.0);
    // the two rare events agree on most draws
    CHECK(o.p_symdiff < 0.5 * o.p_rho);
    CHECK(o.p_lambda / o.p_rho > 0.5);
    CHECK(o.p_lambda / o.p_rho < 2.0);
}
