#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "bls/bessel.hpp"
#include "bls/kernels.hpp"
#include "bls/params.hpp"
#include "bls/rng.hpp"

using namespace bls;

TEST_CASE("scaled bessel against reference values") {
    CHECK(scaled_bessel_i(0, 1.0) == doctest::Approx(0.46575960759364044).epsilon(1e-13));
    CHECK(scaled_bessel_i(1, 1.0) == doctest::Approx(0.20791041534970845).epsilon(1e-13));
    CHECK(scaled_bessel_i(5, 2.5) == doctest::Approx(0.0026959566142995797).epsilon(1e-12));
    CHECK(scaled_bessel_i(0, 100.0) == doctest::Approx(0.039944379299096683).epsilon(1e-12));
    CHECK(scaled_bessel_i(3, 500.0) == doctest::Approx(0.017685656692156124).epsilon(1e-12));
    CHECK(scaled_bessel_i(40, 60.0) == doctest::Approx(1.1807080815876919e-7).epsilon(1e-10));
}

TEST_CASE("scaled bessel edge cases") {
    CHECK(scaled_bessel_i(0, 0.0) == 1.0);
    CHECK(scaled_bessel_i(3, 0.0) == 0.0);
    CHECK(scaled_bessel_i(-4, 7.0) == scaled_bessel_i(4, 7.0));
    // no overflow far beyond the asymptotic crossover
    const double big = scaled_bessel_i(0, 1e8);
    CHECK(big > 0.0);
    CHECK(big == doctest::Approx(1.0 / std::sqrt(2.0 * M_PI * 1e8)).epsilon(1e-8));
}

TEST_CASE("transition kernel values and symmetry") {
    ModelParams p{3, 1.0, 0.0};
    CHECK(transition_kernel_origin(p, 2.5) ==
          doctest::Approx(0.13531220527893146).epsilon(1e-13));
    const Site x = {1, 2, 0};
    CHECK(transition_kernel(p, 4.0, x) ==
          doctest::Approx(0.0058199486292603326).epsilon(1e-13));
    const Site mx = {-1, -2, 0};
    CHECK(transition_kernel(p, 4.0, x) == transition_kernel(p, 4.0, mx));
    const Site perm = {2, 0, 1};
    CHECK(transition_kernel(p, 4.0, perm) ==
          doctest::Approx(transition_kernel(p, 4.0, x)).epsilon(1e-14));
}

TEST_CASE("transition kernel normalization in d=1") {
    // sum_x p_t(x) = 1: e^{-t} sum_n I_n(t) = 1
    ModelParams p{1, 1.0, 0.0};
    double total = 0.0;
    for (int n = -60; n <= 60; ++n) {
        Site x = {n};
        total += transition_kernel(p, 5.0, x);
    }
    CHECK(total == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("Chapman-Kolmogorov in d=1") {
    ModelParams p{1, 1.0, 0.0};
    const double t = 2.0, s = 3.0;
    for (int target : {0, 1, 3}) {
        double conv = 0.0;
        for (int y = -80; y <= 80; ++y) {
            Site a = {y}, b = {target - y};
            conv += transition_kernel(p, t, a) * transition_kernel(p, s, b);
        }
        Site x = {target};
        CHECK(conv == doctest::Approx(transition_kernel(p, t + s, x)).epsilon(1e-12));
    }
}

TEST_CASE("local CLT comparison tends to one") {
    ModelParams d3{3, 1.0, 0.0};
    ModelParams d1{1, 1.0, 0.0};
    CHECK(kernel_comparison(d3, 1e4) ==
          doctest::Approx(1.0001125232105375).epsilon(1e-10));
    CHECK(kernel_comparison(d1, 1e4) ==
          doctest::Approx(1.0000125007031983).epsilon(1e-10));
    CHECK(std::abs(kernel_comparison(d3, 1e6) - 1.0) <
          std::abs(kernel_comparison(d3, 1e4) - 1.0));
}

TEST_CASE("gaussian kernel origin") {
    ModelParams p{3, 1.0, 0.0};
    CHECK(gaussian_kernel_origin(p, 2.0) ==
          doctest::Approx(std::pow(2.0 * M_PI * 2.0, -1.5)).epsilon(1e-14));
    std::vector<double> x = {0.0, 0.0, 0.0};
    CHECK(gaussian_kernel(p, 2.0, x) == gaussian_kernel_origin(p, 2.0));
}

TEST_CASE("Green's function reference values") {
    ModelParams p{3, 1.0, 0.0};
    CHECK(green_function(p, origin(3)).value ==
          doctest::Approx(1.516386059151978).epsilon(1e-9));
    const Site e1 = {1, 0, 0};
    CHECK(green_function(p, e1).value ==
          doctest::Approx(0.51638605915197801).epsilon(1e-9));
    const Site x = {2, 1, 0};
    CHECK(green_function(p, x).value ==
          doctest::Approx(0.21558962084094053).epsilon(1e-9));
    const Site far = {20, 0, 0};
    CHECK(green_function(p, far).value ==
          doctest::Approx(0.023888271438286293).epsilon(1e-8));
}

TEST_CASE("Green's function asymptotics and errors") {
    ModelParams p{3, 1.0, 0.0};
    CHECK(green_asymptotic_constant(3) ==
          doctest::Approx(0.47746482927568601).epsilon(1e-14));
    const Site far = {20, 0, 0};
    const GreenResult g = green_function(p, far);
    CHECK(g.value / (green_asymptotic_constant(3) / 20.0) ==
          doctest::Approx(1.0).epsilon(0.01));
    CHECK(g.error < 1e-8);
    ModelParams d2{2, 1.0, 0.0};
    CHECK_THROWS_AS((void)green_function(d2, origin(2)), std::domain_error);
}

TEST_CASE("rng stream determinism and basic laws") {
    RngStream a = RngStream::from(7, 42);
    RngStream b = RngStream::from(7, 42);
    for (int i = 0; i < 100; ++i) CHECK(a.next_u64() == b.next_u64());
    RngStream c = RngStream::from(7, 43);
    CHECK(c.next_u64() != RngStream::from(7, 42).next_u64());

    RngStream u = RngStream::from(1, 1);
    double sum = 0.0;
    const int n = 200000;
    for (int i = 0; i < n; ++i) sum += u.uniform();
    CHECK(sum / n == doctest::Approx(0.5).epsilon(0.005));

    // poisson moments at small and large mean
    for (double mean : {0.7, 40.0}) {
        RngStream s = RngStream::from(2, static_cast<uint64_t>(mean * 100));
        double m1 = 0.0, m2 = 0.0;
        const int reps = 100000;
        for (int i = 0; i < reps; ++i) {
            const double k = static_cast<double>(s.poisson(mean));
            m1 += k;
            m2 += k * k;
        }
        m1 /= reps;
        m2 = m2 / reps - m1 * m1;
        CHECK(m1 == doctest::Approx(mean).epsilon(0.02));
        CHECK(m2 == doctest::Approx(mean).epsilon(0.05));
    }
}

TEST_CASE("site packing and site sets") {
    const Site a = {3, -5, 100};
    const Site b = {3, -5, 101};
    CHECK(pack_site(a) != pack_site(b));
    CHECK(pack_site(a) == pack_site(Site{3, -5, 100}));

    const SiteSet ball = SiteSet::ball(3, 1);
    CHECK(ball.size() == 7);
    CHECK(ball.contains(origin(3)));
    CHECK(ball.contains(Site{0, 0, 1}));
    CHECK_FALSE(ball.contains(Site{1, 1, 0}));
    CHECK(ball.diameter() == 2);
    const SiteSet box = SiteSet::box(3, 1);
    CHECK(box.size() == 27);
    CHECK(SiteSet::point(3).size() == 1);
}
