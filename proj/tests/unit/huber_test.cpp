#include <doctest.h>

#include <cmath>
#include <random>
#include <vector>

#include "oracles.hpp"
#include "quasi/huber.hpp"

using namespace quasi;

TEST_SUITE("huber") {
  TEST_CASE("loss values") {
    const double eps = 0.3;
    CHECK(huber_phi(0.0, eps) == 0.0);
    // Both branches agree at the threshold.
    CHECK(huber_phi(eps, eps) == doctest::Approx(0.5 * eps * eps));
    CHECK(eps * (std::abs(eps) - 0.5 * eps) ==
          doctest::Approx(0.5 * eps * eps));
    CHECK(huber_phi(2.0 * eps, eps) == doctest::Approx(1.5 * eps * eps));
    CHECK(huber_phi(-2.0 * eps, eps) == doctest::Approx(1.5 * eps * eps));
  }

  TEST_CASE("derivative") {
    const double eps = 0.2;
    CHECK(huber_phi_prime(0.0, eps) == 0.0);
    CHECK(huber_phi_prime(2.0 * eps, eps) == doctest::Approx(eps));
    CHECK(huber_phi_prime(-2.0 * eps, eps) == doctest::Approx(-eps));
  }

  TEST_CASE("derivative matches finite differences away from the kink") {
    const double eps = 0.15;
    const double h = 1e-7;
    auto rng = testing::make_rng(41);
    std::uniform_real_distribution<double> dist(-1.0, 1.0);
    int checked = 0;
    while (checked < 500) {
      const double l = dist(rng);
      if (std::abs(std::abs(l) - eps) < 1e-3) continue;  // skip the kink
      const double fd = (huber_phi(l + h, eps) - huber_phi(l - h, eps)) /
                        (2.0 * h);
      CHECK(std::abs(fd - huber_phi_prime(l, eps)) <= 1e-6);
      ++checked;
    }
  }

  TEST_CASE("irls weight branch values") {
    const double eps = 0.25;
    CHECK(irls_weight(0.0, eps) == 1.0);
    CHECK(irls_weight(1e-12, eps) == 1.0);
    CHECK(irls_weight(2.0 * eps, eps) == doctest::Approx(0.5));
    CHECK(irls_weight(-2.0 * eps, eps) == doctest::Approx(0.5));
  }

  TEST_CASE("weights stay in (0, 1] and reproduce the derivative") {
    auto rng = testing::make_rng(42);
    std::uniform_real_distribution<double> l_dist(-10.0, 10.0);
    std::uniform_real_distribution<double> e_dist(1e-3, 2.0);
    for (int i = 0; i < 100000; ++i) {
      const double l = l_dist(rng);
      const double eps = e_dist(rng);
      const double w = irls_weight(l, eps);
      CHECK(w > 0.0);
      CHECK(w <= 1.0);
      // IRLS consistency: w * l == phi'(l).
      CHECK(w * l == doctest::Approx(huber_phi_prime(l, eps)).epsilon(1e-12));
      // Majorization: phi(l) <= l^2/2, equality on the quadratic branch.
      CHECK(huber_phi(l, eps) <= 0.5 * l * l + 1e-15);
      if (std::abs(l) <= eps) {
        CHECK(huber_phi(l, eps) == doctest::Approx(0.5 * l * l));
      } else {
        CHECK(huber_phi(l, eps) < 0.5 * l * l);
      }
    }
  }

  TEST_CASE("convexity along random segments") {
    auto rng = testing::make_rng(43);
    std::uniform_real_distribution<double> dist(-5.0, 5.0);
    const double eps = 0.4;
    for (int i = 0; i < 1000; ++i) {
      const double a = dist(rng);
      const double b = dist(rng);
      const double t = std::uniform_real_distribution<double>(0.0, 1.0)(rng);
      const double lhs = huber_phi(t * a + (1.0 - t) * b, eps);
      const double rhs = t * huber_phi(a, eps) + (1.0 - t) * huber_phi(b, eps);
      CHECK(lhs <= rhs + 1e-12);
    }
  }

  TEST_CASE("mad sigma") {
    const std::vector<double> constant(10, 3.3);
    CHECK(mad_sigma(constant) == kMadSigmaFloor);

    const std::vector<double> three{-1.0, 0.0, 1.0};
    CHECK(mad_sigma(three) == doctest::Approx(1.4826));

    CHECK_THROWS_AS((void)mad_sigma(std::vector<double>{}),
                    std::invalid_argument);

    // Consistency on Gaussian samples.
    auto rng = testing::make_rng(44);
    std::normal_distribution<double> gauss(0.0, 1.0);
    std::vector<double> samples(100000);
    for (double& s : samples) s = gauss(rng);
    const double sigma = mad_sigma(samples);
    CHECK(sigma == doctest::Approx(1.0).epsilon(0.10));
  }

  TEST_CASE("auto epsilon") {
    const std::vector<double> three{-1.0, 0.0, 1.0};
    CHECK(auto_epsilon(three) == doctest::Approx(1.345 * 1.4826).epsilon(1e-4));

    const std::vector<double> constant(5, -2.0);
    CHECK(auto_epsilon(constant) == doctest::Approx(1.345e-6));

    auto rng = testing::make_rng(45);
    std::normal_distribution<double> gauss(0.0, 2.0);
    std::vector<double> samples(100000);
    for (double& s : samples) s = gauss(rng);
    CHECK(auto_epsilon(samples) == doctest::Approx(2.69).epsilon(0.10));
  }

  TEST_CASE("auto epsilon is scale equivariant") {
    auto rng = testing::make_rng(46);
    std::normal_distribution<double> gauss(0.1, 0.7);
    std::vector<double> samples(2001);
    for (double& s : samples) s = gauss(rng);
    std::vector<double> scaled = samples;
    const double c = 3.7;
    for (double& s : scaled) s *= c;
    CHECK(auto_epsilon(scaled) ==
          doctest::Approx(c * auto_epsilon(samples)).epsilon(1e-12));
  }

  TEST_CASE("weight fields") {
    const Dims d{6, 5, 1};
    auto rng = testing::make_rng(47);
    const Volume f = testing::random_volume(rng, d);
    const VolumeSequence inputs({f, f});

    // Zero residual everywhere: weights are all one.
    const WeightField zero_res =
        build_weights(f, inputs, HuberSpec{HuberMode::auto_mad, 1e-2, true});
    for (const Volume& w : zero_res.frames) {
      for (std::size_t i = 0; i < w.size(); ++i) CHECK(w[i] == 1.0);
    }

    // A single outlier of 10 eps gets weight 0.1, the rest stay 1.
    const double eps = 0.05;
    Volume noisy = f;
    noisy[7] += 10.0 * eps;
    const WeightField one_out = build_weights(
        f, VolumeSequence({noisy}), HuberSpec{HuberMode::fixed, eps, true});
    for (std::size_t i = 0; i < f.size(); ++i) {
      CHECK(one_out.frames[0][i] == doctest::Approx(i == 7 ? 0.1 : 1.0));
    }

    // Random case against a scalar loop.
    const VolumeSequence g = testing::random_sequence(rng, 3, d);
    const HuberSpec spec{HuberMode::fixed, 0.08, true};
    const WeightField wf = build_weights(f, g, spec);
    for (int t = 0; t < 3; ++t) {
      for (std::size_t i = 0; i < f.size(); ++i) {
        CHECK(wf.frames[static_cast<std::size_t>(t)][i] ==
              doctest::Approx(irls_weight(f[i] - g.frame(t)[i], 0.08)));
      }
    }

    const Volume wrong(Dims{5, 6, 1});
    CHECK_THROWS_AS((void)build_weights(wrong, inputs, spec), ShapeError);
  }

  TEST_CASE("pooled vs per-frame thresholds") {
    const Dims d{8, 8, 1};
    auto rng = testing::make_rng(48);
    const Volume f = testing::random_volume(rng, d);
    // One tight frame, one loose frame.
    Volume g0 = f, g1 = f;
    std::normal_distribution<double> tight(0.0, 0.01), loose(0.0, 0.2);
    for (std::size_t i = 0; i < f.size(); ++i) {
      g0[i] += tight(rng);
      g1[i] += loose(rng);
    }
    const VolumeSequence inputs({g0, g1});

    const WeightField pooled =
        build_weights(f, inputs, HuberSpec{HuberMode::auto_mad, 1e-2, true});
    CHECK(pooled.epsilons[0] == pooled.epsilons[1]);

    const WeightField split =
        build_weights(f, inputs, HuberSpec{HuberMode::auto_mad, 1e-2, false});
    CHECK(split.epsilons[0] < split.epsilons[1]);
  }
}
