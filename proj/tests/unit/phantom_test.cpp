#include <doctest.h>

#include <cmath>

#include "oracles.hpp"
#include "quasi/metrics.hpp"
#include "quasi/phantom.hpp"

using namespace quasi;

TEST_SUITE("phantom") {
  TEST_CASE("blocks phantom with one level is constant") {
    PhantomSpec spec;
    spec.kind = PhantomKind::blocks;
    spec.dims = Dims{16, 16, 4};
    spec.levels = {0.5};
    const Volume v = make_phantom(spec);
    CHECK(max_abs_diff(v, Volume(spec.dims, 0.5)) == 0.0);
  }

  TEST_CASE("phantoms are deterministic") {
    for (PhantomKind kind : {PhantomKind::layered_slab,
                             PhantomKind::nested_ellipsoids,
                             PhantomKind::blocks}) {
      PhantomSpec spec;
      spec.kind = kind;
      spec.dims = Dims{20, 18, 3};
      spec.seed = 77;
      const Volume a = make_phantom(spec);
      const Volume b = make_phantom(spec);
      CHECK(max_abs_diff(a, b) == 0.0);
    }
  }

  TEST_CASE("layered slab means match the intensity table exactly") {
    PhantomSpec spec;
    spec.kind = PhantomKind::layered_slab;
    spec.dims = Dims{24, 24, 1};
    spec.levels = {0.1, 0.4, 0.2, 0.7};
    const Volume v = make_phantom(spec);
    // 24 rows over 4 bands: 6 rows each, every voxel exactly at the table
    // value; the region mean only accumulates summation rounding.
    for (int band = 0; band < 4; ++band) {
      const double level = spec.levels[static_cast<std::size_t>(band)];
      for (int y = 6 * band; y < 6 * (band + 1); ++y) {
        for (int x = 0; x < 24; ++x) CHECK(v.at(x, y, 0) == level);
      }
      const Region r{0, 6 * band, 0, 24, 6, 1};
      const RegionStats s = region_stats(v, r);
      CHECK(s.mean == doctest::Approx(level).epsilon(1e-14));
      CHECK(s.stddev <= 1e-14);
    }
  }

  TEST_CASE("layered slab validates the band count") {
    PhantomSpec spec;
    spec.kind = PhantomKind::layered_slab;
    spec.dims = Dims{8, 8, 1};
    spec.levels = {0.3, 0.5};
    CHECK_THROWS_AS((void)make_phantom(spec), std::invalid_argument);
    spec.levels = {0.3, 0.5, 1.2, 0.4};
    CHECK_THROWS_AS((void)make_phantom(spec), std::invalid_argument);
  }

  TEST_CASE("zero-sigma noise is the identity") {
    auto rng = testing::make_rng(91);
    const Volume v = testing::random_volume(rng, Dims{12, 12, 1});
    NoiseSpec spec;
    spec.kind = NoiseKind::awgn;
    spec.sigma = 0.0;
    CHECK(max_abs_diff(add_noise(v, spec), v) == 0.0);
  }

  TEST_CASE("awgn sample statistics") {
    // Mid-gray input keeps the [0, 4] clip inactive.
    const Volume mid(Dims{1000, 1000, 1}, 0.5);
    NoiseSpec spec;
    spec.kind = NoiseKind::awgn;
    spec.sigma = 0.1;
    spec.seed = 4242;
    const Volume noisy = add_noise(mid, spec);

    double mean = 0.0;
    for (std::size_t i = 0; i < noisy.size(); ++i) mean += noisy[i] - mid[i];
    mean /= static_cast<double>(noisy.size());
    CHECK(std::abs(mean) <=
          5.0 * spec.sigma / std::sqrt(static_cast<double>(noisy.size())));

    double var = 0.0;
    for (std::size_t i = 0; i < noisy.size(); ++i) {
      const double dlt = noisy[i] - mid[i] - mean;
      var += dlt * dlt;
    }
    var /= static_cast<double>(noisy.size());
    CHECK(var == doctest::Approx(spec.sigma * spec.sigma).epsilon(0.05));
  }

  TEST_CASE("poisson sample statistics") {
    const Volume mid(Dims{400, 400, 1}, 0.5);
    NoiseSpec spec;
    spec.kind = NoiseKind::poisson;
    spec.photon_scale = 200.0;
    spec.seed = 7;
    const Volume noisy = add_noise(mid, spec);
    double mean = 0.0;
    for (std::size_t i = 0; i < noisy.size(); ++i) mean += noisy[i];
    mean /= static_cast<double>(noisy.size());
    CHECK(mean == doctest::Approx(0.5).epsilon(0.01));
    double var = 0.0;
    for (std::size_t i = 0; i < noisy.size(); ++i) {
      var += (noisy[i] - mean) * (noisy[i] - mean);
    }
    var /= static_cast<double>(noisy.size());
    // Var[X/s] = f/s for X ~ Poisson(s f).
    CHECK(var == doctest::Approx(0.5 / 200.0).epsilon(0.05));
  }

  TEST_CASE("speckle is log-normal multiplicative") {
    const Volume c(Dims{500, 500, 1}, 0.5);
    NoiseSpec spec;
    spec.kind = NoiseKind::speckle;
    spec.sigma = 0.2;
    spec.seed = 11;
    const Volume noisy = add_noise(c, spec);
    double mean_log = 0.0;
    for (std::size_t i = 0; i < noisy.size(); ++i) {
      mean_log += std::log(noisy[i] / 0.5);
    }
    mean_log /= static_cast<double>(noisy.size());
    CHECK(std::abs(mean_log) <=
          5.0 * spec.sigma / std::sqrt(static_cast<double>(noisy.size())));
  }

  TEST_CASE("noise respects the input range precondition") {
    Volume bad(Dims{4, 4, 1}, 1.5);
    NoiseSpec spec;
    CHECK_THROWS_AS((void)add_noise(bad, spec), std::invalid_argument);
  }

  TEST_CASE("log domain round trip") {
    auto rng = testing::make_rng(92);
    const Volume v = testing::random_volume(rng, Dims{20, 20, 2});
    const Volume back = from_log_domain(to_log_domain(v, 1e-3), 1e-3);
    for (std::size_t i = 0; i < v.size(); ++i) {
      CHECK(back[i] == doctest::Approx(v[i]).epsilon(1e-12));
    }

    const Volume one(Dims{2, 2, 1}, 1.0);
    CHECK(to_log_domain(one, 1e-3)[0] == doctest::Approx(std::log(1.001)));
    CHECK_THROWS_AS((void)to_log_domain(one, 0.0), std::invalid_argument);

    Volume neg(Dims{2, 2, 1}, -0.5);
    CHECK_THROWS_AS((void)to_log_domain(neg), std::invalid_argument);
  }

  TEST_CASE("log transform turns multiplicative noise additive") {
    auto rng = testing::make_rng(93);
    const Volume f = testing::random_volume(rng, Dims{30, 30, 1}, 0.25, 1.0);
    NoiseSpec spec;
    spec.kind = NoiseKind::speckle;
    spec.sigma = 0.15;
    spec.seed = 21;
    const Volume g = add_noise(f, spec);
    const double offset = 1e-9;
    const Volume log_g = to_log_domain(g, offset);
    const Volume log_f = to_log_domain(f, offset);
    // log(f * n) - log(f) == log(n) up to the vanishing offset.
    for (std::size_t i = 0; i < f.size(); ++i) {
      const double log_n = log_g[i] - log_f[i];
      CHECK(std::exp(log_n) * f[i] == doctest::Approx(g[i]).epsilon(1e-6));
    }
  }

  TEST_CASE("sequences") {
    PhantomSpec pspec;
    pspec.kind = PhantomKind::layered_slab;
    pspec.dims = Dims{64, 64, 1};
    const Volume truth = make_phantom(pspec);
    NoiseSpec nspec;
    nspec.kind = NoiseKind::awgn;
    nspec.sigma = 0.1;
    nspec.seed = 31;

    const VolumeSequence one = make_sequence(truth, 1, nspec);
    CHECK(one.frame_count() == 1);

    const VolumeSequence seq = make_sequence(truth, 4, nspec);
    for (int a = 0; a < 4; ++a) {
      for (int b = a + 1; b < 4; ++b) {
        CHECK(max_abs_diff(seq.frame(a), seq.frame(b)) > 0.0);
      }
    }

    // Averaging 64 frames shrinks the noise by a factor of 8.
    const Volume flat(Dims{64, 64, 1}, 0.5);
    const VolumeSequence many = make_sequence(flat, 64, nspec);
    const Volume mean = mean_of(many);
    double var = 0.0;
    for (std::size_t i = 0; i < mean.size(); ++i) {
      var += (mean[i] - 0.5) * (mean[i] - 0.5);
    }
    const double residual_std =
        std::sqrt(var / static_cast<double>(mean.size()));
    CHECK(residual_std == doctest::Approx(0.1 / 8.0).epsilon(0.10));
  }

  TEST_CASE("generation is deterministic per (seed, frame, voxel)") {
    PhantomSpec pspec;
    pspec.kind = PhantomKind::blocks;
    pspec.dims = Dims{16, 16, 2};
    pspec.seed = 5;
    const Volume truth = make_phantom(pspec);
    NoiseSpec nspec;
    nspec.kind = NoiseKind::awgn;
    nspec.sigma = 0.05;
    nspec.seed = 6;
    const VolumeSequence a = make_sequence(truth, 3, nspec);
    const VolumeSequence b = make_sequence(truth, 3, nspec);
    CHECK(max_abs_diff(a, b) == 0.0);
    // Frame draws are independent of how many frames are requested.
    const VolumeSequence longer = make_sequence(truth, 5, nspec);
    CHECK(max_abs_diff(a.frame(2), longer.frame(2)) == 0.0);
  }
}
