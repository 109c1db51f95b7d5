#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <algorithm>
#include <cmath>

#include "doctest.h"
#include "llrq/channel.hpp"
#include "llrq/modem.hpp"

using namespace llrq;

TEST_CASE("snr_to_noise_var") {
  CHECK(snr_to_noise_var(0.0) == 1.0);
  CHECK(snr_to_noise_var(10.0) == doctest::Approx(0.1).epsilon(1e-12));
  CHECK(snr_to_noise_var(-10.0) == doctest::Approx(10.0).epsilon(1e-12));
  CHECK(snr_to_noise_var(std::numeric_limits<double>::infinity()) == 0.0);
}

TEST_CASE("draw_channel determinism") {
  RngStream a(42), b(42);
  for (int i = 0; i < 100; ++i) CHECK(draw_channel(a) == draw_channel(b));
  RngStream c(43), d(42);
  CHECK(draw_channel(d) != draw_channel(c));
}

TEST_CASE("channel statistics over 1e6 draws") {
  RngStream rng(777);
  const int n = 1000000;
  double sum_h2 = 0.0;
  std::vector<double> mags(n);
  for (int i = 0; i < n; ++i) {
    auto h = draw_channel(rng);
    sum_h2 += std::norm(h);
    mags[i] = std::abs(h);
  }
  CHECK(sum_h2 / n > 0.99);
  CHECK(sum_h2 / n < 1.01);

  // Kolmogorov-Smirnov against Rayleigh(sigma = 1/sqrt(2)): F(x) = 1-exp(-x^2)
  std::sort(mags.begin(), mags.end());
  double ks = 0.0;
  for (int i = 0; i < n; ++i) {
    double f = 1.0 - std::exp(-mags[i] * mags[i]);
    ks = std::max(ks, std::fabs(f - static_cast<double>(i) / n));
    ks = std::max(ks, std::fabs(static_cast<double>(i + 1) / n - f));
  }
  CHECK(ks < 0.002);
}

TEST_CASE("apply_channel") {
  SUBCASE("snr 0 dB means unit noise variance") {
    CHECK(make_noise_model(0.0).noise_var == 1.0);
  }

  SUBCASE("noiseless sentinel returns exactly h*s") {
    RngStream rng(5);
    NoiseModel nm = make_noise_model(std::numeric_limits<double>::infinity());
    std::complex<double> s{0.6, -0.2};
    for (int i = 0; i < 20; ++i) {
      auto obs = apply_channel(s, nm, rng);
      CHECK(obs.r == obs.h * s);
    }
  }

  SUBCASE("noise variance matches 10 dB over 1e6 draws") {
    RngStream rng(99);
    NoiseModel nm = make_noise_model(10.0);
    const int n = 1000000;
    double acc = 0.0;
    std::complex<double> s{1.0, 0.0};
    for (int i = 0; i < n; ++i) {
      auto obs = apply_channel(s, nm, rng);
      acc += std::norm(obs.r - obs.h * s);
    }
    double var = acc / n;
    CHECK(var > 0.099);
    CHECK(var < 0.101);
  }

  SUBCASE("mean instantaneous SNR within 2%") {
    RngStream rng(123);
    NoiseModel nm = make_noise_model(7.0);
    const int n = 1000000;
    double acc = 0.0;
    std::complex<double> s{1.0, 0.0};
    for (int i = 0; i < n; ++i) {
      auto obs = apply_channel(s, nm, rng);
      acc += std::norm(obs.h) / obs.noise_var;
    }
    double expect = std::pow(10.0, 0.7);
    CHECK(std::fabs(acc / n - expect) / expect < 0.02);
  }
}

TEST_CASE("derived streams are label- and index-disjoint") {
  RngStream root(1);
  auto a = root.derive("alpha");
  auto b = root.derive("beta");
  auto a0 = root.derive("alpha", 0);
  auto a1 = root.derive("alpha", 1);
  CHECK(a.next_u64() != b.next_u64());
  CHECK(a0.next_u64() != a1.next_u64());
  // derivation is pure: repeating it gives the same stream
  auto a0x = root.derive("alpha", 0);
  CHECK(a0x.next_u64() == root.derive("alpha", 0).next_u64());
}
