#include <algorithm>
#include <boost/math/special_functions/beta.hpp>
#include <boost/math/special_functions/digamma.hpp>
#include <boost/math/special_functions/gamma.hpp>
#include <boost/math/special_functions/trigamma.hpp>
#include <cmath>
#include <numbers>
#include <vector>

#include "doctest.h"
#include "gammix/kernels.hpp"
#include "gammix/metrics.hpp"
#include "gammix/special_functions.hpp"
#include "oracles.hpp"

using namespace gammix;

namespace {

std::vector<double> log_grid(double lo, double hi, int n) {
  std::vector<double> v;
  for (int k = 0; k < n; ++k) v.push_back(lo * std::pow(hi / lo, k / double(n - 1)));
  return v;
}

/// psi(x) by recurrence up to x + 40 and the Euler-Maclaurin tail, in long double.
long double digamma_em(long double x) {
  long double acc = 0.0L;
  while (x < 40.0L) {
    acc -= 1.0L / x;
    x += 1.0L;
  }
  const long double x2 = 1.0L / (x * x);
  const long double tail =
      x2 * (1.0L / 12 - x2 * (1.0L / 120 - x2 * (1.0L / 252 - x2 * (1.0L / 240 - x2 * (1.0L / 132)))));
  return acc + std::log(x) - 0.5L / x - tail;
}

double numeric_kl(double z1, double e1, double z2, double e2) {
  auto f = [&](double x) {
    const double a = gamma_kernel_logpdf(x, KernelParams(z1, e1));
    const double b = gamma_kernel_logpdf(x, KernelParams(z2, e2));
    return std::exp(a) * (a - b);
  };
  auto pts = oracle::kernel_points(z1, e1);
  for (double p : oracle::kernel_points(z2, e2)) pts.push_back(p);
  return oracle::integral(f, pts);
}

}  // namespace

TEST_CASE("log_gamma: exact values") {
  CHECK(std::abs(log_gamma(1.0)) < 1e-15);
  CHECK(log_gamma(5.0) == doctest::Approx(std::log(24.0)).epsilon(1e-14));
  CHECK(log_gamma(0.5) == doctest::Approx(0.5 * std::log(std::numbers::pi)).epsilon(1e-14));
  CHECK_THROWS_AS(log_gamma(0.0), std::domain_error);
  CHECK_THROWS_AS(log_gamma(-1.5), std::domain_error);
}

TEST_CASE("log_gamma: 1e-12 relative against Boost on [1e-6, 1e6]") {
  double worst = 0.0;
  for (double x : log_grid(1e-6, 1e6, 4001)) {
    const long double ref = boost::math::lgamma(static_cast<long double>(x));
    const double err = std::abs(log_gamma(x) - static_cast<double>(ref)) / std::max(1.0L, std::abs(ref));
    worst = std::max(worst, err);
  }
  CHECK(worst <= 1e-12);
}

TEST_CASE("digamma and trigamma: identities and 1e-10 absolute on [1e-3, 1e6]") {
  CHECK(trigamma(1.0) == doctest::Approx(std::numbers::pi * std::numbers::pi / 6.0).epsilon(1e-13));
  CHECK(std::abs(digamma(1.0) - static_cast<double>(digamma_em(1.0L))) < 1e-12);
  CHECK(std::abs(digamma(1.0) + 0.5772156649015329) < 1e-12);
  CHECK(std::abs(digamma(4.7) - digamma(3.7) - 1.0 / 3.7) < 1e-13);
  double worst_psi = 0.0;
  double worst_psi1 = 0.0;
  for (double x : log_grid(1e-3, 1e6, 3001)) {
    const long double xl = x;
    worst_psi = std::max(worst_psi, std::abs(digamma(x) - static_cast<double>(boost::math::digamma(xl))));
    worst_psi1 = std::max(worst_psi1, std::abs(trigamma(x) - static_cast<double>(boost::math::trigamma(xl))));
  }
  CHECK(worst_psi <= 1e-10);
  CHECK(worst_psi1 <= 1e-10);
  CHECK_THROWS_AS(digamma(0.0), std::domain_error);
  CHECK_THROWS_AS(trigamma(-2.0), std::domain_error);
}

TEST_CASE("incomplete gamma and beta against Boost") {
  for (double a : {0.3, 1.0, 4.5, 30.0}) {
    for (double x : {0.01, 0.5, 2.0, 10.0, 50.0}) {
      CHECK(gamma_p(a, x) == doctest::Approx(boost::math::gamma_p(a, x)).epsilon(1e-12));
    }
  }
  for (double a : {0.5, 2.0, 7.0}) {
    for (double b : {0.5, 1.0, 3.0}) {
      for (double x : {0.05, 0.4, 0.9}) {
        CHECK(beta_inc(a, b, x) == doctest::Approx(boost::math::ibeta(a, b, x)).epsilon(1e-12));
      }
    }
  }
}

TEST_CASE("KernelParams rejects nonpositive parameters") {
  CHECK_THROWS_AS(KernelParams(0.0, 1.0), std::domain_error);
  CHECK_THROWS_AS(KernelParams(1.0, -1.0), std::domain_error);
  CHECK_THROWS_AS(gamma_kernel_logpdf(0.0, KernelParams(2.0, 1.0)), std::domain_error);
}

TEST_CASE("gamma kernel: closed forms and quadrature moments") {
  CHECK(gamma_kernel_logpdf(3.0, KernelParams(1.0, 2.0)) == doctest::Approx(std::log(0.5) - 1.5).epsilon(1e-14));
  CHECK(std::isfinite(gamma_kernel_logpdf(1.0, KernelParams(1e6, 1.0))));
  auto pdf = [](double z, double e) { return [z, e](double x) { return std::exp(gamma_kernel_logpdf(x, KernelParams(z, e))); }; };
  CHECK(oracle::integral(pdf(7.3, 0.9), oracle::kernel_points(7.3, 0.9)) == doctest::Approx(1.0).epsilon(1e-8));
  const auto f = pdf(50.0, 4.0);
  const auto pts = oracle::kernel_points(50.0, 4.0);
  const double mean = oracle::integral([&](double x) { return x * f(x); }, pts);
  const double var = oracle::integral([&](double x) { return (x - 4.0) * (x - 4.0) * f(x); }, pts);
  CHECK(std::abs(mean - 4.0) < 1e-8);
  CHECK(std::abs(var - 16.0 / 50.0) < 1e-6);
}

TEST_CASE("gamma kernel: normalization over the (z, eps) grid") {
  for (double z : {0.5, 1.0, 5.0, 50.0, 500.0, 5e4}) {
    for (double eps : {0.01, 1.0, 100.0}) {
      auto f = [&](double x) { return std::exp(gamma_kernel_logpdf(x, KernelParams(z, eps))); };
      const double mass = oracle::integral(f, oracle::kernel_points(z, eps));
      CAPTURE(z);
      CAPTURE(eps);
      CHECK(std::abs(mass - 1.0) < 1e-7);
    }
  }
}

TEST_CASE("gamma kernel sampler") {
  Rng rng(42);
  const KernelParams p(1.0, 1.0);
  std::vector<double> xs(20000);
  for (double& x : xs) {
    x = gamma_kernel_sample(rng, p);
    REQUIRE(x > 0.0);
  }
  std::sort(xs.begin(), xs.end());
  double d = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double F = 1.0 - std::exp(-xs[i]);
    d = std::max({d, std::abs(F - double(i) / xs.size()), std::abs(F - double(i + 1) / xs.size())});
  }
  CHECK(d < 1.628 / std::sqrt(double(xs.size())));  // KS critical value at 1%

  Rng a(7);
  Rng b(7);
  for (int k = 0; k < 100; ++k) CHECK(gamma_kernel_sample(a, p) == gamma_kernel_sample(b, p));

  const int n = 1000000;
  Rng r(11);
  const KernelParams q(100.0, 2.0);
  double s = 0.0;
  double s2 = 0.0;
  for (int k = 0; k < n; ++k) {
    const double x = gamma_kernel_sample(r, q);
    s += x;
    s2 += x * x;
  }
  const double mean = s / n;
  const double var = s2 / n - mean * mean;
  const double sd = std::sqrt(0.04);
  CHECK(std::abs(mean - 2.0) < 5.0 * sd / std::sqrt(double(n)));
  // SE of the sample variance for a near-normal variate: var * sqrt(2 / n)
  CHECK(std::abs(var - 0.04) < 5.0 * 0.04 * std::sqrt(2.0 / n) * 1.05);
}

TEST_CASE("inverse-Gamma kernel identity and normalization") {
  const double x = 0.7;
  const double z = 3.0;
  const double xi = 2.0;
  const double rhs = -2.0 * std::log(x) + gamma_kernel_logpdf(1.0 / x, KernelParams(z, 1.0 / xi));
  CHECK(std::abs(inv_gamma_kernel_logpdf(x, z, xi) - rhs) < 1e-12);
  CHECK(inv_gamma_kernel_logpdf(1.0, 1.0, 1.0) == doctest::Approx(-1.0).epsilon(1e-15));
  auto f = [](double t) { return std::exp(inv_gamma_kernel_logpdf(t, 4.0, 1.0)); };
  CHECK(oracle::integral(f, {0.05, 0.2, 0.5, 1.0, 2.0, 5.0, 20.0}) == doctest::Approx(1.0).epsilon(1e-8));

  Rng rng(5);
  double worst = 0.0;
  for (int k = 0; k < 1000; ++k) {
    const double t = std::exp(rng.uniform(-5.0, 5.0));
    const double zz = std::exp(rng.uniform(-2.0, 8.0));
    const double s = std::exp(rng.uniform(-3.0, 3.0));
    const double lhs = std::exp(inv_gamma_kernel_logpdf(t, zz, s));
    const double r = std::exp(-2.0 * std::log(t) + gamma_kernel_logpdf(1.0 / t, KernelParams(zz, 1.0 / s)));
    if (lhs > 0.0) worst = std::max(worst, std::abs(lhs - r) / lhs);
  }
  CHECK(worst < 1e-12);
}

TEST_CASE("KL between kernels with shared z") {
  CHECK(kl_gamma_same_z(5.0, 3.0, 3.0) == 0.0);
  CHECK(kl_gamma_same_z(2.0, 2.0, 1.0) == doctest::Approx(2.0 * (1.0 - std::log(2.0))).epsilon(1e-14));
  CHECK(std::abs(kl_gamma_same_z(2.0, 2.0, 1.0) - numeric_kl(2.0, 2.0, 2.0, 1.0)) < 1e-8);
  CHECK(kl_gamma_same_z(50.0, 1.1, 1.0) <= 50.0 * 0.01);
  CHECK(kl_gamma_same_z(50.0, 0.9, 1.0) <= 50.0 * 0.01);
}

TEST_CASE("KL between kernels with shared eps") {
  CHECK(kl_gamma_same_eps(10.0, 10.0, 3.0) == doctest::Approx(0.0).scale(1.0).epsilon(1e-15));
  CHECK(std::abs(kl_gamma_same_eps(10.0, 12.0, 1.0) - numeric_kl(10.0, 1.0, 12.0, 1.0)) < 1e-8);
  CHECK(std::abs(kl_gamma_same_eps(10.0, 12.0, 1.0) - kl_gamma_same_eps(10.0, 12.0, 7.0)) < 1e-12);
}

TEST_CASE("KL closed forms match quadrature on 5x5 grids") {
  const double zs[] = {0.8, 2.0, 5.0, 20.0, 100.0};
  const double ratios[] = {0.5, 0.8, 1.0, 1.3, 3.0};
  for (double z : zs) {
    for (double r : ratios) {
      CAPTURE(z);
      CAPTURE(r);
      CHECK(std::abs(kl_gamma_same_z(z, r, 1.0) - numeric_kl(z, r, z, 1.0)) < 1e-7);
      CHECK(std::abs(kl_gamma_same_eps(z, z * r, 1.3) - numeric_kl(z, 1.3, z * r, 1.3)) < 1e-7);
    }
  }
}

TEST_CASE("kernel moments I_k against the inverse-Gamma closed form") {
  for (double z : {3.0, 10.0, 100.0}) {
    for (double x : {0.3, 1.0, 7.0}) {
      CHECK(std::abs(kernel_moment(z, x, 0).value - (1.0 + 1.0 / (z - 1.0))) < 1e-8);
    }
  }
  for (int k = 1; k <= 4; ++k) {
    for (double z : {12.0, 50.0, 400.0}) {
      const double ref = static_cast<double>(oracle::kernel_moment_closed(z, 1.0, k));
      CAPTURE(k);
      CAPTURE(z);
      CHECK(kernel_moment(z, 1.0, k).value == doctest::Approx(ref).epsilon(1e-8));
    }
  }
  CHECK(std::abs(kernel_mu(400.0, 2) - 1.0) < 0.05);
  CHECK(std::abs(kernel_moment(200.0, 0.5, 3).mu - kernel_moment(200.0, 5.0, 3).mu) < 1e-6);
  CHECK_THROWS_AS(kernel_moment(2.5, 1.0, 2), std::domain_error);
  CHECK_THROWS_AS(kernel_moment(50.0, 1.0, 9), std::domain_error);
  CHECK_THROWS_AS(kernel_moment(50.0, 0.0, 1), std::domain_error);
}

TEST_CASE("Gaussian approximation of the kernel in eps at large z") {
  const double z = 1e4;
  const double scale = std::sqrt(z / (2.0 * std::numbers::pi));
  double worst = 0.0;
  for (int k = -200; k <= 200; ++k) {
    const double u = 1.0 + 0.01 * k / 200.0;
    const double exact = std::exp(z * std::log(z) - z / u - log_gamma(z) - z * std::log(u));
    const double approx = scale * std::exp(-z * (1.0 - u) * (1.0 - u) / 2.0);
    worst = std::max(worst, std::abs(exact - approx) / scale);
  }
  CHECK(worst < 0.05);
}

TEST_CASE("L1 distance between shifted kernels obeys sqrt(2z) delta") {
  for (double z : {2.0, 20.0, 200.0}) {
    for (double delta : {0.01, 0.1}) {
      const double e1 = 1.0 + delta;
      auto f = [&](double x) {
        return std::abs(std::exp(gamma_kernel_logpdf(x, KernelParams(z, e1))) -
                        std::exp(gamma_kernel_logpdf(x, KernelParams(z, 1.0))));
      };
      auto pts = oracle::kernel_points(z, 1.0);
      // the two densities cross once, at x* = z log(e1) / (z (1 - 1/e1))
      pts.push_back(std::log(e1) / (1.0 - 1.0 / e1));
      const double l1 = oracle::integral(f, pts);
      CAPTURE(z);
      CAPTURE(delta);
      CHECK(l1 <= std::sqrt(2.0 * z) * delta);
    }
  }
}
