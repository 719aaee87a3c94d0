#include <algorithm>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/special_functions/bessel.hpp>
#include <boost/math/special_functions/gamma.hpp>
#include <cmath>
#include <vector>

#include "doctest.h"
#include "gammix/approx_lab.hpp"
#include "gammix/density_zoo.hpp"
#include "gammix/kernels.hpp"
#include "oracles.hpp"

using namespace gammix;
using boost::math::quadrature::gauss_kronrod;

namespace {

double gamma33(double e) { return 13.5 * e * e * std::exp(-3.0 * e); }

double gk(const std::function<double(double)>& f, double a, double b) {
  return gauss_kronrod<double, 61>::integrate(f, a, b, 15, 1e-13);
}

double gk_split(const std::function<double(double)>& f, std::vector<double> pts) {
  std::sort(pts.begin(), pts.end());
  double s = 0.0;
  for (std::size_t k = 0; k + 1 < pts.size(); ++k) s += gk(f, pts[k], pts[k + 1]);
  return s;
}

}  // namespace

TEST_CASE("K_z of Exp(1) matches its Bessel closed form") {
  // int g_{z,eps}(x) e^{-eps} d eps = x^{z-1} z^z / Gamma(z) * 2 (z x)^{(1-z)/2} K_{z-1}(2 sqrt(z x))
  const auto f = make_density("exp").view();
  for (double z : {5.0, 20.0}) {
    for (double x : {0.05, 0.5, 1.0, 3.0}) {
      const double log_exact = (z - 1.0) * std::log(x) + z * std::log(z) - std::lgamma(z) + std::log(2.0) +
                               0.5 * (1.0 - z) * std::log(z * x) +
                               std::log(boost::math::cyl_bessel_k(z - 1.0, 2.0 * std::sqrt(z * x)));
      const auto r = apply_kz_at(f, z, x);
      CHECK(r.converged);
      CHECK(r.value == doctest::Approx(std::exp(log_exact)).epsilon(1e-9));
    }
  }
  const auto p = apply_kz_at(f, 400.0, 1.0);
  CHECK(std::abs(p.value - std::exp(-1.0)) < 0.01);
}

TEST_CASE("K_z preserves mass") {
  for (const char* spec : {"exp", "gamma:0.4:1", "weibull:3:2"}) {
    const auto d = make_density(spec);
    const auto v = d.view();
    for (double z : {5.0, 50.0}) {
      // Trapezoid rule in log x: geometric convergence for a smooth integrand
      // decaying at both ends, with far fewer inner integrals than adaptive rules.
      const double h = 0.1;
      double mass = 0.0;
      for (double s = -120.0; s <= 8.0; s += h) {
        const double x = std::exp(s);
        mass += h * x * apply_kz_at(v, z, x, 1e-10).value;
      }
      CAPTURE(spec);
      CAPTURE(z);
      CHECK(std::abs(mass - 1.0) < 1e-6);
    }
  }
}

TEST_CASE("K_z of the constant one is I_0 = z / (z - 1)") {
  DensityView one;
  one.pdf = [](double) { return 1.0; };
  for (double z : {3.0, 10.0}) {
    for (double x : {0.3, 1.0, 7.0}) {
      CHECK(apply_kz_at(one, z, x).value == doctest::Approx(z / (z - 1.0)).epsilon(1e-9));
    }
  }
  CHECK_THROWS(apply_kz_at(one, 1.0, 1.0));
  CHECK_THROWS(apply_kz_at(one, 3.0, 0.0));
}

TEST_CASE("discrete K_z is the kernel sum") {
  MixingMeasure p{{0.5, 1.0, 4.0}, {0.2, 0.5, 0.3}};
  p.validate();
  const std::vector<double> xs{0.1, 0.9, 2.5, 6.0};
  const auto got = apply_kz(p, 12.0, xs);
  for (std::size_t k = 0; k < xs.size(); ++k) {
    double want = 0.0;
    for (std::size_t i = 0; i < 3; ++i) want += p.weights[i] * oracle::gamma_kernel_pdf(xs[k], 12.0, p.atoms[i]);
    CHECK(got[k] == doctest::Approx(want).epsilon(1e-13));
  }
  MixingMeasure bad{{1.0, 0.5}, {0.5, 0.5}};
  CHECK_THROWS(bad.validate());
}

TEST_CASE("representation identity") {
  const auto g = make_density("gamma:0.4:1");
  const std::vector<double> xs{0.01, 0.1, 0.4, 1.0, 2.0, 5.0};
  for (double z : {50.0, 200.0}) {
    for (double r : representation_check(g, z, xs)) CHECK(r <= 1e-6);
  }
  const auto w = make_density("weibull:0.7:1.5");
  for (double r : representation_check(w, 30.0, xs)) CHECK(r <= 1e-6);
  // alpha = 1: both sides are the same computation
  for (double r : representation_check(make_density("exp"), 20.0, xs)) CHECK(r == 0.0);
  CHECK(std::abs(asymptotic_prefactor(1e3, 0.4) - 1.0) < 5e-3);
  CHECK(std::abs(representation_prefactor(1e3, 0.4) - 1.0) < 5e-3);
  CHECK(representation_prefactor(50.0, 1.0) == doctest::Approx(1.0).epsilon(1e-13));
  // the exact prefactor against a direct Gamma-function evaluation
  const double z = 37.0, a = 0.3;
  CHECK(representation_prefactor(z, a) ==
        doctest::Approx(std::pow(z, a) * boost::math::tgamma_ratio(z + 1.0 - a, z) / (z + 1.0 - a)).epsilon(1e-12));
}

TEST_CASE("corrected density") {
  const auto e = make_density("exp");
  const auto c15 = build_corrected_density(e, 1.5, 40.0);
  CHECK_FALSE(c15.corrected());
  for (double x : {0.1, 1.0, 4.0}) CHECK(c15(x) == c15.tilde(x));
  const auto g = make_density("gamma:0.4:1");
  const auto cg = build_corrected_density(g, 2.0, 40.0);
  CHECK(cg.c_z() == doctest::Approx(1.0 + 0.6 / 40.0).epsilon(1e-15));
  CHECK(cg(0.5) == doctest::Approx(cg.c_z() * g.pdf(cg.c_z() * 0.5)).epsilon(1e-15));

  const auto w = make_density("weibull:3:2");
  const auto cw = build_corrected_density(w, 3.0, 1e3);
  CHECK(cw.corrected());
  const double mass = oracle::integral([&](double x) { return cw(x); }, w.breakpoints());
  CHECK(std::abs(mass - 1.0) < 0.01);
  const auto tw = threshold_normalize(cw);
  CHECK(std::abs(tw.c_beta() - 1.0) < 0.02);

  const auto ce = build_corrected_density(e, 3.0, 1e6);
  double sup = 0.0;
  for (double x = 1e-3; x < 40.0; x *= 1.05) sup = std::max(sup, std::abs(ce(x) - ce.tilde(x)));
  CHECK(sup < 1e-4);

  CHECK_THROWS(build_corrected_density(e, 4.5, 100.0));
  CHECK_THROWS(build_corrected_density(e, 0.0, 100.0));
  CHECK_THROWS(build_corrected_density(e, 3.0, 2.0));
  CHECK_THROWS(build_corrected_density(g, 1.0, 0.5));
}

TEST_CASE("thresholded density is a true density") {
  for (const char* spec : {"exp", "weibull:3:2", "gamma:0.4:1", "folded-t:5"}) {
    const auto f = make_density(spec);
    for (double z : {12.0, 100.0}) {
      const auto t = threshold_normalize(build_corrected_density(f, 3.0, z));
      const auto& c = t.corrected();
      std::vector<double> pts = f.breakpoints();
      for (double& p : pts) p /= c.c_z();
      const double mass = oracle::integral([&](double x) { return t(x); }, pts);
      CAPTURE(spec);
      CAPTURE(z);
      CHECK(std::abs(mass - 1.0) < 1e-8);
      for (double x = 1e-3; x < 50.0; x *= 1.3) {
        if (c.tilde(x) > 0.0) CHECK(t(x) > 0.0);
        CHECK(t(x) >= t.c_beta() * c.tilde(x) / 2.0 * (1.0 - 1e-15));
      }
    }
  }
  // large z on a smooth density: the floor only touches the far tail
  const auto t = threshold_normalize(build_corrected_density(make_density("weibull:3:2"), 3.0, 1e4));
  CHECK(t.floored_mass() < 1e-15);
}

TEST_CASE("Gauss rule from Legendre moments reproduces Gauss-Legendre") {
  // the measure dt on [-1, 1]: modified moments are (2, 0, 0, ...)
  std::vector<double> m(8, 0.0);
  m[0] = 2.0;
  const auto rule = gauss_rule_from_legendre_moments(m);
  REQUIRE(rule.nodes.size() == 4);
  const double a = std::sqrt(3.0 / 7.0 - 2.0 / 7.0 * std::sqrt(6.0 / 5.0));
  const double b = std::sqrt(3.0 / 7.0 + 2.0 / 7.0 * std::sqrt(6.0 / 5.0));
  CHECK(rule.nodes[0] == doctest::Approx(-b).epsilon(1e-13));
  CHECK(rule.nodes[1] == doctest::Approx(-a).epsilon(1e-13));
  CHECK(rule.nodes[3] == doctest::Approx(b).epsilon(1e-13));
  CHECK(rule.weights[0] == doctest::Approx((18.0 - std::sqrt(30.0)) / 36.0).epsilon(1e-13));
  CHECK(rule.weights[1] == doctest::Approx((18.0 + std::sqrt(30.0)) / 36.0).epsilon(1e-13));
}

TEST_CASE("discretization with one node per interval uses the conditional mean") {
  const auto d = discretize_mixing(gamma33, 100.0, 1);
  REQUIRE(d.measure.atoms.size() == d.intervals.size());
  for (std::size_t j = 0; j < d.intervals.size(); ++j) {
    const auto& iv = d.intervals[j];
    const double mass = gk(gamma33, iv.lo, iv.hi);
    const double mean = gk([](double e) { return e * gamma33(e); }, iv.lo, iv.hi) / mass;
    CHECK(d.measure.atoms[j] == doctest::Approx(mean).epsilon(1e-12));
    CHECK(d.measure.weights[j] * d.total_mass == doctest::Approx(mass).epsilon(1e-12));
  }
}

TEST_CASE("discretization matches moments and keeps nodes in their intervals") {
  const double z = 100.0;
  const auto d = discretize_mixing(gamma33, z, 3);
  d.measure.validate(1e-12);
  const double h_mass = boost::math::gamma_p(3.0, 30.0) - boost::math::gamma_p(3.0, 0.3);
  CHECK(std::abs(d.total_mass - h_mass) < 1e-10);
  const double delta = 5.0 * std::sqrt(std::log(z) / z);
  CHECK(d.intervals[0].lo == doctest::Approx(0.1));
  CHECK(d.intervals[0].hi == doctest::Approx(0.1 * (1.0 + delta / 2.0)));
  CHECK(d.intervals.back().hi == doctest::Approx(10.0));
  REQUIRE(d.measure.atoms.size() == 3 * d.intervals.size());
  for (std::size_t j = 0; j < d.intervals.size(); ++j) {
    const auto& iv = d.intervals[j];
    CHECK(iv.nodes == 3);
    const double mass = gk(gamma33, iv.lo, iv.hi);
    for (int ell = 0; ell <= 5; ++ell) {
      const double want = gk([ell](double e) { return std::pow(e, ell) * gamma33(e); }, iv.lo, iv.hi) / mass;
      double got = 0.0;
      for (std::size_t i = 3 * j; i < 3 * j + 3; ++i) {
        got += d.measure.weights[i] * d.total_mass / mass * std::pow(d.measure.atoms[i], ell);
      }
      CHECK(std::abs(got - want) <= 1e-9 * std::pow(iv.hi, ell));
    }
    for (std::size_t i = 3 * j; i < 3 * j + 3; ++i) {
      CHECK(d.measure.atoms[i] >= iv.lo);
      CHECK(d.measure.atoms[i] <= iv.hi);
      CHECK(d.measure.weights[i] >= 0.0);
    }
  }
  CHECK_THROWS(discretize_mixing(gamma33, z, 13));
  CHECK_THROWS(discretize_mixing(gamma33, z, 0));
}

TEST_CASE("discretization: reconstruction error shrinks with more nodes") {
  const double z = 200.0;
  const double mass = gk_split(gamma33, {0.1, 1.0, 3.0, 10.0});
  std::vector<double> xs;
  for (double x = 0.2; x <= 5.0 + 1e-12; x += 0.05) xs.push_back(x);
  std::vector<double> exact;
  for (double x : xs) {
    std::vector<double> pts{0.1, 10.0};
    for (double s : {-10.0, -5.0, -2.0, 0.0, 2.0, 5.0, 10.0, 20.0}) {
      const double e = x * (1.0 + s / std::sqrt(z));
      if (e > 0.1 && e < 10.0) pts.push_back(e);
    }
    exact.push_back(gk_split([&](double e) { return oracle::gamma_kernel_pdf(x, z, e) * gamma33(e) / mass; }, pts));
  }
  double prev = std::numeric_limits<double>::infinity();
  for (int L = 1; L <= 4; ++L) {
    const auto d = discretize_mixing(gamma33, z, L);
    const auto approx = apply_kz(d.measure, z, xs);
    double sup = 0.0;
    for (std::size_t k = 0; k < xs.size(); ++k) sup = std::max(sup, std::abs(approx[k] - exact[k]));
    CAPTURE(L);
    CHECK(sup <= prev);
    prev = sup;
  }
}

TEST_CASE("rate study on Exp(1)") {
  const std::vector<double> zs{50, 100, 200, 400, 800};
  const auto r = rate_study(make_density("exp"), 2.0, zs);
  CHECK(r.fitted_slope <= -0.75);
  for (std::size_t k = 1; k < zs.size(); ++k) {
    CHECK(r.hellinger_errors[k] < r.hellinger_errors[k - 1]);
    CHECK(r.l1_errors[k] < r.l1_errors[k - 1]);
    // D_H ~ z^{-beta/2} = z^{-1}, so doubling z quarters D_H^2
    const double ratio = std::pow(r.hellinger_errors[k] / r.hellinger_errors[k - 1], 2.0);
    CHECK(ratio >= 0.2);
    CHECK(ratio <= 0.3);
  }
  CHECK(log_log_slope(std::vector<double>{1, 2, 4}, std::vector<double>{8, 4, 2}) == doctest::Approx(-1.0));
  CHECK_THROWS(rate_study(make_density("exp"), 2.0, std::vector<double>{50, 100, 200}));
  CHECK_THROWS(rate_study(make_density("exp"), 2.0, std::vector<double>{5, 100, 200, 400}));
  CHECK_THROWS(rate_study(make_density("exp"), 2.0, std::vector<double>{50, 40, 200, 400}));
}
