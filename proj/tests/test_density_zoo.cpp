#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>
#include <vector>

#include "doctest.h"
#include "gammix/density_zoo.hpp"
#include "oracles.hpp"

using namespace gammix;

namespace {

const std::vector<std::string> kZoo{"exp",        "folded-cauchy", "gamma:0.4:1", "gamma:2.5:3",
                                    "gamma-mix:0.5:1:3:2:10", "weibull:3:2", "weibull:0.7:1.5",
                                    "folded-t:5", "frechet:3"};

double ks_statistic(std::vector<double> xs, const SmoothDensity& d) {
  std::sort(xs.begin(), xs.end());
  const double n = static_cast<double>(xs.size());
  double stat = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double F = d.cdf(xs[i]);
    stat = std::max({stat, std::abs(F - i / n), std::abs(F - (i + 1) / n)});
  }
  return stat;
}

}  // namespace

TEST_CASE("named densities: closed forms at a point") {
  const auto e = make_density("exp");
  CHECK(e.pdf(1.3) == doctest::Approx(std::exp(-1.3)).epsilon(1e-14));
  CHECK(e.pdf(1e-12) == doctest::Approx(1.0).epsilon(1e-10));
  CHECK(e.alpha() == 1.0);
  const auto c = make_density("folded-cauchy");
  CHECK(c.pdf(2.0) == doctest::Approx(2.0 / std::numbers::pi / 5.0).epsilon(1e-14));
  CHECK(c.pdf(1e-12) == doctest::Approx(2.0 / std::numbers::pi).epsilon(1e-10));
  const auto g = make_density("gamma:0.4:1");
  CHECK(g.alpha() == 0.4);
  CHECK(g.pdf(1e-10) > g.pdf(1e-5));
  CHECK(make_density("gamma:2.5:3").alpha() == 1.0);
}

TEST_CASE("gamma specs use shape and rate") {
  const auto g = make_density("gamma:2:10");
  const double mean = oracle::integral([&](double x) { return x * g.pdf(x); }, g.breakpoints());
  CHECK(mean == doctest::Approx(0.2).epsilon(1e-9));
  const auto h = make_density("gamma:0.4:1");
  const double m2 = oracle::integral([&](double x) { return x * h.pdf(x); }, h.breakpoints());
  CHECK(m2 == doctest::Approx(0.4).epsilon(1e-9));
}

TEST_CASE("every zoo member integrates to one") {
  for (const auto& spec : kZoo) {
    const auto d = make_density(spec);
    const double mass = oracle::integral([&](double x) { return d.pdf(x); }, d.breakpoints());
    CAPTURE(spec);
    CHECK(std::abs(mass - 1.0) < 1e-7);
    // logpdf and pdf agree
    for (double x : d.breakpoints()) CHECK(std::exp(d.logpdf(x)) == doctest::Approx(d.pdf(x)).epsilon(1e-13));
  }
}

TEST_CASE("derivatives of h match central differences") {
  for (const auto& spec : kZoo) {
    const auto d = make_density(spec);
    const auto& bp = d.breakpoints();
    double hmax = 0.0;
    for (double x : bp) hmax = std::max(hmax, std::abs(d.h(x)));
    for (std::size_t k = 2; k + 2 < bp.size(); ++k) {
      const double x = bp[k];
      const double step = 1e-4 * x;
      for (int j = 1; j <= 3; ++j) {
        const double fd = (d.h_deriv(x + step, j - 1) - d.h_deriv(x - step, j - 1)) / (2.0 * step);
        const double an = d.h_deriv(x, j);
        const double scale = std::max(std::abs(an), 1e-2 * hmax / std::pow(x, j));
        CAPTURE(spec);
        CAPTURE(x);
        CAPTURE(j);
        CHECK(std::abs(fd - an) <= 1e-4 * scale);
      }
    }
  }
}

TEST_CASE("samplers match their CDFs (KS at 1%, n = 1e5)") {
  std::uint64_t seed = 100;
  for (const auto& spec : kZoo) {
    const auto d = make_density(spec);
    const auto xs = sample_dataset(d, 100000, ++seed);
    CAPTURE(spec);
    CHECK(ks_statistic(xs, d) < 1.628 / std::sqrt(1e5));
  }
}

TEST_CASE("structural properties") {
  const auto fr = make_density("frechet:3");
  CHECK(fr.pdf(1e-3) < 1e-100);
  CHECK(fr.pdf(0.3) < fr.pdf(0.5));
  CHECK(fr.pdf(0.3) > 0.0);
  const auto t1 = make_density("folded-t:1");
  const auto c = make_density("folded-cauchy");
  for (double x : {1e-3, 0.1, 1.0, 3.0, 50.0, 1e4}) {
    CHECK(std::abs(t1.pdf(x) - c.pdf(x)) <= 1e-12 * c.pdf(x));
  }
}

TEST_CASE("sample_dataset") {
  const auto e = make_density("exp");
  const auto a = sample_dataset(e, 1000, 9);
  const auto b = sample_dataset(e, 1000, 9);
  CHECK(a == b);
  double mean = 0.0;
  for (double x : a) mean += x / 1000.0;
  CHECK(std::abs(mean - 1.0) < 5.0 / std::sqrt(1000.0));
  const auto mix = sample_dataset(make_density("gamma-mix:0.5:1:3:2:10"), 1000, 3);
  CHECK(std::all_of(mix.begin(), mix.end(), [](double x) { return x > 0.0; }));
  // P(no draw above 10) = (2/pi atan 10)^1000, about 1e-28
  const auto c = make_density("folded-cauchy");
  for (std::uint64_t s = 1; s <= 20; ++s) {
    const auto xs = sample_dataset(c, 1000, s);
    CHECK(*std::max_element(xs.begin(), xs.end()) > 10.0);
  }
}

TEST_CASE("spec grammar errors name the offending token") {
  auto token_of = [](const std::string& spec) {
    try {
      make_density(spec);
    } catch (const DensityParseError& e) {
      return e.token();
    }
    return std::string("<no error>");
  };
  CHECK(token_of("lognormal") == "lognormal");
  CHECK(token_of("gamma:abc:1") == "abc");
  CHECK(token_of("gamma:-1:1") == "-1");
  CHECK(token_of("gamma:1") != "<no error>");
  CHECK(token_of("weibull:2:0") == "0");
  CHECK(token_of("gamma-mix:1.5:1:3:2:10") == "1.5");
  CHECK_THROWS_AS(make_density(""), DensityParseError);
}
