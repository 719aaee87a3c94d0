#pragma once

#include <cstdint>
#include <functional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "gammix/rng.hpp"

namespace gammix {

class DensityParseError : public std::invalid_argument {
 public:
  DensityParseError(const std::string& what, std::string token)
      : std::invalid_argument(what), token_(std::move(token)) {}
  const std::string& token() const { return token_; }

 private:
  std::string token_;
};

/// Plain function view of a density on (0, inf), consumed by the metric and
/// approximation code. `alpha` < 1 declares an x^(alpha-1) pole at the origin.
struct DensityView {
  std::function<double(double)> pdf;
  std::function<double(double)> logpdf;           // optional
  std::function<double(Rng&)> sampler;            // optional, used by MC fallbacks
  double alpha = 1.0;
  std::vector<double> breakpoints;
};

/// A named reference density f = x^(alpha-1) h(x) on (0, inf) with an exact
/// sampler, CDF, and derivatives of h up to order 3. Immutable once built.
class SmoothDensity {
 public:
  using Fn = std::function<double(double)>;
  using DerivFn = std::function<double(double, int)>;
  using SampleFn = std::function<double(Rng&)>;

  SmoothDensity(std::string name, std::vector<double> params, double alpha, Fn logpdf, Fn cdf,
                SampleFn sampler, DerivFn h_deriv, std::vector<double> breakpoints);

  /// Density from user functions, with h derivatives by central differences.
  static SmoothDensity from_functions(std::string name, double alpha, Fn logpdf, Fn cdf,
                                      SampleFn sampler);

  const std::string& name() const { return name_; }
  const std::vector<double>& params() const { return params_; }
  double alpha() const { return alpha_; }

  double logpdf(double x) const;
  double pdf(double x) const;
  double cdf(double x) const { return cdf_(x); }
  double sample(Rng& rng) const { return sampler_(rng); }
  /// j-th derivative of h(x) = x^(1-alpha) f(x), 0 <= j <= 3.
  double h_deriv(double x, int j) const;
  double h(double x) const { return h_deriv(x, 0); }
  /// Quantile-based split points for quadrature.
  const std::vector<double>& breakpoints() const { return breakpoints_; }

  DensityView view() const;

 private:
  std::string name_;
  std::vector<double> params_;
  double alpha_;
  Fn logpdf_;
  Fn cdf_;
  SampleFn sampler_;
  DerivFn h_deriv_;
  std::vector<double> breakpoints_;
};

/// Parses one of: exp | folded-cauchy | gamma:<shape>:<rate> |
/// gamma-mix:<w>:<sh1>:<r1>:<sh2>:<r2> | weibull:<a>:<b> | folded-t:<nu> | frechet:<b>
SmoothDensity make_density(std::string_view spec);

/// n i.i.d. draws from d; bit-reproducible for a fixed seed.
std::vector<double> sample_dataset(const SmoothDensity& d, std::size_t n, std::uint64_t seed);

/// x with cdf(x) = p, by bisection on a log scale.
double invert_cdf(const std::function<double(double)>& cdf, double p);

}  // namespace gammix
