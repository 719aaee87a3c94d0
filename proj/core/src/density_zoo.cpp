#include "gammix/density_zoo.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <limits>
#include <numbers>

#include "gammix/special_functions.hpp"

namespace gammix {
namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

// One term coef * x^power * exp(-scale * x^kappa), held with log(coef).
struct PowerExpTerm {
  double log_coef;
  double power;
  double scale;
  double kappa;

  double log_value(double x) const {
    return log_coef + power * std::log(x) - scale * std::pow(x, kappa);
  }

  // j-th derivative of the term, j <= 3. It equals e^phi x^(power - j) P(u) with
  // u = -scale x^kappa; each monomial of P is evaluated in logs so tiny or huge
  // x cannot produce 0 * inf.
  double deriv(double x, int j) const {
    if (j == 0) return std::exp(log_value(x));
    const double k = kappa;
    // coefficients in u of x^m (d^m e^phi) / e^phi
    const double e[4][4] = {{1.0, 0.0, 0.0, 0.0},
                            {0.0, k, 0.0, 0.0},
                            {0.0, k * (k - 1.0), k * k, 0.0},
                            {0.0, k * (k - 1.0) * (k - 2.0), 3.0 * k * k * (k - 1.0), k * k * k}};
    // falling factorials of the power
    const double q = power;
    const double f[4] = {1.0, q, q * (q - 1.0), q * (q - 1.0) * (q - 2.0)};
    static constexpr double kBinom[4][4] = {{1, 0, 0, 0}, {1, 1, 0, 0}, {1, 2, 1, 0}, {1, 3, 3, 1}};
    const double lx = std::log(x);
    const double base = log_value(x) - j * lx;
    double sum = 0.0;
    for (int p = 0; p <= j; ++p) {
      double a = 0.0;
      for (int i = 0; i <= j; ++i) a += kBinom[j][i] * f[i] * e[j - i][p];
      if (a == 0.0) continue;
      const double sign = (p % 2 == 1) ? -1.0 : 1.0;  // u^p = (-scale)^p x^(kappa p)
      const double log_u = p == 0 ? 0.0 : p * (std::log(scale) + k * lx);
      sum += sign * a * std::exp(base + log_u);
    }
    return sum;
  }
};

double log_sum_terms(const std::vector<PowerExpTerm>& terms, double x) {
  double acc = kNegInf;
  for (const auto& t : terms) acc = log_add_exp(acc, t.log_value(x));
  return acc;
}

std::vector<double> quantile_breakpoints(const std::function<double(double)>& cdf) {
  std::vector<double> pts;
  for (double p : {1e-4, 0.01, 0.1, 0.25, 0.5, 0.75, 0.9, 0.99, 0.9999}) {
    pts.push_back(invert_cdf(cdf, p));
  }
  std::sort(pts.begin(), pts.end());
  pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
  return pts;
}

// Builds a density from a sum of power-exp terms of f; h carries the extra
// x^(1-alpha) factor.
SmoothDensity power_exp_density(std::string name, std::vector<double> params, double alpha,
                                std::vector<PowerExpTerm> f_terms,
                                std::function<double(double)> cdf,
                                std::function<double(Rng&)> sampler) {
  std::vector<PowerExpTerm> h_terms = f_terms;
  for (auto& t : h_terms) t.power += 1.0 - alpha;
  auto logpdf = [f_terms](double x) { return log_sum_terms(f_terms, x); };
  auto deriv = [h_terms](double x, int j) {
    double s = 0.0;
    for (const auto& t : h_terms) s += t.deriv(x, j);
    return s;
  };
  auto pts = quantile_breakpoints(cdf);
  return SmoothDensity(std::move(name), std::move(params), alpha, logpdf, cdf, std::move(sampler),
                       deriv, std::move(pts));
}

double parse_number(std::string_view token, std::string_view spec) {
  double value = 0.0;
  const auto* first = token.data();
  const auto* last = token.data() + token.size();
  auto [ptr, ec] = std::from_chars(first, last, value);
  if (ec != std::errc() || ptr != last || token.empty() || !std::isfinite(value)) {
    throw DensityParseError("density spec '" + std::string(spec) + "': cannot parse number '" +
                                std::string(token) + "'",
                            std::string(token));
  }
  return value;
}

std::vector<std::string_view> split(std::string_view s, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = s.find(sep, start);
    out.push_back(s.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

SmoothDensity make_exp() {
  std::vector<PowerExpTerm> terms{{0.0, 0.0, 1.0, 1.0}};
  return power_exp_density(
      "exp", {}, 1.0, terms, [](double x) { return x <= 0.0 ? 0.0 : -std::expm1(-x); },
      [](Rng& rng) { return rng.exponential(); });
}

SmoothDensity make_gamma(double shape, double rate) {
  const double alpha = std::min(shape, 1.0);
  std::vector<PowerExpTerm> terms{{shape * std::log(rate) - log_gamma(shape), shape - 1.0, rate, 1.0}};
  return power_exp_density(
      "gamma", {shape, rate}, alpha, terms,
      [shape, rate](double x) { return x <= 0.0 ? 0.0 : gamma_p(shape, rate * x); },
      [shape, rate](Rng& rng) { return rng.gamma(shape) / rate; });
}

SmoothDensity make_gamma_mix(double w, double sh1, double r1, double sh2, double r2) {
  const double alpha = std::min({sh1, sh2, 1.0});
  std::vector<PowerExpTerm> terms{
      {std::log(w) + sh1 * std::log(r1) - log_gamma(sh1), sh1 - 1.0, r1, 1.0},
      {std::log1p(-w) + sh2 * std::log(r2) - log_gamma(sh2), sh2 - 1.0, r2, 1.0}};
  if (w == 1.0) terms.pop_back();
  if (w == 0.0) terms.erase(terms.begin());
  return power_exp_density(
      "gamma-mix", {w, sh1, r1, sh2, r2}, alpha, terms,
      [=](double x) {
        if (x <= 0.0) return 0.0;
        return w * gamma_p(sh1, r1 * x) + (1.0 - w) * gamma_p(sh2, r2 * x);
      },
      [=](Rng& rng) {
        return rng.uniform() < w ? rng.gamma(sh1) / r1 : rng.gamma(sh2) / r2;
      });
}

// f(x) = b / Gamma(a/b) x^(a-1) exp(-x^b)
SmoothDensity make_weibull(double a, double b) {
  const double alpha = std::min(a, 1.0);
  std::vector<PowerExpTerm> terms{{std::log(b) - log_gamma(a / b), a - 1.0, 1.0, b}};
  return power_exp_density(
      "weibull", {a, b}, alpha, terms,
      [a, b](double x) { return x <= 0.0 ? 0.0 : gamma_p(a / b, std::pow(x, b)); },
      [a, b](Rng& rng) { return std::pow(rng.gamma(a / b), 1.0 / b); });
}

// f(x) = b x^(-b-1) exp(-x^(-b))
SmoothDensity make_frechet(double b) {
  std::vector<PowerExpTerm> terms{{std::log(b), -b - 1.0, 1.0, -b}};
  return power_exp_density(
      "frechet", {b}, 1.0, terms,
      [b](double x) { return x <= 0.0 ? 0.0 : std::exp(-std::pow(x, -b)); },
      [b](Rng& rng) { return std::pow(rng.exponential(), -1.0 / b); });
}

// f(x) = c_nu (1 + x^2)^(-(nu+1)/2), c_nu = 2 Gamma((nu+1)/2) / (sqrt(pi) Gamma(nu/2)).
// nu = 1 is the folded Cauchy.
SmoothDensity make_folded_t(double nu, std::string name) {
  const double p = 0.5 * (nu + 1.0);
  const double log_c = std::log(2.0) + log_gamma(p) - 0.5 * std::log(std::numbers::pi) - log_gamma(0.5 * nu);
  const bool cauchy = (name == "folded-cauchy");
  auto logpdf = [=](double x) {
    if (cauchy) return std::log(2.0 / std::numbers::pi) - std::log1p(x * x);
    return log_c - p * std::log1p(x * x);
  };
  auto deriv = [=](double x, int j) {
    // s = x / (1 + x^2) and r = x^2 / (1 + x^2) stay finite for any x > 0
    const double s = 1.0 / (x + 1.0 / x);
    const double r = x * s;
    const double f = std::exp(logpdf(x));
    switch (j) {
      case 0: return f;
      case 1: return -2.0 * p * s * f;
      case 2: return f * (s / x) * (-2.0 * p + 4.0 * p * (p + 1.0) * r);
      case 3: return f * (s / x) * s * (12.0 * p * (p + 1.0) - 8.0 * p * (p + 1.0) * (p + 2.0) * r);
      default: throw std::domain_error("h_deriv: order must be <= 3");
    }
  };
  std::function<double(double)> cdf;
  std::function<double(Rng&)> sampler;
  if (cauchy) {
    cdf = [](double x) { return x <= 0.0 ? 0.0 : 2.0 / std::numbers::pi * std::atan(x); };
    sampler = [](Rng& rng) { return std::tan(0.5 * std::numbers::pi * rng.uniform()); };
  } else {
    cdf = [nu](double x) {
      if (x <= 0.0) return 0.0;
      return 1.0 - beta_inc(0.5 * nu, 0.5, 1.0 / (1.0 + x * x));
    };
    sampler = [nu](Rng& rng) {
      const double n = rng.normal();
      const double chi2 = 2.0 * rng.gamma(0.5 * nu);
      return std::abs(n) / std::sqrt(chi2);
    };
  }
  auto pts = quantile_breakpoints(cdf);
  std::vector<double> params;
  if (!cauchy) params.push_back(nu);
  return SmoothDensity(std::move(name), std::move(params), 1.0, logpdf, cdf, sampler, deriv,
                       std::move(pts));
}

void require(bool ok, std::string_view spec, std::string_view token, const char* why) {
  if (!ok) {
    throw DensityParseError("density spec '" + std::string(spec) + "': " + why + " ('" +
                                std::string(token) + "')",
                            std::string(token));
  }
}

}  // namespace

SmoothDensity::SmoothDensity(std::string name, std::vector<double> params, double alpha, Fn logpdf,
                             Fn cdf, SampleFn sampler, DerivFn h_deriv,
                             std::vector<double> breakpoints)
    : name_(std::move(name)),
      params_(std::move(params)),
      alpha_(alpha),
      logpdf_(std::move(logpdf)),
      cdf_(std::move(cdf)),
      sampler_(std::move(sampler)),
      h_deriv_(std::move(h_deriv)),
      breakpoints_(std::move(breakpoints)) {
  if (!(alpha_ > 0.0 && alpha_ <= 1.0)) throw std::domain_error("SmoothDensity: alpha must lie in (0, 1]");
}

SmoothDensity SmoothDensity::from_functions(std::string name, double alpha, Fn logpdf, Fn cdf,
                                            SampleFn sampler) {
  auto h = [logpdf, alpha](double x) { return std::exp((1.0 - alpha) * std::log(x) + logpdf(x)); };
  auto deriv = [h](double x, int j) {
    switch (j) {
      case 0: return h(x);
      case 1: {
        const double e = 1e-5 * x;
        return (h(x + e) - h(x - e)) / (2.0 * e);
      }
      case 2: {
        const double e = 1e-4 * x;
        return (h(x + e) - 2.0 * h(x) + h(x - e)) / (e * e);
      }
      case 3: {
        const double e = 1e-3 * x;
        return (h(x + 2 * e) - 2.0 * h(x + e) + 2.0 * h(x - e) - h(x - 2 * e)) / (2.0 * e * e * e);
      }
      default: throw std::domain_error("h_deriv: order must be <= 3");
    }
  };
  auto pts = quantile_breakpoints(cdf);
  return SmoothDensity(std::move(name), {}, alpha, std::move(logpdf), std::move(cdf), std::move(sampler),
                       deriv, std::move(pts));
}

double SmoothDensity::logpdf(double x) const {
  if (!(x > 0.0)) return kNegInf;
  return logpdf_(x);
}

double SmoothDensity::pdf(double x) const {
  if (!(x > 0.0)) return 0.0;
  return std::exp(logpdf_(x));
}

double SmoothDensity::h_deriv(double x, int j) const {
  if (j < 0 || j > 3) throw std::domain_error("h_deriv: order must lie in [0, 3]");
  if (!(x > 0.0)) throw std::domain_error("h_deriv: x must be positive");
  return h_deriv_(x, j);
}

DensityView SmoothDensity::view() const {
  DensityView v;
  v.pdf = [*this](double x) { return pdf(x); };
  v.logpdf = [*this](double x) { return logpdf(x); };
  v.sampler = [*this](Rng& rng) { return sample(rng); };
  v.alpha = alpha_;
  v.breakpoints = breakpoints_;
  return v;
}

SmoothDensity make_density(std::string_view spec) {
  const auto tokens = split(spec, ':');
  const std::string_view kind = tokens.front();
  auto expect_args = [&](std::size_t n) {
    if (tokens.size() != n + 1) {
      throw DensityParseError("density spec '" + std::string(spec) + "': '" + std::string(kind) +
                                  "' takes " + std::to_string(n) + " parameter(s)",
                              std::string(kind));
    }
  };
  auto num = [&](std::size_t i) { return parse_number(tokens[i], spec); };

  if (kind == "exp") {
    expect_args(0);
    return make_exp();
  }
  if (kind == "folded-cauchy") {
    expect_args(0);
    return make_folded_t(1.0, "folded-cauchy");
  }
  if (kind == "gamma") {
    expect_args(2);
    const double shape = num(1), rate = num(2);
    require(shape > 0.0, spec, tokens[1], "shape must be positive");
    require(rate > 0.0, spec, tokens[2], "rate must be positive");
    return make_gamma(shape, rate);
  }
  if (kind == "gamma-mix") {
    expect_args(5);
    const double w = num(1), sh1 = num(2), r1 = num(3), sh2 = num(4), r2 = num(5);
    require(w >= 0.0 && w <= 1.0, spec, tokens[1], "weight must lie in [0, 1]");
    require(sh1 > 0.0, spec, tokens[2], "shape must be positive");
    require(r1 > 0.0, spec, tokens[3], "rate must be positive");
    require(sh2 > 0.0, spec, tokens[4], "shape must be positive");
    require(r2 > 0.0, spec, tokens[5], "rate must be positive");
    return make_gamma_mix(w, sh1, r1, sh2, r2);
  }
  if (kind == "weibull") {
    expect_args(2);
    const double a = num(1), b = num(2);
    require(a > 0.0, spec, tokens[1], "a must be positive");
    require(b > 0.0, spec, tokens[2], "b must be positive");
    return make_weibull(a, b);
  }
  if (kind == "folded-t") {
    expect_args(1);
    const double nu = num(1);
    require(nu > 0.0, spec, tokens[1], "nu must be positive");
    return make_folded_t(nu, "folded-t");
  }
  if (kind == "frechet") {
    expect_args(1);
    const double b = num(1);
    require(b > 0.0, spec, tokens[1], "b must be positive");
    return make_frechet(b);
  }
  throw DensityParseError("unknown density '" + std::string(kind) + "'", std::string(kind));
}

std::vector<double> sample_dataset(const SmoothDensity& d, std::size_t n, std::uint64_t seed) {
  Rng rng(splitmix64(seed));
  std::vector<double> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    double x = d.sample(rng);
    // support is open at 0
    if (!(x > 0.0)) x = std::numeric_limits<double>::min();
    out.push_back(x);
  }
  return out;
}

double invert_cdf(const std::function<double(double)>& cdf, double p) {
  if (!(p > 0.0 && p < 1.0)) throw std::domain_error("invert_cdf: p must lie in (0, 1)");
  double lo = 1.0;
  double hi = 1.0;
  while (cdf(lo) > p && lo > 1e-300) lo *= 0.5;
  while (cdf(hi) < p && hi < 1e300) hi *= 2.0;
  for (int it = 0; it < 200 && hi / lo > 1.0 + 1e-13; ++it) {
    const double mid = std::sqrt(lo * hi);
    if (cdf(mid) < p) lo = mid; else hi = mid;
  }
  return std::sqrt(lo * hi);
}

}  // namespace gammix
