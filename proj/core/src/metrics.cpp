#include "gammix/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "gammix/quadrature.hpp"

namespace gammix {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

std::vector<double> merged_breakpoints(const DensityView& f, const DensityView& g, const DistanceOptions& o) {
  std::vector<double> pts = f.breakpoints;
  pts.insert(pts.end(), g.breakpoints.begin(), g.breakpoints.end());
  pts.insert(pts.end(), o.split_points.begin(), o.split_points.end());
  return pts;
}

double log_density(const DensityView& d, double x) {
  if (d.logpdf) return d.logpdf(x);
  const double p = d.pdf(x);
  return p > 0.0 ? std::log(p) : -kInf;
}

QuadratureResult half_line(const ScalarFn& fn, const DensityView& f, const DensityView& g,
                           const DistanceOptions& o) {
  QuadratureOptions q;
  q.abs_tol = o.abs_tol;
  q.max_panels = 6000;
  const auto pts = merged_breakpoints(f, g, o);
  return integrate_half_line(fn, pts, q, std::min(f.alpha, g.alpha));
}

struct McSample {
  double mean = 0.0;
  double std_error = 0.0;
};

// Mean of integrand(x) / proposal(x) with x from the proposal.
template <typename Integrand>
McSample mc_estimate(const DensityView& f, const DensityView& g, int samples, std::uint64_t seed,
                     Integrand integrand) {
  if (!f.sampler) throw std::invalid_argument("Monte Carlo distance needs a sampler for f");
  if (samples < 2) throw std::invalid_argument("Monte Carlo distance needs at least 2 samples");
  Rng rng(splitmix64(seed));
  const bool mixture = static_cast<bool>(g.sampler);
  double sum = 0.0;
  double sum_sq = 0.0;
  for (int i = 0; i < samples; ++i) {
    const double x = (!mixture || rng.uniform() < 0.5) ? f.sampler(rng) : g.sampler(rng);
    const double fx = f.pdf(x);
    const double gx = g.pdf(x);
    const double proposal = mixture ? 0.5 * (fx + gx) : fx;
    const double v = proposal > 0.0 ? integrand(fx, gx) / proposal : 0.0;
    sum += v;
    sum_sq += v * v;
  }
  const double n = samples;
  const double mean = sum / n;
  const double var = std::max(0.0, (sum_sq - n * mean * mean) / (n - 1.0));
  return {mean, std::sqrt(var / n)};
}

}  // namespace

DistanceResult l1_distance_mc(const DensityView& f, const DensityView& g, int samples, std::uint64_t seed) {
  const auto est = mc_estimate(f, g, samples, seed, [](double a, double b) { return std::abs(a - b); });
  DistanceResult r;
  r.value = est.mean;
  r.std_error = est.std_error;
  r.method = DistanceMethod::kMonteCarlo;
  return r;
}

DistanceResult hellinger_mc(const DensityView& f, const DensityView& g, int samples, std::uint64_t seed) {
  const auto est = mc_estimate(f, g, samples, seed, [](double a, double b) {
    const double d = std::sqrt(a) - std::sqrt(b);
    return d * d;
  });
  DistanceResult r;
  r.value = std::sqrt(std::max(est.mean, 0.0));
  // delta method: se(sqrt(m)) = se(m) / (2 sqrt(m))
  r.std_error = r.value > 0.0 ? est.std_error / (2.0 * r.value) : std::sqrt(est.std_error);
  r.method = DistanceMethod::kMonteCarlo;
  return r;
}

DistanceResult l1_distance(const DensityView& f, const DensityView& g, const DistanceOptions& o) {
  const auto q = half_line([&](double x) { return std::abs(f.pdf(x) - g.pdf(x)); }, f, g, o);
  DistanceResult r;
  r.value = q.value;
  r.converged = q.converged;
  if (!q.converged) {
    if (o.allow_mc_fallback && f.sampler) {
      r = l1_distance_mc(f, g, o.mc_samples, o.mc_seed);
      r.converged = false;
      r.diagnostic = "quadrature did not converge; Monte Carlo fallback";
    } else {
      r.diagnostic = "quadrature did not converge";
    }
  }
  return r;
}

DistanceResult hellinger(const DensityView& f, const DensityView& g, const DistanceOptions& o) {
  const auto q = half_line(
      [&](double x) {
        const double d = std::sqrt(f.pdf(x)) - std::sqrt(g.pdf(x));
        return d * d;
      },
      f, g, o);
  DistanceResult r;
  r.value = std::sqrt(std::max(q.value, 0.0));
  r.converged = q.converged;
  if (!q.converged) {
    if (o.allow_mc_fallback && f.sampler) {
      r = hellinger_mc(f, g, o.mc_samples, o.mc_seed);
      r.converged = false;
      r.diagnostic = "quadrature did not converge; Monte Carlo fallback";
    } else {
      r.diagnostic = "quadrature did not converge";
    }
  }
  return r;
}

namespace {

// Integrates f * phi(log f - log g); reports +inf when g vanishes under f.
DistanceResult log_ratio_moment(const DensityView& f, const DensityView& g, const DistanceOptions& o,
                                int power, double& kl_out) {
  bool support_violation = false;
  double violation_at = 0.0;
  auto make = [&](int pw) {
    return [&, pw](double x) {
      const double lf = log_density(f, x);
      if (lf == -kInf) return 0.0;
      const double fx = std::exp(lf);
      const double lg = log_density(g, x);
      if (lg == -kInf) {
        if (fx > o.abs_tol) {
          support_violation = true;
          violation_at = x;
        }
        return 0.0;
      }
      const double d = lf - lg;
      return fx * (pw == 1 ? d : d * d);
    };
  };
  const auto first = half_line(make(1), f, g, o);
  DistanceResult r;
  if (support_violation) {
    r.value = kInf;
    r.converged = true;
    r.diagnostic = "g vanishes where f > tol (first at x = " + std::to_string(violation_at) + ")";
    kl_out = kInf;
    return r;
  }
  kl_out = first.value;
  if (power == 1) {
    r.value = std::max(first.value, 0.0);
    r.converged = first.converged;
    if (!r.converged) r.diagnostic = "quadrature did not converge";
    return r;
  }
  const auto second = half_line(make(2), f, g, o);
  r.value = std::max(second.value - first.value * first.value, 0.0);
  r.converged = first.converged && second.converged;
  if (!r.converged) r.diagnostic = "quadrature did not converge";
  return r;
}

}  // namespace

DistanceResult kl_divergence(const DensityView& f, const DensityView& g, const DistanceOptions& o) {
  double kl = 0.0;
  return log_ratio_moment(f, g, o, 1, kl);
}

DistanceResult v_divergence(const DensityView& f, const DensityView& g, const DistanceOptions& o) {
  double kl = 0.0;
  return log_ratio_moment(f, g, o, 2, kl);
}

std::vector<double> weighted_quantiles(std::span<const double> values, std::span<const double> probs) {
  if (values.empty()) throw std::invalid_argument("weighted_quantiles: empty input");
  std::vector<double> sorted(values.begin(), values.end());
  std::sort(sorted.begin(), sorted.end());
  const double last = static_cast<double>(sorted.size() - 1);
  std::vector<double> out;
  out.reserve(probs.size());
  for (double p : probs) {
    if (!(p >= 0.0 && p <= 1.0)) throw std::invalid_argument("weighted_quantiles: probability outside [0, 1]");
    const double h = last * p;
    const auto lo = static_cast<std::size_t>(std::floor(h));
    const auto hi = static_cast<std::size_t>(std::ceil(h));
    const double frac = h - std::floor(h);
    out.push_back(sorted[lo] + frac * (sorted[hi] - sorted[lo]));
  }
  return out;
}

}  // namespace gammix
