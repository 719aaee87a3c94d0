#include "gammix/approx_lab.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "gammix/kernels.hpp"
#include "gammix/metrics.hpp"
#include "gammix/special_functions.hpp"

namespace gammix {

void MixingMeasure::validate(double tol) const {
  if (atoms.size() != weights.size()) throw std::invalid_argument("MixingMeasure: size mismatch");
  double sum = 0.0;
  for (std::size_t i = 0; i < atoms.size(); ++i) {
    if (!(atoms[i] > 0.0)) throw std::invalid_argument("MixingMeasure: atoms must be positive");
    if (i > 0 && !(atoms[i] > atoms[i - 1])) {
      throw std::invalid_argument("MixingMeasure: atoms must be strictly increasing");
    }
    if (!(weights[i] >= 0.0)) throw std::invalid_argument("MixingMeasure: negative weight");
    sum += weights[i];
  }
  if (std::abs(sum - 1.0) > tol) throw std::invalid_argument("MixingMeasure: weights must sum to 1");
}

KzPoint apply_kz_at(const DensityView& f, double z, double x, double rel_tol) {
  if (!(z > 1.0)) throw std::domain_error("apply_kz: z must exceed 1");
  if (!(x > 0.0)) throw std::domain_error("apply_kz: x must be positive");
  // Substituting eps = x t makes the kernel scale free, so tiny x cannot overflow.
  const double log_const = z * std::log(z) - log_gamma(z);
  auto integrand = [&](double t) {
    const double fe = f.pdf(x * t);
    if (fe == 0.0) return 0.0;
    return std::exp(std::log(fe) + log_const - z * std::log(t) - z / t);
  };
  // As a function of t the kernel peaks at 1 with relative width 1/sqrt(z).
  std::vector<double> pts;
  for (double b : f.breakpoints) {
    if (std::isfinite(b / x)) pts.push_back(b / x);
  }
  const double w = 1.0 / std::sqrt(z);
  for (double s : {-8.0, -4.0, -2.0, -1.0, 0.0, 1.0, 2.0, 4.0, 8.0, 16.0, 40.0}) {
    const double e = 1.0 + s * w;
    if (e > 0.0) pts.push_back(e);
  }
  pts.push_back(0.2);
  QuadratureOptions q;
  q.abs_tol = 1e-300;
  q.rel_tol = rel_tol;
  q.max_panels = 3000;
  const auto r = integrate_half_line(integrand, pts, q);
  return {r.value, r.converged};
}

std::vector<KzPoint> apply_kz(const DensityView& f, double z, std::span<const double> xs) {
  std::vector<KzPoint> out;
  out.reserve(xs.size());
  for (double x : xs) out.push_back(apply_kz_at(f, z, x));
  return out;
}

std::vector<double> apply_kz(const MixingMeasure& p, double z, std::span<const double> xs) {
  std::vector<double> out;
  out.reserve(xs.size());
  for (double x : xs) {
    double s = 0.0;
    for (std::size_t i = 0; i < p.atoms.size(); ++i) {
      if (p.weights[i] > 0.0) s += p.weights[i] * std::exp(gamma_kernel_logpdf(x, KernelParams(z, p.atoms[i])));
    }
    out.push_back(s);
  }
  return out;
}

double representation_prefactor(double z, double alpha) {
  const double zp = z + 1.0 - alpha;
  return std::exp(alpha * std::log(z) + log_gamma(zp) - std::log(zp) - log_gamma(z));
}

double asymptotic_prefactor(double z, double alpha) {
  return std::exp(alpha * std::log(z) + log_gamma(z - alpha) - log_gamma(z));
}

std::vector<double> representation_check(const SmoothDensity& f, double z, std::span<const double> xs) {
  if (!(z > 2.0)) throw std::domain_error("representation_check: z must exceed 2");
  const double alpha = f.alpha();
  const double c_z = 1.0 + (1.0 - alpha) / z;
  const double prefactor = representation_prefactor(z, alpha);
  DensityView h;
  h.pdf = [&f](double x) { return x > 0.0 ? f.h(x) : 0.0; };
  h.breakpoints = f.breakpoints();
  const auto fv = f.view();
  std::vector<double> residuals;
  residuals.reserve(xs.size());
  for (double x : xs) {
    const double lhs = apply_kz_at(fv, z, x).value;
    const double rhs =
        std::pow(x, alpha - 1.0) * prefactor * apply_kz_at(h, z + 1.0 - alpha, x / c_z).value;
    residuals.push_back(std::abs(lhs - rhs) / lhs);
  }
  return residuals;
}

CorrectedDensity::CorrectedDensity(SmoothDensity f, double beta, double z)
    : f_(std::move(f)), beta_(beta), z_(z), c_z_(1.0 + (1.0 - f_.alpha()) / z) {
  if (!(beta > 0.0)) throw std::domain_error("build_corrected_density: beta must be positive");
  if (beta > 4.0) {
    throw std::domain_error("build_corrected_density: corrections beyond beta = 4 are not supported");
  }
  if (!(z > 1.0 - f_.alpha())) throw std::domain_error("build_corrected_density: need z > 1 - alpha");
  if (beta > 2.0) {
    if (!(z > 3.0)) throw std::domain_error("build_corrected_density: the beta > 2 correction needs z > 3");
    corrected_ = true;
    mu2_ = kernel_mu(z, 2);
  }
}

double CorrectedDensity::tilde(double x) const { return c_z_ * f_.pdf(c_z_ * x); }

double CorrectedDensity::operator()(double x) const {
  if (!(x > 0.0)) return 0.0;
  if (!corrected_) return tilde(x);
  const double y = c_z_ * x;
  const double alpha = f_.alpha();
  const double h2 = f_.h_deriv(y, 2);
  // y^2 overflows far in the tail where h'' is already 0
  const double curvature = h2 == 0.0 ? 0.0 : y * y * h2;
  const double correction = std::pow(y, alpha - 1.0) * (f_.h(y) / (z_ - 1.0) + curvature * mu2_ / (2.0 * z_));
  return c_z_ * (f_.pdf(y) - correction);
}

CorrectedDensity build_corrected_density(const SmoothDensity& f, double beta, double z) {
  return CorrectedDensity(f, beta, z);
}

namespace {

std::vector<double> scaled_breakpoints(const CorrectedDensity& c) {
  std::vector<double> pts = c.base().breakpoints();
  for (double& p : pts) p /= c.c_z();
  return pts;
}

}  // namespace

ThresholdedDensity::ThresholdedDensity(CorrectedDensity corrected) : corrected_(std::move(corrected)) {
  const auto pts = scaled_breakpoints(corrected_);
  QuadratureOptions q;
  q.abs_tol = 1e-12;
  q.max_panels = 8000;
  const double alpha = corrected_.base().alpha();
  auto floored = [this](double x) {
    const double t = 0.5 * corrected_.tilde(x);
    return std::max(corrected_(x), t);
  };
  const auto mass = integrate_half_line(floored, pts, q, alpha);
  if (!mass.converged || !(mass.value > 0.0)) {
    throw std::runtime_error("threshold_normalize: normalizing quadrature failed");
  }
  c_beta_ = 1.0 / mass.value;
  const auto floor_mass = integrate_half_line(
      [this](double x) {
        const double t = 0.5 * corrected_.tilde(x);
        return corrected_(x) < t ? t : 0.0;
      },
      pts, q, alpha);
  floored_mass_ = floor_mass.value;
}

double ThresholdedDensity::operator()(double x) const {
  if (!(x > 0.0)) return 0.0;
  return c_beta_ * std::max(corrected_(x), 0.5 * corrected_.tilde(x));
}

DensityView ThresholdedDensity::view() const {
  DensityView v;
  v.pdf = [copy = *this](double x) { return copy(x); };
  v.alpha = corrected_.base().alpha();
  v.breakpoints = scaled_breakpoints(corrected_);
  return v;
}

ThresholdedDensity threshold_normalize(const CorrectedDensity& f_corr) { return ThresholdedDensity(f_corr); }

GaussRule gauss_rule_from_legendre_moments(std::span<const double> m) {
  const int n = static_cast<int>(m.size() / 2);
  if (n < 1) throw std::invalid_argument("gauss_rule_from_legendre_moments: need at least 2 moments");
  // monic Legendre recurrence: p_{k+1} = t p_k - b_k p_{k-1}
  auto b_leg = [](int k) { return k == 0 ? 0.0 : static_cast<double>(k) * k / (4.0 * k * k - 1.0); };
  const int len = 2 * n;
  std::vector<double> alpha(static_cast<std::size_t>(n), 0.0);
  std::vector<double> beta(static_cast<std::size_t>(n), 0.0);
  std::vector<double> sigma_prev(static_cast<std::size_t>(len), 0.0);  // sigma_{k-2}
  std::vector<double> sigma_cur(m.begin(), m.begin() + len);           // sigma_{k-1}
  if (!(m[0] > 0.0)) return {};
  alpha[0] = m[1] / m[0];
  beta[0] = m[0];
  int usable = 1;
  for (int k = 1; k < n; ++k) {
    std::vector<double> sigma_next(static_cast<std::size_t>(len), 0.0);
    for (int l = k; l < len - k; ++l) {
      const auto L = static_cast<std::size_t>(l);
      sigma_next[L] = sigma_cur[L + 1] - alpha[static_cast<std::size_t>(k - 1)] * sigma_cur[L] -
                      beta[static_cast<std::size_t>(k - 1)] * sigma_prev[L] + b_leg(l) * sigma_cur[L - 1];
    }
    const auto K = static_cast<std::size_t>(k);
    const double skk = sigma_next[K];
    const double prev_kk = sigma_cur[K - 1];
    if (!(skk > 0.0) || !std::isfinite(skk) || !(prev_kk > 0.0)) break;
    alpha[K] = sigma_next[K + 1] / skk - sigma_cur[K] / prev_kk;
    beta[K] = skk / prev_kk;
    // relative size of beta_k against the scale of the interval: a collapsed
    // recurrence signals lost precision
    if (!std::isfinite(alpha[K]) || beta[K] < 1e-13) break;
    sigma_prev = std::move(sigma_cur);
    sigma_cur = std::move(sigma_next);
    usable = k + 1;
  }
  Eigen::VectorXd diag(usable);
  Eigen::VectorXd sub(std::max(usable - 1, 0));
  for (int k = 0; k < usable; ++k) diag(k) = alpha[static_cast<std::size_t>(k)];
  for (int k = 1; k < usable; ++k) sub(k - 1) = std::sqrt(beta[static_cast<std::size_t>(k)]);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver;
  solver.computeFromTridiagonal(diag, sub, Eigen::ComputeEigenvectors);
  GaussRule rule;
  for (int k = 0; k < usable; ++k) {
    const double v0 = solver.eigenvectors()(0, k);
    rule.nodes.push_back(solver.eigenvalues()(k));
    rule.weights.push_back(beta[0] * v0 * v0);
  }
  return rule;
}

Discretization discretize_mixing(const std::function<double(double)>& h_density, double z,
                                 int moments_per_interval, const DiscretizeOptions& opts) {
  const int L = moments_per_interval;
  if (L < 1 || L > 12) throw std::domain_error("discretize_mixing: moments_per_interval must lie in [1, 12]");
  if (!(z > 1.0)) throw std::domain_error("discretize_mixing: z must exceed 1");
  if (!(opts.lower > 0.0 && opts.upper > opts.lower)) {
    throw std::domain_error("discretize_mixing: need 0 < e < E");
  }
  const double delta = opts.growth_m * std::sqrt(std::log(z) / z);
  const double ratio = 1.0 + 0.5 * delta;

  Discretization out;
  std::vector<double> atoms;
  std::vector<double> masses;
  QuadratureOptions q;
  q.max_panels = 2000;
  for (int j = 0;; ++j) {
    const double lo = opts.lower * std::pow(ratio, j);
    if (lo >= opts.upper * (1.0 - 1e-15)) break;
    const double hi = std::min(opts.lower * std::pow(ratio, j + 1), opts.upper);
    IntervalReport rep;
    rep.lo = lo;
    rep.hi = hi;
    q.abs_tol = opts.abs_tol;
    q.rel_tol = 1e-14;
    rep.mass = integrate(h_density, lo, hi, q).value;
    if (!(rep.mass > 0.0)) {
      rep.warning = "interval carries no mass";
      out.intervals.push_back(rep);
      continue;
    }
    const double center = 0.5 * (lo + hi);
    const double half = 0.5 * (hi - lo);
    // modified moments against monic Legendre polynomials in t = (eps - c) / half
    std::vector<double> mod(static_cast<std::size_t>(2 * L));
    for (int k = 0; k < 2 * L; ++k) {
      auto integrand = [&, k](double eps) {
        const double t = (eps - center) / half;
        double p0 = 1.0;
        double p1 = t;
        if (k == 0) return h_density(eps);
        for (int i = 1; i < k; ++i) {
          const double p2 = t * p1 - static_cast<double>(i) * i / (4.0 * i * i - 1.0) * p0;
          p0 = p1;
          p1 = p2;
        }
        return p1 * h_density(eps);
      };
      q.abs_tol = 1e-16 * rep.mass;
      mod[static_cast<std::size_t>(k)] = integrate(integrand, lo, hi, q).value / rep.mass;
    }
    const auto rule = gauss_rule_from_legendre_moments(mod);
    rep.nodes = static_cast<int>(rule.nodes.size());
    if (rep.nodes < L) {
      rep.warning = "moment recurrence broke down; using " + std::to_string(rep.nodes) + " node(s)";
    }
    std::vector<double> nodes;
    for (double t : rule.nodes) nodes.push_back(std::clamp(center + half * t, lo, hi));
    // moment check in eps
    double max_err = 0.0;
    for (int ell = 0; ell <= 2 * rep.nodes - 1; ++ell) {
      q.abs_tol = 1e-16 * rep.mass * std::pow(hi, ell);
      const double target =
          integrate([&](double e) { return std::pow(e, ell) * h_density(e); }, lo, hi, q).value / rep.mass;
      double got = 0.0;
      for (std::size_t i = 0; i < nodes.size(); ++i) got += rule.weights[i] * std::pow(nodes[i], ell);
      max_err = std::max(max_err, std::abs(got - target) / std::abs(target));
    }
    rep.max_moment_rel_error = max_err;
    for (std::size_t i = 0; i < nodes.size(); ++i) {
      atoms.push_back(nodes[i]);
      masses.push_back(rep.mass * rule.weights[i]);
    }
    out.total_mass += rep.mass;
    out.intervals.push_back(rep);
  }
  // nodes are sorted within and across intervals; merge exact duplicates at
  // shared interval endpoints
  for (std::size_t i = 0; i < atoms.size(); ++i) {
    if (!out.measure.atoms.empty() && !(atoms[i] > out.measure.atoms.back())) {
      out.measure.weights.back() += masses[i];
      continue;
    }
    out.measure.atoms.push_back(atoms[i]);
    out.measure.weights.push_back(masses[i]);
  }
  for (double& w : out.measure.weights) w /= out.total_mass;
  return out;
}

double log_log_slope(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size() || x.size() < 2) throw std::invalid_argument("log_log_slope: need >= 2 paired points");
  const double n = static_cast<double>(x.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double lx = std::log(x[i]);
    const double ly = std::log(y[i]);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
  }
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

ApproxReport rate_study(const SmoothDensity& f, double beta, std::span<const double> z_list) {
  if (z_list.size() < 4) throw std::invalid_argument("rate_study: need at least 4 z values");
  for (std::size_t i = 0; i < z_list.size(); ++i) {
    if (!(z_list[i] > 10.0)) throw std::invalid_argument("rate_study: every z must exceed 10");
    if (i > 0 && !(z_list[i] > z_list[i - 1])) throw std::invalid_argument("rate_study: z values must increase");
  }
  ApproxReport report;
  report.beta_used = beta;
  const auto truth = f.view();
  DistanceOptions opts;
  opts.abs_tol = 1e-11;
  opts.allow_mc_fallback = false;
  for (double z : z_list) {
    const auto fbar = threshold_normalize(build_corrected_density(f, beta, z));
    const auto fbar_view = fbar.view();
    DensityView smoothed;
    smoothed.pdf = [&fbar_view, z](double x) { return x > 0.0 ? apply_kz_at(fbar_view, z, x).value : 0.0; };
    smoothed.alpha = truth.alpha;
    smoothed.breakpoints = truth.breakpoints;
    report.z_values.push_back(z);
    report.hellinger_errors.push_back(hellinger(smoothed, truth, opts).value);
    report.l1_errors.push_back(l1_distance(smoothed, truth, opts).value);
  }
  report.fitted_slope = log_log_slope(report.z_values, report.hellinger_errors);
  return report;
}

}  // namespace gammix
