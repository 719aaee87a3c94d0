#include "gammix/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <string>

#include "gammix/special_functions.hpp"

namespace gammix {

KernelParams::KernelParams(double z, double epsilon) : z_(z), epsilon_(epsilon) {
  if (!(z > 0.0) || !std::isfinite(z)) {
    throw std::domain_error("KernelParams: z must be positive and finite");
  }
  if (!(epsilon > 0.0) || !std::isfinite(epsilon)) {
    throw std::domain_error("KernelParams: epsilon must be positive and finite");
  }
}

namespace {

// z (log t - t + 1) - log x + log(z / 2 pi) / 2 - remainder(z) with t = num / den:
// the kernel's log density with the large terms of z log z - log Gamma(z)
// cancelled exactly.
double kernel_log_core(double x, double num, double den, double z) {
  const double t = num / den;
  const double d = t - 1.0;
  // log1p keeps log t - t + 1 accurate near t = 1; away from it logs of the
  // parts avoid t - 1 rounding to -1 and t under- or overflowing
  const double shape = std::abs(d) < 0.5 ? std::log1p(d) - d : std::log(num) - std::log(den) - d;
  return z * shape - std::log(x) + 0.5 * std::log(z / (2.0 * std::numbers::pi)) - log_gamma_remainder(z);
}

}  // namespace

double gamma_kernel_logpdf(double x, const KernelParams& p) {
  if (!(x > 0.0)) throw std::domain_error("gamma_kernel_logpdf: x must be positive");
  const double z = p.z();
  const double eps = p.epsilon();
  return kernel_log_core(x, x, eps, z);
}

double gamma_kernel_sample(Rng& rng, const KernelParams& p) {
  double draw = rng.gamma(p.z()) / p.rate();
  return draw > 0.0 ? draw : std::numeric_limits<double>::min();
}

double inv_gamma_kernel_logpdf(double x, double z, double xi) {
  if (!(x > 0.0)) throw std::domain_error("inv_gamma_kernel_logpdf: x must be positive");
  if (!(z > 0.0) || !(xi > 0.0)) {
    throw std::domain_error("inv_gamma_kernel_logpdf: z and xi must be positive");
  }
  return kernel_log_core(x, xi, x, z);
}

double kl_gamma_same_z(double z, double eps1, double eps2) {
  if (!(z > 0.0) || !(eps1 > 0.0) || !(eps2 > 0.0)) {
    throw std::domain_error("kl_gamma_same_z: arguments must be positive");
  }
  const double r = eps1 / eps2;
  // r - 1 - log r loses everything to cancellation near r = 1; use log1p form.
  const double d = r - 1.0;
  return z * (d - std::log1p(d));
}

double kl_gamma_same_eps(double z, double z_hat, double eps) {
  if (!(z > 0.0) || !(z_hat > 0.0) || !(eps > 0.0)) {
    throw std::domain_error("kl_gamma_same_eps: arguments must be positive");
  }
  const double log_ratio = (-z_hat * std::log(z_hat) + log_gamma(z_hat)) -
                           (-z * std::log(z) + log_gamma(z));
  const double value = log_ratio - (z_hat - z) * (digamma(z) - std::log(z) - 1.0);
  return std::max(value, 0.0);
}

std::vector<double> kernel_breakpoints(const KernelParams& p) {
  const double eps = p.epsilon();
  const double sd = eps / std::sqrt(p.z());
  std::vector<double> pts;
  if (p.z() > 1.0) pts.push_back(eps * (p.z() - 1.0) / p.z());
  for (double k : {-20.0, -8.0, -3.0, -1.0, 0.0, 1.0, 3.0, 8.0, 20.0, 60.0}) {
    const double x = eps + k * sd;
    if (x > 0.0) pts.push_back(x);
  }
  if (p.z() < 1.0) {
    // heavy mass near zero: add a geometric ladder toward the origin
    for (double f = 1e-1; f > 1e-12; f *= 1e-2) pts.push_back(eps * f);
  }
  std::sort(pts.begin(), pts.end());
  return pts;
}

KernelMoment kernel_moment(double z, double x, int k) {
  if (k < 0 || k > 8) throw std::domain_error("kernel_moment: k must lie in [0, 8]");
  if (!(x > 0.0)) throw std::domain_error("kernel_moment: x must be positive");
  if (!(z > std::max(1.0, k + 1.0))) {
    throw std::domain_error("kernel_moment: integrability requires z > max(1, k + 1), got z = " +
                            std::to_string(z) + ", k = " + std::to_string(k));
  }
  const double log_const = (z - 1.0) * std::log(x) + z * std::log(z) - log_gamma(z);
  // As a function of eps the kernel is proportional to an inverse-Gamma
  // density with mode at x and relative width ~ 1/sqrt(z).
  auto integrand = [&](double eps) {
    const double lg = log_const - z * std::log(eps) - z * x / eps;
    const double d = eps - x;
    return std::pow(d, k) * std::exp(lg);
  };
  const double width = x / std::sqrt(z);
  std::vector<double> pts;
  for (double s : {-6.0, -3.0, -1.5, -0.5, 0.0, 0.5, 1.5, 3.0, 6.0, 12.0, 30.0}) {
    const double e = x + s * width;
    if (e > 0.0) pts.push_back(e);
  }
  pts.push_back(x * 0.05);
  QuadratureOptions opts;
  const double scale = std::pow(x, k) / std::pow(z, 0.5 * k);
  opts.abs_tol = 1e-14 * scale;
  opts.rel_tol = 1e-13;
  opts.max_panels = 20000;
  KernelMoment out;
  out.quad = integrate_half_line(integrand, pts, opts);
  out.value = out.quad.value;
  out.mu = out.value / scale;
  return out;
}

double kernel_mu(double z, int k) { return kernel_moment(z, 1.0, k).mu; }

}  // namespace gammix
