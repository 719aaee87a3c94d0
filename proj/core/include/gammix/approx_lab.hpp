#pragma once

#include <functional>
#include <span>
#include <string>
#include <vector>

#include "gammix/density_zoo.hpp"
#include "gammix/quadrature.hpp"

namespace gammix {

/// Discrete mixing distribution sum_i p_i delta_{u_i}.
struct MixingMeasure {
  std::vector<double> atoms;    // strictly increasing, positive
  std::vector<double> weights;  // nonnegative, sum to 1

  /// Throws std::invalid_argument when the invariants fail.
  void validate(double tol = 1e-12) const;
};

struct KzPoint {
  double value = 0.0;
  bool converged = true;
};

/// K_z f(x) = int g_{z,eps}(x) f(eps) d eps. Requires z > 1.
KzPoint apply_kz_at(const DensityView& f, double z, double x, double rel_tol = 1e-11);
std::vector<KzPoint> apply_kz(const DensityView& f, double z, std::span<const double> xs);
/// Discrete version: sum_i p_i g_{z,u_i}(x), exact.
std::vector<double> apply_kz(const MixingMeasure& p, double z, std::span<const double> xs);

/// z^alpha Gamma(z + 1 - alpha) / ((z + 1 - alpha) Gamma(z)): the prefactor that
/// makes K_z f(x) = x^(alpha-1) * prefactor * K_{z+1-alpha} h(x / C_z) exact.
double representation_prefactor(double z, double alpha);
/// z^alpha Gamma(z - alpha) / Gamma(z) = 1 + O(1/z).
double asymptotic_prefactor(double z, double alpha);

/// Relative residual of the representation identity at each x. Requires z > 2.
std::vector<double> representation_check(const SmoothDensity& f, double z, std::span<const double> xs);

/// The rescaled density C_z f(C_z x), optionally with the first-order Taylor
/// correction. C_z = 1 + (1 - alpha) / z.
class CorrectedDensity {
 public:
  CorrectedDensity(SmoothDensity f, double beta, double z);

  double operator()(double x) const;
  /// C_z f(C_z x), the uncorrected rescaling.
  double tilde(double x) const;

  const SmoothDensity& base() const { return f_; }
  double beta() const { return beta_; }
  double z() const { return z_; }
  double c_z() const { return c_z_; }
  double mu2() const { return mu2_; }
  bool corrected() const { return corrected_; }

 private:
  SmoothDensity f_;
  double beta_;
  double z_;
  double c_z_;
  double mu2_ = 1.0;
  bool corrected_ = false;
};

/// beta <= 2: no correction terms. beta in (2, 4]: f - x^(alpha-1) [h / (z-1) +
/// x^2 h'' mu_2(z) / (2z)], then rescaled. Throws for beta > 4 or z <= 1 - alpha.
CorrectedDensity build_corrected_density(const SmoothDensity& f, double beta, double z);

/// c * (f_corr where f_corr >= tilde/2, else tilde/2), c normalizing to mass 1.
class ThresholdedDensity {
 public:
  explicit ThresholdedDensity(CorrectedDensity corrected);

  double operator()(double x) const;
  double c_beta() const { return c_beta_; }
  /// Mass of the region where the floor was active (before normalization).
  double floored_mass() const { return floored_mass_; }
  const CorrectedDensity& corrected() const { return corrected_; }
  DensityView view() const;

 private:
  CorrectedDensity corrected_;
  double c_beta_ = 1.0;
  double floored_mass_ = 0.0;
};

ThresholdedDensity threshold_normalize(const CorrectedDensity& f_corr);

struct DiscretizeOptions {
  double lower = 0.1;   // e
  double upper = 10.0;  // E
  double growth_m = 5.0;  // M in delta_z = M sqrt(log z / z)
  double abs_tol = 1e-14;
};

struct IntervalReport {
  double lo = 0.0;
  double hi = 0.0;
  double mass = 0.0;
  int nodes = 0;
  double max_moment_rel_error = 0.0;  // over ell <= 2 * nodes - 1, in eps
  std::string warning;
};

struct Discretization {
  MixingMeasure measure;  // normalized
  double total_mass = 0.0;  // H([e, E])
  std::vector<IntervalReport> intervals;
};

/// Moment-matched discretization of a positive density H on [e, E]: geometric
/// intervals with ratio 1 + delta_z / 2, and on each an L-point Gauss rule for
/// the restricted, normalized H (modified moments in the Legendre basis, then
/// the Jacobi matrix eigenproblem). Degrades to fewer nodes when the recurrence
/// breaks down. Requires 1 <= L <= 12.
Discretization discretize_mixing(const std::function<double(double)>& h_density, double z,
                                 int moments_per_interval, const DiscretizeOptions& opts = {});

/// L-point Gauss rule for the measure w(t) dt on [-1, 1] given its first 2L
/// modified moments against monic Legendre polynomials. Returns fewer nodes if
/// the recurrence breaks down.
struct GaussRule {
  std::vector<double> nodes;
  std::vector<double> weights;
};
GaussRule gauss_rule_from_legendre_moments(std::span<const double> modified_moments);

struct ApproxReport {
  std::vector<double> z_values;
  std::vector<double> hellinger_errors;
  std::vector<double> l1_errors;
  double fitted_slope = 0.0;  // least squares slope of log D_H on log z
  double beta_used = 0.0;
};

/// For each z: corrected and thresholded density, K_z applied, distances to f.
/// Requires at least 4 increasing z values, all > 10.
ApproxReport rate_study(const SmoothDensity& f, double beta, std::span<const double> z_list);

/// Least-squares slope of log(y) on log(x).
double log_log_slope(std::span<const double> x, std::span<const double> y);

}  // namespace gammix
