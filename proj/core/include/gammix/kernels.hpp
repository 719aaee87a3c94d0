#pragma once

#include "gammix/quadrature.hpp"
#include "gammix/rng.hpp"

#include <vector>

namespace gammix {

/// One Gamma kernel: shape z and mean epsilon, so variance is epsilon^2 / z.
class KernelParams {
 public:
  KernelParams(double z, double epsilon);

  double z() const { return z_; }
  double epsilon() const { return epsilon_; }
  double rate() const { return z_ / epsilon_; }

 private:
  double z_;
  double epsilon_;
};

/// log g_{z,eps}(x) = (z-1) log x - z x / eps + z log(z / eps) - log Gamma(z).
double gamma_kernel_logpdf(double x, const KernelParams& p);

/// Gamma(shape = z, rate = z / eps) variate.
double gamma_kernel_sample(Rng& rng, const KernelParams& p);

/// log of the inverse-Gamma kernel x^{-z-1} exp(-z xi / x) (z xi)^z / Gamma(z).
double inv_gamma_kernel_logpdf(double x, double z, double xi);

/// KL(g_{z,eps1} || g_{z,eps2}) = z (r - 1 - log r), r = eps1 / eps2.
double kl_gamma_same_z(double z, double eps1, double eps2);

/// KL(g_{z,eps} || g_{z_hat,eps}); exact, independent of eps.
double kl_gamma_same_eps(double z, double z_hat, double eps);

/// Breakpoints for integrating a kernel in x: the mode and a ladder of
/// standard deviations around the mean.
std::vector<double> kernel_breakpoints(const KernelParams& p);

struct KernelMoment {
  double value = 0.0;  // I_k(z, x)
  double mu = 0.0;     // z^{k/2} I_k(z, x) / x^k
  QuadratureResult quad;
};

/// I_k(z, x) = int_0^inf (eps - x)^k g_{z,eps}(x) d eps by adaptive quadrature
/// in eps. Requires z > max(1, k + 1) and k <= 8.
KernelMoment kernel_moment(double z, double x, int k);

/// mu_k(z), evaluated at the reference abscissa x = 1.
double kernel_mu(double z, int k);

}  // namespace gammix
