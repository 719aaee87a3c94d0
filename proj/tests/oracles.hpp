#pragma once

// Independent reference computations for the tests. Everything here uses
// Boost.Math or closed forms, never the library's own quadrature.

#include <algorithm>
#include <boost/math/quadrature/exp_sinh.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>
#include <cmath>
#include <functional>
#include <vector>

namespace oracle {

/// int_0^inf f with tanh-sinh on [0, p_0] (tolerates endpoint poles), adaptive
/// Gauss-Kronrod between breakpoints, exp-sinh on the tail. `tol` is relative;
/// keep it above the accuracy of the integrand itself.
inline double integral(const std::function<double(double)>& f, std::vector<double> pts, double tol = 1e-13) {
  std::sort(pts.begin(), pts.end());
  pts.erase(std::remove_if(pts.begin(), pts.end(), [](double p) { return !(p > 0.0); }), pts.end());
  pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
  double total = 0.0;
  boost::math::quadrature::tanh_sinh<double> ts(15);
  total += ts.integrate(f, 0.0, pts.front(), tol);
  for (std::size_t k = 0; k + 1 < pts.size(); ++k) {
    total += boost::math::quadrature::gauss_kronrod<double, 61>::integrate(f, pts[k], pts[k + 1], 15, tol);
  }
  boost::math::quadrature::exp_sinh<double> es;
  const double last = pts.back();
  total += es.integrate([&](double t) { return f(last + t); }, tol);
  return total;
}

/// Breakpoints around a Gamma(z, rate z/eps) kernel: mode and mean +- k sd.
inline std::vector<double> kernel_points(double z, double eps) {
  std::vector<double> p;
  const double sd = eps / std::sqrt(z);
  for (double k : {-12.0, -8.0, -5.0, -3.0, -2.0, -1.0, 0.0, 1.0, 2.0, 3.0, 5.0, 8.0, 12.0, 20.0, 40.0}) {
    const double v = eps + k * sd;
    if (v > 0.0) p.push_back(v);
  }
  p.push_back(eps * 1e-3);
  p.push_back(eps * 0.1);
  if (z > 1.0) p.push_back(eps * (z - 1.0) / z);
  return p;
}

inline double gamma_kernel_pdf(double x, double z, double eps) {
  return std::exp((z - 1.0) * std::log(x) - z * x / eps + z * std::log(z / eps) - std::lgamma(z));
}

/// I_k(z, x) in closed form. As a function of eps, g_{z,eps}(x) equals
/// z/(z-1) times the inverse-Gamma(z-1, scale z x) density, whose raw moments
/// are (z x)^m Gamma(z-1-m) / Gamma(z-1).
inline long double kernel_moment_closed(long double z, long double x, int k) {
  long double total = 0.0L;
  long double binom = 1.0L;
  for (int m = 0; m <= k; ++m) {
    const long double raw = std::exp(m * std::log(z * x) + std::lgamma(z - 1.0L - m) - std::lgamma(z - 1.0L));
    total += binom * raw * std::pow(-x, static_cast<long double>(k - m));
    binom = binom * (k - m) / (m + 1);
  }
  return z / (z - 1.0L) * total;
}

}  // namespace oracle
