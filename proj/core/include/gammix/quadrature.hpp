#pragma once

#include <functional>
#include <span>
#include <vector>

namespace gammix {

using ScalarFn = std::function<double(double)>;

struct QuadratureOptions {
  double abs_tol = 1e-9;
  double rel_tol = 0.0;
  int max_panels = 4000;
};

struct QuadratureResult {
  double value = 0.0;
  double abs_error = 0.0;
  int evaluations = 0;
  bool converged = false;
};

/// Gauss-Legendre nodes and weights on [-1, 1] (Newton on P_n).
struct GaussLegendreRule {
  std::vector<double> nodes;
  std::vector<double> weights;
  static GaussLegendreRule make(int order);
};

/// Globally adaptive bisection over fixed-order Gauss-Legendre panels on [a, b].
/// The panel with the largest error estimate |Q(panel) - Q(left) - Q(right)| is
/// split until the summed estimate meets max(abs_tol, rel_tol * |value|).
QuadratureResult integrate(const ScalarFn& f, double a, double b, const QuadratureOptions& opts = {});

/// Integral over (0, inf).
///
/// `breakpoints` are sorted internally; non-positive ones are dropped. The first
/// segment [0, b_1] uses x = b_1 * u^(1/alpha) when alpha < 1, which removes an
/// x^(alpha-1) pole at the origin. The last segment [b_k, inf) is mapped by
/// x = b_k + s t / (1 - t) with s = max(b_k, 1e-300).
QuadratureResult integrate_half_line(const ScalarFn& f, std::span<const double> breakpoints,
                                     const QuadratureOptions& opts = {}, double alpha = 1.0);

/// Integral over [lo, inf), same tail map as above.
QuadratureResult integrate_to_infinity(const ScalarFn& f, double lo, const QuadratureOptions& opts = {});

}  // namespace gammix
