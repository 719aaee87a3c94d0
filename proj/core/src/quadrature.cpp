#include "gammix/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <queue>
#include <stdexcept>

namespace gammix {

GaussLegendreRule GaussLegendreRule::make(int order) {
  if (order < 1) throw std::invalid_argument("GaussLegendreRule: order must be >= 1");
  GaussLegendreRule rule;
  rule.nodes.resize(static_cast<std::size_t>(order));
  rule.weights.resize(static_cast<std::size_t>(order));
  const int half = (order + 1) / 2;
  for (int i = 0; i < half; ++i) {
    double x = std::cos(std::numbers::pi * (i + 0.75) / (order + 0.5));
    double dp = 0.0;
    for (int iter = 0; iter < 100; ++iter) {
      double p0 = 1.0;
      double p1 = x;
      for (int k = 2; k <= order; ++k) {
        const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      if (order == 1) p0 = 1.0;
      dp = order * (x * p1 - p0) / (x * x - 1.0);
      const double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    const double w = 2.0 / ((1.0 - x * x) * dp * dp);
    rule.nodes[static_cast<std::size_t>(i)] = -x;
    rule.nodes[static_cast<std::size_t>(order - 1 - i)] = x;
    rule.weights[static_cast<std::size_t>(i)] = w;
    rule.weights[static_cast<std::size_t>(order - 1 - i)] = w;
  }
  return rule;
}

namespace {

const GaussLegendreRule& panel_rule() {
  static const GaussLegendreRule rule = GaussLegendreRule::make(15);
  return rule;
}

struct Panel {
  double a;
  double b;
  double left;  // half-panel estimates
  double right;
  double refined;
  double error;
  bool operator<(const Panel& other) const { return error < other.error; }
};

double gauss_panel(const ScalarFn& f, double a, double b, int& evals) {
  const auto& rule = panel_rule();
  const double mid = 0.5 * (a + b);
  const double half = 0.5 * (b - a);
  double sum = 0.0;
  for (std::size_t k = 0; k < rule.nodes.size(); ++k) {
    const double v = f(mid + half * rule.nodes[k]);
    if (std::isfinite(v)) sum += rule.weights[k] * v;
  }
  evals += static_cast<int>(rule.nodes.size());
  return half * sum;
}

Panel make_panel(const ScalarFn& f, double a, double b, double whole, int& evals) {
  const double mid = 0.5 * (a + b);
  const double left = gauss_panel(f, a, mid, evals);
  const double right = gauss_panel(f, mid, b, evals);
  const double refined = left + right;
  return {a, b, left, right, refined, std::abs(whole - refined)};
}

}  // namespace

QuadratureResult integrate(const ScalarFn& f, double a, double b, const QuadratureOptions& opts) {
  QuadratureResult result;
  if (!(b > a)) {
    result.converged = (a == b);
    return result;
  }
  int evals = 0;
  std::priority_queue<Panel> heap;
  const double whole = gauss_panel(f, a, b, evals);
  heap.push(make_panel(f, a, b, whole, evals));
  double total = heap.top().refined;
  double total_err = heap.top().error;
  int panels = 1;
  auto target = [&] { return std::max(opts.abs_tol, opts.rel_tol * std::abs(total)); };
  while (total_err > target() && panels < opts.max_panels) {
    const Panel worst = heap.top();
    const double mid = 0.5 * (worst.a + worst.b);
    if (!(mid > worst.a && worst.b > mid)) break;  // no further resolution in double
    heap.pop();
    const Panel left = make_panel(f, worst.a, mid, worst.left, evals);
    const Panel right = make_panel(f, mid, worst.b, worst.right, evals);
    total += left.refined + right.refined - worst.refined;
    total_err += left.error + right.error - worst.error;
    heap.push(left);
    heap.push(right);
    ++panels;
  }
  // re-sum to shed accumulated rounding from the incremental updates
  double sum = 0.0;
  double err = 0.0;
  while (!heap.empty()) {
    sum += heap.top().refined;
    err += heap.top().error;
    heap.pop();
  }
  result.value = sum;
  result.abs_error = err;
  result.evaluations = evals;
  result.converged = err <= std::max(opts.abs_tol, opts.rel_tol * std::abs(sum));
  return result;
}

QuadratureResult integrate_to_infinity(const ScalarFn& f, double lo, const QuadratureOptions& opts) {
  const double scale = std::max(std::abs(lo), 1e-300);
  auto mapped = [&](double t) {
    const double one_minus = 1.0 - t;
    if (one_minus <= 0.0) return 0.0;
    const double x = lo + scale * t / one_minus;
    return f(x) * scale / (one_minus * one_minus);
  };
  return integrate(mapped, 0.0, 1.0, opts);
}

QuadratureResult integrate_half_line(const ScalarFn& f, std::span<const double> breakpoints,
                                     const QuadratureOptions& opts, double alpha) {
  std::vector<double> pts;
  pts.reserve(breakpoints.size());
  for (double p : breakpoints) {
    if (p > 0.0 && std::isfinite(p)) pts.push_back(p);
  }
  std::sort(pts.begin(), pts.end());
  pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
  if (pts.empty()) pts.push_back(1.0);

  const std::size_t segments = pts.size() + 1;
  QuadratureOptions seg_opts = opts;
  seg_opts.abs_tol = opts.abs_tol / static_cast<double>(segments);

  QuadratureResult total;
  total.converged = true;
  auto accumulate = [&total](const QuadratureResult& r) {
    total.value += r.value;
    total.abs_error += r.abs_error;
    total.evaluations += r.evaluations;
    total.converged = total.converged && r.converged;
  };

  const double first = pts.front();
  if (alpha < 1.0) {
    if (!(alpha > 0.0)) throw std::invalid_argument("integrate_half_line: alpha must be in (0, 1]");
    const double inv_alpha = 1.0 / alpha;
    // x = first * u^(1/alpha), dx = first/alpha * u^(1/alpha - 1) du
    auto mapped = [&](double u) {
      if (u <= 0.0) return 0.0;
      const double x = first * std::pow(u, inv_alpha);
      if (!(x > 0.0)) return 0.0;
      return f(x) * first * inv_alpha * std::pow(u, inv_alpha - 1.0);
    };
    accumulate(integrate(mapped, 0.0, 1.0, seg_opts));
  } else {
    accumulate(integrate(f, 0.0, first, seg_opts));
  }
  for (std::size_t k = 0; k + 1 < pts.size(); ++k) {
    accumulate(integrate(f, pts[k], pts[k + 1], seg_opts));
  }
  accumulate(integrate_to_infinity(f, pts.back(), seg_opts));
  return total;
}

}  // namespace gammix
