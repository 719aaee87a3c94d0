#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "gammix/density_zoo.hpp"

namespace gammix {

struct DistanceOptions {
  double abs_tol = 1e-7;
  std::vector<double> split_points;  // extra quadrature breakpoints, ascending
  int mc_samples = 200000;
  std::uint64_t mc_seed = 20240601;
  bool allow_mc_fallback = true;
};

enum class DistanceMethod { kQuadrature, kMonteCarlo };

struct DistanceResult {
  double value = 0.0;
  double std_error = 0.0;  // zero for quadrature results
  DistanceMethod method = DistanceMethod::kQuadrature;
  bool converged = true;
  std::string diagnostic;
};

/// ||f - g||_1 on (0, inf). Falls back to Monte Carlo (flagged) when the
/// quadrature does not converge and a sampler is available.
DistanceResult l1_distance(const DensityView& f, const DensityView& g, const DistanceOptions& o = {});

/// D_H = sqrt(int (sqrt f - sqrt g)^2).
DistanceResult hellinger(const DensityView& f, const DensityView& g, const DistanceOptions& o = {});

/// KL(f || g) = int f log(f / g). +inf with a diagnostic when g vanishes where f does not.
DistanceResult kl_divergence(const DensityView& f, const DensityView& g, const DistanceOptions& o = {});

/// V(f, g) = int f log^2(f / g) - KL(f || g)^2, clamped at 0.
DistanceResult v_divergence(const DensityView& f, const DensityView& g, const DistanceOptions& o = {});

/// Monte Carlo estimates, sampling from the equal mixture of f and g when both
/// samplers exist (integrands stay bounded by 2), else from f alone.
DistanceResult l1_distance_mc(const DensityView& f, const DensityView& g, int samples, std::uint64_t seed);
DistanceResult hellinger_mc(const DensityView& f, const DensityView& g, int samples, std::uint64_t seed);

/// Empirical quantiles by the inclusive rule: with sorted values v_0..v_{n-1},
/// h = (n - 1) p and the result interpolates linearly between v_floor(h) and
/// v_ceil(h). Throws std::invalid_argument on empty input.
std::vector<double> weighted_quantiles(std::span<const double> values, std::span<const double> probs);

}  // namespace gammix
