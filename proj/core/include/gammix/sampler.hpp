#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "gammix/density_zoo.hpp"
#include "gammix/rng.hpp"

namespace gammix {

enum class KernelModel { kGamma, kInverseGamma };

const char* model_name(KernelModel m);
KernelModel parse_model(const std::string& s);  // "gamma" | "invgamma" | "inverse-gamma"

/// Hyperparameters of the Dirichlet-process Gamma mixture.
struct PriorConfig {
  double m = 1.0;     // DP mass; sticks V ~ Beta(1, m)
  double a = 2.0;     // base measure G(x) ~ x^a on (0, 1], x^-a above
  double b = 1.0;     // sqrt(z) ~ Gamma(b, c)
  double c = 1.0;
  double w_z = 0.01;  // weight of the random-walk z proposal
  double B_z = 10.0;  // random-walk concentration
  KernelModel model = KernelModel::kGamma;

  /// Throws std::invalid_argument on an improper or out-of-range setting.
  void validate() const;
};

class SamplerError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class DataError : public std::invalid_argument {
 public:
  DataError(const std::string& what, std::size_t index) : std::invalid_argument(what), index_(index) {}
  std::size_t index() const { return index_; }

 private:
  std::size_t index_;
};

/// Observations on the scale the Gamma model is fitted to (reciprocals for the
/// inverse-Gamma model) with cached sufficient statistics.
struct SamplerData {
  std::vector<double> x;
  double sum_log = 0.0;
  double sum = 0.0;

  /// Validates positivity (DataError carries the offending index) and applies
  /// the model transform.
  static SamplerData prepare(std::span<const double> raw, KernelModel model);
};

/// log of the normalized base measure; normalizer 1/(a+1) + 1/(a-1).
double base_measure_logpdf(double x, double a);
double base_measure_cdf(double x, double a);
/// Exact inverse-CDF draw.
double base_measure_sample(Rng& rng, double a);

/// Density of z when sqrt(z) ~ Gamma(b, c):
/// b log c - log Gamma(b) + (b - 1)/2 log z - c sqrt(z) - log(2 sqrt(z)).
double z_prior_logpdf(double z, double b, double c);

struct ChainState {
  double z = 1.0;
  std::vector<double> sticks;   // V_j
  std::vector<double> atoms;    // eps_j
  std::vector<double> weights;  // p_j = V_j prod_{l<j} (1 - V_l)
  double remaining = 1.0;       // prod_j (1 - V_j) = 1 - sum_j p_j
  std::vector<std::size_t> alloc;
  std::vector<double> slices;
  std::vector<std::size_t> counts;  // n_j
  std::vector<double> sums;         // S_j
  Rng rng;

  std::size_t size() const { return sticks.size(); }
  std::size_t occupied() const;
  double min_slice() const;

  void refresh_weights();
  void refresh_stats(const SamplerData& data);
  void push_stick(double v, double eps);
  /// Throws SamplerError describing the first broken invariant. With
  /// `slices_current`, also requires u_i < p_{c_i}.
  void check_invariants(const SamplerData& data, bool slices_current) const;
};

/// One cluster holding every datum at the sample mean, z = 1, V_1 from the prior.
ChainState initial_state(const SamplerData& data, const PriorConfig& prior, Rng rng);

struct Diagnostics {
  std::size_t atom_proposals = 0;
  std::size_t atom_accepts = 0;
  std::size_t z_proposals = 0;
  std::size_t z_accepts = 0;
  std::size_t z_rate_fallbacks = 0;  // sweeps where the main z proposal was unusable
  std::size_t nonfinite_rejections = 0;
  std::size_t max_sticks = 0;
  std::vector<int> occupied_trace;
  std::vector<double> z_trace;

  double atom_acceptance() const;
  double z_acceptance() const;
};

// Conditionals and proposals, exposed for ratio and detailed-balance tests.

/// Augmented log joint of (data, u, c, V, eps, z); -inf if some u_i >= p_{c_i}.
double log_joint(const ChainState& s, const SamplerData& data, const PriorConfig& prior);
/// The same joint with the slices integrated out: sum_i log p_{c_i} replaces
/// the slice indicators.
double log_joint_sliceless(const ChainState& s, const SamplerData& data, const PriorConfig& prior);

/// log Beta(v; n_j + 1, sum_{l>j} n_l + m).
double stick_conditional_logpdf(const ChainState& s, std::size_t j, double v, const PriorConfig& prior);

/// Unnormalized log G(eps) - z S / eps - z n log eps.
double atom_target_logpdf(double eps, std::size_t n, double S, double z, double a);
/// log IG(eps; shape a + z n, scale z S).
double atom_proposal_logpdf(double eps, std::size_t n, double S, double z, double a);
/// log acceptance ratio for moving eps_from -> eps_to.
double atom_log_acceptance(double eps_from, double eps_to, std::size_t n, double S, double z, double a);

/// Unnormalized log conditional of z.
double z_target_logpdf(double z, const ChainState& s, const SamplerData& data, const PriorConfig& prior);

struct ZProposal {
  double shape = 0.0;
  double rate = 0.0;
  bool usable = false;  // rate > 0
};
/// Main proposal Gamma((b + n)/2, sum S_j/eps_j - n - sum log X + sum n_j log eps_j).
ZProposal z_main_proposal(const ChainState& s, const SamplerData& data, const PriorConfig& prior);
/// Mixture density (1 - w_z) main(z_to) + w_z Gamma(z_to; z_from B_z, B_z), or
/// the random-walk part alone when the main proposal is unusable.
double z_proposal_logpdf(double z_to, double z_from, const ZProposal& main, const PriorConfig& prior);
double z_log_acceptance(double z_from, double z_to, const ChainState& s, const SamplerData& data,
                        const PriorConfig& prior);

/// Normalized log probabilities of c_i over all sticks (-inf off the slice set).
std::vector<double> allocation_logprobs(const ChainState& s, const SamplerData& data, std::size_t i);

// Sub-steps of one sweep.
void update_atoms(ChainState& s, const SamplerData& data, const PriorConfig& prior, Diagnostics& diag);
void update_sticks(ChainState& s, const PriorConfig& prior);
void update_slices(ChainState& s);
/// Appends prior sticks until 1 - sum p_j < min u. Throws SamplerError past `cap` sticks.
void extend_sticks(ChainState& s, const PriorConfig& prior, std::size_t cap = 10000);
void update_allocations(ChainState& s, const SamplerData& data);
void update_z(ChainState& s, const SamplerData& data, const PriorConfig& prior, Diagnostics& diag);
/// Drops trailing sticks past both the last occupied one and the last with p_j > min u.
void collect_garbage(ChainState& s);

struct SweepOptions {
  std::size_t stick_cap = 10000;
  bool check_invariants = false;
};

/// atoms -> sticks -> slices -> extend -> allocations -> z -> garbage collection.
void gibbs_sweep(ChainState& s, const SamplerData& data, const PriorConfig& prior, Diagnostics& diag,
                 const SweepOptions& opts = {});

/// A retained posterior draw. For the inverse-Gamma model `atom` is xi = 1 / eps
/// and the mixture uses the inverse-Gamma kernel.
struct PosteriorDraw {
  double z = 1.0;
  std::vector<std::pair<double, double>> components;  // (weight, atom)
  double residual_weight = 0.0;
  KernelModel model = KernelModel::kGamma;
};

/// Snapshot of the current state; sticks are continued from the prior with
/// `tail_rng` until the uncovered weight falls below `tolerance`.
PosteriorDraw snapshot(const ChainState& s, const PriorConfig& prior, Rng& tail_rng, double tolerance = 1e-8);

struct FitOptions {
  std::size_t iters = 20000;
  std::size_t burnin = 10000;
  std::size_t thin = 10;
  std::uint64_t seed = 1;
  std::string init = "single-cluster";
  SweepOptions sweep;

  void validate() const;
};

struct ChainResult {
  std::vector<PosteriorDraw> draws;
  Diagnostics diagnostics;
};

/// One chain. The state stream is Rng::stream(seed, 2 k) and the snapshot tail
/// stream Rng::stream(seed, 2 k + 1) for chain index k. Iteration t (1-based)
/// is retained when t > burnin and (t - burnin) is a multiple of thin.
ChainResult run_chain(std::span<const double> data, const PriorConfig& prior, const FitOptions& opts,
                      std::uint64_t chain_index = 0);

/// Independent chains on separate threads; results are ordered by chain index
/// and do not depend on scheduling.
std::vector<ChainResult> run_chains(std::span<const double> data, const PriorConfig& prior,
                                    const FitOptions& opts, std::size_t n_chains, std::size_t max_threads = 0);

/// log sum_j w_j k(x | z, atom_j) with log-sum-exp; residual weight ignored.
double mixture_logpdf(const PosteriorDraw& draw, double x);

/// Precomputed evaluator for one draw; agrees with mixture_logpdf to rounding.
class MixtureEvaluator {
 public:
  explicit MixtureEvaluator(const PosteriorDraw& draw);
  double logpdf(double x) const;
  double pdf(double x) const;
  DensityView view() const;

 private:
  KernelModel model_;
  double z_;
  std::vector<double> log_coef_;  // log w_j + z log(z / eps_j) - log Gamma(z)
  std::vector<double> rate_;      // z / eps_j on the Gamma scale
  std::vector<double> atoms_;      // eps_j
  std::vector<double> log_weight_;
};

struct GridSummary {
  std::vector<double> x;
  std::vector<double> mean;
  std::vector<double> q05;
  std::vector<double> q50;
  std::vector<double> q95;
};

/// Posterior mean and pointwise 5/50/95% quantiles of the density on xs.
GridSummary density_grid(std::span<const PosteriorDraw> draws, std::span<const double> xs);

}  // namespace gammix
