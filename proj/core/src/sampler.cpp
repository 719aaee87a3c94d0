#include "gammix/sampler.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <limits>
#include <memory>
#include <thread>

#include "gammix/kernels.hpp"
#include "gammix/metrics.hpp"
#include "gammix/special_functions.hpp"

namespace gammix {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

double gamma_logpdf(double x, double shape, double rate) {
  return shape * std::log(rate) - log_gamma(shape) + (shape - 1.0) * std::log(x) - rate * x;
}

double log_sum_exp(std::span<const double> v) {
  double mx = kNegInf;
  for (double t : v) mx = std::max(mx, t);
  if (mx == kNegInf) return kNegInf;
  double s = 0.0;
  for (double t : v) s += std::exp(t - mx);
  return mx + std::log(s);
}

double clamp_stick(double v) {
  constexpr double lo = std::numeric_limits<double>::min();
  const double hi = std::nextafter(1.0, 0.0);
  return std::clamp(v, lo, hi);
}

double log_base_normalizer(double a) { return std::log(1.0 / (a + 1.0) + 1.0 / (a - 1.0)); }

void require_proper(double a) {
  if (!(a > 1.0)) throw std::domain_error("base measure: a must exceed 1 for a proper prior");
}

}  // namespace

const char* model_name(KernelModel m) { return m == KernelModel::kGamma ? "gamma" : "invgamma"; }

KernelModel parse_model(const std::string& s) {
  if (s == "gamma") return KernelModel::kGamma;
  if (s == "invgamma" || s == "inverse-gamma") return KernelModel::kInverseGamma;
  throw std::invalid_argument("unknown model '" + s + "' (expected gamma or invgamma)");
}

void PriorConfig::validate() const {
  if (!(m > 0.0) || !std::isfinite(m)) throw std::invalid_argument("prior: mass m must be positive");
  if (!(a > 1.0) || !std::isfinite(a)) throw std::invalid_argument("prior: base exponent a must exceed 1");
  if (!(b > 0.0) || !(c > 0.0)) throw std::invalid_argument("prior: b and c must be positive");
  if (!(w_z >= 0.0 && w_z < 1.0)) throw std::invalid_argument("prior: w_z must lie in [0, 1)");
  if (!(B_z > 0.0)) throw std::invalid_argument("prior: B_z must be positive");
}

SamplerData SamplerData::prepare(std::span<const double> raw, KernelModel model) {
  if (raw.empty()) throw DataError("no observations", 0);
  SamplerData d;
  d.x.reserve(raw.size());
  for (std::size_t i = 0; i < raw.size(); ++i) {
    const double v = raw[i];
    if (!(v > 0.0) || !std::isfinite(v)) {
      throw DataError("observation " + std::to_string(i) + " is not a positive finite number", i);
    }
    const double t = model == KernelModel::kGamma ? v : 1.0 / v;
    d.x.push_back(t);
    d.sum_log += std::log(t);
    d.sum += t;
  }
  return d;
}

double base_measure_logpdf(double x, double a) {
  require_proper(a);
  if (!(x > 0.0)) return kNegInf;
  const double lx = std::log(x);
  return (x <= 1.0 ? a * lx : -a * lx) - log_base_normalizer(a);
}

double base_measure_cdf(double x, double a) {
  require_proper(a);
  if (!(x > 0.0)) return 0.0;
  const double norm = 1.0 / (a + 1.0) + 1.0 / (a - 1.0);
  if (x <= 1.0) return std::pow(x, a + 1.0) / (a + 1.0) / norm;
  return (1.0 / (a + 1.0) + (1.0 - std::pow(x, 1.0 - a)) / (a - 1.0)) / norm;
}

double base_measure_sample(Rng& rng, double a) {
  require_proper(a);
  const double norm = 1.0 / (a + 1.0) + 1.0 / (a - 1.0);
  const double left = 1.0 / (a + 1.0);
  const double u = rng.uniform() * norm;
  if (u < left) return std::pow(u * (a + 1.0), 1.0 / (a + 1.0));
  return std::pow(1.0 - (u - left) * (a - 1.0), 1.0 / (1.0 - a));
}

double z_prior_logpdf(double z, double b, double c) {
  if (!(z > 0.0)) throw std::domain_error("z_prior_logpdf: z must be positive");
  if (!(b > 0.0) || !(c > 0.0)) throw std::domain_error("z_prior_logpdf: b and c must be positive");
  const double r = std::sqrt(z);
  return b * std::log(c) - log_gamma(b) + 0.5 * (b - 1.0) * std::log(z) - c * r - std::log(2.0 * r);
}

// ---------------------------------------------------------------- state

std::size_t ChainState::occupied() const {
  return static_cast<std::size_t>(std::count_if(counts.begin(), counts.end(), [](std::size_t n) { return n > 0; }));
}

double ChainState::min_slice() const {
  double m = 1.0;
  for (double u : slices) m = std::min(m, u);
  return m;
}

void ChainState::refresh_weights() {
  weights.resize(sticks.size());
  double rest = 1.0;
  for (std::size_t j = 0; j < sticks.size(); ++j) {
    weights[j] = sticks[j] * rest;
    rest *= 1.0 - sticks[j];
  }
  remaining = rest;
}

void ChainState::refresh_stats(const SamplerData& data) {
  counts.assign(sticks.size(), 0);
  sums.assign(sticks.size(), 0.0);
  for (std::size_t i = 0; i < alloc.size(); ++i) {
    ++counts[alloc[i]];
    sums[alloc[i]] += data.x[i];
  }
}

void ChainState::push_stick(double v, double eps) {
  v = clamp_stick(v);
  sticks.push_back(v);
  atoms.push_back(eps);
  weights.push_back(v * remaining);
  remaining *= 1.0 - v;
  counts.push_back(0);
  sums.push_back(0.0);
}

void ChainState::check_invariants(const SamplerData& data, bool slices_current) const {
  const std::size_t J = sticks.size();
  if (J == 0) throw SamplerError("invariant: no sticks");
  if (atoms.size() != J || weights.size() != J || counts.size() != J || sums.size() != J) {
    throw SamplerError("invariant: per-stick arrays disagree in length");
  }
  if (alloc.size() != data.x.size() || slices.size() != data.x.size()) {
    throw SamplerError("invariant: per-datum arrays disagree with the data size");
  }
  if (!(z > 0.0) || !std::isfinite(z)) throw SamplerError("invariant: z must be positive and finite");
  double total = remaining;
  for (std::size_t j = 0; j < J; ++j) {
    if (!(sticks[j] > 0.0 && sticks[j] < 1.0)) throw SamplerError("invariant: stick outside (0, 1)");
    if (!(atoms[j] > 0.0) || !std::isfinite(atoms[j])) throw SamplerError("invariant: nonpositive atom");
    total += weights[j];
  }
  if (std::abs(total - 1.0) > 1e-12) throw SamplerError("invariant: weights and residual do not sum to 1");
  std::vector<std::size_t> n(J, 0);
  std::vector<double> S(J, 0.0);
  for (std::size_t i = 0; i < alloc.size(); ++i) {
    if (alloc[i] >= J) throw SamplerError("invariant: allocation out of range");
    ++n[alloc[i]];
    S[alloc[i]] += data.x[i];
    if (slices_current && !(slices[i] < weights[alloc[i]])) {
      throw SamplerError("invariant: slice u_" + std::to_string(i) + " not below its stick weight");
    }
  }
  for (std::size_t j = 0; j < J; ++j) {
    if (n[j] != counts[j] || std::abs(S[j] - sums[j]) > 1e-9 * std::max(1.0, std::abs(S[j]))) {
      throw SamplerError("invariant: cluster statistics are stale");
    }
  }
}

ChainState initial_state(const SamplerData& data, const PriorConfig& prior, Rng rng) {
  ChainState s;
  s.rng = std::move(rng);
  const double mean = data.sum / static_cast<double>(data.x.size());
  s.push_stick(s.rng.beta(1.0, prior.m), mean);
  s.alloc.assign(data.x.size(), 0);
  s.refresh_stats(data);
  s.slices.resize(data.x.size());
  update_slices(s);
  return s;
}

double Diagnostics::atom_acceptance() const {
  return atom_proposals == 0 ? 0.0 : static_cast<double>(atom_accepts) / static_cast<double>(atom_proposals);
}

double Diagnostics::z_acceptance() const {
  return z_proposals == 0 ? 0.0 : static_cast<double>(z_accepts) / static_cast<double>(z_proposals);
}

// ---------------------------------------------------------------- densities

namespace {

double log_joint_common(const ChainState& s, const SamplerData& data, const PriorConfig& prior) {
  double lj = z_prior_logpdf(s.z, prior.b, prior.c);
  const double log_m = std::log(prior.m);
  for (std::size_t j = 0; j < s.size(); ++j) {
    lj += log_m + (prior.m - 1.0) * std::log1p(-s.sticks[j]);
    lj += base_measure_logpdf(s.atoms[j], prior.a);
  }
  const double z = s.z;
  const double lgz = log_gamma(z);
  for (std::size_t i = 0; i < data.x.size(); ++i) {
    const double eps = s.atoms[s.alloc[i]];
    const double x = data.x[i];
    lj += (z - 1.0) * std::log(x) - z * x / eps + z * std::log(z / eps) - lgz;
  }
  return lj;
}

}  // namespace

double log_joint(const ChainState& s, const SamplerData& data, const PriorConfig& prior) {
  for (std::size_t i = 0; i < data.x.size(); ++i) {
    if (!(s.slices[i] > 0.0 && s.slices[i] < s.weights[s.alloc[i]])) return kNegInf;
  }
  return log_joint_common(s, data, prior);
}

double log_joint_sliceless(const ChainState& s, const SamplerData& data, const PriorConfig& prior) {
  double lj = log_joint_common(s, data, prior);
  for (std::size_t i = 0; i < data.x.size(); ++i) lj += std::log(s.weights[s.alloc[i]]);
  return lj;
}

double stick_conditional_logpdf(const ChainState& s, std::size_t j, double v, const PriorConfig& prior) {
  double tail = 0.0;
  for (std::size_t l = j + 1; l < s.size(); ++l) tail += static_cast<double>(s.counts[l]);
  const double alpha = static_cast<double>(s.counts[j]) + 1.0;
  const double beta = tail + prior.m;
  return (alpha - 1.0) * std::log(v) + (beta - 1.0) * std::log1p(-v) - log_beta(alpha, beta);
}

double atom_target_logpdf(double eps, std::size_t n, double S, double z, double a) {
  const double nn = static_cast<double>(n);
  return base_measure_logpdf(eps, a) - z * S / eps - z * nn * std::log(eps);
}

double atom_proposal_logpdf(double eps, std::size_t n, double S, double z, double a) {
  const double shape = a + z * static_cast<double>(n);
  const double scale = z * S;
  return shape * std::log(scale) - log_gamma(shape) - (shape + 1.0) * std::log(eps) - scale / eps;
}

double atom_log_acceptance(double eps_from, double eps_to, std::size_t n, double S, double z, double a) {
  return atom_target_logpdf(eps_to, n, S, z, a) - atom_target_logpdf(eps_from, n, S, z, a) +
         atom_proposal_logpdf(eps_from, n, S, z, a) - atom_proposal_logpdf(eps_to, n, S, z, a);
}

double z_target_logpdf(double z, const ChainState& s, const SamplerData& data, const PriorConfig& prior) {
  const double n = static_cast<double>(data.x.size());
  double lin = data.sum_log;
  for (std::size_t j = 0; j < s.size(); ++j) {
    if (s.counts[j] == 0) continue;
    lin -= s.sums[j] / s.atoms[j] + static_cast<double>(s.counts[j]) * std::log(s.atoms[j]);
  }
  return z_prior_logpdf(z, prior.b, prior.c) + n * z * std::log(z) - n * log_gamma(z) + z * lin;
}

ZProposal z_main_proposal(const ChainState& s, const SamplerData& data, const PriorConfig& prior) {
  const double n = static_cast<double>(data.x.size());
  double rate = -n - data.sum_log;
  for (std::size_t j = 0; j < s.size(); ++j) {
    if (s.counts[j] == 0) continue;
    rate += s.sums[j] / s.atoms[j] + static_cast<double>(s.counts[j]) * std::log(s.atoms[j]);
  }
  ZProposal p;
  p.shape = 0.5 * (prior.b + n);
  p.rate = rate;
  p.usable = rate > 0.0 && std::isfinite(rate);
  return p;
}

double z_proposal_logpdf(double z_to, double z_from, const ZProposal& main, const PriorConfig& prior) {
  const double rw = gamma_logpdf(z_to, z_from * prior.B_z, prior.B_z);
  if (!main.usable) return rw;
  const double lm = std::log1p(-prior.w_z) + gamma_logpdf(z_to, main.shape, main.rate);
  if (prior.w_z == 0.0) return lm;
  return log_add_exp(lm, std::log(prior.w_z) + rw);
}

double z_log_acceptance(double z_from, double z_to, const ChainState& s, const SamplerData& data,
                        const PriorConfig& prior) {
  const ZProposal main = z_main_proposal(s, data, prior);
  return z_target_logpdf(z_to, s, data, prior) - z_target_logpdf(z_from, s, data, prior) +
         z_proposal_logpdf(z_from, z_to, main, prior) - z_proposal_logpdf(z_to, z_from, main, prior);
}

std::vector<double> allocation_logprobs(const ChainState& s, const SamplerData& data, std::size_t i) {
  const double x = data.x[i];
  std::vector<double> lp(s.size(), kNegInf);
  for (std::size_t j = 0; j < s.size(); ++j) {
    if (s.weights[j] > s.slices[i]) lp[j] = gamma_kernel_logpdf(x, KernelParams(s.z, s.atoms[j]));
  }
  const double norm = log_sum_exp(lp);
  if (norm == kNegInf) throw SamplerError("allocation: empty candidate set for datum " + std::to_string(i));
  for (double& v : lp) v -= norm;
  return lp;
}

// ---------------------------------------------------------------- updates

void update_atoms(ChainState& s, const SamplerData&, const PriorConfig& prior, Diagnostics& diag) {
  for (std::size_t j = 0; j < s.size(); ++j) {
    if (s.counts[j] == 0) {
      s.atoms[j] = base_measure_sample(s.rng, prior.a);
      continue;
    }
    const std::size_t n = s.counts[j];
    const double S = s.sums[j];
    const double shape = prior.a + s.z * static_cast<double>(n);
    const double proposal = s.z * S / s.rng.gamma(shape);
    ++diag.atom_proposals;
    const double log_r = atom_log_acceptance(s.atoms[j], proposal, n, S, s.z, prior.a);
    const double log_u = std::log(s.rng.uniform());
    if (!std::isfinite(log_r) || !(proposal > 0.0) || !std::isfinite(proposal)) {
      if (!(log_r == kNegInf)) ++diag.nonfinite_rejections;
      continue;
    }
    if (log_u < log_r) {
      s.atoms[j] = proposal;
      ++diag.atom_accepts;
    }
  }
}

void update_sticks(ChainState& s, const PriorConfig& prior) {
  double tail = 0.0;
  std::vector<double> tails(s.size());
  for (std::size_t j = s.size(); j-- > 0;) {
    tails[j] = tail;
    tail += static_cast<double>(s.counts[j]);
  }
  for (std::size_t j = 0; j < s.size(); ++j) {
    s.sticks[j] = clamp_stick(s.rng.beta(static_cast<double>(s.counts[j]) + 1.0, tails[j] + prior.m));
  }
  s.refresh_weights();
}

void update_slices(ChainState& s) {
  for (std::size_t i = 0; i < s.alloc.size(); ++i) s.slices[i] = s.weights[s.alloc[i]] * s.rng.uniform();
}

void extend_sticks(ChainState& s, const PriorConfig& prior, std::size_t cap) {
  const double min_u = s.min_slice();
  while (!(s.remaining < min_u)) {
    if (s.size() >= cap) {
      throw SamplerError("extend_sticks: more than " + std::to_string(cap) +
                         " sticks needed to cover the smallest slice");
    }
    const double v = s.rng.beta(1.0, prior.m);
    s.push_stick(v, base_measure_sample(s.rng, prior.a));
  }
}

void update_allocations(ChainState& s, const SamplerData& data) {
  const std::size_t J = s.size();
  const double z = s.z;
  std::vector<double> offset(J);
  std::vector<double> rate(J);
  for (std::size_t j = 0; j < J; ++j) {
    rate[j] = z / s.atoms[j];
    offset[j] = z * std::log(rate[j]);
  }
  std::vector<double> w(J);
  for (std::size_t i = 0; i < data.x.size(); ++i) {
    const double x = data.x[i];
    const double u = s.slices[i];
    double mx = kNegInf;
    for (std::size_t j = 0; j < J; ++j) {
      w[j] = s.weights[j] > u ? offset[j] - rate[j] * x : kNegInf;
      mx = std::max(mx, w[j]);
    }
    if (mx == kNegInf) throw SamplerError("allocation: empty candidate set for datum " + std::to_string(i));
    double total = 0.0;
    for (std::size_t j = 0; j < J; ++j) {
      w[j] = w[j] == kNegInf ? 0.0 : std::exp(w[j] - mx);
      total += w[j];
    }
    s.alloc[i] = s.rng.categorical(w, total);
  }
  s.refresh_stats(data);
}

void update_z(ChainState& s, const SamplerData& data, const PriorConfig& prior, Diagnostics& diag) {
  const ZProposal main = z_main_proposal(s, data, prior);
  bool random_walk = true;
  if (!main.usable) {
    ++diag.z_rate_fallbacks;
  } else {
    random_walk = s.rng.uniform() < prior.w_z;
  }
  const double proposal =
      random_walk ? s.rng.gamma(s.z * prior.B_z, prior.B_z) : s.rng.gamma(main.shape, main.rate);
  ++diag.z_proposals;
  const double log_u = std::log(s.rng.uniform());
  if (!(proposal > 0.0) || !std::isfinite(proposal)) {
    ++diag.nonfinite_rejections;
    return;
  }
  const double log_r = z_target_logpdf(proposal, s, data, prior) - z_target_logpdf(s.z, s, data, prior) +
                       z_proposal_logpdf(s.z, proposal, main, prior) -
                       z_proposal_logpdf(proposal, s.z, main, prior);
  if (!std::isfinite(log_r)) {
    if (!(log_r == kNegInf)) ++diag.nonfinite_rejections;
    return;
  }
  if (log_u < log_r) {
    s.z = proposal;
    ++diag.z_accepts;
  }
}

void collect_garbage(ChainState& s) {
  const double min_u = s.min_slice();
  std::size_t keep = 1;
  for (std::size_t j = 0; j < s.size(); ++j) {
    if (s.counts[j] > 0 || s.weights[j] > min_u) keep = j + 1;
  }
  if (keep == s.size()) return;
  s.sticks.resize(keep);
  s.atoms.resize(keep);
  s.counts.resize(keep);
  s.sums.resize(keep);
  s.refresh_weights();
}

void gibbs_sweep(ChainState& s, const SamplerData& data, const PriorConfig& prior, Diagnostics& diag,
                 const SweepOptions& opts) {
  auto check = [&](bool slices_current) {
    if (opts.check_invariants) s.check_invariants(data, slices_current);
  };
  update_atoms(s, data, prior, diag);
  check(false);
  update_sticks(s, prior);
  check(false);
  update_slices(s);
  check(true);
  extend_sticks(s, prior, opts.stick_cap);
  check(true);
  diag.max_sticks = std::max(diag.max_sticks, s.size());
  update_allocations(s, data);
  check(true);
  update_z(s, data, prior, diag);
  check(true);
  collect_garbage(s);
  check(true);
}

// ---------------------------------------------------------------- chains

PosteriorDraw snapshot(const ChainState& s, const PriorConfig& prior, Rng& tail_rng, double tolerance) {
  PosteriorDraw d;
  d.z = s.z;
  d.model = prior.model;
  auto atom_out = [&](double eps) { return prior.model == KernelModel::kGamma ? eps : 1.0 / eps; };
  for (std::size_t j = 0; j < s.size(); ++j) {
    if (s.weights[j] > 0.0) d.components.emplace_back(s.weights[j], atom_out(s.atoms[j]));
  }
  double rest = s.remaining;
  for (std::size_t guard = 0; !(rest < tolerance) && guard < 1000000; ++guard) {
    const double v = clamp_stick(tail_rng.beta(1.0, prior.m));
    const double eps = base_measure_sample(tail_rng, prior.a);
    if (v * rest > 0.0) d.components.emplace_back(v * rest, atom_out(eps));
    rest *= 1.0 - v;
  }
  d.residual_weight = rest;
  return d;
}

void FitOptions::validate() const {
  if (iters == 0) throw std::invalid_argument("fit: iters must be positive");
  if (thin == 0) throw std::invalid_argument("fit: thin must be positive");
  if (!(burnin < iters)) throw std::invalid_argument("fit: burnin must be smaller than iters");
  if (init != "single-cluster") throw std::invalid_argument("fit: unknown init policy '" + init + "'");
}

ChainResult run_chain(std::span<const double> data, const PriorConfig& prior, const FitOptions& opts,
                      std::uint64_t chain_index) {
  prior.validate();
  opts.validate();
  const SamplerData sd = SamplerData::prepare(data, prior.model);
  Rng tail = Rng::stream(opts.seed, 2 * chain_index + 1);
  ChainState s = initial_state(sd, prior, Rng::stream(opts.seed, 2 * chain_index));
  ChainResult out;
  out.diagnostics.occupied_trace.reserve(opts.iters);
  out.diagnostics.z_trace.reserve(opts.iters);
  out.draws.reserve((opts.iters - opts.burnin) / opts.thin);
  for (std::size_t t = 1; t <= opts.iters; ++t) {
    gibbs_sweep(s, sd, prior, out.diagnostics, opts.sweep);
    out.diagnostics.occupied_trace.push_back(static_cast<int>(s.occupied()));
    out.diagnostics.z_trace.push_back(s.z);
    if (t > opts.burnin && (t - opts.burnin) % opts.thin == 0) out.draws.push_back(snapshot(s, prior, tail));
  }
  return out;
}

std::vector<ChainResult> run_chains(std::span<const double> data, const PriorConfig& prior,
                                    const FitOptions& opts, std::size_t n_chains, std::size_t max_threads) {
  std::vector<ChainResult> results(n_chains);
  std::vector<std::exception_ptr> errors(n_chains);
  std::size_t workers = max_threads == 0 ? std::max(1u, std::thread::hardware_concurrency()) : max_threads;
  workers = std::min(workers, n_chains);
  std::atomic<std::size_t> next{0};
  auto work = [&] {
    for (std::size_t k = next++; k < n_chains; k = next++) {
      try {
        results[k] = run_chain(data, prior, opts, k);
      } catch (...) {
        errors[k] = std::current_exception();
      }
    }
  };
  std::vector<std::thread> pool;
  for (std::size_t w = 1; w < workers; ++w) pool.emplace_back(work);
  work();
  for (auto& t : pool) t.join();
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  return results;
}

// ---------------------------------------------------------------- evaluation

double mixture_logpdf(const PosteriorDraw& draw, double x) {
  if (!(x > 0.0)) throw std::domain_error("mixture_logpdf: x must be positive");
  std::vector<double> terms;
  terms.reserve(draw.components.size());
  for (const auto& [w, atom] : draw.components) {
    if (!(w > 0.0)) continue;
    const double k = draw.model == KernelModel::kGamma ? gamma_kernel_logpdf(x, KernelParams(draw.z, atom))
                                                       : inv_gamma_kernel_logpdf(x, draw.z, atom);
    terms.push_back(std::log(w) + k);
  }
  return log_sum_exp(terms);
}

MixtureEvaluator::MixtureEvaluator(const PosteriorDraw& draw) : model_(draw.model), z_(draw.z) {
  const double lgz = log_gamma(z_);
  for (const auto& [w, atom] : draw.components) {
    if (!(w > 0.0)) continue;
    const double eps = model_ == KernelModel::kGamma ? atom : 1.0 / atom;
    const double rate = z_ / eps;
    log_coef_.push_back(std::log(w) + z_ * std::log(rate) - lgz);
    rate_.push_back(rate);
    atoms_.push_back(eps);
    log_weight_.push_back(std::log(w));
  }
}

double MixtureEvaluator::logpdf(double x) const {
  if (!(x > 0.0)) throw std::domain_error("MixtureEvaluator: x must be positive");
  const double y = model_ == KernelModel::kGamma ? x : 1.0 / x;
  double mx = kNegInf;
  for (std::size_t j = 0; j < rate_.size(); ++j) mx = std::max(mx, log_coef_[j] - rate_[j] * y);
  if (mx == kNegInf) return kNegInf;
  double s = 0.0;
  for (std::size_t j = 0; j < rate_.size(); ++j) s += std::exp(log_coef_[j] - rate_[j] * y - mx);
  const double base = (z_ - 1.0) * std::log(y) + mx + std::log(s);
  return model_ == KernelModel::kGamma ? base : base - 2.0 * std::log(x);
}

double MixtureEvaluator::pdf(double x) const { return std::exp(logpdf(x)); }

DensityView MixtureEvaluator::view() const {
  auto self = std::make_shared<MixtureEvaluator>(*this);
  DensityView v;
  v.pdf = [self](double x) { return x > 0.0 ? self->pdf(x) : 0.0; };
  v.logpdf = [self](double x) { return self->logpdf(x); };
  v.alpha = model_ == KernelModel::kGamma ? std::min(z_, 1.0) : 1.0;
  // Breakpoints from the heavier components only; adaptive refinement covers the rest.
  for (std::size_t j = 0; j < atoms_.size(); ++j) {
    if (log_weight_[j] < std::log(1e-4)) continue;
    for (double p : kernel_breakpoints(KernelParams(z_, atoms_[j]))) {
      if (p > 0.0) v.breakpoints.push_back(model_ == KernelModel::kGamma ? p : 1.0 / p);
    }
  }
  std::sort(v.breakpoints.begin(), v.breakpoints.end());
  v.breakpoints.erase(std::unique(v.breakpoints.begin(), v.breakpoints.end()), v.breakpoints.end());
  return v;
}

GridSummary density_grid(std::span<const PosteriorDraw> draws, std::span<const double> xs) {
  if (draws.empty()) throw std::invalid_argument("density_grid: no draws");
  GridSummary g;
  g.x.assign(xs.begin(), xs.end());
  const std::size_t D = draws.size();
  std::vector<std::vector<double>> values(xs.size(), std::vector<double>(D));
  for (std::size_t d = 0; d < D; ++d) {
    const MixtureEvaluator ev(draws[d]);
    for (std::size_t k = 0; k < xs.size(); ++k) values[k][d] = ev.pdf(xs[k]);
  }
  const double probs[] = {0.05, 0.5, 0.95};
  for (std::size_t k = 0; k < xs.size(); ++k) {
    double s = 0.0;
    for (double v : values[k]) s += v;
    g.mean.push_back(s / static_cast<double>(D));
    const auto q = weighted_quantiles(values[k], probs);
    g.q05.push_back(q[0]);
    g.q50.push_back(q[1]);
    g.q95.push_back(q[2]);
  }
  return g;
}

}  // namespace gammix
