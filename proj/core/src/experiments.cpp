#include "gammix/experiments.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <exception>
#include <sstream>
#include <thread>

#include "gammix/metrics.hpp"
#include "json.hpp"

namespace gammix {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

const std::vector<OptionSpec>& prior_options() {
  static const std::vector<OptionSpec> v{
      {"model", "gamma", "kernel model: gamma | invgamma"},
      {"mass", "1", "Dirichlet-process mass m"},
      {"base-a", "2", "base-measure exponent a (> 1)"},
      {"zb", "1", "shape b of the Gamma prior on sqrt(z)"},
      {"zc", "1", "rate c of the Gamma prior on sqrt(z)"},
      {"wz", "0.01", "weight of the random-walk z proposal"},
      {"bz", "10", "concentration of the random-walk z proposal"},
      {"iters", "20000", "total sweeps"},
      {"burnin", "10000", "discarded initial sweeps"},
      {"thin", "10", "keep every thin-th sweep after burn-in"},
  };
  return v;
}

std::vector<CommandSpec> build_specs() {
  std::vector<CommandSpec> specs;
  specs.push_back({"simulate",
                   "draw an i.i.d. sample from a reference density",
                   {{"density", "", "density spec, e.g. exp or gamma:0.4:1", true},
                    {"n", "1000", "sample size"},
                    {"seed", "1", "random seed"},
                    {"out", "", "output CSV (default: <outdir>/simulate.csv)"}}});
  CommandSpec fit{"fit",
                  "fit the Dirichlet-process Gamma mixture and export posterior draws",
                  {{"input", "", "CSV with a column named x", true}}};
  for (const auto& o : prior_options()) fit.options.push_back(o);
  fit.options.push_back({"seed", "1", "random seed"});
  fit.options.push_back({"grid", "", "density grid MIN:MAX:N (default: 400 log-spaced points)"});
  fit.options.push_back({"outdir", "", "output directory (default: $GAMMIX_OUTDIR or .)"});
  specs.push_back(std::move(fit));
  CommandSpec l1{"l1-quantiles",
                 "posterior L1 error quantiles over repeated simulate-and-fit runs",
                 {{"density", "", "true density spec", true}, {"n", "1000", "sample size"}}};
  for (const auto& o : prior_options()) l1.options.push_back(o);
  l1.options.push_back({"seeds", "1,2,3,4,5", "comma-separated seeds"});
  l1.options.push_back({"threads", "0", "worker threads (0: hardware concurrency)"});
  l1.options.push_back({"out", "", "output CSV (default: <outdir>/l1_quantiles.csv)"});
  specs.push_back(std::move(l1));
  specs.push_back({"approx-study",
                   "Hellinger and L1 error of the smoothed corrected density over a z ladder",
                   {{"density", "", "density spec", true},
                    {"beta", "2", "smoothness level (0, 4]"},
                    {"z-list", "50,100,200,400,800", "comma-separated increasing z values"},
                    {"out", "", "output CSV (default: <outdir>/approx_study.csv)"}}});
  return specs;
}

std::vector<std::string> split_commas(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(item);
  return out;
}

double get_double(const ConfigMap& c, const std::string& key) { return parse_double(c.at(key), "--" + key); }

std::size_t get_count(const ConfigMap& c, const std::string& key, long long min_value) {
  const long long v = parse_int(c.at(key), "--" + key);
  if (v < min_value) throw UsageError("--" + key + " must be at least " + std::to_string(min_value));
  return static_cast<std::size_t>(v);
}

std::uint64_t get_seed(const std::string& s, const std::string& what) {
  const long long v = parse_int(s, what);
  if (v < 0) throw UsageError(what + " must be nonnegative");
  return static_cast<std::uint64_t>(v);
}

PriorConfig prior_from(const ConfigMap& c) {
  PriorConfig p;
  try {
    p.model = parse_model(c.at("model"));
  } catch (const std::invalid_argument& e) {
    throw UsageError(std::string("--model: ") + e.what());
  }
  p.m = get_double(c, "mass");
  p.a = get_double(c, "base-a");
  p.b = get_double(c, "zb");
  p.c = get_double(c, "zc");
  p.w_z = get_double(c, "wz");
  p.B_z = get_double(c, "bz");
  try {
    p.validate();
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }
  return p;
}

FitOptions fit_options_from(const ConfigMap& c) {
  FitOptions o;
  o.iters = get_count(c, "iters", 1);
  o.burnin = get_count(c, "burnin", 0);
  o.thin = get_count(c, "thin", 1);
  if (c.count("seed")) o.seed = get_seed(c.at("seed"), "--seed");
  try {
    o.validate();
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }
  return o;
}

SmoothDensity density_from(const std::string& spec) {
  try {
    return make_density(spec);
  } catch (const std::invalid_argument& e) {
    throw UsageError(std::string("--density: ") + e.what());
  }
}

/// Digest of everything that determines the outputs, excluding where they are written.
std::string config_digest(const ConfigMap& c, const std::vector<FileDigest>& inputs) {
  std::string canon;
  for (const auto& [k, v] : c) {
    if (k == "out" || k == "outdir" || k == "threads" || k == "input") continue;
    canon += k + "=" + v + "\n";
  }
  for (const auto& d : inputs) canon += "input_sha256=" + d.sha256 + "\n";
  return sha256_hex(canon);
}

std::vector<FileDigest> digest_all(const std::vector<fs::path>& paths) {
  std::vector<FileDigest> v;
  for (const auto& p : paths) v.push_back({p.string(), sha256_file(p)});
  return v;
}

struct Outcome {
  std::vector<fs::path> inputs;
  std::vector<fs::path> outputs;
  fs::path manifest;
};

Outcome do_simulate(const ConfigMap& c, std::ostream& log) {
  const SmoothDensity f = density_from(c.at("density"));
  const std::size_t n = get_count(c, "n", 1);
  const std::uint64_t seed = get_seed(c.at("seed"), "--seed");
  const fs::path out = c.at("out");
  ensure_directory(out.parent_path());
  const auto xs = sample_dataset(f, n, seed);
  write_x_csv(out, xs);
  log << "simulate: " << n << " draws from " << f.name() << " -> " << out.string() << "\n";
  return {{}, {out}, fs::path(out.string() + ".manifest.json")};
}

Outcome do_fit(const ConfigMap& c, std::ostream& log) {
  const fs::path input = c.at("input");
  const fs::path outdir = c.at("outdir");
  const std::vector<double> data = read_x_csv(input);
  const PriorConfig prior = prior_from(c);
  const FitOptions opts = fit_options_from(c);
  const std::vector<double> grid = c.at("grid").empty() ? default_grid(data) : parse_grid(c.at("grid"));
  ensure_directory(outdir);

  log << "fit: n=" << data.size() << " model=" << model_name(prior.model) << " iters=" << opts.iters
      << " burnin=" << opts.burnin << " thin=" << opts.thin << "\n";
  ChainResult chain;
  try {
    chain = run_chain(data, prior, opts);
  } catch (const DataError& e) {
    throw UsageError(std::string("--input: ") + e.what());
  }
  if (chain.draws.empty()) throw UsageError("no draws retained: increase --iters or lower --burnin/--thin");
  const GridSummary g = density_grid(chain.draws, grid);

  const fs::path draws_path = outdir / "draws.jsonl";
  const fs::path grid_path = outdir / "grid.csv";
  const fs::path summary_path = outdir / "summary.json";
  write_draws_jsonl(draws_path, chain.draws);
  write_grid_csv(grid_path, g);

  const auto& d = chain.diagnostics;
  std::map<std::string, std::size_t> hist;
  for (std::size_t t = opts.burnin; t < d.occupied_trace.size(); ++t) ++hist[std::to_string(d.occupied_trace[t])];
  double z_mean = 0.0;
  for (const auto& dr : chain.draws) z_mean += dr.z;
  z_mean /= static_cast<double>(chain.draws.size());
  json summary = {{"model", model_name(prior.model)},
                  {"n_observations", data.size()},
                  {"retained_draws", chain.draws.size()},
                  {"atom_acceptance", d.atom_acceptance()},
                  {"z_acceptance", d.z_acceptance()},
                  {"z_rate_fallbacks", d.z_rate_fallbacks},
                  {"nonfinite_rejections", d.nonfinite_rejections},
                  {"max_sticks", d.max_sticks},
                  {"occupied_clusters_histogram", hist},
                  {"z_posterior_mean", z_mean},
                  {"config_digest", config_digest(c, digest_all({input}))}};
  write_text_file(summary_path, summary.dump(2) + "\n");
  log << "fit: " << chain.draws.size() << " draws; acceptance atoms=" << d.atom_acceptance()
      << " z=" << d.z_acceptance() << "; posterior mean z=" << z_mean << "\n";
  return {{input}, {draws_path, grid_path, summary_path}, outdir / "manifest.json"};
}

Outcome do_l1_quantiles(const ConfigMap& c, std::ostream& log) {
  const std::string spec = c.at("density");
  (void)density_from(spec);
  const std::size_t n = get_count(c, "n", 1);
  const PriorConfig prior = prior_from(c);
  const FitOptions opts = fit_options_from(c);
  std::vector<std::uint64_t> seeds;
  for (const auto& s : split_commas(c.at("seeds"))) seeds.push_back(get_seed(s, "--seeds"));
  if (seeds.empty()) throw UsageError("--seeds: at least one seed is required");
  const std::size_t threads = get_count(c, "threads", 0);
  const fs::path out = c.at("out");
  ensure_directory(out.parent_path());

  const auto rows = l1_quantile_table(spec, n, prior, opts, seeds, threads);
  CsvTable t{{"density", "model", "m", "n", "seed", "q50", "q95"}, {}};
  std::vector<double> q50s;
  std::vector<double> q95s;
  log << "density model m n seed q50 q95\n";
  for (const auto& r : rows) {
    t.rows.push_back({r.density, model_name(r.model), format_double(r.m), std::to_string(r.n),
                      std::to_string(r.seed), format_double(r.q50), format_double(r.q95)});
    log << r.density << ' ' << model_name(r.model) << ' ' << r.m << ' ' << r.n << ' ' << r.seed << ' ' << r.q50
        << ' ' << r.q95 << "\n";
    q50s.push_back(r.q50);
    q95s.push_back(r.q95);
  }
  write_csv(out, t);
  log << "median over seeds: q50=" << median(q50s) << " q95=" << median(q95s) << "\n";
  return {{}, {out}, fs::path(out.string() + ".manifest.json")};
}

Outcome do_approx_study(const ConfigMap& c, std::ostream& log) {
  const SmoothDensity f = density_from(c.at("density"));
  const double beta = get_double(c, "beta");
  std::vector<double> zs;
  for (const auto& s : split_commas(c.at("z-list"))) zs.push_back(parse_double(s, "--z-list"));
  const fs::path out = c.at("out");
  ApproxReport r;
  try {
    r = rate_study(f, beta, zs);
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  } catch (const std::domain_error& e) {
    throw UsageError(e.what());
  }
  ensure_directory(out.parent_path());
  write_approx_csv(out, r);
  for (std::size_t k = 0; k < r.z_values.size(); ++k) {
    log << "z=" << r.z_values[k] << " hellinger=" << r.hellinger_errors[k] << " l1=" << r.l1_errors[k] << "\n";
  }
  log << "fitted slope of log D_H on log z: " << r.fitted_slope << "\n";
  return {{}, {out}, fs::path(out.string() + ".manifest.json")};
}

}  // namespace

const std::vector<CommandSpec>& command_specs() {
  static const std::vector<CommandSpec> specs = build_specs();
  return specs;
}

const CommandSpec& command_spec(const std::string& name) {
  for (const auto& s : command_specs()) {
    if (s.name == name) return s;
  }
  throw UsageError("unknown command '" + name + "'");
}

ConfigMap resolve_config(const std::string& command, const ConfigMap& file_values, const ConfigMap& flag_values) {
  const CommandSpec& spec = command_spec(command);
  ConfigMap c;
  for (const auto& o : spec.options) c[o.key] = o.fallback;
  for (const auto* layer : {&file_values, &flag_values}) {
    for (const auto& [k, v] : *layer) {
      if (!c.count(k)) throw UsageError("unknown option '" + k + "' for " + command);
      c[k] = v;
    }
  }
  for (const auto& o : spec.options) {
    if (o.required && c[o.key].empty()) throw UsageError("--" + o.key + " is required");
  }
  const fs::path base = default_output_dir();
  static const std::map<std::string, std::string> default_names{
      {"simulate", "simulate.csv"}, {"l1-quantiles", "l1_quantiles.csv"}, {"approx-study", "approx_study.csv"}};
  if (c.count("out") && c["out"].empty()) c["out"] = (base / default_names.at(command)).string();
  if (c.count("outdir") && c["outdir"].empty()) c["outdir"] = base.string();
  for (const char* key : {"input", "out", "outdir"}) {
    if (c.count(key)) c[key] = fs::absolute(fs::path(c[key])).lexically_normal().string();
  }
  return c;
}

CommandResult run_command(const std::string& command, const ConfigMap& config, std::ostream& log) {
  const auto t0 = std::chrono::steady_clock::now();
  RunManifest m;
  m.command = command;
  m.config = config;
  m.started_at = utc_timestamp();
  m.tool_version = kToolVersion;
  m.seed = config.count("seed") ? config.at("seed") : config.count("seeds") ? config.at("seeds") : "";
  Outcome o;
  if (command == "simulate") {
    o = do_simulate(config, log);
  } else if (command == "fit") {
    o = do_fit(config, log);
  } else if (command == "l1-quantiles") {
    o = do_l1_quantiles(config, log);
  } else if (command == "approx-study") {
    o = do_approx_study(config, log);
  } else {
    throw UsageError("unknown command '" + command + "'");
  }
  m.finished_at = utc_timestamp();
  m.runtime_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  m.inputs = digest_all(o.inputs);
  m.outputs = digest_all(o.outputs);
  m.write(o.manifest);
  log << "manifest: " << o.manifest.string() << "\n";
  return {o.manifest, o.outputs};
}

RerunReport rerun_manifest(const fs::path& manifest, std::ostream& log) {
  const RunManifest m = RunManifest::read(manifest);
  for (const auto& in : m.inputs) {
    if (sha256_file(in.path) != in.sha256) {
      throw UsageError("input '" + in.path + "' changed since the manifest was written");
    }
  }
  (void)command_spec(m.command);
  const CommandResult r = run_command(m.command, m.config, log);
  RerunReport rep;
  rep.expected = m.outputs;
  rep.actual = digest_all(r.outputs);
  rep.identical = rep.expected.size() == rep.actual.size();
  for (std::size_t k = 0; rep.identical && k < rep.actual.size(); ++k) {
    rep.identical = rep.expected[k].path == rep.actual[k].path && rep.expected[k].sha256 == rep.actual[k].sha256;
  }
  for (const auto& a : rep.actual) {
    const auto it = std::find_if(rep.expected.begin(), rep.expected.end(),
                                 [&](const FileDigest& e) { return e.path == a.path; });
    const bool same = it != rep.expected.end() && it->sha256 == a.sha256;
    log << (same ? "identical  " : "DIFFERENT  ") << a.path << "\n";
  }
  return rep;
}

std::vector<double> parse_grid(const std::string& spec) {
  std::vector<std::string> parts;
  std::stringstream ss(spec);
  std::string item;
  while (std::getline(ss, item, ':')) parts.push_back(item);
  if (parts.size() != 3) throw UsageError("--grid: expected MIN:MAX:N, got '" + spec + "'");
  const double lo = parse_double(parts[0], "--grid MIN");
  const double hi = parse_double(parts[1], "--grid MAX");
  const long long n = parse_int(parts[2], "--grid N");
  if (!(lo > 0.0) || !(hi > lo) || !std::isfinite(hi)) throw UsageError("--grid: need 0 < MIN < MAX");
  if (n < 2) throw UsageError("--grid: N must be at least 2");
  std::vector<double> xs(static_cast<std::size_t>(n));
  for (long long k = 0; k < n; ++k) xs[static_cast<std::size_t>(k)] = lo + (hi - lo) * static_cast<double>(k) / static_cast<double>(n - 1);
  xs.back() = hi;
  return xs;
}

std::vector<double> default_grid(std::span<const double> data) {
  if (data.empty()) throw UsageError("default grid: no data");
  const auto [mn, mx] = std::minmax_element(data.begin(), data.end());
  const double lo = std::log(*mn / 10.0);
  const double hi = std::log(*mx * 3.0);
  std::vector<double> xs(400);
  for (std::size_t k = 0; k < xs.size(); ++k) xs[k] = std::exp(lo + (hi - lo) * static_cast<double>(k) / 399.0);
  return xs;
}

std::vector<double> posterior_l1(std::span<const PosteriorDraw> draws, const SmoothDensity& truth) {
  const DensityView tv = truth.view();
  DistanceOptions o;
  o.abs_tol = 1e-6;
  std::vector<double> out;
  out.reserve(draws.size());
  for (const auto& d : draws) out.push_back(l1_distance(MixtureEvaluator(d).view(), tv, o).value);
  return out;
}

L1Row l1_quantiles_for_seed(const SmoothDensity& truth, const std::string& density_spec, std::size_t n,
                            const PriorConfig& prior, FitOptions opts, std::uint64_t seed) {
  const auto data = sample_dataset(truth, n, seed);
  opts.seed = seed;
  const ChainResult r = run_chain(data, prior, opts);
  const auto l1 = posterior_l1(r.draws, truth);
  const double probs[] = {0.5, 0.95};
  const auto q = weighted_quantiles(l1, probs);
  return {density_spec, prior.model, prior.m, n, seed, q[0], q[1]};
}

std::vector<L1Row> l1_quantile_table(const std::string& density_spec, std::size_t n, const PriorConfig& prior,
                                     const FitOptions& opts, std::span<const std::uint64_t> seeds,
                                     std::size_t threads) {
  const SmoothDensity truth = make_density(density_spec);
  std::vector<L1Row> rows(seeds.size());
  std::vector<std::exception_ptr> errors(seeds.size());
  std::size_t workers = threads == 0 ? std::max(1u, std::thread::hardware_concurrency()) : threads;
  workers = std::min(workers, seeds.size());
  std::atomic<std::size_t> next{0};
  auto work = [&] {
    for (std::size_t k = next++; k < seeds.size(); k = next++) {
      try {
        rows[k] = l1_quantiles_for_seed(truth, density_spec, n, prior, opts, seeds[k]);
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
  return rows;
}

double median(std::vector<double> v) {
  const double p[] = {0.5};
  return weighted_quantiles(v, p)[0];
}

void write_approx_csv(const fs::path& path, const ApproxReport& r) {
  CsvTable t{{"z", "hellinger", "l1"}, {}};
  for (std::size_t k = 0; k < r.z_values.size(); ++k) {
    t.rows.push_back({format_double(r.z_values[k]), format_double(r.hellinger_errors[k]), format_double(r.l1_errors[k])});
  }
  t.rows.push_back({"slope", format_double(r.fitted_slope), ""});
  write_csv(path, t);
}

ApproxReport read_approx_csv(const fs::path& path) {
  const CsvTable t = read_csv(path);
  if (t.header != std::vector<std::string>{"z", "hellinger", "l1"}) {
    throw UsageError("'" + path.string() + "' is not an approx-study file");
  }
  ApproxReport r;
  bool have_slope = false;
  for (std::size_t i = 0; i < t.rows.size(); ++i) {
    const auto& row = t.rows[i];
    const std::string where = "row " + std::to_string(i + 1);
    if (row.size() < 2) throw UsageError(where + ": too few columns");
    if (row[0] == "slope") {
      r.fitted_slope = parse_double(row[1], where);
      have_slope = true;
      continue;
    }
    if (row.size() != 3) throw UsageError(where + ": expected 3 columns");
    r.z_values.push_back(parse_double(row[0], where));
    r.hellinger_errors.push_back(parse_double(row[1], where));
    r.l1_errors.push_back(parse_double(row[2], where));
  }
  if (!have_slope) throw UsageError("'" + path.string() + "' has no slope footer");
  return r;
}

}  // namespace gammix
