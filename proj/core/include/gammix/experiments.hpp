#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "gammix/approx_lab.hpp"
#include "gammix/density_zoo.hpp"
#include "gammix/io.hpp"
#include "gammix/sampler.hpp"

namespace gammix {

inline constexpr const char* kToolVersion = "0.1.0";

struct OptionSpec {
  std::string key;       // flag name without dashes; also the config-file key
  std::string fallback;  // default value; empty with `required` means no default
  std::string help;
  bool required = false;
};

struct CommandSpec {
  std::string name;
  std::string help;
  std::vector<OptionSpec> options;
};

/// simulate, fit, l1-quantiles, approx-study.
const std::vector<CommandSpec>& command_specs();
const CommandSpec& command_spec(const std::string& name);

using ConfigMap = std::map<std::string, std::string>;

/// Defaults < config file < flags. Unknown keys and missing required keys are
/// UsageErrors. Path-valued keys are made absolute.
ConfigMap resolve_config(const std::string& command, const ConfigMap& file_values, const ConfigMap& flag_values);

struct CommandResult {
  std::filesystem::path manifest;
  std::vector<std::filesystem::path> outputs;
};

/// Runs a command on a resolved configuration, writes its outputs and a
/// RunManifest, and reports progress to `log`.
CommandResult run_command(const std::string& command, const ConfigMap& config, std::ostream& log);

struct RerunReport {
  std::vector<FileDigest> expected;
  std::vector<FileDigest> actual;
  bool identical = true;
};
/// Re-executes the manifest's command and compares output digests.
RerunReport rerun_manifest(const std::filesystem::path& manifest, std::ostream& log);

/// "MIN:MAX:N", linearly spaced, N >= 2.
std::vector<double> parse_grid(const std::string& spec);
/// 400 log-spaced points over [min(data)/10, 3 max(data)].
std::vector<double> default_grid(std::span<const double> data);

/// ||f_draw - f0||_1 for every draw.
std::vector<double> posterior_l1(std::span<const PosteriorDraw> draws, const SmoothDensity& truth);

struct L1Row {
  std::string density;
  KernelModel model = KernelModel::kGamma;
  double m = 1.0;
  std::size_t n = 0;
  std::uint64_t seed = 0;
  double q50 = 0.0;
  double q95 = 0.0;
};

/// Simulate n points with `seed`, fit with the same seed, summarize the
/// posterior L1 distance by its 50% and 95% quantiles.
L1Row l1_quantiles_for_seed(const SmoothDensity& truth, const std::string& density_spec, std::size_t n,
                            const PriorConfig& prior, FitOptions opts, std::uint64_t seed);
/// One row per seed, computed on up to `threads` threads; row order follows `seeds`.
std::vector<L1Row> l1_quantile_table(const std::string& density_spec, std::size_t n, const PriorConfig& prior,
                                     const FitOptions& opts, std::span<const std::uint64_t> seeds,
                                     std::size_t threads = 0);
double median(std::vector<double> v);

/// CSV with columns z, hellinger, l1 and a footer row "slope,<value>,".
void write_approx_csv(const std::filesystem::path& path, const ApproxReport& r);
ApproxReport read_approx_csv(const std::filesystem::path& path);

}  // namespace gammix
