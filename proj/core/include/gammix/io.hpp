#pragma once

#include <filesystem>
#include <map>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "gammix/sampler.hpp"

namespace gammix {

/// Bad input from the user: flags, config values, data files. Exit code 2.
class UsageError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// The environment refused an operation: unreadable or unwritable paths. Exit code 3.
class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Shortest decimal text that parses back to the same double.
std::string format_double(double v);
/// Strict parse of a full token; throws UsageError naming `what`.
double parse_double(const std::string& s, const std::string& what);
long long parse_int(const std::string& s, const std::string& what);

/// Reads column `x` of a CSV file. Rows must hold positive finite numbers;
/// errors name the 1-based data row.
std::vector<double> read_x_csv(const std::filesystem::path& path);
void write_x_csv(const std::filesystem::path& path, std::span<const double> xs);

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
};
CsvTable read_csv(const std::filesystem::path& path);
void write_csv(const std::filesystem::path& path, const CsvTable& table);

/// One JSON object per line: {"z", "components": [[weight, atom], ...], "residual_weight"}.
void write_draws_jsonl(const std::filesystem::path& path, std::span<const PosteriorDraw> draws);
std::vector<PosteriorDraw> read_draws_jsonl(const std::filesystem::path& path, KernelModel model);

/// Columns x, mean, q05, q50, q95.
void write_grid_csv(const std::filesystem::path& path, const GridSummary& grid);
GridSummary read_grid_csv(const std::filesystem::path& path);

std::string sha256_hex(const std::string& bytes);
std::string sha256_file(const std::filesystem::path& path);

struct FileDigest {
  std::string path;
  std::string sha256;
};

/// Everything needed to re-run a command: the command name and its fully
/// resolved configuration (every flag, defaults included, as text).
struct RunManifest {
  std::string command;
  std::map<std::string, std::string> config;
  std::string seed;
  std::string started_at;
  std::string finished_at;
  double runtime_seconds = 0.0;
  std::vector<FileDigest> inputs;
  std::vector<FileDigest> outputs;
  std::string tool_version;

  void write(const std::filesystem::path& path) const;
  static RunManifest read(const std::filesystem::path& path);
};

/// key=value lines; '#' starts a comment; surrounding whitespace trimmed.
std::map<std::string, std::string> read_config_file(const std::filesystem::path& path);

/// $GAMMIX_OUTDIR when set and nonempty, else the current directory.
std::filesystem::path default_output_dir();
/// Creates the directory (and parents); IoError when that fails.
void ensure_directory(const std::filesystem::path& dir);
/// Writes the whole file or throws IoError.
void write_text_file(const std::filesystem::path& path, const std::string& text);
std::string read_text_file(const std::filesystem::path& path);

/// UTC time as YYYY-MM-DDTHH:MM:SSZ.
std::string utc_timestamp();

}  // namespace gammix
