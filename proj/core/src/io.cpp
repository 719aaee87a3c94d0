#include "gammix/io.hpp"

#include <openssl/evp.h>

#include <array>
#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <ctime>
#include <fstream>
#include <sstream>

#include "json.hpp"

namespace gammix {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  for (char ch : line) {
    if (ch == ',') {
      out.push_back(trim(cell));
      cell.clear();
    } else {
      cell.push_back(ch);
    }
  }
  out.push_back(trim(cell));
  return out;
}

std::ifstream open_in(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path.string() + "' for reading");
  return in;
}

std::ofstream open_out(const fs::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
  return out;
}

void finish(std::ofstream& out, const fs::path& path) {
  out.flush();
  if (!out) throw IoError("write to '" + path.string() + "' failed");
}

}  // namespace

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  std::array<char, 64> buf{};
  const auto r = std::to_chars(buf.data(), buf.data() + buf.size(), v);
  return std::string(buf.data(), r.ptr);
}

double parse_double(const std::string& s, const std::string& what) {
  const std::string t = trim(s);
  if (t.empty()) throw UsageError(what + ": empty value");
  char* end = nullptr;
  const double v = std::strtod(t.c_str(), &end);
  if (end != t.c_str() + t.size()) throw UsageError(what + ": '" + t + "' is not a number");
  return v;
}

long long parse_int(const std::string& s, const std::string& what) {
  const std::string t = trim(s);
  long long v = 0;
  const auto r = std::from_chars(t.data(), t.data() + t.size(), v);
  if (t.empty() || r.ec != std::errc() || r.ptr != t.data() + t.size()) {
    throw UsageError(what + ": '" + t + "' is not an integer");
  }
  return v;
}

CsvTable read_csv(const fs::path& path) {
  auto in = open_in(path);
  CsvTable t;
  std::string line;
  bool first = true;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (first) {
      if (line.size() >= 3 && line.compare(0, 3, "\xEF\xBB\xBF") == 0) line.erase(0, 3);
      t.header = split_line(line);
      first = false;
      continue;
    }
    if (trim(line).empty()) continue;
    t.rows.push_back(split_line(line));
  }
  if (first) throw UsageError("'" + path.string() + "' is empty");
  return t;
}

void write_csv(const fs::path& path, const CsvTable& table) {
  auto out = open_out(path);
  auto emit = [&](const std::vector<std::string>& cells) {
    for (std::size_t k = 0; k < cells.size(); ++k) out << (k ? "," : "") << cells[k];
    out << '\n';
  };
  emit(table.header);
  for (const auto& r : table.rows) emit(r);
  finish(out, path);
}

std::vector<double> read_x_csv(const fs::path& path) {
  const CsvTable t = read_csv(path);
  std::size_t col = t.header.size();
  for (std::size_t k = 0; k < t.header.size(); ++k) {
    if (t.header[k] == "x") col = k;
  }
  if (col == t.header.size()) throw UsageError("'" + path.string() + "' has no column named x");
  std::vector<double> xs;
  xs.reserve(t.rows.size());
  for (std::size_t i = 0; i < t.rows.size(); ++i) {
    const std::string where = "row " + std::to_string(i + 1);
    if (col >= t.rows[i].size() || t.rows[i][col].empty()) throw UsageError(where + ": missing x value");
    const double v = parse_double(t.rows[i][col], where);
    if (!(v > 0.0) || !std::isfinite(v)) {
      throw UsageError(where + ": x must be a positive finite number, got '" + t.rows[i][col] + "'");
    }
    xs.push_back(v);
  }
  if (xs.empty()) throw UsageError("'" + path.string() + "' has no data rows");
  return xs;
}

void write_x_csv(const fs::path& path, std::span<const double> xs) {
  auto out = open_out(path);
  out << "x\n";
  for (double v : xs) out << format_double(v) << '\n';
  finish(out, path);
}

void write_draws_jsonl(const fs::path& path, std::span<const PosteriorDraw> draws) {
  auto out = open_out(path);
  for (const auto& d : draws) {
    json comps = json::array();
    for (const auto& [w, atom] : d.components) comps.push_back({w, atom});
    json obj = {{"z", d.z}, {"components", std::move(comps)}, {"residual_weight", d.residual_weight}};
    out << obj.dump() << '\n';
  }
  finish(out, path);
}

std::vector<PosteriorDraw> read_draws_jsonl(const fs::path& path, KernelModel model) {
  auto in = open_in(path);
  std::vector<PosteriorDraw> draws;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (trim(line).empty()) continue;
    try {
      const json obj = json::parse(line);
      PosteriorDraw d;
      d.model = model;
      d.z = obj.at("z").get<double>();
      d.residual_weight = obj.at("residual_weight").get<double>();
      for (const auto& c : obj.at("components")) d.components.emplace_back(c.at(0).get<double>(), c.at(1).get<double>());
      draws.push_back(std::move(d));
    } catch (const json::exception& e) {
      throw UsageError(path.string() + ":" + std::to_string(lineno) + ": malformed draw: " + e.what());
    }
  }
  return draws;
}

void write_grid_csv(const fs::path& path, const GridSummary& g) {
  auto out = open_out(path);
  out << "x,mean,q05,q50,q95\n";
  for (std::size_t k = 0; k < g.x.size(); ++k) {
    out << format_double(g.x[k]) << ',' << format_double(g.mean[k]) << ',' << format_double(g.q05[k]) << ','
        << format_double(g.q50[k]) << ',' << format_double(g.q95[k]) << '\n';
  }
  finish(out, path);
}

GridSummary read_grid_csv(const fs::path& path) {
  const CsvTable t = read_csv(path);
  const std::vector<std::string> expected{"x", "mean", "q05", "q50", "q95"};
  if (t.header != expected) throw UsageError("'" + path.string() + "' is not a grid file");
  GridSummary g;
  for (std::size_t i = 0; i < t.rows.size(); ++i) {
    const auto& r = t.rows[i];
    if (r.size() != 5) throw UsageError("grid row " + std::to_string(i + 1) + ": expected 5 columns");
    const std::string where = "grid row " + std::to_string(i + 1);
    g.x.push_back(parse_double(r[0], where));
    g.mean.push_back(parse_double(r[1], where));
    g.q05.push_back(parse_double(r[2], where));
    g.q50.push_back(parse_double(r[3], where));
    g.q95.push_back(parse_double(r[4], where));
  }
  return g;
}

std::string sha256_hex(const std::string& bytes) {
  std::array<unsigned char, EVP_MAX_MD_SIZE> md{};
  unsigned int len = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), md.data(), &len, EVP_sha256(), nullptr) != 1) {
    throw std::runtime_error("sha256: digest failed");
  }
  static const char* hex = "0123456789abcdef";
  std::string out;
  for (unsigned int i = 0; i < len; ++i) {
    out.push_back(hex[md[i] >> 4]);
    out.push_back(hex[md[i] & 0xF]);
  }
  return out;
}

std::string sha256_file(const fs::path& path) { return sha256_hex(read_text_file(path)); }

namespace {

json digests_to_json(const std::vector<FileDigest>& v) {
  json a = json::array();
  for (const auto& d : v) a.push_back({{"path", d.path}, {"sha256", d.sha256}});
  return a;
}

std::vector<FileDigest> digests_from_json(const json& a) {
  std::vector<FileDigest> v;
  for (const auto& d : a) v.push_back({d.at("path").get<std::string>(), d.at("sha256").get<std::string>()});
  return v;
}

}  // namespace

void RunManifest::write(const fs::path& path) const {
  json j = {{"command", command},
            {"config", config},
            {"seed", seed},
            {"started_at", started_at},
            {"finished_at", finished_at},
            {"runtime_seconds", runtime_seconds},
            {"inputs", digests_to_json(inputs)},
            {"outputs", digests_to_json(outputs)},
            {"tool_version", tool_version}};
  write_text_file(path, j.dump(2) + "\n");
}

RunManifest RunManifest::read(const fs::path& path) {
  try {
    const json j = json::parse(read_text_file(path));
    RunManifest m;
    m.command = j.at("command").get<std::string>();
    m.config = j.at("config").get<std::map<std::string, std::string>>();
    m.seed = j.value("seed", "");
    m.started_at = j.value("started_at", "");
    m.finished_at = j.value("finished_at", "");
    m.runtime_seconds = j.value("runtime_seconds", 0.0);
    m.inputs = digests_from_json(j.value("inputs", json::array()));
    m.outputs = digests_from_json(j.value("outputs", json::array()));
    m.tool_version = j.value("tool_version", "");
    return m;
  } catch (const json::exception& e) {
    throw UsageError("'" + path.string() + "' is not a valid manifest: " + e.what());
  }
}

std::map<std::string, std::string> read_config_file(const fs::path& path) {
  auto in = open_in(path);
  std::map<std::string, std::string> cfg;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw UsageError(path.string() + ":" + std::to_string(lineno) + ": expected key=value");
    }
    const std::string key = trim(line.substr(0, eq));
    if (key.empty()) throw UsageError(path.string() + ":" + std::to_string(lineno) + ": empty key");
    cfg[key] = trim(line.substr(eq + 1));
  }
  return cfg;
}

fs::path default_output_dir() {
  const char* env = std::getenv("GAMMIX_OUTDIR");
  if (env != nullptr && *env != '\0') return fs::path(env);
  return fs::path(".");
}

void ensure_directory(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir)) {
    throw IoError("cannot create output directory '" + dir.string() + "'" + (ec ? ": " + ec.message() : ""));
  }
}

void write_text_file(const fs::path& path, const std::string& text) {
  auto out = open_out(path);
  out << text;
  finish(out, path);
}

std::string read_text_file(const fs::path& path) {
  auto in = open_in(path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string utc_timestamp() {
  const std::time_t t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

}  // namespace gammix
