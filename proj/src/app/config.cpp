#include "sqzcam/app/config.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>

#include "sqzcam/errors.hpp"

namespace sqzcam::app {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::string item;
  std::istringstream is(s);
  while (std::getline(is, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

double parse_double(const std::string& key, const std::string& raw) {
  const std::string v = trim(raw);
  if (v == "pi") return std::numbers::pi;
  if (v.rfind("pi/", 0) == 0) return std::numbers::pi / parse_double(key, v.substr(3));
  double x = 0.0;
  const auto* end = v.data() + v.size();
  const auto [ptr, ec] = std::from_chars(v.data(), end, x);
  if (ec != std::errc() || ptr != end) throw ConfigError(key + ": expected a number, got '" + v + "'");
  return x;
}

template <class Int>
Int parse_int(const std::string& key, const std::string& raw) {
  const std::string v = trim(raw);
  Int x = 0;
  const auto* end = v.data() + v.size();
  const auto [ptr, ec] = std::from_chars(v.data(), end, x);
  if (ec != std::errc() || ptr != end) {
    throw ConfigError(key + ": expected a non-negative integer, got '" + v + "'");
  }
  return x;
}

bool parse_bool(const std::string& key, const std::string& raw) {
  const std::string v = trim(raw);
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  throw ConfigError(key + ": expected true or false, got '" + v + "'");
}

std::string fmt_double(double x) {
  std::ostringstream os;
  os.precision(17);
  os << x;
  return os.str();
}

template <class T, class F>
std::string join(const std::vector<T>& xs, F&& f) {
  std::string out;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    if (i) out += ',';
    out += f(xs[i]);
  }
  return out;
}

}  // namespace

SensorGeometry RunConfig::geometry() const {
  if (weights == "uniform") return SensorGeometry::uniform(rows, cols);
  std::ifstream is(weights);
  if (!is) throw IoError("cannot open weight file " + weights);
  std::vector<double> w;
  double x = 0.0;
  while (is >> x) w.push_back(x);
  if (!is.eof()) throw ConfigError("weight file " + weights + " contains a non-numeric entry");
  try {
    return SensorGeometry(rows, cols, std::move(w));
  } catch (const DomainError& e) {
    throw ConfigError(std::string("weight file ") + weights + ": " + e.what());
  }
}

void RunConfig::validate() const {
  try {
    for (double phi : phases) state(phi).validate();
  } catch (const DomainError& e) {
    throw ConfigError(std::string("state parameters: ") + e.what() + " (check --n-alpha, --n-s, --phi)");
  }
  if (phases.empty()) throw ConfigError("at least one phase is required (--phi)");
  if (rows == 0 || cols == 0) throw ConfigError("--rows and --cols must be >= 1");
  if (frames == 0) throw ConfigError("--frames must be >= 1");
  if (sweep_points < 2) throw ConfigError("sweep-points must be >= 2");
  if (!(sweep_max > 0.0) || !std::isfinite(sweep_max)) throw ConfigError("sweep-max must be positive");
  if (run_counts.empty()) throw ConfigError("run-counts needs at least one entry");
  for (std::size_t r : run_counts) {
    if (r < 2) throw ConfigError("every run count must be >= 2");
  }
  if (frames_per_run < 2) throw ConfigError("frames-per-run must be >= 2");
  if (groups < 2) throw ConfigError("groups must be >= 2");
  if (!(tolerance > 0.0)) throw ConfigError("tolerance must be positive");
}

std::string RunConfig::to_text() const {
  std::ostringstream os;
  os << "n-alpha = " << fmt_double(n_alpha) << '\n'
     << "n-s = " << fmt_double(n_s) << '\n'
     << "phi = " << join(phases, fmt_double) << '\n'
     << "rows = " << rows << '\n'
     << "cols = " << cols << '\n'
     << "weights = " << weights << '\n'
     << "frames = " << frames << '\n'
     << "seed = " << seed << '\n'
     << "threads = " << threads << '\n'
     << "out-dir = " << out_dir.string() << '\n'
     << "sweep-points = " << sweep_points << '\n'
     << "sweep-max = " << fmt_double(sweep_max) << '\n'
     << "run-counts = " << join(run_counts, [](std::size_t r) { return std::to_string(r); }) << '\n'
     << "frames-per-run = " << frames_per_run << '\n'
     << "groups = " << groups << '\n'
     << "tolerance = " << fmt_double(tolerance) << '\n'
     << "jackknife-blocks = " << jackknife_blocks << '\n'
     << "inputs = " << join(inputs, [](const std::filesystem::path& p) { return p.string(); }) << '\n'
     << "export-csv = " << (export_csv ? "true" : "false") << '\n';
  return os.str();
}

void set_config_value(RunConfig& cfg, const std::string& key, const std::string& value) {
  if (key == "n-alpha") {
    cfg.n_alpha = parse_double(key, value);
  } else if (key == "n-s") {
    cfg.n_s = parse_double(key, value);
  } else if (key == "phi") {
    cfg.phases.clear();
    for (const auto& item : split_list(value)) cfg.phases.push_back(parse_double(key, item));
  } else if (key == "rows") {
    cfg.rows = parse_int<std::uint32_t>(key, value);
  } else if (key == "cols") {
    cfg.cols = parse_int<std::uint32_t>(key, value);
  } else if (key == "weights") {
    cfg.weights = trim(value);
  } else if (key == "frames") {
    cfg.frames = parse_int<std::size_t>(key, value);
  } else if (key == "seed") {
    cfg.seed = parse_int<std::uint64_t>(key, value);
  } else if (key == "threads") {
    cfg.threads = parse_int<unsigned>(key, value);
  } else if (key == "out-dir") {
    cfg.out_dir = trim(value);
  } else if (key == "sweep-points") {
    cfg.sweep_points = parse_int<std::size_t>(key, value);
  } else if (key == "sweep-max") {
    cfg.sweep_max = parse_double(key, value);
  } else if (key == "run-counts") {
    cfg.run_counts.clear();
    for (const auto& item : split_list(value)) cfg.run_counts.push_back(parse_int<std::size_t>(key, item));
  } else if (key == "frames-per-run") {
    cfg.frames_per_run = parse_int<std::size_t>(key, value);
  } else if (key == "groups") {
    cfg.groups = parse_int<std::size_t>(key, value);
  } else if (key == "tolerance") {
    cfg.tolerance = parse_double(key, value);
  } else if (key == "jackknife-blocks") {
    cfg.jackknife_blocks = parse_int<std::size_t>(key, value);
  } else if (key == "inputs") {
    cfg.inputs.clear();
    for (const auto& item : split_list(value)) cfg.inputs.emplace_back(item);
  } else if (key == "export-csv") {
    cfg.export_csv = parse_bool(key, value);
  } else {
    throw ConfigError("unknown configuration key '" + key + "'");
  }
}

RunConfig parse_config_text(const std::string& text, RunConfig base) {
  std::istringstream is(text);
  std::string line;
  int lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("config line " + std::to_string(lineno) + ": expected 'key = value'");
    }
    set_config_value(base, trim(line.substr(0, eq)), line.substr(eq + 1));
  }
  return base;
}

RunConfig load_config_file(const std::filesystem::path& path, RunConfig base) {
  std::ifstream is(path);
  if (!is) throw IoError("cannot open config file " + path.string());
  std::ostringstream ss;
  ss << is.rdbuf();
  return parse_config_text(ss.str(), std::move(base));
}

}  // namespace sqzcam::app
