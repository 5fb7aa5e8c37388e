#include "ltm/io.hpp"

#include "ltm/errors.hpp"
#include "ltm/parallel.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <filesystem>
#include <sstream>

namespace ltm {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

template <class Int>
Int parse_int(const std::string& key, const std::string& value) {
  Int out{};
  const char* first = value.data();
  const char* last = first + value.size();
  // Allow 1e7-style counts.
  if (value.find_first_of("eE") != std::string::npos) {
    std::size_t used = 0;
    double d = 0;
    try {
      d = std::stod(value, &used);
    } catch (const std::exception&) {
      throw ConfigError("bad integer for " + key + ": " + value);
    }
    if (used != value.size() || d < 0 || d != std::floor(d) || d > 9.0e18) {
      throw ConfigError("bad integer for " + key + ": " + value);
    }
    return static_cast<Int>(d);
  }
  auto [ptr, ec] = std::from_chars(first, last, out);
  if (ec != std::errc{} || ptr != last) throw ConfigError("bad integer for " + key + ": " + value);
  return out;
}

}  // namespace

void set_config_value(RunConfig& cfg, const std::string& key, const std::string& value) {
  auto scalar = [&](Rational& dst) {
    try {
      dst = parse_scalar<Rational>(value);
    } catch (const std::exception&) {
      throw ConfigError("bad number for " + key + ": " + value);
    }
  };
  if (key == "p0") scalar(cfg.spec.p0);
  else if (key == "p1") scalar(cfg.spec.p1);
  else if (key == "q0") scalar(cfg.spec.q0);
  else if (key == "q1") scalar(cfg.spec.q1);
  else if (key == "wrap_f") cfg.spec.wrap_f = parse_int<int>(key, value);
  else if (key == "wrap_g") cfg.spec.wrap_g = parse_int<int>(key, value);
  else if (key == "backend") {
    if (value == "float") cfg.backend = Backend::Float;
    else if (value == "rational") cfg.backend = Backend::Rational;
    else throw ConfigError("backend must be float or rational");
  } else if (key == "seed") cfg.seed = parse_int<std::uint64_t>(key, value);
  else if (key == "samples") cfg.samples = parse_int<std::uint64_t>(key, value);
  else if (key == "ensemble") cfg.ensemble = parse_int<std::uint64_t>(key, value);
  else if (key == "n_max") cfg.n_max = parse_int<std::int64_t>(key, value);
  else if (key == "output_dir" || key == "out") cfg.output_dir = value;
  else if (key == "threads") cfg.threads = value == "auto" ? 0 : parse_int<int>(key, value);
  else if (key == "profile") {
    if (value != "smoke" && value != "desk" && value != "deep") throw ConfigError("profile must be smoke, desk or deep");
    cfg.profile = value;
  } else {
    throw ConfigError("unknown config key: " + key);
  }
}

RunConfig parse_config_text(const std::string& text, RunConfig base) {
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ConfigError("line " + std::to_string(lineno) + ": expected key = value");
    std::string key = trim(line.substr(0, eq));
    std::replace(key.begin(), key.end(), '-', '_');
    set_config_value(base, key, trim(line.substr(eq + 1)));
  }
  base.spec.validate();
  return base;
}

RunConfig load_config_file(const std::string& path, RunConfig base) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file: " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config_text(ss.str(), std::move(base));
}

nlohmann::json to_json(const RunConfig& cfg) {
  return {
      {"spec",
       {{"p0", to_string(cfg.spec.p0)},
        {"p1", to_string(cfg.spec.p1)},
        {"q0", to_string(cfg.spec.q0)},
        {"q1", to_string(cfg.spec.q1)},
        {"wrap_f", cfg.spec.wrap_f},
        {"wrap_g", cfg.spec.wrap_g}}},
      {"backend", std::string(backend_name(cfg.backend))},
      {"seed", cfg.seed},
      {"samples", cfg.samples},
      {"ensemble", cfg.ensemble},
      {"n_max", cfg.n_max},
      {"output_dir", cfg.output_dir},
      {"threads", cfg.threads == 0 ? nlohmann::json("auto") : nlohmann::json(cfg.threads)},
      {"profile", cfg.profile},
  };
}

std::string csv_escape(const std::string& field) {
  if (field.find_first_of(",\"\r\n") == std::string::npos) return field;
  std::string out = "\"";
  for (char c : field) {
    if (c == '"') out += "\"\"";
    else out += c;
  }
  out += '"';
  return out;
}

std::string csv_number(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  if (ec != std::errc{}) return "nan";
  return std::string(buf, ptr);
}

CsvWriter::CsvWriter(const std::string& path, const std::vector<std::string>& header)
    : path_(path), out_(path, std::ios::binary), width_(header.size()) {
  if (!out_) throw ConfigError("cannot write " + path);
  row(header);
}

void CsvWriter::row(const std::vector<std::string>& fields) {
  if (fields.size() != width_) throw std::invalid_argument("CsvWriter: row width mismatch");
  for (std::size_t i = 0; i < fields.size(); ++i) {
    if (i) out_ << ',';
    out_ << csv_escape(fields[i]);
  }
  out_ << "\r\n";
  out_.flush();
}

void write_sidecar(const std::string& csv_path, const RunConfig& cfg, const std::string& experiment,
                   double wall_seconds, const nlohmann::json& extra) {
  nlohmann::json meta = to_json(cfg);
  meta["experiment"] = experiment;
  meta["file"] = std::filesystem::path(csv_path).filename().string();
  meta["wall_seconds"] = wall_seconds;
  meta["threads_used"] = thread_count();
  meta["measure"] = "normalized Lebesgue, mu(R) = 1";
  for (auto it = extra.begin(); it != extra.end(); ++it) meta[it.key()] = it.value();
  std::ofstream out(csv_path + ".json");
  if (!out) throw ConfigError("cannot write " + csv_path + ".json");
  out << meta.dump(2) << '\n';
}

std::string output_path(const RunConfig& cfg, const std::string& file) {
  std::filesystem::create_directories(cfg.output_dir);
  return (std::filesystem::path(cfg.output_dir) / file).string();
}

}  // namespace ltm
