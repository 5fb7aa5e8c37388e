#pragma once

// Run configuration (flat key=value files with flag overrides), CSV output
// and the JSON metadata sidecar written next to every CSV.

#include "ltm/torus.hpp"

#include <json.hpp>

#include <cstdint>
#include <fstream>
#include <map>
#include <string>
#include <vector>

namespace ltm {

struct RunConfig {
  LtmSpec<Rational> spec = LtmSpec<Rational>::canonical();
  Backend backend = Backend::Float;
  std::uint64_t seed = 1;
  std::uint64_t samples = 1'000'000;
  std::uint64_t ensemble = 1'000'000;
  std::int64_t n_max = 60;
  std::string output_dir = ".";
  int threads = 0;  // 0 = auto
  std::string profile = "desk";
};

/// Sets one key. Unknown keys and malformed values throw ConfigError.
void set_config_value(RunConfig& cfg, const std::string& key, const std::string& value);

/// Lines "key = value"; '#' starts a comment; blank lines ignored.
RunConfig parse_config_text(const std::string& text, RunConfig base = {});
RunConfig load_config_file(const std::string& path, RunConfig base = {});

nlohmann::json to_json(const RunConfig& cfg);

std::string csv_escape(const std::string& field);
std::string csv_number(double v);

class CsvWriter {
 public:
  CsvWriter(const std::string& path, const std::vector<std::string>& header);
  void row(const std::vector<std::string>& fields);
  const std::string& path() const { return path_; }

 private:
  std::string path_;
  std::ofstream out_;
  std::size_t width_;
};

/// Writes `<csv_path>.json` with the config, the experiment name and timing.
void write_sidecar(const std::string& csv_path, const RunConfig& cfg, const std::string& experiment,
                   double wall_seconds, const nlohmann::json& extra = nlohmann::json::object());

/// Joins dir and file name, creating dir if needed.
std::string output_path(const RunConfig& cfg, const std::string& file);

}  // namespace ltm
