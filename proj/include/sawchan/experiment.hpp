#pragma once

// Reproducible scenario runner. A run is a pure function of its config and
// seed list: rows are ordered by parameter tuple then seed, floats are
// printed with 12 significant digits, and timestamps only go to the JSON
// sidecar.

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "sawchan/channel.hpp"
#include "sawchan/memory.hpp"
#include "sawchan/stats.hpp"

namespace sawchan::expt {

inline constexpr std::string_view kVersion = "0.1.0";

enum class Scenario {
  EntropyScan,
  RateVsEta,
  ClassicalAutocorr,
  Forgetfulness,
  RegularGrowth,
  CapacityTransition,
};

/// CLI spelling, e.g. "entropy-scan".
std::string_view to_string(Scenario s);
Scenario parse_scenario(std::string_view text);

struct ExperimentConfig {
  Scenario scenario = Scenario::EntropyScan;

  // quantum channel
  std::vector<int> N;
  std::vector<double> K;
  std::vector<double> eta;
  std::vector<int> n0;
  std::vector<Coupling> coupling;
  int nq_min = 1;
  int nq_max = 10;
  double phi0 = kDefaultShift;
  double theta0 = kDefaultShift;

  // forgetfulness
  std::vector<int> L;
  std::vector<double> K_transmit;
  double K_idle = 0.0;
  std::vector<memory::InitialEnvironment> omega0;
  int starts = 200;
  int refinements = 8;

  // classical
  std::size_t particles = 1'000'000;
  int L_max = 50;
  double P0 = 0.0;
  int diffusion_steps = 100;
  std::size_t diffusion_particles = 100'000;

  std::vector<std::uint64_t> seeds;
  std::string output = "out";

  /// Throws ValidationError naming the offending field.
  void validate() const;
};

/// Default physical parameters for each scenario (seeds empty).
ExperimentConfig default_config(Scenario s);

/// key = value lines, '#' comments, comma-separated lists. Keys not used by
/// the scenario are rejected. A `scenario` key, if present, must agree.
ExperimentConfig parse_config(std::string_view text, Scenario s);
ExperimentConfig load_config(const std::filesystem::path& path, Scenario s);

/// Canonical key = value form; parse_config(to_text(c)) reproduces c.
std::string to_text(const ExperimentConfig& c);
nlohmann::json to_json(const ExperimentConfig& c);

std::vector<std::uint64_t> parse_seed_list(std::string_view text);

struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  std::string to_csv() const;
};

/// Computes the result table without touching the filesystem.
Table compute(const ExperimentConfig& config, int threads = 1);

struct RunResult {
  std::filesystem::path csv_path;
  std::filesystem::path json_path;
  std::size_t rows = 0;
  double wall_seconds = 0.0;
};

/// compute() then writes <output>/<scenario>.csv and <scenario>.json.
RunResult run(const ExperimentConfig& config, int threads = 1);

std::string format_number(double v);

// ---- summaries ------------------------------------------------------------

struct Moments {
  std::size_t n = 0;
  double mean = 0.0;
  double stderr_ = 0.0;
};

struct SummaryPoint {
  double x = 0.0;
  std::vector<std::pair<std::string, Moments>> values; // per measurement column
};

struct SummaryGroup {
  std::vector<std::pair<std::string, std::string>> params;
  std::string x_column; // empty when the table has no sweep column
  std::vector<SummaryPoint> points;
  bool has_fit = false;
  std::string fit_kind; // "linear" (chaotic S_e vs Nq) or "log2" (regular S_e vs log2 Nq)
  LinearFit fit;
};

struct Summary {
  std::vector<SummaryGroup> groups;

  nlohmann::json to_json() const;
};

Table read_csv(const std::filesystem::path& path);
Table parse_csv(std::string_view text);
Summary summarize(const Table& table);
Summary summarize(const std::filesystem::path& csv_path);

/// Chaotic sawtooth regime: K > 0 or K < -4.
constexpr bool is_chaotic(double K) { return K > 0.0 || K < -4.0; }

} // namespace sawchan::expt
