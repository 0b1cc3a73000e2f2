#pragma once

// Config-driven scenario runner. Parses a flat key-value scenario file (or
// one of the built-in figure presets), evolves the configured system with the
// chosen algorithm, pairs every sampled time with reference-solver columns
// whenever the register is small enough, and writes deterministic,
// seed-stamped CSV or JSON result files.

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "tcsim/obs.hpp"
#include "tcsim/tcmodel.hpp"
#include "tcsim/wml.hpp"

namespace tcsim::cli {

enum class AlgorithmKind { SplitJ, Wml, Hybrid, OracleOnly, Mcwf };
enum class RunKind { TimeSeries, G2 };
enum class SampleMode { Exact, Shot };
enum class OutputFormat { Csv, Json };

/// Which evolution produces the algorithm columns. `n` is the step count of
/// one evolution (every time point re-runs from t_start with this same n).
/// Hybrid is WML with the HybridJ fixed-interaction realization.
struct AlgorithmConfig {
  AlgorithmKind kind = AlgorithmKind::SplitJ;
  int n = 100;
  int trotter_order = 2;
  wml::FixedInteractionKind impl = wml::FixedInteractionKind::HybridJ;
  double mcwf_dt = 1e-4;
  int mcwf_trajectories = 100;
};

/// Either a population time series over [t_start, t_end] or a steady-state
/// g2(0) estimate from batched shots.
struct RunConfig {
  RunKind kind = RunKind::TimeSeries;
  double t_start = 0.0;
  double t_end = 0.0;
  int num_points = 1;
  SampleMode mode = SampleMode::Exact;
  int shots = 1000;
  double steady_time = 1.0;
  int batches = 20;
  int shots_per_batch = 1000;
};

/// Reference-solver settings. `pump_steps` is the minimum slice count for
/// driven generators; `trajectories` is the trajectory count used on
/// 10..12-qubit registers where only the stochastic solver fits.
struct OracleConfig {
  bool include = true;
  int pump_steps = 400;
  int trajectories = 200;
};

struct ScenarioConfig {
  std::string name = "scenario";
  tcmodel::TcSystem system;
  int initial_cavity_excitations = 0;
  std::vector<int> initial_excited_emitters;
  AlgorithmConfig algorithm;
  RunConfig run;
  OracleConfig oracle;
  std::uint64_t seed = 1;
  std::string output_path;

  /// Throws ConfigInvalid on any violated invariant (bad counts, shot-mode
  /// requirements, algorithm/run-kind mismatches, out-of-range initials).
  void validate() const;
};

bool operator==(const AlgorithmConfig& a, const AlgorithmConfig& b);
bool operator==(const RunConfig& a, const RunConfig& b);
bool operator==(const OracleConfig& a, const OracleConfig& b);
bool operator==(const ScenarioConfig& a, const ScenarioConfig& b);

/// Parses the key-value format documented in the README. `name_hint` names
/// the scenario when the text has no explicit `name =` entry. Throws
/// ConfigInvalid on grammar or value errors.
ScenarioConfig parse_config(std::istream& in, const std::string& name_hint);

/// Reads and parses a config file; throws IoError when unreadable.
ScenarioConfig parse_config_file(const std::string& path);

/// Canonical text form: every key in a fixed order, shortest round-trip
/// number formatting. parse_config(write_config(c)) == c.
std::string write_config(const ScenarioConfig& config);

/// 16 hex digits: FNV-1a (64-bit) over write_config(config).
std::string config_hash(const ScenarioConfig& config);

struct PresetInfo {
  std::string name;
  std::string summary;
};

/// The nine built-in scenarios, fig1..fig9.
std::vector<PresetInfo> preset_catalog();

/// Returns a built-in scenario by name; throws ConfigInvalid for unknown
/// names. The same text ships as presets/<name>.cfg in the repository.
ScenarioConfig preset(const std::string& name);

/// Raw canonical text of a built-in preset (what presets/<name>.cfg holds).
std::string preset_text(const std::string& name);

/// The sampled times of a time-series run: num_points equally spaced points
/// covering [t_start, t_end], collapsed to the single point t_start when the
/// interval has zero length.
std::vector<double> time_grid(const RunConfig& run);

/// One finished scenario: per-time population rows (algorithm columns plus
/// optional reference columns) or a g2 estimate, with provenance metadata.
struct ResultSeries {
  std::string scenario_name;
  std::string config_hash;
  std::uint64_t seed = 0;
  RunKind kind = RunKind::TimeSeries;
  int n_emitters = 0;
  bool has_oracle = false;
  std::vector<obs::PopulationSample> rows;
  std::vector<obs::PopulationSample> oracle_rows;
  obs::G2Estimate g2;
  bool has_oracle_g2 = false;
  double oracle_g2 = 0.0;
  std::string git_describe;
  double wall_seconds = 0.0;
};

bool operator==(const ResultSeries& a, const ResultSeries& b);

/// Validates, runs the configured evolution once per time point (or per
/// batch), attaches reference columns per the oracle ladder, and stamps the
/// series with the config hash and seed. Self-checks (trace drift,
/// population range) throw NumericalCheckFailed.
ResultSeries run_scenario(const ScenarioConfig& config);

/// Writes the series. CSV holds pure data rows (byte-identical across
/// reruns); JSON adds a metadata block {seed, config hash, git describe,
/// timings}. All numbers use shortest round-trip formatting.
void emit(const ResultSeries& series, OutputFormat format, std::ostream& out);

/// emit() into a file; throws IoError when the file cannot be written.
void emit_file(const ResultSeries& series, OutputFormat format,
               const std::string& path);

/// Reads a series back. JSON recovers every field (parse(emit(x)) == x);
/// CSV recovers the data rows only.
ResultSeries parse_result_series(std::istream& in, OutputFormat format);

/// The command-line entry point: `run <config> | --preset <name>` with
/// --seed/--output/--format/--no-oracle overrides, and --list-presets.
/// Returns the process exit code: 0 success, 2 config errors, 3 numerical
/// self-check failures, 1 anything else.
int run_main(int argc, const char* const* argv);

}  // namespace tcsim::cli
