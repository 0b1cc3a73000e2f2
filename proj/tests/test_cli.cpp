#include "doctest.h"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "tcsim/cli.hpp"
#include "tcsim/errors.hpp"

using namespace tcsim;

namespace {

// A fast strongly-coupled single-emitter scenario: small register, short
// span, cheap everywhere a test needs a real evolution.
cli::ScenarioConfig tiny_scenario() {
  cli::ScenarioConfig config;
  config.name = "tiny";
  config.system.n_emitters = 1;
  config.system.omega_c = 245000.0;
  config.system.omega_e = {245000.0};
  config.system.g = {100.0};
  config.system.kappa = 24.5;
  config.system.gamma = 0.4;
  config.system.frame_shift = 245000.0;
  config.initial_cavity_excitations = 2;
  config.algorithm.kind = cli::AlgorithmKind::SplitJ;
  config.algorithm.n = 40;
  config.run.kind = cli::RunKind::TimeSeries;
  config.run.t_start = 0.0;
  config.run.t_end = 0.05;
  config.run.num_points = 5;
  config.run.mode = cli::SampleMode::Exact;
  config.seed = 7;
  return config;
}

cli::ScenarioConfig parse_text(const std::string& text,
                               const std::string& hint = "scenario") {
  std::istringstream in(text);
  return cli::parse_config(in, hint);
}

std::string emit_text(const cli::ResultSeries& series, cli::OutputFormat format) {
  std::ostringstream out;
  cli::emit(series, format, out);
  return out.str();
}

std::filesystem::path temp_file(const std::string& name) {
  return std::filesystem::temp_directory_path() / name;
}

int run_cli(const std::vector<std::string>& args) {
  std::vector<const char*> argv = {"tcsim"};
  for (const auto& a : args) argv.push_back(a.c_str());
  return cli::run_main(static_cast<int>(argv.size()), argv.data());
}

}  // namespace

TEST_SUITE("cli") {

TEST_CASE("a written config parses back to an equal config") {
  cli::ScenarioConfig config = tiny_scenario();
  config.system.n_emitters = 2;
  config.system.omega_e = {245000.0, 245123.5};
  config.system.g = {100.0, 80.25};
  config.system.pump_amp = 4.9;
  config.system.pump_freq = 244900.0;
  config.initial_excited_emitters = {1};
  config.algorithm.kind = cli::AlgorithmKind::Wml;
  config.algorithm.impl = wml::FixedInteractionKind::Protocol2;
  config.algorithm.mcwf_dt = 2.5e-4;
  config.run.mode = cli::SampleMode::Shot;
  config.run.shots = 123;
  config.seed = 987654321123456789ULL;
  config.output_path = "out/some.json";

  const cli::ScenarioConfig round = parse_text(cli::write_config(config));
  CHECK(round == config);
}

TEST_CASE("g2 configs survive the write/parse round trip") {
  cli::ScenarioConfig config = tiny_scenario();
  config.run.kind = cli::RunKind::G2;
  config.run.steady_time = 0.75;
  config.run.batches = 7;
  config.run.shots_per_batch = 250;
  config.oracle.include = false;
  config.oracle.trajectories = 31;
  CHECK(parse_text(cli::write_config(config)) == config);
}

TEST_CASE("a single omega_e or g entry broadcasts across all emitters") {
  const auto config = parse_text(
      "[system]\n"
      "n_emitters = 3\n"
      "omega_c = 5\n"
      "omega_e = 7\n"
      "g = 0.25\n");
  CHECK(config.system.omega_e == std::vector<double>{7.0, 7.0, 7.0});
  CHECK(config.system.g == std::vector<double>{0.25, 0.25, 0.25});
}

TEST_CASE("comments and blank lines are ignored, and the name hint fills in") {
  const auto config = parse_text(
      "# leading comment\n"
      "\n"
      "[system]\n"
      "n_emitters = 1  # trailing comment\n"
      "omega_e = 2\n"
      "g = 0.1\n",
      "from-filename");
  CHECK(config.name == "from-filename");
  CHECK(config.system.n_emitters == 1);
}

TEST_CASE("unknown keys, sections, duplicates, and bad values are rejected") {
  CHECK_THROWS_AS(parse_text("bogus = 1\n"), ConfigInvalid);
  CHECK_THROWS_AS(parse_text("[nonsense]\nx = 1\n"), ConfigInvalid);
  CHECK_THROWS_AS(parse_text("[system]\nkappa = 1\nkappa = 2\n"), ConfigInvalid);
  CHECK_THROWS_AS(parse_text("[algorithm]\nkind = warp\n"), ConfigInvalid);
  CHECK_THROWS_AS(parse_text("[run]\nmode = sometimes\n"), ConfigInvalid);
  CHECK_THROWS_AS(parse_text("[system]\nkappa = fast\n"), ConfigInvalid);
  CHECK_THROWS_AS(parse_text("[oracle]\ninclude = yes\n"), ConfigInvalid);
  CHECK_THROWS_AS(parse_text("just some words\n"), ConfigInvalid);
}

TEST_CASE("validate rejects inconsistent scenarios") {
  auto config = tiny_scenario();
  config.initial_cavity_excitations = 4;  // register holds at most 3
  CHECK_THROWS_AS(config.validate(), ConfigInvalid);

  config = tiny_scenario();
  config.initial_excited_emitters = {0, 0};
  CHECK_THROWS_AS(config.validate(), ConfigInvalid);

  config = tiny_scenario();
  config.initial_excited_emitters = {1};  // only emitter 0 exists
  CHECK_THROWS_AS(config.validate(), ConfigInvalid);

  config = tiny_scenario();
  config.run.t_end = -0.1;
  CHECK_THROWS_AS(config.validate(), ConfigInvalid);

  config = tiny_scenario();
  config.run.num_points = 0;
  CHECK_THROWS_AS(config.validate(), ConfigInvalid);

  config = tiny_scenario();
  config.run.mode = cli::SampleMode::Shot;
  config.run.shots = 0;
  CHECK_THROWS_AS(config.validate(), ConfigInvalid);

  config = tiny_scenario();
  config.algorithm.kind = cli::AlgorithmKind::Mcwf;
  config.run.mode = cli::SampleMode::Shot;
  CHECK_THROWS_AS(config.validate(), ConfigInvalid);

  config = tiny_scenario();
  config.algorithm.kind = cli::AlgorithmKind::Wml;
  config.algorithm.impl = wml::FixedInteractionKind::Protocol1;
  config.run.kind = cli::RunKind::G2;
  CHECK_THROWS_AS(config.validate(), ConfigInvalid);

  config = tiny_scenario();
  config.algorithm.kind = cli::AlgorithmKind::OracleOnly;
  config.run.kind = cli::RunKind::G2;
  CHECK_THROWS_AS(config.validate(), ConfigInvalid);

  config = tiny_scenario();
  config.algorithm.kind = cli::AlgorithmKind::Hybrid;
  config.system.cavity_qubits = 3;
  config.system.omega_e = {245000.0};
  CHECK_THROWS_AS(config.validate(), ConfigInvalid);
}

TEST_CASE("the time grid spaces num_points evenly and collapses empty spans") {
  cli::RunConfig run;
  run.t_start = 0.0;
  run.t_end = 1.0;
  run.num_points = 5;
  CHECK(cli::time_grid(run) == std::vector<double>{0.0, 0.25, 0.5, 0.75, 1.0});

  run.num_points = 1;
  run.t_start = 0.5;
  run.t_end = 2.0;
  CHECK(cli::time_grid(run) == std::vector<double>{0.5});

  run.num_points = 7;
  run.t_start = 0.3;
  run.t_end = 0.3;
  CHECK(cli::time_grid(run) == std::vector<double>{0.3});
}

TEST_CASE("the config hash keys the scenario, not the output destination") {
  auto config = tiny_scenario();
  const std::string base = cli::config_hash(config);
  CHECK(base.size() == 16);

  auto moved = config;
  moved.output_path = "elsewhere.csv";
  CHECK(cli::config_hash(moved) == base);

  auto reseeded = config;
  reseeded.seed = 8;
  CHECK(cli::config_hash(reseeded) != base);

  auto retimed = config;
  retimed.run.t_end = 0.06;
  CHECK(cli::config_hash(retimed) != base);
}

TEST_CASE("the preset catalog lists nine scenarios that all validate") {
  const auto catalog = cli::preset_catalog();
  REQUIRE(catalog.size() == 9);
  for (int i = 0; i < 9; ++i)
    CHECK(catalog[static_cast<std::size_t>(i)].name ==
          "fig" + std::to_string(i + 1));
  for (const auto& info : catalog) {
    const auto config = cli::preset(info.name);
    CHECK_NOTHROW(config.validate());
    CHECK(config.name == info.name);
  }
  CHECK_THROWS_AS(cli::preset("fig10"), ConfigInvalid);
  CHECK_THROWS_AS(cli::preset_text("fig10"), ConfigInvalid);
}

TEST_CASE("shipped preset files match the built-in text byte for byte") {
  for (const auto& info : cli::preset_catalog()) {
    const std::filesystem::path path =
        std::filesystem::path(TCSIM_SOURCE_DIR) / "presets" / (info.name + ".cfg");
    std::ifstream in(path, std::ios::binary);
    REQUIRE_MESSAGE(in.good(), path.string());
    std::ostringstream bytes;
    bytes << in.rdbuf();
    CHECK_MESSAGE(bytes.str() == cli::preset_text(info.name), path.string());
  }
}

TEST_CASE("an exact split-J run tracks its reference columns") {
  const auto config = tiny_scenario();
  const auto series = cli::run_scenario(config);
  CHECK(series.kind == cli::RunKind::TimeSeries);
  CHECK(series.n_emitters == 1);
  CHECK(series.has_oracle);
  REQUIRE(series.rows.size() == 5);
  REQUIRE(series.oracle_rows.size() == 5);
  CHECK(series.rows.front().cavity == 2.0);
  const auto grid = cli::time_grid(config.run);
  for (std::size_t k = 0; k < 5; ++k) {
    CHECK(series.rows[k].time == grid[k]);
    CHECK(series.oracle_rows[k].time == grid[k]);
    CHECK(std::abs(series.rows[k].cavity - series.oracle_rows[k].cavity) < 0.05);
    CHECK(std::abs(series.rows[k].emitters[0] -
                   series.oracle_rows[k].emitters[0]) < 0.05);
  }
  CHECK(series.config_hash == cli::config_hash(config));
  CHECK(series.seed == config.seed);
}

TEST_CASE("equal seeds reproduce shot output byte for byte") {
  auto config = tiny_scenario();
  config.run.mode = cli::SampleMode::Shot;
  config.run.shots = 100;
  config.run.num_points = 3;

  auto first = cli::run_scenario(config);
  auto second = cli::run_scenario(config);
  CHECK(emit_text(first, cli::OutputFormat::Csv) ==
        emit_text(second, cli::OutputFormat::Csv));

  first.wall_seconds = 0.0;  // timings are the one nondeterministic field
  second.wall_seconds = 0.0;
  CHECK(emit_text(first, cli::OutputFormat::Json) ==
        emit_text(second, cli::OutputFormat::Json));

  config.seed = 8;
  auto reseeded = cli::run_scenario(config);
  CHECK(emit_text(first, cli::OutputFormat::Csv) !=
        emit_text(reseeded, cli::OutputFormat::Csv));
}

TEST_CASE("emitted JSON parses back to an equal series") {
  auto config = tiny_scenario();
  config.run.num_points = 3;
  const auto series = cli::run_scenario(config);
  std::istringstream in(emit_text(series, cli::OutputFormat::Json));
  const auto round = cli::parse_result_series(in, cli::OutputFormat::Json);
  CHECK(round == series);
}

TEST_CASE("emitted CSV parses back to the same rows") {
  auto config = tiny_scenario();
  config.run.num_points = 4;
  const auto series = cli::run_scenario(config);
  std::istringstream in(emit_text(series, cli::OutputFormat::Csv));
  const auto round = cli::parse_result_series(in, cli::OutputFormat::Csv);
  CHECK(round.kind == cli::RunKind::TimeSeries);
  CHECK(round.n_emitters == 1);
  CHECK(round.has_oracle);
  REQUIRE(round.rows.size() == series.rows.size());
  REQUIRE(round.oracle_rows.size() == series.oracle_rows.size());
  for (std::size_t k = 0; k < series.rows.size(); ++k) {
    CHECK(round.rows[k].time == series.rows[k].time);
    CHECK(round.rows[k].cavity == series.rows[k].cavity);
    CHECK(round.rows[k].emitters == series.rows[k].emitters);
    CHECK(round.oracle_rows[k].cavity == series.oracle_rows[k].cavity);
  }
}

TEST_CASE("the CSV header matches the column contract") {
  auto config = tiny_scenario();
  config.run.num_points = 1;
  config.run.t_end = config.run.t_start;
  auto series = cli::run_scenario(config);
  std::istringstream with_oracle(emit_text(series, cli::OutputFormat::Csv));
  std::string header;
  std::getline(with_oracle, header);
  CHECK(header ==
        "time_ns,cavity_pop,cavity_stderr,emitter_1,oracle_cavity_pop,"
        "oracle_emitter_1");

  config.oracle.include = false;
  series = cli::run_scenario(config);
  std::istringstream without(emit_text(series, cli::OutputFormat::Csv));
  std::getline(without, header);
  CHECK(header == "time_ns,cavity_pop,cavity_stderr,emitter_1");

  cli::ScenarioConfig bare;
  bare.name = "bare-cavity";
  bare.system.n_emitters = 0;
  bare.system.kappa = 24.5;
  bare.initial_cavity_excitations = 2;
  bare.algorithm.kind = cli::AlgorithmKind::SplitJ;
  bare.algorithm.n = 10;
  bare.run.t_end = 0.02;
  bare.run.num_points = 3;
  series = cli::run_scenario(bare);
  std::istringstream empty_emitters(emit_text(series, cli::OutputFormat::Csv));
  std::getline(empty_emitters, header);
  CHECK(header == "time_ns,cavity_pop,cavity_stderr,oracle_cavity_pop");
}

TEST_CASE("a zero-length interval yields one row of initial populations") {
  auto config = tiny_scenario();
  config.run.t_start = 0.3;
  config.run.t_end = 0.3;
  config.run.num_points = 7;
  config.initial_excited_emitters = {0};
  const auto series = cli::run_scenario(config);
  REQUIRE(series.rows.size() == 1);
  CHECK(series.rows[0].time == 0.3);
  CHECK(series.rows[0].cavity == 2.0);
  CHECK(series.rows[0].emitters[0] == 1.0);
}

TEST_CASE("oracle_only runs publish the reference solution as the result") {
  auto config = tiny_scenario();
  config.algorithm.kind = cli::AlgorithmKind::OracleOnly;
  config.run.num_points = 3;
  const auto series = cli::run_scenario(config);
  CHECK_FALSE(series.has_oracle);
  REQUIRE(series.rows.size() == 3);
  CHECK(series.rows[0].cavity == 2.0);
  // Strong decay over 0.05 ns at kappa = 24.5 must have drained something.
  CHECK(series.rows[2].cavity < 2.0);
}

TEST_CASE("the trajectory algorithm stays near the reference on easy systems") {
  auto config = tiny_scenario();
  config.algorithm.kind = cli::AlgorithmKind::Mcwf;
  config.algorithm.mcwf_dt = 2e-5;
  config.algorithm.mcwf_trajectories = 60;
  config.run.num_points = 3;
  const auto series = cli::run_scenario(config);
  REQUIRE(series.rows.size() == 3);
  REQUIRE(series.has_oracle);
  for (std::size_t k = 0; k < 3; ++k)
    CHECK(std::abs(series.rows[k].cavity - series.oracle_rows[k].cavity) < 0.4);
}

TEST_CASE("g2 runs report one ratio per batch and a reference value") {
  cli::ScenarioConfig config = tiny_scenario();
  config.name = "tiny-g2";
  config.system.pump_amp = 4.9;
  config.system.pump_freq = 244900.0;
  config.system.frame_shift = 244900.0;
  config.initial_cavity_excitations = 1;
  config.algorithm.n = 60;
  config.run.kind = cli::RunKind::G2;
  config.run.steady_time = 0.15;
  config.run.batches = 3;
  config.run.shots_per_batch = 60;
  config.seed = 21;
  const auto series = cli::run_scenario(config);
  CHECK(series.kind == cli::RunKind::G2);
  CHECK(series.g2.batches.size() == 3);
  CHECK(series.g2.running_median.size() == 3);
  CHECK(series.has_oracle_g2);
  CHECK(series.oracle_g2 > 0.0);

  std::istringstream in(emit_text(series, cli::OutputFormat::Json));
  const auto round = cli::parse_result_series(in, cli::OutputFormat::Json);
  CHECK(round == series);

  std::istringstream csv(emit_text(series, cli::OutputFormat::Csv));
  std::string header;
  std::getline(csv, header);
  CHECK(header == "batch,batch_ratio,running_median");
}

TEST_CASE("parse_config_file derives the name from the file stem") {
  const auto path = temp_file("stem-check.cfg");
  {
    std::ofstream out(path);
    out << "[system]\nn_emitters = 1\nomega_e = 2\ng = 0.1\n";
  }
  const auto config = cli::parse_config_file(path.string());
  CHECK(config.name == "stem-check");
  std::filesystem::remove(path);

  CHECK_THROWS_AS(cli::parse_config_file("/definitely/not/here.cfg"), IoError);
}

TEST_CASE("the command line maps outcomes to exit codes") {
  const auto config_path = temp_file("cli-run.cfg");
  const auto output_path = temp_file("cli-run-out.csv");
  {
    auto config = tiny_scenario();
    config.run.num_points = 2;
    config.output_path = output_path.string();
    std::ofstream out(config_path);
    out << cli::write_config(config);
  }
  CHECK(run_cli({"run", config_path.string()}) == 0);
  CHECK(std::filesystem::exists(output_path));
  std::filesystem::remove(output_path);

  CHECK(run_cli({"run"}) == 2);
  CHECK(run_cli({"run", config_path.string(), "--preset", "fig1"}) == 2);
  CHECK(run_cli({"run", "--preset", "fig99"}) == 2);
  CHECK(run_cli({"run", "/definitely/not/here.cfg"}) == 1);
  CHECK(run_cli({"run", config_path.string(), "--output",
                 "/definitely/not/a/dir/out.csv"}) == 1);
  CHECK(run_cli({"run", config_path.string(), "--format", "yaml"}) == 2);

  // A deliberately unstable configuration: the trace-raising fixed-point
  // realization with a huge per-step weight blows past the trace window.
  const auto unstable_path = temp_file("cli-unstable.cfg");
  {
    cli::ScenarioConfig config;
    config.name = "unstable";
    config.system.n_emitters = 2;
    config.system.omega_c = 245.0;
    config.system.omega_e = {245.4, 246.3};
    config.system.g = {1.0, 1.0};
    config.system.kappa = 0.16;
    config.system.gamma = 0.0196;
    config.system.frame_shift = 245.0;
    config.initial_cavity_excitations = 1;
    config.algorithm.kind = cli::AlgorithmKind::Wml;
    config.algorithm.impl = wml::FixedInteractionKind::ExactKraus;
    config.algorithm.n = 600;
    config.run.t_end = 3.0;
    config.run.num_points = 2;
    config.oracle.include = false;
    config.output_path = temp_file("cli-unstable-out.csv").string();
    std::ofstream out(unstable_path);
    out << cli::write_config(config);
  }
  CHECK(run_cli({"run", unstable_path.string()}) == 3);
  std::filesystem::remove(config_path);
  std::filesystem::remove(unstable_path);
}

TEST_CASE("seed and oracle flags override the config") {
  const auto config_path = temp_file("cli-override.cfg");
  const auto output_path = temp_file("cli-override-out.json");
  {
    auto config = tiny_scenario();
    config.run.num_points = 2;
    std::ofstream out(config_path);
    out << cli::write_config(config);
  }
  CHECK(run_cli({"run", config_path.string(), "--seed", "99", "--no-oracle",
                 "--output", output_path.string(), "--format", "json"}) == 0);
  std::ifstream in(output_path);
  REQUIRE(in.good());
  const auto series = cli::parse_result_series(in, cli::OutputFormat::Json);
  CHECK(series.seed == 99);
  CHECK_FALSE(series.has_oracle);
  std::filesystem::remove(config_path);
  std::filesystem::remove(output_path);
}

}  // TEST_SUITE
