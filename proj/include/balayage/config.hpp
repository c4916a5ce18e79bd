#pragma once

#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "balayage/pipeline.hpp"

namespace balayage {

using ojson = nlohmann::ordered_json;

/// Schema violation; the message carries a JSON-pointer path to the offender.
struct ConfigError : ParameterError {
  using ParameterError::ParameterError;
};

inline constexpr int kSchemaVersion = 1;

enum class ExperimentKind {
  Balayage,
  Shrink,
  Theorem,
  GridApprox,
  ExitMixture,
  Jensen,
  Skorokhod,
  Harnack,
};

std::string experiment_name(ExperimentKind kind);
ExperimentKind experiment_from_name(const std::string& name, const std::string& path);

struct OutputSpec {
  std::string out_dir = ".";
  std::string format = "both";  // json | csv | both
};

struct ShrinkRun {
  std::string mode = "joint";  // joint | joint_scaled | fraction | max
  double delta = 0.0;
  std::vector<int> partition;
  std::vector<double> lambda;
  std::vector<double> beta;  // joint_scaled and fraction modes
  std::vector<double> caps;  // max mode
  ShrinkConfig cfg;
};

struct TheoremRun {
  std::vector<OpenSet> u_sets;
  std::vector<double> lambda;
  TheoremOptions opt;
};

struct GridApproxRun {
  LadderSpec ladder;
};

struct ExitMixtureRun {
  std::vector<Ball> u_balls;
  std::vector<double> lambda;
  std::vector<int> levels;
  TheoremOptions opt;
};

struct JensenRun {
  Point x;
};

struct SkorokhodRun {
  PathParams path;
};

struct HarnackRun {
  std::vector<double> deltas;
  std::size_t triples = 100000;
};

struct RunConfig {
  ExperimentKind kind = ExperimentKind::Balayage;
  KernelSpec kernel = KernelSpec::classical(3);
  DomainSpec domain;
  std::optional<WeightedMeasure> source;
  std::optional<BallUnion> stop_balls;
  std::optional<OpenSet> open_target;
  std::optional<OpenSet> window;
  std::optional<Dictionary> dict;
  McParams mc;
  OutputSpec output;

  std::optional<ShrinkRun> shrink;
  std::optional<TheoremRun> theorem;
  std::optional<GridApproxRun> grid;
  std::optional<ExitMixtureRun> mixture;
  std::optional<JensenRun> jensen;
  std::optional<SkorokhodRun> skorokhod;
  std::optional<HarnackRun> harnack;

  ojson echo;  // the accepted configuration, for report embedding
};

/// Strict parse: schema version, experiment kind, per-kind required blocks;
/// unknown keys anywhere are rejected with their JSON-pointer path.
RunConfig parse_config(const ojson& j);

/// Reads and parses a config file; I/O and JSON syntax problems become
/// ConfigError.
RunConfig load_config(const std::string& path);

/// Echo of the resolved parameters plus geometry diagnostics, without
/// running the experiment.
ojson validate_config(const RunConfig& cfg);

}  // namespace balayage
