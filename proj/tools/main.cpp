#include <chrono>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "balayage/config.hpp"
#include "balayage/report.hpp"

namespace {

using namespace balayage;

struct CommonOpts {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<std::uint64_t> samples;
  std::optional<std::uint64_t> workers;
  std::optional<std::string> out_dir;
  std::optional<std::string> format;

  void attach(CLI::App* sub) {
    sub->add_option("config", config_path, "experiment config (JSON)")->required();
    sub->add_option("--seed", seed, "override mc.seed");
    sub->add_option("--samples", samples, "override mc.samples");
    sub->add_option("--workers", workers, "override mc.workers");
    sub->add_option("--out-dir", out_dir, "report directory (default from config)");
    sub->add_option("--format", format, "report format: json, csv, or both");
  }
};

// Flags are applied as config edits and the result re-parsed, so an override
// behaves exactly like writing the value into the file.
RunConfig resolve(const CommonOpts& o) {
  RunConfig cfg = load_config(o.config_path);
  ojson j = cfg.echo;
  if (o.seed || o.samples || o.workers) {
    if (!j.contains("mc")) j["mc"] = ojson::object();
    if (o.seed) j["mc"]["seed"] = *o.seed;
    if (o.samples) j["mc"]["samples"] = *o.samples;
    if (o.workers) j["mc"]["workers"] = *o.workers;
  }
  if (o.out_dir || o.format) {
    if (!j.contains("output")) j["output"] = ojson::object();
    if (o.out_dir) j["output"]["out_dir"] = *o.out_dir;
    if (o.format) j["output"]["format"] = *o.format;
  }
  return parse_config(j);
}

// Execution plumbing must not leak into the machine report: worker counts and
// output paths do not change any estimate.
void scrub(ojson& j) {
  if (j.is_object()) {
    j.erase("workers");
    for (auto& [key, value] : j.items()) scrub(value);
  } else if (j.is_array()) {
    for (auto& value : j) scrub(value);
  }
}

struct Bundle {
  ojson results;
  std::vector<CsvTable> tables;
  std::string summary;
};

Bundle run_experiment(const RunConfig& cfg) {
  Bundle out;
  switch (cfg.kind) {
    case ExperimentKind::Balayage: {
      const BallUnion stop = cfg.stop_balls ? *cfg.stop_balls : BallUnion{};
      const WeightedMeasure swept = balayage_measure(
          *cfg.source, StopSet(stop, cfg.open_target, cfg.window, cfg.domain), cfg.kernel,
          cfg.mc);
      std::vector<MassGateRow> gate;
      if (cfg.dict)
        gate = mass_gate(*cfg.source, swept, *cfg.dict, cfg.kernel, cfg.domain, "sweep");
      out.results = sweep_json(*cfg.source, swept, cfg.stop_balls ? &*cfg.stop_balls : nullptr,
                               cfg.dict ? &*cfg.dict : nullptr, cfg.dict ? &gate : nullptr);
      out.tables = sweep_tables(swept, cfg.stop_balls ? &*cfg.stop_balls : nullptr,
                                cfg.dict ? &*cfg.dict : nullptr);
      out.summary = sweep_summary(swept);
      break;
    }
    case ExperimentKind::Shrink: {
      const ShrinkRun& run = *cfg.shrink;
      ShrinkProblem problem;
      problem.family = DeltaFamily{*cfg.stop_balls, run.delta, cfg.domain};
      problem.window = cfg.window;
      problem.source = *cfg.source;
      problem.partition = run.partition;
      problem.lambda = run.lambda;
      problem.kernel = cfg.kernel;
      problem.mc = cfg.mc;
      problem.cfg = run.cfg;
      const DeltaFamilyReport family =
          cfg.window ? validate_delta_family(*cfg.stop_balls, run.delta, cfg.kernel.alpha,
                                             *cfg.window)
                     : validate_delta_family(*cfg.stop_balls, run.delta, cfg.kernel.alpha,
                                             cfg.domain);
      ShrinkSolution sol;
      if (run.mode == "joint")
        sol = joint_shrink(problem);
      else if (run.mode == "joint_scaled")
        sol = joint_shrink_scaled(problem, run.beta);
      else if (run.mode == "fraction")
        sol = fraction_shrink(problem, run.beta);
      else
        sol = solve_max_shrink(problem, run.caps);
      out.results = ojson{{"family", delta_family_json(family)},
                          {"mode", run.mode},
                          {"solution", shrink_json(sol)}};
      out.tables = shrink_tables(sol);
      out.summary = shrink_summary(sol);
      break;
    }
    case ExperimentKind::Theorem: {
      const TheoremRun& run = *cfg.theorem;
      TheoremInputs in{*cfg.source, *cfg.window, run.u_sets,
                       run.lambda,  *cfg.dict,   cfg.kernel,
                       cfg.domain};
      const TheoremReport rep = run_theorem_pipeline(in, run.opt);
      out.results = theorem_json(rep);
      out.tables = theorem_tables(rep);
      out.summary = theorem_summary(rep);
      break;
    }
    case ExperimentKind::GridApprox: {
      const GridLadderReport rep =
          approximate_open_balayage(*cfg.source, *cfg.open_target, cfg.window, cfg.domain,
                                    cfg.grid->ladder, *cfg.dict, cfg.kernel, cfg.mc);
      out.results = grid_ladder_json(rep);
      out.tables = grid_ladder_tables(rep);
      out.summary = grid_ladder_summary(rep);
      break;
    }
    case ExperimentKind::ExitMixture: {
      const ExitMixtureRun& run = *cfg.mixture;
      const ExitMixtureReport rep = run_exit_mixture_ladder(
          *cfg.source, run.u_balls, run.lambda, run.levels, *cfg.dict, cfg.kernel, cfg.domain,
          run.opt);
      out.results = exit_mixture_json(rep);
      out.tables = exit_mixture_tables(rep);
      out.summary = exit_mixture_summary(rep);
      break;
    }
    case ExperimentKind::Jensen: {
      const JensenReport rep = jensen_demo(cfg.jensen->x, *cfg.stop_balls, cfg.domain,
                                           *cfg.dict, cfg.kernel, cfg.mc);
      out.results = jensen_json(rep);
      out.tables = jensen_tables(rep);
      out.summary = jensen_summary(rep);
      break;
    }
    case ExperimentKind::Skorokhod: {
      const SkorokhodReport rep = skorokhod_demo(*cfg.source, *cfg.stop_balls, cfg.domain,
                                                 *cfg.dict, cfg.kernel, cfg.mc,
                                                 cfg.skorokhod->path);
      out.results = skorokhod_json(rep);
      out.tables = skorokhod_tables(rep);
      out.summary = skorokhod_summary(rep);
      break;
    }
    case ExperimentKind::Harnack: {
      const HarnackReport rep =
          harnack_audit(cfg.kernel, cfg.harnack->deltas, cfg.harnack->triples, cfg.mc);
      out.results = harnack_json(rep);
      out.tables = harnack_tables(rep);
      out.summary = harnack_summary(rep);
      break;
    }
  }
  return out;
}

int run_command(const CommonOpts& opts, std::optional<ExperimentKind> expected) {
  const RunConfig cfg = resolve(opts);
  if (expected && cfg.kind != *expected)
    throw ConfigError("config error at /experiment: config declares '" +
                      experiment_name(cfg.kind) + "' but the subcommand expects '" +
                      experiment_name(*expected) + "'");
  const auto start = std::chrono::steady_clock::now();
  Bundle bundle = run_experiment(cfg);
  const double secs =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

  ojson echo = cfg.echo;
  scrub(echo);
  echo.erase("output");
  ojson machine;
  machine["schema_version"] = kSchemaVersion;
  machine["experiment"] = experiment_name(cfg.kind);
  machine["config"] = std::move(echo);
  machine["results"] = std::move(bundle.results);

  char timing[64];
  std::snprintf(timing, sizeof(timing), "runtime_seconds: %.3f\n", secs);
  write_report_files(cfg.output.out_dir, machine, bundle.tables, bundle.summary + timing,
                     cfg.output.format);
  std::cout << bundle.summary;
  std::cout << "reports written to " << cfg.output.out_dir << "\n";
  return 0;
}

int validate_command(const CommonOpts& opts) {
  const RunConfig cfg = resolve(opts);
  std::cout << validate_config(cfg).dump(2) << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"balayage onto ball unions: kernel chains, shrink solvers, audits"};
  app.require_subcommand(1);

  struct SubSpec {
    CLI::App* sub;
    CommonOpts opts;
    std::optional<ExperimentKind> kind;
    bool validate_only = false;
  };
  std::vector<std::pair<std::string, std::optional<ExperimentKind>>> names = {
      {"run", std::nullopt},
      {"balayage", ExperimentKind::Balayage},
      {"shrink", ExperimentKind::Shrink},
      {"theorem", ExperimentKind::Theorem},
      {"grid-approx", ExperimentKind::GridApprox},
      {"jensen", ExperimentKind::Jensen},
      {"skorokhod", ExperimentKind::Skorokhod},
      {"harnack", ExperimentKind::Harnack},
  };
  std::vector<SubSpec> specs;
  specs.reserve(names.size() + 1);
  for (auto& [name, kind] : names) {
    const std::string desc =
        name == "run" ? "run the experiment named in the config"
                      : "run a config of experiment kind '" + name + "'";
    specs.push_back({app.add_subcommand(name, desc), {}, kind, false});
    specs.back().opts.attach(specs.back().sub);
  }
  specs.push_back({app.add_subcommand("validate", "validate a config without running"),
                   {},
                   std::nullopt,
                   true});
  specs.back().opts.attach(specs.back().sub);

  try {
    app.parse(argc, argv);
    for (const SubSpec& spec : specs) {
      if (!spec.sub->parsed()) continue;
      return spec.validate_only ? validate_command(spec.opts)
                                : run_command(spec.opts, spec.kind);
    }
    return 0;
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  } catch (const SolverError& e) {
    std::cerr << "solver error: " << e.what() << "\n";
    return 3;
  } catch (const std::invalid_argument& e) {
    std::cerr << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
}
