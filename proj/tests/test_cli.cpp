#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <json.hpp>

using ojson = nlohmann::ordered_json;
namespace fs = std::filesystem;

namespace {

struct CliResult {
  int code = -1;
  std::string out;
  std::string err;
};

std::string slurp(const fs::path& p) {
  std::ifstream f(p, std::ios::binary);
  REQUIRE(f.good());
  std::stringstream buf;
  buf << f.rdbuf();
  return buf.str();
}

// scratch area shared by all cases; wiped once at static-init time
const fs::path& scratch() {
  static const fs::path dir = [] {
    fs::path d = fs::current_path() / "cli_scratch";
    fs::remove_all(d);
    fs::create_directories(d);
    return d;
  }();
  return dir;
}

CliResult run_cli(const std::string& args) {
  static int counter = 0;
  const fs::path out = scratch() / ("stdout_" + std::to_string(counter));
  const fs::path err = scratch() / ("stderr_" + std::to_string(counter));
  ++counter;
  const std::string cmd = std::string(BALAYAGE_CLI_PATH) + " " + args + " > " +
                          out.string() + " 2> " + err.string();
  const int raw = std::system(cmd.c_str());
  CliResult r;
  r.code = WIFEXITED(raw) ? WEXITSTATUS(raw) : -1;
  r.out = slurp(out);
  r.err = slurp(err);
  return r;
}

fs::path write_config(const std::string& name, const ojson& j) {
  const fs::path p = scratch() / name;
  std::ofstream f(p, std::ios::binary);
  f << j.dump(2) << "\n";
  return p;
}

// single ball of radius 1 hit from distance 2: swept mass should be 1/2
ojson sweep_config(std::uint64_t seed, const std::string& out_dir) {
  return ojson{
      {"schema_version", 1},
      {"experiment", "balayage"},
      {"kernel", {{"d", 3}}},
      {"source", {{"atoms", {{{"x", {2.0, 0.0, 0.0}}, {"w", 1.0}}}}}},
      {"stop_balls", {{{"center", {0.0, 0.0, 0.0}}, {"radius", 1.0}}}},
      {"mc", {{"samples", 20000}, {"seed", seed}}},
      {"output", {{"out_dir", (scratch() / out_dir).string()}, {"format", "both"}}}};
}

}  // namespace

TEST_CASE("run executes the experiment named in the config") {
  const fs::path cfg = write_config("sweep.json", sweep_config(7, "sweep_out"));
  const CliResult r = run_cli("run " + cfg.string());
  CHECK(r.code == 0);
  CHECK(r.err.empty());
  CHECK(r.out.find("reports written to") != std::string::npos);

  const fs::path dir = scratch() / "sweep_out";
  REQUIRE(fs::exists(dir / "report.json"));
  REQUIRE(fs::exists(dir / "summary.txt"));
  REQUIRE(fs::exists(dir / "masses.csv"));

  const ojson rep = ojson::parse(slurp(dir / "report.json"));
  CHECK(rep.at("schema_version") == 1);
  CHECK(rep.at("experiment") == "balayage");
  const double mass = rep.at("results").at("total_mass").at("value").get<double>();
  CHECK(std::abs(mass - 0.5) < 0.02);

  // runtime belongs in the human summary, never in the machine report
  const std::string summary = slurp(dir / "summary.txt");
  CHECK(summary.find("runtime_seconds") != std::string::npos);
  const std::string raw = slurp(dir / "report.json");
  CHECK(raw.find("runtime") == std::string::npos);
  CHECK(raw.find("workers") == std::string::npos);
  CHECK(raw.find("out_dir") == std::string::npos);
}

TEST_CASE("validate inspects a config without running it") {
  const fs::path cfg = write_config("check.json", sweep_config(7, "never_used"));
  const CliResult r = run_cli("validate " + cfg.string());
  CHECK(r.code == 0);
  const ojson v = ojson::parse(r.out);
  CHECK(v.at("ok") == true);
  CHECK(v.at("experiment") == "balayage");
  CHECK(v.at("source_atoms") == 1);
  CHECK(v.at("stop_balls") == 1);
  CHECK(!fs::exists(scratch() / "never_used"));
}

TEST_CASE("typed subcommands reject configs of another kind") {
  const fs::path cfg = write_config("kind.json", sweep_config(7, "kind_out"));
  const CliResult r = run_cli("shrink " + cfg.string());
  CHECK(r.code == 2);
  CHECK(r.err.find("declares 'balayage'") != std::string::npos);
  CHECK(r.err.find("expects 'shrink'") != std::string::npos);
}

TEST_CASE("overlapping stop balls fail with a structural diagnostic") {
  ojson j = sweep_config(7, "overlap_out");
  j["stop_balls"] = {{{"center", {0.0, 0.0, 0.0}}, {"radius", 1.0}},
                     {{"center", {1.0, 0.0, 0.0}}, {"radius", 1.0}}};
  const fs::path cfg = write_config("overlap.json", j);
  const CliResult r = run_cli("run " + cfg.string());
  CHECK(r.code == 2);
  CHECK(r.err.find("disjoint") != std::string::npos);
}

TEST_CASE("unknown keys are reported with their path") {
  ojson j = sweep_config(7, "typo_out");
  j["mc"]["smaples"] = 100;
  const fs::path cfg = write_config("typo.json", j);
  const CliResult r = run_cli("run " + cfg.string());
  CHECK(r.code == 2);
  CHECK(r.err.find("config error at /mc") != std::string::npos);
  CHECK(r.err.find("unknown key 'smaples'") != std::string::npos);
}

TEST_CASE("weights that miss the simplex are rejected") {
  const ojson j{
      {"schema_version", 1},
      {"experiment", "shrink"},
      {"kernel", {{"d", 3}}},
      {"source", {{"atoms", {{{"x", {0.0, 0.0, 2.5}}, {"w", 1.0}}}}}},
      {"stop_balls",
       {{{"center", {-1.5, 0.0, 0.0}}, {"radius", 0.08}},
        {{"center", {1.5, 0.0, 0.0}}, {"radius", 0.08}}}},
      {"shrink",
       {{"mode", "joint"},
        {"delta", 0.3},
        {"lambda", {0.7, 0.7}},
        {"partition", {0, 1}}}},
      {"mc", {{"samples", 1000}, {"seed", 3}}},
      {"output", {{"out_dir", (scratch() / "simplex_out").string()}}}};
  const fs::path cfg = write_config("simplex.json", j);
  const CliResult r = run_cli("run " + cfg.string());
  CHECK(r.code == 2);
  CHECK(r.err.find("/shrink/lambda") != std::string::npos);
  CHECK(r.err.find("simplex") != std::string::npos);
}

TEST_CASE("missing and malformed configs exit with usage errors") {
  const CliResult missing = run_cli("run " + (scratch() / "no_such.json").string());
  CHECK(missing.code == 2);
  CHECK(missing.err.find("cannot read") != std::string::npos);

  const fs::path bad = scratch() / "bad.json";
  std::ofstream(bad) << "{ not json";
  const CliResult malformed = run_cli("run " + bad.string());
  CHECK(malformed.code == 2);
  CHECK(malformed.err.find("malformed JSON") != std::string::npos);
}

TEST_CASE("reports are byte-identical across worker counts") {
  const fs::path a = write_config("det_a.json", sweep_config(21, "det_a_out"));
  const fs::path b = write_config("det_b.json", sweep_config(21, "det_b_out"));
  CHECK(run_cli("run " + a.string() + " --workers 1").code == 0);
  CHECK(run_cli("run " + b.string() + " --workers 3").code == 0);
  CHECK(slurp(scratch() / "det_a_out" / "report.json") ==
        slurp(scratch() / "det_b_out" / "report.json"));
  CHECK(slurp(scratch() / "det_a_out" / "masses.csv") ==
        slurp(scratch() / "det_b_out" / "masses.csv"));
}

TEST_CASE("flag overrides act exactly like config edits") {
  // same seed once via --seed, once written into the file
  const fs::path flagged = write_config("seed_flag.json", sweep_config(5, "seed_flag_out"));
  const fs::path edited = write_config("seed_edit.json", sweep_config(9, "seed_edit_out"));
  CHECK(run_cli("run " + flagged.string() + " --seed 9").code == 0);
  CHECK(run_cli("run " + edited.string()).code == 0);
  CHECK(slurp(scratch() / "seed_flag_out" / "report.json") ==
        slurp(scratch() / "seed_edit_out" / "report.json"));

  // --out-dir redirects without touching the machine report
  const fs::path moved = write_config("seed_move.json", sweep_config(9, "ignored_out"));
  CHECK(run_cli("run " + moved.string() + " --out-dir " +
                (scratch() / "moved_out").string())
            .code == 0);
  CHECK(!fs::exists(scratch() / "ignored_out"));
  CHECK(slurp(scratch() / "moved_out" / "report.json") ==
        slurp(scratch() / "seed_edit_out" / "report.json"));
}

TEST_CASE("format selection controls which files appear") {
  ojson j = sweep_config(7, "json_only_out");
  j["output"]["format"] = "json";
  const fs::path cfg = write_config("json_only.json", j);
  CHECK(run_cli("run " + cfg.string()).code == 0);
  CHECK(fs::exists(scratch() / "json_only_out" / "report.json"));
  CHECK(!fs::exists(scratch() / "json_only_out" / "masses.csv"));

  const CliResult csv = run_cli("run " + cfg.string() + " --format csv --out-dir " +
                                (scratch() / "csv_only_out").string());
  CHECK(csv.code == 0);
  CHECK(!fs::exists(scratch() / "csv_only_out" / "report.json"));
  CHECK(fs::exists(scratch() / "csv_only_out" / "masses.csv"));
}

TEST_CASE("jensen run reports the mean value rows") {
  const ojson j{
      {"schema_version", 1},
      {"experiment", "jensen"},
      {"kernel", {{"d", 3}}},
      {"stop_balls", {{{"center", {0.0, 0.0, 0.0}}, {"radius", 1.0}}}},
      {"jensen", {{"x", {0.3, 0.0, 0.0}}}},
      {"dictionary",
       {{"members",
         {{{"kind", "newton_kernel"}, {"pole", {2.0, 0.0, 0.0}}, {"id", "newton-outside"}},
          {{"kind", "newton_kernel"},
           {"pole", {0.5, 0.0, 0.0}},
           {"cap", 50.0},
           {"id", "newton-inside"}}}}}},
      {"mc", {{"samples", 20000}, {"seed", 13}}},
      {"output", {{"out_dir", (scratch() / "jensen_out").string()}, {"format", "both"}}}};
  const fs::path cfg = write_config("jensen.json", j);
  const CliResult r = run_cli("jensen " + cfg.string());
  CHECK(r.code == 0);

  const ojson rep = ojson::parse(slurp(scratch() / "jensen_out" / "report.json"));
  const ojson& rows = rep.at("results").at("rows");
  REQUIRE(rows.size() == 2);
  CHECK(rows[0].at("id") == "newton-outside");
  CHECK(rows[0].at("harmonic") == true);
  CHECK(rows[0].at("jensen_ok") == true);
  CHECK(rows[0].at("equality_ok") == true);
  CHECK(rows[1].at("jensen_ok") == true);
  const ojson& gaps = rep.at("results").at("gaps");
  REQUIRE(gaps.size() == 1);
  CHECK(gaps[0].at("id") == "newton-inside");
  CHECK(gaps[0].at("strict_gap_ok") == true);
  CHECK(fs::exists(scratch() / "jensen_out" / "jensen.csv"));
}
