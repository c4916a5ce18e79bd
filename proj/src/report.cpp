#include "balayage/report.hpp"

#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

namespace balayage {
namespace {

// Non-finite values become JSON null rather than relying on dump() quirks.
ojson num(double v) { return std::isfinite(v) ? ojson(v) : ojson(); }

ojson ball_json(const Ball& b) {
  return ojson{{"center", b.center}, {"radius", b.radius}};
}

std::string csv_escape(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

std::string stagef(const char* fmt, int a, int b = 0) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), fmt, a, b);
  return std::string(buf);
}

using Row = std::array<std::string, 4>;

Row row(std::string stage, std::string id, double value, double stderr_) {
  return {std::move(stage), std::move(id), format_double(value), format_double(stderr_)};
}

}  // namespace

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[40];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

std::vector<MassGateRow> mass_gate(const WeightedMeasure& in, const WeightedMeasure& out,
                                   const Dictionary& dict, const KernelSpec& k,
                                   const DomainSpec& domain, const std::string& stage) {
  std::vector<MassGateRow> rows;
  for (const DictionaryEntry& e : dict.members) {
    if (!e.allow_gate || !e.q.mass_gate_eligible(k, domain)) continue;
    const Estimate before = integrate(in, e.q);
    const Estimate after = integrate(out, e.q);
    const double sig = std::hypot(before.sigma, after.sigma);
    rows.push_back({e.q.id, stage, before.value, after.value, sig,
                    after.value <= before.value + 3.0 * sig + 1e-12});
  }
  return rows;
}

ojson estimate_json(const Estimate& e) {
  return ojson{{"value", num(e.value)}, {"sigma", num(e.sigma)}};
}

ojson diagnostics_json(const Diagnostics& d) {
  ojson j;
  j["escaped_mass"] = num(d.escaped_mass);
  j["killed_mass"] = num(d.killed_mass);
  j["truncated_mass"] = num(d.truncated_mass);
  j["truncated_walks"] = d.truncated_walks;
  j["total_steps"] = d.total_steps;
  j["escape_radius"] = num(d.escape_radius);
  j["eps_shell"] = num(d.eps_shell);
  j["convergence_warning"] = d.convergence_warning;
  j["warnings"] = d.warnings;
  return j;
}

ojson delta_family_json(const DeltaFamilyReport& rep) {
  ojson j;
  j["valid"] = rep.valid;
  j["delta"] = num(rep.delta);
  j["delta_cap"] = num(rep.delta_cap);
  j["min_admissible_delta"] = num(rep.min_admissible_delta);
  ojson slacks = ojson::array();
  for (const BallSlack& s : rep.slacks)
    slacks.push_back({{"radius", num(s.radius)},
                      {"distance", num(s.distance)},
                      {"slack", num(s.slack)},
                      {"min_delta", num(s.min_delta)}});
  j["slacks"] = std::move(slacks);
  return j;
}

ojson gate_json(const std::vector<MassGateRow>& rows) {
  ojson j = ojson::array();
  for (const MassGateRow& r : rows)
    j.push_back({{"id", r.id},
                 {"stage", r.stage},
                 {"before", num(r.before)},
                 {"after", num(r.after)},
                 {"sigma", num(r.sigma)},
                 {"ok", r.ok}});
  return j;
}

ojson shrink_json(const ShrinkSolution& sol) {
  ojson j;
  j["s"] = sol.s;
  j["converged"] = sol.converged;
  j["sweeps"] = sol.sweeps;
  ojson balls = ojson::array();
  for (std::size_t i = 0; i < sol.s.size(); ++i) {
    ojson b;
    b["s"] = num(sol.s[i]);
    b["target"] = num(sol.targets[i]);
    b["achieved"] = estimate_json(sol.achieved[i]);
    if (i < sol.independent.size()) b["independent"] = estimate_json(sol.independent[i]);
    b["tolerance"] = num(sol.tolerance[i]);
    balls.push_back(std::move(b));
  }
  j["balls"] = std::move(balls);
  ojson trace = ojson::array();
  for (const SweepLogEntry& t : sol.trace)
    trace.push_back({{"sweep", t.sweep},
                     {"ball", t.ball},
                     {"s", num(t.s)},
                     {"mass", num(t.mass)},
                     {"target", num(t.target)}});
  j["trace"] = std::move(trace);
  j["feasible_points"] = sol.feasible_points;
  j["warnings"] = sol.warnings;
  return j;
}

ojson sweep_json(const WeightedMeasure& in, const WeightedMeasure& out, const BallUnion* stop,
                 const Dictionary* dict, const std::vector<MassGateRow>* gate) {
  ojson j;
  j["input_mass"] = num(in.total_input());
  j["total_mass"] = estimate_json(total_mass_estimate(out));
  j["lost_mass"] = num(out.lost_mass());
  j["exact_atoms"] = out.exact_count();
  j["mc_atoms"] = out.atoms().size() - out.exact_count();
  j["walks"] = out.walk_count();
  if (stop) {
    ojson masses = ojson::array();
    for (std::size_t i = 0; i < stop->size(); ++i) {
      ojson b = ball_json((*stop)[i]);
      b["mass"] = estimate_json(mass_on(out, (*stop)[i]));
      masses.push_back(std::move(b));
    }
    j["ball_masses"] = std::move(masses);
  }
  {
    const auto by_cause = [&](StopCause c) {
      return total_mass_estimate(
          out.restricted([c](const Atom& a) { return a.cause == c; }));
    };
    j["window_mass"] = estimate_json(by_cause(StopCause::Window));
    j["open_target_mass"] = estimate_json(by_cause(StopCause::OpenTarget));
    j["kept_mass"] = estimate_json(by_cause(StopCause::Source));
  }
  if (dict) {
    ojson ints = ojson::array();
    for (const DictionaryEntry& e : dict->members) {
      const Estimate est = integrate(out, e.q);
      ints.push_back({{"id", e.q.id}, {"value", num(est.value)}, {"sigma", num(est.sigma)}});
    }
    j["dictionary"] = std::move(ints);
  }
  if (gate) j["gate"] = gate_json(*gate);
  j["diagnostics"] = diagnostics_json(out.diagnostics());
  return j;
}

namespace {

ojson potential_gap_json(const PotentialGap& g) {
  return ojson{{"id", g.id},
               {"lhs", estimate_json(g.lhs)},
               {"rhs", estimate_json(g.rhs)},
               {"diff", num(g.diff)}};
}

ojson estimates_json(const std::vector<Estimate>& v) {
  ojson j = ojson::array();
  for (const Estimate& e : v) j.push_back(estimate_json(e));
  return j;
}

}  // namespace

ojson grid_ladder_json(const GridLadderReport& rep) {
  ojson j;
  j["reference"] = estimates_json(rep.reference);
  j["base"] = rep.base;
  ojson levels = ojson::array();
  for (const GridLadderLevel& lev : rep.levels) {
    ojson l;
    l["m"] = lev.m;
    l["ball_count"] = lev.ball_count;
    l["lost_mass"] = num(lev.lost_mass);
    l["max_abs_diff"] = num(lev.max_abs_diff);
    l["max_rel_diff"] = num(lev.max_rel_diff);
    ojson rows = ojson::array();
    for (const PotentialGap& g : lev.rows) rows.push_back(potential_gap_json(g));
    l["rows"] = std::move(rows);
    levels.push_back(std::move(l));
  }
  j["levels"] = std::move(levels);
  j["member_decreasing"] = rep.member_decreasing;
  j["strictly_decreasing"] = rep.strictly_decreasing;
  j["final_max_rel"] = num(rep.final_max_rel);
  j["gate"] = gate_json(rep.gate);
  j["warnings"] = rep.warnings;
  return j;
}

ojson theorem_json(const TheoremReport& rep) {
  ojson j;
  ojson p;
  p["k"] = rep.params.k;
  p["eta"] = num(rep.params.eta);
  p["nu_p"] = num(rep.params.nu_p);
  p["delta"] = num(rep.params.delta);
  p["delta_prime"] = num(rep.params.delta_prime);
  p["big_n"] = rep.params.big_n;
  p["a"] = num(rep.params.a);
  p["m"] = rep.params.m;
  p["selected_j"] = rep.params.selected_j;
  j["params"] = std::move(p);
  j["family"] = delta_family_json(rep.family);
  ojson sel = ojson::array();
  for (const OffsetRow& r : rep.selection)
    sel.push_back({{"j", r.j}, {"p_mass", num(r.p_mass)}, {"selected", r.selected}});
  j["selection"] = std::move(sel);
  ojson gc = ojson::array();
  for (const GridCheckRow& r : rep.grid_check)
    gc.push_back({{"group", r.group},
                  {"j", r.j},
                  {"id", r.id},
                  {"grid", estimate_json(r.grid)},
                  {"reference", estimate_json(r.reference)},
                  {"diff", num(r.diff)},
                  {"ok", r.ok}});
  j["grid_check"] = std::move(gc);
  j["grid_check_met"] = rep.grid_check_met;
  j["grid_ball_count"] = rep.grid_ball_count;
  j["removed_p_mass"] = num(rep.removed_p_mass);
  j["removed_bound"] = num(rep.removed_bound);
  j["shrink"] = shrink_json(rep.shrink);
  ojson eq = ojson::array();
  for (const EqualityRow& r : rep.equalities)
    eq.push_back({{"ball", r.ball},
                  {"target", num(r.target)},
                  {"achieved", num(r.achieved)},
                  {"sigma", num(r.sigma)},
                  {"tol", num(r.tol)},
                  {"ok", r.ok}});
  j["equalities"] = std::move(eq);
  ojson fr = ojson::array();
  for (const PotentialGap& g : rep.final_rows) fr.push_back(potential_gap_json(g));
  j["final_rows"] = std::move(fr);
  j["final_distance"] = num(rep.final_distance);
  j["final_sigma"] = num(rep.final_sigma);
  j["final_gate"] = num(rep.final_gate);
  j["final_ok"] = rep.final_ok;
  ojson bd = ojson::array();
  for (const BoundaryGapRow& r : rep.boundary)
    bd.push_back({{"id", r.id},
                  {"value", num(r.value)},
                  {"sigma", num(r.sigma)},
                  {"bound", num(r.bound)},
                  {"nonneg_ok", r.nonneg_ok},
                  {"bound_ok", r.bound_ok}});
  j["boundary"] = std::move(bd);
  ojson rs = ojson::array();
  for (const ResweepRow& r : rep.resweep)
    rs.push_back({{"id", r.id},
                  {"lhs", estimate_json(r.lhs)},
                  {"rhs", estimate_json(r.rhs)},
                  {"diff", num(r.diff)},
                  {"slack", num(r.slack)},
                  {"ok", r.ok}});
  j["resweep"] = std::move(rs);
  j["gate"] = gate_json(rep.gate);
  j["s"] = rep.s;
  ojson cb = ojson::array();
  for (const Ball& b : rep.c_balls.balls()) cb.push_back(ball_json(b));
  j["c_balls"] = std::move(cb);
  j["warnings"] = rep.warnings;
  return j;
}

ojson exit_mixture_json(const ExitMixtureReport& rep) {
  ojson j;
  j["limit"] = estimates_json(rep.limit);
  ojson levels = ojson::array();
  for (const ExitMixtureLevel& lev : rep.levels) {
    ojson l;
    l["m"] = lev.m;
    l["distance"] = num(lev.distance);
    l["sigma"] = num(lev.sigma);
    l["containment_ok"] = lev.containment_ok;
    ojson rows = ojson::array();
    for (const PotentialGap& g : lev.rows) rows.push_back(potential_gap_json(g));
    l["rows"] = std::move(rows);
    l["run"] = theorem_json(lev.run);
    levels.push_back(std::move(l));
  }
  j["levels"] = std::move(levels);
  j["decreasing"] = rep.decreasing;
  j["gate"] = gate_json(rep.gate);
  j["warnings"] = rep.warnings;
  return j;
}

ojson jensen_json(const JensenReport& rep) {
  ojson j;
  ojson rows = ojson::array();
  for (const JensenRow& r : rep.rows)
    rows.push_back({{"id", r.id},
                    {"integral", estimate_json(r.integral)},
                    {"at_x", num(r.at_x)},
                    {"harmonic", r.harmonic},
                    {"jensen_ok", r.jensen_ok},
                    {"equality_ok", r.equality_ok}});
  j["rows"] = std::move(rows);
  ojson gaps = ojson::array();
  for (const JensenGapRow& r : rep.gaps)
    gaps.push_back({{"id", r.id},
                    {"integral", estimate_json(r.integral)},
                    {"exact_average", num(r.exact_average)},
                    {"at_x", num(r.at_x)},
                    {"average_ok", r.average_ok},
                    {"strict_gap_ok", r.strict_gap_ok}});
  j["gaps"] = std::move(gaps);
  j["support_ok"] = rep.support_ok;
  j["support_violation"] = num(rep.support_violation);
  j["warnings"] = rep.warnings;
  return j;
}

ojson skorokhod_json(const SkorokhodReport& rep) {
  ojson j;
  ojson d;
  d["value"] = num(rep.distance.value);
  d["sigma"] = num(rep.distance.sigma);
  ojson rows = ojson::array();
  for (const PotentialGap& g : rep.distance.rows) rows.push_back(potential_gap_json(g));
  d["rows"] = std::move(rows);
  j["distance"] = std::move(d);
  j["ok"] = rep.ok;
  j["kernel_hit_mass"] = estimate_json(rep.kernel_hit_mass);
  j["path_hit_mass"] = estimate_json(rep.path_hit_mass);
  j["path_escaped_mass"] = num(rep.path_escaped_mass);
  j["path_truncated_mass"] = num(rep.path_truncated_mass);
  j["warnings"] = rep.warnings;
  return j;
}

ojson harnack_json(const HarnackReport& rep) {
  ojson j;
  ojson ratios = ojson::array();
  for (const HarnackRatioRow& r : rep.ratios)
    ratios.push_back({{"delta", num(r.delta)},
                      {"eta", num(r.eta)},
                      {"bound_eta", num(r.bound_eta)},
                      {"bound_delta", num(r.bound_delta)},
                      {"max_ratio", num(r.max_ratio)},
                      {"violations_eta", r.violations_eta},
                      {"violations_delta", r.violations_delta},
                      {"triples", r.triples}});
  j["ratios"] = std::move(ratios);
  ojson swept = ojson::array();
  for (const HarnackSweptRow& r : rep.swept)
    swept.push_back({{"delta", num(r.delta)},
                     {"id", r.id},
                     {"moved", estimate_json(r.moved)},
                     {"base", estimate_json(r.base)},
                     {"slack", num(r.slack)},
                     {"ok", r.ok}});
  j["swept"] = std::move(swept);
  ojson ident = ojson::array();
  for (const HarnackIdentityRow& r : rep.identity)
    ident.push_back({{"id", r.id},
                     {"two_stage", estimate_json(r.two_stage)},
                     {"direct", estimate_json(r.direct)},
                     {"sigma", num(r.sigma)},
                     {"ok", r.ok}});
  j["identity"] = std::move(ident);
  j["warnings"] = rep.warnings;
  return j;
}

// -------------------------------- CSV --------------------------------------

std::vector<CsvTable> sweep_tables(const WeightedMeasure& out, const BallUnion* stop,
                                   const Dictionary* dict) {
  CsvTable t;
  t.name = "masses";
  if (stop) {
    for (std::size_t i = 0; i < stop->size(); ++i) {
      const Estimate e = mass_on(out, (*stop)[i]);
      t.rows.push_back(row("sweep", stagef("ball-%d", static_cast<int>(i)), e.value, e.sigma));
    }
  }
  const Estimate tot = total_mass_estimate(out);
  t.rows.push_back(row("sweep", "total", tot.value, tot.sigma));
  if (dict) {
    for (const DictionaryEntry& e : dict->members) {
      const Estimate est = integrate(out, e.q);
      t.rows.push_back(row("integral", e.q.id, est.value, est.sigma));
    }
  }
  return {std::move(t)};
}

std::vector<CsvTable> shrink_tables(const ShrinkSolution& sol) {
  CsvTable path;
  path.name = "shrink_path";
  for (const SweepLogEntry& e : sol.trace)
    path.rows.push_back(row(stagef("sweep-%d", e.sweep), stagef("ball-%d", e.ball), e.s, 0.0));
  CsvTable masses;
  masses.name = "shrink_masses";
  for (std::size_t i = 0; i < sol.s.size(); ++i) {
    masses.rows.push_back(row("final", stagef("ball-%d", static_cast<int>(i)),
                              sol.achieved[i].value, sol.achieved[i].sigma));
    if (i < sol.independent.size())
      masses.rows.push_back(row("independent", stagef("ball-%d", static_cast<int>(i)),
                                sol.independent[i].value, sol.independent[i].sigma));
    masses.rows.push_back(
        row("target", stagef("ball-%d", static_cast<int>(i)), sol.targets[i], 0.0));
  }
  return {std::move(path), std::move(masses)};
}

std::vector<CsvTable> grid_ladder_tables(const GridLadderReport& rep) {
  CsvTable t;
  t.name = "ladder";
  for (const GridLadderLevel& lev : rep.levels) {
    for (const PotentialGap& g : lev.rows) {
      t.rows.push_back(row(stagef("m-%d", lev.m), g.id, g.lhs.value, g.lhs.sigma));
      t.rows.push_back(
          row(stagef("m-%d-diff", lev.m), g.id, g.diff, std::hypot(g.lhs.sigma, g.rhs.sigma)));
    }
  }
  for (const GridLadderLevel& lev : rep.levels) {
    if (lev.rows.empty()) continue;
    for (std::size_t i = 0; i < lev.rows.size(); ++i)
      t.rows.push_back(
          row("reference", lev.rows[i].id, rep.reference[i].value, rep.reference[i].sigma));
    break;
  }
  return {std::move(t)};
}

std::vector<CsvTable> theorem_tables(const TheoremReport& rep) {
  CsvTable grid;
  grid.name = "theorem_grid";
  for (const GridCheckRow& r : rep.grid_check) {
    grid.rows.push_back(row(stagef("set-%d", r.group), r.id, r.grid.value, r.grid.sigma));
    grid.rows.push_back(
        row(stagef("set-%d-diff", r.group), r.id, r.diff, std::hypot(r.grid.sigma, r.reference.sigma)));
  }
  CsvTable fin;
  fin.name = "theorem_final";
  for (const PotentialGap& g : rep.final_rows) {
    fin.rows.push_back(row("construction", g.id, g.lhs.value, g.lhs.sigma));
    fin.rows.push_back(row("target", g.id, g.rhs.value, g.rhs.sigma));
    fin.rows.push_back(row("difference", g.id, g.diff, std::hypot(g.lhs.sigma, g.rhs.sigma)));
  }
  return {std::move(grid), std::move(fin)};
}

std::vector<CsvTable> exit_mixture_tables(const ExitMixtureReport& rep) {
  CsvTable t;
  t.name = "mixture_ladder";
  for (const ExitMixtureLevel& lev : rep.levels) {
    for (const PotentialGap& g : lev.rows)
      t.rows.push_back(row(stagef("m-%d", lev.m), g.id, g.lhs.value, g.lhs.sigma));
    t.rows.push_back(row(stagef("m-%d", lev.m), "max-distance", lev.distance, lev.sigma));
  }
  for (const ExitMixtureLevel& lev : rep.levels) {
    for (std::size_t i = 0; i < lev.rows.size(); ++i)
      t.rows.push_back(row("limit", lev.rows[i].id, rep.limit[i].value, rep.limit[i].sigma));
    break;
  }
  return {std::move(t)};
}

std::vector<CsvTable> jensen_tables(const JensenReport& rep) {
  CsvTable t;
  t.name = "jensen";
  for (const JensenRow& r : rep.rows) {
    t.rows.push_back(row("exit-law", r.id, r.integral.value, r.integral.sigma));
    t.rows.push_back(row("at-x", r.id, r.at_x, 0.0));
  }
  for (const JensenGapRow& r : rep.gaps)
    t.rows.push_back(row("sphere-average", r.id, r.exact_average, 0.0));
  return {std::move(t)};
}

std::vector<CsvTable> skorokhod_tables(const SkorokhodReport& rep) {
  CsvTable t;
  t.name = "skorokhod";
  for (const PotentialGap& g : rep.distance.rows) {
    t.rows.push_back(row("kernel-chain", g.id, g.lhs.value, g.lhs.sigma));
    t.rows.push_back(row("path-simulation", g.id, g.rhs.value, g.rhs.sigma));
    t.rows.push_back(row("difference", g.id, g.diff, std::hypot(g.lhs.sigma, g.rhs.sigma)));
  }
  return {std::move(t)};
}

std::vector<CsvTable> harnack_tables(const HarnackReport& rep) {
  CsvTable ratios;
  ratios.name = "harnack_ratios";
  for (const HarnackRatioRow& r : rep.ratios) {
    const std::string stage = "delta-" + format_double(r.delta);
    ratios.rows.push_back(row(stage, "max-ratio", r.max_ratio, 0.0));
    ratios.rows.push_back(row(stage, "bound-eta", r.bound_eta, 0.0));
    ratios.rows.push_back(row(stage, "bound-delta", r.bound_delta, 0.0));
  }
  CsvTable swept;
  swept.name = "harnack_swept";
  for (const HarnackSweptRow& r : rep.swept) {
    const std::string stage = "delta-" + format_double(r.delta);
    swept.rows.push_back(row(stage, r.id + "/moved", r.moved.value, r.moved.sigma));
    swept.rows.push_back(row(stage, r.id + "/base", r.base.value, r.base.sigma));
  }
  return {std::move(ratios), std::move(swept)};
}

// ------------------------------ summaries ----------------------------------

namespace {

std::string flag(bool ok) { return ok ? "ok" : "FAILED"; }

void warn_lines(std::ostringstream& os, const std::vector<std::string>& warnings) {
  for (const std::string& w : warnings) os << "warning: " << w << "\n";
}

}  // namespace

std::string sweep_summary(const WeightedMeasure& out) {
  std::ostringstream os;
  const Estimate tot = total_mass_estimate(out);
  os << "swept mass " << format_double(tot.value) << " +- " << format_double(tot.sigma)
     << " (lost " << format_double(out.lost_mass()) << ")\n";
  os << "atoms: " << out.exact_count() << " exact + "
     << out.atoms().size() - out.exact_count() << " sampled from " << out.walk_count()
     << " walks\n";
  warn_lines(os, out.diagnostics().warnings);
  return os.str();
}

std::string shrink_summary(const ShrinkSolution& sol) {
  std::ostringstream os;
  os << "shrink solve: " << (sol.converged ? "converged" : "NOT CONVERGED") << " in "
     << sol.sweeps << " sweeps\n";
  os << "s =";
  for (double v : sol.s) os << " " << format_double(v);
  os << "\n";
  for (std::size_t i = 0; i < sol.s.size(); ++i)
    os << "  ball " << i << ": target " << format_double(sol.targets[i]) << " achieved "
       << format_double(sol.achieved[i].value) << " +- "
       << format_double(sol.achieved[i].sigma) << " (tol " << format_double(sol.tolerance[i])
       << ")\n";
  warn_lines(os, sol.warnings);
  return os.str();
}

std::string grid_ladder_summary(const GridLadderReport& rep) {
  std::ostringstream os;
  os << "lattice ladder, " << rep.levels.size() << " levels\n";
  for (const GridLadderLevel& lev : rep.levels)
    os << "  m=" << lev.m << ": " << lev.ball_count << " balls, max |diff| "
       << format_double(lev.max_abs_diff) << " (rel " << format_double(lev.max_rel_diff)
       << ")\n";
  os << "strictly decreasing: " << (rep.strictly_decreasing ? "yes" : "no") << "\n";
  os << "final max relative difference: " << format_double(rep.final_max_rel) << "\n";
  bool gate_ok = true;
  for (const MassGateRow& g : rep.gate) gate_ok = gate_ok && g.ok;
  os << "sweep monotonicity gate: " << flag(gate_ok) << "\n";
  warn_lines(os, rep.warnings);
  return os.str();
}

std::string theorem_summary(const TheoremReport& rep) {
  std::ostringstream os;
  os << "construction: k=" << rep.params.k << " eta=" << format_double(rep.params.eta)
     << " delta=" << format_double(rep.params.delta) << " N=" << rep.params.big_n
     << " a=" << format_double(rep.params.a) << " m=" << rep.params.m << "\n";
  os << "lattice balls: " << rep.grid_ball_count
     << ", lattice gate met: " << (rep.grid_check_met ? "yes" : "no") << "\n";
  os << "final weak distance " << format_double(rep.final_distance) << " vs gate "
     << format_double(rep.final_gate) << ": " << flag(rep.final_ok) << "\n";
  bool eq_ok = true;
  for (const EqualityRow& r : rep.equalities) eq_ok = eq_ok && r.ok;
  os << "per-ball equalities: " << flag(eq_ok) << "\n";
  bool bd_ok = true;
  for (const BoundaryGapRow& r : rep.boundary) bd_ok = bd_ok && r.nonneg_ok && r.bound_ok;
  os << "boundary gap bounds: " << flag(bd_ok) << "\n";
  bool rs_ok = true;
  for (const ResweepRow& r : rep.resweep) rs_ok = rs_ok && r.ok;
  os << "exit resweep agreement: " << flag(rs_ok) << "\n";
  bool gate_ok = true;
  for (const MassGateRow& g : rep.gate) gate_ok = gate_ok && g.ok;
  os << "sweep monotonicity gate: " << flag(gate_ok) << "\n";
  warn_lines(os, rep.warnings);
  return os.str();
}

std::string exit_mixture_summary(const ExitMixtureReport& rep) {
  std::ostringstream os;
  os << "exit-law mixture ladder, " << rep.levels.size() << " levels\n";
  for (const ExitMixtureLevel& lev : rep.levels)
    os << "  m=" << lev.m << ": distance " << format_double(lev.distance) << " +- "
       << format_double(lev.sigma) << ", containment " << flag(lev.containment_ok) << "\n";
  os << "distance decreasing: " << (rep.decreasing ? "yes" : "no") << "\n";
  warn_lines(os, rep.warnings);
  return os.str();
}

std::string jensen_summary(const JensenReport& rep) {
  std::ostringstream os;
  bool all_ok = true, eq_ok = true;
  for (const JensenRow& r : rep.rows) {
    all_ok = all_ok && r.jensen_ok;
    if (r.harmonic) eq_ok = eq_ok && r.equality_ok;
  }
  os << "superharmonic integral bound: " << flag(all_ok) << "\n";
  os << "harmonic mean-value equality: " << flag(eq_ok) << "\n";
  os << "support containment: " << flag(rep.support_ok) << " (violation "
     << format_double(rep.support_violation) << ")\n";
  for (const JensenGapRow& r : rep.gaps)
    os << "  sphere average " << r.id << ": average " << flag(r.average_ok) << ", strict gap "
       << flag(r.strict_gap_ok) << "\n";
  warn_lines(os, rep.warnings);
  return os.str();
}

std::string skorokhod_summary(const SkorokhodReport& rep) {
  std::ostringstream os;
  os << "kernel chain vs path simulation: distance " << format_double(rep.distance.value)
     << " +- " << format_double(rep.distance.sigma) << ": " << flag(rep.ok) << "\n";
  os << "hit mass: kernel " << format_double(rep.kernel_hit_mass.value) << ", path "
     << format_double(rep.path_hit_mass.value) << "\n";
  warn_lines(os, rep.warnings);
  return os.str();
}

std::string harnack_summary(const HarnackReport& rep) {
  std::ostringstream os;
  for (const HarnackRatioRow& r : rep.ratios)
    os << "delta " << format_double(r.delta) << ": max ratio " << format_double(r.max_ratio)
       << " vs bound " << format_double(r.bound_eta) << " (" << r.violations_eta
       << " violations over " << r.triples << " triples)\n";
  bool swept_ok = true;
  for (const HarnackSweptRow& r : rep.swept) swept_ok = swept_ok && r.ok;
  os << "swept comparison: " << flag(swept_ok) << "\n";
  bool id_ok = true;
  for (const HarnackIdentityRow& r : rep.identity) id_ok = id_ok && r.ok;
  os << "two-stage identity: " << flag(id_ok) << "\n";
  warn_lines(os, rep.warnings);
  return os.str();
}

void write_report_files(const std::string& out_dir, const ojson& machine,
                        const std::vector<CsvTable>& tables, const std::string& summary,
                        const std::string& format) {
  namespace fs = std::filesystem;
  fs::create_directories(out_dir);
  const bool want_json = format == "json" || format == "both";
  const bool want_csv = format == "csv" || format == "both";
  if (want_json) {
    std::ofstream f(fs::path(out_dir) / "report.json", std::ios::binary);
    f << machine.dump(2) << "\n";
  }
  if (want_csv) {
    for (const CsvTable& t : tables) {
      std::ofstream f(fs::path(out_dir) / (t.name + ".csv"), std::ios::binary);
      f << "stage,id,value,stderr\n";
      for (const auto& r : t.rows)
        f << csv_escape(r[0]) << "," << csv_escape(r[1]) << "," << csv_escape(r[2]) << ","
          << csv_escape(r[3]) << "\n";
    }
  }
  std::ofstream f(fs::path(out_dir) / "summary.txt", std::ios::binary);
  f << summary;
}

}  // namespace balayage
