#include "balayage/shrink.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <utility>

#include "balayage/errors.hpp"

namespace balayage {
namespace {

// Full mass vector at shrink vector s, common-random-numbers stream.
std::vector<Estimate> eval_masses(const ShrinkProblem& p, const std::vector<double>& s,
                                  std::uint64_t seed) {
  StopSet stop(p.family.balls.shrunk(s), std::nullopt, p.window, p.family.domain);
  McParams mc = p.mc;
  mc.seed = seed;
  return sweep_mass_vector(p.source, stop, p.kernel, mc);
}

void validate_problem(const ShrinkProblem& p, std::size_t caps_size) {
  const std::size_t m = p.family.balls.size();
  if (m == 0) throw StructuralError("shrink: empty ball family");
  if (caps_size != m) throw ParameterError("shrink: cap vector has wrong size");
  for (const Atom& a : p.source.atoms()) {
    if (p.family.balls.find(a.x) >= 0)
      throw StructuralError("shrink: source measure charges the ball union");
  }
  const DeltaFamilyReport family =
      p.window
          ? validate_delta_family(p.family.balls, p.family.delta, p.kernel.alpha, *p.window)
          : validate_delta_family(p.family.balls, p.family.delta, p.kernel.alpha,
                                  p.family.domain);
  if (!family.valid)
    throw StructuralError("shrink: ball radii violate the small-radius family condition");
}

std::string format_warning(const char* fmt, std::size_t ball) {
  char buf[128];
  std::snprintf(buf, sizeof(buf), fmt, static_cast<unsigned long>(ball));
  return std::string(buf);
}

ShrinkSolution solve_core(const ShrinkProblem& p, const std::vector<double>& caps,
                          const std::vector<double>& extra_tol, bool targets_attainable) {
  validate_problem(p, caps.size());
  const std::size_t m = caps.size();
  for (std::size_t i = 0; i < m; ++i) {
    if (!(caps[i] >= 0.0) || !std::isfinite(caps[i]))
      throw ParameterError("shrink: caps must be finite and nonnegative");
  }
  const ShrinkConfig& cfg = p.cfg;
  const double scale = p.source.total_mass();

  ShrinkSolution sol;
  sol.targets = caps;
  sol.s.assign(m, 1.0);
  // Point balls capture nothing and stay put; a zero cap on a real ball can
  // only be met by removing it.
  std::vector<bool> fixed(m, false);
  for (std::size_t i = 0; i < m; ++i) {
    if (p.family.balls[i].radius <= 0.0) {
      fixed[i] = true;
    } else if (caps[i] <= 0.0) {
      sol.s[i] = 0.0;
      fixed[i] = true;
    }
  }

  std::vector<Estimate> masses = eval_masses(p, sol.s, p.mc.seed);
  auto tol_at = [&](std::size_t i) {
    double t = std::max(cfg.tol_mass_rel * scale, 3.0 * masses[i].sigma);
    if (!extra_tol.empty()) t = std::max(t, extra_tol[i]);
    return t;
  };
  auto all_feasible = [&]() {
    for (std::size_t i = 0; i < m; ++i)
      if (masses[i].value > caps[i] + tol_at(i)) return false;
    return true;
  };
  auto note_feasible = [&]() {
    if (!all_feasible() || sol.feasible_points.size() >= 16) return;
    for (const auto& prev : sol.feasible_points) {
      double gap = 0.0;
      for (std::size_t i = 0; i < m; ++i) gap = std::max(gap, std::abs(prev[i] - sol.s[i]));
      if (gap < 0.5 * cfg.tol_s) return;
    }
    sol.feasible_points.push_back(sol.s);
  };
  note_feasible();

  for (int sweep = 1; sweep <= cfg.max_sweeps; ++sweep) {
    sol.sweeps = sweep;
    double max_move = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
      if (fixed[i]) continue;
      double tol = tol_at(i);
      const bool over = masses[i].value > caps[i] + tol;
      const bool slack = sol.s[i] < 1.0 - 1e-15 && masses[i].value < caps[i] - tol;
      if (!over && !slack) continue;

      const double s_old = sol.s[i];
      double lo = over ? 0.0 : sol.s[i];
      double hi = over ? sol.s[i] : 1.0;
      for (int it = 0; it < cfg.bisection_depth; ++it) {
        sol.s[i] = 0.5 * (lo + hi);
        masses = eval_masses(p, sol.s, p.mc.seed);
        tol = tol_at(i);
        if (std::abs(masses[i].value - caps[i]) <= tol) break;
        if (masses[i].value > caps[i])
          hi = sol.s[i];
        else
          lo = sol.s[i];
        if (hi - lo < 0.25 * cfg.tol_s) break;
      }
      if (masses[i].value > caps[i] + tol) {
        // End the coordinate on its feasible side.
        sol.s[i] = lo;
        masses = eval_masses(p, sol.s, p.mc.seed);
      }
      max_move = std::max(max_move, std::abs(sol.s[i] - s_old));
      sol.trace.push_back({sweep, static_cast<int>(i), sol.s[i], masses[i].value, caps[i]});
    }
    note_feasible();
    if (max_move < cfg.tol_s) {
      sol.converged = all_feasible();
      break;
    }
  }

  sol.achieved = masses;
  sol.tolerance.resize(m);
  for (std::size_t i = 0; i < m; ++i) sol.tolerance[i] = tol_at(i);
  if (!sol.converged)
    sol.warnings.push_back("shrink: sweep iteration stopped before convergence");

  if (targets_attainable) {
    // Positive targets must bind: a coordinate stuck at full radius means the
    // cap was not reachable, which the joint construction rules out.
    for (std::size_t i = 0; i < m; ++i) {
      if (fixed[i] || sol.s[i] < 1.0 - 1e-12 || caps[i] <= sol.tolerance[i]) continue;
      if (masses[i].value < caps[i] - sol.tolerance[i] - 3.0 * masses[i].sigma)
        throw SolverError(format_warning("shrink: target exceeds full-radius mass on ball %lu", i));
      sol.warnings.push_back(
          format_warning("shrink: ball %lu meets its target only at full radius", i));
    }
  }

  sol.independent = eval_masses(p, sol.s, p.mc.seed + cfg.check_seed_offset);
  for (std::size_t i = 0; i < m; ++i) {
    double tol = std::max(cfg.tol_mass_rel * scale, 3.0 * sol.independent[i].sigma);
    if (!extra_tol.empty()) tol = std::max(tol, extra_tol[i]);
    if (sol.independent[i].value > caps[i] + tol)
      sol.warnings.push_back(
          format_warning("shrink: independent revalidation exceeds the cap on ball %lu", i));
  }
  return sol;
}

void validate_joint(const ShrinkProblem& p) {
  const std::size_t m = p.family.balls.size();
  const std::size_t k = p.lambda.size();
  if (k == 0) throw ParameterError("shrink: joint mode needs group weights");
  if (p.partition.size() != m) throw ParameterError("shrink: partition size mismatch");
  for (int g : p.partition) {
    if (g < 0 || static_cast<std::size_t>(g) >= k)
      throw ParameterError("shrink: partition entry out of range");
  }
  double sum = 0.0;
  for (double l : p.lambda) {
    if (!(l >= 0.0)) throw ParameterError("shrink: negative group weight");
    sum += l;
  }
  if (std::abs(sum - 1.0) > 1e-9)
    throw ParameterError("shrink: group weights must sum to one");
  if (!(p.family.delta >= 0.0 && p.family.delta < 1.0))
    throw ParameterError("shrink: delta must lie in [0, 1)");
}

// (1 - delta) * lambda_g * (group-only swept mass), optionally scaled by beta.
std::pair<std::vector<double>, std::vector<double>> joint_targets(
    const ShrinkProblem& p, const std::vector<double>* beta) {
  validate_joint(p);
  const std::size_t m = p.family.balls.size();
  const std::size_t k = p.lambda.size();
  if (beta != nullptr) {
    if (beta->size() != m) throw ParameterError("shrink: beta vector has wrong size");
    for (double b : *beta)
      if (!(b >= 0.0 && b <= 1.0)) throw ParameterError("shrink: beta entries must lie in [0, 1]");
  }
  const double off = 1.0 - p.family.delta;

  std::vector<double> caps(m, 0.0), extra(m, 0.0);
  for (std::size_t n = 0; n < k; ++n) {
    std::vector<std::size_t> members;
    std::vector<Ball> group;
    for (std::size_t i = 0; i < m; ++i) {
      if (p.partition[i] == static_cast<int>(n)) {
        members.push_back(i);
        group.push_back(p.family.balls[i]);
      }
    }
    if (members.empty() || p.lambda[n] == 0.0) continue;
    StopSet stop(BallUnion(group), std::nullopt, p.window, p.family.domain);
    McParams mc = p.mc;
    mc.samples = p.mc.samples * 2;  // targets are frozen, buy them extra accuracy
    mc.seed = p.mc.seed + 0x517cc1b7UL * (n + 1);
    std::vector<Estimate> mass = sweep_mass_vector(p.source, stop, p.kernel, mc);
    for (std::size_t j = 0; j < members.size(); ++j) {
      const double b = beta ? (*beta)[members[j]] : 1.0;
      caps[members[j]] = off * p.lambda[n] * b * mass[j].value;
      extra[members[j]] = 3.0 * off * p.lambda[n] * b * mass[j].sigma;
    }
  }
  return {std::move(caps), std::move(extra)};
}

}  // namespace

ShrinkSolution solve_max_shrink(const ShrinkProblem& problem, const std::vector<double>& caps) {
  return solve_core(problem, caps, {}, false);
}

ShrinkSolution fraction_shrink(const ShrinkProblem& problem, const std::vector<double>& beta) {
  validate_problem(problem, beta.size());
  for (double b : beta)
    if (!(b >= 0.0 && b <= 1.0)) throw ParameterError("shrink: beta entries must lie in [0, 1]");
  std::vector<double> ones(problem.family.balls.size(), 1.0);
  McParams mc = problem.mc;
  mc.samples = problem.mc.samples * 2;
  mc.seed = problem.mc.seed + 0x2545f491UL;
  StopSet stop(problem.family.balls, std::nullopt, problem.window, problem.family.domain);
  std::vector<Estimate> full = sweep_mass_vector(problem.source, stop, problem.kernel, mc);

  const std::size_t m = beta.size();
  std::vector<double> caps(m), extra(m);
  for (std::size_t i = 0; i < m; ++i) {
    caps[i] = beta[i] * full[i].value;
    extra[i] = 3.0 * beta[i] * full[i].sigma;
  }
  return solve_core(problem, caps, extra, true);
}

ShrinkSolution joint_shrink(const ShrinkProblem& problem) {
  auto [caps, extra] = joint_targets(problem, nullptr);
  return solve_core(problem, caps, extra, true);
}

ShrinkSolution joint_shrink_scaled(const ShrinkProblem& problem, const std::vector<double>& beta) {
  auto [caps, extra] = joint_targets(problem, &beta);
  return solve_core(problem, caps, extra, true);
}

}  // namespace balayage
