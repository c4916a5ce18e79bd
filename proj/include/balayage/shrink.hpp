#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "balayage/engine.hpp"

namespace balayage {

struct ShrinkConfig {
  double tol_s = 1e-3;            // coordinate convergence threshold
  double tol_mass_rel = 2e-3;     // mass tolerance relative to the swept input
  int bisection_depth = 20;
  int max_sweeps = 12;
  std::uint64_t check_seed_offset = 1000003;  // revalidation stream offset
};

/// Inputs of the monotone shrink solves.  The source measure must not charge
/// the ball union; chains stop on the shrunk union plus the window complement
/// when a window is present.
struct ShrinkProblem {
  DeltaFamily family;
  std::optional<OpenSet> window;
  WeightedMeasure source;
  std::vector<int> partition;     // ball -> group, joint modes only
  std::vector<double> lambda;     // group weights, joint modes only
  KernelSpec kernel = KernelSpec::classical(3);
  McParams mc;
  ShrinkConfig cfg;
};

struct SweepLogEntry {
  int sweep = 0;
  int ball = 0;
  double s = 0.0;
  double mass = 0.0;
  double target = 0.0;
};

struct ShrinkSolution {
  std::vector<double> s;
  std::vector<double> targets;
  std::vector<Estimate> achieved;     // masses at the returned s, solver stream
  std::vector<Estimate> independent;  // same masses on a fresh seed
  std::vector<double> tolerance;      // per-ball absolute mass tolerances
  std::vector<SweepLogEntry> trace;
  std::vector<std::vector<double>> feasible_points;  // visited feasible vectors
  int sweeps = 0;
  bool converged = false;
  std::vector<std::string> warnings;
};

/// Largest componentwise shrink vector with every ball's swept mass at most
/// its cap (coordinates with slack stay at 1).
ShrinkSolution solve_max_shrink(const ShrinkProblem& problem,
                                const std::vector<double>& caps);

/// Caps set to beta_i times the full-union masses.
ShrinkSolution fraction_shrink(const ShrinkProblem& problem,
                               const std::vector<double>& beta);

/// Caps set to (1 - delta) * lambda_{g(i)} * (mass of ball i under the sweep
/// onto its own group alone); realizes the convex combination of group sweeps.
ShrinkSolution joint_shrink(const ShrinkProblem& problem);

/// Joint targets additionally scaled per ball by beta_i.
ShrinkSolution joint_shrink_scaled(const ShrinkProblem& problem,
                                   const std::vector<double>& beta);

}  // namespace balayage
