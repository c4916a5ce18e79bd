#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "balayage/shrink.hpp"

namespace balayage {

/// One sweep-monotonicity audit entry: the integral of an eligible potential
/// must not increase under balayage beyond Monte Carlo noise.
struct MassGateRow {
  std::string id;
  std::string stage;
  double before = 0.0;
  double after = 0.0;
  double sigma = 0.0;  // combined
  bool ok = false;
};

// ---------------------------------------------------------------------------
// Grid ladder: balayage onto an open set approximated by lattice balls.

struct LadderSpec {
  Point offset;            // lattice offset x0
  double a = 0.3;          // radius scale in (0,1)
  std::vector<int> levels; // strictly increasing resolutions
};

struct GridLadderLevel {
  int m = 0;
  std::size_t ball_count = 0;
  std::vector<PotentialGap> rows;  // lattice estimate vs direct reference
  double max_abs_diff = 0.0;
  double max_rel_diff = 0.0;
  double lost_mass = 0.0;
};

struct GridLadderReport {
  std::vector<Estimate> reference;      // direct open-set sweep, per member
  std::vector<double> base;             // relative scale: reference integral of q
  std::vector<GridLadderLevel> levels;
  std::vector<bool> member_decreasing;  // per member: |diff| strictly falls
  bool strictly_decreasing = false;     // all members
  double final_max_rel = 0.0;
  std::vector<MassGateRow> gate;
  std::vector<std::string> warnings;
};

/// Sweeps nu onto A_m union W^c along the ladder and compares dictionary
/// integrals with the direct sweep onto U union W^c.
GridLadderReport approximate_open_balayage(const WeightedMeasure& nu, const OpenSet& u,
                                           const std::optional<OpenSet>& window,
                                           const DomainSpec& domain, const LadderSpec& ladder,
                                           const Dictionary& dict, const KernelSpec& k,
                                           const McParams& mc);

// ---------------------------------------------------------------------------
// Main construction: one ball union C realizing a convex combination of
// balayage measures onto U_n union W^c.

struct TheoremInputs {
  WeightedMeasure nu;           // exact atoms, all inside W
  OpenSet window;               // bounded W
  std::vector<OpenSet> u_sets;  // open sets with compact closure in W
  std::vector<double> lambda;   // simplex weights
  Dictionary dict;              // members bounded by the reference potential
  KernelSpec kernel = KernelSpec::classical(3);
  DomainSpec domain;
};

struct TheoremOptions {
  double eta = 0.5;
  int m_start = 6;                  // first lattice resolution tried
  int max_m_doublings = 4;
  std::size_t max_grid_balls = 30000;
  std::size_t modulus_pairs = 2000; // oscillation samples per halving step
  std::uint64_t seed = 1;           // drives the derived per-stage streams
  McParams mc;                      // references and final sweeps
  McParams mc_grid;                 // lattice-vs-open checks and group sweeps
  McParams mc_solver;               // shrink evaluations
  ShrinkConfig shrink;
};

struct TheoremParams {
  int k = 0;
  double eta = 0.0;
  double nu_p = 0.0;          // exact integral of the reference potential
  double delta = 0.0;
  double delta_prime = 0.0;
  std::size_t big_n = 0;      // offset count N
  double a = 0.0;
  int m = 0;                  // accepted lattice resolution
  std::vector<int> selected_j;
};

struct OffsetRow {  // lattice-offset selection: nu(1_Z p) per candidate
  int j = 0;
  double p_mass = 0.0;
  bool selected = false;
};

struct GridCheckRow {  // lattice sweep vs direct sweep, per set and member
  int group = 0;
  int j = 0;
  std::string id;
  Estimate grid;
  Estimate reference;
  double diff = 0.0;
  bool ok = false;  // |diff| < delta/2 + 3 sigma and sigma < delta/4
};

struct EqualityRow {  // per-ball (1-delta)-target equality from the solver
  std::size_t ball = 0;
  double target = 0.0;
  double achieved = 0.0;
  double sigma = 0.0;
  double tol = 0.0;
  bool ok = false;
};

struct BoundaryGapRow {  // boundary-part gap rho per member
  std::string id;
  double value = 0.0;
  double sigma = 0.0;
  double bound = 0.0;  // 2 nu(p) delta
  bool nonneg_ok = false;
  bool bound_ok = false;
};

struct ResweepRow {  // further sweep onto W^c vs direct nu^{W^c}
  std::string id;
  Estimate lhs;
  Estimate rhs;
  double diff = 0.0;
  double slack = 0.0;  // delta budget added to 3 sigma
  bool ok = false;
};

struct TheoremReport {
  TheoremParams params;
  DeltaFamilyReport family;
  std::vector<OffsetRow> selection;
  std::vector<GridCheckRow> grid_check;
  bool grid_check_met = false;
  std::size_t grid_ball_count = 0;
  double removed_p_mass = 0.0;  // (nu - nu~)(p), exact
  double removed_bound = 0.0;   // k delta
  ShrinkSolution shrink;
  std::vector<EqualityRow> equalities;
  std::vector<PotentialGap> final_rows;
  double final_distance = 0.0;
  double final_sigma = 0.0;
  double final_gate = 0.0;  // eta + 3 sigma at the maximizing member
  bool final_ok = false;
  std::vector<BoundaryGapRow> boundary;
  std::vector<ResweepRow> resweep;
  std::vector<MassGateRow> gate;
  std::vector<double> s;
  BallUnion c_balls;
  std::vector<std::string> warnings;
};

TheoremReport run_theorem_pipeline(const TheoremInputs& in, const TheoremOptions& opt);

// ---------------------------------------------------------------------------
// Exit-law mixtures: for nu inside the intersection of balls U_n, realize
// sum lambda_n nu^{U_n^c} as a ladder of single-union constructions with the
// balls constrained to a (1/m)-neighborhood of (union minus intersection).

struct ExitMixtureLevel {
  int m = 0;
  TheoremReport run;
  std::vector<PotentialGap> rows;  // realized measure vs limit mixture
  double distance = 0.0;
  double sigma = 0.0;
  bool containment_ok = false;  // every C ball in the required neighborhood
};

struct ExitMixtureReport {
  std::vector<Estimate> limit;  // dictionary integrals of the limit mixture
  std::vector<ExitMixtureLevel> levels;
  bool decreasing = false;  // last level distance below first
  std::vector<MassGateRow> gate;  // limit-target sweeps (levels carry their own)
  std::vector<std::string> warnings;
};

ExitMixtureReport run_exit_mixture_ladder(const WeightedMeasure& nu,
                                          const std::vector<Ball>& u_balls,
                                          const std::vector<double>& lambda,
                                          const std::vector<int>& levels, const Dictionary& dict,
                                          const KernelSpec& k, const DomainSpec& domain,
                                          const TheoremOptions& opt);

// ---------------------------------------------------------------------------
// Jensen-type demo: the exit law from the interior of a ball union never
// raises superharmonic integrals.

struct JensenRow {
  std::string id;
  Estimate integral;       // against the exit law
  double at_x = 0.0;       // member value at the start point
  bool harmonic = false;   // pole outside the closed union
  bool jensen_ok = false;  // integral <= value + 3 sigma
  bool equality_ok = false;  // harmonic members only: |difference| <= 3 sigma
};

struct JensenGapRow {  // single-ball sharp case: exact sphere average
  std::string id;
  Estimate integral;
  double exact_average = 0.0;
  double at_x = 0.0;
  bool average_ok = false;  // integral matches the exact average at 3 sigma
  bool strict_gap_ok = false;  // value exceeds the average beyond 3 sigma
};

struct JensenReport {
  std::vector<JensenRow> rows;
  std::vector<JensenGapRow> gaps;
  bool support_ok = false;
  double support_violation = 0.0;  // largest exit distance of an atom
  std::vector<std::string> warnings;
};

JensenReport jensen_demo(const Point& x, const BallUnion& a, const DomainSpec& domain,
                         const Dictionary& dict, const KernelSpec& k, const McParams& mc);

// ---------------------------------------------------------------------------
// Path-simulation cross-check of the kernel chains.

struct PathParams {
  std::size_t samples = 50000;
  double dt_scale = 0.2;       // Euler step sqrt(dt) = dt_scale * distance
  double switch_factor = 64.0; // Euler below switch_factor * eps distance
  double ball_factor = 0.5;    // jump-chain ball policy (stable case)
  double eps_shell = 0.0;      // 0: engine default
  double escape_radius = 0.0;  // 0: engine default
  std::size_t max_steps = 200000;
  std::uint64_t seed = 1;
  int workers = 0;
};

struct SkorokhodReport {
  WeakDistanceReport distance;  // path estimator vs kernel chain
  bool ok = false;              // distance within 3 combined sigma
  Estimate kernel_hit_mass;
  Estimate path_hit_mass;
  double path_escaped_mass = 0.0;
  double path_truncated_mass = 0.0;
  std::vector<std::string> warnings;
};

SkorokhodReport skorokhod_demo(const WeightedMeasure& nu, const BallUnion& c,
                               const DomainSpec& domain, const Dictionary& dict,
                               const KernelSpec& k, const McParams& mc,
                               const PathParams& path);

// ---------------------------------------------------------------------------
// Exit-density ratio bounds and their swept-measure consequences.

struct HarnackRatioRow {
  double delta = 0.0;
  double eta = 0.0;        // delta / 3d
  double bound_eta = 0.0;  // closed-form two-pole ratio bound
  double bound_delta = 0.0;  // 1 + delta
  double max_ratio = 0.0;
  std::uint64_t violations_eta = 0;
  std::uint64_t violations_delta = 0;
  std::uint64_t triples = 0;
};

struct HarnackSweptRow {  // dictionary integrals of eps_y~^A vs (1+delta) eps_y^A
  double delta = 0.0;
  std::string id;
  Estimate moved;   // started at y~
  Estimate base;    // started at y
  double slack = 0.0;
  bool ok = false;
};

struct HarnackIdentityRow {  // two-stage sweep through the exit law vs direct
  std::string id;
  Estimate two_stage;
  Estimate direct;
  double sigma = 0.0;
  bool ok = false;
};

struct HarnackReport {
  std::vector<HarnackRatioRow> ratios;
  std::vector<HarnackSweptRow> swept;
  std::vector<HarnackIdentityRow> identity;
  std::vector<std::string> warnings;
};

HarnackReport harnack_audit(const KernelSpec& k, const std::vector<double>& deltas,
                            std::size_t triples, const McParams& mc);

}  // namespace balayage
