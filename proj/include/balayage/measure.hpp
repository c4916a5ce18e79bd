#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "balayage/geometry.hpp"
#include "balayage/kernels.hpp"

namespace balayage {

/// Monte Carlo estimate with one standard error.
struct Estimate {
  double value = 0.0;
  double sigma = 0.0;
};

/// What ended the walk that produced an atom.  Source marks input atoms kept
/// exactly because they already lay in the stop set.
enum class StopCause : std::uint8_t { Source = 0, Ball = 1, Window = 2, OpenTarget = 3 };

struct Atom {
  Point x;
  double w = 0.0;
  int ball = -1;  // stop-ball index when cause == Ball
  StopCause cause = StopCause::Source;
};

struct Diagnostics {
  double escaped_mass = 0.0;
  double killed_mass = 0.0;
  double truncated_mass = 0.0;
  std::uint64_t truncated_walks = 0;
  std::uint64_t total_steps = 0;
  double escape_radius = 0.0;  // resolved value, 0 when unused
  double eps_shell = 0.0;      // resolved value, 0 for jump chains
  bool convergence_warning = false;
  std::vector<std::string> warnings;
};

/// Atomic measure: an exact prefix (fixed weights) followed by a Monte Carlo
/// suffix of equal-weight walk endpoints.  Weights plus lost mass add up to
/// the swept input mass; estimates treat missing walks as zero contributions.
class WeightedMeasure {
 public:
  WeightedMeasure() = default;

  /// Purely exact measure (configured inputs, merged results).
  static WeightedMeasure from_atoms(std::vector<Atom> atoms);
  static WeightedMeasure point_mass(Point x, double w = 1.0);
  /// Assembled chain output; atoms must hold the exact prefix first.
  static WeightedMeasure chain_output(std::vector<Atom> atoms, std::size_t exact_count,
                                      std::uint64_t walk_count, double mc_weight_per_walk,
                                      double lost_mass, double total_input,
                                      Diagnostics diag);

  const std::vector<Atom>& atoms() const { return atoms_; }
  std::size_t exact_count() const { return exact_count_; }
  std::uint64_t walk_count() const { return walk_count_; }
  double mc_weight_per_walk() const { return mc_weight_per_walk_; }
  double lost_mass() const { return lost_mass_; }
  double total_input() const { return total_input_; }
  const Diagnostics& diagnostics() const { return diag_; }
  bool is_exact() const { return walk_count_ == 0; }

  double total_mass() const;
  /// Keep atoms matching the predicate; dropped mass moves to lost_mass so
  /// conservation and the walk-count variance bookkeeping stay valid.
  WeightedMeasure restricted(const std::function<bool(const Atom&)>& keep) const;
  /// Throws StructuralError when weights + lost mass drift from total input.
  void check_conservation() const;

 private:
  std::vector<Atom> atoms_;
  std::size_t exact_count_ = 0;
  std::uint64_t walk_count_ = 0;
  double mc_weight_per_walk_ = 0.0;
  double lost_mass_ = 0.0;
  double total_input_ = 0.0;
  Diagnostics diag_;
};

/// Mass the measure puts on a closed ball (relative tolerance on the
/// boundary so projected chain endpoints are counted).
Estimate mass_on(const WeightedMeasure& m, const Ball& b);
/// Total atom mass with the Monte Carlo standard error.
Estimate total_mass_estimate(const WeightedMeasure& m);

/// Nonnegative superharmonic-type test functions for weak comparisons.
class Potential {
 public:
  enum class Kind { RieszKernel, NewtonKernel, GreenBall, Bump };

  static Potential riesz_kernel(Point pole, double alpha, double scale = 1.0,
                                std::optional<double> cap = std::nullopt);
  static Potential newton_kernel(Point pole, double scale = 1.0,
                                 std::optional<double> cap = std::nullopt);
  static Potential green_ball(Ball domain, Point pole, double scale = 1.0,
                              std::optional<double> cap = std::nullopt);
  static Potential bump(Point center, double radius, double scale = 1.0);

  /// Evaluate; throws ParameterError on an uncapped pole hit.  If capped is
  /// given it is set when the cap was active at x.
  double eval(const Point& x, bool* capped = nullptr) const;
  double operator()(const Point& x) const { return eval(x); }

  Kind kind() const { return kind_; }
  const Point& pole() const { return pole_; }
  double scale() const { return scale_; }
  std::optional<double> cap() const { return cap_; }
  double alpha() const { return alpha_; }
  const std::optional<Ball>& domain_ball() const { return domain_ball_; }
  std::size_t dimension() const { return pole_.size(); }

  /// Eligible for the sweep-decreases-superharmonic-integrals audit: the
  /// function must be superharmonic for this chain kernel on this domain.
  bool mass_gate_eligible(const KernelSpec& k, const DomainSpec& domain) const;

  std::string id;  // report label

 private:
  Potential() = default;
  Kind kind_ = Kind::NewtonKernel;
  Point pole_;
  double scale_ = 1.0;
  double alpha_ = 2.0;
  std::optional<double> cap_;
  std::optional<Ball> domain_ball_;  // GreenBall domain, Bump support
};

struct IntegrateStats {
  std::uint64_t capped_evals = 0;
};

/// Integral of q against the measure with the walk-level standard error.
Estimate integrate(const WeightedMeasure& m, const Potential& q,
                   IntegrateStats* stats = nullptr);

struct DictionaryEntry {
  Potential q;
  bool allow_gate = true;  // opt-out for the mass gate audit
};

/// Finite family of test potentials; weak distances are maxima over it.
struct Dictionary {
  std::vector<DictionaryEntry> members;
  std::optional<Potential> reference;  // the dominating potential p
  double bound_multiple = 0.0;         // declared sup q / p over the region
};

/// Samples the region and checks q <= bound_multiple * p for every member.
void validate_dictionary(const Dictionary& dict, const OpenSet& region,
                         std::size_t samples, Rng& rng);

struct PotentialGap {
  std::string id;
  Estimate lhs;
  Estimate rhs;
  double diff = 0.0;  // lhs.value - rhs.value
};

struct WeakDistanceReport {
  double value = 0.0;  // max |diff| over the dictionary
  double sigma = 0.0;  // combined sigma at the maximizing member
  std::vector<PotentialGap> rows;
};

WeakDistanceReport weak_distance(const WeightedMeasure& m1, const WeightedMeasure& m2,
                                 const Dictionary& dict);

}  // namespace balayage
