#pragma once

#include <cstdint>
#include <optional>

#include "balayage/geometry.hpp"
#include "balayage/kernels.hpp"
#include "balayage/measure.hpp"

namespace balayage {

/// Where chains stop: a closed ball union, optionally an open target set
/// (stop on entering it), optionally a window W (stop on leaving it), all
/// inside the state domain X.
struct StopSet {
  BallUnion balls;
  std::optional<OpenSet> open_target;
  std::optional<OpenSet> window;
  DomainSpec domain;

  StopSet(BallUnion b, DomainSpec dom);
  StopSet(BallUnion b, std::optional<OpenSet> target, std::optional<OpenSet> win,
          DomainSpec dom);
};

/// Monte Carlo controls.  Zero values request automatic resolution:
/// eps_shell from the smallest stop feature, escape_radius from the
/// transient-return bound.
struct McParams {
  std::size_t samples = 200000;
  double eps_shell = 0.0;
  double escape_radius = 0.0;
  std::size_t max_steps = 10000;
  std::uint64_t seed = 1;
  int workers = 0;  // 0: hardware concurrency
};

/// Swept measure of nu onto the stop set: input atoms already in the stop
/// set are kept exactly, the rest drive equal-weight chains.
WeightedMeasure balayage_measure(const WeightedMeasure& nu, const StopSet& stop,
                                 const KernelSpec& k, const McParams& mc);

/// Swept unit point mass.
WeightedMeasure balayage_point(const Point& x, const StopSet& stop,
                               const KernelSpec& k, const McParams& mc);

/// Per-stop-ball masses of the swept measure, without storing atoms.
std::vector<Estimate> sweep_mass_vector(const WeightedMeasure& nu, const StopSet& stop,
                                        const KernelSpec& k, const McParams& mc);

/// Total mass swept onto the ball union from x (the hitting probability when
/// the domain is transient).
Estimate hit_probability(const Point& x, const BallUnion& a, const DomainSpec& domain,
                         const KernelSpec& k, const McParams& mc);

/// nu restricted to the closed union plus the swept remainder.
WeightedMeasure reduced_measure_closed(const WeightedMeasure& nu, const BallUnion& a,
                                       const DomainSpec& domain, const KernelSpec& k,
                                       const McParams& mc);

}  // namespace balayage
