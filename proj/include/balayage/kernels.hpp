#pragma once

#include <map>
#include <memory>
#include <mutex>

#include "balayage/geometry.hpp"
#include "balayage/rng.hpp"

namespace balayage {

/// Which isotropic kernel drives the chains: alpha == 2 is the classical
/// (Brownian / Newtonian) case, alpha in (0, min(2, d)) the stable one.
struct KernelSpec {
  int d = 3;
  double alpha = 2.0;

  static KernelSpec classical(int d);
  static KernelSpec riesz(int d, double alpha);
  bool classical_case() const { return alpha == 2.0; }
};

/// Exit density of the classical process from ball b started at interior
/// point y, evaluated at z on the sphere, w.r.t. normalized surface measure.
double classical_poisson_density(const Ball& b, const Point& y, const Point& z);

/// Exit density of the alpha-stable process from ball b started at interior
/// point y, evaluated at z strictly outside the closed ball, w.r.t. Lebesgue
/// measure.
double riesz_poisson_density(const Ball& b, const Point& y, const Point& z,
                             const KernelSpec& k);

/// Normalizing constant of the stable exit density, computed by quadrature
/// over the exit law from the ball center; cached per (d, alpha).
double riesz_constant(const KernelSpec& k);

/// Bound on sup_z rho_y(z)/rho_yt(z) over starts y, yt within eta * r of the
/// center: (1+eta)^{d-alpha/2} / (1-eta)^{d+alpha/2}.
double harnack_bound(double eta, const KernelSpec& k);

/// Uniform unit vector in R^d.
Point sample_sphere_uniform(std::size_t d, Rng& rng);

/// Draws exit points from balls for both kernels.  Center starts are
/// closed-form and lock-free (the walk hot path); general starts build
/// inverse-CDF tables on demand, cached per offset ratio.
class ExitSampler {
 public:
  explicit ExitSampler(KernelSpec k);

  const KernelSpec& kernel() const { return k_; }

  /// Displacement from the center of a ball of radius rho to an exit point,
  /// written into out (classical: on the sphere; stable: strictly outside).
  void step_from_center(double rho, Rng& rng, Point& out) const;

  /// Exit point from ball b for a general interior start y.
  Point sample(const Ball& b, const Point& y, Rng& rng) const;

 private:
  struct OffsetTable;

  const OffsetTable& table_for(double b_ratio) const;
  Point sample_center(const Ball& b, Rng& rng) const;

  KernelSpec k_;
  double beta_a_ = 0.0;  // stable radial law: Beta(1 - alpha/2, alpha/2)
  double beta_b_ = 0.0;
  mutable std::mutex mu_;
  mutable std::map<double, std::shared_ptr<const OffsetTable>> tables_;
};

/// One-shot exit draws (walk loops should hold an ExitSampler instead).
Point sample_exit_classical(const Ball& b, const Point& y, Rng& rng);
Point sample_exit_riesz(const Ball& b, const Point& y, const KernelSpec& k,
                        Rng& rng);

}  // namespace balayage
