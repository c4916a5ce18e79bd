#pragma once

#include <cstdint>
#include <functional>
#include <vector>

namespace balayage {

/// Adaptive Gauss-Kronrod (7/15) quadrature on [a,b].
/// Integrable endpoint singularities should be substituted away by the caller.
double adaptive_quad(const std::function<double(double)>& f, double a, double b,
                     double tol, int max_depth = 48);

/**
 * Monotone CDF of a 1-D density on [a,b], tabulated on a uniform grid and
 * invertible by bisection plus Newton refinement against the density.
 * Used by the exit-law samplers; grid size controls the Kolmogorov error.
 */
class CdfTable {
 public:
  CdfTable() = default;
  CdfTable(const std::function<double(double)>& density, double a, double b, int cells);

  double total() const { return total_; }
  // u in [0,1) -> x with F(x) = u * total (normalized inversion)
  double invert(double u) const;
  // normalized F(x) in [0,1]
  double cdf(double x) const;

 private:
  std::vector<double> x_;    // grid nodes
  std::vector<double> cum_;  // cumulative integral up to node
  std::vector<double> pdf_;  // density at nodes
  double total_ = 0.0;
};

/// log of the Euler beta function B(a,b), a,b > 0.
double log_beta(double a, double b);

/// Regularized incomplete beta I_x(a,b) for x in [0,1], a,b > 0.
double reg_inc_beta(double x, double a, double b);

/// Inverse of I_x(a,b) in x for u in [0,1].
double reg_inc_beta_inv(double u, double a, double b);

/// Surface measure of the unit sphere in R^d (2 pi^{d/2} / Gamma(d/2); 2 for d = 1).
double sphere_area(int d);

struct RunningStat {
  double sum = 0.0;
  double sum_sq = 0.0;
  std::uint64_t n = 0;

  void add(double v) {
    sum += v;
    sum_sq += v * v;
    ++n;
  }
  double mean() const { return n ? sum / static_cast<double>(n) : 0.0; }
  // standard error of the mean
  double stderr_mean() const;
};

}  // namespace balayage
