#include "balayage/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <utility>

#include "balayage/errors.hpp"
#include "balayage/numerics.hpp"

namespace balayage {

namespace {

void check_kernel(const KernelSpec& k) {
  if (k.alpha == 2.0) {
    if (k.d < 2) throw ParameterError("kernel: classical case needs d >= 2");
    return;
  }
  if (k.d < 1) throw ParameterError("kernel: dimension must be >= 1");
  if (!(k.alpha > 0.0 && k.alpha < 2.0 && k.alpha < k.d))
    throw ParameterError("kernel: stable index must satisfy 0 < alpha < min(2, d)");
}

}  // namespace

KernelSpec KernelSpec::classical(int d) {
  KernelSpec k{d, 2.0};
  check_kernel(k);
  return k;
}

KernelSpec KernelSpec::riesz(int d, double alpha) {
  if (alpha == 2.0) throw ParameterError("kernel: alpha == 2 is the classical case");
  KernelSpec k{d, alpha};
  check_kernel(k);
  return k;
}

double classical_poisson_density(const Ball& b, const Point& y, const Point& z) {
  const double r = b.radius;
  const double e = dist(y, b.center);
  if (!(e < r)) throw ParameterError("poisson density: start must be interior");
  const double zr = dist(z, b.center);
  if (std::abs(zr - r) > 1e-9 * r)
    throw ParameterError("poisson density: evaluation point must lie on the sphere");
  const int d = static_cast<int>(b.dimension());
  return std::pow(r, d - 2) * (r * r - e * e) / std::pow(dist(y, z), d);
}

double riesz_poisson_density(const Ball& b, const Point& y, const Point& z,
                             const KernelSpec& k) {
  check_kernel(k);
  if (k.classical_case())
    throw ParameterError("riesz_poisson_density: stable kernel required");
  const double r = b.radius;
  const double e = dist(y, b.center);
  if (!(e < r)) throw ParameterError("exit density: start must be interior");
  const double zr = dist(z, b.center);
  if (!(zr > r)) throw ParameterError("exit density: evaluation point must be outside the closed ball");
  const double a = riesz_constant(k);
  const double half = 0.5 * k.alpha;
  return a * std::pow(r * r - e * e, half) * std::pow(zr * zr - r * r, -half) *
         std::pow(dist(y, z), -static_cast<double>(k.d));
}

double riesz_constant(const KernelSpec& k) {
  check_kernel(k);
  if (k.classical_case())
    throw ParameterError("riesz_constant: stable kernel required");
  static std::mutex mu;
  static std::map<std::pair<int, double>, double> cache;
  {
    std::scoped_lock lock(mu);
    auto it = cache.find({k.d, k.alpha});
    if (it != cache.end()) return it->second;
  }
  const double alpha = k.alpha;
  // Radial normalization Q = int_1^inf (R^2-1)^{-alpha/2} / R dR, split and
  // substituted so both pieces have smooth integrands.
  // R in [1,2]: t = sqrt(R-1), then u = t^{2-alpha}.
  const double q1 = adaptive_quad(
      [alpha](double u) {
        const double t = std::pow(u, 1.0 / (2.0 - alpha));
        const double t2 = t * t;
        return 2.0 / (2.0 - alpha) * std::pow(2.0 + t2, -0.5 * alpha) / (1.0 + t2);
      },
      0.0, 1.0, 1e-11);
  // R in [2,inf): v = 1/R, then u = v^alpha.
  const double q2 = adaptive_quad(
      [alpha](double u) {
        const double v = std::pow(u, 1.0 / alpha);
        return std::pow(1.0 - v * v, -0.5 * alpha) / alpha;
      },
      0.0, std::pow(0.5, alpha), 1e-11);
  const double a = 1.0 / (sphere_area(k.d) * (q1 + q2));
  std::scoped_lock lock(mu);
  cache[{k.d, k.alpha}] = a;
  return a;
}

double harnack_bound(double eta, const KernelSpec& k) {
  check_kernel(k);
  return harnack_ratio_bound(eta, k.d, k.alpha);
}

Point sample_sphere_uniform(std::size_t d, Rng& rng) {
  Point u(d);
  if (d == 1) {
    u[0] = rng.uniform() < 0.5 ? -1.0 : 1.0;
    return u;
  }
  if (d == 2) {
    const double th = 2.0 * std::numbers::pi * rng.uniform();
    u[0] = std::cos(th);
    u[1] = std::sin(th);
    return u;
  }
  while (true) {
    double s = 0.0;
    for (std::size_t i = 0; i < d; ++i) {
      u[i] = rng.gaussian();
      s += u[i] * u[i];
    }
    if (s > 1e-24) {
      const double inv = 1.0 / std::sqrt(s);
      for (double& c : u) c *= inv;
      return u;
    }
  }
}

namespace {

// Unit vector orthogonal to axis (|axis| = 1), uniform in the complement.
Point orthogonal_uniform(const Point& axis, Rng& rng) {
  const std::size_t d = axis.size();
  Point g(d);
  while (true) {
    for (std::size_t i = 0; i < d; ++i) g[i] = rng.gaussian();
    double proj = dot(g, axis);
    double s = 0.0;
    for (std::size_t i = 0; i < d; ++i) {
      g[i] -= proj * axis[i];
      s += g[i] * g[i];
    }
    if (s > 1e-24) {
      const double inv = 1.0 / std::sqrt(s);
      for (double& c : g) c *= inv;
      return g;
    }
  }
}

}  // namespace

// Inverse-CDF tables for exit draws from a unit ball with start offset
// b = |y - center| / radius.  Stable radial coordinate is v = BetaCDF(w) of
// w = 1 - (r/R)^2, so the v-density is bounded and smooth; the polar angle
// keeps its sin^{d-2} weight.  H(w, mu) = (1-w) |z-y|^2 / (r R)^2 stays
// bounded away from 0 and infinity for b < 1.
struct ExitSampler::OffsetTable {
  std::unique_ptr<CdfTable> classical_theta;  // classical d >= 4
  std::unique_ptr<CdfTable> radial_v;         // stable marginal (or +ray, d == 1)
  std::unique_ptr<CdfTable> radial_v_minus;   // stable d == 1 opposite ray
  double p_plus = 1.0;
  std::vector<double> v_nodes;                // stable d >= 2 conditional grid
  std::vector<CdfTable> theta_at_v;
};

ExitSampler::ExitSampler(KernelSpec k) : k_(k) {
  check_kernel(k_);
  if (!k_.classical_case()) {
    beta_a_ = 1.0 - 0.5 * k_.alpha;
    beta_b_ = 0.5 * k_.alpha;
  }
}

Point ExitSampler::sample_center(const Ball& b, Rng& rng) const {
  Point u = sample_sphere_uniform(b.dimension(), rng);
  double radius = b.radius;
  if (!k_.classical_case()) {
    const double w =
        std::min(reg_inc_beta_inv(rng.uniform_open(), beta_a_, beta_b_), 1.0 - 1e-16);
    radius /= std::sqrt(1.0 - w);
  }
  Point z = b.center;
  for (std::size_t i = 0; i < z.size(); ++i) z[i] += radius * u[i];
  return z;
}

void ExitSampler::step_from_center(double rho, Rng& rng, Point& out) const {
  const std::size_t d = static_cast<std::size_t>(k_.d);
  out.resize(d);
  double radius = rho;
  if (!k_.classical_case()) {
    const double w =
        std::min(reg_inc_beta_inv(rng.uniform_open(), beta_a_, beta_b_), 1.0 - 1e-16);
    radius /= std::sqrt(1.0 - w);
  }
  if (d == 1) {
    out[0] = rng.uniform() < 0.5 ? -radius : radius;
    return;
  }
  if (d == 2) {
    const double th = 2.0 * std::numbers::pi * rng.uniform();
    out[0] = radius * std::cos(th);
    out[1] = radius * std::sin(th);
    return;
  }
  while (true) {
    double s = 0.0;
    for (std::size_t i = 0; i < d; ++i) {
      out[i] = rng.gaussian();
      s += out[i] * out[i];
    }
    if (s > 1e-24) {
      const double scale = radius / std::sqrt(s);
      for (double& c : out) c *= scale;
      return;
    }
  }
}

const ExitSampler::OffsetTable& ExitSampler::table_for(double b_ratio) const {
  std::scoped_lock lock(mu_);
  auto it = tables_.find(b_ratio);
  if (it != tables_.end()) return *it->second;

  auto tab = std::make_shared<OffsetTable>();
  const int d = k_.d;
  const double b = b_ratio;
  if (k_.classical_case()) {
    // Angular law of the exit point, polar angle from the start direction.
    const double a_coef = 1.0 + b * b, b_coef = 2.0 * b;
    tab->classical_theta = std::make_unique<CdfTable>(
        [d, a_coef, b_coef](double th) {
          return std::pow(std::sin(th), d - 2) *
                 std::pow(a_coef - b_coef * std::cos(th), -0.5 * d);
        },
        0.0, std::numbers::pi, 1024);
  } else {
    const double ba = beta_a_, bb = beta_b_;
    auto w_of_v = [ba, bb](double v) {
      return std::min(reg_inc_beta_inv(std::clamp(v, 0.0, 1.0), ba, bb), 1.0 - 1e-16);
    };
    auto h_factor = [b](double w, double mu) {
      const double s = std::sqrt(1.0 - w);
      return 1.0 - 2.0 * s * b * mu + (1.0 - w) * b * b;
    };
    if (d == 1) {
      for (int side = 0; side < 2; ++side) {
        const double sgn = side == 0 ? 1.0 : -1.0;
        auto density = [&, sgn](double v) {
          const double w = w_of_v(v);
          return 1.0 / std::sqrt(h_factor(w, sgn));
        };
        auto table = std::make_unique<CdfTable>(density, 0.0, 1.0, 1024);
        (side == 0 ? tab->radial_v : tab->radial_v_minus) = std::move(table);
      }
      const double tp = tab->radial_v->total();
      const double tm = tab->radial_v_minus->total();
      tab->p_plus = tp / (tp + tm);
    } else {
      // Marginal of v, integrating the angular weight at each v.
      auto marginal = [&](double v) {
        const double w = w_of_v(v);
        return adaptive_quad(
            [&](double th) {
              return std::pow(std::sin(th), d - 2) *
                     std::pow(h_factor(w, std::cos(th)), -0.5 * d);
            },
            0.0, std::numbers::pi, 1e-9);
      };
      tab->radial_v = std::make_unique<CdfTable>(marginal, 0.0, 1.0, 512);
      const std::size_t nv = 65;
      tab->v_nodes.resize(nv);
      tab->theta_at_v.reserve(nv);
      for (std::size_t i = 0; i < nv; ++i) {
        const double v = static_cast<double>(i) / (nv - 1);
        tab->v_nodes[i] = v;
        const double w = w_of_v(v);
        tab->theta_at_v.emplace_back(
            [&, w](double th) {
              return std::pow(std::sin(th), d - 2) *
                     std::pow(h_factor(w, std::cos(th)), -0.5 * d);
            },
            0.0, std::numbers::pi, 512);
      }
    }
  }
  auto [pos, inserted] = tables_.emplace(b_ratio, std::move(tab));
  (void)inserted;
  return *pos->second;
}

Point ExitSampler::sample(const Ball& b, const Point& y, Rng& rng) const {
  if (y.size() != b.dimension())
    throw StructuralError("exit sample: dimension mismatch");
  const double r = b.radius;
  const double e = dist(y, b.center);
  if (!(e < r)) throw ParameterError("exit sample: start must be interior");
  const std::size_t d = b.dimension();
  if (e < 1e-14 * r) return sample_center(b, rng);

  const double ratio = e / r;
  Point axis(d);
  for (std::size_t i = 0; i < d; ++i) axis[i] = (y[i] - b.center[i]) / e;

  if (k_.classical_case()) {
    double theta;
    if (d == 2) {
      const double c_ratio = (1.0 + ratio) / (1.0 - ratio);
      const double u = rng.uniform_open();
      theta = 2.0 * std::atan(std::tan(std::numbers::pi * (u - 0.5)) / c_ratio);
      Point z = b.center;
      z[0] += r * (std::cos(theta) * axis[0] - std::sin(theta) * axis[1]);
      z[1] += r * (std::cos(theta) * axis[1] + std::sin(theta) * axis[0]);
      return z;
    }
    double mu;
    if (d == 3) {
      // Closed-form inversion of the polar-angle law.
      const double a_coef = 1.0 + ratio * ratio, b_coef = 2.0 * ratio;
      const double t0 = 1.0 / (1.0 + ratio), t1 = 1.0 / (1.0 - ratio);
      const double t = t0 + rng.uniform_open() * (t1 - t0);
      mu = std::clamp((a_coef - 1.0 / (t * t)) / b_coef, -1.0, 1.0);
    } else {
      const OffsetTable& tab = table_for(ratio);
      mu = std::cos(tab.classical_theta->invert(rng.uniform_open()));
    }
    const Point perp = orthogonal_uniform(axis, rng);
    const double s = std::sqrt(std::max(0.0, 1.0 - mu * mu));
    Point z = b.center;
    for (std::size_t i = 0; i < d; ++i) z[i] += r * (mu * axis[i] + s * perp[i]);
    return z;
  }

  const OffsetTable& tab = table_for(ratio);
  if (d == 1) {
    const bool plus = rng.uniform() < tab.p_plus;
    const CdfTable& radial = plus ? *tab.radial_v : *tab.radial_v_minus;
    const double v = radial.invert(rng.uniform_open());
    const double w = std::min(reg_inc_beta_inv(v, beta_a_, beta_b_), 1.0 - 1e-16);
    const double radius = r / std::sqrt(1.0 - w);
    Point z = b.center;
    z[0] += (plus ? radius : -radius) * axis[0];
    return z;
  }
  const double v = tab.radial_v->invert(rng.uniform_open());
  const double w = std::min(reg_inc_beta_inv(v, beta_a_, beta_b_), 1.0 - 1e-16);
  const double radius = r / std::sqrt(1.0 - w);
  // Conditional angle: inverse-CDF interpolation between the bracketing
  // v-node tables.
  const std::size_t nv = tab.v_nodes.size();
  const double pos = std::clamp(v, 0.0, 1.0) * (nv - 1);
  const std::size_t i0 = std::min(static_cast<std::size_t>(pos), nv - 2);
  const double t = pos - static_cast<double>(i0);
  const double u2 = rng.uniform_open();
  const double theta = (1.0 - t) * tab.theta_at_v[i0].invert(u2) +
                       t * tab.theta_at_v[i0 + 1].invert(u2);
  const double mu = std::cos(theta);
  const double s = std::sin(theta);
  if (d == 2) {
    const double sgn = rng.uniform() < 0.5 ? 1.0 : -1.0;
    Point z = b.center;
    z[0] += radius * (mu * axis[0] - sgn * s * axis[1]);
    z[1] += radius * (mu * axis[1] + sgn * s * axis[0]);
    return z;
  }
  const Point perp = orthogonal_uniform(axis, rng);
  Point z = b.center;
  for (std::size_t i = 0; i < d; ++i) z[i] += radius * (mu * axis[i] + s * perp[i]);
  return z;
}

namespace {

const ExitSampler& shared_sampler(const KernelSpec& k) {
  static std::mutex mu;
  static std::map<std::pair<int, double>, std::unique_ptr<ExitSampler>> cache;
  std::scoped_lock lock(mu);
  auto& slot = cache[{k.d, k.alpha}];
  if (!slot) slot = std::make_unique<ExitSampler>(k);
  return *slot;
}

}  // namespace

Point sample_exit_classical(const Ball& b, const Point& y, Rng& rng) {
  return shared_sampler(KernelSpec::classical(static_cast<int>(b.dimension())))
      .sample(b, y, rng);
}

Point sample_exit_riesz(const Ball& b, const Point& y, const KernelSpec& k,
                        Rng& rng) {
  check_kernel(k);
  if (k.classical_case())
    throw ParameterError("sample_exit_riesz: stable kernel required");
  return shared_sampler(k).sample(b, y, rng);
}

}  // namespace balayage
