#include "balayage/measure.hpp"

#include <algorithm>
#include <cmath>

#include "balayage/errors.hpp"

namespace balayage {

namespace {

double kahan_weight_sum(const std::vector<Atom>& atoms) {
  double s = 0.0, c = 0.0;
  for (const Atom& a : atoms) {
    const double y = a.w - c;
    const double t = s + y;
    c = (t - s) - y;
    s = t;
  }
  return s;
}

}  // namespace

WeightedMeasure WeightedMeasure::from_atoms(std::vector<Atom> atoms) {
  WeightedMeasure m;
  std::size_t dim = 0;
  for (const Atom& a : atoms) {
    if (!(a.w >= 0.0) || !std::isfinite(a.w))
      throw StructuralError("measure: atom weights must be finite and >= 0");
    if (a.x.empty()) throw StructuralError("measure: atom without coordinates");
    if (dim == 0) dim = a.x.size();
    if (a.x.size() != dim) throw StructuralError("measure: mixed atom dimensions");
  }
  m.atoms_ = std::move(atoms);
  m.exact_count_ = m.atoms_.size();
  m.total_input_ = kahan_weight_sum(m.atoms_);
  return m;
}

WeightedMeasure WeightedMeasure::point_mass(Point x, double w) {
  Atom a;
  a.x = std::move(x);
  a.w = w;
  return from_atoms({std::move(a)});
}

WeightedMeasure WeightedMeasure::chain_output(std::vector<Atom> atoms,
                                              std::size_t exact_count,
                                              std::uint64_t walk_count,
                                              double mc_weight_per_walk,
                                              double lost_mass, double total_input,
                                              Diagnostics diag) {
  if (exact_count > atoms.size())
    throw StructuralError("measure: exact prefix larger than atom list");
  WeightedMeasure m;
  m.atoms_ = std::move(atoms);
  m.exact_count_ = exact_count;
  m.walk_count_ = walk_count;
  m.mc_weight_per_walk_ = mc_weight_per_walk;
  m.lost_mass_ = lost_mass;
  m.total_input_ = total_input;
  m.diag_ = std::move(diag);
  m.check_conservation();
  return m;
}

double WeightedMeasure::total_mass() const { return kahan_weight_sum(atoms_); }

WeightedMeasure WeightedMeasure::restricted(
    const std::function<bool(const Atom&)>& keep) const {
  WeightedMeasure m;
  std::size_t kept_exact = 0;
  for (std::size_t i = 0; i < atoms_.size(); ++i) {
    if (!keep(atoms_[i])) continue;
    m.atoms_.push_back(atoms_[i]);
    if (i < exact_count_) ++kept_exact;
  }
  m.exact_count_ = kept_exact;
  m.walk_count_ = walk_count_;
  m.mc_weight_per_walk_ = mc_weight_per_walk_;
  m.total_input_ = total_input_;
  m.lost_mass_ = total_input_ - m.total_mass();
  m.diag_ = diag_;
  return m;
}

void WeightedMeasure::check_conservation() const {
  const double s = total_mass() + lost_mass_;
  const double tol = 1e-12 * std::max(1.0, std::abs(total_input_));
  if (std::abs(s - total_input_) > tol)
    throw StructuralError("measure: weights plus lost mass drifted from total input");
}

namespace {

Estimate indicator_estimate(const WeightedMeasure& m,
                            const std::function<bool(const Atom&)>& pred) {
  Estimate e;
  std::uint64_t hits = 0;
  for (std::size_t i = 0; i < m.atoms().size(); ++i) {
    const Atom& a = m.atoms()[i];
    if (!pred(a)) continue;
    if (i < m.exact_count()) {
      e.value += a.w;
    } else {
      ++hits;
    }
  }
  const std::uint64_t n = m.walk_count();
  if (n > 0) {
    const double wpw = m.mc_weight_per_walk();
    e.value += wpw * static_cast<double>(hits);
    if (n > 1) {
      const double p = static_cast<double>(hits) / static_cast<double>(n);
      const double var = p * (1.0 - p) * static_cast<double>(n) / static_cast<double>(n - 1);
      e.sigma = wpw * std::sqrt(static_cast<double>(n) * var);
    }
  }
  return e;
}

}  // namespace

Estimate mass_on(const WeightedMeasure& m, const Ball& b) {
  const double tol = 1e-9 * std::max(b.radius, 1e-30);
  return indicator_estimate(m, [&](const Atom& a) {
    return dist(a.x, b.center) <= b.radius + tol;
  });
}

Estimate total_mass_estimate(const WeightedMeasure& m) {
  return indicator_estimate(m, [](const Atom&) { return true; });
}

Potential Potential::riesz_kernel(Point pole, double alpha, double scale,
                                  std::optional<double> cap) {
  const int d = static_cast<int>(pole.size());
  if (d < 1) throw ParameterError("potential: pole needs coordinates");
  if (!(alpha > 0.0 && alpha < 2.0 && alpha < d))
    throw ParameterError("potential: stable kernel needs 0 < alpha < min(2, d)");
  if (!(scale > 0.0)) throw ParameterError("potential: scale must be positive");
  if (cap && !(*cap > 0.0)) throw ParameterError("potential: cap must be positive");
  Potential p;
  p.kind_ = Kind::RieszKernel;
  p.pole_ = std::move(pole);
  p.alpha_ = alpha;
  p.scale_ = scale;
  p.cap_ = cap;
  return p;
}

Potential Potential::newton_kernel(Point pole, double scale, std::optional<double> cap) {
  if (pole.size() < 3)
    throw ParameterError("potential: the Newton kernel needs d >= 3");
  if (!(scale > 0.0)) throw ParameterError("potential: scale must be positive");
  if (cap && !(*cap > 0.0)) throw ParameterError("potential: cap must be positive");
  Potential p;
  p.kind_ = Kind::NewtonKernel;
  p.pole_ = std::move(pole);
  p.scale_ = scale;
  p.cap_ = cap;
  return p;
}

Potential Potential::green_ball(Ball domain, Point pole, double scale,
                                std::optional<double> cap) {
  if (pole.size() != domain.dimension())
    throw ParameterError("potential: pole dimension must match the ball");
  if (domain.dimension() < 2)
    throw ParameterError("potential: Green potential needs d >= 2");
  if (!(domain.radius > 0.0)) throw ParameterError("potential: degenerate ball");
  if (!domain.strictly_inside(pole))
    throw ParameterError("potential: pole must be inside the ball");
  if (!(scale > 0.0)) throw ParameterError("potential: scale must be positive");
  if (cap && !(*cap > 0.0)) throw ParameterError("potential: cap must be positive");
  Potential p;
  p.kind_ = Kind::GreenBall;
  p.pole_ = std::move(pole);
  p.scale_ = scale;
  p.cap_ = cap;
  p.domain_ball_ = std::move(domain);
  return p;
}

Potential Potential::bump(Point center, double radius, double scale) {
  if (center.empty()) throw ParameterError("potential: bump needs a center");
  if (!(radius > 0.0)) throw ParameterError("potential: bump radius must be positive");
  if (!(scale > 0.0)) throw ParameterError("potential: scale must be positive");
  Potential p;
  p.kind_ = Kind::Bump;
  p.pole_ = std::move(center);
  p.scale_ = scale;
  p.domain_ball_ = Ball(p.pole_, radius);
  return p;
}

double Potential::eval(const Point& x, bool* capped) const {
  if (capped) *capped = false;
  if (x.size() != pole_.size())
    throw StructuralError("potential: dimension mismatch");
  const double r = dist(x, pole_);
  const std::size_t d = pole_.size();
  double v = 0.0;
  switch (kind_) {
    case Kind::RieszKernel:
    case Kind::NewtonKernel: {
      const double expo = (kind_ == Kind::NewtonKernel ? 2.0 : alpha_) -
                          static_cast<double>(d);
      if (r == 0.0) {
        if (!cap_) throw ParameterError("potential: evaluation at the pole");
        if (capped) *capped = true;
        return *cap_;
      }
      v = scale_ * std::pow(r, expo);
      break;
    }
    case Kind::GreenBall: {
      const Ball& b = *domain_ball_;
      const double xr = dist(x, b.center);
      if (xr >= b.radius) return 0.0;
      if (r == 0.0) {
        if (!cap_) throw ParameterError("potential: evaluation at the pole");
        if (capped) *capped = true;
        return *cap_;
      }
      const double pr = dist(pole_, b.center);
      double g;
      if (d == 2) {
        if (pr == 0.0) {
          g = std::log(b.radius / xr);
        } else {
          // reflected pole across the sphere
          Point ref = b.center;
          const double f = b.radius * b.radius / (pr * pr);
          for (std::size_t i = 0; i < d; ++i)
            ref[i] += f * (pole_[i] - b.center[i]);
          g = std::log(dist(x, ref) * pr / (b.radius * r));
        }
      } else {
        const double expo = 2.0 - static_cast<double>(d);
        if (pr == 0.0) {
          g = std::pow(r, expo) - std::pow(b.radius, expo);
        } else {
          Point ref = b.center;
          const double f = b.radius * b.radius / (pr * pr);
          for (std::size_t i = 0; i < d; ++i)
            ref[i] += f * (pole_[i] - b.center[i]);
          g = std::pow(r, expo) -
              std::pow(b.radius / pr, static_cast<double>(d) - 2.0) *
                  std::pow(dist(x, ref), expo);
        }
      }
      v = scale_ * std::max(g, 0.0);
      break;
    }
    case Kind::Bump: {
      const double t = r / domain_ball_->radius;
      if (t >= 1.0) return 0.0;
      const double s = 1.0 - t * t;
      return scale_ * s * s;
    }
  }
  if (!std::isfinite(v)) {
    if (!cap_) throw ParameterError("potential: evaluation overflowed near the pole");
    if (capped) *capped = true;
    return *cap_;
  }
  if (cap_ && v > *cap_) {
    if (capped) *capped = true;
    return *cap_;
  }
  return v;
}

bool Potential::mass_gate_eligible(const KernelSpec& k, const DomainSpec& domain) const {
  switch (kind_) {
    case Kind::NewtonKernel:
      return k.classical_case() && pole_.size() >= 3;
    case Kind::RieszKernel:
      return !k.classical_case() && alpha_ == k.alpha;
    case Kind::GreenBall: {
      if (!k.classical_case()) return false;
      if (domain.kind != DomainSpec::Kind::OpenBall) return false;
      const Ball& b = *domain_ball_;
      const double tol = 1e-9 * b.radius;
      // superharmonic only on its own ball: the run domain must sit inside it
      return dist(domain.ball.center, b.center) + domain.ball.radius <= b.radius + tol;
    }
    case Kind::Bump:
      return false;
  }
  return false;
}

Estimate integrate(const WeightedMeasure& m, const Potential& q, IntegrateStats* stats) {
  Estimate e;
  double s1 = 0.0, s2 = 0.0;
  bool capped = false;
  for (std::size_t i = 0; i < m.atoms().size(); ++i) {
    const Atom& a = m.atoms()[i];
    const double v = q.eval(a.x, &capped);
    if (capped && stats) ++stats->capped_evals;
    if (i < m.exact_count()) {
      e.value += a.w * v;
    } else {
      s1 += v;
      s2 += v * v;
    }
  }
  const std::uint64_t n = m.walk_count();
  if (n > 0) {
    const double wpw = m.mc_weight_per_walk();
    e.value += wpw * s1;
    if (n > 1) {
      const double mean = s1 / static_cast<double>(n);
      double var = (s2 - static_cast<double>(n) * mean * mean) /
                   static_cast<double>(n - 1);
      if (var < 0.0) var = 0.0;
      e.sigma = wpw * std::sqrt(static_cast<double>(n) * var);
    }
  }
  return e;
}

void validate_dictionary(const Dictionary& dict, const OpenSet& region,
                         std::size_t samples, Rng& rng) {
  if (dict.members.empty()) throw ParameterError("dictionary: no members");
  if (!dict.reference) return;
  if (!(dict.bound_multiple > 0.0))
    throw ParameterError("dictionary: bound multiple must be positive");
  if (region.is_whole_domain() || region.cover().empty())
    throw ParameterError("dictionary: validation region must be a bounded ball union");
  const auto& cover = region.cover();
  const std::size_t dim = region.dimension();
  for (std::size_t s = 0; s < samples; ++s) {
    const Ball& b = cover[s % cover.size()];
    Point x(dim);
    // uniform in the cover ball
    const Point u = sample_sphere_uniform(dim, rng);
    const double rad =
        b.radius * std::pow(rng.uniform_open(), 1.0 / static_cast<double>(dim));
    for (std::size_t i = 0; i < dim; ++i) x[i] = b.center[i] + rad * u[i];
    const double pv = dict.reference->eval(x);
    for (const DictionaryEntry& ent : dict.members) {
      const double qv = ent.q.eval(x);
      if (qv > dict.bound_multiple * pv * (1.0 + 1e-9))
        throw ParameterError("dictionary: member exceeds the declared multiple of the reference");
    }
  }
}

WeakDistanceReport weak_distance(const WeightedMeasure& m1, const WeightedMeasure& m2,
                                 const Dictionary& dict) {
  if (dict.members.empty()) throw ParameterError("weak_distance: empty dictionary");
  WeakDistanceReport rep;
  for (const DictionaryEntry& ent : dict.members) {
    PotentialGap row;
    row.id = ent.q.id;
    row.lhs = integrate(m1, ent.q);
    row.rhs = integrate(m2, ent.q);
    row.diff = row.lhs.value - row.rhs.value;
    if (std::abs(row.diff) >= rep.value) {
      rep.value = std::abs(row.diff);
      rep.sigma = std::sqrt(row.lhs.sigma * row.lhs.sigma + row.rhs.sigma * row.rhs.sigma);
    }
    rep.rows.push_back(std::move(row));
  }
  return rep;
}

}  // namespace balayage
