#include "balayage/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <string>

namespace balayage {

namespace {

void require_same_dim(const Point& a, const Point& b, const char* what) {
  if (a.size() != b.size())
    throw StructuralError(std::string(what) + ": dimension mismatch");
}

std::uint64_t mix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ull;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

}  // namespace

double dot(const Point& a, const Point& b) {
  require_same_dim(a, b, "dot");
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

double norm(const Point& a) { return std::sqrt(dot(a, a)); }

double dist(const Point& a, const Point& b) {
  require_same_dim(a, b, "dist");
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    s += d * d;
  }
  return std::sqrt(s);
}

Ball::Ball(Point c, double r) : center(std::move(c)), radius(r) {
  if (center.empty()) throw ParameterError("Ball: empty center");
  if (!(radius >= 0.0) || !std::isfinite(radius))
    throw ParameterError("Ball: radius must be finite and >= 0");
  for (double x : center)
    if (!std::isfinite(x)) throw ParameterError("Ball: non-finite center coordinate");
}

bool Ball::contains(const Point& x) const { return dist(center, x) <= radius; }

bool Ball::strictly_inside(const Point& x) const { return dist(center, x) < radius; }

Ball Ball::shrunk(double gamma) const { return shrink_ball(*this, gamma); }

Ball shrink_ball(const Ball& b, double gamma) {
  if (!(gamma >= 0.0 && gamma <= 1.0))
    throw ParameterError("shrink_ball: factor must lie in [0,1]");
  return Ball(b.center, gamma * b.radius);
}

BallUnion::BallUnion(std::vector<Ball> balls) : balls_(std::move(balls)) {
  if (balls_.empty()) return;
  dim_ = balls_[0].dimension();
  for (const Ball& b : balls_)
    if (b.dimension() != dim_) throw StructuralError("BallUnion: dimension mismatch");

  auto check_pair = [&](std::size_t i, std::size_t j) {
    const double d = dist(balls_[i].center, balls_[j].center);
    const double sum = balls_[i].radius + balls_[j].radius;
    const bool degenerate = balls_[i].radius == 0.0 || balls_[j].radius == 0.0;
    // Degenerate point balls may touch a sphere but not coincide with
    // another ball; proper balls must be strictly disjoint.
    if (degenerate ? (d < sum || d == 0.0) : (d <= sum))
      throw StructuralError("BallUnion: balls " + std::to_string(i) + " and " +
                            std::to_string(j) + " are not disjoint");
  };

  if (balls_.size() <= 512) {
    for (std::size_t i = 0; i < balls_.size(); ++i)
      for (std::size_t j = i + 1; j < balls_.size(); ++j) check_pair(i, j);
    return;
  }

  // Large families (lattice grids): only centers within 2*max radius + cell
  // diagonal can overlap, so a hash over center cells keeps this near linear.
  double rmax = 0.0;
  for (const Ball& b : balls_) rmax = std::max(rmax, b.radius);
  const double cell = std::max(2.0 * rmax, 1e-12);
  std::unordered_map<std::int64_t, std::vector<std::size_t>> buckets;
  auto key_of = [&](const Point& c, const std::vector<long long>& off) {
    std::uint64_t h = 0x2545f4914f6cdd1dull;
    for (std::size_t k = 0; k < c.size(); ++k) {
      const auto cellidx =
          static_cast<long long>(std::floor(c[k] / cell)) + off[k];
      h = mix64(h ^ static_cast<std::uint64_t>(cellidx));
    }
    return static_cast<std::int64_t>(h);
  };
  const std::vector<long long> zero(dim_, 0);
  for (std::size_t i = 0; i < balls_.size(); ++i)
    buckets[key_of(balls_[i].center, zero)].push_back(i);
  std::vector<long long> off(dim_, -1);
  for (std::size_t i = 0; i < balls_.size(); ++i) {
    // scan the 3^d neighborhood of ball i's cell
    std::fill(off.begin(), off.end(), -1);
    while (true) {
      auto it = buckets.find(key_of(balls_[i].center, off));
      if (it != buckets.end())
        for (std::size_t j : it->second)
          if (j > i) check_pair(i, j);
      std::size_t k = 0;
      while (k < dim_ && off[k] == 1) off[k++] = -1;
      if (k == dim_) break;
      ++off[k];
    }
  }
}

int BallUnion::find(const Point& x) const {
  for (std::size_t i = 0; i < balls_.size(); ++i)
    if (balls_[i].contains(x)) return static_cast<int>(i);
  return -1;
}

double BallUnion::dist_to(const Point& x) const {
  double best = kInf;
  for (const Ball& b : balls_)
    best = std::min(best, dist(b.center, x) - b.radius);
  return std::max(best, 0.0);
}

double BallUnion::circumradius() const {
  double r = 0.0;
  for (const Ball& b : balls_) r = std::max(r, norm(b.center) + b.radius);
  return r;
}

BallUnion BallUnion::shrunk(const std::vector<double>& s) const {
  if (s.size() != balls_.size())
    throw ParameterError("BallUnion::shrunk: factor count mismatch");
  BallUnion out;
  out.dim_ = dim_;
  out.balls_.reserve(balls_.size());
  // shrinking preserves disjointness, so skip the pairwise validation
  for (std::size_t i = 0; i < balls_.size(); ++i) {
    if (!(s[i] >= 0.0 && s[i] <= 1.0))
      throw ParameterError("BallUnion::shrunk: factor outside [0,1]");
    out.balls_.push_back(Ball(balls_[i].center, s[i] * balls_[i].radius));
  }
  return out;
}

DomainSpec DomainSpec::full_space(std::size_t d) {
  if (d < 1) throw ParameterError("DomainSpec: dimension must be >= 1");
  DomainSpec spec;
  spec.kind = Kind::FullSpace;
  spec.dim = d;
  return spec;
}

DomainSpec DomainSpec::open_ball(Ball b) {
  if (b.radius <= 0.0) throw ParameterError("DomainSpec: open ball needs positive radius");
  DomainSpec spec;
  spec.kind = Kind::OpenBall;
  spec.ball = std::move(b);
  spec.dim = spec.ball.dimension();
  return spec;
}

bool DomainSpec::contains(const Point& x) const {
  if (x.size() != dimension()) throw StructuralError("DomainSpec: dimension mismatch");
  return kind == Kind::FullSpace || ball.strictly_inside(x);
}

double DomainSpec::boundary_dist(const Point& x) const {
  if (kind == Kind::FullSpace) return kInf;
  return ball.radius - dist(ball.center, x);
}

OpenSet OpenSet::whole_domain(std::size_t dim) {
  OpenSet u;
  u.whole_ = true;
  u.dim_ = dim;
  return u;
}

OpenSet OpenSet::from_balls(std::vector<Ball> cover) {
  return with_holes(std::move(cover), {});
}

OpenSet OpenSet::with_holes(std::vector<Ball> cover, std::vector<Ball> holes) {
  if (cover.empty()) throw StructuralError("OpenSet: empty cover");
  OpenSet u;
  u.dim_ = cover[0].dimension();
  for (const Ball& b : cover) {
    if (b.dimension() != u.dim_) throw StructuralError("OpenSet: dimension mismatch");
    if (b.radius <= 0.0) throw StructuralError("OpenSet: cover ball needs positive radius");
  }
  for (const Ball& h : holes)
    if (h.dimension() != u.dim_) throw StructuralError("OpenSet: hole dimension mismatch");
  u.cover_ = std::move(cover);
  u.holes_ = std::move(holes);
  return u;
}

bool OpenSet::contains(const Point& x) const {
  for (const Ball& h : holes_)
    if (h.contains(x)) return false;
  if (whole_) return true;
  for (const Ball& b : cover_)
    if (b.strictly_inside(x)) return true;
  return false;
}

double OpenSet::interior_dist(const Point& x) const {
  double covered = whole_ ? kInf : -kInf;
  for (const Ball& b : cover_) covered = std::max(covered, b.boundary_dist(x));
  for (const Ball& h : holes_)
    covered = std::min(covered, dist(h.center, x) - h.radius);
  return covered;
}

double OpenSet::entry_dist(const Point& x) const {
  double from_cover = whole_ ? 0.0 : kInf;
  for (const Ball& b : cover_)
    from_cover = std::min(from_cover, dist(b.center, x) - b.radius);
  double from_holes = 0.0;
  for (const Ball& h : holes_)
    from_holes = std::max(from_holes, h.boundary_dist(x));
  return std::max(0.0, std::max(from_cover, from_holes));
}

double OpenSet::circumradius() const {
  if (whole_) return kInf;
  double r = 0.0;
  for (const Ball& b : cover_) r = std::max(r, norm(b.center) + b.radius);
  return r;
}

GridSpec::GridSpec(Point x0, double a_, int m_) : offset(std::move(x0)), a(a_), m(m_) {
  if (offset.empty()) throw ParameterError("GridSpec: empty offset");
  if (!(a > 0.0 && a < 1.0)) throw ParameterError("GridSpec: scale must lie in (0,1)");
  if (m < 1) throw ParameterError("GridSpec: resolution must be >= 1");
}

Point GridSpec::center(const std::vector<long long>& z) const {
  Point c(offset.size());
  for (std::size_t k = 0; k < c.size(); ++k)
    c[k] = (offset[k] + static_cast<double>(z[k])) / m;
  return c;
}

BallUnion grid_balls(const GridSpec& g, const OpenSet& u) {
  const std::size_t d = g.offset.size();
  if (u.dimension() != d) throw StructuralError("grid_balls: dimension mismatch");
  const double r = g.a / g.m;
  const double m = static_cast<double>(g.m);

  // bounding box of U intersected with B(0, m)
  Point lo(d, -m), hi(d, m);
  if (!u.is_whole_domain()) {
    for (std::size_t k = 0; k < d; ++k) {
      double l = kInf, h = -kInf;
      for (const Ball& b : u.cover()) {
        l = std::min(l, b.center[k] - b.radius);
        h = std::max(h, b.center[k] + b.radius);
      }
      lo[k] = std::max(lo[k], l);
      hi[k] = std::min(hi[k], h);
    }
  }

  std::vector<long long> zlo(d), zhi(d);
  for (std::size_t k = 0; k < d; ++k) {
    zlo[k] = static_cast<long long>(std::ceil(m * lo[k] - g.offset[k]));
    zhi[k] = static_cast<long long>(std::floor(m * hi[k] - g.offset[k]));
    if (zlo[k] > zhi[k]) return BallUnion{};
  }

  std::vector<Ball> kept;
  std::vector<long long> z = zlo;
  while (true) {
    Point c = g.center(z);
    if (norm(c) + r <= m && u.interior_dist(c) - r >= 1.0 / m)
      kept.push_back(Ball(c, r));
    std::size_t k = 0;
    while (k < d && z[k] == zhi[k]) {
      z[k] = zlo[k];
      ++k;
    }
    if (k == d) break;
    ++z[k];
  }
  return BallUnion(std::move(kept));
}

double harnack_ratio_bound(double eta, int d, double alpha) {
  if (!(eta > 0.0 && eta < 1.0)) throw ParameterError("harnack_ratio_bound: eta outside (0,1)");
  return std::pow(1.0 + eta, d - 0.5 * alpha) / std::pow(1.0 - eta, d + 0.5 * alpha);
}

double delta0(int d, double alpha) {
  if (d < 1) throw ParameterError("delta0: dimension must be >= 1");
  auto ok = [&](double delta) {
    return harnack_ratio_bound(delta / (3.0 * d), d, alpha) <= 1.0 + delta;
  };
  if (ok(0.5)) return 0.5;
  double lo = 1e-9, hi = 0.5;
  if (!ok(lo)) throw SolverError("delta0: ratio bound fails even for tiny delta");
  while (hi - lo > 1e-12) {
    const double mid = 0.5 * (lo + hi);
    (ok(mid) ? lo : hi) = mid;
  }
  return lo;
}

namespace {

double mutual_distance_impl(const BallUnion& u, std::size_t i, double domain_part) {
  if (i >= u.size()) throw ParameterError("mutual_distance: index out of range");
  double best = domain_part;
  const Point& x = u[i].center;
  for (std::size_t j = 0; j < u.size(); ++j)
    if (j != i) best = std::min(best, dist(x, u[j].center) - u[j].radius);
  return best;
}

DeltaFamilyReport validate_impl(const BallUnion& u, double delta, double alpha,
                                const std::function<double(std::size_t)>& mutual) {
  if (u.empty()) throw ParameterError("validate_delta_family: empty family");
  const int d = static_cast<int>(u.dimension());
  DeltaFamilyReport report;
  report.delta = delta;
  report.delta_cap = delta0(d, alpha);
  report.slacks.resize(u.size());
  double need = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) {
    BallSlack& s = report.slacks[i];
    s.radius = u[i].radius;
    s.distance = mutual(i);
    s.slack = delta / (3.0 * d) * s.distance - s.radius;
    if (s.radius == 0.0)
      s.min_delta = 0.0;
    else
      s.min_delta = s.distance > 0.0 ? 3.0 * d * s.radius / s.distance : kInf;
    need = std::max(need, s.min_delta);
  }
  report.min_admissible_delta = need;
  report.valid = delta > 0.0 && delta <= report.delta_cap && delta >= need;
  return report;
}

}  // namespace

double mutual_distance(const BallUnion& u, std::size_t i, const DomainSpec& domain) {
  return mutual_distance_impl(u, i, domain.boundary_dist(u[i].center));
}

double mutual_distance(const BallUnion& u, std::size_t i, const OpenSet& window) {
  return mutual_distance_impl(u, i, window.interior_dist(u[i].center));
}

DeltaFamilyReport validate_delta_family(const BallUnion& u, double delta, double alpha,
                                        const DomainSpec& domain) {
  return validate_impl(u, delta, alpha,
                       [&](std::size_t i) { return mutual_distance(u, i, domain); });
}

DeltaFamilyReport validate_delta_family(const BallUnion& u, double delta, double alpha,
                                        const OpenSet& window) {
  return validate_impl(u, delta, alpha,
                       [&](std::size_t i) { return mutual_distance(u, i, window); });
}

BallIndex::BallIndex(const BallUnion& u) : union_(&u) {
  if (u.empty()) return;
  const std::size_t d = u.dimension();
  Point lo(d, kInf), hi(d, -kInf);
  for (const Ball& b : u.balls()) {
    max_radius_ = std::max(max_radius_, b.radius);
    for (std::size_t k = 0; k < d; ++k) {
      lo[k] = std::min(lo[k], b.center[k]);
      hi[k] = std::max(hi[k], b.center[k]);
    }
  }
  bound_center_.resize(d);
  double span = 0.0;
  for (std::size_t k = 0; k < d; ++k) {
    bound_center_[k] = 0.5 * (lo[k] + hi[k]);
    span = std::max(span, hi[k] - lo[k]);
  }
  for (const Ball& b : u.balls())
    bound_radius_ = std::max(bound_radius_, dist(bound_center_, b.center) + b.radius);

  brute_ = u.size() <= 48;
  if (brute_) return;
  // a cell about the mean center spacing keeps buckets near one entry
  const double spacing = span / std::pow(static_cast<double>(u.size()), 1.0 / d);
  cell_ = std::max({spacing, 2.0 * max_radius_, 1e-12});
  for (std::size_t i = 0; i < u.size(); ++i)
    cells_[cell_key(u[i].center)].push_back(static_cast<int>(i));
}

namespace {
std::int64_t key_of_cell(const std::vector<long long>& idx) {
  std::uint64_t h = 0x2545f4914f6cdd1dull;
  for (long long v : idx) h = mix64(h ^ static_cast<std::uint64_t>(v));
  return static_cast<std::int64_t>(h);
}
}  // namespace

std::int64_t BallIndex::cell_key(const Point& x) const {
  std::vector<long long> idx(x.size());
  for (std::size_t k = 0; k < x.size(); ++k)
    idx[k] = static_cast<long long>(std::floor(x[k] / cell_));
  return key_of_cell(idx);
}

int BallIndex::find(const Point& x) const {
  const Hit h = nearest(x, 0.0);
  return h.index >= 0 && h.distance <= 0.0 ? h.index : -1;
}

BallIndex::Hit BallIndex::nearest(const Point& x, double cap, long long max_rings) const {
  Hit hit;
  if (empty()) return hit;
  if (brute_) {
    for (std::size_t i = 0; i < union_->size(); ++i) {
      const double d = dist(x, (*union_)[i].center) - (*union_)[i].radius;
      if (d < hit.distance) {
        hit.distance = d;
        hit.index = static_cast<int>(i);
      }
    }
    if (hit.distance > cap) hit.index = -1;
    return hit;
  }
  const double far_lb = dist(x, bound_center_) - bound_radius_;
  if (far_lb > cap) return Hit{-1, far_lb};

  const std::size_t d = x.size();
  std::vector<long long> home(d);
  for (std::size_t k = 0; k < d; ++k)
    home[k] = static_cast<long long>(std::floor(x[k] / cell_));
  long long kmax =
      static_cast<long long>(std::ceil((cap + max_radius_) / cell_)) + 2;
  if (max_rings >= 0) kmax = std::min(kmax, max_rings);

  std::vector<long long> off(d), probe(d);
  // distance lower bound for every cell not yet scanned
  double unscanned_lb = -(cell_ + max_radius_);
  for (long long ring = 0; ring <= kmax; ++ring) {
    // any ball whose center sits in a farther ring is at least this far away
    const double ring_lb = (ring - 1) * cell_ - max_radius_;
    if (ring_lb > std::min(hit.distance, cap)) break;
    std::fill(off.begin(), off.end(), -ring);
    while (true) {
      long long cheb = 0;
      for (std::size_t k = 0; k < d; ++k) cheb = std::max(cheb, std::llabs(off[k]));
      if (cheb == ring) {
        for (std::size_t k = 0; k < d; ++k) probe[k] = home[k] + off[k];
        auto it = cells_.find(key_of_cell(probe));
        if (it != cells_.end()) {
          for (int i : it->second) {
            const double dd = dist(x, (*union_)[i].center) - (*union_)[i].radius;
            if (dd < hit.distance) {
              hit.distance = dd;
              hit.index = i;
            }
          }
        }
      }
      std::size_t k = 0;
      while (k < d && off[k] == ring) off[k++] = -ring;
      if (k == d) break;
      ++off[k];
    }
    unscanned_lb = static_cast<double>(ring) * cell_ - max_radius_;
  }
  if (hit.index >= 0 && hit.distance <= unscanned_lb && hit.distance <= cap)
    return hit;  // provably the nearest ball
  return Hit{-1, std::max(std::min(hit.distance, unscanned_lb), far_lb)};
}

}  // namespace balayage
