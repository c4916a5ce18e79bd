#pragma once

#include <cstddef>
#include <cstdint>
#include <limits>
#include <optional>
#include <unordered_map>
#include <vector>

#include "balayage/errors.hpp"

namespace balayage {

using Point = std::vector<double>;

double dot(const Point& a, const Point& b);
double norm(const Point& a);
double dist(const Point& a, const Point& b);

inline constexpr double kInf = std::numeric_limits<double>::infinity();

// Closed Euclidean ball; radius 0 is a degenerate point ball.
struct Ball {
  Point center;
  double radius = 0.0;

  Ball() = default;
  Ball(Point c, double r);

  std::size_t dimension() const { return center.size(); }
  bool contains(const Point& x) const;         // closed: |x-c| <= r
  bool strictly_inside(const Point& x) const;  // open interior
  double boundary_dist(const Point& x) const { return radius - dist(center, x); }
  Ball shrunk(double gamma) const;
};

// Same center, radius scaled by gamma in [0,1].
Ball shrink_ball(const Ball& b, double gamma);

// Finite union of pairwise disjoint closed balls.
class BallUnion {
 public:
  BallUnion() = default;
  explicit BallUnion(std::vector<Ball> balls);

  std::size_t size() const { return balls_.size(); }
  bool empty() const { return balls_.empty(); }
  const Ball& operator[](std::size_t i) const { return balls_[i]; }
  const std::vector<Ball>& balls() const { return balls_; }
  std::size_t dimension() const { return dim_; }

  // Index of the closed ball containing x, or -1.
  int find(const Point& x) const;
  // Distance from x to the union (0 inside); degenerate balls included.
  double dist_to(const Point& x) const;
  // max_i |c_i| + r_i, the radius of a ball around the origin covering the union.
  double circumradius() const;
  BallUnion shrunk(const std::vector<double>& s) const;

 private:
  std::vector<Ball> balls_;
  std::size_t dim_ = 0;
};

// Greenian reference set: the whole space or an open ball.
struct DomainSpec {
  enum class Kind { FullSpace, OpenBall };
  Kind kind = Kind::FullSpace;
  std::size_t dim = 0;  // used when kind == FullSpace
  Ball ball;            // used when kind == OpenBall

  static DomainSpec full_space(std::size_t d);
  static DomainSpec open_ball(Ball b);

  std::size_t dimension() const { return kind == Kind::FullSpace ? dim : ball.dimension(); }
  bool contains(const Point& x) const;
  // Distance from x to the complement of the domain (+inf for the full space).
  double boundary_dist(const Point& x) const;
};

// Open set given as a union of open cover balls minus finitely many closed
// holes, or the whole domain. Membership is exact; the distance queries are
// lower bounds that are exact for a single cover ball without holes.
class OpenSet {
 public:
  static OpenSet whole_domain(std::size_t dim);
  static OpenSet from_balls(std::vector<Ball> cover);
  static OpenSet with_holes(std::vector<Ball> cover, std::vector<Ball> holes);

  bool is_whole_domain() const { return whole_; }
  std::size_t dimension() const { return dim_; }
  const std::vector<Ball>& cover() const { return cover_; }
  const std::vector<Ball>& holes() const { return holes_; }

  bool contains(const Point& x) const;
  // Lower bound on dist(x, complement); positive iff contains(x).
  double interior_dist(const Point& x) const;
  // Lower bound on dist(x, set) for x outside; 0 inside the closure.
  double entry_dist(const Point& x) const;
  double circumradius() const;  // +inf when whole domain

 private:
  bool whole_ = false;
  std::size_t dim_ = 0;
  std::vector<Ball> cover_;
  std::vector<Ball> holes_;
};

// Lattice ball family: balls B((offset + z)/m, a/m), z in Z^d.
struct GridSpec {
  Point offset;
  double a = 0.3;  // radius scale in (0,1)
  int m = 1;       // resolution

  GridSpec() = default;
  GridSpec(Point x0, double a_, int m_);
  Point center(const std::vector<long long>& z) const;
};

// All lattice balls B with B inside U and inside B(0,m), and
// dist(B, complement of U) >= 1/m. Uses the conservative interior
// distance of U, so every kept ball genuinely satisfies the clearance.
BallUnion grid_balls(const GridSpec& g, const OpenSet& u);

// (1+eta)^(d-alpha/2) / (1-eta)^(d+alpha/2): the two-pole ratio bound for the
// exit densities of a ball, uniform over observation points.
double harnack_ratio_bound(double eta, int d, double alpha);

// Largest delta <= 1/2 with harnack_ratio_bound(delta/(3d)) <= 1 + delta,
// found by bisection to 1e-12.
double delta0(int d, double alpha);

// Distance from the center of ball i to the rest of the union and to the
// domain complement, the right side of the small-radius condition.
double mutual_distance(const BallUnion& u, std::size_t i, const DomainSpec& domain);
double mutual_distance(const BallUnion& u, std::size_t i, const OpenSet& window);

struct BallSlack {
  double radius = 0.0;
  double distance = 0.0;      // mutual distance for this ball
  double slack = 0.0;         // (delta/3d) * distance - radius, >= 0 when valid
  double min_delta = 0.0;     // smallest delta validating this ball
};

struct DeltaFamilyReport {
  bool valid = false;
  double delta = 0.0;
  double delta_cap = 0.0;     // delta0(d, alpha)
  double min_admissible_delta = 0.0;
  std::vector<BallSlack> slacks;
};

DeltaFamilyReport validate_delta_family(const BallUnion& u, double delta, double alpha,
                                        const DomainSpec& domain);
DeltaFamilyReport validate_delta_family(const BallUnion& u, double delta, double alpha,
                                        const OpenSet& window);

// Family of pairwise disjoint balls with radii small against their mutual
// distances, the precondition of the joint shrink solver.
struct DeltaFamily {
  BallUnion balls;
  double delta = 0.0;
  DomainSpec domain;
};

// Uniform hash grid over ball centers for exact nearest-ball queries.
class BallIndex {
 public:
  explicit BallIndex(const BallUnion& u);

  struct Hit {
    int index = -1;      // containing or nearest ball; -1 if none within cap
    double distance = kInf;
  };

  // Ball containing x (closed), or -1.
  int find(const Point& x) const;
  // Exact distance to the union and the nearest ball index, provided the
  // distance is <= cap; otherwise index -1 and a value > cap.  A positive
  // ring budget bounds the grid scan: when it is exhausted the returned
  // distance is only a lower bound of the true distance (index -1 unless a
  // candidate provably at least as close as every unscanned cell was seen).
  Hit nearest(const Point& x, double cap, long long max_rings = -1) const;
  bool empty() const { return union_ == nullptr || union_->empty(); }
  double cell() const { return cell_; }
  double max_radius() const { return max_radius_; }

 private:
  std::int64_t cell_key(const Point& x) const;
  const BallUnion* union_ = nullptr;
  double cell_ = 1.0;
  double max_radius_ = 0.0;
  Point bound_center_;
  double bound_radius_ = 0.0;
  bool brute_ = true;
  std::unordered_map<std::int64_t, std::vector<int>> cells_;
};

}  // namespace balayage
