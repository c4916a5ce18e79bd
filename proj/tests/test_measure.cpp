#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <vector>

#include "balayage/errors.hpp"
#include "balayage/measure.hpp"
#include "balayage/rng.hpp"

using namespace balayage;

namespace {

Atom mk(Point x, double w, StopCause c = StopCause::Ball, int ball = -1) {
  Atom a;
  a.x = std::move(x);
  a.w = w;
  a.ball = ball;
  a.cause = c;
  return a;
}

}  // namespace

TEST_CASE("exact measures account their mass") {
  const WeightedMeasure m = WeightedMeasure::from_atoms(
      {mk({0.0, 0.0}, 0.25), mk({1.0, 0.0}, 0.75)});
  CHECK(m.total_mass() == doctest::Approx(1.0));
  CHECK(m.is_exact());
  CHECK(m.lost_mass() == 0.0);
  CHECK(total_mass_estimate(m).sigma == 0.0);
}

TEST_CASE("chain output validates conservation") {
  std::vector<Atom> atoms{mk({0.0, 0.0}, 0.5, StopCause::Source),
                          mk({1.0, 0.0}, 0.1), mk({2.0, 0.0}, 0.1)};
  Diagnostics d;
  // 0.5 exact + 2 of 5 walks absorbed at 0.1 each + 0.3 lost = 1.0
  const WeightedMeasure ok =
      WeightedMeasure::chain_output(atoms, 1, 5, 0.1, 0.3, 1.0, d);
  CHECK(ok.exact_count() == 1);
  CHECK(ok.walk_count() == 5);
  CHECK(ok.total_mass() == doctest::Approx(0.7));
  CHECK_THROWS_AS(WeightedMeasure::chain_output(atoms, 1, 5, 0.1, 0.4, 1.0, d),
                  StructuralError);
  CHECK_THROWS_AS(WeightedMeasure::chain_output(atoms, 9, 5, 0.1, 0.3, 1.0, d),
                  StructuralError);
}

TEST_CASE("restriction moves dropped mass to lost") {
  std::vector<Atom> atoms;
  for (int i = 0; i < 10; ++i)
    atoms.push_back(mk({static_cast<double>(i), 0.0}, 0.1, StopCause::Ball, i % 2));
  Diagnostics d;
  const WeightedMeasure m = WeightedMeasure::chain_output(atoms, 0, 10, 0.1, 0.0, 1.0, d);
  const WeightedMeasure even = m.restricted([](const Atom& a) { return a.ball == 0; });
  CHECK(even.total_mass() == doctest::Approx(0.5));
  CHECK(even.lost_mass() == doctest::Approx(0.5));
  CHECK(even.total_input() == doctest::Approx(1.0));
  CHECK(even.walk_count() == 10);
  even.check_conservation();
}

TEST_CASE("mass_on counts closed-ball hits") {
  const WeightedMeasure m = WeightedMeasure::from_atoms(
      {mk({0.0, 0.0}, 0.3), mk({1.0, 0.0}, 0.2), mk({5.0, 0.0}, 0.5)});
  CHECK(mass_on(m, Ball({0.0, 0.0}, 1.0)).value == doctest::Approx(0.5));
  CHECK(mass_on(m, Ball({5.0, 0.0}, 0.1)).value == doctest::Approx(0.5));
}

TEST_CASE("monte carlo standard errors scale like a binomial") {
  // 1e4 walks of weight 1e-4, half absorbed at one point
  std::vector<Atom> atoms;
  for (int i = 0; i < 5000; ++i) atoms.push_back(mk({0.0, 0.0}, 1e-4));
  Diagnostics d;
  const WeightedMeasure m =
      WeightedMeasure::chain_output(atoms, 0, 10000, 1e-4, 0.5, 1.0, d);
  const Estimate e = mass_on(m, Ball({0.0, 0.0}, 0.5));
  CHECK(e.value == doctest::Approx(0.5).epsilon(1e-9));
  // binomial sigma sqrt(p(1-p)/n) = 0.005
  CHECK(e.sigma == doctest::Approx(0.005).epsilon(0.01));
}

TEST_CASE("potential evaluation and caps") {
  const Potential q = Potential::newton_kernel({0.0, 0.0, 0.0}, 2.0);
  CHECK(q.eval({1.0, 0.0, 0.0}) == doctest::Approx(2.0));
  CHECK(q.eval({2.0, 0.0, 0.0}) == doctest::Approx(1.0));
  CHECK_THROWS_AS(q.eval({0.0, 0.0, 0.0}), ParameterError);

  const Potential capped = Potential::newton_kernel({0.0, 0.0, 0.0}, 2.0, 4.0);
  bool was_capped = false;
  CHECK(capped.eval({0.0, 0.0, 0.0}, &was_capped) == doctest::Approx(4.0));
  CHECK(was_capped);
  CHECK(capped.eval({1.0, 0.0, 0.0}, &was_capped) == doctest::Approx(2.0));
  CHECK(!was_capped);

  const Potential r = Potential::riesz_kernel({0.0, 0.0}, 1.0, 3.0);
  CHECK(r.eval({0.0, 2.0}) == doctest::Approx(1.5));

  const Potential b = Potential::bump({0.0, 0.0}, 2.0, 5.0);
  CHECK(b.eval({0.0, 0.0}) == doctest::Approx(5.0));
  CHECK(b.eval({2.0, 0.0}) == 0.0);
  CHECK(b.eval({3.0, 0.0}) == 0.0);
  CHECK(b.eval({1.0, 0.0}) > 0.0);
  CHECK(b.eval({1.0, 0.0}) < 5.0);
}

TEST_CASE("green function of a ball vanishes outside and is symmetric-ish") {
  const Ball dom({0.0, 0.0, 0.0}, 2.0);
  const Point pole{0.5, 0.0, 0.0};
  const Potential g = Potential::green_ball(dom, pole);
  CHECK(g.eval({2.0, 0.0, 0.0}) == 0.0);
  CHECK(g.eval({2.5, 0.0, 0.0}) == 0.0);
  CHECK(g.eval({1.0, 0.0, 0.0}) > 0.0);
  // classical d=3 closed form: 1/|x-p| - (R/|p|) / |x - R^2 p /|p|^2|
  const Point x{0.0, 1.0, 0.0};
  const double direct = 1.0 / dist(x, pole);
  const Point image{8.0, 0.0, 0.0};  // R^2/|p|^2 * p = 4/0.25 * p
  const double reflected = (2.0 / 0.5) / dist(x, image);
  CHECK(g.eval(x) == doctest::Approx(direct - reflected).epsilon(1e-12));
  // zero on the sphere through any direction
  CHECK(g.eval({0.0, 0.0, 2.0}) == doctest::Approx(0.0).epsilon(1e-12));
  CHECK_THROWS_AS(g.eval(pole), ParameterError);
}

TEST_CASE("superharmonic gate eligibility") {
  const KernelSpec cls = KernelSpec::classical(3);
  const KernelSpec stb = KernelSpec::riesz(3, 1.5);
  const DomainSpec full = DomainSpec::full_space(3);

  // newton kernels are harmonic off the pole for the classical chain only
  CHECK(Potential::newton_kernel({0.0, 0.0, 0.0}).mass_gate_eligible(cls, full));
  CHECK(!Potential::newton_kernel({0.0, 0.0, 0.0}).mass_gate_eligible(stb, full));
  // matching riesz kernel for the stable chain
  CHECK(Potential::riesz_kernel({0.0, 0.0, 0.0}, 1.5).mass_gate_eligible(stb, full));
  CHECK(!Potential::riesz_kernel({0.0, 0.0, 0.0}, 1.0).mass_gate_eligible(stb, full));
  // capped kernels stay eligible (minimum of superharmonics)
  CHECK(Potential::newton_kernel({0.0, 0.0, 0.0}, 1.0, 5.0).mass_gate_eligible(cls, full));
  // bumps are not superharmonic
  CHECK(!Potential::bump({0.0, 0.0, 0.0}, 1.0).mass_gate_eligible(cls, full));
  // the green function of the domain ball is superharmonic on that ball
  const DomainSpec ball2 = DomainSpec::open_ball(Ball({0.0, 0.0, 0.0}, 2.0));
  CHECK(Potential::green_ball(Ball({0.0, 0.0, 0.0}, 2.0), {0.5, 0.0, 0.0})
            .mass_gate_eligible(cls, ball2));
  CHECK(!Potential::green_ball(Ball({0.0, 0.0, 0.0}, 2.0), {0.5, 0.0, 0.0})
            .mass_gate_eligible(cls, full));
}

TEST_CASE("integrate reports value and error against exact measures") {
  const Potential q = Potential::newton_kernel({0.0, 0.0, 0.0});
  const WeightedMeasure m = WeightedMeasure::from_atoms(
      {mk({1.0, 0.0, 0.0}, 0.5), mk({2.0, 0.0, 0.0}, 0.5)});
  const Estimate e = integrate(m, q);
  CHECK(e.value == doctest::Approx(0.75));
  CHECK(e.sigma == 0.0);

  IntegrateStats stats;
  // cap 0.5 binds at the pole atom (cap substitutes) and at distance 1
  const Potential capped = Potential::newton_kernel({1.0, 0.0, 0.0}, 1.0, 0.5);
  const Estimate c = integrate(m, capped, &stats);
  CHECK(stats.capped_evals == 2);
  CHECK(c.value == doctest::Approx(0.5));
}

TEST_CASE("integrate sigma on a chain suffix matches the spread") {
  std::vector<Atom> atoms;
  for (int i = 0; i < 1000; ++i)
    atoms.push_back(mk({i % 2 ? 1.0 : 2.0, 0.0, 0.0}, 1e-3));
  Diagnostics d;
  const WeightedMeasure m =
      WeightedMeasure::chain_output(atoms, 0, 1000, 1e-3, 0.0, 1.0, d);
  const Potential q = Potential::newton_kernel({0.0, 0.0, 0.0});
  const Estimate e = integrate(m, q);
  CHECK(e.value == doctest::Approx(0.75).epsilon(1e-12));
  // population of 1 and 0.5 with equal frequency: sd = 0.25
  CHECK(e.sigma == doctest::Approx(0.25 / std::sqrt(1000.0)).epsilon(0.01));
}

TEST_CASE("dictionary validation catches domination failures") {
  Dictionary dict;
  Potential member = Potential::newton_kernel({3.0, 0.0, 0.0}, 1.0, 10.0);
  member.id = "member";
  dict.members.push_back({member, true});
  dict.reference = Potential::newton_kernel({-3.0, 0.0, 0.0}, 4.0);
  dict.bound_multiple = 1.0;
  const OpenSet region = OpenSet::from_balls({Ball({0.0, 0.0, 0.0}, 1.0)});
  Rng rng(1, 0);
  // on the unit ball: member <= 1/ (3-1) * ... vs reference >= 4/4 = 1
  CHECK_NOTHROW(validate_dictionary(dict, region, 4000, rng));

  Dictionary bad = dict;
  bad.reference = Potential::newton_kernel({-3.0, 0.0, 0.0}, 0.5);
  CHECK_THROWS_AS(validate_dictionary(bad, region, 4000, rng), ParameterError);

  Dictionary none = dict;
  none.reference.reset();
  CHECK_NOTHROW(validate_dictionary(none, region, 4000, rng));
}

TEST_CASE("weak distance is the dictionary maximum") {
  Dictionary dict;
  Potential a = Potential::newton_kernel({0.0, 0.0, 0.0});
  a.id = "a";
  Potential b = Potential::bump({0.0, 0.0, 0.0}, 3.0);
  b.id = "b";
  dict.members.push_back({a, true});
  dict.members.push_back({b, false});

  const WeightedMeasure m1 = WeightedMeasure::point_mass({1.0, 0.0, 0.0});
  const WeightedMeasure m2 = WeightedMeasure::point_mass({2.0, 0.0, 0.0});
  const WeakDistanceReport rep = weak_distance(m1, m2, dict);
  CHECK(rep.rows.size() == 2);
  CHECK(rep.rows[0].id == "a");
  CHECK(rep.rows[0].diff == doctest::Approx(0.5));
  // bump decays from 1 at 1/3 radius toward 2/3 radius
  CHECK(rep.value >= 0.5);
  const WeakDistanceReport same = weak_distance(m1, m1, dict);
  CHECK(same.value == doctest::Approx(0.0));
}

TEST_CASE("potential factories validate their inputs") {
  CHECK_THROWS_AS(Potential::riesz_kernel({0.0, 0.0}, 2.5), ParameterError);
  CHECK_THROWS_AS(Potential::newton_kernel({0.0}, 1.0), ParameterError);  // d >= 3
  CHECK_THROWS_AS(Potential::bump({0.0, 0.0}, -1.0), ParameterError);
  CHECK_THROWS_AS(Potential::newton_kernel({0.0, 0.0, 0.0}, -1.0), ParameterError);
}
