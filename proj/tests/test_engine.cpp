#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <vector>

#include "balayage/engine.hpp"
#include "balayage/errors.hpp"
#include "balayage/measure.hpp"

using namespace balayage;

namespace {

constexpr double kPi = 3.141592653589793238462643383279502884;

McParams fast(std::size_t samples, std::uint64_t seed = 1) {
  McParams mc;
  mc.samples = samples;
  mc.seed = seed;
  mc.workers = 1;
  return mc;
}

bool within(const Estimate& e, double want, double slack = 0.0) {
  return std::abs(e.value - want) <= 3.0 * e.sigma + slack;
}

}  // namespace

TEST_CASE("classical hitting probability of a ball in 3-space is r over R") {
  const KernelSpec k = KernelSpec::classical(3);
  const BallUnion a({Ball({0.0, 0.0, 0.0}, 1.0)});
  const DomainSpec full = DomainSpec::full_space(3);
  for (double big_r : {2.0, 5.0}) {
    const Estimate e =
        hit_probability({big_r, 0.0, 0.0}, a, full, k, fast(60000));
    CHECK(within(e, 1.0 / big_r, 2e-3));
    CHECK(e.sigma > 0.0);
    CHECK(e.sigma < 0.01);
  }
}

TEST_CASE("classical planar walk in a disc domain uses the log ratio") {
  // recurrent d = 2 needs a bounded domain: P(hit r0 before R) =
  // ln(R/|x|) / ln(R/r0)
  const KernelSpec k = KernelSpec::classical(2);
  const DomainSpec dom = DomainSpec::open_ball(Ball({0.0, 0.0}, 4.0));
  const BallUnion a({Ball({0.0, 0.0}, 1.0)});
  const Estimate e = hit_probability({2.0, 0.0}, a, dom, k, fast(60000));
  const double want = std::log(4.0 / 2.0) / std::log(4.0 / 1.0);
  CHECK(within(e, want, 2e-3));
}

TEST_CASE("stable planar chain hits a disc with the arcsine law") {
  // d = 2, alpha = 1: P(hit B(0,r) from x) = (2/pi) arcsin(r/|x|)
  const KernelSpec k = KernelSpec::riesz(2, 1.0);
  const BallUnion a({Ball({0.0, 0.0}, 1.0)});
  const DomainSpec full = DomainSpec::full_space(2);
  for (double xr : {1.8, 3.0}) {
    const Estimate e = hit_probability({xr, 0.0}, a, full, k, fast(60000));
    const double want = 2.0 / kPi * std::asin(1.0 / xr);
    CHECK(within(e, want, 2e-3));
  }
}

TEST_CASE("sweeping keeps atoms already on the stop set") {
  const KernelSpec k = KernelSpec::classical(3);
  const DomainSpec full = DomainSpec::full_space(3);
  const StopSet stop(BallUnion({Ball({0.0, 0.0, 0.0}, 1.0)}), full);
  std::vector<Atom> atoms;
  Atom in;
  in.x = {0.5, 0.0, 0.0};
  in.w = 0.25;
  Atom out;
  out.x = {4.0, 0.0, 0.0};
  out.w = 0.75;
  atoms.push_back(in);
  atoms.push_back(out);
  const WeightedMeasure nu = WeightedMeasure::from_atoms(atoms);
  const WeightedMeasure swept = balayage_measure(nu, stop, k, fast(30000));
  CHECK(swept.exact_count() == 1);
  CHECK(swept.atoms()[0].cause == StopCause::Source);
  CHECK(swept.atoms()[0].w == doctest::Approx(0.25));
  // remaining mass hits with probability 1/4
  const Estimate total = total_mass_estimate(swept);
  CHECK(within(total, 0.25 + 0.75 * 0.25, 2e-3));
  // every chain endpoint lies on the unit sphere
  for (std::size_t i = swept.exact_count(); i < swept.atoms().size(); ++i) {
    CHECK(norm(swept.atoms()[i].x) == doctest::Approx(1.0).epsilon(1e-6));
    CHECK(swept.atoms()[i].ball == 0);
    CHECK(swept.atoms()[i].cause == StopCause::Ball);
  }
}

TEST_CASE("stable chains land inside the stop ball, not only on its sphere") {
  const KernelSpec k = KernelSpec::riesz(2, 1.0);
  const DomainSpec full = DomainSpec::full_space(2);
  const StopSet stop(BallUnion({Ball({0.0, 0.0}, 1.0)}), full);
  const WeightedMeasure swept =
      balayage_point({1.5, 0.0}, stop, k, fast(20000));
  int interior = 0;
  for (const Atom& a : swept.atoms()) {
    CHECK(norm(a.x) <= 1.0 + 1e-12);
    if (norm(a.x) < 1.0 - 1e-9) ++interior;
  }
  // overshooting jumps terminate strictly inside with positive probability
  CHECK(interior > 0);
}

TEST_CASE("window exits stop on leaving the window") {
  const KernelSpec k = KernelSpec::classical(3);
  const DomainSpec full = DomainSpec::full_space(3);
  const OpenSet w = OpenSet::from_balls({Ball({0.0, 0.0, 0.0}, 2.0)});
  const StopSet stop(BallUnion{}, std::nullopt, w, full);
  const WeightedMeasure exit = balayage_point({0.0, 0.0, 0.0}, stop, k, fast(20000));
  CHECK(total_mass_estimate(exit).value == doctest::Approx(1.0));
  for (const Atom& a : exit.atoms()) {
    CHECK(a.cause == StopCause::Window);
    CHECK(norm(a.x) == doctest::Approx(2.0).epsilon(1e-6));
  }
}

TEST_CASE("open target stops on entry") {
  const KernelSpec k = KernelSpec::riesz(2, 1.0);
  const DomainSpec full = DomainSpec::full_space(2);
  const OpenSet target = OpenSet::from_balls({Ball({0.0, 0.0}, 1.0)});
  const StopSet stop(BallUnion{}, target, std::nullopt, full);
  const WeightedMeasure m = balayage_point({2.0, 0.0}, stop, k, fast(20000));
  for (const Atom& a : m.atoms()) {
    CHECK(a.cause == StopCause::OpenTarget);
    CHECK(target.contains(a.x));
  }
  const Estimate total = total_mass_estimate(m);
  // entering the open ball is the same event as hitting its closure (the
  // sphere is polar for the jump chain)
  const double want = 2.0 / kPi * std::asin(1.0 / 2.0);
  CHECK(within(total, want, 3e-3));
}

TEST_CASE("identical seeds give identical output for any worker count") {
  const KernelSpec k = KernelSpec::classical(3);
  const DomainSpec full = DomainSpec::full_space(3);
  const StopSet stop(BallUnion({Ball({0.0, 0.0, 0.0}, 1.0)}), full);
  McParams a = fast(8000, 99);
  a.workers = 1;
  McParams b = a;
  b.workers = 3;
  const WeightedMeasure ma = balayage_point({2.0, 0.0, 0.0}, stop, k, a);
  const WeightedMeasure mb = balayage_point({2.0, 0.0, 0.0}, stop, k, b);
  REQUIRE(ma.atoms().size() == mb.atoms().size());
  for (std::size_t i = 0; i < ma.atoms().size(); ++i) {
    CHECK(ma.atoms()[i].x == mb.atoms()[i].x);
    CHECK(ma.atoms()[i].w == mb.atoms()[i].w);
  }
  CHECK(ma.lost_mass() == mb.lost_mass());
}

TEST_CASE("sweep mass vector matches the full sweep per ball") {
  const KernelSpec k = KernelSpec::classical(3);
  const DomainSpec full = DomainSpec::full_space(3);
  const BallUnion two({Ball({0.0, 0.0, 0.0}, 1.0), Ball({4.0, 0.0, 0.0}, 0.5)});
  const StopSet stop(two, full);
  const WeightedMeasure nu = WeightedMeasure::point_mass({2.0, 0.0, 0.0});
  const std::vector<Estimate> masses = sweep_mass_vector(nu, stop, k, fast(30000));
  const WeightedMeasure swept = balayage_measure(nu, stop, k, fast(30000));
  REQUIRE(masses.size() == 2);
  for (std::size_t i = 0; i < 2; ++i) {
    const Estimate direct = mass_on(swept, two[static_cast<std::size_t>(i)]);
    CHECK(masses[i].value == doctest::Approx(direct.value).epsilon(1e-12));
  }
}

TEST_CASE("reduced measure keeps the inside part and sweeps the rest") {
  const KernelSpec k = KernelSpec::classical(3);
  const DomainSpec full = DomainSpec::full_space(3);
  const BallUnion a({Ball({0.0, 0.0, 0.0}, 1.0)});
  std::vector<Atom> atoms;
  Atom inside;
  inside.x = {0.2, 0.0, 0.0};
  inside.w = 0.5;
  Atom outside;
  outside.x = {2.0, 0.0, 0.0};
  outside.w = 0.5;
  atoms.push_back(inside);
  atoms.push_back(outside);
  const WeightedMeasure nu = WeightedMeasure::from_atoms(atoms);
  const WeightedMeasure red = reduced_measure_closed(nu, a, full, k, fast(30000));
  // inside half stays put; outside half contributes 0.5 * (1/2) on the sphere
  CHECK(red.atoms()[0].x == inside.x);
  CHECK(red.atoms()[0].w == doctest::Approx(0.5));
  const Estimate total = total_mass_estimate(red);
  CHECK(within(total, 0.5 + 0.5 * 0.5, 2e-3));
}

TEST_CASE("two-stage sweeps compose like one sweep") {
  // sweep onto the exit law of a big ball, then onto the target, equals the
  // direct sweep onto the target (strong Markov); checked weakly via masses
  const KernelSpec k = KernelSpec::classical(3);
  const DomainSpec full = DomainSpec::full_space(3);
  const BallUnion target({Ball({0.0, 0.0, 0.0}, 1.0)});
  const Point start{3.0, 0.0, 0.0};

  const OpenSet big = OpenSet::from_balls({Ball({0.0, 0.0, 0.0}, 2.0)});
  const StopSet exit_big(BallUnion{}, std::nullopt, big, full);
  const WeightedMeasure stage1 = balayage_point(start, exit_big, k, fast(20000));

  // the start is outside the window: the exit law is the start itself
  CHECK(stage1.exact_count() == stage1.atoms().size());

  const OpenSet inner = OpenSet::from_balls({Ball({3.0, 0.0, 0.0}, 1.5)});
  const StopSet exit_inner(BallUnion{}, std::nullopt, inner, full);
  const WeightedMeasure stage1b = balayage_point(start, exit_inner, k, fast(20000));
  const StopSet onto(target, full);
  const WeightedMeasure via = balayage_measure(stage1b, onto, k, fast(20000, 7));
  const WeightedMeasure direct = balayage_point(start, onto, k, fast(20000, 8));
  const Estimate ma = total_mass_estimate(via);
  const Estimate mb = total_mass_estimate(direct);
  CHECK(std::abs(ma.value - mb.value) <=
        3.0 * std::hypot(ma.sigma, mb.sigma) + 2e-3);
}

TEST_CASE("structural validation of inputs") {
  const KernelSpec k = KernelSpec::classical(3);
  const DomainSpec full = DomainSpec::full_space(3);
  const StopSet stop(BallUnion({Ball({0.0, 0.0, 0.0}, 1.0)}), full);
  CHECK_THROWS_AS(balayage_measure(WeightedMeasure(), stop, k, fast(100)),
                  StructuralError);
  // dimension mismatch between measure and domain
  CHECK_THROWS_AS(balayage_point({1.0, 0.0}, stop, k, fast(100)), StructuralError);
  // domain must contain the sources
  const DomainSpec small = DomainSpec::open_ball(Ball({0.0, 0.0, 0.0}, 1.5));
  const StopSet stop2(BallUnion({Ball({0.0, 0.0, 0.0}, 1.0)}), small);
  CHECK_THROWS_AS(balayage_point({2.0, 0.0, 0.0}, stop2, k, fast(100)),
                  StructuralError);
  // recurrent planar walk needs a bounded domain
  const KernelSpec k2 = KernelSpec::classical(2);
  const DomainSpec full2 = DomainSpec::full_space(2);
  const StopSet stop3(BallUnion({Ball({0.0, 0.0}, 1.0)}), full2);
  CHECK_THROWS_AS(balayage_point({2.0, 0.0}, stop3, k2, fast(100)),
                  StructuralError);
}

TEST_CASE("empty stop set with no window or target is rejected") {
  const DomainSpec full = DomainSpec::full_space(3);
  CHECK_THROWS_AS(StopSet(BallUnion{}, full), StructuralError);
}

TEST_CASE("diagnostics record escapes") {
  const KernelSpec k = KernelSpec::classical(3);
  const DomainSpec full = DomainSpec::full_space(3);
  const StopSet stop(BallUnion({Ball({0.0, 0.0, 0.0}, 1.0)}), full);
  const WeightedMeasure m = balayage_point({2.0, 0.0, 0.0}, stop, k, fast(20000));
  CHECK(m.diagnostics().escaped_mass > 0.0);
  CHECK(m.diagnostics().escape_radius > 2.0);
  CHECK(m.lost_mass() == doctest::Approx(m.diagnostics().escaped_mass +
                                         m.diagnostics().killed_mass +
                                         m.diagnostics().truncated_mass));
}
