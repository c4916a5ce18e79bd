#include "balayage/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <utility>

#include "balayage/errors.hpp"

namespace balayage {
namespace {

std::string strf(const char* fmt, ...) {
  char buf[256];
  va_list ap;
  va_start(ap, fmt);
  std::vsnprintf(buf, sizeof(buf), fmt, ap);
  va_end(ap);
  return std::string(buf);
}

std::uint64_t stage_seed(std::uint64_t base, std::uint64_t counter) {
  std::uint64_t z = base + 0x9e3779b97f4a7c15ULL * (counter + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

McParams with_seed(McParams mc, std::uint64_t seed) {
  mc.seed = seed;
  return mc;
}

std::vector<Estimate> integrate_dict(const WeightedMeasure& m, const Dictionary& dict) {
  std::vector<Estimate> out;
  out.reserve(dict.members.size());
  for (const DictionaryEntry& e : dict.members) out.push_back(integrate(m, e.q));
  return out;
}

void append_gate(std::vector<MassGateRow>& gate, const std::string& stage,
                 const std::vector<Estimate>& before, const WeightedMeasure& swept,
                 const Dictionary& dict, const KernelSpec& k, const DomainSpec& domain) {
  for (std::size_t i = 0; i < dict.members.size(); ++i) {
    const DictionaryEntry& e = dict.members[i];
    if (!e.allow_gate || !e.q.mass_gate_eligible(k, domain)) continue;
    const Estimate after = integrate(swept, e.q);
    const double sig = std::hypot(before[i].sigma, after.sigma);
    gate.push_back({e.q.id, stage, before[i].value, after.value, sig,
                    after.value <= before[i].value + 3.0 * sig + 1e-12});
  }
}

Estimate mixture(const std::vector<std::vector<Estimate>>& per_set,
                 const std::vector<double>& lambda, std::size_t member) {
  Estimate out;
  double var = 0.0;
  for (std::size_t n = 0; n < lambda.size(); ++n) {
    out.value += lambda[n] * per_set[n][member].value;
    var += lambda[n] * lambda[n] * per_set[n][member].sigma * per_set[n][member].sigma;
  }
  out.sigma = std::sqrt(var);
  return out;
}

// Point of the closed set (closure membership uses the conservative entry
// distance, erring towards inclusion).
bool closure_member(const OpenSet& u, const Point& x) {
  return u.contains(x) || u.entry_dist(x) <= 1e-12;
}

Point uniform_in_ball(const Ball& b, Rng& rng) {
  Point dir = sample_sphere_uniform(b.dimension(), rng);
  const double r = b.radius * std::pow(rng.uniform(), 1.0 / static_cast<double>(b.dimension()));
  Point x = b.center;
  for (std::size_t k = 0; k < x.size(); ++k) x[k] += r * dir[k];
  return x;
}

}  // namespace

// ---------------------------------------------------------------------------

GridLadderReport approximate_open_balayage(const WeightedMeasure& nu, const OpenSet& u,
                                           const std::optional<OpenSet>& window,
                                           const DomainSpec& domain, const LadderSpec& ladder,
                                           const Dictionary& dict, const KernelSpec& k,
                                           const McParams& mc) {
  const std::size_t dim = domain.dimension();
  if (u.dimension() != dim) throw ParameterError("grid ladder: set dimension mismatch");
  if (window && window->dimension() != dim)
    throw ParameterError("grid ladder: window dimension mismatch");
  if (ladder.offset.size() != dim) throw ParameterError("grid ladder: offset dimension mismatch");
  if (!(ladder.a > 0.0 && ladder.a < 1.0))
    throw ParameterError("grid ladder: radius scale must lie in (0,1)");
  if (ladder.levels.empty()) throw ParameterError("grid ladder: no levels");
  for (std::size_t i = 0; i < ladder.levels.size(); ++i) {
    if (ladder.levels[i] <= 0 || (i > 0 && ladder.levels[i] <= ladder.levels[i - 1]))
      throw ParameterError("grid ladder: levels must be strictly increasing positives");
  }
  if (dict.members.empty()) throw ParameterError("grid ladder: empty dictionary");
  if (window && !window->is_whole_domain()) {
    for (const Atom& at : nu.atoms())
      if (!window->contains(at.x)) throw StructuralError("grid ladder: source atom outside the window");
  }

  GridLadderReport rep;
  std::uint64_t ctr = 0;
  const std::vector<Estimate> input = integrate_dict(nu, dict);

  const WeightedMeasure ref = balayage_measure(
      nu, StopSet(BallUnion{}, u, window, domain), k, with_seed(mc, stage_seed(mc.seed, ctr++)));
  rep.reference = integrate_dict(ref, dict);
  append_gate(rep.gate, "reference", input, ref, dict, k, domain);
  rep.base.reserve(dict.members.size());
  for (const Estimate& e : rep.reference) rep.base.push_back(std::max(std::abs(e.value), 1e-12));

  std::vector<double> prev(dict.members.size(), kInf);
  rep.member_decreasing.assign(dict.members.size(), true);
  for (int m : ladder.levels) {
    GridLadderLevel lev;
    lev.m = m;
    BallUnion a_m = grid_balls(GridSpec(ladder.offset, ladder.a, m), u);
    lev.ball_count = a_m.size();
    if (a_m.empty()) {
      rep.warnings.push_back(strf("empty lattice approximation at level %d", m));
      if (!window) {
        rep.warnings.push_back(strf("level %d skipped: no window to stop on", m));
        rep.levels.push_back(lev);
        continue;
      }
    }
    const WeightedMeasure est =
        balayage_measure(nu, StopSet(std::move(a_m), std::nullopt, window, domain), k,
                         with_seed(mc, stage_seed(mc.seed, ctr++)));
    lev.lost_mass = est.lost_mass();
    for (std::size_t i = 0; i < dict.members.size(); ++i) {
      const Estimate e = integrate(est, dict.members[i].q);
      const double diff = e.value - rep.reference[i].value;
      lev.rows.push_back({dict.members[i].q.id, e, rep.reference[i], diff});
      const double ad = std::abs(diff);
      lev.max_abs_diff = std::max(lev.max_abs_diff, ad);
      lev.max_rel_diff = std::max(lev.max_rel_diff, ad / rep.base[i]);
      if (!(ad < prev[i])) rep.member_decreasing[i] = false;
      prev[i] = ad;
    }
    append_gate(rep.gate, strf("lattice m=%d", m), input, est, dict, k, domain);
    rep.levels.push_back(std::move(lev));
  }
  rep.strictly_decreasing = rep.levels.size() >= 2;
  for (bool b : rep.member_decreasing) rep.strictly_decreasing = rep.strictly_decreasing && b;
  if (!rep.levels.empty()) rep.final_max_rel = rep.levels.back().max_rel_diff;
  return rep;
}

// ---------------------------------------------------------------------------

namespace {

// x lies in some ball of the full lattice with offset xj: the scaled
// coordinates M x - xj are within a of an integer vector.
bool in_lattice(const Point& x, double xj1, double a, int m) {
  double s2 = 0.0;
  for (std::size_t k = 0; k < x.size(); ++k) {
    const double w = m * x[k] - (k == 0 ? xj1 : 0.0);
    const double e = w - std::round(w);
    s2 += e * e;
    if (s2 > a * a) return false;
  }
  return s2 <= a * a;
}

void check_reference_dominates(const TheoremInputs& in, Rng& rng) {
  const Potential& p = *in.dict.reference;
  for (const OpenSet& u : in.u_sets) {
    std::size_t tested = 0;
    for (std::size_t trial = 0; trial < 2000 && tested < 400; ++trial) {
      const Ball& b = u.cover()[trial % u.cover().size()];
      const Point y = uniform_in_ball(b, rng);
      if (!u.contains(y)) continue;
      ++tested;
      if (p.eval(y) < 1.0 - 1e-9)
        throw ParameterError("theorem: reference potential must dominate 1 on the target sets");
    }
    if (tested == 0)
      throw ParameterError("theorem: could not sample a target set (degenerate geometry)");
  }
}

// Sweep onto U union W^c.  When U carries holes sharing the window cover,
// the stop region is the complement of the holes, so the chain is an exit
// chain from the hole union.
WeightedMeasure sweep_onto_set(const WeightedMeasure& nu, const OpenSet& u, const OpenSet& w,
                               const DomainSpec& domain, const KernelSpec& k,
                               const McParams& mc) {
  if (u.holes().empty())
    return balayage_measure(nu, StopSet(BallUnion{}, u, w, domain), k, mc);
  return balayage_measure(
      nu, StopSet(BallUnion{}, std::nullopt, OpenSet::from_balls(u.holes()), domain), k, mc);
}

bool covers_match(const std::vector<Ball>& a, const std::vector<Ball>& b) {
  if (a.size() != b.size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (a[i].radius != b[i].radius || a[i].center != b[i].center) return false;
  }
  return true;
}

}  // namespace

TheoremReport run_theorem_pipeline(const TheoremInputs& in, const TheoremOptions& opt) {
  const KernelSpec& k = in.kernel;
  const std::size_t dim = in.domain.dimension();
  const int d = k.d;
  const std::size_t sets = in.u_sets.size();
  if (k.d != static_cast<int>(dim))
    throw ParameterError("theorem: kernel/domain dimension mismatch");
  if (sets == 0) throw ParameterError("theorem: no target sets");
  if (in.lambda.size() != sets) throw ParameterError("theorem: weight count mismatch");
  double lsum = 0.0;
  for (double l : in.lambda) {
    if (!(l >= 0.0)) throw ParameterError("theorem: negative weight");
    lsum += l;
  }
  if (std::abs(lsum - 1.0) > 1e-9) throw ParameterError("theorem: weights must sum to one");
  if (in.window.is_whole_domain() || in.window.dimension() != dim ||
      !std::isfinite(in.window.circumradius()))
    throw StructuralError("theorem: window must be a bounded open set");
  if (!in.window.holes().empty())
    throw ParameterError("theorem: window must be a plain ball union");
  if (!in.nu.is_exact() || in.nu.atoms().empty())
    throw ParameterError("theorem: input measure must be a nonempty exact atom list");
  for (const Atom& at : in.nu.atoms())
    if (!in.window.contains(at.x)) throw StructuralError("theorem: source atom outside the window");
  if (!in.dict.reference) throw ParameterError("theorem: dictionary needs a reference potential");
  if (in.dict.members.empty()) throw ParameterError("theorem: empty dictionary");
  if (!(in.dict.bound_multiple > 0.0) || in.dict.bound_multiple > 1.0 + 1e-12)
    throw ParameterError("theorem: members must be bounded by the reference potential");
  for (const OpenSet& u : in.u_sets) {
    if (u.dimension() != dim) throw ParameterError("theorem: target set dimension mismatch");
    if (u.is_whole_domain()) throw ParameterError("theorem: target set must be bounded");
    if (!u.holes().empty()) {
      if (!covers_match(u.cover(), in.window.cover()))
        throw ParameterError("theorem: a holed target set must share the window cover");
      for (const Ball& h : u.holes()) {
        if (!(h.radius > 0.0) || in.window.interior_dist(h.center) < h.radius - 1e-12)
          throw ParameterError("theorem: target hole not inside the window");
      }
    } else {
      for (const Ball& b : u.cover()) {
        if (in.window.interior_dist(b.center) <= b.radius)
          throw StructuralError("theorem: target closure not compactly inside the window");
      }
    }
  }
  if (!(opt.eta > 0.0 && opt.eta < 1.0)) throw ParameterError("theorem: eta must lie in (0,1)");

  TheoremReport rep;
  std::uint64_t ctr = 0;
  Rng vrng(opt.seed, 0xD1C7u);
  validate_dictionary(in.dict, in.window, 4000, vrng);
  check_reference_dominates(in, vrng);
  const Potential& p = *in.dict.reference;

  // Budget schedule: delta from eta, modulus delta' by halving, then N and a.
  rep.params.k = static_cast<int>(sets);
  rep.params.eta = opt.eta;
  rep.params.nu_p = integrate(in.nu, p).value;
  const double delta = opt.eta / (6.0 * rep.params.nu_p + 3.0 * static_cast<double>(sets));
  rep.params.delta = delta;
  const double cap = delta0(d, k.alpha);
  if (delta > cap)
    throw ParameterError(strf("theorem: delta %.4g exceeds the shrink cap %.4g", delta, cap));

  double dprime = delta;
  {
    Rng rng(opt.seed, 0xC011u);
    for (int halving = 0;; ++halving) {
      if (halving > 60) throw SolverError("theorem: continuity modulus underflow");
      double osc = 0.0;
      for (std::size_t t = 0; t < opt.modulus_pairs; ++t) {
        const OpenSet& u = in.u_sets[rng.next_u64() % sets];
        const Ball& b = u.cover()[rng.next_u64() % u.cover().size()];
        const Point y = uniform_in_ball(b, rng);
        if (!closure_member(u, y)) continue;
        const Point dir = sample_sphere_uniform(dim, rng);
        Point z = y;
        const double step = dprime * 0.999 * rng.uniform();
        for (std::size_t c = 0; c < dim; ++c) z[c] += step * dir[c];
        if (!closure_member(u, z)) continue;
        for (const DictionaryEntry& e : in.dict.members)
          osc = std::max(osc, std::abs(e.q.eval(y) - e.q.eval(z)));
      }
      if (osc <= 0.8 * delta) break;
      dprime *= 0.5;
    }
  }
  rep.params.delta_prime = dprime;

  const auto big_n = static_cast<std::size_t>(std::floor(sets + rep.params.nu_p / delta)) + 1;
  if (big_n > 200000)
    throw ParameterError("theorem: offset count too large; raise eta or shrink the reference");
  rep.params.big_n = big_n;
  const double a = std::min(delta / (4.0 * d * static_cast<double>(big_n)), dprime / 2.0);
  rep.params.a = a;

  // Reference sweeps onto U_n union W^c (also the final comparison targets).
  const std::vector<Estimate> input_vals = integrate_dict(in.nu, in.dict);
  std::vector<std::vector<Estimate>> ref_vals(sets);
  for (std::size_t n = 0; n < sets; ++n) {
    const WeightedMeasure ref = sweep_onto_set(in.nu, in.u_sets[n], in.window, in.domain, k,
                                               with_seed(opt.mc, stage_seed(opt.seed, ctr++)));
    ref_vals[n] = integrate_dict(ref, in.dict);
    append_gate(rep.gate, strf("reference n=%zu", n), input_vals, ref, in.dict, k, in.domain);
  }

  // Lattice resolution: select offsets, build the per-set ball families, and
  // refine until the lattice sweeps match the references within the budget.
  struct Accepted {
    int m = 0;
    std::vector<int> sel;
    std::vector<BallUnion> grids;
    std::vector<OffsetRow> offsets;
    std::vector<GridCheckRow> rows;
    bool met = false;
    std::size_t count = 0;
  };
  Accepted acc;
  bool have_acc = false;
  int m_level = opt.m_start;
  for (int attempt = 0; attempt <= opt.max_m_doublings; ++attempt, m_level *= 2) {
    std::vector<OffsetRow> offsets;
    offsets.reserve(big_n);
    std::vector<int> sel;
    for (std::size_t j = 1; j <= big_n; ++j) {
      const double xj1 = static_cast<double>(j) / static_cast<double>(big_n);
      double v = 0.0;
      for (const Atom& at : in.nu.atoms())
        if (in_lattice(at.x, xj1, a, m_level)) v += at.w * p.eval(at.x);
      const bool take = v < delta && sel.size() < sets;
      if (take) sel.push_back(static_cast<int>(j));
      offsets.push_back({static_cast<int>(j), v, take});
    }
    if (sel.size() < sets)
      throw SolverError("theorem: no admissible lattice offsets; the source is too concentrated");

    std::vector<BallUnion> grids(sets);
    std::size_t count = 0;
    bool empty_grid = false;
    for (std::size_t n = 0; n < sets; ++n) {
      Point xj(dim, 0.0);
      xj[0] = static_cast<double>(sel[n]) / static_cast<double>(big_n);
      grids[n] = grid_balls(GridSpec(xj, a, m_level), in.u_sets[n]);
      count += grids[n].size();
      empty_grid = empty_grid || grids[n].empty();
    }
    if (count > opt.max_grid_balls) {
      if (!have_acc)
        throw StructuralError("theorem: lattice ball budget exceeded at the initial resolution");
      rep.warnings.push_back(
          strf("lattice refinement stopped by the ball budget at resolution %d", m_level));
      break;
    }
    if (empty_grid) {
      if (attempt == opt.max_m_doublings && !have_acc)
        throw SolverError("theorem: empty lattice approximation at every resolution");
      continue;
    }

    std::vector<GridCheckRow> rows;
    bool met = true;
    for (std::size_t n = 0; n < sets; ++n) {
      const WeightedMeasure gm =
          balayage_measure(in.nu, StopSet(grids[n], std::nullopt, in.window, in.domain), k,
                           with_seed(opt.mc_grid, stage_seed(opt.seed, ctr++)));
      append_gate(rep.gate, strf("lattice check m=%d n=%zu", m_level, n), input_vals, gm,
                  in.dict, k, in.domain);
      for (std::size_t i = 0; i < in.dict.members.size(); ++i) {
        const Estimate g = integrate(gm, in.dict.members[i].q);
        const double sig = std::hypot(g.sigma, ref_vals[n][i].sigma);
        const double diff = g.value - ref_vals[n][i].value;
        const bool ok = std::abs(diff) < delta / 2.0 + 3.0 * sig && sig < delta / 4.0;
        met = met && ok;
        rows.push_back({static_cast<int>(n), sel[n], in.dict.members[i].q.id, g, ref_vals[n][i],
                        diff, ok});
      }
    }
    acc = Accepted{m_level, std::move(sel), std::move(grids), std::move(offsets),
                   std::move(rows), met, count};
    have_acc = true;
    if (met) break;
  }
  if (!have_acc) throw SolverError("theorem: no usable lattice resolution");
  if (!acc.met)
    rep.warnings.push_back(
        strf("lattice gate unmet at the accepted resolution %d (desk-scale budget)", acc.m));
  rep.params.m = acc.m;
  rep.params.selected_j = acc.sel;
  rep.selection = std::move(acc.offsets);
  rep.grid_check = std::move(acc.rows);
  rep.grid_check_met = acc.met;
  rep.grid_ball_count = acc.count;

  // Assemble the shrink family and the restricted source.
  std::vector<Ball> all;
  std::vector<int> part;
  all.reserve(acc.count);
  part.reserve(acc.count);
  for (std::size_t n = 0; n < sets; ++n) {
    for (const Ball& b : acc.grids[n].balls()) {
      all.push_back(b);
      part.push_back(static_cast<int>(n));
    }
  }
  BallUnion family_balls(std::move(all));
  rep.family = validate_delta_family(family_balls, delta, k.alpha, in.window);
  if (!rep.family.valid) throw SolverError("theorem: the lattice family failed delta validation");

  const auto in_any_lattice = [&](const Point& x) {
    for (std::size_t n = 0; n < sets; ++n) {
      const double xj1 = static_cast<double>(acc.sel[n]) / static_cast<double>(big_n);
      if (in_lattice(x, xj1, a, acc.m)) return true;
    }
    return false;
  };
  double removed_p = 0.0;
  for (const Atom& at : in.nu.atoms())
    if (in_any_lattice(at.x)) removed_p += at.w * p.eval(at.x);
  rep.removed_p_mass = removed_p;
  rep.removed_bound = static_cast<double>(sets) * delta;
  const WeightedMeasure nut =
      in.nu.restricted([&](const Atom& at) { return !in_any_lattice(at.x); });
  if (nut.atoms().empty())
    throw SolverError("theorem: the offset selection removed every source atom");
  const bool same_source = nut.atoms().size() == in.nu.atoms().size();

  // Joint shrink towards (1-delta) times the per-set sweeps.
  ShrinkProblem sp;
  sp.family = DeltaFamily{family_balls, delta, in.domain};
  sp.window = in.window;
  sp.source = nut;
  sp.partition = part;
  sp.lambda = in.lambda;
  sp.kernel = k;
  sp.mc = with_seed(opt.mc_solver, stage_seed(opt.seed, ctr++));
  sp.cfg = opt.shrink;
  rep.shrink = joint_shrink(sp);
  rep.s = rep.shrink.s;
  rep.c_balls = family_balls.shrunk(rep.s);
  for (std::size_t i = 0; i < rep.s.size(); ++i) {
    const double diff = std::abs(rep.shrink.achieved[i].value - rep.shrink.targets[i]);
    rep.equalities.push_back({i, rep.shrink.targets[i], rep.shrink.achieved[i].value,
                              rep.shrink.achieved[i].sigma, rep.shrink.tolerance[i],
                              diff <= rep.shrink.tolerance[i]});
  }
  for (const std::string& w : rep.shrink.warnings) rep.warnings.push_back(w);

  // Final comparison: nu swept onto C union W^c against the weighted targets.
  const WeightedMeasure lhs =
      balayage_measure(in.nu, StopSet(rep.c_balls, std::nullopt, in.window, in.domain), k,
                       with_seed(opt.mc, stage_seed(opt.seed, ctr++)));
  append_gate(rep.gate, "final", input_vals, lhs, in.dict, k, in.domain);
  rep.final_distance = -1.0;
  for (std::size_t i = 0; i < in.dict.members.size(); ++i) {
    const Estimate L = integrate(lhs, in.dict.members[i].q);
    const Estimate mix = mixture(ref_vals, in.lambda, i);
    const double diff = L.value - mix.value;
    rep.final_rows.push_back({in.dict.members[i].q.id, L, mix, diff});
    if (std::abs(diff) > rep.final_distance) {
      rep.final_distance = std::abs(diff);
      rep.final_sigma = std::hypot(L.sigma, mix.sigma);
    }
  }
  rep.final_gate = opt.eta + 3.0 * rep.final_sigma;
  rep.final_ok = rep.final_distance < rep.final_gate;

  // Boundary-part audit: the W^c restrictions of the restricted-source sweep
  // and of the weighted per-set sweeps differ by a nonnegative gap of p-mass
  // at most 2 nu(p) delta.
  const WeightedMeasure lhs_t =
      same_source ? lhs
                  : balayage_measure(nut, StopSet(rep.c_balls, std::nullopt, in.window, in.domain),
                                     k, with_seed(opt.mc, stage_seed(opt.seed, ctr++)));
  if (!same_source)
    append_gate(rep.gate, "final restricted", integrate_dict(nut, in.dict), lhs_t, in.dict, k,
                in.domain);
  const auto on_boundary = [](const Atom& at) { return at.cause == StopCause::Window; };
  const WeightedMeasure lhs_t_wc = lhs_t.restricted(on_boundary);
  std::vector<std::vector<Estimate>> part_wc(sets);
  const std::vector<Estimate> nut_vals = integrate_dict(nut, in.dict);
  for (std::size_t n = 0; n < sets; ++n) {
    const WeightedMeasure pm =
        balayage_measure(nut, StopSet(acc.grids[n], std::nullopt, in.window, in.domain), k,
                         with_seed(opt.mc_grid, stage_seed(opt.seed, ctr++)));
    append_gate(rep.gate, strf("group sweep n=%zu", n), nut_vals, pm, in.dict, k, in.domain);
    part_wc[n] = integrate_dict(pm.restricted(on_boundary), in.dict);
  }
  const double rho_bound = 2.0 * rep.params.nu_p * delta;
  for (std::size_t i = 0; i < in.dict.members.size(); ++i) {
    const Estimate lw = integrate(lhs_t_wc, in.dict.members[i].q);
    const Estimate mw = mixture(part_wc, in.lambda, i);
    const double val = lw.value - mw.value;
    const double sig = std::hypot(lw.sigma, mw.sigma);
    rep.boundary.push_back({in.dict.members[i].q.id, val, sig, rho_bound,
                            val >= -3.0 * sig - 1e-12,
                            std::abs(val) <= rho_bound + 3.0 * sig + 1e-12});
  }

  // Membership consequence: sweeping the constructed measure the rest of the
  // way onto W^c must agree with the direct sweep of nu within the budget.
  const StopSet wc_stop(BallUnion{}, std::nullopt, in.window, in.domain);
  const WeightedMeasure mu_wc =
      balayage_measure(lhs, wc_stop, k, with_seed(opt.mc, stage_seed(opt.seed, ctr++)));
  const WeightedMeasure nu_wc =
      balayage_measure(in.nu, wc_stop, k, with_seed(opt.mc, stage_seed(opt.seed, ctr++)));
  append_gate(rep.gate, "exit resweep", integrate_dict(lhs, in.dict), mu_wc, in.dict, k,
              in.domain);
  append_gate(rep.gate, "exit direct", input_vals, nu_wc, in.dict, k, in.domain);
  for (std::size_t i = 0; i < in.dict.members.size(); ++i) {
    const Estimate L = integrate(mu_wc, in.dict.members[i].q);
    const Estimate R = integrate(nu_wc, in.dict.members[i].q);
    const Estimate via = integrate(lhs, in.dict.members[i].q);
    const double sig = std::sqrt(L.sigma * L.sigma + R.sigma * R.sigma + via.sigma * via.sigma);
    const double diff = L.value - R.value;
    rep.resweep.push_back({in.dict.members[i].q.id, L, R, diff, opt.eta,
                           std::abs(diff) <= 3.0 * sig + opt.eta + 1e-12});
  }
  return rep;
}

// ---------------------------------------------------------------------------

ExitMixtureReport run_exit_mixture_ladder(const WeightedMeasure& nu,
                                          const std::vector<Ball>& u_balls,
                                          const std::vector<double>& lambda,
                                          const std::vector<int>& levels, const Dictionary& dict,
                                          const KernelSpec& k, const DomainSpec& domain,
                                          const TheoremOptions& opt) {
  if (u_balls.empty()) throw ParameterError("exit mixture: no balls");
  if (lambda.size() != u_balls.size())
    throw ParameterError("exit mixture: weight count mismatch");
  if (levels.empty()) throw ParameterError("exit mixture: no levels");
  for (std::size_t i = 0; i < levels.size(); ++i)
    if (levels[i] <= 0 || (i > 0 && levels[i] <= levels[i - 1]))
      throw ParameterError("exit mixture: levels must be strictly increasing positives");
  if (!nu.is_exact() || nu.atoms().empty())
    throw ParameterError("exit mixture: input measure must be a nonempty exact atom list");
  for (const Atom& at : nu.atoms())
    for (const Ball& b : u_balls)
      if (!b.strictly_inside(at.x))
        throw StructuralError("exit mixture: source must sit inside every ball");
  for (const Ball& b : u_balls)
    if (1.0 / static_cast<double>(levels.front()) >= b.radius)
      throw ParameterError("exit mixture: coarsest level larger than a ball radius");

  ExitMixtureReport rep;
  std::uint64_t ctr = 0;
  const OpenSet w = OpenSet::from_balls(u_balls);

  // Limit targets: exit laws from the full balls.
  const std::vector<Estimate> input_vals = integrate_dict(nu, dict);
  std::vector<std::vector<Estimate>> exit_vals(u_balls.size());
  for (std::size_t n = 0; n < u_balls.size(); ++n) {
    const WeightedMeasure ex = balayage_measure(
        nu,
        StopSet(BallUnion{}, std::nullopt, OpenSet::from_balls({u_balls[n]}), domain), k,
        with_seed(opt.mc, stage_seed(opt.seed, 0xE0 + ctr++)));
    exit_vals[n] = integrate_dict(ex, dict);
    append_gate(rep.gate, strf("limit n=%zu", n), input_vals, ex, dict, k, domain);
  }
  rep.limit.reserve(dict.members.size());
  for (std::size_t i = 0; i < dict.members.size(); ++i)
    rep.limit.push_back(mixture(exit_vals, lambda, i));

  for (std::size_t li = 0; li < levels.size(); ++li) {
    const int m = levels[li];
    std::vector<OpenSet> vs;
    vs.reserve(u_balls.size());
    for (const Ball& b : u_balls)
      vs.push_back(OpenSet::with_holes(
          u_balls, {Ball(b.center, b.radius - 1.0 / static_cast<double>(m))}));
    TheoremInputs ti{nu, w, std::move(vs), lambda, dict, k, domain};
    TheoremOptions inner = opt;
    inner.seed = stage_seed(opt.seed, 0xF0 + li);

    ExitMixtureLevel lev;
    lev.m = m;
    lev.run = run_theorem_pipeline(ti, inner);

    for (std::size_t i = 0; i < dict.members.size(); ++i) {
      const Estimate& L = lev.run.final_rows[i].lhs;
      const double diff = L.value - rep.limit[i].value;
      lev.rows.push_back({dict.members[i].q.id, L, rep.limit[i], diff});
      if (std::abs(diff) > lev.distance) {
        lev.distance = std::abs(diff);
        lev.sigma = std::hypot(L.sigma, rep.limit[i].sigma);
      }
    }
    // Containment: each constructed ball within 1/m of the complement of the
    // intersection; depth inside the intersection is min over the balls.
    lev.containment_ok = true;
    for (const Ball& cb : lev.run.c_balls.balls()) {
      double depth = kInf;
      for (const Ball& ub : u_balls)
        depth = std::min(depth, ub.radius - dist(cb.center, ub.center));
      if (depth + cb.radius > 1.0 / static_cast<double>(m) + 1e-9) lev.containment_ok = false;
    }
    rep.levels.push_back(std::move(lev));
  }
  rep.decreasing =
      rep.levels.size() >= 2 && rep.levels.back().distance < rep.levels.front().distance;
  return rep;
}

// ---------------------------------------------------------------------------

JensenReport jensen_demo(const Point& x, const BallUnion& a, const DomainSpec& domain,
                         const Dictionary& dict, const KernelSpec& k, const McParams& mc) {
  if (!k.classical_case()) throw ParameterError("jensen: classical kernel required");
  const std::size_t dim = domain.dimension();
  if (x.size() != dim || a.dimension() != dim)
    throw ParameterError("jensen: dimension mismatch");
  if (dict.members.empty()) throw ParameterError("jensen: empty dictionary");
  const int home = a.find(x);
  if (home < 0 || !a[static_cast<std::size_t>(home)].strictly_inside(x))
    throw StructuralError("jensen: start point must lie inside the union");

  JensenReport rep;
  const OpenSet int_a = OpenSet::from_balls(a.balls());
  const WeightedMeasure mu =
      balayage_measure(WeightedMeasure::point_mass(x), StopSet(BallUnion{}, std::nullopt, int_a, domain),
                       k, mc);

  double viol = 0.0;
  for (const Atom& at : mu.atoms()) {
    double entry = kInf;
    for (const Ball& b : a.balls())
      entry = std::min(entry, dist(at.x, b.center) - b.radius);
    viol = std::max(viol, entry);
  }
  rep.support_violation = std::max(viol, 0.0);
  rep.support_ok = rep.support_violation <= 1e-9 * std::max(1.0, a.circumradius());

  const auto pole_clear = [&](const Potential& q) {
    double entry = kInf;
    for (const Ball& b : a.balls())
      entry = std::min(entry, dist(q.pole(), b.center) - b.radius);
    return entry;
  };

  for (const DictionaryEntry& e : dict.members) {
    const Potential& q = e.q;
    JensenRow row;
    row.id = q.id;
    row.at_x = q.eval(x);
    row.integral = integrate(mu, q);
    // Harmonic on a neighborhood of the closed union: a kernel whose pole
    // keeps a positive distance and whose cap stays inactive there.
    const double clear = pole_clear(q);
    row.harmonic = q.kind() == Potential::Kind::NewtonKernel && clear > 1e-9 &&
                   (!q.cap() || q.scale() / clear <= *q.cap());
    row.jensen_ok = row.integral.value <= row.at_x + 3.0 * row.integral.sigma + 1e-12;
    row.equality_ok =
        row.harmonic &&
        std::abs(row.integral.value - row.at_x) <= 3.0 * row.integral.sigma + 1e-12;
    rep.rows.push_back(std::move(row));
  }

  if (a.size() == 1 && dim >= 3) {
    const Ball& b = a[0];
    for (const DictionaryEntry& e : dict.members) {
      const Potential& q = e.q;
      if (q.kind() != Potential::Kind::NewtonKernel || !b.strictly_inside(q.pole())) continue;
      const double off = dist(q.pole(), b.center);
      const double sphere_min = b.radius - off;  // closest sphere approach to the pole
      if (q.cap() && (q.scale() / sphere_min > *q.cap() ||
                      q.scale() / dist(q.pole(), x) > *q.cap())) {
        rep.warnings.push_back(strf("gap row skipped for %s: cap active", q.id.c_str()));
        continue;
      }
      const double ex = static_cast<double>(dim) - 2.0;
      double exact;
      if (off <= 1e-14 * b.radius) {
        exact = q.scale() / std::pow(b.radius, ex);
      } else {
        Point img = b.center;  // reflected pole
        const double t = b.radius * b.radius / (off * off);
        for (std::size_t c = 0; c < dim; ++c)
          img[c] += t * (q.pole()[c] - b.center[c]);
        exact = q.scale() * std::pow(b.radius / off, ex) / std::pow(dist(x, img), ex);
      }
      JensenGapRow row;
      row.id = q.id;
      row.at_x = q.eval(x);
      row.integral = integrate(mu, q);
      row.exact_average = exact;
      row.average_ok =
          std::abs(row.integral.value - exact) <= 3.0 * row.integral.sigma + 1e-12;
      row.strict_gap_ok = row.at_x - row.integral.value > 3.0 * row.integral.sigma;
      rep.gaps.push_back(std::move(row));
    }
  }
  return rep;
}

// ---------------------------------------------------------------------------

namespace {

double return_probability_bound(const BallUnion& c, double escape, const KernelSpec& k) {
  const double ex = k.classical_case() ? k.d - 2.0 : k.d - k.alpha;
  double sum = 0.0;
  for (const Ball& b : c.balls()) {
    const double gap = escape - norm(b.center);
    if (gap <= b.radius) return 1.0;
    sum += std::pow(b.radius / gap, ex);
  }
  return sum;
}

}  // namespace

SkorokhodReport skorokhod_demo(const WeightedMeasure& nu, const BallUnion& c,
                               const DomainSpec& domain, const Dictionary& dict,
                               const KernelSpec& k, const McParams& mc,
                               const PathParams& path) {
  const std::size_t dim = domain.dimension();
  if (c.empty()) throw ParameterError("skorokhod: empty target union");
  if (c.dimension() != dim || k.d != static_cast<int>(dim))
    throw ParameterError("skorokhod: dimension mismatch");
  if (std::abs(nu.total_input() - 1.0) > 1e-9)
    throw ParameterError("skorokhod: input must be a probability measure");
  if (!nu.is_exact() || nu.atoms().empty())
    throw ParameterError("skorokhod: input measure must be a nonempty exact atom list");
  if (dict.members.empty()) throw ParameterError("skorokhod: empty dictionary");
  for (const Atom& at : nu.atoms())
    if (!domain.contains(at.x)) throw ParameterError("skorokhod: source atom outside the domain");
  for (const Ball& b : c.balls())
    if (domain.kind == DomainSpec::Kind::OpenBall &&
        domain.ball.radius - dist(b.center, domain.ball.center) <= b.radius)
      throw ParameterError("skorokhod: target ball not inside the domain");
  if (domain.kind == DomainSpec::Kind::FullSpace && k.classical_case() && k.d <= 2)
    throw ParameterError("skorokhod: classical full-space paths need d >= 3");

  SkorokhodReport rep;
  const WeightedMeasure chain = balayage_measure(nu, StopSet(c, domain), k, mc);
  rep.kernel_hit_mass = total_mass_estimate(chain);

  // Path estimator.
  double min_r = kInf;
  for (const Ball& b : c.balls())
    if (b.radius > 0.0) min_r = std::min(min_r, b.radius);
  if (!std::isfinite(min_r)) throw ParameterError("skorokhod: all target balls are points");
  double eps = path.eps_shell > 0.0 ? path.eps_shell : min_r / 500.0;
  if (eps > min_r / 50.0) throw ParameterError("skorokhod: path shell too coarse");

  double escape = 0.0;
  if (domain.kind == DomainSpec::Kind::FullSpace) {
    double r0 = c.circumradius();
    for (const Atom& at : nu.atoms()) r0 = std::max(r0, norm(at.x));
    escape = path.escape_radius > 0.0 ? path.escape_radius : 10.0 * std::max(r0, 1e-6);
    int doublings = 0;
    while (return_probability_bound(c, escape, k) >= 5e-4 && doublings < 60) {
      escape *= 2.0;
      ++doublings;
    }
  }

  const auto union_dist = [&](const Point& x) {
    double best = kInf;
    for (const Ball& b : c.balls()) best = std::min(best, dist(x, b.center) - b.radius);
    return best;
  };
  const auto containing = [&](const Point& x) { return c.find(x); };
  const auto project_onto = [&](Point& x, const Ball& b) {
    const double r = dist(x, b.center);
    if (r <= 1e-300) {
      x = b.center;
      x[0] += b.radius;
      return;
    }
    const double f = b.radius / r;
    for (std::size_t cc = 0; cc < dim; ++cc)
      x[cc] = b.center[cc] + f * (x[cc] - b.center[cc]);
  };

  // Categorical source pick, same construction as the chain engine.
  std::vector<double> cum(nu.atoms().size());
  double tot = 0.0;
  for (std::size_t i = 0; i < nu.atoms().size(); ++i) {
    tot += nu.atoms()[i].w;
    cum[i] = tot;
  }

  const ExitSampler sampler(k);
  std::vector<Atom> atoms;
  atoms.reserve(path.samples);
  std::uint64_t hits = 0, truncated = 0;
  double escaped_mass = 0.0, killed_mass = 0.0;
  const double wpw = nu.total_input() / static_cast<double>(path.samples);
  Point scratch(dim, 0.0);
  for (std::size_t wi = 0; wi < path.samples; ++wi) {
    Rng rng(path.seed, wi);
    const double u = rng.uniform() * tot;
    std::size_t src = static_cast<std::size_t>(
        std::lower_bound(cum.begin(), cum.end(), u) - cum.begin());
    if (src >= cum.size()) src = cum.size() - 1;
    Point x = nu.atoms()[src].x;

    bool done = false;
    for (std::size_t step = 0; step < path.max_steps && !done; ++step) {
      if (!domain.contains(x)) {
        killed_mass += wpw;
        done = true;
        break;
      }
      const int inside = containing(x);
      if (inside >= 0) {
        const double depth = -(dist(x, c[static_cast<std::size_t>(inside)].center) -
                               c[static_cast<std::size_t>(inside)].radius);
        // continuous paths enter through the sphere, so interior landings are
        // Euler overshoot and get pulled back -- except sources already inside
        if (depth > 0.0 && step > 0 && k.classical_case())
          project_onto(x, c[static_cast<std::size_t>(inside)]);
        atoms.push_back({x, wpw, inside, StopCause::Ball});
        ++hits;
        done = true;
        break;
      }
      const double dc = union_dist(x);
      const double bd = domain.boundary_dist(x);
      if (escape > 0.0 && norm(x) >= escape) {
        escaped_mass += wpw;
        done = true;
        break;
      }
      if (k.classical_case()) {
        if (bd <= eps) {
          killed_mass += wpw;
          done = true;
          break;
        }
        if (dc <= eps) {
          int near = -1;
          double best = kInf;
          for (std::size_t bi = 0; bi < c.size(); ++bi) {
            const double dd = dist(x, c[bi].center) - c[bi].radius;
            if (dd < best) {
              best = dd;
              near = static_cast<int>(bi);
            }
          }
          project_onto(x, c[static_cast<std::size_t>(near)]);
          atoms.push_back({x, wpw, near, StopCause::Ball});
          ++hits;
          done = true;
          break;
        }
        const double room = std::min(dc, bd);
        if (dc > path.switch_factor * eps) {
          sampler.step_from_center(room, rng, scratch);
          for (std::size_t cc = 0; cc < dim; ++cc) x[cc] += scratch[cc];
        } else {
          const double sd = std::max(path.dt_scale * dc, eps);
          for (std::size_t cc = 0; cc < dim; ++cc) x[cc] += sd * rng.gaussian();
        }
      } else {
        const double room = path.ball_factor * std::min(dc, bd);
        x = sampler.sample(Ball(x, room), x, rng);
      }
    }
    if (!done) {
      ++truncated;
    }
  }
  Diagnostics diag;
  diag.escaped_mass = escaped_mass;
  diag.killed_mass = killed_mass;
  diag.truncated_mass = wpw * static_cast<double>(truncated);
  diag.truncated_walks = truncated;
  diag.escape_radius = escape;
  diag.eps_shell = k.classical_case() ? eps : 0.0;
  const double lost =
      nu.total_input() - wpw * static_cast<double>(hits);
  const WeightedMeasure path_measure = WeightedMeasure::chain_output(
      std::move(atoms), 0, path.samples, wpw, lost, nu.total_input(), diag);
  rep.path_hit_mass = total_mass_estimate(path_measure);
  rep.path_escaped_mass = escaped_mass;
  rep.path_truncated_mass = diag.truncated_mass;
  if (truncated > 0)
    rep.warnings.push_back(strf("%llu path walks hit the step cap",
                                static_cast<unsigned long long>(truncated)));
  const double hit_rate = static_cast<double>(hits) / static_cast<double>(path.samples);
  if (hit_rate < 0.5)
    rep.warnings.push_back(strf(
        "path hit rate %.3f below one half (escaped mass %.4g, killed mass %.4g)", hit_rate,
        escaped_mass, killed_mass));

  rep.distance = weak_distance(chain, path_measure, dict);
  rep.ok = rep.distance.value <= 3.0 * rep.distance.sigma + 1e-12;
  return rep;
}

// ---------------------------------------------------------------------------

HarnackReport harnack_audit(const KernelSpec& k, const std::vector<double>& deltas,
                            std::size_t triples, const McParams& mc) {
  const int d = k.d;
  const std::size_t dim = static_cast<std::size_t>(d);
  const double cap = delta0(d, k.alpha);
  if (deltas.empty()) throw ParameterError("harnack: empty delta grid");
  for (double del : deltas)
    if (!(del > 0.0 && del <= cap))
      throw ParameterError("harnack: delta must lie in (0, delta0]");

  HarnackReport rep;
  const Ball unit(Point(dim, 0.0), 1.0);
  Rng rng(mc.seed, 0x4A11u);

  for (double del : deltas) {
    HarnackRatioRow row;
    row.delta = del;
    row.eta = del / (3.0 * d);
    row.bound_eta = harnack_bound(row.eta, k);
    row.bound_delta = 1.0 + del;
    row.triples = triples;
    const Ball start(Point(dim, 0.0), row.eta);
    for (std::size_t t = 0; t < triples; ++t) {
      const Point y = uniform_in_ball(start, rng);
      const Point yt = uniform_in_ball(start, rng);
      Point z;
      if (k.classical_case()) {
        z = sample_sphere_uniform(dim, rng);
      } else {
        const double radius = 1.0 + 1e-6 * std::pow(1e8, rng.uniform());
        z = sample_sphere_uniform(dim, rng);
        for (double& v : z) v *= radius;
      }
      const double a = k.classical_case() ? classical_poisson_density(unit, y, z)
                                          : riesz_poisson_density(unit, y, z, k);
      const double b = k.classical_case() ? classical_poisson_density(unit, yt, z)
                                          : riesz_poisson_density(unit, yt, z, k);
      const double ratio = std::max(a / b, b / a);
      row.max_ratio = std::max(row.max_ratio, ratio);
      if (ratio > row.bound_eta * (1.0 + 1e-12)) ++row.violations_eta;
      if (ratio > row.bound_delta * (1.0 + 1e-12)) ++row.violations_delta;
    }
    rep.ratios.push_back(row);
  }

  // Swept-measure consequence on a remote stop set.
  const DomainSpec domain = (k.classical_case() && d <= 2)
                                ? DomainSpec::open_ball(Ball(Point(dim, 0.0), 50.0))
                                : DomainSpec::full_space(dim);
  Point ac(dim, 0.0);
  ac[0] = 4.0;
  const BallUnion remote({Ball(ac, 1.0)});
  Dictionary local;
  {
    Potential q1 = k.classical_case() ? Potential::newton_kernel(ac, 1.0, 10.0)
                                      : Potential::riesz_kernel(ac, k.alpha, 1.0, 10.0);
    q1.id = "pole-at-target";
    Point off = ac;
    off[0] += 2.0;
    Potential q2 = k.classical_case() ? Potential::newton_kernel(off, 1.0, 50.0)
                                      : Potential::riesz_kernel(off, k.alpha, 1.0, 50.0);
    q2.id = "pole-behind-target";
    Potential q3 = Potential::bump(ac, 1.5, 1.0);
    q3.id = "bump-at-target";
    local.members = {{q1, true}, {q2, true}, {q3, false}};
  }

  std::uint64_t ctr = 0;
  for (double del : deltas) {
    const double off = del / (3.0 * d) * 0.999;
    Point y(dim, 0.0), yt(dim, 0.0);
    y[0] = off;
    yt[0] = -off;
    const WeightedMeasure my = balayage_point(
        y, StopSet(remote, domain), k, with_seed(mc, stage_seed(mc.seed, ctr++)));
    const WeightedMeasure myt = balayage_point(
        yt, StopSet(remote, domain), k, with_seed(mc, stage_seed(mc.seed, ctr++)));
    for (const DictionaryEntry& e : local.members) {
      const Estimate base = integrate(my, e.q);
      const Estimate moved = integrate(myt, e.q);
      const double sig = std::hypot(base.sigma, moved.sigma);
      rep.swept.push_back({del, e.q.id, moved, base, 3.0 * sig,
                           moved.value <= (1.0 + del) * base.value + 3.0 * sig + 1e-12});
      rep.swept.push_back({del, e.q.id + " (swap)", base, moved, 3.0 * sig,
                           base.value <= (1.0 + del) * moved.value + 3.0 * sig + 1e-12});
    }
  }

  // Two-stage identity: sweeping through the exit law of the unit ball onto
  // the remote set matches the direct sweep.
  {
    Point y(dim, 0.0);
    y[0] = 0.3;
    const WeightedMeasure stage1 =
        balayage_point(y, StopSet(BallUnion{}, std::nullopt, OpenSet::from_balls({unit}), domain),
                       k, with_seed(mc, stage_seed(mc.seed, ctr++)));
    const WeightedMeasure two_stage = balayage_measure(
        stage1, StopSet(remote, domain), k, with_seed(mc, stage_seed(mc.seed, ctr++)));
    const WeightedMeasure direct = balayage_point(
        y, StopSet(remote, domain), k, with_seed(mc, stage_seed(mc.seed, ctr++)));
    for (const DictionaryEntry& e : local.members) {
      const Estimate a = integrate(two_stage, e.q);
      const Estimate b = integrate(direct, e.q);
      const double sig = a.sigma + b.sigma;  // conservative: stages compound
      rep.identity.push_back(
          {e.q.id, a, b, sig, std::abs(a.value - b.value) <= 3.0 * sig + 1e-12});
    }
  }
  return rep;
}

}  // namespace balayage
