#include "balayage/engine.hpp"

#include <algorithm>
#include <atomic>
#include <array>
#include <cmath>
#include <thread>
#include <utility>

#include "balayage/errors.hpp"

namespace balayage {

namespace {

double norm2(const Point& x) {
  double s = 0.0;
  for (double c : x) s += c * c;
  return s;
}

}  // namespace

StopSet::StopSet(BallUnion b, DomainSpec dom)
    : StopSet(std::move(b), std::nullopt, std::nullopt, std::move(dom)) {}

StopSet::StopSet(BallUnion b, std::optional<OpenSet> target,
                 std::optional<OpenSet> win, DomainSpec dom)
    : balls(std::move(b)),
      open_target(std::move(target)),
      window(std::move(win)),
      domain(std::move(dom)) {
  const std::size_t dim = domain.dimension();
  if (!balls.empty() && balls.dimension() != dim)
    throw StructuralError("stop set: ball dimension differs from the domain");
  if (open_target) {
    if (open_target->dimension() != dim)
      throw StructuralError("stop set: target dimension differs from the domain");
    if (open_target->is_whole_domain())
      throw StructuralError("stop set: open target covers everything");
    if (!open_target->holes().empty())
      throw StructuralError("stop set: open targets with holes are not supported");
  }
  if (window && window->is_whole_domain()) window.reset();
  if (window && window->dimension() != dim)
    throw StructuralError("stop set: window dimension differs from the domain");
  if (balls.empty() && !open_target && !window)
    throw StructuralError("stop set: nothing to stop on");
  if (domain.kind == DomainSpec::Kind::OpenBall) {
    for (const Ball& ball : balls.balls())
      if (dist(ball.center, domain.ball.center) + ball.radius >= domain.ball.radius)
        throw StructuralError("stop set: stop balls must lie inside the domain");
  }
}

namespace {

enum class WalkEnd : std::uint8_t { Ball, Window, OpenTarget, Killed, Escaped, Truncated };

struct ChainContext {
  const StopSet* stop = nullptr;
  KernelSpec k;
  bool classical = true;
  const ExitSampler* sampler = nullptr;
  // the index holds a pointer to the union, so keep the union's address
  // stable under moves of the context
  std::unique_ptr<BallUnion> active_union;
  BallIndex active_index;
  std::vector<int> active_to_full;  // active ball -> stop ball index
  double eps = 0.0;                 // classical absorption shell
  double escape2 = kInf;            // squared escape radius, kInf = unused
  double escape_step_cap = 0.0;     // free-flight radius when nothing bounds the step
  std::size_t max_steps = 10000;
  long long ring_budget = 3;
  bool has_window = false, has_target = false, bounded_domain = false;

  ChainContext(const StopSet& s, const KernelSpec& kern, const ExitSampler& samp,
               BallUnion active)
      : stop(&s), k(kern), classical(kern.classical_case()), sampler(&samp),
        active_union(std::make_unique<BallUnion>(std::move(active))),
        active_index(*active_union) {}

  const Ball& active_ball(int i) const { return (*active_union)[i]; }
};

// Projection of a near-boundary point onto the stop sphere of ball b.
Point project_to_sphere(const Ball& b, const Point& x) {
  const double d = dist(x, b.center);
  Point p = b.center;
  if (d == 0.0) {
    p[0] += b.radius;
    return p;
  }
  const double f = b.radius / d;
  for (std::size_t i = 0; i < p.size(); ++i) p[i] += f * (x[i] - b.center[i]);
  return p;
}

// Nearest boundary point of the open target (hole-free cover union).
Point project_target_entry(const OpenSet& t, const Point& x) {
  const Ball* best = nullptr;
  double best_d = kInf;
  for (const Ball& b : t.cover()) {
    const double d = dist(x, b.center) - b.radius;
    if (d < best_d) {
      best_d = d;
      best = &b;
    }
  }
  return project_to_sphere(*best, x);
}

// A point of the window complement near x (x inside the window, close to its
// boundary).  Candidates: the spheres of cover balls containing x and the
// spheres of holes.  Falls back to x itself in degenerate overlaps.
Point project_window_exit(const OpenSet& w, const Point& x) {
  Point best = x;
  double best_d = kInf;
  for (const Ball& h : w.holes()) {
    const double out = dist(x, h.center) - h.radius;
    if (out < 0.0) continue;  // inside a hole: not in the window anyway
    const Point p = project_to_sphere(h, x);
    if (out < best_d) {
      best_d = out;
      best = p;
    }
  }
  for (const Ball& b : w.cover()) {
    const double inward = b.radius - dist(x, b.center);
    if (inward < 0.0) continue;  // x not inside this cover ball
    Point p = project_to_sphere(b, x);
    if (w.contains(p)) continue;  // sphere point swallowed by another cover ball
    if (inward < best_d) {
      best_d = inward;
      best = std::move(p);
    }
  }
  return best;
}

struct WalkOutcome {
  WalkEnd end = WalkEnd::Truncated;
  int ball = -1;
  std::uint64_t steps = 0;
};

WalkOutcome run_chain(const ChainContext& c, Point& x, Rng& rng, Point& scratch) {
  WalkOutcome out;
  const StopSet& s = *c.stop;
  for (std::uint64_t step = 0; step < c.max_steps; ++step) {
    out.steps = step;
    if (!c.classical) {
      // jump chains stop by membership, exactly
      if (c.bounded_domain && !s.domain.contains(x)) {
        out.end = WalkEnd::Killed;
        return out;
      }
      const int bi = c.active_index.find(x);
      if (bi >= 0) {
        out.end = WalkEnd::Ball;
        out.ball = c.active_to_full[bi];
        return out;
      }
      if (c.has_target && s.open_target->contains(x)) {
        out.end = WalkEnd::OpenTarget;
        return out;
      }
      if (c.has_window && !s.window->contains(x)) {
        out.end = WalkEnd::Window;
        return out;
      }
    }
    if (c.escape2 < kInf && norm2(x) > c.escape2) {
      out.end = WalkEnd::Escaped;
      return out;
    }

    const double d_dom = c.bounded_domain ? s.domain.boundary_dist(x) : kInf;
    const double d_win = c.has_window ? s.window->interior_dist(x) : kInf;
    const double d_tgt = c.has_target ? s.open_target->entry_dist(x) : kInf;
    const double cap = std::min({d_dom, d_win, d_tgt});
    double d_ball = kInf;
    int ball_idx = -1;
    if (!c.active_index.empty()) {
      const BallIndex::Hit hit = c.active_index.nearest(x, cap, c.ring_budget);
      d_ball = hit.distance;
      ball_idx = hit.index;  // >= 0 iff d_ball is exact
    }
    double dmin = std::min(d_ball, cap);

    if (c.classical && dmin < c.eps) {
      if (ball_idx >= 0 && d_ball <= std::min({d_tgt, d_win, d_dom})) {
        x = project_to_sphere(c.active_ball(ball_idx), x);
        out.end = WalkEnd::Ball;
        out.ball = c.active_to_full[ball_idx];
        return out;
      }
      if (c.has_target && d_tgt <= std::min(d_win, d_dom)) {
        x = project_target_entry(*s.open_target, x);
        out.end = WalkEnd::OpenTarget;
        return out;
      }
      if (c.has_window && d_win <= d_dom) {
        x = project_window_exit(*s.window, x);
        out.end = WalkEnd::Window;
        return out;
      }
      out.end = WalkEnd::Killed;
      return out;
    }

    double rho = dmin;
    if (!std::isfinite(rho)) rho = c.escape_step_cap;
    if (!c.classical && rho <= 0.0) {
      // floating-point corner: standing on a stop boundary
      out.end = d_win <= dmin ? WalkEnd::Window
                              : (d_tgt <= dmin ? WalkEnd::OpenTarget : WalkEnd::Killed);
      return out;
    }
    c.sampler->step_from_center(rho, rng, scratch);
    for (std::size_t i = 0; i < x.size(); ++i) x[i] += scratch[i];
  }
  out.end = WalkEnd::Truncated;
  out.steps = c.max_steps;
  return out;
}

struct ResolvedRun {
  std::vector<Atom> kept;       // exact prefix of the output
  std::vector<const Atom*> sources;
  std::vector<double> source_cum;  // cumulative source weights
  double mc_input = 0.0;
  Diagnostics diag;
};

double min_stop_feature(const StopSet& s) {
  double f = kInf;
  for (const Ball& b : s.balls.balls())
    if (b.radius > 0.0) f = std::min(f, b.radius);
  if (s.open_target)
    for (const Ball& b : s.open_target->cover()) f = std::min(f, b.radius);
  if (s.window) {
    for (const Ball& b : s.window->cover()) f = std::min(f, b.radius);
    for (const Ball& b : s.window->holes())
      if (b.radius > 0.0) f = std::min(f, b.radius);
  }
  if (s.domain.kind == DomainSpec::Kind::OpenBall) f = std::min(f, s.domain.ball.radius);
  return f;
}

double resolve_eps(const StopSet& s, const McParams& mc) {
  const double feature = min_stop_feature(s);
  if (!(feature < kInf))
    throw StructuralError("engine: no finite stop feature to scale the shell");
  if (mc.eps_shell > 0.0) {
    if (mc.eps_shell > feature / 50.0)
      throw ParameterError("engine: eps_shell exceeds the smallest stop feature / 50");
    return mc.eps_shell;
  }
  return feature / 500.0;
}

// Upper bound on the mass that can still reach the stop geometry from the
// escape sphere; drives the escape-radius choice on unbounded domains.
double return_bound(const StopSet& s, const KernelSpec& k, double e) {
  const double pw = k.classical_case() ? k.d - 2.0 : k.d - k.alpha;
  double b = 0.0;
  auto add = [&](const Ball& ball) {
    if (ball.radius <= 0.0) return;
    const double d = e - norm(ball.center);
    b += d > ball.radius ? std::pow(ball.radius / d, pw) : 1.0;
  };
  for (const Ball& ball : s.balls.balls()) add(ball);
  if (s.open_target)
    for (const Ball& ball : s.open_target->cover()) add(ball);
  return b;
}

double geometry_circumradius(const StopSet& s) {
  double c = s.balls.empty() ? 0.0 : s.balls.circumradius();
  if (s.open_target)
    for (const Ball& b : s.open_target->cover())
      c = std::max(c, norm(b.center) + b.radius);
  return c;
}

double resolve_escape(const StopSet& s, const KernelSpec& k, const McParams& mc,
                      double max_source_norm, Diagnostics& diag) {
  const bool unbounded = s.domain.kind == DomainSpec::Kind::FullSpace && !s.window;
  if (!unbounded) return 0.0;
  if (s.balls.empty() && !s.open_target)
    throw StructuralError("engine: unbounded run without anything to hit");
  const double circ = geometry_circumradius(s);
  const double floor = std::max({10.0 * circ, 2.0 * max_source_norm, 1.0});
  double e;
  if (mc.escape_radius > 0.0) {
    if (mc.escape_radius < 10.0 * circ)
      throw ParameterError("engine: escape_radius below 10x the stop circumradius");
    e = std::max(mc.escape_radius, 2.0 * max_source_norm);
    int doublings = 0;
    while (return_bound(s, k, e) >= 1e-3 && doublings < 3) {
      e *= 2.0;
      ++doublings;
    }
    if (return_bound(s, k, e) >= 1e-3) {
      diag.convergence_warning = true;
      diag.warnings.push_back(
          "escape radius still admits more than 1e-3 return mass after 3 doublings");
    }
  } else {
    e = floor;
    while (return_bound(s, k, e) >= 5e-4) e *= 2.0;
  }
  diag.escape_radius = e;
  return e;
}

ResolvedRun partition_sources(const WeightedMeasure& nu, const StopSet& s) {
  ResolvedRun run;
  const std::size_t dim = s.domain.dimension();
  const BallIndex full_index(s.balls);  // scales the kept-check to large unions
  double comp = 0.0;                    // compensated sum, matches total_mass()
  for (const Atom& a : nu.atoms()) {
    if (a.x.size() != dim)
      throw StructuralError("engine: measure dimension differs from the domain");
    if (a.w == 0.0) continue;
    if (s.domain.kind == DomainSpec::Kind::OpenBall &&
        dist(a.x, s.domain.ball.center) >
            s.domain.ball.radius * (1.0 + 1e-12))
      throw StructuralError("engine: measure charges the complement of the domain");
    const int bi = full_index.find(a.x);
    const bool kept_here =
        bi >= 0 || (s.open_target && s.open_target->contains(a.x)) ||
        (s.window && !s.window->contains(a.x));
    if (kept_here) {
      Atom kept = a;
      kept.cause = StopCause::Source;
      kept.ball = bi;
      run.kept.push_back(std::move(kept));
    } else {
      run.sources.push_back(&a);
      const double y = a.w - comp;
      const double t = run.mc_input + y;
      comp = (t - run.mc_input) - y;
      run.mc_input = t;
    }
  }
  run.source_cum.reserve(run.sources.size());
  double c = 0.0;
  for (const Atom* a : run.sources) {
    c += a->w;
    run.source_cum.push_back(c);
  }
  return run;
}

ChainContext make_context(const StopSet& s, const KernelSpec& k,
                          const ExitSampler& sampler, const McParams& mc,
                          double max_source_norm, Diagnostics& diag) {
  if (k.d != static_cast<int>(s.domain.dimension()))
    throw StructuralError("engine: kernel dimension differs from the domain");
  if (k.classical_case() && k.d == 2 &&
      s.domain.kind == DomainSpec::Kind::FullSpace)
    throw StructuralError("engine: the planar classical walk needs a bounded domain");
  std::vector<Ball> active;
  std::vector<int> active_to_full;
  for (std::size_t i = 0; i < s.balls.size(); ++i) {
    if (s.balls[i].radius > 0.0) {
      active.push_back(s.balls[i]);
      active_to_full.push_back(static_cast<int>(i));
    }
  }
  ChainContext ctx(s, k, sampler, BallUnion(std::move(active)));
  ctx.active_to_full = std::move(active_to_full);
  ctx.bounded_domain = s.domain.kind == DomainSpec::Kind::OpenBall;
  ctx.has_window = s.window.has_value();
  ctx.has_target = s.open_target.has_value();
  ctx.max_steps = mc.max_steps;
  if (k.classical_case()) ctx.eps = resolve_eps(s, mc);
  diag.eps_shell = ctx.eps;
  const double e = resolve_escape(s, k, mc, max_source_norm, diag);
  if (e > 0.0) {
    ctx.escape2 = e * e;
    ctx.escape_step_cap = 2.0 * e;
  } else {
    ctx.escape_step_cap = 1.0;  // unused: bounded runs always see finite distances
  }
  if (!ctx.active_index.empty()) {
    const double cell = ctx.active_index.cell();
    const double reach = ctx.eps + ctx.active_index.max_radius();
    ctx.ring_budget =
        std::max<long long>(3, static_cast<long long>(std::ceil(reach / cell)) + 2);
  }
  return ctx;
}

struct BlockResult {
  std::vector<Atom> atoms;
  std::vector<std::uint64_t> ball_hits;  // tally mode
  std::uint64_t absorbed = 0;
  std::uint64_t escaped = 0, killed = 0, truncated = 0;
  std::uint64_t steps = 0;
};

constexpr std::size_t kBlock = 4096;

// Runs walks in fixed blocks pulled by a worker pool; per-block output plus
// ordered reduction keeps results independent of the worker count.
std::vector<BlockResult> run_walks(const ChainContext& ctx, const ResolvedRun& run,
                                   std::size_t n, std::uint64_t seed, int workers,
                                   bool collect_atoms, std::size_t tally_size) {
  const std::size_t nblocks = (n + kBlock - 1) / kBlock;
  std::vector<BlockResult> blocks(nblocks);
  int nw = workers > 0 ? workers : static_cast<int>(std::thread::hardware_concurrency());
  if (nw < 1) nw = 1;
  nw = std::min<std::size_t>(nw, nblocks);
  std::atomic<std::size_t> next{0};
  const double total = run.source_cum.back();

  auto work = [&]() {
    Point x, scratch;
    for (std::size_t b = next.fetch_add(1); b < nblocks; b = next.fetch_add(1)) {
      BlockResult& out = blocks[b];
      if (tally_size > 0) out.ball_hits.assign(tally_size, 0);
      const std::size_t lo = b * kBlock;
      const std::size_t hi = std::min(lo + kBlock, n);
      if (collect_atoms) out.atoms.reserve(hi - lo);
      for (std::size_t i = lo; i < hi; ++i) {
        Rng rng(seed, i);
        // categorical source pick keeps every walk unbiased and i.i.d.
        const double u = rng.uniform() * total;
        const std::size_t si =
            std::upper_bound(run.source_cum.begin(), run.source_cum.end(), u) -
            run.source_cum.begin();
        x = run.sources[std::min(si, run.sources.size() - 1)]->x;
        WalkOutcome o = run_chain(ctx, x, rng, scratch);
        out.steps += o.steps;
        switch (o.end) {
          case WalkEnd::Ball:
          case WalkEnd::Window:
          case WalkEnd::OpenTarget: {
            ++out.absorbed;
            if (o.end == WalkEnd::Ball && tally_size > 0)
              ++out.ball_hits[static_cast<std::size_t>(o.ball)];
            if (collect_atoms) {
              Atom a;
              a.x = x;
              a.ball = o.ball;
              a.cause = o.end == WalkEnd::Ball
                            ? StopCause::Ball
                            : (o.end == WalkEnd::Window ? StopCause::Window
                                                        : StopCause::OpenTarget);
              out.atoms.push_back(std::move(a));
            }
            break;
          }
          case WalkEnd::Escaped:
            ++out.escaped;
            break;
          case WalkEnd::Killed:
            ++out.killed;
            break;
          case WalkEnd::Truncated:
            ++out.truncated;
            break;
        }
      }
    }
  };

  if (nw == 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(nw);
    for (int t = 0; t < nw; ++t) pool.emplace_back(work);
    for (std::thread& t : pool) t.join();
  }
  return blocks;
}

void finish_diagnostics(Diagnostics& diag, const std::vector<BlockResult>& blocks,
                        std::size_t n, double wpw) {
  std::uint64_t esc = 0, kil = 0, tru = 0, steps = 0;
  for (const BlockResult& b : blocks) {
    esc += b.escaped;
    kil += b.killed;
    tru += b.truncated;
    steps += b.steps;
  }
  diag.escaped_mass = wpw * static_cast<double>(esc);
  diag.killed_mass = wpw * static_cast<double>(kil);
  diag.truncated_mass = wpw * static_cast<double>(tru);
  diag.truncated_walks = tru;
  diag.total_steps = steps;
  if (tru > 0 && static_cast<double>(tru) > 1e-3 * static_cast<double>(n)) {
    diag.convergence_warning = true;
    diag.warnings.push_back("more than 0.1% of walks hit the step limit");
  }
}

double max_source_norm(const WeightedMeasure& nu) {
  double m = 0.0;
  for (const Atom& a : nu.atoms()) m = std::max(m, norm(a.x));
  return m;
}

}  // namespace

WeightedMeasure balayage_measure(const WeightedMeasure& nu, const StopSet& stop,
                                 const KernelSpec& k, const McParams& mc) {
  if (nu.atoms().empty()) throw StructuralError("engine: empty input measure");
  ResolvedRun run = partition_sources(nu, stop);
  const double total_input = nu.total_mass();

  if (run.mc_input <= 0.0 || mc.samples == 0) {
    // everything already in the stop set is kept exactly; with no walks the
    // remainder is declared lost
    Diagnostics diag;
    std::vector<Atom> atoms = std::move(run.kept);
    const std::size_t exact_count = atoms.size();
    return WeightedMeasure::chain_output(std::move(atoms), exact_count, 0, 0.0,
                                         run.mc_input, total_input, diag);
  }

  Diagnostics diag;
  const ExitSampler sampler(k);
  const ChainContext ctx =
      make_context(stop, k, sampler, mc, max_source_norm(nu), diag);
  const std::size_t n = mc.samples;
  const double wpw = run.mc_input / static_cast<double>(n);
  std::vector<BlockResult> blocks =
      run_walks(ctx, run, n, mc.seed, mc.workers, true, 0);

  std::vector<Atom> atoms = std::move(run.kept);
  const std::size_t exact_count = atoms.size();
  std::uint64_t absorbed = 0;
  for (BlockResult& b : blocks) {
    absorbed += b.absorbed;
    for (Atom& a : b.atoms) {
      a.w = wpw;
      atoms.push_back(std::move(a));
    }
  }
  finish_diagnostics(diag, blocks, n, wpw);
  const double lost =
      wpw * static_cast<double>(n - absorbed);
  return WeightedMeasure::chain_output(std::move(atoms), exact_count, n, wpw, lost,
                                       total_input, diag);
}

WeightedMeasure balayage_point(const Point& x, const StopSet& stop,
                               const KernelSpec& k, const McParams& mc) {
  return balayage_measure(WeightedMeasure::point_mass(x), stop, k, mc);
}

std::vector<Estimate> sweep_mass_vector(const WeightedMeasure& nu, const StopSet& stop,
                                        const KernelSpec& k, const McParams& mc) {
  if (nu.atoms().empty()) throw StructuralError("engine: empty input measure");
  ResolvedRun run = partition_sources(nu, stop);
  const std::size_t m = stop.balls.size();
  std::vector<Estimate> est(m);
  for (const Atom& a : run.kept)
    if (a.ball >= 0) est[static_cast<std::size_t>(a.ball)].value += a.w;
  if (run.mc_input <= 0.0 || mc.samples == 0) return est;

  Diagnostics diag;
  const ExitSampler sampler(k);
  const ChainContext ctx =
      make_context(stop, k, sampler, mc, max_source_norm(nu), diag);
  const std::size_t n = mc.samples;
  const double wpw = run.mc_input / static_cast<double>(n);
  std::vector<BlockResult> blocks =
      run_walks(ctx, run, n, mc.seed, mc.workers, false, m);

  std::vector<std::uint64_t> hits(m, 0);
  for (const BlockResult& b : blocks)
    for (std::size_t i = 0; i < m; ++i) hits[i] += b.ball_hits[i];
  const double dn = static_cast<double>(n);
  for (std::size_t i = 0; i < m; ++i) {
    est[i].value += wpw * static_cast<double>(hits[i]);
    if (n > 1) {
      const double p = static_cast<double>(hits[i]) / dn;
      est[i].sigma = wpw * std::sqrt(dn * p * (1.0 - p) * dn / (dn - 1.0));
    }
  }
  return est;
}

Estimate hit_probability(const Point& x, const BallUnion& a, const DomainSpec& domain,
                         const KernelSpec& k, const McParams& mc) {
  const StopSet stop(a, domain);
  WeightedMeasure nu = WeightedMeasure::point_mass(x);
  ResolvedRun run = partition_sources(nu, stop);
  if (!run.kept.empty()) return Estimate{1.0, 0.0};
  if (mc.samples == 0) return Estimate{};

  Diagnostics diag;
  const ExitSampler sampler(k);
  const ChainContext ctx = make_context(stop, k, sampler, mc, norm(x), diag);
  const std::size_t n = mc.samples;
  const double wpw = 1.0 / static_cast<double>(n);
  std::vector<BlockResult> blocks =
      run_walks(ctx, run, n, mc.seed, mc.workers, false, 0);
  std::uint64_t absorbed = 0;
  for (const BlockResult& b : blocks) absorbed += b.absorbed;
  Estimate e;
  e.value = wpw * static_cast<double>(absorbed);
  if (n > 1) {
    const double dn = static_cast<double>(n);
    const double p = static_cast<double>(absorbed) / dn;
    e.sigma = wpw * std::sqrt(dn * p * (1.0 - p) * dn / (dn - 1.0));
  }
  return e;
}

WeightedMeasure reduced_measure_closed(const WeightedMeasure& nu, const BallUnion& a,
                                       const DomainSpec& domain, const KernelSpec& k,
                                       const McParams& mc) {
  std::vector<Atom> inside, outside;
  for (const Atom& atom : nu.atoms()) {
    if (atom.w == 0.0) continue;
    const int bi = a.find(atom.x);
    if (bi >= 0) {
      Atom kept = atom;
      kept.ball = bi;
      kept.cause = StopCause::Source;
      inside.push_back(std::move(kept));
    } else {
      outside.push_back(atom);
    }
  }
  const double total_input = nu.total_mass();
  if (outside.empty()) {
    Diagnostics diag;
    const std::size_t exact_count = inside.size();
    return WeightedMeasure::chain_output(std::move(inside), exact_count, 0, 0.0, 0.0,
                                         total_input, diag);
  }
  const WeightedMeasure rest = WeightedMeasure::from_atoms(std::move(outside));
  const WeightedMeasure swept = balayage_measure(rest, StopSet(a, domain), k, mc);

  std::vector<Atom> atoms = std::move(inside);
  const std::size_t exact_count = atoms.size() + swept.exact_count();
  atoms.insert(atoms.end(), swept.atoms().begin(), swept.atoms().end());
  return WeightedMeasure::chain_output(std::move(atoms), exact_count,
                                       swept.walk_count(), swept.mc_weight_per_walk(),
                                       swept.lost_mass(), total_input,
                                       swept.diagnostics());
}

}  // namespace balayage
