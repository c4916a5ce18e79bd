#include "balayage/config.hpp"

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

namespace balayage {
namespace {

// Walks the config tree carrying a JSON-pointer path for error messages.
struct Cursor {
  const ojson* j = nullptr;
  std::string path;

  [[noreturn]] void fail(const std::string& what) const {
    throw ConfigError("config error at " + (path.empty() ? "/" : path) + ": " + what);
  }
  Cursor child(const std::string& key) const {
    if (!j->is_object()) fail("expected an object");
    auto it = j->find(key);
    if (it == j->end()) fail("missing required key '" + key + "'");
    return Cursor{&*it, path + "/" + key};
  }
  std::optional<Cursor> opt(const std::string& key) const {
    if (!j->is_object()) fail("expected an object");
    auto it = j->find(key);
    if (it == j->end()) return std::nullopt;
    return Cursor{&*it, path + "/" + key};
  }
  void keys(std::initializer_list<const char*> allowed) const {
    if (!j->is_object()) fail("expected an object");
    for (auto it = j->begin(); it != j->end(); ++it) {
      bool ok = false;
      for (const char* k : allowed) ok = ok || it.key() == k;
      if (!ok) fail("unknown key '" + it.key() + "'");
    }
  }
  std::size_t size() const {
    if (!j->is_array()) fail("expected an array");
    return j->size();
  }
  Cursor at(std::size_t i) const {
    return Cursor{&(*j)[i], path + "/" + std::to_string(i)};
  }
  double num() const {
    if (!j->is_number()) fail("expected a number");
    return j->get<double>();
  }
  double num(const std::string& key) const { return child(key).num(); }
  double num_or(const std::string& key, double dflt) const {
    auto c = opt(key);
    return c ? c->num() : dflt;
  }
  std::uint64_t uint() const {
    if (j->is_number_unsigned()) return j->get<std::uint64_t>();
    if (j->is_number_integer()) {
      const auto v = j->get<std::int64_t>();
      if (v < 0) fail("expected a nonnegative integer");
      return static_cast<std::uint64_t>(v);
    }
    if (j->is_number_float()) {
      const double v = j->get<double>();
      if (!(v >= 0.0) || v != std::floor(v) || v > 9.007199254740992e15)
        fail("expected a nonnegative integer");
      return static_cast<std::uint64_t>(v);
    }
    fail("expected a nonnegative integer");
  }
  std::uint64_t uint_or(const std::string& key, std::uint64_t dflt) const {
    auto c = opt(key);
    return c ? c->uint() : dflt;
  }
  int integer() const {
    const std::uint64_t v = uint();
    if (v > 2147483647ULL) fail("integer out of range");
    return static_cast<int>(v);
  }
  std::string str() const {
    if (!j->is_string()) fail("expected a string");
    return j->get<std::string>();
  }
  bool boolean() const {
    if (!j->is_boolean()) fail("expected a boolean");
    return j->get<bool>();
  }
  Point point() const {
    const std::size_t n = size();
    if (n == 0) fail("expected a nonempty coordinate array");
    Point p(n);
    for (std::size_t i = 0; i < n; ++i) p[i] = at(i).num();
    return p;
  }
};

Ball parse_ball(const Cursor& c) {
  c.keys({"center", "radius"});
  return Ball(c.child("center").point(), c.num("radius"));
}

std::vector<Ball> parse_balls(const Cursor& c) {
  std::vector<Ball> out;
  out.reserve(c.size());
  for (std::size_t i = 0; i < c.size(); ++i) out.push_back(parse_ball(c.at(i)));
  return out;
}

OpenSet parse_open_set(const Cursor& c) {
  c.keys({"cover", "holes"});
  std::vector<Ball> cover = parse_balls(c.child("cover"));
  if (auto h = c.opt("holes")) return OpenSet::with_holes(std::move(cover), parse_balls(*h));
  return OpenSet::from_balls(std::move(cover));
}

KernelSpec parse_kernel(const Cursor& c) {
  c.keys({"d", "alpha"});
  const int d = c.child("d").integer();
  const double alpha = c.num_or("alpha", 2.0);
  return alpha == 2.0 ? KernelSpec::classical(d) : KernelSpec::riesz(d, alpha);
}

DomainSpec parse_domain(const Cursor& c, int d) {
  c.keys({"kind", "center", "radius"});
  const std::string kind = c.child("kind").str();
  if (kind == "full_space") {
    if (c.opt("center") || c.opt("radius")) c.fail("full_space takes no ball");
    return DomainSpec::full_space(static_cast<std::size_t>(d));
  }
  if (kind == "open_ball") {
    Ball b(c.child("center").point(), c.num("radius"));
    if (b.dimension() != static_cast<std::size_t>(d)) c.fail("domain dimension mismatch");
    return DomainSpec::open_ball(std::move(b));
  }
  c.fail("unknown domain kind '" + kind + "'");
}

WeightedMeasure parse_source(const Cursor& c) {
  c.keys({"atoms"});
  const Cursor arr = c.child("atoms");
  std::vector<Atom> atoms;
  atoms.reserve(arr.size());
  for (std::size_t i = 0; i < arr.size(); ++i) {
    const Cursor a = arr.at(i);
    a.keys({"x", "w"});
    Atom at;
    at.x = a.child("x").point();
    at.w = a.num("w");
    if (!(at.w > 0.0) || !std::isfinite(at.w)) a.fail("atom weight must be positive");
    atoms.push_back(std::move(at));
  }
  return WeightedMeasure::from_atoms(std::move(atoms));
}

Potential parse_potential(const Cursor& c) {
  const std::string kind = c.child("kind").str();
  std::optional<double> cap;
  if (auto cc = c.opt("cap")) cap = cc->num();
  Potential q = [&] {
    if (kind == "newton_kernel") {
      c.keys({"kind", "id", "pole", "scale", "cap", "allow_gate"});
      return Potential::newton_kernel(c.child("pole").point(), c.num_or("scale", 1.0), cap);
    }
    if (kind == "riesz_kernel") {
      c.keys({"kind", "id", "pole", "alpha", "scale", "cap", "allow_gate"});
      return Potential::riesz_kernel(c.child("pole").point(), c.num("alpha"),
                                     c.num_or("scale", 1.0), cap);
    }
    if (kind == "green_ball") {
      c.keys({"kind", "id", "ball", "pole", "scale", "cap", "allow_gate"});
      return Potential::green_ball(parse_ball(c.child("ball")), c.child("pole").point(),
                                   c.num_or("scale", 1.0), cap);
    }
    if (kind == "bump") {
      c.keys({"kind", "id", "center", "radius", "scale", "allow_gate"});
      return Potential::bump(c.child("center").point(), c.num("radius"),
                             c.num_or("scale", 1.0));
    }
    c.fail("unknown potential kind '" + kind + "'");
  }();
  if (auto id = c.opt("id")) q.id = id->str();
  return q;
}

Dictionary parse_dictionary(const Cursor& c) {
  c.keys({"members", "reference", "bound_multiple"});
  Dictionary dict;
  const Cursor arr = c.child("members");
  if (arr.size() == 0) arr.fail("dictionary needs at least one member");
  for (std::size_t i = 0; i < arr.size(); ++i) {
    const Cursor m = arr.at(i);
    Potential q = parse_potential(m);
    bool allow_gate = true;
    if (auto g = m.opt("allow_gate")) allow_gate = g->boolean();
    dict.members.push_back({std::move(q), allow_gate});
  }
  if (auto r = c.opt("reference")) dict.reference = parse_potential(*r);
  dict.bound_multiple = c.num_or("bound_multiple", 1.0);
  return dict;
}

McParams parse_mc(const Cursor& c, McParams base) {
  c.keys({"samples", "eps_shell", "escape_radius", "max_steps", "seed", "workers"});
  base.samples = static_cast<std::size_t>(c.uint_or("samples", base.samples));
  base.eps_shell = c.num_or("eps_shell", base.eps_shell);
  base.escape_radius = c.num_or("escape_radius", base.escape_radius);
  base.max_steps = static_cast<std::size_t>(c.uint_or("max_steps", base.max_steps));
  base.seed = c.uint_or("seed", base.seed);
  base.workers = static_cast<int>(c.uint_or("workers", static_cast<std::uint64_t>(base.workers)));
  return base;
}

ShrinkConfig parse_shrink_cfg(const Cursor& c, ShrinkConfig cfg) {
  cfg.tol_s = c.num_or("tol_s", cfg.tol_s);
  cfg.tol_mass_rel = c.num_or("tol_mass_rel", cfg.tol_mass_rel);
  cfg.bisection_depth = static_cast<int>(c.uint_or("bisection_depth", cfg.bisection_depth));
  cfg.max_sweeps = static_cast<int>(c.uint_or("max_sweeps", cfg.max_sweeps));
  cfg.check_seed_offset = c.uint_or("check_seed_offset", cfg.check_seed_offset);
  return cfg;
}

std::vector<double> parse_doubles(const Cursor& c) {
  std::vector<double> out;
  out.reserve(c.size());
  for (std::size_t i = 0; i < c.size(); ++i) out.push_back(c.at(i).num());
  return out;
}

std::vector<int> parse_ints(const Cursor& c) {
  std::vector<int> out;
  out.reserve(c.size());
  for (std::size_t i = 0; i < c.size(); ++i) out.push_back(c.at(i).integer());
  return out;
}

void check_simplex(const Cursor& where, const std::vector<double>& lambda) {
  double sum = 0.0;
  for (double l : lambda) {
    if (!(l >= 0.0)) where.fail("weights must be nonnegative");
    sum += l;
  }
  if (std::abs(sum - 1.0) > 1e-9)
    where.fail("weights must sum to one (simplex violation, sum = " + std::to_string(sum) + ")");
}

TheoremOptions parse_theorem_options(const Cursor& c, const McParams& mc) {
  TheoremOptions opt;
  opt.mc = mc;
  opt.mc_grid = mc;
  opt.mc_solver = mc;
  opt.seed = mc.seed;
  opt.eta = c.num_or("eta", opt.eta);
  opt.m_start = static_cast<int>(c.uint_or("m_start", opt.m_start));
  opt.max_m_doublings = static_cast<int>(c.uint_or("max_m_doublings", opt.max_m_doublings));
  opt.max_grid_balls = static_cast<std::size_t>(c.uint_or("max_grid_balls", opt.max_grid_balls));
  opt.modulus_pairs = static_cast<std::size_t>(c.uint_or("modulus_pairs", opt.modulus_pairs));
  if (auto g = c.opt("mc_grid")) opt.mc_grid = parse_mc(*g, mc);
  if (auto s = c.opt("mc_solver")) opt.mc_solver = parse_mc(*s, mc);
  if (auto s = c.opt("shrink")) {
    s->keys({"tol_s", "tol_mass_rel", "bisection_depth", "max_sweeps", "check_seed_offset"});
    opt.shrink = parse_shrink_cfg(*s, opt.shrink);
  }
  return opt;
}

PathParams parse_path(const Cursor& c, std::uint64_t seed) {
  PathParams p;
  p.seed = seed;
  c.keys({"samples", "dt_scale", "switch_factor", "ball_factor", "eps_shell", "escape_radius",
          "max_steps", "seed", "workers"});
  p.samples = static_cast<std::size_t>(c.uint_or("samples", p.samples));
  p.dt_scale = c.num_or("dt_scale", p.dt_scale);
  p.switch_factor = c.num_or("switch_factor", p.switch_factor);
  p.ball_factor = c.num_or("ball_factor", p.ball_factor);
  p.eps_shell = c.num_or("eps_shell", p.eps_shell);
  p.escape_radius = c.num_or("escape_radius", p.escape_radius);
  p.max_steps = static_cast<std::size_t>(c.uint_or("max_steps", p.max_steps));
  p.seed = c.uint_or("seed", p.seed);
  p.workers = static_cast<int>(c.uint_or("workers", 0));
  return p;
}

const char* block_key(ExperimentKind kind) {
  switch (kind) {
    case ExperimentKind::Shrink: return "shrink";
    case ExperimentKind::Theorem: return "theorem";
    case ExperimentKind::GridApprox: return "grid_approx";
    case ExperimentKind::ExitMixture: return "exit_mixture";
    case ExperimentKind::Jensen: return "jensen";
    case ExperimentKind::Skorokhod: return "skorokhod";
    case ExperimentKind::Harnack: return "harnack";
    default: return nullptr;
  }
}

}  // namespace

std::string experiment_name(ExperimentKind kind) {
  switch (kind) {
    case ExperimentKind::Balayage: return "balayage";
    case ExperimentKind::Shrink: return "shrink";
    case ExperimentKind::Theorem: return "theorem";
    case ExperimentKind::GridApprox: return "grid_approx";
    case ExperimentKind::ExitMixture: return "exit_mixture";
    case ExperimentKind::Jensen: return "jensen";
    case ExperimentKind::Skorokhod: return "skorokhod";
    case ExperimentKind::Harnack: return "harnack";
  }
  return "unknown";
}

ExperimentKind experiment_from_name(const std::string& name, const std::string& path) {
  if (name == "balayage") return ExperimentKind::Balayage;
  if (name == "shrink") return ExperimentKind::Shrink;
  if (name == "theorem") return ExperimentKind::Theorem;
  if (name == "grid_approx" || name == "grid-approx") return ExperimentKind::GridApprox;
  if (name == "exit_mixture" || name == "exit-mixture") return ExperimentKind::ExitMixture;
  if (name == "jensen") return ExperimentKind::Jensen;
  if (name == "skorokhod") return ExperimentKind::Skorokhod;
  if (name == "harnack") return ExperimentKind::Harnack;
  throw ConfigError("config error at " + path + ": unknown experiment '" + name + "'");
}

RunConfig parse_config(const ojson& j) {
  const Cursor root{&j, ""};
  if (!j.is_object()) root.fail("expected a top-level object");

  const auto sv = root.child("schema_version").uint();
  if (sv != static_cast<std::uint64_t>(kSchemaVersion))
    root.child("schema_version").fail("unsupported schema version");

  RunConfig cfg;
  cfg.kind = experiment_from_name(root.child("experiment").str(), "/experiment");

  // Per-experiment allowed top-level sections.
  std::set<std::string> allowed = {"schema_version", "experiment", "kernel", "domain", "mc",
                                   "output"};
  switch (cfg.kind) {
    case ExperimentKind::Balayage:
      allowed.insert({"source", "stop_balls", "open_target", "window", "dictionary"});
      break;
    case ExperimentKind::Shrink:
      allowed.insert({"source", "stop_balls", "window", "shrink"});
      break;
    case ExperimentKind::Theorem:
      allowed.insert({"source", "window", "dictionary", "theorem"});
      break;
    case ExperimentKind::GridApprox:
      allowed.insert({"source", "open_target", "window", "dictionary", "grid_approx"});
      break;
    case ExperimentKind::ExitMixture:
      allowed.insert({"source", "dictionary", "exit_mixture"});
      break;
    case ExperimentKind::Jensen:
      allowed.insert({"stop_balls", "dictionary", "jensen"});
      break;
    case ExperimentKind::Skorokhod:
      allowed.insert({"source", "stop_balls", "dictionary", "skorokhod"});
      break;
    case ExperimentKind::Harnack:
      allowed.insert({"harnack"});
      allowed.erase("domain");  // the audit chooses its own domain
      break;
  }
  for (auto it = j.begin(); it != j.end(); ++it) {
    if (!allowed.count(it.key()))
      root.fail("key '" + it.key() + "' is not allowed for experiment '" +
                experiment_name(cfg.kind) + "'");
  }

  cfg.kernel = parse_kernel(root.child("kernel"));
  if (auto d = root.opt("domain"))
    cfg.domain = parse_domain(*d, cfg.kernel.d);
  else
    cfg.domain = DomainSpec::full_space(static_cast<std::size_t>(cfg.kernel.d));
  if (auto m = root.opt("mc")) cfg.mc = parse_mc(*m, McParams{});
  if (auto o = root.opt("output")) {
    o->keys({"out_dir", "format"});
    if (auto dir = o->opt("out_dir")) cfg.output.out_dir = dir->str();
    if (auto f = o->opt("format")) {
      cfg.output.format = f->str();
      if (cfg.output.format != "json" && cfg.output.format != "csv" &&
          cfg.output.format != "both")
        f->fail("format must be json, csv, or both");
    }
  }

  if (auto s = root.opt("source")) cfg.source = parse_source(*s);
  if (auto b = root.opt("stop_balls")) cfg.stop_balls = BallUnion(parse_balls(*b));
  if (auto t = root.opt("open_target")) cfg.open_target = parse_open_set(*t);
  if (auto w = root.opt("window")) cfg.window = parse_open_set(*w);
  if (auto d = root.opt("dictionary")) cfg.dict = parse_dictionary(*d);

  const auto require = [&](bool present, const char* what) {
    if (!present) root.fail(std::string("experiment '") + experiment_name(cfg.kind) +
                            "' requires section '" + what + "'");
  };

  const char* bk = block_key(cfg.kind);
  std::optional<Cursor> block = bk ? root.opt(bk) : std::nullopt;
  switch (cfg.kind) {
    case ExperimentKind::Balayage: {
      require(cfg.source.has_value(), "source");
      if (!cfg.stop_balls && !cfg.open_target && !cfg.window)
        root.fail("balayage needs stop_balls, open_target, or window");
      break;
    }
    case ExperimentKind::Shrink: {
      require(cfg.source.has_value(), "source");
      require(cfg.stop_balls.has_value(), "stop_balls");
      require(block.has_value(), "shrink");
      block->keys({"mode", "delta", "lambda", "partition", "beta", "caps", "tol_s",
                   "tol_mass_rel", "bisection_depth", "max_sweeps", "check_seed_offset"});
      ShrinkRun run;
      run.mode = block->opt("mode") ? block->child("mode").str() : run.mode;
      if (run.mode != "joint" && run.mode != "joint_scaled" && run.mode != "fraction" &&
          run.mode != "max")
        block->child("mode").fail("mode must be joint, joint_scaled, fraction, or max");
      run.delta = block->num("delta");
      if (auto l = block->opt("lambda")) run.lambda = parse_doubles(*l);
      if (auto p = block->opt("partition")) run.partition = parse_ints(*p);
      if (auto b = block->opt("beta")) run.beta = parse_doubles(*b);
      if (auto c = block->opt("caps")) run.caps = parse_doubles(*c);
      run.cfg = parse_shrink_cfg(*block, ShrinkConfig{});
      if (run.mode == "joint" || run.mode == "joint_scaled") {
        if (run.lambda.empty()) block->fail("joint modes need lambda");
        if (run.partition.empty()) block->fail("joint modes need partition");
        check_simplex(block->child("lambda"), run.lambda);
      }
      if (run.mode == "joint_scaled" || run.mode == "fraction") {
        if (run.beta.empty()) block->fail("scaled modes need beta");
        for (double b : run.beta)
          if (!(b >= 0.0 && b <= 1.0)) block->child("beta").fail("beta must lie in [0,1]");
      }
      if (run.mode == "max" && run.caps.empty()) block->fail("max mode needs caps");
      cfg.shrink = std::move(run);
      break;
    }
    case ExperimentKind::Theorem: {
      require(cfg.source.has_value(), "source");
      require(cfg.window.has_value(), "window");
      require(cfg.dict.has_value(), "dictionary");
      require(block.has_value(), "theorem");
      block->keys({"eta", "u_sets", "lambda", "m_start", "max_m_doublings", "max_grid_balls",
                   "modulus_pairs", "mc_grid", "mc_solver", "shrink"});
      TheoremRun run;
      const Cursor us = block->child("u_sets");
      for (std::size_t i = 0; i < us.size(); ++i) run.u_sets.push_back(parse_open_set(us.at(i)));
      run.lambda = parse_doubles(block->child("lambda"));
      check_simplex(block->child("lambda"), run.lambda);
      run.opt = parse_theorem_options(*block, cfg.mc);
      cfg.theorem = std::move(run);
      break;
    }
    case ExperimentKind::GridApprox: {
      require(cfg.source.has_value(), "source");
      require(cfg.open_target.has_value(), "open_target");
      require(cfg.dict.has_value(), "dictionary");
      require(block.has_value(), "grid_approx");
      block->keys({"offset", "a", "levels"});
      GridApproxRun run;
      run.ladder.offset = block->child("offset").point();
      run.ladder.a = block->num_or("a", run.ladder.a);
      run.ladder.levels = parse_ints(block->child("levels"));
      cfg.grid = std::move(run);
      break;
    }
    case ExperimentKind::ExitMixture: {
      require(cfg.source.has_value(), "source");
      require(cfg.dict.has_value(), "dictionary");
      require(block.has_value(), "exit_mixture");
      block->keys({"u_balls", "lambda", "levels", "eta", "m_start", "max_m_doublings",
                   "max_grid_balls", "modulus_pairs", "mc_grid", "mc_solver", "shrink"});
      ExitMixtureRun run;
      run.u_balls = parse_balls(block->child("u_balls"));
      run.lambda = parse_doubles(block->child("lambda"));
      check_simplex(block->child("lambda"), run.lambda);
      run.levels = parse_ints(block->child("levels"));
      run.opt = parse_theorem_options(*block, cfg.mc);
      cfg.mixture = std::move(run);
      break;
    }
    case ExperimentKind::Jensen: {
      require(cfg.stop_balls.has_value(), "stop_balls");
      require(cfg.dict.has_value(), "dictionary");
      require(block.has_value(), "jensen");
      block->keys({"x"});
      cfg.jensen = JensenRun{block->child("x").point()};
      break;
    }
    case ExperimentKind::Skorokhod: {
      require(cfg.source.has_value(), "source");
      require(cfg.stop_balls.has_value(), "stop_balls");
      require(cfg.dict.has_value(), "dictionary");
      SkorokhodRun run;
      if (block) {
        block->keys({"path"});
        if (auto p = block->opt("path")) run.path = parse_path(*p, cfg.mc.seed + 1);
      } else {
        run.path.seed = cfg.mc.seed + 1;
      }
      cfg.skorokhod = std::move(run);
      break;
    }
    case ExperimentKind::Harnack: {
      require(block.has_value(), "harnack");
      block->keys({"deltas", "triples"});
      HarnackRun run;
      run.deltas = parse_doubles(block->child("deltas"));
      run.triples = static_cast<std::size_t>(block->uint_or("triples", run.triples));
      cfg.harnack = std::move(run);
      break;
    }
  }

  cfg.echo = j;
  return cfg;
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("config error: cannot read '" + path + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  ojson j;
  try {
    j = ojson::parse(buf.str());
  } catch (const std::exception& e) {
    throw ConfigError(std::string("config error: malformed JSON: ") + e.what());
  }
  return parse_config(j);
}

ojson validate_config(const RunConfig& cfg) {
  ojson out;
  out["ok"] = true;
  out["experiment"] = experiment_name(cfg.kind);
  out["kernel"] = {{"d", cfg.kernel.d}, {"alpha", cfg.kernel.alpha}};
  out["domain"] = cfg.domain.kind == DomainSpec::Kind::FullSpace
                      ? ojson{{"kind", "full_space"}}
                      : ojson{{"kind", "open_ball"},
                              {"center", cfg.domain.ball.center},
                              {"radius", cfg.domain.ball.radius}};
  out["mc"] = {{"samples", cfg.mc.samples}, {"seed", cfg.mc.seed}, {"workers", cfg.mc.workers}};
  if (cfg.source) {
    out["source_atoms"] = cfg.source->atoms().size();
    out["source_mass"] = cfg.source->total_input();
  }
  if (cfg.stop_balls) out["stop_balls"] = cfg.stop_balls->size();
  if (cfg.open_target)
    out["open_target"] = {{"cover", cfg.open_target->cover().size()},
                          {"holes", cfg.open_target->holes().size()}};
  if (cfg.window)
    out["window"] = {{"cover", cfg.window->cover().size()},
                     {"holes", cfg.window->holes().size()}};
  if (cfg.dict) out["dictionary_members"] = cfg.dict->members.size();

  if (cfg.kind == ExperimentKind::Shrink) {
    const DeltaFamilyReport rep =
        cfg.window
            ? validate_delta_family(*cfg.stop_balls, cfg.shrink->delta, cfg.kernel.alpha,
                                    *cfg.window)
            : validate_delta_family(*cfg.stop_balls, cfg.shrink->delta, cfg.kernel.alpha,
                                    cfg.domain);
    ojson fam;
    fam["valid"] = rep.valid;
    fam["delta"] = rep.delta;
    fam["delta_cap"] = rep.delta_cap;
    fam["min_admissible_delta"] = rep.min_admissible_delta;
    ojson slacks = ojson::array();
    for (const BallSlack& s : rep.slacks)
      slacks.push_back({{"radius", s.radius},
                        {"distance", std::isfinite(s.distance) ? ojson(s.distance) : ojson()},
                        {"slack", std::isfinite(s.slack) ? ojson(s.slack) : ojson()},
                        {"min_delta", s.min_delta}});
    fam["slacks"] = std::move(slacks);
    out["delta_family"] = std::move(fam);
  }
  if (cfg.kind == ExperimentKind::Theorem) {
    out["theorem"] = {{"eta", cfg.theorem->opt.eta},
                      {"sets", cfg.theorem->u_sets.size()},
                      {"m_start", cfg.theorem->opt.m_start}};
  }
  return out;
}

}  // namespace balayage
