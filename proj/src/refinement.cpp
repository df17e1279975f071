#include "secwit/refinement.hpp"

#include <algorithm>
#include <chrono>
#include <deque>
#include <map>
#include <set>
#include <sstream>

namespace secwit::refinement {

using bundle::AutomatonView;
using bundle::ProductState;
using bundle::ProductSystem;
using secir::AttackModel;
using secir::Config;
using secir::Event;
using secir::Program;
using traceops::EventVec;

const char *to_string(Status s) {
  switch (s) {
  case Status::Valid: return "valid";
  case Status::Invalid: return "invalid";
  case Status::Inconclusive: return "inconclusive";
  }
  return "?";
}

traceops::EventPred input_set_pred(InputSet s) {
  switch (s) {
  case InputSet::Inputs:
    return [](const Event &e) { return e.kind == secir::EvKind::Input; };
  case InputSet::IO:
    return [](const Event &e) {
      return e.kind == secir::EvKind::Input || e.kind == secir::EvKind::Output;
    };
  case InputSet::All:
    return [](const Event &e) { return e.kind != secir::EvKind::Eps; };
  case InputSet::None:
    return [](const Event &) { return false; };
  }
  return [](const Event &) { return false; };
}

// --- formula evaluation ---------------------------------------------------------

namespace {

int resolve_track(const TrackRef &t, const WitnessEnv &env) {
  int idx;
  if (t.bound) {
    if (env.bound_track < 0)
      throw TypeError("track variable i used outside alltracks");
    idx = env.bound_track;
  } else {
    idx = t.index - 1;
  }
  if (idx < 0 || idx >= env.k)
    throw TypeError("track index out of range");
  return idx;
}

const Program &prog_of(Side s, const WitnessEnv &env) {
  const Program *p = s == Side::Src ? env.sprog : env.tprog;
  if (!p)
    throw TypeError("no program bound for side");
  return *p;
}

const Config &cfg_of(Side s, int track, const WitnessEnv &env) {
  const auto *cfgs = s == Side::Src ? env.scfgs : env.tcfgs;
  if (!cfgs)
    throw TypeError("no configurations bound for side");
  return cfgs->at(static_cast<std::size_t>(track));
}

const std::string &loc_label(Side s, const TrackRef &t, const WitnessEnv &env) {
  const Program &p = prog_of(s, env);
  return p.label_of(cfg_of(s, resolve_track(t, env), env).loc);
}

int resolve_state(const Term &t, const WitnessEnv &env) {
  if (t.kind == Term::Kind::StateRef)
    return t.value == 0 ? env.qT : env.qS;
  if (t.kind == Term::Kind::StateLit) {
    if (!env.aut)
      throw TypeError("automaton state used without an automaton");
    return env.aut->state_index(t.name);
  }
  throw TypeError("expected an automaton state term");
}

long long wrap_to_domain(long long v, int d) {
  long long r = v % d;
  if (r < 0)
    r += d;
  return r;
}

// Stores with updates applied; values reduced into the owning domain.
std::vector<int> apply_alpha(const AlphaExpr &a, const WitnessEnv &env) {
  const Program &p = prog_of(a.side, env);
  std::vector<int> alpha = cfg_of(a.side, resolve_track(a.track, env), env).alpha;
  for (auto &up : a.updates) {
    long long v = eval_term_int(*up.value, env);
    int vv = static_cast<int>(wrap_to_domain(v, p.domain));
    if (up.is_array) {
      auto it = p.array_slot.find(up.name);
      if (it == p.array_slot.end())
        throw TypeError("update of undeclared array " + up.name);
      auto [base, len] = it->second;
      long long idx = eval_term_int(*up.index, env);
      alpha[static_cast<std::size_t>(base) +
            static_cast<std::size_t>(wrap_to_domain(idx, len))] = vv;
    } else {
      auto it = p.scalar_slot.find(up.name);
      if (it == p.scalar_slot.end())
        throw TypeError("update of undeclared variable " + up.name);
      alpha[static_cast<std::size_t>(it->second)] = vv;
    }
  }
  return alpha;
}

bool stores_equal(const AlphaExpr &a, const AlphaExpr &b,
                  const WitnessEnv &env) {
  const Program &pa = prog_of(a.side, env);
  const Program &pb = prog_of(b.side, env);
  std::vector<int> va = apply_alpha(a, env);
  std::vector<int> vb = apply_alpha(b, env);
  if (&pa == &pb)
    return va == vb;
  if (pa.vars != pb.vars || pa.arrays != pb.arrays)
    throw TypeError("store equality over different declarations; use eqvars");
  return va == vb;
}

bool eqvars_holds(const Formula &f, const WitnessEnv &env) {
  const Program &pa = prog_of(f.alpha_a->side, env);
  const Program &pb = prog_of(f.alpha_b->side, env);
  const Config &ca =
      cfg_of(f.alpha_a->side, resolve_track(f.alpha_a->track, env), env);
  const Config &cb =
      cfg_of(f.alpha_b->side, resolve_track(f.alpha_b->track, env), env);
  for (auto &n : f.names) {
    auto sa = pa.scalar_slot.find(n);
    auto sb = pb.scalar_slot.find(n);
    if (sa != pa.scalar_slot.end() && sb != pb.scalar_slot.end()) {
      if (ca.alpha[static_cast<std::size_t>(sa->second)] !=
          cb.alpha[static_cast<std::size_t>(sb->second)])
        return false;
      continue;
    }
    auto aa = pa.array_slot.find(n);
    auto ab = pb.array_slot.find(n);
    if (aa != pa.array_slot.end() && ab != pb.array_slot.end()) {
      if (aa->second.second != ab->second.second)
        throw TypeError("eqvars: array " + n + " lengths differ");
      for (int i = 0; i < aa->second.second; ++i)
        if (ca.alpha[static_cast<std::size_t>(aa->second.first + i)] !=
            cb.alpha[static_cast<std::size_t>(ab->second.first + i)])
          return false;
      continue;
    }
    throw TypeError("eqvars: name " + n + " not declared on both sides");
  }
  return true;
}

bool cmp_longs(Formula::Cmp c, long long a, long long b) {
  switch (c) {
  case Formula::Cmp::Eq: return a == b;
  case Formula::Cmp::Ne: return a != b;
  case Formula::Cmp::Lt: return a < b;
  case Formula::Cmp::Le: return a <= b;
  case Formula::Cmp::Gt: return a > b;
  case Formula::Cmp::Ge: return a >= b;
  }
  return false;
}

} // namespace

long long eval_term_int(const Term &t, const WitnessEnv &env) {
  using K = Term::Kind;
  switch (t.kind) {
  case K::IntLit:
    return t.value;
  case K::AlphaRead: {
    const Program &p = prog_of(t.side, env);
    const Config &c = cfg_of(t.side, resolve_track(t.track, env), env);
    if (t.index) {
      auto it = p.array_slot.find(t.name);
      if (it == p.array_slot.end())
        throw TypeError("read of undeclared array " + t.name);
      auto [base, len] = it->second;
      long long idx = wrap_to_domain(eval_term_int(*t.index, env), len);
      return c.alpha[static_cast<std::size_t>(base) +
                     static_cast<std::size_t>(idx)];
    }
    auto it = p.scalar_slot.find(t.name);
    if (it == p.scalar_slot.end())
      throw TypeError("read of undeclared variable " + t.name);
    return c.alpha[static_cast<std::size_t>(it->second)];
  }
  case K::Arith: {
    long long a = eval_term_int(*t.a, env);
    long long b = eval_term_int(*t.b, env);
    switch (t.arith_op) {
    case '+': return a + b;
    case '-': return a - b;
    case '*': return a * b;
    case '/':
      if (b == 0)
        throw TypeError("division by zero in witness term");
      return a / b;
    case '%':
      if (b == 0)
        throw TypeError("modulo by zero in witness term");
      return a % b;
    }
    throw TypeError("unknown arithmetic operator");
  }
  case K::CondT:
    return eval_witness(*t.cond, env) ? eval_term_int(*t.a, env)
                                      : eval_term_int(*t.b, env);
  case K::TrackSum: {
    long long sum = 0;
    WitnessEnv e2 = env;
    for (int i = 0; i < env.k; ++i) {
      e2.bound_track = i;
      sum += eval_term_int(*t.a, e2);
    }
    return sum;
  }
  default:
    throw TypeError("expected an integer term");
  }
}

bool eval_witness(const Formula &f, const WitnessEnv &env) {
  using K = Formula::Kind;
  switch (f.kind) {
  case K::True:
    return true;
  case K::False:
    return false;
  case K::Not:
    return !eval_witness(*f.f, env);
  case K::And:
    return eval_witness(*f.f, env) && eval_witness(*f.g, env);
  case K::Or:
    return eval_witness(*f.f, env) || eval_witness(*f.g, env);
  case K::Implies:
    return !eval_witness(*f.f, env) || eval_witness(*f.g, env);
  case K::CondF:
    return eval_witness(*f.f, env) ? eval_witness(*f.g, env)
                                   : eval_witness(*f.h, env);
  case K::IntCmp:
    return cmp_longs(f.cmp, eval_term_int(*f.a, env), eval_term_int(*f.b, env));
  case K::LocCmp: {
    auto label_of_term = [&](const Term &t) -> std::string {
      if (t.kind == Term::Kind::LocRef)
        return loc_label(t.side, t.track, env);
      if (t.kind == Term::Kind::LocLit)
        return t.name;
      throw TypeError("expected a location term");
    };
    bool eq = label_of_term(*f.a) == label_of_term(*f.b);
    return f.cmp == Formula::Cmp::Eq ? eq : !eq;
  }
  case K::StateCmp: {
    bool eq = resolve_state(*f.a, env) == resolve_state(*f.b, env);
    return f.cmp == Formula::Cmp::Eq ? eq : !eq;
  }
  case K::AlphaEq: {
    bool eq = stores_equal(*f.alpha_a, *f.alpha_b, env);
    return f.cmp == Formula::Cmp::Eq ? eq : !eq;
  }
  case K::ConfigEq: {
    TrackRef ta = f.ctrack_a, tb = f.ctrack_b;
    if (loc_label(f.cside_a, ta, env) != loc_label(f.cside_b, tb, env))
      return false;
    AlphaExpr a{f.cside_a, ta, {}};
    AlphaExpr b{f.cside_b, tb, {}};
    return stores_equal(a, b, env);
  }
  case K::EqVars:
    return eqvars_holds(f, env);
  case K::PairRel: {
    if (!env.pair_sets)
      throw TypeError("pair set " + f.rel_name + " is not defined");
    auto it = env.pair_sets->find(f.rel_name);
    if (it == env.pair_sets->end())
      throw TypeError("pair set " + f.rel_name + " is not defined");
    auto label_of_term = [&](const Term &t) -> std::string {
      if (t.kind == Term::Kind::LocRef)
        return loc_label(t.side, t.track, env);
      if (t.kind == Term::Kind::LocLit)
        return t.name;
      throw TypeError("expected a location term");
    };
    return it->second.contains(label_of_term(*f.a), label_of_term(*f.b));
  }
  case K::DeltaAtom: {
    if (!env.aut)
      throw TypeError("Delta atom used without an automaton");
    if (f.symbol.size() != static_cast<std::size_t>(env.aut->k))
      throw TypeError("Delta symbol arity does not match the automaton");
    int from = resolve_state(*f.from_state, env);
    int to = resolve_state(*f.to_state, env);
    for (int q : env.aut->successors(from, f.symbol))
      if (q == to)
        return true;
    return false;
  }
  case K::AllTracks: {
    WitnessEnv e2 = env;
    for (int i = 0; i < env.k; ++i) {
      e2.bound_track = i;
      if (!eval_witness(*f.body, e2))
        return false;
    }
    return true;
  }
  }
  return false;
}

// --- shared exploration ---------------------------------------------------------

namespace {

struct ProductGraph {
  std::vector<ProductState> states;
  std::vector<std::vector<std::pair<EventVec, int>>> adj;
  bool overflow = false;
  bool exhausted = false;
};

ProductGraph explore(const ProductSystem &ps, Budget &budget) {
  ProductGraph g;
  std::map<ProductState, int> index;
  std::deque<int> queue;
  auto intern = [&](const ProductState &s) {
    auto it = index.find(s);
    if (it != index.end())
      return it->second;
    int n = static_cast<int>(g.states.size());
    index.emplace(s, n);
    g.states.push_back(s);
    g.adj.emplace_back();
    queue.push_back(n);
    return n;
  };
  intern(ps.initial());
  while (!queue.empty()) {
    if (!budget.charge()) {
      g.exhausted = true;
      break;
    }
    int n = queue.front();
    queue.pop_front();
    for (auto &[u, nxt] : ps.step(g.states[static_cast<std::size_t>(n)],
                                  &g.overflow))
      g.adj[static_cast<std::size_t>(n)].push_back({u, intern(nxt)});
  }
  return g;
}

struct ConfigGraph {
  std::vector<Config> states;
  std::vector<std::vector<std::pair<Event, int>>> adj;
  bool exhausted = false;
};

ConfigGraph explore_configs(const Program &p, const AttackModel &m,
                            Budget &budget) {
  ConfigGraph g;
  std::map<Config, int> index;
  std::deque<int> queue;
  auto intern = [&](const Config &c) {
    auto it = index.find(c);
    if (it != index.end())
      return it->second;
    int n = static_cast<int>(g.states.size());
    index.emplace(c, n);
    g.states.push_back(c);
    g.adj.emplace_back();
    queue.push_back(n);
    return n;
  };
  intern(secir::initial_config(p, m));
  while (!queue.empty()) {
    if (!budget.charge()) {
      g.exhausted = true;
      break;
    }
    int n = queue.front();
    queue.pop_front();
    for (auto &[ev, nxt] : secir::step(p, m, g.states[static_cast<std::size_t>(n)]))
      g.adj[static_cast<std::size_t>(n)].push_back({ev, intern(nxt)});
  }
  return g;
}

bool agree_vec(const EventVec &u, const EventVec &v,
               const traceops::EventPred &in_set) {
  for (std::size_t i = 0; i < u.size(); ++i)
    if (!traceops::agree_on(u[i], v[i], in_set))
      return false;
  return true;
}

bool none_in(const EventVec &v, const traceops::EventPred &in_set) {
  for (auto &e : v)
    if (in_set(e))
      return false;
  return true;
}

std::string describe_state(const bundle::BundleAutomaton *aut,
                           const Program &p, const ProductState &s,
                           bool with_aut) {
  std::ostringstream os;
  if (with_aut && aut)
    os << bundle::to_string(*aut, s.a) << " x ";
  os << "(";
  for (std::size_t i = 0; i < s.cfgs.size(); ++i) {
    if (i)
      os << ", ";
    os << secir::to_string(p, s.cfgs[i]);
  }
  os << ")";
  return os.str();
}

std::string describe_symbol(const EventVec &v) {
  std::ostringstream os;
  os << "(";
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i)
      os << ", ";
    os << secir::to_string(v[i]);
  }
  os << ")";
  return os.str();
}

struct RefinementContext {
  const bundle::BundleAutomaton *base = nullptr;
  const Program *sprog = nullptr;
  const Program *tprog = nullptr;
  const RefinementWitness *w = nullptr;
  traceops::EventPred in_set;
  int k = 1;
  const AutomatonView *view = nullptr;

  WitnessEnv env(const ProductState &x, const ProductState &y) const {
    WitnessEnv e;
    e.aut = base;
    e.qT = x.a.q;
    e.qS = y.a.q;
    e.tprog = tprog;
    e.sprog = sprog;
    e.tcfgs = &x.cfgs;
    e.scfgs = &y.cfgs;
    e.pair_sets = &w->pair_sets;
    e.k = k;
    return e;
  }
  bool R(const ProductState &x, const ProductState &y) const {
    return eval_witness(*w->R, env(x, y));
  }
  long long rank(const ProductState &x, const ProductState &y) const {
    return eval_term_int(*w->stutter->rank, env(x, y));
  }
  bool allows_target_alone() const {
    return w->stutter && (w->stutter->side == StutterSpec::Who::Target ||
                          w->stutter->side == StutterSpec::Who::Both);
  }
  bool allows_source_alone() const {
    return w->stutter && (w->stutter->side == StutterSpec::Who::Source ||
                          w->stutter->side == StutterSpec::Who::Both);
  }
};

struct Obligation {
  bool ok = false;
  std::string clause; // when !ok
};

// One Definition-4 matching obligation: related pair (x, y), target step
// x -v-> x2. Candidates are the source-side product steps from y.
Obligation match_obligation(const RefinementContext &ctx, const ProductState &x,
                            const ProductState &y, const EventVec &v,
                            const ProductState &x2,
                            const std::vector<std::pair<EventVec, ProductState>>
                                &candidates) {
  Obligation out;
  int level = candidates.empty() ? 0 : 1;
  const bool x2_acc = ctx.view->is_accepting(x2.a);
  for (auto &[u, y2] : candidates) {
    if (!agree_vec(u, v, ctx.in_set))
      continue;
    level = std::max(level, 2);
    if (!ctx.R(x2, y2))
      continue;
    level = std::max(level, 3);
    if (x2_acc && !ctx.view->is_accepting(y2.a))
      continue;
    out.ok = true;
    return out;
  }
  if (ctx.w->stutter) {
    long long rk = ctx.rank(x, y);
    if (ctx.allows_target_alone() && none_in(v, ctx.in_set) && ctx.R(x2, y) &&
        ctx.rank(x2, y) < rk &&
        (!x2_acc || ctx.view->is_accepting(y.a))) {
      out.ok = true;
      return out;
    }
    if (ctx.allows_source_alone()) {
      for (auto &[u, y2] : candidates) {
        if (none_in(u, ctx.in_set) && ctx.R(x, y2) && ctx.rank(x, y2) < rk) {
          out.ok = true;
          return out;
        }
      }
    }
  }
  out.clause = level == 0 ? "2a" : level == 1 ? "2b" : level == 2 ? "2c" : "2d";
  return out;
}

} // namespace

// --- check_refinement -----------------------------------------------------------

Verdict check_refinement(const AutomatonView &a, const Program &s,
                         const Program &t, const AttackModel &m, int k,
                         const RefinementWitness &w, Budget *budget) {
  auto t0 = std::chrono::steady_clock::now();
  Verdict verdict;
  Budget local;
  Budget &b = budget ? *budget : local;

  if (!w.R)
    throw ConfigError("witness has no R formula");
  ProductSystem pt = bundle::product(a, t, m, k);
  ProductSystem ps = bundle::product(a, s, m, k);

  RefinementContext ctx;
  ctx.base = a.base;
  ctx.sprog = &s;
  ctx.tprog = &t;
  ctx.w = &w;
  ctx.in_set = input_set_pred(w.input_set);
  ctx.k = k;
  ctx.view = &a;

  ProductGraph gt = explore(pt, b);
  ProductGraph gs = explore(ps, b);
  verdict.stats.tgt_states = static_cast<std::int64_t>(gt.states.size());
  verdict.stats.src_states = static_cast<std::int64_t>(gs.states.size());
  auto finish = [&](Verdict v) {
    v.stats = verdict.stats;
    v.stats.millis =
        std::chrono::duration<double, std::milli>(
            std::chrono::steady_clock::now() - t0)
            .count();
    return v;
  };
  if (gt.exhausted || gs.exhausted) {
    verdict.status = Status::Inconclusive;
    verdict.reason = "state budget exceeded while exploring the products";
    return finish(verdict);
  }
  if (gt.overflow || gs.overflow) {
    verdict.status = Status::Inconclusive;
    verdict.reason = "buffer bound exceeded while exploring the products";
    return finish(verdict);
  }

  const ProductState &x0 = gt.states[0];
  const ProductState &y0 = gs.states[0];
  if (!ctx.R(x0, y0)) {
    verdict.status = Status::Invalid;
    Counterexample cex;
    cex.clause = "init";
    cex.x = x0;
    cex.y = y0;
    cex.description = "initial configurations are not related: " +
                      describe_state(ctx.base, t, x0, true) + " vs " +
                      describe_state(ctx.base, s, y0, true);
    verdict.cex = std::move(cex);
    return finish(verdict);
  }

  for (std::size_t xi = 0; xi < gt.states.size(); ++xi) {
    for (std::size_t yi = 0; yi < gs.states.size(); ++yi) {
      const ProductState &x = gt.states[xi];
      const ProductState &y = gs.states[yi];
      if (!ctx.R(x, y))
        continue;
      ++verdict.stats.pairs_related;
      if (w.stutter) {
        long long rk = ctx.rank(x, y);
        if (rk < 0 || rk > w.stutter->bound) {
          verdict.status = Status::Invalid;
          Counterexample cex;
          cex.clause = rk < 0 ? "rank-negative" : "rank-bound";
          cex.x = x;
          cex.y = y;
          cex.description = "stutter rank " + std::to_string(rk) +
                            " out of range on related pair " +
                            describe_state(ctx.base, t, x, true) + " vs " +
                            describe_state(ctx.base, s, y, true);
          verdict.cex = std::move(cex);
          return finish(verdict);
        }
      }
      for (auto &[v, x2i] : gt.adj[xi]) {
        ++verdict.stats.obligations;
        if (!b.charge()) {
          verdict.status = Status::Inconclusive;
          verdict.reason = "state budget exceeded while matching transitions";
          return finish(verdict);
        }
        const ProductState &x2 = gt.states[static_cast<std::size_t>(x2i)];
        std::vector<std::pair<EventVec, ProductState>> candidates;
        candidates.reserve(gs.adj[yi].size());
        for (auto &[u, y2i] : gs.adj[yi])
          candidates.push_back({u, gs.states[static_cast<std::size_t>(y2i)]});
        Obligation ob = match_obligation(ctx, x, y, v, x2, candidates);
        if (!ob.ok) {
          verdict.status = Status::Invalid;
          Counterexample cex;
          cex.clause = ob.clause;
          cex.x = x;
          cex.y = y;
          cex.v = v;
          cex.x_next = x2;
          cex.has_transition = true;
          cex.description =
              "no matching source transition (clause " + ob.clause +
              ") for target step " + describe_symbol(v) + " from " +
              describe_state(ctx.base, t, x, true) + " related to " +
              describe_state(ctx.base, s, y, true);
          verdict.cex = std::move(cex);
          return finish(verdict);
        }
      }
    }
  }
  verdict.status = Status::Valid;
  return finish(verdict);
}

bool recheck_counterexample(const AutomatonView &a, const Program &s,
                            const Program &t, const AttackModel &m, int k,
                            const RefinementWitness &w,
                            const Counterexample &cex) {
  ProductSystem pt = bundle::product(a, t, m, k);
  ProductSystem ps = bundle::product(a, s, m, k);
  RefinementContext ctx;
  ctx.base = a.base;
  ctx.sprog = &s;
  ctx.tprog = &t;
  ctx.w = &w;
  ctx.in_set = input_set_pred(w.input_set);
  ctx.k = k;
  ctx.view = &a;

  if (cex.clause == "init")
    return !ctx.R(pt.initial(), ps.initial());
  if (cex.clause == "rank-negative" || cex.clause == "rank-bound") {
    if (!ctx.R(cex.x, cex.y) || !w.stutter)
      return false;
    long long rk = ctx.rank(cex.x, cex.y);
    return cex.clause == "rank-negative" ? rk < 0 : rk > w.stutter->bound;
  }
  // matching clauses: the pair must be related, the target step real, and
  // the obligation must fail at exactly the reported clause
  if (!ctx.R(cex.x, cex.y) || !cex.has_transition)
    return false;
  bool overflow = false;
  bool real_step = false;
  for (auto &[v, nxt] : pt.step(cex.x, &overflow))
    if (v == cex.v && nxt == cex.x_next)
      real_step = true;
  if (!real_step)
    return false;
  auto candidates = ps.step(cex.y, &overflow);
  Obligation ob =
      match_obligation(ctx, cex.x, cex.y, cex.v, cex.x_next, candidates);
  return !ob.ok && ob.clause == cex.clause;
}

// --- check_bisimulation ---------------------------------------------------------

namespace {

struct BisimContext {
  const Program *sprog = nullptr;
  const Program *tprog = nullptr;
  const BisimWitness *b = nullptr;
  traceops::EventPred in_set;

  WitnessEnv env(const Config &tc, const Config &sc,
                 std::vector<Config> &tbuf, std::vector<Config> &sbuf) const {
    tbuf = {tc};
    sbuf = {sc};
    WitnessEnv e;
    e.tprog = tprog;
    e.sprog = sprog;
    e.tcfgs = &tbuf;
    e.scfgs = &sbuf;
    e.pair_sets = &b->pair_sets;
    e.k = 1;
    return e;
  }
  bool B(const Config &tc, const Config &sc) const {
    std::vector<Config> tb, sb;
    return eval_witness(*b->B, env(tc, sc, tb, sb));
  }
  long long rank(const Config &tc, const Config &sc) const {
    std::vector<Config> tb, sb;
    return eval_term_int(*b->stutter->rank, env(tc, sc, tb, sb));
  }
  bool allows_target_alone() const {
    return b->stutter && (b->stutter->side == StutterSpec::Who::Target ||
                          b->stutter->side == StutterSpec::Who::Both);
  }
  bool allows_source_alone() const {
    return b->stutter && (b->stutter->side == StutterSpec::Who::Source ||
                          b->stutter->side == StutterSpec::Who::Both);
  }
};

ProductState wrap_config(const Config &c) {
  ProductState s;
  s.cfgs = {c};
  return s;
}

// One direction of the bisimulation game. `forward` = target moves, source
// answers (condition 2); otherwise source moves, target answers (condition 3).
Obligation bisim_obligation(const BisimContext &ctx, const Config &tc,
                            const Config &sc, const Event &moved,
                            const Config &moved_next, bool forward,
                            const std::vector<std::pair<Event, Config>>
                                &answers) {
  Obligation out;
  for (auto &[u, ans_next] : answers) {
    if (!traceops::agree_on(u, moved, ctx.in_set))
      continue;
    bool related = forward ? ctx.B(moved_next, ans_next)
                           : ctx.B(ans_next, moved_next);
    if (related) {
      out.ok = true;
      return out;
    }
  }
  if (ctx.b->stutter) {
    long long rk = ctx.rank(tc, sc);
    const bool mover_alone_ok =
        forward ? ctx.allows_target_alone() : ctx.allows_source_alone();
    if (mover_alone_ok && !ctx.in_set(moved)) {
      bool related = forward ? ctx.B(moved_next, sc) : ctx.B(tc, moved_next);
      long long rk2 =
          forward ? ctx.rank(moved_next, sc) : ctx.rank(tc, moved_next);
      if (related && rk2 < rk) {
        out.ok = true;
        return out;
      }
    }
    const bool answer_alone_ok =
        forward ? ctx.allows_source_alone() : ctx.allows_target_alone();
    if (answer_alone_ok) {
      for (auto &[u, ans_next] : answers) {
        if (ctx.in_set(u))
          continue;
        bool related = forward ? ctx.B(tc, ans_next) : ctx.B(ans_next, sc);
        long long rk2 =
            forward ? ctx.rank(tc, ans_next) : ctx.rank(ans_next, sc);
        if (related && rk2 < rk) {
          out.ok = true;
          return out;
        }
      }
    }
  }
  out.clause = forward ? "bisim-2" : "bisim-3";
  return out;
}

} // namespace

Verdict check_bisimulation(const Program &s, const Program &t,
                           const AttackModel &m, const BisimWitness &bw,
                           InputSet input_set, Budget *budget) {
  auto t0 = std::chrono::steady_clock::now();
  if (!bw.B)
    throw ConfigError("witness has no bisim formula");
  secir::validate_for_model(s, m);
  secir::validate_for_model(t, m);
  Verdict verdict;
  Budget local;
  Budget &b = budget ? *budget : local;

  BisimContext ctx;
  ctx.sprog = &s;
  ctx.tprog = &t;
  ctx.b = &bw;
  ctx.in_set = input_set_pred(input_set);

  ConfigGraph gt = explore_configs(t, m, b);
  ConfigGraph gs = explore_configs(s, m, b);
  verdict.stats.tgt_states = static_cast<std::int64_t>(gt.states.size());
  verdict.stats.src_states = static_cast<std::int64_t>(gs.states.size());
  auto finish = [&](Verdict v) {
    v.stats = verdict.stats;
    v.stats.millis =
        std::chrono::duration<double, std::milli>(
            std::chrono::steady_clock::now() - t0)
            .count();
    return v;
  };
  if (gt.exhausted || gs.exhausted) {
    verdict.status = Status::Inconclusive;
    verdict.reason = "state budget exceeded while exploring configurations";
    return finish(verdict);
  }

  if (!ctx.B(gt.states[0], gs.states[0])) {
    verdict.status = Status::Invalid;
    Counterexample cex;
    cex.clause = "bisim-1";
    cex.x = wrap_config(gt.states[0]);
    cex.y = wrap_config(gs.states[0]);
    cex.description = "initial configurations are not related by B";
    verdict.cex = std::move(cex);
    return finish(verdict);
  }

  for (std::size_t ti = 0; ti < gt.states.size(); ++ti) {
    for (std::size_t si = 0; si < gs.states.size(); ++si) {
      const Config &tc = gt.states[ti];
      const Config &sc = gs.states[si];
      if (!ctx.B(tc, sc))
        continue;
      ++verdict.stats.pairs_related;
      if (bw.stutter) {
        long long rk = ctx.rank(tc, sc);
        if (rk < 0 || rk > bw.stutter->bound) {
          verdict.status = Status::Invalid;
          Counterexample cex;
          cex.clause = rk < 0 ? "rank-negative" : "rank-bound";
          cex.x = wrap_config(tc);
          cex.y = wrap_config(sc);
          cex.description = "stutter rank " + std::to_string(rk) +
                            " out of range on a B-related pair";
          verdict.cex = std::move(cex);
          return finish(verdict);
        }
      }
      std::vector<std::pair<Event, Config>> tsucc, ssucc;
      for (auto &[ev, ni] : gt.adj[ti])
        tsucc.push_back({ev, gt.states[static_cast<std::size_t>(ni)]});
      for (auto &[ev, ni] : gs.adj[si])
        ssucc.push_back({ev, gs.states[static_cast<std::size_t>(ni)]});

      for (auto &[v, tc2] : tsucc) {
        ++verdict.stats.obligations;
        if (!b.charge()) {
          verdict.status = Status::Inconclusive;
          verdict.reason = "state budget exceeded while matching transitions";
          return finish(verdict);
        }
        Obligation ob = bisim_obligation(ctx, tc, sc, v, tc2, true, ssucc);
        if (!ob.ok) {
          verdict.status = Status::Invalid;
          Counterexample cex;
          cex.clause = ob.clause;
          cex.x = wrap_config(tc);
          cex.y = wrap_config(sc);
          cex.v = {v};
          cex.x_next = wrap_config(tc2);
          cex.has_transition = true;
          cex.description = "target step " + secir::to_string(v) + " from " +
                            secir::to_string(t, tc) +
                            " has no source answer (B-related to " +
                            secir::to_string(s, sc) + ")";
          verdict.cex = std::move(cex);
          return finish(verdict);
        }
      }
      for (auto &[u, sc2] : ssucc) {
        ++verdict.stats.obligations;
        Obligation ob = bisim_obligation(ctx, tc, sc, u, sc2, false, tsucc);
        if (!ob.ok) {
          verdict.status = Status::Invalid;
          Counterexample cex;
          cex.clause = ob.clause;
          cex.x = wrap_config(tc);
          cex.y = wrap_config(sc);
          cex.v = {u};
          cex.x_next = wrap_config(sc2);
          cex.has_transition = true;
          cex.description = "source step " + secir::to_string(u) + " from " +
                            secir::to_string(s, sc) +
                            " has no target answer (B-related to " +
                            secir::to_string(t, tc) + ")";
          verdict.cex = std::move(cex);
          return finish(verdict);
        }
      }
    }
  }
  verdict.status = Status::Valid;
  return finish(verdict);
}

bool recheck_bisim_counterexample(const Program &s, const Program &t,
                                  const AttackModel &m, const BisimWitness &bw,
                                  InputSet input_set,
                                  const Counterexample &cex) {
  BisimContext ctx;
  ctx.sprog = &s;
  ctx.tprog = &t;
  ctx.b = &bw;
  ctx.in_set = input_set_pred(input_set);
  const Config &tc = cex.x.cfgs.at(0);
  const Config &sc = cex.y.cfgs.at(0);
  if (cex.clause == "bisim-1")
    return !ctx.B(secir::initial_config(t, m), secir::initial_config(s, m));
  if (!ctx.B(tc, sc))
    return false;
  if (cex.clause == "rank-negative" || cex.clause == "rank-bound") {
    if (!bw.stutter)
      return false;
    long long rk = ctx.rank(tc, sc);
    return cex.clause == "rank-negative" ? rk < 0 : rk > bw.stutter->bound;
  }
  const bool forward = cex.clause == "bisim-2";
  const Config &mover = forward ? tc : sc;
  const Program &mprog = forward ? t : s;
  bool real = false;
  for (auto &[ev, nxt] : secir::step(mprog, m, mover))
    if (ev == cex.v.at(0) && nxt == cex.x_next.cfgs.at(0))
      real = true;
  if (!real)
    return false;
  auto answers = secir::step(forward ? s : t, m, forward ? sc : tc);
  Obligation ob = bisim_obligation(ctx, tc, sc, cex.v.at(0),
                                   cex.x_next.cfgs.at(0), forward, answers);
  return !ob.ok && ob.clause == cex.clause;
}

// --- relative refinement --------------------------------------------------------

namespace {

// all k-vectors of program steps (no automaton component)
std::vector<std::pair<EventVec, std::vector<Config>>>
program_ksteps(const Program &p, const AttackModel &m,
               const std::vector<Config> &cfgs) {
  std::vector<std::vector<std::pair<Event, Config>>> per_track;
  for (auto &c : cfgs)
    per_track.push_back(secir::step(p, m, c));
  std::vector<std::pair<EventVec, std::vector<Config>>> out;
  std::vector<std::size_t> idx(cfgs.size(), 0);
  for (;;) {
    EventVec u;
    std::vector<Config> nxt;
    for (std::size_t i = 0; i < cfgs.size(); ++i) {
      u.push_back(per_track[i][idx[i]].first);
      nxt.push_back(per_track[i][idx[i]].second);
    }
    out.push_back({std::move(u), std::move(nxt)});
    std::size_t i = cfgs.size();
    while (i > 0) {
      if (++idx[i - 1] < per_track[i - 1].size())
        break;
      idx[i - 1] = 0;
      --i;
    }
    if (i == 0)
      break;
  }
  return out;
}

} // namespace

Verdict check_relative_refinement(const AutomatonView &a, const Program &s,
                                  const Program &t, const AttackModel &m,
                                  int k, const RefinementWitness &w,
                                  Budget *budget) {
  auto t0 = std::chrono::steady_clock::now();
  if (!w.bisim)
    throw ConfigError("relative refinement needs a bisim formula");
  Budget local;
  Budget &b = budget ? *budget : local;

  // B is checked first; a broken bisimulation is reported as such
  Verdict vb = check_bisimulation(s, t, m, bisim_of(w), w.input_set, &b);
  if (vb.status != Status::Valid)
    return vb;

  BisimContext bctx;
  bctx.sprog = &s;
  bctx.tprog = &t;
  BisimWitness bwit = bisim_of(w);
  bctx.b = &bwit;
  bctx.in_set = input_set_pred(w.input_set);

  ProductSystem pt = bundle::product(a, t, m, k);
  ProductSystem ps = bundle::product(a, s, m, k);
  RefinementContext ctx;
  ctx.base = a.base;
  ctx.sprog = &s;
  ctx.tprog = &t;
  ctx.w = &w;
  ctx.in_set = input_set_pred(w.input_set);
  ctx.k = k;
  ctx.view = &a;

  Verdict verdict;
  ProductGraph gt = explore(pt, b);
  ProductGraph gs = explore(ps, b);
  verdict.stats.tgt_states = static_cast<std::int64_t>(gt.states.size());
  verdict.stats.src_states = static_cast<std::int64_t>(gs.states.size());
  auto finish = [&](Verdict v) {
    v.stats = verdict.stats;
    v.stats.millis =
        std::chrono::duration<double, std::milli>(
            std::chrono::steady_clock::now() - t0)
            .count();
    return v;
  };
  if (gt.exhausted || gs.exhausted || gt.overflow || gs.overflow) {
    verdict.status = Status::Inconclusive;
    verdict.reason = gt.overflow || gs.overflow
                         ? "buffer bound exceeded while exploring the products"
                         : "state budget exceeded while exploring the products";
    return finish(verdict);
  }

  auto pointwise_B = [&](const std::vector<Config> &tc,
                         const std::vector<Config> &sc) {
    for (std::size_t i = 0; i < tc.size(); ++i)
      if (!bctx.B(tc[i], sc[i]))
        return false;
    return true;
  };

  const ProductState &x0 = gt.states[0];
  const ProductState &y0 = gs.states[0];
  if (!ctx.R(x0, y0) || !pointwise_B(x0.cfgs, y0.cfgs)) {
    verdict.status = Status::Invalid;
    Counterexample cex;
    cex.clause = "init";
    cex.x = x0;
    cex.y = y0;
    cex.description = "initial configurations fail the relative init condition";
    verdict.cex = std::move(cex);
    return finish(verdict);
  }

  for (std::size_t xi = 0; xi < gt.states.size(); ++xi) {
    for (std::size_t yi = 0; yi < gs.states.size(); ++yi) {
      const ProductState &x = gt.states[xi];
      const ProductState &y = gs.states[yi];
      if (!ctx.R(x, y) || !pointwise_B(x.cfgs, y.cfgs))
        continue;
      ++verdict.stats.pairs_related;
      auto s_steps = program_ksteps(s, m, y.cfgs);
      for (auto &[v, x2i] : gt.adj[xi]) {
        const ProductState &x2 = gt.states[static_cast<std::size_t>(x2i)];
        const bool x2_acc = a.is_accepting(x2.a);
        for (auto &[u, scfgs2] : s_steps) {
          if (!agree_vec(u, v, ctx.in_set) || !pointwise_B(x2.cfgs, scfgs2))
            continue;
          ++verdict.stats.obligations;
          if (!b.charge()) {
            verdict.status = Status::Inconclusive;
            verdict.reason = "state budget exceeded during the relative check";
            return finish(verdict);
          }
          // need an automaton successor p' on u with R and acceptance
          bool overflow = false;
          auto p_succ = a.step(y.a, u, &overflow);
          int level = p_succ.empty() ? 0 : 1;
          bool matched = false;
          for (auto &p2 : p_succ) {
            ProductState y2;
            y2.a = p2;
            y2.cfgs = scfgs2;
            if (!ctx.R(x2, y2))
              continue;
            level = std::max(level, 2);
            if (x2_acc && !a.is_accepting(p2))
              continue;
            matched = true;
            break;
          }
          if (!matched) {
            verdict.status = Status::Invalid;
            Counterexample cex;
            cex.clause = level == 0 ? "2a" : level == 1 ? "2c" : "2d";
            cex.x = x;
            cex.y = y;
            cex.v = v;
            cex.x_next = x2;
            cex.has_transition = true;
            cex.description =
                "relative condition fails (clause " + cex.clause +
                ") for target step " + describe_symbol(v) +
                " answered by source step " + describe_symbol(u);
            verdict.cex = std::move(cex);
            return finish(verdict);
          }
        }
      }
    }
  }
  verdict.status = Status::Valid;
  return finish(verdict);
}

// --- input determinism ----------------------------------------------------------

namespace {

// silent closure to the next observable event on each path
std::vector<std::pair<Event, Config>> next_observables(const Program &p,
                                                       const AttackModel &m,
                                                       const Config &c) {
  std::set<std::pair<Event, Config>> out;
  std::set<Config> seen;
  std::vector<Config> stack{c};
  while (!stack.empty()) {
    Config cur = stack.back();
    stack.pop_back();
    if (!seen.insert(cur).second)
      continue;
    for (auto &[ev, nxt] : secir::step(p, m, cur)) {
      if (ev.is_silent())
        stack.push_back(nxt);
      else
        out.insert({ev, nxt});
    }
  }
  return {out.begin(), out.end()};
}

// next input-consuming steps, skipping every non-input event; also reports
// whether the run can avoid inputs forever from here
struct NextInputs {
  std::vector<std::pair<Event, Config>> inputs;
  bool can_avoid = false;
};

NextInputs next_inputs(const Program &p, const AttackModel &m, const Config &c) {
  NextInputs out;
  std::set<std::pair<Event, Config>> uniq;
  // non-input closure graph
  std::map<Config, std::vector<Config>> edges;
  std::vector<Config> stack{c};
  while (!stack.empty()) {
    Config cur = stack.back();
    stack.pop_back();
    if (edges.count(cur))
      continue;
    auto &succ = edges[cur];
    for (auto &[ev, nxt] : secir::step(p, m, cur)) {
      if (ev.kind == secir::EvKind::Input) {
        uniq.insert({ev, nxt});
      } else {
        succ.push_back(nxt);
        stack.push_back(nxt);
      }
    }
  }
  // cycle detection (colors: 0 unseen, 1 on stack, 2 done)
  std::map<Config, int> color;
  std::function<bool(const Config &)> dfs = [&](const Config &n) -> bool {
    color[n] = 1;
    for (auto &nx : edges[n]) {
      int col = color.count(nx) ? color[nx] : 0;
      if (col == 1)
        return true;
      if (col == 0 && dfs(nx))
        return true;
    }
    color[n] = 2;
    return false;
  };
  for (auto &[node, _] : edges)
    if (!color.count(node) && dfs(node)) {
      out.can_avoid = true;
      break;
    }
  out.inputs.assign(uniq.begin(), uniq.end());
  return out;
}

// Is there an infinite continuation from (c1, c2) along which the two runs
// consume identical input sequences? `pending` holds an input one side has
// already consumed and the other still owes.
bool confirm_input_equivalent_future(const Program &p, const AttackModel &m,
                                     const Config &c1, const Config &c2,
                                     int pending_side, const Event &pending,
                                     Budget &budget) {
  struct Node {
    Config a, b;
    int side; // 0 = balanced, 1/2 = that side is one input ahead
    Event ev;
    bool operator<(const Node &o) const {
      if (!(a == o.a)) return a < o.a;
      if (!(b == o.b)) return b < o.b;
      if (side != o.side) return side < o.side;
      return ev < o.ev;
    }
  };
  std::set<Node> visited;
  std::vector<Node> stack{{c1, c2, pending_side, pending}};
  while (!stack.empty()) {
    Node n = stack.back();
    stack.pop_back();
    if (!visited.insert(n).second)
      continue;
    if (!budget.charge())
      return false; // treated as unconfirmed; caller reports inconclusive
    if (n.side == 0) {
      NextInputs n1 = next_inputs(p, m, n.a);
      NextInputs n2 = next_inputs(p, m, n.b);
      if (n1.can_avoid && n2.can_avoid)
        return true; // both input projections end here
      for (auto &[e1, a2] : n1.inputs)
        for (auto &[e2, b2] : n2.inputs)
          if (e1 == e2)
            stack.push_back({a2, b2, 0, Event::eps()});
    } else {
      const Config &behind = n.side == 1 ? n.b : n.a;
      NextInputs ni = next_inputs(p, m, behind);
      for (auto &[e, nxt] : ni.inputs) {
        if (!(e == n.ev))
          continue;
        if (n.side == 1)
          stack.push_back({n.a, nxt, 0, Event::eps()});
        else
          stack.push_back({nxt, n.b, 0, Event::eps()});
      }
    }
  }
  return false;
}

} // namespace

Verdict check_input_deterministic(const Program &p, const AttackModel &m,
                                  Budget *budget) {
  auto t0 = std::chrono::steady_clock::now();
  secir::validate_for_model(p, m);
  Verdict verdict;
  Budget local;
  Budget &b = budget ? *budget : local;

  std::set<std::pair<Config, Config>> visited;
  Config init = secir::initial_config(p, m);
  std::vector<std::pair<Config, Config>> stack{{init, init}};
  while (!stack.empty()) {
    auto [c1, c2] = stack.back();
    stack.pop_back();
    if (!visited.insert({c1, c2}).second)
      continue;
    if (!b.charge()) {
      verdict.status = Status::Inconclusive;
      verdict.reason = "state budget exceeded during the self-product search";
      return verdict;
    }
    auto o1s = next_observables(p, m, c1);
    auto o2s = next_observables(p, m, c2);
    for (auto &[o1, n1] : o1s) {
      for (auto &[o2, n2] : o2s) {
        const bool in1 = o1.kind == secir::EvKind::Input;
        const bool in2 = o2.kind == secir::EvKind::Input;
        if (in1 && in2) {
          if (o1 == o2)
            stack.push_back({n1, n2});
          continue; // differing inputs: different input sequences
        }
        if (o1 == o2) {
          stack.push_back({n1, n2});
          continue;
        }
        // observable mismatch; a real divergence needs an input-equivalent
        // continuation for both runs
        int side = in1 ? 1 : in2 ? 2 : 0;
        const Event &pend = in1 ? o1 : in2 ? o2 : Event::eps();
        if (confirm_input_equivalent_future(p, m, n1, n2, side, pend, b)) {
          verdict.status = Status::Invalid;
          Counterexample cex;
          cex.clause = "input-determinism";
          cex.description =
              "two same-input runs diverge: " + secir::to_string(o1) +
              " vs " + secir::to_string(o2) + " after " +
              secir::to_string(p, c1) + " / " + secir::to_string(p, c2);
          verdict.cex = std::move(cex);
          verdict.stats.millis =
              std::chrono::duration<double, std::milli>(
                  std::chrono::steady_clock::now() - t0)
                  .count();
          return verdict;
        }
        if (b.exceeded()) {
          verdict.status = Status::Inconclusive;
          verdict.reason = "state budget exceeded while confirming a divergence";
          return verdict;
        }
      }
    }
  }
  verdict.status = Status::Valid;
  verdict.stats.millis = std::chrono::duration<double, std::milli>(
                             std::chrono::steady_clock::now() - t0)
                             .count();
  return verdict;
}

} // namespace secwit::refinement
