#include "secwit/bundle_automaton.hpp"

#include <algorithm>
#include <deque>
#include <map>
#include <set>
#include <sstream>

namespace secwit::bundle {

using secir::EvKind;

// --- guards -----------------------------------------------------------------

bool in_gamma(const Event &e, Guard::Gamma g) {
  switch (g) {
  case Guard::Gamma::Inputs:
    return e.kind == EvKind::Input;
  case Guard::Gamma::Outputs:
    return e.kind == EvKind::Output;
  case Guard::Gamma::All:
    return e.kind != EvKind::Eps;
  case Guard::Gamma::Low:
    if (e.kind == EvKind::Ext || e.kind == EvKind::Bot)
      return true;
    if (e.kind == EvKind::Input || e.kind == EvKind::Output)
      return e.chan == secir::Channel::Public;
    return false;
  }
  return false;
}

static std::optional<int> event_value(const Event &e) {
  switch (e.kind) {
  case EvKind::Input:
  case EvKind::Output:
    return e.value;
  case EvKind::Ext:
    if (e.tag == secir::ExtTag::Branch)
      return e.value;
    if (e.tag == secir::ExtTag::Mem && e.accesses.size() == 1)
      return e.accesses[0].second;
    return std::nullopt;
  default:
    return std::nullopt;
  }
}

static bool cmp_ints(Guard::Cmp c, int a, int b) {
  switch (c) {
  case Guard::Cmp::Eq: return a == b;
  case Guard::Cmp::Ne: return a != b;
  case Guard::Cmp::Lt: return a < b;
  case Guard::Cmp::Le: return a <= b;
  case Guard::Cmp::Gt: return a > b;
  case Guard::Cmp::Ge: return a >= b;
  }
  return false;
}

bool eval_guard(const Guard &g, const EventVec &u) {
  switch (g.kind) {
  case Guard::Kind::True:
    return true;
  case Guard::Kind::False:
    return false;
  case Guard::Kind::Not:
    return !eval_guard(*g.a, u);
  case Guard::Kind::And:
    return eval_guard(*g.a, u) && eval_guard(*g.b, u);
  case Guard::Kind::Or:
    return eval_guard(*g.a, u) || eval_guard(*g.b, u);
  case Guard::Kind::KindIs:
    return u[static_cast<std::size_t>(g.track - 1)].kind == g.ev_kind;
  case Guard::Kind::ChanIs: {
    const Event &e = u[static_cast<std::size_t>(g.track - 1)];
    return (e.kind == EvKind::Input || e.kind == EvKind::Output) &&
           e.chan == g.chan;
  }
  case Guard::Kind::TagIs: {
    const Event &e = u[static_cast<std::size_t>(g.track - 1)];
    return e.kind == EvKind::Ext && e.tag == g.tag;
  }
  case Guard::Kind::ValCmp: {
    auto lhs = event_value(u[static_cast<std::size_t>(g.track - 1)]);
    std::optional<int> rhs =
        g.rhs_is_track ? event_value(u[static_cast<std::size_t>(g.track2 - 1)])
                       : std::optional<int>(g.literal);
    if (!lhs || !rhs)
      return false;
    return cmp_ints(g.cmp, *lhs, *rhs);
  }
  case Guard::Kind::Agree: {
    const Event &a = u[static_cast<std::size_t>(g.track - 1)];
    const Event &b = u[static_cast<std::size_t>(g.track2 - 1)];
    return traceops::agree_on(a, b,
                              [&](const Event &e) { return in_gamma(e, g.gamma); });
  }
  }
  return false;
}

int guard_max_track(const Guard &g) {
  int m = 0;
  if (g.kind == Guard::Kind::Not)
    return guard_max_track(*g.a);
  if (g.kind == Guard::Kind::And || g.kind == Guard::Kind::Or)
    return std::max(guard_max_track(*g.a), guard_max_track(*g.b));
  if (g.kind == Guard::Kind::KindIs || g.kind == Guard::Kind::ChanIs ||
      g.kind == Guard::Kind::TagIs)
    m = g.track;
  if (g.kind == Guard::Kind::ValCmp)
    m = g.rhs_is_track ? std::max(g.track, g.track2) : g.track;
  if (g.kind == Guard::Kind::Agree)
    m = std::max(g.track, g.track2);
  return m;
}

// --- automaton basics ---------------------------------------------------------

int BundleAutomaton::state_index(const std::string &n) const {
  for (std::size_t i = 0; i < states.size(); ++i)
    if (states[i] == n)
      return static_cast<int>(i);
  throw ConfigError("unknown automaton state: " + n);
}

std::vector<int> BundleAutomaton::successors(int q, const EventVec &u) const {
  std::vector<int> out;
  for (auto &t : transitions)
    if (t.from == q && eval_guard(*t.guard, u))
      out.push_back(t.to);
  return out;
}

std::string to_string(const BundleAutomaton &a, const AutState &s) {
  std::ostringstream os;
  os << a.states[static_cast<std::size_t>(s.q)];
  if (!s.bufs.empty()) {
    os << "<";
    for (std::size_t i = 0; i < s.bufs.size(); ++i) {
      if (i)
        os << "|";
      for (std::size_t j = 0; j < s.bufs[i].size(); ++j) {
        if (j)
          os << " ";
        os << secir::to_string(s.bufs[i][j]);
      }
    }
    os << ">b" << s.progress;
  }
  return os.str();
}

// --- views -------------------------------------------------------------------

AutomatonView buffering(const BundleAutomaton &a, int b_max) {
  if (b_max < 1)
    throw ConfigError("buffer bound must be at least 1");
  AutomatonView v;
  v.base = &a;
  v.buffer_bound = b_max;
  return v;
}

AutomatonView unbuffered(const BundleAutomaton &a) {
  AutomatonView v;
  v.base = &a;
  return v;
}

AutState AutomatonView::initial() const {
  AutState s;
  s.q = base->initial;
  if (buffered()) {
    s.bufs.assign(static_cast<std::size_t>(base->k), {});
    s.progress = 0;
  }
  return s;
}

bool AutomatonView::is_accepting(const AutState &s) const {
  if (!base->is_accepting(s.q))
    return false;
  return buffered() ? s.progress == 1 : true;
}

std::vector<AutState> AutomatonView::step(const AutState &s, const EventVec &u,
                                          bool *overflow) const {
  std::vector<AutState> out;
  if (u.size() != static_cast<std::size_t>(base->k))
    throw ConfigError("symbol arity does not match automaton tracks");
  if (!buffered()) {
    for (int q2 : base->successors(s.q, u))
      out.push_back(AutState{q2, {}, 1});
    return out;
  }
  // append this step's observations
  auto bufs = s.bufs;
  for (std::size_t i = 0; i < u.size(); ++i)
    if (u[i].kind != EvKind::Eps)
      bufs[i].push_back(u[i]);
  bool all_nonempty = true;
  for (auto &b : bufs)
    all_nonempty = all_nonempty && !b.empty();
  if (!all_nonempty) {
    for (auto &b : bufs) {
      if (static_cast<int>(b.size()) > *buffer_bound) {
        if (overflow)
          *overflow = true;
        return out;
      }
    }
    out.push_back(AutState{s.q, std::move(bufs), 0});
    return out;
  }
  // all tracks have a pending head: consume one vector and take a base step
  EventVec sigma;
  sigma.reserve(u.size());
  for (auto &b : bufs) {
    sigma.push_back(b.front());
    // pop below, after sigma is complete
  }
  for (auto &b : bufs)
    b.erase(b.begin());
  for (auto &b : bufs) {
    if (static_cast<int>(b.size()) > *buffer_bound) {
      if (overflow)
        *overflow = true;
      return out;
    }
  }
  for (int q2 : base->successors(s.q, sigma))
    out.push_back(AutState{q2, bufs, 1});
  return out;
}

// --- acceptance of UP words ---------------------------------------------------

namespace {

// Run graph over (state, word position); Büchi acceptance = a reachable
// accepting node inside the loop region that can cycle back to itself.
template <typename St, typename StepFn, typename AccFn>
Acceptance word_acceptance(const St &init, const UPWord<EventVec> &w,
                           StepFn step_on, AccFn acc) {
  if (w.loop.empty())
    throw ConfigError("acceptance needs a word with a non-empty loop");
  const std::size_t total = w.stem.size() + w.loop.size();
  auto next_pos = [&](std::size_t pos) {
    return pos + 1 < total ? pos + 1 : w.stem.size();
  };
  using Node = std::pair<St, std::size_t>;
  bool overflow = false;
  std::set<Node> visited;
  std::vector<Node> order, stack{{init, 0}};
  while (!stack.empty()) {
    Node n = stack.back();
    stack.pop_back();
    if (!visited.insert(n).second)
      continue;
    order.push_back(n);
    for (auto &nxt : step_on(n.first, w.at(n.second), &overflow))
      stack.push_back({nxt, next_pos(n.second)});
  }
  for (auto &n : order) {
    if (n.second < w.stem.size() || !acc(n.first))
      continue;
    std::set<Node> seen;
    std::vector<Node> st;
    for (auto &nxt : step_on(n.first, w.at(n.second), &overflow))
      st.push_back({nxt, next_pos(n.second)});
    while (!st.empty()) {
      Node x = st.back();
      st.pop_back();
      if (x == n)
        return Acceptance::Accept;
      if (!seen.insert(x).second)
        continue;
      for (auto &nxt : step_on(x.first, w.at(x.second), &overflow))
        st.push_back({nxt, next_pos(x.second)});
    }
  }
  return overflow ? Acceptance::Inconclusive : Acceptance::Reject;
}

} // namespace

Acceptance accepts(const AutomatonView &a, const UPWord<EventVec> &w) {
  for (auto &v : w.stem)
    if (v.size() != static_cast<std::size_t>(a.k()))
      throw ConfigError("word arity does not match automaton tracks");
  for (auto &v : w.loop)
    if (v.size() != static_cast<std::size_t>(a.k()))
      throw ConfigError("word arity does not match automaton tracks");
  return word_acceptance(
      a.initial(), w,
      [&](const AutState &s, const EventVec &u, bool *ovf) {
        return a.step(s, u, ovf);
      },
      [&](const AutState &s) { return a.is_accepting(s); });
}

bool accepts(const BundleAutomaton &a, const UPWord<EventVec> &w) {
  return accepts(unbuffered(a), w) == Acceptance::Accept;
}

// --- products ------------------------------------------------------------------

ProductState ProductSystem::initial() const {
  ProductState s;
  s.a = aut.initial();
  s.cfgs.assign(static_cast<std::size_t>(k), secir::initial_config(*prog, model));
  return s;
}

std::vector<std::pair<EventVec, ProductState>>
ProductSystem::step(const ProductState &s, bool *overflow) const {
  // cartesian product of per-track program steps
  std::vector<std::vector<std::pair<Event, secir::Config>>> per_track;
  per_track.reserve(static_cast<std::size_t>(k));
  for (auto &c : s.cfgs)
    per_track.push_back(secir::step(*prog, model, c));
  std::vector<std::pair<EventVec, ProductState>> out;
  std::vector<std::size_t> idx(static_cast<std::size_t>(k), 0);
  for (;;) {
    EventVec u;
    std::vector<secir::Config> cfgs;
    u.reserve(static_cast<std::size_t>(k));
    cfgs.reserve(static_cast<std::size_t>(k));
    for (int i = 0; i < k; ++i) {
      auto &[ev, cfg] = per_track[static_cast<std::size_t>(i)][idx[static_cast<std::size_t>(i)]];
      u.push_back(ev);
      cfgs.push_back(cfg);
    }
    for (auto &a2 : aut.step(s.a, u, overflow))
      out.push_back({u, ProductState{a2, cfgs}});
    // advance the odometer
    int i = k - 1;
    while (i >= 0) {
      if (++idx[static_cast<std::size_t>(i)] <
          per_track[static_cast<std::size_t>(i)].size())
        break;
      idx[static_cast<std::size_t>(i)] = 0;
      --i;
    }
    if (i < 0)
      break;
  }
  return out;
}

ProductSystem product(const AutomatonView &a, const secir::Program &p,
                      const secir::AttackModel &m, int k) {
  if (a.k() != k)
    throw ConfigError("automaton has " + std::to_string(a.k()) +
                      " tracks, product needs " + std::to_string(k));
  secir::validate_for_model(p, m);
  if (!a.buffered() && secir::has_silent_steps(p, m))
    throw ConfigError("program has silent transitions under model " + m.name +
                      "; the automaton must be buffered");
  ProductSystem ps;
  ps.aut = a;
  ps.prog = &p;
  ps.model = m;
  ps.k = k;
  return ps;
}

UPWord<EventVec> ProductLasso::word() const {
  UPWord<EventVec> w;
  for (auto &s : stem)
    w.stem.push_back(s.symbol);
  for (auto &s : loop)
    w.loop.push_back(s.symbol);
  return w;
}

SearchResult find_accepting_lasso(const ProductSystem &ps, Budget *budget) {
  Budget local;
  Budget &b = budget ? *budget : local;
  SearchResult res;
  bool overflow = false;

  std::map<ProductState, int> id;
  std::vector<ProductState> states;
  struct Edge {
    int to;
    EventVec symbol;
  };
  std::vector<std::vector<Edge>> adj;
  std::deque<int> queue;

  auto intern = [&](const ProductState &s) {
    auto it = id.find(s);
    if (it != id.end())
      return it->second;
    int n = static_cast<int>(states.size());
    id.emplace(s, n);
    states.push_back(s);
    adj.emplace_back();
    queue.push_back(n);
    return n;
  };
  intern(ps.initial());
  bool exhausted = false;
  while (!queue.empty()) {
    if (!b.charge()) {
      exhausted = true;
      break;
    }
    int n = queue.front();
    queue.pop_front();
    for (auto &[u, nxt] : ps.step(states[static_cast<std::size_t>(n)], &overflow)) {
      int m2 = intern(nxt);
      adj[static_cast<std::size_t>(n)].push_back({m2, u});
    }
  }
  res.states_explored = static_cast<std::int64_t>(states.size());

  // BFS tree for stems
  std::vector<int> parent(states.size(), -1);
  std::vector<EventVec> parent_sym(states.size());
  {
    std::deque<int> q2{0};
    std::vector<bool> seen(states.size(), false);
    seen[0] = true;
    while (!q2.empty()) {
      int n = q2.front();
      q2.pop_front();
      for (auto &e : adj[static_cast<std::size_t>(n)]) {
        if (seen[static_cast<std::size_t>(e.to)])
          continue;
        seen[static_cast<std::size_t>(e.to)] = true;
        parent[static_cast<std::size_t>(e.to)] = n;
        parent_sym[static_cast<std::size_t>(e.to)] = e.symbol;
        q2.push_back(e.to);
      }
    }
  }

  for (std::size_t s = 0; s < states.size(); ++s) {
    if (!ps.is_accepting(states[s]))
      continue;
    // cycle search from s back to s
    std::vector<int> par(states.size(), -2);
    std::vector<EventVec> sym(states.size());
    std::vector<int> stack2{static_cast<int>(s)};
    par[s] = -1;
    bool found = false;
    int probe = static_cast<int>(s);
    while (!stack2.empty() && !found) {
      int n = stack2.back();
      stack2.pop_back();
      for (auto &e : adj[static_cast<std::size_t>(n)]) {
        if (e.to == probe) {
          // close the cycle
          std::vector<ProductStep> loop;
          loop.push_back({states[static_cast<std::size_t>(n)], e.symbol,
                          states[static_cast<std::size_t>(e.to)]});
          int cur = n;
          while (cur != probe && par[static_cast<std::size_t>(cur)] >= 0) {
            int pv = par[static_cast<std::size_t>(cur)];
            loop.push_back({states[static_cast<std::size_t>(pv)],
                            sym[static_cast<std::size_t>(cur)],
                            states[static_cast<std::size_t>(cur)]});
            cur = pv;
          }
          std::reverse(loop.begin(), loop.end());
          std::vector<ProductStep> stem;
          cur = probe;
          while (parent[static_cast<std::size_t>(cur)] >= 0) {
            int pv = parent[static_cast<std::size_t>(cur)];
            stem.push_back({states[static_cast<std::size_t>(pv)],
                            parent_sym[static_cast<std::size_t>(cur)],
                            states[static_cast<std::size_t>(cur)]});
            cur = pv;
          }
          std::reverse(stem.begin(), stem.end());
          res.outcome = SearchResult::Outcome::LassoFound;
          res.lasso = ProductLasso{std::move(stem), std::move(loop)};
          found = true;
          break;
        }
        if (par[static_cast<std::size_t>(e.to)] == -2) {
          par[static_cast<std::size_t>(e.to)] = n;
          sym[static_cast<std::size_t>(e.to)] = e.symbol;
          stack2.push_back(e.to);
        }
      }
    }
    if (found)
      return res;
  }

  if (exhausted) {
    res.outcome = SearchResult::Outcome::Inconclusive;
    res.reason = "state budget exceeded (limit " + std::to_string(b.limit) + ")";
  } else if (overflow) {
    res.outcome = SearchResult::Outcome::Inconclusive;
    res.reason = "buffer bound exceeded during exploration";
  } else {
    res.outcome = SearchResult::Outcome::Empty;
  }
  return res;
}

Acceptance product_accepts(const ProductSystem &ps, const UPWord<EventVec> &w) {
  return word_acceptance(
      ps.initial(), w,
      [&](const ProductState &s, const EventVec &u, bool *ovf) {
        std::vector<ProductState> nxt;
        for (auto &[sym, t] : ps.step(s, ovf))
          if (sym == u)
            nxt.push_back(t);
        return nxt;
      },
      [&](const ProductState &s) { return ps.is_accepting(s); });
}

} // namespace secwit::bundle
