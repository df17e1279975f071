#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "secwit/common.hpp"
#include "secwit/secir.hpp"
#include "secwit/traceops.hpp"
#include "secwit/upword.hpp"

// Büchi automata over bundles of k event traces. Guards are predicates over
// the k-vector of events, written in a small atom language. The buffering
// view implements the construction that lets an automaton over observables
// read eps-interleaved words. Products pair an automaton view with k copies
// of a program.

namespace secwit::bundle {

using secir::Event;
using traceops::EventVec;
using traceops::UPWord;

struct Guard;
using GuardPtr = std::shared_ptr<const Guard>;

struct Guard {
  enum class Kind {
    True, False, Not, And, Or,
    KindIs, ChanIs, TagIs, ValCmp, Agree
  };
  enum class Cmp { Eq, Ne, Lt, Le, Gt, Ge };
  enum class Gamma { Inputs, Outputs, Low, All };

  Kind kind = Kind::True;
  GuardPtr a, b;
  int track = 1, track2 = 1; // 1-based
  secir::EvKind ev_kind = secir::EvKind::Eps;
  secir::Channel chan = secir::Channel::Public;
  secir::ExtTag tag = secir::ExtTag::Mem;
  Cmp cmp = Cmp::Eq;
  bool rhs_is_track = false;
  int literal = 0;
  Gamma gamma = Gamma::Inputs;
};

bool eval_guard(const Guard &g, const EventVec &u);
int guard_max_track(const Guard &g);
std::string to_string(const Guard &g);

// symbol classes used by agree(): low = what a public-level observer sees
bool in_gamma(const Event &e, Guard::Gamma g);

GuardPtr parse_guard(const std::string &text, int k);

struct Transition {
  int from = 0;
  GuardPtr guard;
  int to = 0;
};

struct BundleAutomaton {
  std::string name;
  int k = 1;
  std::vector<std::string> states;
  int initial = 0;
  std::vector<bool> accepting;
  std::vector<Transition> transitions;

  int state_index(const std::string &n) const;
  std::vector<int> successors(int q, const EventVec &u) const;
  bool is_accepting(int q) const { return accepting[static_cast<std::size_t>(q)]; }
};

BundleAutomaton parse_automaton(const std::string &text);
std::string print_automaton(const BundleAutomaton &a);

// Automaton state as seen by explorations: the base state plus, when the
// view buffers, one pending-observation queue per track and the progress bit.
struct AutState {
  int q = 0;
  std::vector<std::vector<Event>> bufs;
  int progress = 1;

  friend bool operator==(const AutState &x, const AutState &y) {
    return x.q == y.q && x.progress == y.progress && x.bufs == y.bufs;
  }
  friend bool operator<(const AutState &x, const AutState &y) {
    if (x.q != y.q) return x.q < y.q;
    if (x.progress != y.progress) return x.progress < y.progress;
    return x.bufs < y.bufs;
  }
};

std::string to_string(const BundleAutomaton &a, const AutState &s);

// A base automaton or its buffering; `buffer_bound` engages buffering.
struct AutomatonView {
  const BundleAutomaton *base = nullptr;
  std::optional<int> buffer_bound;

  bool buffered() const { return buffer_bound.has_value(); }
  int k() const { return base->k; }
  AutState initial() const;
  bool is_accepting(const AutState &s) const;
  // Successors on one k-vector; sets *overflow instead of growing a buffer
  // past the bound.
  std::vector<AutState> step(const AutState &s, const EventVec &u,
                             bool *overflow) const;
};

AutomatonView buffering(const BundleAutomaton &a, int b_max);
AutomatonView unbuffered(const BundleAutomaton &a);

enum class Acceptance { Accept, Reject, Inconclusive };

// Acceptance of an ultimately periodic vector word. Inconclusive only when a
// buffer bound was hit and no accepting run was found within it.
Acceptance accepts(const AutomatonView &a, const UPWord<EventVec> &w);
bool accepts(const BundleAutomaton &a, const UPWord<EventVec> &w);

// --- automaton-program product ----------------------------------------------

struct ProductState {
  AutState a;
  std::vector<secir::Config> cfgs;

  friend bool operator==(const ProductState &x, const ProductState &y) {
    return x.a == y.a && x.cfgs == y.cfgs;
  }
  friend bool operator<(const ProductState &x, const ProductState &y) {
    if (!(x.a == y.a)) return x.a < y.a;
    return x.cfgs < y.cfgs;
  }
};

struct ProductSystem {
  AutomatonView aut;
  const secir::Program *prog = nullptr;
  secir::AttackModel model;
  int k = 1;

  ProductState initial() const;
  bool is_accepting(const ProductState &s) const { return aut.is_accepting(s.a); }
  std::vector<std::pair<EventVec, ProductState>> step(const ProductState &s,
                                                      bool *overflow) const;
};

// Validates arity and the eps/buffering precondition.
ProductSystem product(const AutomatonView &a, const secir::Program &p,
                      const secir::AttackModel &m, int k);

struct ProductStep {
  ProductState from;
  EventVec symbol;
  ProductState to;
};

struct ProductLasso {
  std::vector<ProductStep> stem;
  std::vector<ProductStep> loop;
  UPWord<EventVec> word() const;
};

struct SearchResult {
  enum class Outcome { Empty, LassoFound, Inconclusive };
  Outcome outcome = Outcome::Empty;
  std::optional<ProductLasso> lasso;
  std::string reason;
  std::int64_t states_explored = 0;
};

// Explicit-state Büchi emptiness over the reachable product graph;
// deterministic for a fixed exploration order.
SearchResult find_accepting_lasso(const ProductSystem &ps, Budget *budget = nullptr);

// Membership of a specific word in the product language (Lemma 1 checks).
Acceptance product_accepts(const ProductSystem &ps, const UPWord<EventVec> &w);

} // namespace secwit::bundle
