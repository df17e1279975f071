#pragma once

#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "secwit/bundle_automaton.hpp"
#include "secwit/secir.hpp"

// Witness checkers: universal refinement between A x T^k and A x S^k,
// input-preserving (stuttering) bisimulation, refinement relative to a
// bisimulation, and the input-determinism check. All explicit-state over the
// reachable parts of finite products.

namespace secwit::refinement {

struct TypeError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

enum class Side { Src, Tgt };

// Track selector inside witness formulas: a literal 1-based index or the
// variable bound by alltracks(...).
struct TrackRef {
  bool bound = false;
  int index = 1;
};

struct Term;
struct Formula;
using TermPtr = std::shared_ptr<const Term>;
using FormulaPtr = std::shared_ptr<const Formula>;

// One functional update alpha[x := e] / alpha[a[e1] := e2].
struct AlphaUpdate {
  bool is_array = false;
  std::string name;
  TermPtr index;
  TermPtr value;
};

// A side's store with zero or more updates applied (simultaneously, all index
// and value terms evaluated against the unmodified environment).
struct AlphaExpr {
  Side side = Side::Src;
  TrackRef track;
  std::vector<AlphaUpdate> updates;
};
using AlphaExprPtr = std::shared_ptr<const AlphaExpr>;

struct Term {
  enum class Kind {
    IntLit,    // value
    AlphaRead, // side/track alpha(name) or alpha(name[index])
    Arith,     // a op b over integers
    CondT,     // cond ? a : b
    TrackSum,  // sum of a over all tracks
    LocRef,    // side/track location
    LocLit,    // label name
    StateRef,  // value: 0 = qT, 1 = qS
    StateLit   // automaton state name
  };
  Kind kind = Kind::IntLit;
  long long value = 0;
  std::string name;
  Side side = Side::Src;
  TrackRef track;
  TermPtr index;
  char arith_op = '+';
  TermPtr a, b;
  FormulaPtr cond;
};

struct Formula {
  enum class Kind {
    True, False, Not, And, Or, Implies, CondF,
    IntCmp,   // term cmp term
    LocCmp,   // loc term =/!= loc term
    StateCmp, // state term =/!= state term
    AlphaEq,  // alpha expr =/!= alpha expr (full store)
    ConfigEq, // src[i] = tgt[j]: same label and equal stores
    EqVars,   // store equality restricted to named scalars/arrays
    PairRel,  // named location-pair set membership
    DeltaAtom,// automaton step on a literal symbol vector
    AllTracks // conjunction of body over all tracks
  };
  enum class Cmp { Eq, Ne, Lt, Le, Gt, Ge };

  Kind kind = Kind::True;
  FormulaPtr f, g, h;
  Cmp cmp = Cmp::Eq;
  TermPtr a, b;
  AlphaExprPtr alpha_a, alpha_b;
  std::vector<std::string> names; // EqVars
  Side cside_a = Side::Tgt, cside_b = Side::Src;
  TrackRef ctrack_a, ctrack_b;
  std::string rel_name;                  // PairRel
  TermPtr from_state, to_state;          // DeltaAtom
  std::vector<secir::Event> symbol;      // DeltaAtom literal vector
  FormulaPtr body;                       // AllTracks
};

struct PairSet {
  std::vector<std::pair<std::string, std::string>> pairs;
  bool contains(const std::string &a, const std::string &b) const {
    for (auto &[x, y] : pairs)
      if (x == a && y == b)
        return true;
    return false;
  }
};

// Evaluation environment: automaton states and k configurations per side.
// For bisimulation formulas aut is null and k = 1.
struct WitnessEnv {
  const bundle::BundleAutomaton *aut = nullptr;
  int qT = 0, qS = 0;
  const secir::Program *tprog = nullptr;
  const secir::Program *sprog = nullptr;
  const std::vector<secir::Config> *tcfgs = nullptr;
  const std::vector<secir::Config> *scfgs = nullptr;
  const std::map<std::string, PairSet> *pair_sets = nullptr;
  int k = 1;
  int bound_track = -1; // 0-based index while inside alltracks
};

bool eval_witness(const Formula &f, const WitnessEnv &env);
long long eval_term_int(const Term &t, const WitnessEnv &env);

std::string to_string(const Formula &f);
std::string to_string(const Term &t);

// --- witness files ------------------------------------------------------------

enum class InputSet { Inputs, IO, All, None };
traceops::EventPred input_set_pred(InputSet s);

struct StutterSpec {
  enum class Who { Source, Target, Both };
  Who side = Who::Both;
  TermPtr rank;
  int bound = 8;
};

// Skolem hints for the SMT bridge; names of the supported term shapes.
struct SkolemMap {
  std::string sigmaS = "sigmaT";
  std::string pS = "pT";
  std::string sPrime = "tPrime";
};

struct RefinementWitness {
  std::string property_name;
  FormulaPtr R;
  InputSet input_set = InputSet::Inputs;
  std::optional<StutterSpec> stutter;
  FormulaPtr bisim; // null when the witness carries no bisimulation
  std::map<std::string, PairSet> pair_sets;
  SkolemMap skolems;
  bool universal_only = false;
};

struct BisimWitness {
  FormulaPtr B;
  std::map<std::string, PairSet> pair_sets;
  std::optional<StutterSpec> stutter;
};

BisimWitness bisim_of(const RefinementWitness &w);

RefinementWitness parse_witness(const std::string &text);
std::string print_witness(const RefinementWitness &w);

// --- verdicts -------------------------------------------------------------------

enum class Status { Valid, Invalid, Inconclusive };
const char *to_string(Status s);

struct Stats {
  std::int64_t tgt_states = 0;
  std::int64_t src_states = 0;
  std::int64_t pairs_related = 0;
  std::int64_t obligations = 0;
  double millis = 0;
};

struct Counterexample {
  std::string clause; // init | 2a | 2b | 2c | 2d | bisim-1 | bisim-2 |
                      // bisim-3 | rank-negative | rank-bound
  std::string description;
  bundle::ProductState x; // target-side state (bisim: config in cfgs[0])
  bundle::ProductState y; // source-side state
  traceops::EventVec v;   // offending target transition label, if any
  bundle::ProductState x_next;
  bool has_transition = false;
};

struct Verdict {
  Status status = Status::Valid;
  std::optional<Counterexample> cex;
  Stats stats;
  std::string reason;
};

// --- checkers -------------------------------------------------------------------

// Definition-4 refinement over reachable product states; stuttering per the
// witness (rank must strictly decrease, stay non-negative and within bound).
Verdict check_refinement(const bundle::AutomatonView &a,
                         const secir::Program &s, const secir::Program &t,
                         const secir::AttackModel &m, int k,
                         const RefinementWitness &w, Budget *budget = nullptr);

// Two-direction input-preserving (stuttering) bisimulation over reachable
// config pairs.
Verdict check_bisimulation(const secir::Program &s, const secir::Program &t,
                           const secir::AttackModel &m, const BisimWitness &b,
                           InputSet input_set, Budget *budget = nullptr);

// Refinement relative to the witness's bisimulation: checks B first, then
// the relative inductive condition.
Verdict check_relative_refinement(const bundle::AutomatonView &a,
                                  const secir::Program &s,
                                  const secir::Program &t,
                                  const secir::AttackModel &m, int k,
                                  const RefinementWitness &w,
                                  Budget *budget = nullptr);

// Same-input executions must produce the same observation sequence;
// self-product search for an observable divergence with an input-equivalent
// continuation.
Verdict check_input_deterministic(const secir::Program &p,
                                  const secir::AttackModel &m,
                                  Budget *budget = nullptr);

// Re-evaluates an invalid verdict's counterexample standalone: confirms the
// reported clause is violated exactly as recorded.
bool recheck_counterexample(const bundle::AutomatonView &a,
                            const secir::Program &s, const secir::Program &t,
                            const secir::AttackModel &m, int k,
                            const RefinementWitness &w,
                            const Counterexample &cex);

bool recheck_bisim_counterexample(const secir::Program &s,
                                  const secir::Program &t,
                                  const secir::AttackModel &m,
                                  const BisimWitness &b, InputSet input_set,
                                  const Counterexample &cex);

} // namespace secwit::refinement
