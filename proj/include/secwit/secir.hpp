#pragma once

#include <map>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "secwit/common.hpp"
#include "secwit/upword.hpp"

// SecIR: a finite-state imperative mini-IR over bounded modular integers.
// A program induces a left-total labeled transition system whose observable
// labels depend on the active attack model.

namespace secwit::secir {

enum class Channel { Secret, Public };
enum class EvKind { Eps, Input, Output, Ext, Bot };
enum class ExtTag { Mem, Branch, Init, Final };

const char *to_string(Channel c);
const char *to_string(EvKind k);
const char *to_string(ExtTag t);

// One observable symbol. Eps and Bot carry nothing; Input/Output carry
// channel + value; Ext carries a tag with a tag-specific payload:
//   Mem    - the (array, index) accesses made by one transition, canonically
//            sorted (order inside an atomic step is not observable)
//   Branch - the truth value of the taken condition
//   Init/Final - a memory snapshot restricted to the model's exposed names
struct Event {
  EvKind kind = EvKind::Eps;
  Channel chan = Channel::Public;
  int value = 0;
  ExtTag tag = ExtTag::Mem;
  std::vector<std::pair<std::string, int>> accesses; // Mem
  std::vector<std::pair<std::string, int>> snapshot; // Init/Final

  static Event eps() { return {}; }
  static Event bot();
  static Event input(Channel c, int v);
  static Event output(Channel c, int v);
  static Event mem(std::vector<std::pair<std::string, int>> acc);
  static Event branch(bool taken);
  static Event exposure(ExtTag t, std::vector<std::pair<std::string, int>> snap);

  bool is_silent() const { return kind == EvKind::Eps; }
  bool is_input() const { return kind == EvKind::Input; }

  friend bool operator==(const Event &a, const Event &b);
  friend bool operator<(const Event &a, const Event &b);
  friend bool operator!=(const Event &a, const Event &b) { return !(a == b); }
};

std::string to_string(const Event &e);
std::size_t hash_value(const Event &e);

// Expressions evaluate to values in [0, D); arithmetic wraps mod D and
// division/modulo by zero yield 0, so evaluation is total.
struct Expr;
using ExprPtr = std::shared_ptr<const Expr>;

struct Expr {
  enum class Op {
    Const, Var, ArrRead,
    Add, Sub, Mul, Div, Mod,
    Eq, Ne, Lt, Le, Gt, Ge,
    And, Or, Not, Cond
  };
  Op op = Op::Const;
  int value = 0;     // Const
  std::string name;  // Var / ArrRead
  ExprPtr a, b, c;

  static ExprPtr constant(int v);
  static ExprPtr var(std::string n);
  static ExprPtr arr_read(std::string n, ExprPtr idx);
  static ExprPtr unary(Op o, ExprPtr x);
  static ExprPtr binary(Op o, ExprPtr x, ExprPtr y);
  static ExprPtr cond(ExprPtr c0, ExprPtr x, ExprPtr y);
};

std::string to_string(const Expr &e);

struct Instruction {
  enum class Kind {
    Assign, Store, Input, Output, Skip, Branch, Jump, Choice, Block, Halt
  };
  Kind kind = Kind::Skip;
  std::string var;   // Assign/Input target; Store array
  ExprPtr index;     // Store index
  ExprPtr expr;      // Assign/Store value, Output expr, Branch cond
  Channel chan = Channel::Public;
  std::string then_label, else_label; // Branch; Jump/Choice use then (and else)
  std::vector<Instruction> subs;      // Block
};

std::string to_string(const Instruction &ins);

// Which internal actions become observable. `final_memory` additionally makes
// the run start with an Init exposure and makes the first End visit emit a
// Final exposure before the bot self-loop.
struct AttackModel {
  std::string name = "io";
  bool io = true;
  bool mem_access_indices = false;
  bool branch_conditions = false;
  bool final_memory = false;
  std::vector<std::string> exposed; // names for exposures; empty = everything

  bool any_flag() const {
    return io || mem_access_indices || branch_conditions || final_memory;
  }
};

// Registry names: io, mem, branch, ct (= io+mem+branch), final_memory.
AttackModel attack_model_by_name(const std::string &name,
                                 std::vector<std::string> exposed = {});

struct Program {
  std::string name;
  int domain = 4;
  std::vector<std::string> vars;
  std::vector<std::pair<std::string, int>> arrays;
  std::vector<std::string> labels;   // one per instruction; End is implicit
  std::vector<Instruction> instrs;

  // derived layout (filled by finalize)
  std::map<std::string, int> scalar_slot;
  std::map<std::string, std::pair<int, int>> array_slot; // name -> (base, len)
  std::map<std::string, int> label_index;
  int num_slots = 0;

  void finalize(); // build layout and validate structure
  int end_loc() const { return static_cast<int>(instrs.size()); }
  int loc_of(const std::string &label) const;
  const std::string &label_of(int loc) const; // "End" for end_loc()
  bool declares(const std::string &n) const;
  std::vector<std::string> slot_names() const; // slot -> printable name
};

// phase: 0 = initial exposure pending, 1 = running, 2 = final exposure done.
// Programs run under models without final_memory start (and stay) at 1.
struct Config {
  std::vector<int> alpha;
  int loc = 0;
  int phase = 1;

  friend bool operator==(const Config &a, const Config &b) {
    return a.loc == b.loc && a.phase == b.phase && a.alpha == b.alpha;
  }
  friend bool operator<(const Config &a, const Config &b) {
    if (a.loc != b.loc) return a.loc < b.loc;
    if (a.phase != b.phase) return a.phase < b.phase;
    return a.alpha < b.alpha;
  }
};

std::string to_string(const Program &p, const Config &c);
std::size_t hash_value(const Config &c);

int eval_expr(const Program &p, const Expr &e, const std::vector<int> &alpha);

// --- core operations -------------------------------------------------------

Program parse_program(const std::string &text);
std::string print_program(const Program &p);

Config initial_config(const Program &p, const AttackModel &m);
Config initial_config(const Program &p); // io model

// The full successor set; never empty. Input instructions branch on all D
// values; End self-loops with bot (after the one-shot Final exposure when the
// model asks for it).
std::vector<std::pair<Event, Config>> step(const Program &p,
                                           const AttackModel &m,
                                           const Config &c);

// Model-dependent static checks: no cycle of silent-only locations, and no
// block that can emit more than one event. parse_program runs them with the
// bare io model; semantic entry points re-run them with the active model.
void validate_for_model(const Program &p, const AttackModel &m);

// Does any reachable-in-principle instruction emit Eps under m? Decides
// whether a product needs the buffering construction.
bool has_silent_steps(const Program &p, const AttackModel &m);

struct LassoStep {
  Config from;
  Event ev;
  Config to;
  friend bool operator==(const LassoStep &a, const LassoStep &b) {
    return a.from == b.from && a.ev == b.ev && a.to == b.to;
  }
  friend bool operator<(const LassoStep &a, const LassoStep &b) {
    if (!(a.from == b.from)) return a.from < b.from;
    if (a.ev != b.ev) return a.ev < b.ev;
    return a.to < b.to;
  }
};

// Finite presentation of an ultimately periodic execution: stem from the
// initial config plus a loop returning to the loop head. The loop carries at
// least one non-silent event.
struct LassoExecution {
  std::vector<LassoStep> stem;
  std::vector<LassoStep> loop;

  friend bool operator==(const LassoExecution &a, const LassoExecution &b) {
    return a.stem == b.stem && a.loop == b.loop;
  }
  friend bool operator<(const LassoExecution &a, const LassoExecution &b) {
    if (!(a.stem == b.stem)) return a.stem < b.stem;
    return a.loop < b.loop;
  }
};

void validate_lasso(const Program &p, const AttackModel &m,
                    const LassoExecution &x);

struct LassoSet {
  std::vector<LassoExecution> lassos;
  bool complete = true;
  std::string note; // budget note when incomplete
};

// Every lasso with |stem| <= stem_max and |loop| <= loop_max, deduplicated up
// to loop rotation/unrolling (canonical minimal form).
LassoSet enumerate_lassos(const Program &p, const AttackModel &m, int stem_max,
                          int loop_max, Budget *budget = nullptr);

traceops::UPWord<Event> trace_of(const LassoExecution &x);
traceops::UPWord<Config> states_of(const LassoExecution &x);

// Membership of an UP event word in the program's trace language.
bool program_has_trace(const Program &p, const AttackModel &m,
                       const traceops::UPWord<Event> &w);

} // namespace secwit::secir
