#include "secwit/secir.hpp"

#include <algorithm>
#include <cassert>
#include <cctype>
#include <functional>
#include <set>
#include <sstream>

namespace secwit::secir {

const char *to_string(Channel c) {
  return c == Channel::Secret ? "secret" : "public";
}
const char *to_string(EvKind k) {
  switch (k) {
  case EvKind::Eps: return "eps";
  case EvKind::Input: return "input";
  case EvKind::Output: return "output";
  case EvKind::Ext: return "ext";
  case EvKind::Bot: return "bot";
  }
  return "?";
}
const char *to_string(ExtTag t) {
  switch (t) {
  case ExtTag::Mem: return "mem";
  case ExtTag::Branch: return "branch";
  case ExtTag::Init: return "init";
  case ExtTag::Final: return "final";
  }
  return "?";
}

Event Event::bot() {
  Event e;
  e.kind = EvKind::Bot;
  return e;
}
Event Event::input(Channel c, int v) {
  Event e;
  e.kind = EvKind::Input;
  e.chan = c;
  e.value = v;
  return e;
}
Event Event::output(Channel c, int v) {
  Event e;
  e.kind = EvKind::Output;
  e.chan = c;
  e.value = v;
  return e;
}
Event Event::mem(std::vector<std::pair<std::string, int>> acc) {
  Event e;
  e.kind = EvKind::Ext;
  e.tag = ExtTag::Mem;
  std::sort(acc.begin(), acc.end());
  acc.erase(std::unique(acc.begin(), acc.end()), acc.end());
  e.accesses = std::move(acc);
  return e;
}
Event Event::branch(bool taken) {
  Event e;
  e.kind = EvKind::Ext;
  e.tag = ExtTag::Branch;
  e.value = taken ? 1 : 0;
  return e;
}
Event Event::exposure(ExtTag t, std::vector<std::pair<std::string, int>> snap) {
  Event e;
  e.kind = EvKind::Ext;
  e.tag = t;
  e.snapshot = std::move(snap);
  return e;
}

bool operator==(const Event &a, const Event &b) {
  if (a.kind != b.kind)
    return false;
  switch (a.kind) {
  case EvKind::Eps:
  case EvKind::Bot:
    return true;
  case EvKind::Input:
  case EvKind::Output:
    return a.chan == b.chan && a.value == b.value;
  case EvKind::Ext:
    if (a.tag != b.tag)
      return false;
    if (a.tag == ExtTag::Mem)
      return a.accesses == b.accesses;
    if (a.tag == ExtTag::Branch)
      return a.value == b.value;
    return a.snapshot == b.snapshot;
  }
  return false;
}

bool operator<(const Event &a, const Event &b) {
  if (a.kind != b.kind)
    return a.kind < b.kind;
  switch (a.kind) {
  case EvKind::Eps:
  case EvKind::Bot:
    return false;
  case EvKind::Input:
  case EvKind::Output:
    if (a.chan != b.chan)
      return a.chan < b.chan;
    return a.value < b.value;
  case EvKind::Ext:
    if (a.tag != b.tag)
      return a.tag < b.tag;
    if (a.tag == ExtTag::Mem)
      return a.accesses < b.accesses;
    if (a.tag == ExtTag::Branch)
      return a.value < b.value;
    return a.snapshot < b.snapshot;
  }
  return false;
}

std::string to_string(const Event &e) {
  std::ostringstream os;
  switch (e.kind) {
  case EvKind::Eps:
    return "eps";
  case EvKind::Bot:
    return "bot";
  case EvKind::Input:
    os << "in(" << to_string(e.chan) << "," << e.value << ")";
    break;
  case EvKind::Output:
    os << "out(" << to_string(e.chan) << "," << e.value << ")";
    break;
  case EvKind::Ext:
    if (e.tag == ExtTag::Mem) {
      os << "mem(";
      for (std::size_t i = 0; i < e.accesses.size(); ++i) {
        if (i)
          os << ",";
        os << e.accesses[i].first << "[" << e.accesses[i].second << "]";
      }
      os << ")";
    } else if (e.tag == ExtTag::Branch) {
      os << "branch(" << e.value << ")";
    } else {
      os << (e.tag == ExtTag::Init ? "init{" : "final{");
      for (std::size_t i = 0; i < e.snapshot.size(); ++i) {
        if (i)
          os << ",";
        os << e.snapshot[i].first << "=" << e.snapshot[i].second;
      }
      os << "}";
    }
    break;
  }
  return os.str();
}

std::size_t hash_value(const Event &e) {
  std::size_t h = static_cast<std::size_t>(e.kind);
  hash_combine(h, static_cast<std::size_t>(e.chan));
  hash_combine(h, static_cast<std::size_t>(e.value));
  hash_combine(h, static_cast<std::size_t>(e.tag));
  for (auto &[n, v] : e.accesses) {
    hash_combine(h, std::hash<std::string>{}(n));
    hash_combine(h, static_cast<std::size_t>(v));
  }
  for (auto &[n, v] : e.snapshot) {
    hash_combine(h, std::hash<std::string>{}(n));
    hash_combine(h, static_cast<std::size_t>(v));
  }
  return h;
}

// --- expressions ------------------------------------------------------------

ExprPtr Expr::constant(int v) {
  auto e = std::make_shared<Expr>();
  e->op = Op::Const;
  e->value = v;
  return e;
}
ExprPtr Expr::var(std::string n) {
  auto e = std::make_shared<Expr>();
  e->op = Op::Var;
  e->name = std::move(n);
  return e;
}
ExprPtr Expr::arr_read(std::string n, ExprPtr idx) {
  auto e = std::make_shared<Expr>();
  e->op = Op::ArrRead;
  e->name = std::move(n);
  e->a = std::move(idx);
  return e;
}
ExprPtr Expr::unary(Op o, ExprPtr x) {
  auto e = std::make_shared<Expr>();
  e->op = o;
  e->a = std::move(x);
  return e;
}
ExprPtr Expr::binary(Op o, ExprPtr x, ExprPtr y) {
  auto e = std::make_shared<Expr>();
  e->op = o;
  e->a = std::move(x);
  e->b = std::move(y);
  return e;
}
ExprPtr Expr::cond(ExprPtr c0, ExprPtr x, ExprPtr y) {
  auto e = std::make_shared<Expr>();
  e->op = Op::Cond;
  e->a = std::move(c0);
  e->b = std::move(x);
  e->c = std::move(y);
  return e;
}

static const char *op_token(Expr::Op o) {
  using Op = Expr::Op;
  switch (o) {
  case Op::Add: return "+";
  case Op::Sub: return "-";
  case Op::Mul: return "*";
  case Op::Div: return "/";
  case Op::Mod: return "%";
  case Op::Eq: return "==";
  case Op::Ne: return "!=";
  case Op::Lt: return "<";
  case Op::Le: return "<=";
  case Op::Gt: return ">";
  case Op::Ge: return ">=";
  case Op::And: return "&&";
  case Op::Or: return "||";
  default: return "?";
  }
}

std::string to_string(const Expr &e) {
  using Op = Expr::Op;
  switch (e.op) {
  case Op::Const:
    return std::to_string(e.value);
  case Op::Var:
    return e.name;
  case Op::ArrRead:
    return e.name + "[" + to_string(*e.a) + "]";
  case Op::Not:
    return "!(" + to_string(*e.a) + ")";
  case Op::Cond:
    return "(" + to_string(*e.a) + " ? " + to_string(*e.b) + " : " +
           to_string(*e.c) + ")";
  default:
    return "(" + to_string(*e.a) + " " + op_token(e.op) + " " +
           to_string(*e.b) + ")";
  }
}

static int wrap(long long v, int d) {
  long long r = v % d;
  if (r < 0)
    r += d;
  return static_cast<int>(r);
}

// Evaluation with access collection. Short-circuit operators only touch the
// arrays they actually read.
static int eval_acc(const Program &p, const Expr &e, const std::vector<int> &alpha,
                    std::vector<std::pair<std::string, int>> *acc) {
  using Op = Expr::Op;
  const int d = p.domain;
  switch (e.op) {
  case Op::Const:
    return wrap(e.value, d);
  case Op::Var:
    return alpha[p.scalar_slot.at(e.name)];
  case Op::ArrRead: {
    auto [base, len] = p.array_slot.at(e.name);
    int idx = wrap(eval_acc(p, *e.a, alpha, acc), len);
    if (acc)
      acc->push_back({e.name, idx});
    return alpha[base + idx];
  }
  case Op::Not:
    return eval_acc(p, *e.a, alpha, acc) == 0 ? 1 : 0;
  case Op::And:
    return eval_acc(p, *e.a, alpha, acc) != 0 &&
                   eval_acc(p, *e.b, alpha, acc) != 0
               ? 1
               : 0;
  case Op::Or:
    return eval_acc(p, *e.a, alpha, acc) != 0 ||
                   eval_acc(p, *e.b, alpha, acc) != 0
               ? 1
               : 0;
  case Op::Cond:
    return eval_acc(p, *e.a, alpha, acc) != 0
               ? eval_acc(p, *e.b, alpha, acc)
               : eval_acc(p, *e.c, alpha, acc);
  default:
    break;
  }
  int a = eval_acc(p, *e.a, alpha, acc);
  int b = eval_acc(p, *e.b, alpha, acc);
  switch (e.op) {
  case Op::Add: return wrap(static_cast<long long>(a) + b, d);
  case Op::Sub: return wrap(static_cast<long long>(a) - b, d);
  case Op::Mul: return wrap(static_cast<long long>(a) * b, d);
  case Op::Div: return b == 0 ? 0 : wrap(a / b, d);
  case Op::Mod: return b == 0 ? 0 : wrap(a % b, d);
  case Op::Eq: return a == b;
  case Op::Ne: return a != b;
  case Op::Lt: return a < b;
  case Op::Le: return a <= b;
  case Op::Gt: return a > b;
  case Op::Ge: return a >= b;
  default: return 0;
  }
}

int eval_expr(const Program &p, const Expr &e, const std::vector<int> &alpha) {
  return eval_acc(p, e, alpha, nullptr);
}

static void collect_names(const Expr &e, std::set<std::string> &vars,
                          std::set<std::string> &arrays) {
  using Op = Expr::Op;
  if (e.op == Op::Var)
    vars.insert(e.name);
  if (e.op == Op::ArrRead)
    arrays.insert(e.name);
  if (e.a)
    collect_names(*e.a, vars, arrays);
  if (e.b)
    collect_names(*e.b, vars, arrays);
  if (e.c)
    collect_names(*e.c, vars, arrays);
}

static bool reads_array(const Expr &e) {
  std::set<std::string> v, a;
  collect_names(e, v, a);
  return !a.empty();
}

// --- attack models ----------------------------------------------------------

AttackModel attack_model_by_name(const std::string &name,
                                 std::vector<std::string> exposed) {
  AttackModel m;
  m.name = name;
  m.io = false;
  m.exposed = std::move(exposed);
  std::stringstream ss(name);
  std::string part;
  while (std::getline(ss, part, '+')) {
    if (part == "io")
      m.io = true;
    else if (part == "mem")
      m.io = m.mem_access_indices = true;
    else if (part == "branch")
      m.io = m.branch_conditions = true;
    else if (part == "ct")
      m.io = m.mem_access_indices = m.branch_conditions = true;
    else if (part == "final_memory" || part == "final")
      m.io = m.final_memory = true;
    else
      throw ConfigError("unknown attack model: " + part);
  }
  if (!m.any_flag())
    throw ConfigError("attack model must enable at least one observation");
  return m;
}

// --- program structure ------------------------------------------------------

int Program::loc_of(const std::string &label) const {
  if (label == "End")
    return end_loc();
  auto it = label_index.find(label);
  if (it == label_index.end())
    throw ConfigError("unknown label: " + label);
  return it->second;
}

const std::string &Program::label_of(int loc) const {
  static const std::string kEnd = "End";
  if (loc == end_loc())
    return kEnd;
  return labels.at(static_cast<std::size_t>(loc));
}

bool Program::declares(const std::string &n) const {
  return scalar_slot.count(n) || array_slot.count(n);
}

std::vector<std::string> Program::slot_names() const {
  std::vector<std::string> out(static_cast<std::size_t>(num_slots));
  for (auto &[n, s] : scalar_slot)
    out[static_cast<std::size_t>(s)] = n;
  for (auto &[n, bl] : array_slot)
    for (int i = 0; i < bl.second; ++i)
      out[static_cast<std::size_t>(bl.first + i)] =
          n + "[" + std::to_string(i) + "]";
  return out;
}

static void check_instr_names(const Program &p, const Instruction &ins,
                              bool in_block);

static void check_expr_names(const Program &p, const Expr &e) {
  std::set<std::string> vars, arrays;
  collect_names(e, vars, arrays);
  for (auto &v : vars)
    if (!p.scalar_slot.count(v))
      throw ConfigError("undeclared variable: " + v);
  for (auto &a : arrays)
    if (!p.array_slot.count(a))
      throw ConfigError("undeclared array: " + a);
}

static void check_target(const Program &p, const std::string &label) {
  if (label != "End" && !p.label_index.count(label))
    throw ConfigError("undefined label: " + label);
}

static void check_instr_names(const Program &p, const Instruction &ins,
                              bool in_block) {
  using K = Instruction::Kind;
  switch (ins.kind) {
  case K::Assign:
    if (!p.scalar_slot.count(ins.var))
      throw ConfigError("undeclared variable: " + ins.var);
    check_expr_names(p, *ins.expr);
    break;
  case K::Store:
    if (!p.array_slot.count(ins.var))
      throw ConfigError("undeclared array: " + ins.var);
    check_expr_names(p, *ins.index);
    check_expr_names(p, *ins.expr);
    break;
  case K::Input:
    if (!p.scalar_slot.count(ins.var))
      throw ConfigError("undeclared variable: " + ins.var);
    break;
  case K::Output:
    check_expr_names(p, *ins.expr);
    break;
  case K::Skip:
    break;
  case K::Branch:
    if (in_block)
      throw ConfigError("branch not allowed inside a block");
    check_expr_names(p, *ins.expr);
    check_target(p, ins.then_label);
    check_target(p, ins.else_label);
    break;
  case K::Jump:
    if (in_block)
      throw ConfigError("goto not allowed inside a block");
    check_target(p, ins.then_label);
    break;
  case K::Choice:
    if (in_block)
      throw ConfigError("choose not allowed inside a block");
    check_target(p, ins.then_label);
    check_target(p, ins.else_label);
    break;
  case K::Block:
    if (in_block)
      throw ConfigError("nested blocks are not allowed");
    for (auto &sub : ins.subs)
      check_instr_names(p, sub, true);
    break;
  case K::Halt:
    if (in_block)
      throw ConfigError("halt not allowed inside a block");
    break;
  }
}

void Program::finalize() {
  if (domain < 2)
    throw ConfigError("domain must be at least 2");
  scalar_slot.clear();
  array_slot.clear();
  label_index.clear();
  num_slots = 0;
  for (auto &v : vars) {
    if (declares(v))
      throw ConfigError("duplicate declaration: " + v);
    scalar_slot[v] = num_slots++;
  }
  for (auto &[a, len] : arrays) {
    if (declares(a))
      throw ConfigError("duplicate declaration: " + a);
    if (len <= 0)
      throw ConfigError("array length must be positive: " + a);
    array_slot[a] = {num_slots, len};
    num_slots += len;
  }
  if (labels.size() != instrs.size())
    throw ConfigError("label/instruction count mismatch");
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] == "End")
      throw ConfigError("label End is reserved");
    if (!label_index.emplace(labels[i], static_cast<int>(i)).second)
      throw ConfigError("duplicate label: " + labels[i]);
  }
  for (auto &ins : instrs)
    check_instr_names(*this, ins, false);
  validate_for_model(*this, attack_model_by_name("io"));
}

// --- model-dependent validation ---------------------------------------------

static bool can_emit(const Program &p, const AttackModel &m,
                     const Instruction &ins) {
  using K = Instruction::Kind;
  switch (ins.kind) {
  case K::Assign:
    return m.mem_access_indices && reads_array(*ins.expr);
  case K::Store:
    return m.mem_access_indices;
  case K::Input:
    return m.io;
  case K::Output:
    return m.io || (m.mem_access_indices && reads_array(*ins.expr));
  case K::Branch:
    return m.branch_conditions ||
           (m.mem_access_indices && reads_array(*ins.expr));
  case K::Block: {
    for (auto &sub : ins.subs)
      if (can_emit(p, m, sub))
        return true;
    return false;
  }
  default:
    return false;
  }
}

static std::vector<int> successors_of(const Program &p, int loc) {
  using K = Instruction::Kind;
  const int end = p.end_loc();
  if (loc == end)
    return {end};
  const Instruction &ins = p.instrs[static_cast<std::size_t>(loc)];
  switch (ins.kind) {
  case K::Branch:
    return {p.loc_of(ins.then_label), p.loc_of(ins.else_label)};
  case K::Jump:
    return {p.loc_of(ins.then_label)};
  case K::Choice:
    return {p.loc_of(ins.then_label), p.loc_of(ins.else_label)};
  case K::Halt:
    return {end};
  default:
    return {loc + 1 <= end ? loc + 1 : end};
  }
}

void validate_for_model(const Program &p, const AttackModel &m) {
  // blocks must emit at most one event
  for (std::size_t i = 0; i < p.instrs.size(); ++i) {
    const Instruction &ins = p.instrs[i];
    if (ins.kind != Instruction::Kind::Block)
      continue;
    int io_emitters = 0, mem_emitters = 0;
    for (auto &sub : ins.subs) {
      bool io = (sub.kind == Instruction::Kind::Input ||
                 sub.kind == Instruction::Kind::Output) &&
                m.io;
      if (io)
        ++io_emitters;
      else if (can_emit(p, m, sub))
        ++mem_emitters;
    }
    // memory accesses of a block merge into one event; a second io event
    // (or io next to anything else) would be a second observation
    if (io_emitters > 1 || (io_emitters >= 1 && mem_emitters >= 1))
      throw ConfigError("block at " + p.labels[i] +
                        " would emit more than one event under model " +
                        m.name);
  }
  // no cycle of silent-only locations
  const int end = p.end_loc();
  std::vector<int> color(static_cast<std::size_t>(end) + 1, 0);
  std::function<void(int)> dfs = [&](int loc) {
    color[static_cast<std::size_t>(loc)] = 1;
    for (int nxt : successors_of(p, loc)) {
      bool silent_nxt =
          nxt != end && !can_emit(p, m, p.instrs[static_cast<std::size_t>(nxt)]);
      if (!silent_nxt)
        continue;
      if (color[static_cast<std::size_t>(nxt)] == 1)
        throw ConfigError("cycle of silent instructions under model " + m.name +
                          " (through " + p.label_of(nxt) + ")");
      if (color[static_cast<std::size_t>(nxt)] == 0)
        dfs(nxt);
    }
    color[static_cast<std::size_t>(loc)] = 2;
  };
  for (int loc = 0; loc < end; ++loc) {
    bool silent =
        !can_emit(p, m, p.instrs[static_cast<std::size_t>(loc)]);
    if (silent && color[static_cast<std::size_t>(loc)] == 0)
      dfs(loc);
  }
}

bool has_silent_steps(const Program &p, const AttackModel &m) {
  for (auto &ins : p.instrs)
    if (!can_emit(p, m, ins))
      return true;
  return false;
}

// --- semantics --------------------------------------------------------------

Config initial_config(const Program &p, const AttackModel &m) {
  Config c;
  c.alpha.assign(static_cast<std::size_t>(p.num_slots), 0);
  c.loc = p.instrs.empty() ? p.end_loc() : 0;
  c.phase = m.final_memory ? 0 : 1;
  return c;
}
Config initial_config(const Program &p) {
  return initial_config(p, attack_model_by_name("io"));
}

static std::vector<std::pair<std::string, int>>
snapshot(const Program &p, const AttackModel &m, const std::vector<int> &alpha) {
  std::vector<std::pair<std::string, int>> snap;
  auto expose_scalar = [&](const std::string &n) {
    snap.push_back({n, alpha[static_cast<std::size_t>(p.scalar_slot.at(n))]});
  };
  auto expose_array = [&](const std::string &n) {
    auto [base, len] = p.array_slot.at(n);
    for (int i = 0; i < len; ++i)
      snap.push_back({n + "[" + std::to_string(i) + "]",
                      alpha[static_cast<std::size_t>(base + i)]});
  };
  if (m.exposed.empty()) {
    for (auto &v : p.vars)
      expose_scalar(v);
    for (auto &[a, len] : p.arrays)
      expose_array(a);
  } else {
    for (auto &n : m.exposed) {
      if (p.scalar_slot.count(n))
        expose_scalar(n);
      else if (p.array_slot.count(n))
        expose_array(n);
      // names the program does not declare expose nothing
    }
  }
  std::sort(snap.begin(), snap.end());
  return snap;
}

namespace {
struct SimpleResult {
  Event io_event;                                    // Eps if none
  std::vector<std::pair<std::string, int>> accesses; // mem reads/writes
  std::vector<int> alpha;
};
} // namespace

// Effect of a non-control instruction (Assign/Store/Output/Skip or a block
// member); Input is handled by the caller because it branches on values.
static SimpleResult exec_simple(const Program &p, const Instruction &ins,
                                std::vector<int> alpha) {
  using K = Instruction::Kind;
  SimpleResult r;
  r.alpha = std::move(alpha);
  switch (ins.kind) {
  case K::Assign: {
    int v = eval_acc(p, *ins.expr, r.alpha, &r.accesses);
    r.alpha[static_cast<std::size_t>(p.scalar_slot.at(ins.var))] = v;
    break;
  }
  case K::Store: {
    auto [base, len] = p.array_slot.at(ins.var);
    int idx = wrap(eval_acc(p, *ins.index, r.alpha, &r.accesses), len);
    int v = eval_acc(p, *ins.expr, r.alpha, &r.accesses);
    r.accesses.push_back({ins.var, idx});
    r.alpha[static_cast<std::size_t>(base + idx)] = v;
    break;
  }
  case K::Output: {
    int v = eval_acc(p, *ins.expr, r.alpha, &r.accesses);
    r.io_event = Event::output(ins.chan, v);
    break;
  }
  case K::Skip:
    break;
  default:
    throw ConfigError("exec_simple: unsupported instruction");
  }
  return r;
}

std::vector<std::pair<Event, Config>> step(const Program &p,
                                           const AttackModel &m,
                                           const Config &c) {
  using K = Instruction::Kind;
  std::vector<std::pair<Event, Config>> out;
  const int end = p.end_loc();

  if (m.final_memory && c.phase == 0) {
    Config nxt = c;
    nxt.phase = 1;
    out.push_back({Event::exposure(ExtTag::Init, snapshot(p, m, c.alpha)), nxt});
    return out;
  }
  if (c.loc == end) {
    if (m.final_memory && c.phase == 1) {
      Config nxt = c;
      nxt.phase = 2;
      out.push_back(
          {Event::exposure(ExtTag::Final, snapshot(p, m, c.alpha)), nxt});
      return out;
    }
    out.push_back({Event::bot(), c});
    return out;
  }

  const Instruction &ins = p.instrs[static_cast<std::size_t>(c.loc)];
  const int fallthrough = c.loc + 1;
  auto finish_simple = [&](SimpleResult r, int next_loc) {
    Event ev = Event::eps();
    if (r.io_event.kind != EvKind::Eps && m.io)
      ev = r.io_event;
    else if (m.mem_access_indices && !r.accesses.empty())
      ev = Event::mem(std::move(r.accesses));
    Config nxt;
    nxt.alpha = std::move(r.alpha);
    nxt.loc = next_loc;
    nxt.phase = c.phase;
    out.push_back({ev, std::move(nxt)});
  };

  switch (ins.kind) {
  case K::Assign:
  case K::Store:
  case K::Output:
  case K::Skip:
    finish_simple(exec_simple(p, ins, c.alpha), fallthrough);
    break;
  case K::Input: {
    for (int v = 0; v < p.domain; ++v) {
      Config nxt = c;
      nxt.alpha[static_cast<std::size_t>(p.scalar_slot.at(ins.var))] = v;
      nxt.loc = fallthrough;
      Event ev = m.io ? Event::input(ins.chan, v) : Event::eps();
      out.push_back({ev, std::move(nxt)});
    }
    break;
  }
  case K::Branch: {
    std::vector<std::pair<std::string, int>> acc;
    bool taken = eval_acc(p, *ins.expr, c.alpha, &acc) != 0;
    Config nxt = c;
    nxt.loc = p.loc_of(taken ? ins.then_label : ins.else_label);
    Event ev = Event::eps();
    if (m.branch_conditions)
      ev = Event::branch(taken);
    else if (m.mem_access_indices && !acc.empty())
      ev = Event::mem(std::move(acc));
    out.push_back({ev, std::move(nxt)});
    break;
  }
  case K::Jump: {
    Config nxt = c;
    nxt.loc = p.loc_of(ins.then_label);
    out.push_back({Event::eps(), std::move(nxt)});
    break;
  }
  case K::Choice: {
    int a = p.loc_of(ins.then_label);
    int b = p.loc_of(ins.else_label);
    Config na = c;
    na.loc = a;
    out.push_back({Event::eps(), std::move(na)});
    if (b != a) {
      Config nb = c;
      nb.loc = b;
      out.push_back({Event::eps(), std::move(nb)});
    }
    break;
  }
  case K::Block: {
    // run members atomically; at most one io event, memory accesses merge
    struct PartialState {
      Event io_event;
      std::vector<std::pair<std::string, int>> accesses;
      std::vector<int> alpha;
    };
    std::vector<PartialState> states{{Event::eps(), {}, c.alpha}};
    for (auto &sub : ins.subs) {
      std::vector<PartialState> next_states;
      for (auto &st : states) {
        if (sub.kind == K::Input) {
          for (int v = 0; v < p.domain; ++v) {
            PartialState ns = st;
            ns.alpha[static_cast<std::size_t>(p.scalar_slot.at(sub.var))] = v;
            if (m.io)
              ns.io_event = Event::input(sub.chan, v);
            next_states.push_back(std::move(ns));
          }
        } else {
          SimpleResult r = exec_simple(p, sub, st.alpha);
          PartialState ns = st;
          ns.alpha = std::move(r.alpha);
          if (r.io_event.kind != EvKind::Eps && m.io)
            ns.io_event = r.io_event;
          ns.accesses.insert(ns.accesses.end(), r.accesses.begin(),
                             r.accesses.end());
          next_states.push_back(std::move(ns));
        }
      }
      states = std::move(next_states);
    }
    for (auto &st : states) {
      SimpleResult r{st.io_event, std::move(st.accesses), std::move(st.alpha)};
      finish_simple(std::move(r), fallthrough);
    }
    break;
  }
  case K::Halt: {
    Config nxt = c;
    nxt.loc = end;
    out.push_back({Event::eps(), std::move(nxt)});
    break;
  }
  }
  return out;
}

// --- lassos -----------------------------------------------------------------

static LassoExecution canonical_lasso(std::vector<LassoStep> stem,
                                      std::vector<LassoStep> loop) {
  traceops::UPWord<LassoStep> w{std::move(stem), std::move(loop)};
  w.normalize();
  return LassoExecution{std::move(w.stem), std::move(w.loop)};
}

static bool loop_has_observable(const std::vector<LassoStep> &loop) {
  for (auto &s : loop)
    if (!s.ev.is_silent())
      return true;
  return false;
}

void validate_lasso(const Program &p, const AttackModel &m,
                    const LassoExecution &x) {
  if (x.loop.empty())
    throw ConfigError("lasso loop must be non-empty");
  if (!loop_has_observable(x.loop))
    throw ConfigError("lasso loop contains only silent events");
  const Config init = initial_config(p, m);
  const Config *cur = &init;
  auto check_chain = [&](const std::vector<LassoStep> &steps) {
    for (auto &s : steps) {
      if (!(s.from == *cur))
        throw ConfigError("lasso steps are not adjacent");
      auto succs = step(p, m, s.from);
      bool found = false;
      for (auto &[ev, nxt] : succs)
        if (ev == s.ev && nxt == s.to)
          found = true;
      if (!found)
        throw ConfigError("lasso step is not a program transition");
      cur = &s.to;
    }
  };
  check_chain(x.stem);
  const Config &head = x.stem.empty() ? init : x.stem.back().to;
  if (!(x.loop.front().from == head))
    throw ConfigError("loop does not start at the stem's end");
  check_chain(x.loop);
  if (!(x.loop.back().to == head))
    throw ConfigError("loop does not return to its head");
}

LassoSet enumerate_lassos(const Program &p, const AttackModel &m, int stem_max,
                          int loop_max, Budget *budget) {
  if (stem_max < 1 || loop_max < 1)
    throw ConfigError("lasso bounds must be at least 1");
  validate_for_model(p, m);
  LassoSet result;
  Budget local;
  Budget &b = budget ? *budget : local;
  std::set<LassoExecution> found;
  std::vector<LassoStep> path;
  std::vector<Config> cfgs{initial_config(p, m)};
  const std::size_t depth_cap =
      static_cast<std::size_t>(stem_max) + static_cast<std::size_t>(loop_max);

  std::function<void()> dfs = [&]() {
    if (!b.charge()) {
      result.complete = false;
      return;
    }
    const Config cur = cfgs.back(); // by value: cfgs reallocates below
    for (auto &[ev, nxt] : step(p, m, cur)) {
      path.push_back({cur, ev, nxt});
      cfgs.push_back(nxt);
      const std::size_t pos = path.size();
      for (std::size_t j = 0; j + 1 < cfgs.size(); ++j) {
        if (!(cfgs[j] == nxt))
          continue;
        const std::size_t loop_len = pos - j;
        if (j <= static_cast<std::size_t>(stem_max) &&
            loop_len <= static_cast<std::size_t>(loop_max)) {
          std::vector<LassoStep> stem(path.begin(),
                                      path.begin() + static_cast<long>(j));
          std::vector<LassoStep> loop(path.begin() + static_cast<long>(j),
                                      path.end());
          if (loop_has_observable(loop))
            found.insert(canonical_lasso(std::move(stem), std::move(loop)));
        }
      }
      if (path.size() < depth_cap && !b.exceeded())
        dfs();
      cfgs.pop_back();
      path.pop_back();
    }
  };
  dfs();
  if (b.exceeded()) {
    result.complete = false;
    result.note = "state budget exceeded (limit " + std::to_string(b.limit) +
                  "); enumeration is partial";
  }
  result.lassos.assign(found.begin(), found.end());
  return result;
}

traceops::UPWord<Event> trace_of(const LassoExecution &x) {
  traceops::UPWord<Event> w;
  for (auto &s : x.stem)
    w.stem.push_back(s.ev);
  for (auto &s : x.loop)
    w.loop.push_back(s.ev);
  return w;
}

traceops::UPWord<Config> states_of(const LassoExecution &x) {
  traceops::UPWord<Config> w;
  for (auto &s : x.stem)
    w.stem.push_back(s.from);
  for (auto &s : x.loop)
    w.loop.push_back(s.from);
  return w;
}

bool program_has_trace(const Program &p, const AttackModel &m,
                       const traceops::UPWord<Event> &w) {
  validate_for_model(p, m);
  if (w.loop.empty())
    return false;
  const std::size_t total = w.stem.size() + w.loop.size();
  auto next_pos = [&](std::size_t pos) {
    return pos + 1 < total ? pos + 1 : w.stem.size();
  };
  using Node = std::pair<Config, std::size_t>;
  std::set<Node> visited;
  std::vector<Node> stack{{initial_config(p, m), 0}};
  std::set<Node> on_path; // for cycle detection we search SCC-free: any
                          // revisit of a node already expanded means a cycle
                          // is reachable only if it can reach itself; do a
                          // two-phase search instead.
  // Phase 1: reachable nodes.
  std::vector<Node> order;
  while (!stack.empty()) {
    Node n = stack.back();
    stack.pop_back();
    if (!visited.insert(n).second)
      continue;
    order.push_back(n);
    for (auto &[ev, nxt] : step(p, m, n.first))
      if (ev == w.at(n.second))
        stack.push_back({nxt, next_pos(n.second)});
  }
  // Phase 2: from each reachable node in the loop region, look for a cycle
  // back to itself.
  for (auto &n : order) {
    if (n.second < w.stem.size())
      continue;
    std::set<Node> seen;
    std::vector<Node> st;
    for (auto &[ev, nxt] : step(p, m, n.first))
      if (ev == w.at(n.second))
        st.push_back({nxt, next_pos(n.second)});
    bool cyc = false;
    while (!st.empty() && !cyc) {
      Node x = st.back();
      st.pop_back();
      if (x == n) {
        cyc = true;
        break;
      }
      if (!seen.insert(x).second)
        continue;
      for (auto &[ev, nxt] : step(p, m, x.first))
        if (ev == w.at(x.second))
          st.push_back({nxt, next_pos(x.second)});
    }
    if (cyc)
      return true;
  }
  return false;
}

std::string to_string(const Program &p, const Config &c) {
  std::ostringstream os;
  os << "(" << p.label_of(c.loc);
  if (c.phase != 1)
    os << (c.phase == 0 ? "@pre" : "@done");
  os << ", {";
  auto names = p.slot_names();
  for (std::size_t i = 0; i < names.size(); ++i) {
    if (i)
      os << ",";
    os << names[i] << "=" << c.alpha[i];
  }
  os << "})";
  return os.str();
}

std::size_t hash_value(const Config &c) {
  std::size_t h = static_cast<std::size_t>(c.loc);
  hash_combine(h, static_cast<std::size_t>(c.phase));
  for (int v : c.alpha)
    hash_combine(h, static_cast<std::size_t>(v));
  return h;
}

} // namespace secwit::secir
