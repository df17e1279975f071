#include "secwit/secir.hpp"

#include <cctype>
#include <sstream>

// Text format, one instruction per labeled line:
//   program <name> domain <D>
//   var x            array a[3]
//   L1: x := <expr>
//   L2: a[<expr>] := <expr>
//   L3: x := input(secret)
//   L4: output(public, <expr>)
//   L5: skip
//   L6: if (<expr>) goto L1 else goto L7
//   L7: goto L1
//   L8: choose L1 or L7
//   L9: { x := 1; a[0] := x }
//   L10: halt
// Comments run from '#' or '//' to end of line.

namespace secwit::secir {

namespace {

struct Cursor {
  const std::string &s;
  int line;
  std::size_t i = 0;

  [[noreturn]] void fail(const std::string &msg) const {
    throw ParseError(line, static_cast<int>(i) + 1, msg);
  }
  void skip_ws() {
    while (i < s.size() && std::isspace(static_cast<unsigned char>(s[i])))
      ++i;
  }
  bool eof() {
    skip_ws();
    return i >= s.size();
  }
  char peek() {
    skip_ws();
    return i < s.size() ? s[i] : '\0';
  }
  bool try_eat(const std::string &tok) {
    skip_ws();
    if (s.compare(i, tok.size(), tok) != 0)
      return false;
    // keyword tokens must not glue to identifier characters
    if (std::isalpha(static_cast<unsigned char>(tok[0]))) {
      std::size_t j = i + tok.size();
      if (j < s.size() && (std::isalnum(static_cast<unsigned char>(s[j])) ||
                           s[j] == '_'))
        return false;
    }
    i += tok.size();
    return true;
  }
  void eat(const std::string &tok) {
    if (!try_eat(tok))
      fail("expected '" + tok + "'");
  }
  std::string ident() {
    skip_ws();
    std::size_t start = i;
    while (i < s.size() && (std::isalnum(static_cast<unsigned char>(s[i])) ||
                            s[i] == '_'))
      ++i;
    if (i == start)
      fail("expected identifier");
    return s.substr(start, i - start);
  }
  int number() {
    skip_ws();
    std::size_t start = i;
    while (i < s.size() && std::isdigit(static_cast<unsigned char>(s[i])))
      ++i;
    if (i == start)
      fail("expected number");
    return std::stoi(s.substr(start, i - start));
  }
};

// precedence-climbing expression parser
ExprPtr parse_ternary(Cursor &c);

ExprPtr parse_primary(Cursor &c) {
  c.skip_ws();
  if (c.try_eat("(")) {
    ExprPtr e = parse_ternary(c);
    c.eat(")");
    return e;
  }
  if (c.try_eat("!"))
    return Expr::unary(Expr::Op::Not, parse_primary(c));
  if (c.try_eat("-"))
    return Expr::binary(Expr::Op::Sub, Expr::constant(0), parse_primary(c));
  char ch = c.peek();
  if (std::isdigit(static_cast<unsigned char>(ch)))
    return Expr::constant(c.number());
  std::string name = c.ident();
  if (c.try_eat("[")) {
    ExprPtr idx = parse_ternary(c);
    c.eat("]");
    return Expr::arr_read(name, idx);
  }
  return Expr::var(name);
}

ExprPtr parse_mul(Cursor &c) {
  ExprPtr e = parse_primary(c);
  for (;;) {
    if (c.try_eat("*"))
      e = Expr::binary(Expr::Op::Mul, e, parse_primary(c));
    else if (c.try_eat("/"))
      e = Expr::binary(Expr::Op::Div, e, parse_primary(c));
    else if (c.try_eat("%"))
      e = Expr::binary(Expr::Op::Mod, e, parse_primary(c));
    else
      return e;
  }
}

ExprPtr parse_add(Cursor &c) {
  ExprPtr e = parse_mul(c);
  for (;;) {
    if (c.try_eat("+"))
      e = Expr::binary(Expr::Op::Add, e, parse_mul(c));
    else if (c.try_eat("-"))
      e = Expr::binary(Expr::Op::Sub, e, parse_mul(c));
    else
      return e;
  }
}

ExprPtr parse_cmp(Cursor &c) {
  ExprPtr e = parse_add(c);
  for (;;) {
    if (c.try_eat("=="))
      e = Expr::binary(Expr::Op::Eq, e, parse_add(c));
    else if (c.try_eat("!="))
      e = Expr::binary(Expr::Op::Ne, e, parse_add(c));
    else if (c.try_eat("<="))
      e = Expr::binary(Expr::Op::Le, e, parse_add(c));
    else if (c.try_eat(">="))
      e = Expr::binary(Expr::Op::Ge, e, parse_add(c));
    else if (c.try_eat("<"))
      e = Expr::binary(Expr::Op::Lt, e, parse_add(c));
    else if (c.try_eat(">"))
      e = Expr::binary(Expr::Op::Gt, e, parse_add(c));
    else
      return e;
  }
}

ExprPtr parse_and(Cursor &c) {
  ExprPtr e = parse_cmp(c);
  while (c.try_eat("&&"))
    e = Expr::binary(Expr::Op::And, e, parse_cmp(c));
  return e;
}

ExprPtr parse_or(Cursor &c) {
  ExprPtr e = parse_and(c);
  while (c.try_eat("||"))
    e = Expr::binary(Expr::Op::Or, e, parse_and(c));
  return e;
}

ExprPtr parse_ternary(Cursor &c) {
  ExprPtr e = parse_or(c);
  if (c.try_eat("?")) {
    ExprPtr t = parse_ternary(c);
    c.eat(":");
    ExprPtr f = parse_ternary(c);
    return Expr::cond(e, t, f);
  }
  return e;
}

Channel parse_channel(Cursor &c) {
  if (c.try_eat("secret"))
    return Channel::Secret;
  if (c.try_eat("public"))
    return Channel::Public;
  c.fail("expected channel 'secret' or 'public'");
}

Instruction parse_instr(Cursor &c, bool in_block);

Instruction parse_block(Cursor &c) {
  Instruction ins;
  ins.kind = Instruction::Kind::Block;
  c.eat("{");
  if (!c.try_eat("}")) {
    for (;;) {
      ins.subs.push_back(parse_instr(c, true));
      if (c.try_eat(";"))
        continue;
      c.eat("}");
      break;
    }
  }
  return ins;
}

Instruction parse_instr(Cursor &c, bool in_block) {
  Instruction ins;
  c.skip_ws();
  if (!in_block && c.peek() == '{')
    return parse_block(c);
  if (c.try_eat("skip")) {
    ins.kind = Instruction::Kind::Skip;
    return ins;
  }
  if (c.try_eat("halt")) {
    if (in_block)
      c.fail("halt not allowed inside a block");
    ins.kind = Instruction::Kind::Halt;
    return ins;
  }
  if (c.try_eat("goto")) {
    if (in_block)
      c.fail("goto not allowed inside a block");
    ins.kind = Instruction::Kind::Jump;
    ins.then_label = c.ident();
    return ins;
  }
  if (c.try_eat("choose")) {
    if (in_block)
      c.fail("choose not allowed inside a block");
    ins.kind = Instruction::Kind::Choice;
    ins.then_label = c.ident();
    c.eat("or");
    ins.else_label = c.ident();
    return ins;
  }
  if (c.try_eat("if")) {
    if (in_block)
      c.fail("branch not allowed inside a block");
    ins.kind = Instruction::Kind::Branch;
    c.eat("(");
    ins.expr = parse_ternary(c);
    c.eat(")");
    c.eat("goto");
    ins.then_label = c.ident();
    c.eat("else");
    c.eat("goto");
    ins.else_label = c.ident();
    return ins;
  }
  if (c.try_eat("output")) {
    ins.kind = Instruction::Kind::Output;
    c.eat("(");
    ins.chan = parse_channel(c);
    c.eat(",");
    ins.expr = parse_ternary(c);
    c.eat(")");
    return ins;
  }
  std::string name = c.ident();
  if (c.try_eat("[")) {
    ins.kind = Instruction::Kind::Store;
    ins.var = name;
    ins.index = parse_ternary(c);
    c.eat("]");
    c.eat(":=");
    ins.expr = parse_ternary(c);
    return ins;
  }
  c.eat(":=");
  if (c.try_eat("input")) {
    ins.kind = Instruction::Kind::Input;
    ins.var = name;
    c.eat("(");
    ins.chan = parse_channel(c);
    c.eat(")");
    return ins;
  }
  ins.kind = Instruction::Kind::Assign;
  ins.var = name;
  ins.expr = parse_ternary(c);
  return ins;
}

std::string strip_comment(const std::string &line) {
  std::size_t h = line.find('#');
  std::size_t ds = line.find("//");
  std::size_t cut = std::min(h == std::string::npos ? line.size() : h,
                             ds == std::string::npos ? line.size() : ds);
  return line.substr(0, cut);
}

bool blank(const std::string &s) {
  for (char ch : s)
    if (!std::isspace(static_cast<unsigned char>(ch)))
      return false;
  return true;
}

} // namespace

Program parse_program(const std::string &text) {
  Program p;
  std::istringstream in(text);
  std::string raw;
  int lineno = 0;
  bool saw_header = false;
  while (std::getline(in, raw)) {
    ++lineno;
    std::string body = strip_comment(raw);
    if (blank(body))
      continue;
    Cursor c{body, lineno};
    if (!saw_header) {
      c.eat("program");
      p.name = c.ident();
      c.eat("domain");
      p.domain = c.number();
      if (!c.eof())
        c.fail("trailing input after header");
      saw_header = true;
      continue;
    }
    if (c.try_eat("var")) {
      for (;;) {
        p.vars.push_back(c.ident());
        if (!c.try_eat(";"))
          break;
        c.eat("var");
      }
      if (!c.eof())
        c.fail("trailing input after declaration");
      continue;
    }
    if (c.try_eat("array")) {
      for (;;) {
        std::string n = c.ident();
        c.eat("[");
        int len = c.number();
        c.eat("]");
        p.arrays.push_back({n, len});
        if (!c.try_eat(";"))
          break;
        c.eat("array");
      }
      if (!c.eof())
        c.fail("trailing input after declaration");
      continue;
    }
    std::string label = c.ident();
    c.eat(":");
    Instruction ins = parse_instr(c, false);
    if (!c.eof())
      c.fail("trailing input after instruction");
    p.labels.push_back(label);
    p.instrs.push_back(std::move(ins));
  }
  if (!saw_header)
    throw ParseError(1, 1, "missing 'program <name> domain <D>' header");
  try {
    p.finalize();
  } catch (const ConfigError &e) {
    throw ParseError(lineno, 1, e.what());
  }
  return p;
}

std::string to_string(const Instruction &ins) {
  using K = Instruction::Kind;
  switch (ins.kind) {
  case K::Assign:
    return ins.var + " := " + to_string(*ins.expr);
  case K::Store:
    return ins.var + "[" + to_string(*ins.index) +
           "] := " + to_string(*ins.expr);
  case K::Input:
    return ins.var + " := input(" + std::string(to_string(ins.chan)) + ")";
  case K::Output:
    return "output(" + std::string(to_string(ins.chan)) + ", " +
           to_string(*ins.expr) + ")";
  case K::Skip:
    return "skip";
  case K::Branch:
    return "if (" + to_string(*ins.expr) + ") goto " + ins.then_label +
           " else goto " + ins.else_label;
  case K::Jump:
    return "goto " + ins.then_label;
  case K::Choice:
    return "choose " + ins.then_label + " or " + ins.else_label;
  case K::Block: {
    std::string s = "{ ";
    for (std::size_t i = 0; i < ins.subs.size(); ++i) {
      if (i)
        s += "; ";
      s += to_string(ins.subs[i]);
    }
    return s + " }";
  }
  case K::Halt:
    return "halt";
  }
  return "?";
}

std::string print_program(const Program &p) {
  std::ostringstream os;
  os << "program " << p.name << " domain " << p.domain << "\n";
  for (auto &v : p.vars)
    os << "var " << v << "\n";
  for (auto &[a, len] : p.arrays)
    os << "array " << a << "[" << len << "]\n";
  for (std::size_t i = 0; i < p.instrs.size(); ++i)
    os << p.labels[i] << ": " << to_string(p.instrs[i]) << "\n";
  return os.str();
}

} // namespace secwit::secir
