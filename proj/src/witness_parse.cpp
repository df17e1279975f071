#include <cctype>
#include <sstream>

#include "secwit/refinement.hpp"

// Witness text format:
//   witness for <property> {
//     R: <formula>;
//     I: inputs;
//     stutter: source, rank <int-term>, bound 8;
//     bisim: <formula>;
//     pairs L := { (L1,L1), (L2,L2) };
//     skolem sigmaS := sigmaT;
//     skolem pS := pT;
//     skolem sPrime := tPrime;
//     universal_only;
//   }
//
// Formulas: qT = qS, qT = <state>, src[i].loc = L3, tgt[i].alpha(y) = 42,
// src[i].alpha[b[j] := a[j-1]] = tgt[i].alpha[...], src[i] = tgt[i],
// eqvars(src[i], tgt[i], x y z), L(src[i].loc, tgt[i].loc),
// Delta(qS, (mem(arr,0), mem(arr,0)), qT), alltracks(...), (f) ? g : h,
// ! && || ->. Inside a bisim formula the track selector is omitted.

namespace secwit::refinement {

namespace {

struct WCursor {
  const std::string &s;
  std::size_t i = 0;

  int line_at(std::size_t pos) const {
    int line = 1;
    for (std::size_t j = 0; j < pos && j < s.size(); ++j)
      if (s[j] == '\n')
        ++line;
    return line;
  }
  [[noreturn]] void fail(const std::string &msg) const {
    throw ParseError(line_at(i), 1, msg);
  }
  void skip_ws() {
    for (;;) {
      while (i < s.size() && std::isspace(static_cast<unsigned char>(s[i])))
        ++i;
      if (i < s.size() && s[i] == '#') {
        while (i < s.size() && s[i] != '\n')
          ++i;
        continue;
      }
      if (i + 1 < s.size() && s[i] == '/' && s[i + 1] == '/') {
        while (i < s.size() && s[i] != '\n')
          ++i;
        continue;
      }
      break;
    }
  }
  bool peek_is(char c) {
    skip_ws();
    return i < s.size() && s[i] == c;
  }
  bool try_eat(const std::string &tok) {
    skip_ws();
    if (s.compare(i, tok.size(), tok) != 0)
      return false;
    if (std::isalpha(static_cast<unsigned char>(tok[0])) || tok[0] == '_') {
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
  long long number() {
    skip_ws();
    bool neg = false;
    if (i < s.size() && s[i] == '-') {
      neg = true;
      ++i;
    }
    std::size_t start = i;
    while (i < s.size() && std::isdigit(static_cast<unsigned char>(s[i])))
      ++i;
    if (i == start)
      fail("expected number");
    long long v = std::stoll(s.substr(start, i - start));
    return neg ? -v : v;
  }
  bool eof() {
    skip_ws();
    return i >= s.size();
  }
};

TermPtr mkterm(Term t) { return std::make_shared<Term>(std::move(t)); }
FormulaPtr mkf(Formula f) { return std::make_shared<Formula>(std::move(f)); }

FormulaPtr parse_formula(WCursor &c);
TermPtr parse_int_term(WCursor &c);

bool try_side(WCursor &c, Side &side) {
  if (c.try_eat("src")) {
    side = Side::Src;
    return true;
  }
  if (c.try_eat("tgt")) {
    side = Side::Tgt;
    return true;
  }
  return false;
}

TrackRef parse_track_sel(WCursor &c) {
  TrackRef t;
  if (c.try_eat("[")) {
    if (c.try_eat("i"))
      t.bound = true;
    else
      t.index = static_cast<int>(c.number());
    c.eat("]");
  } else {
    t.index = 1; // bisim formulas: single implicit track
  }
  return t;
}

// alpha expression after '<side>[i].alpha': optional chain of updates
AlphaExprPtr parse_alpha_updates(WCursor &c, Side side, TrackRef track) {
  AlphaExpr ae;
  ae.side = side;
  ae.track = track;
  while (c.peek_is('[')) {
    c.eat("[");
    AlphaUpdate up;
    up.name = c.ident();
    if (c.try_eat("[")) {
      up.is_array = true;
      up.index = parse_int_term(c);
      c.eat("]");
    }
    c.eat(":=");
    up.value = parse_int_term(c);
    c.eat("]");
    ae.updates.push_back(std::move(up));
  }
  return std::make_shared<AlphaExpr>(std::move(ae));
}

// int term primaries: numbers, alpha reads, tracksum, parenthesized terms and
// (formula) ? t : t with backtracking on the parenthesis
TermPtr parse_int_primary(WCursor &c) {
  c.skip_ws();
  if (c.peek_is('(')) {
    std::size_t save = c.i;
    // try a formula-conditioned term first
    try {
      c.eat("(");
      FormulaPtr cond = parse_formula(c);
      c.eat(")");
      if (c.try_eat("?")) {
        Term t;
        t.kind = Term::Kind::CondT;
        t.cond = cond;
        t.a = parse_int_term(c);
        c.eat(":");
        t.b = parse_int_term(c);
        return mkterm(std::move(t));
      }
    } catch (const ParseError &) {
    }
    c.i = save;
    c.eat("(");
    TermPtr t = parse_int_term(c);
    c.eat(")");
    return t;
  }
  if (c.try_eat("tracksum")) {
    c.eat("(");
    Term t;
    t.kind = Term::Kind::TrackSum;
    t.a = parse_int_term(c);
    c.eat(")");
    return mkterm(std::move(t));
  }
  Side side;
  if (try_side(c, side)) {
    TrackRef tr = parse_track_sel(c);
    c.eat(".");
    c.eat("alpha");
    c.eat("(");
    Term t;
    t.kind = Term::Kind::AlphaRead;
    t.side = side;
    t.track = tr;
    t.name = c.ident();
    if (c.try_eat("[")) {
      t.index = parse_int_term(c);
      c.eat("]");
    }
    c.eat(")");
    return mkterm(std::move(t));
  }
  Term t;
  t.kind = Term::Kind::IntLit;
  t.value = c.number();
  return mkterm(std::move(t));
}

TermPtr parse_int_mul(WCursor &c) {
  TermPtr t = parse_int_primary(c);
  for (;;) {
    char op;
    if (c.try_eat("*"))
      op = '*';
    else if (c.try_eat("/"))
      op = '/';
    else if (c.try_eat("%"))
      op = '%';
    else
      return t;
    Term n;
    n.kind = Term::Kind::Arith;
    n.arith_op = op;
    n.a = t;
    n.b = parse_int_primary(c);
    t = mkterm(std::move(n));
  }
}

TermPtr parse_int_term(WCursor &c) {
  TermPtr t = parse_int_mul(c);
  for (;;) {
    char op;
    if (c.try_eat("+"))
      op = '+';
    else if (c.try_eat("-"))
      op = '-';
    else
      return t;
    Term n;
    n.kind = Term::Kind::Arith;
    n.arith_op = op;
    n.a = t;
    n.b = parse_int_mul(c);
    t = mkterm(std::move(n));
  }
}

Formula::Cmp parse_cmp_op(WCursor &c) {
  if (c.try_eat("!=")) return Formula::Cmp::Ne;
  if (c.try_eat("<=")) return Formula::Cmp::Le;
  if (c.try_eat(">=")) return Formula::Cmp::Ge;
  if (c.try_eat("=")) return Formula::Cmp::Eq;
  if (c.try_eat("<")) return Formula::Cmp::Lt;
  if (c.try_eat(">")) return Formula::Cmp::Gt;
  c.fail("expected comparison operator");
}

secir::Event parse_event_literal(WCursor &c) {
  using secir::Channel;
  using secir::Event;
  if (c.try_eat("eps"))
    return Event::eps();
  if (c.try_eat("bot"))
    return Event::bot();
  auto chan = [&]() {
    if (c.try_eat("secret"))
      return Channel::Secret;
    c.eat("public");
    return Channel::Public;
  };
  if (c.try_eat("in")) {
    c.eat("(");
    Channel ch = chan();
    c.eat(",");
    int v = static_cast<int>(c.number());
    c.eat(")");
    return Event::input(ch, v);
  }
  if (c.try_eat("out")) {
    c.eat("(");
    Channel ch = chan();
    c.eat(",");
    int v = static_cast<int>(c.number());
    c.eat(")");
    return Event::output(ch, v);
  }
  if (c.try_eat("mem")) {
    c.eat("(");
    std::string arr = c.ident();
    c.eat(",");
    int idx = static_cast<int>(c.number());
    c.eat(")");
    return Event::mem({{arr, idx}});
  }
  if (c.try_eat("branch")) {
    c.eat("(");
    int v = static_cast<int>(c.number());
    c.eat(")");
    return Event::branch(v != 0);
  }
  c.fail("expected event literal (eps|bot|in|out|mem|branch)");
}

TermPtr state_term(WCursor &c) {
  if (c.try_eat("qT")) {
    Term t;
    t.kind = Term::Kind::StateRef;
    t.value = 0;
    return mkterm(std::move(t));
  }
  if (c.try_eat("qS")) {
    Term t;
    t.kind = Term::Kind::StateRef;
    t.value = 1;
    return mkterm(std::move(t));
  }
  Term t;
  t.kind = Term::Kind::StateLit;
  t.name = c.ident();
  return mkterm(std::move(t));
}

// atom starting with src/tgt: config equality, loc comparison, alpha
// equality or an integer comparison
FormulaPtr parse_side_atom(WCursor &c, Side side) {
  TrackRef tr = parse_track_sel(c);
  if (c.try_eat(".")) {
    if (c.try_eat("loc")) {
      Formula f;
      f.kind = Formula::Kind::LocCmp;
      Term lhs;
      lhs.kind = Term::Kind::LocRef;
      lhs.side = side;
      lhs.track = tr;
      f.a = mkterm(std::move(lhs));
      f.cmp = parse_cmp_op(c);
      if (f.cmp != Formula::Cmp::Eq && f.cmp != Formula::Cmp::Ne)
        c.fail("locations support = and != only");
      Side rside;
      if (try_side(c, rside)) {
        TrackRef rtr = parse_track_sel(c);
        c.eat(".");
        c.eat("loc");
        Term rhs;
        rhs.kind = Term::Kind::LocRef;
        rhs.side = rside;
        rhs.track = rtr;
        f.b = mkterm(std::move(rhs));
      } else {
        Term rhs;
        rhs.kind = Term::Kind::LocLit;
        rhs.name = c.ident();
        f.b = mkterm(std::move(rhs));
      }
      return mkf(std::move(f));
    }
    c.eat("alpha");
    if (c.peek_is('(')) {
      // integer read: fall back to the int-comparison atom
      Term lhs;
      lhs.kind = Term::Kind::AlphaRead;
      lhs.side = side;
      lhs.track = tr;
      c.eat("(");
      lhs.name = c.ident();
      if (c.try_eat("[")) {
        lhs.index = parse_int_term(c);
        c.eat("]");
      }
      c.eat(")");
      // allow arithmetic continuation on the left side
      TermPtr t = mkterm(std::move(lhs));
      for (;;) {
        char op;
        if (c.try_eat("+")) op = '+';
        else if (c.try_eat("-")) op = '-';
        else if (c.try_eat("*")) op = '*';
        else if (c.try_eat("/")) op = '/';
        else if (c.try_eat("%")) op = '%';
        else break;
        Term n;
        n.kind = Term::Kind::Arith;
        n.arith_op = op;
        n.a = t;
        n.b = parse_int_mul(c);
        t = mkterm(std::move(n));
      }
      Formula f;
      f.kind = Formula::Kind::IntCmp;
      f.a = t;
      f.cmp = parse_cmp_op(c);
      f.b = parse_int_term(c);
      return mkf(std::move(f));
    }
    // whole-store expression, possibly updated
    AlphaExprPtr lhs = parse_alpha_updates(c, side, tr);
    Formula f;
    f.kind = Formula::Kind::AlphaEq;
    f.alpha_a = lhs;
    f.cmp = parse_cmp_op(c);
    if (f.cmp != Formula::Cmp::Eq && f.cmp != Formula::Cmp::Ne)
      c.fail("stores support = and != only");
    Side rside;
    if (!try_side(c, rside))
      c.fail("expected src/tgt store on the right of a store equality");
    TrackRef rtr = parse_track_sel(c);
    c.eat(".");
    c.eat("alpha");
    f.alpha_b = parse_alpha_updates(c, rside, rtr);
    return mkf(std::move(f));
  }
  // whole-config equality
  Formula f;
  f.kind = Formula::Kind::ConfigEq;
  f.cside_a = side;
  f.ctrack_a = tr;
  Formula::Cmp cmp = parse_cmp_op(c);
  if (cmp != Formula::Cmp::Eq)
    c.fail("configurations support = only");
  Side rside;
  if (!try_side(c, rside))
    c.fail("expected src/tgt on the right of a configuration equality");
  f.cside_b = rside;
  f.ctrack_b = parse_track_sel(c);
  return mkf(std::move(f));
}

FormulaPtr parse_primary_formula(WCursor &c) {
  c.skip_ws();
  if (c.peek_is('(')) {
    std::size_t save = c.i;
    try {
      c.eat("(");
      FormulaPtr f = parse_formula(c);
      c.eat(")");
      if (c.try_eat("?")) {
        Formula t;
        t.kind = Formula::Kind::CondF;
        t.f = f;
        t.g = parse_formula(c);
        c.eat(":");
        t.h = parse_formula(c);
        return mkf(std::move(t));
      }
      return f;
    } catch (const ParseError &) {
    }
    // an integer comparison starting with a parenthesized term
    c.i = save;
    Formula f;
    f.kind = Formula::Kind::IntCmp;
    f.a = parse_int_term(c);
    f.cmp = parse_cmp_op(c);
    f.b = parse_int_term(c);
    return mkf(std::move(f));
  }
  if (c.try_eat("!")) {
    Formula f;
    f.kind = Formula::Kind::Not;
    f.f = parse_primary_formula(c);
    return mkf(std::move(f));
  }
  if (c.try_eat("true"))
    return mkf(Formula{});
  if (c.try_eat("false")) {
    Formula f;
    f.kind = Formula::Kind::False;
    return mkf(std::move(f));
  }
  if (c.try_eat("alltracks")) {
    c.eat("(");
    Formula f;
    f.kind = Formula::Kind::AllTracks;
    f.body = parse_formula(c);
    c.eat(")");
    return mkf(std::move(f));
  }
  if (c.try_eat("eqvars")) {
    c.eat("(");
    Formula f;
    f.kind = Formula::Kind::EqVars;
    Side aside;
    if (!try_side(c, aside))
      c.fail("expected src/tgt in eqvars");
    TrackRef atr = parse_track_sel(c);
    f.alpha_a = std::make_shared<AlphaExpr>(AlphaExpr{aside, atr, {}});
    c.eat(",");
    Side bside;
    if (!try_side(c, bside))
      c.fail("expected src/tgt in eqvars");
    TrackRef btr = parse_track_sel(c);
    f.alpha_b = std::make_shared<AlphaExpr>(AlphaExpr{bside, btr, {}});
    c.eat(",");
    f.names.push_back(c.ident());
    while (!c.peek_is(')'))
      f.names.push_back(c.ident());
    c.eat(")");
    return mkf(std::move(f));
  }
  if (c.try_eat("Delta")) {
    c.eat("(");
    Formula f;
    f.kind = Formula::Kind::DeltaAtom;
    f.from_state = state_term(c);
    c.eat(",");
    c.eat("(");
    f.symbol.push_back(parse_event_literal(c));
    while (c.try_eat(","))
      f.symbol.push_back(parse_event_literal(c));
    c.eat(")");
    c.eat(",");
    f.to_state = state_term(c);
    c.eat(")");
    return mkf(std::move(f));
  }
  if (c.try_eat("qT") || c.try_eat("qS")) {
    // rewind a bit: easier to parse via state_term
    c.i -= 2;
    Formula f;
    f.kind = Formula::Kind::StateCmp;
    f.a = state_term(c);
    f.cmp = parse_cmp_op(c);
    if (f.cmp != Formula::Cmp::Eq && f.cmp != Formula::Cmp::Ne)
      c.fail("automaton states support = and != only");
    f.b = state_term(c);
    return mkf(std::move(f));
  }
  Side side;
  if (try_side(c, side))
    return parse_side_atom(c, side);
  // pair-set relation: Name(locterm, locterm)
  std::size_t save = c.i;
  std::string name = c.ident();
  if (c.peek_is('(')) {
    Formula f;
    f.kind = Formula::Kind::PairRel;
    f.rel_name = name;
    c.eat("(");
    auto loc_term = [&]() -> TermPtr {
      Side s2;
      if (try_side(c, s2)) {
        TrackRef tr = parse_track_sel(c);
        c.eat(".");
        c.eat("loc");
        Term t;
        t.kind = Term::Kind::LocRef;
        t.side = s2;
        t.track = tr;
        return mkterm(std::move(t));
      }
      Term t;
      t.kind = Term::Kind::LocLit;
      t.name = c.ident();
      return mkterm(std::move(t));
    };
    f.a = loc_term();
    c.eat(",");
    f.b = loc_term();
    c.eat(")");
    return mkf(std::move(f));
  }
  c.i = save;
  // fall back to an integer comparison (numbers, tracksum, ...)
  Formula f;
  f.kind = Formula::Kind::IntCmp;
  f.a = parse_int_term(c);
  f.cmp = parse_cmp_op(c);
  f.b = parse_int_term(c);
  return mkf(std::move(f));
}

FormulaPtr parse_and_f(WCursor &c) {
  FormulaPtr f = parse_primary_formula(c);
  while (c.try_eat("&&")) {
    Formula n;
    n.kind = Formula::Kind::And;
    n.f = f;
    n.g = parse_primary_formula(c);
    f = mkf(std::move(n));
  }
  return f;
}

FormulaPtr parse_or_f(WCursor &c) {
  FormulaPtr f = parse_and_f(c);
  while (c.try_eat("||")) {
    Formula n;
    n.kind = Formula::Kind::Or;
    n.f = f;
    n.g = parse_and_f(c);
    f = mkf(std::move(n));
  }
  return f;
}

FormulaPtr parse_formula(WCursor &c) {
  FormulaPtr f = parse_or_f(c);
  if (c.try_eat("->")) {
    Formula n;
    n.kind = Formula::Kind::Implies;
    n.f = f;
    n.g = parse_formula(c);
    return mkf(std::move(n));
  }
  return f;
}

} // namespace

RefinementWitness parse_witness(const std::string &text) {
  WCursor c{text};
  RefinementWitness w;
  c.eat("witness");
  c.eat("for");
  w.property_name = c.ident();
  c.eat("{");
  while (!c.try_eat("}")) {
    if (c.try_eat("R")) {
      c.eat(":");
      w.R = parse_formula(c);
      c.eat(";");
    } else if (c.try_eat("I")) {
      c.eat(":");
      if (c.try_eat("inputs"))
        w.input_set = InputSet::Inputs;
      else if (c.try_eat("io"))
        w.input_set = InputSet::IO;
      else if (c.try_eat("all"))
        w.input_set = InputSet::All;
      else if (c.try_eat("none"))
        w.input_set = InputSet::None;
      else
        c.fail("expected inputs|io|all|none");
      c.eat(";");
    } else if (c.try_eat("stutter")) {
      c.eat(":");
      StutterSpec st;
      if (c.try_eat("source"))
        st.side = StutterSpec::Who::Source;
      else if (c.try_eat("target"))
        st.side = StutterSpec::Who::Target;
      else if (c.try_eat("both"))
        st.side = StutterSpec::Who::Both;
      else
        c.fail("expected source|target|both");
      c.eat(",");
      c.eat("rank");
      st.rank = parse_int_term(c);
      c.eat(",");
      c.eat("bound");
      st.bound = static_cast<int>(c.number());
      c.eat(";");
      w.stutter = std::move(st);
    } else if (c.try_eat("bisim")) {
      c.eat(":");
      w.bisim = parse_formula(c);
      c.eat(";");
    } else if (c.try_eat("pairs")) {
      std::string name = c.ident();
      c.eat(":=");
      c.eat("{");
      PairSet ps;
      if (!c.try_eat("}")) {
        for (;;) {
          c.eat("(");
          std::string a = c.ident();
          c.eat(",");
          std::string b = c.ident();
          c.eat(")");
          ps.pairs.push_back({a, b});
          if (c.try_eat(","))
            continue;
          c.eat("}");
          break;
        }
      }
      c.eat(";");
      w.pair_sets[name] = std::move(ps);
    } else if (c.try_eat("skolem")) {
      std::string which = c.ident();
      c.eat(":=");
      std::string term = c.ident();
      c.eat(";");
      if (which == "sigmaS")
        w.skolems.sigmaS = term;
      else if (which == "pS")
        w.skolems.pS = term;
      else if (which == "sPrime")
        w.skolems.sPrime = term;
      else
        c.fail("unknown skolem target: " + which);
    } else if (c.try_eat("universal_only")) {
      c.eat(";");
      w.universal_only = true;
    } else {
      c.fail("unexpected witness entry");
    }
  }
  if (!c.eof())
    c.fail("trailing input after witness");
  if (!w.R)
    throw ParseError(1, 1, "witness has no R formula");
  return w;
}

// --- printing -------------------------------------------------------------------

namespace {

const char *cmp_token(Formula::Cmp c) {
  switch (c) {
  case Formula::Cmp::Eq: return "=";
  case Formula::Cmp::Ne: return "!=";
  case Formula::Cmp::Lt: return "<";
  case Formula::Cmp::Le: return "<=";
  case Formula::Cmp::Gt: return ">";
  case Formula::Cmp::Ge: return ">=";
  }
  return "=";
}

std::string track_str(const TrackRef &t) {
  if (t.bound)
    return "[i]";
  return "[" + std::to_string(t.index) + "]";
}

std::string side_str(Side s) { return s == Side::Src ? "src" : "tgt"; }

std::string alpha_str(const AlphaExpr &a) {
  std::string out = side_str(a.side) + track_str(a.track) + ".alpha";
  for (auto &up : a.updates) {
    out += "[" + up.name;
    if (up.is_array)
      out += "[" + to_string(*up.index) + "]";
    out += " := " + to_string(*up.value) + "]";
  }
  return out;
}

} // namespace

std::string to_string(const Term &t) {
  using K = Term::Kind;
  switch (t.kind) {
  case K::IntLit:
    return std::to_string(t.value);
  case K::AlphaRead: {
    std::string out =
        side_str(t.side) + track_str(t.track) + ".alpha(" + t.name;
    if (t.index)
      out += "[" + to_string(*t.index) + "]";
    return out + ")";
  }
  case K::Arith:
    return "(" + to_string(*t.a) + " " + std::string(1, t.arith_op) + " " +
           to_string(*t.b) + ")";
  case K::CondT:
    return "(" + to_string(*t.cond) + ") ? " + to_string(*t.a) + " : " +
           to_string(*t.b);
  case K::TrackSum:
    return "tracksum(" + to_string(*t.a) + ")";
  case K::LocRef:
    return side_str(t.side) + track_str(t.track) + ".loc";
  case K::LocLit:
    return t.name;
  case K::StateRef:
    return t.value == 0 ? "qT" : "qS";
  case K::StateLit:
    return t.name;
  }
  return "?";
}

std::string to_string(const Formula &f) {
  using K = Formula::Kind;
  switch (f.kind) {
  case K::True:
    return "true";
  case K::False:
    return "false";
  case K::Not:
    return "!(" + to_string(*f.f) + ")";
  case K::And:
    return "(" + to_string(*f.f) + ") && (" + to_string(*f.g) + ")";
  case K::Or:
    return "(" + to_string(*f.f) + ") || (" + to_string(*f.g) + ")";
  case K::Implies:
    return "(" + to_string(*f.f) + ") -> (" + to_string(*f.g) + ")";
  case K::CondF:
    return "(" + to_string(*f.f) + ") ? (" + to_string(*f.g) + ") : (" +
           to_string(*f.h) + ")";
  case K::IntCmp:
  case K::LocCmp:
  case K::StateCmp:
    return to_string(*f.a) + " " + cmp_token(f.cmp) + " " + to_string(*f.b);
  case K::AlphaEq:
    return alpha_str(*f.alpha_a) + " " + cmp_token(f.cmp) + " " +
           alpha_str(*f.alpha_b);
  case K::ConfigEq:
    return side_str(f.cside_a) + track_str(f.ctrack_a) + " = " +
           side_str(f.cside_b) + track_str(f.ctrack_b);
  case K::EqVars: {
    std::string out = "eqvars(" + side_str(f.alpha_a->side) +
                      track_str(f.alpha_a->track) + ", " +
                      side_str(f.alpha_b->side) + track_str(f.alpha_b->track);
    out += ",";
    for (auto &n : f.names)
      out += " " + n;
    return out + ")";
  }
  case K::PairRel:
    return f.rel_name + "(" + to_string(*f.a) + ", " + to_string(*f.b) + ")";
  case K::DeltaAtom: {
    std::string out = "Delta(" + to_string(*f.from_state) + ", (";
    for (std::size_t i = 0; i < f.symbol.size(); ++i) {
      if (i)
        out += ", ";
      const auto &e = f.symbol[i];
      using secir::EvKind;
      switch (e.kind) {
      case EvKind::Eps: out += "eps"; break;
      case EvKind::Bot: out += "bot"; break;
      case EvKind::Input:
        out += "in(" + std::string(secir::to_string(e.chan)) + "," +
               std::to_string(e.value) + ")";
        break;
      case EvKind::Output:
        out += "out(" + std::string(secir::to_string(e.chan)) + "," +
               std::to_string(e.value) + ")";
        break;
      case EvKind::Ext:
        if (e.tag == secir::ExtTag::Branch)
          out += "branch(" + std::to_string(e.value) + ")";
        else
          out += "mem(" + e.accesses[0].first + "," +
                 std::to_string(e.accesses[0].second) + ")";
        break;
      }
    }
    return out + "), " + to_string(*f.to_state) + ")";
  }
  case K::AllTracks:
    return "alltracks(" + to_string(*f.body) + ")";
  }
  return "true";
}

std::string print_witness(const RefinementWitness &w) {
  std::ostringstream os;
  os << "witness for " << w.property_name << " {\n";
  os << "  R: " << to_string(*w.R) << ";\n";
  const char *iset = w.input_set == InputSet::Inputs ? "inputs"
                     : w.input_set == InputSet::IO   ? "io"
                     : w.input_set == InputSet::All  ? "all"
                                                     : "none";
  os << "  I: " << iset << ";\n";
  if (w.stutter) {
    const char *side = w.stutter->side == StutterSpec::Who::Source ? "source"
                       : w.stutter->side == StutterSpec::Who::Target
                           ? "target"
                           : "both";
    os << "  stutter: " << side << ", rank " << to_string(*w.stutter->rank)
       << ", bound " << w.stutter->bound << ";\n";
  }
  if (w.bisim)
    os << "  bisim: " << to_string(*w.bisim) << ";\n";
  for (auto &[name, ps] : w.pair_sets) {
    os << "  pairs " << name << " := { ";
    for (std::size_t i = 0; i < ps.pairs.size(); ++i) {
      if (i)
        os << ", ";
      os << "(" << ps.pairs[i].first << "," << ps.pairs[i].second << ")";
    }
    os << " };\n";
  }
  if (w.skolems.sigmaS != "sigmaT")
    os << "  skolem sigmaS := " << w.skolems.sigmaS << ";\n";
  if (w.skolems.pS != "pT")
    os << "  skolem pS := " << w.skolems.pS << ";\n";
  if (w.skolems.sPrime != "tPrime")
    os << "  skolem sPrime := " << w.skolems.sPrime << ";\n";
  if (w.universal_only)
    os << "  universal_only;\n";
  os << "}\n";
  return os.str();
}

BisimWitness bisim_of(const RefinementWitness &w) {
  BisimWitness b;
  b.B = w.bisim;
  b.pair_sets = w.pair_sets;
  b.stutter = w.stutter;
  return b;
}

} // namespace secwit::refinement
