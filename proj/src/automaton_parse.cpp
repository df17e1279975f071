#include <cctype>
#include <sstream>

#include "secwit/bundle_automaton.hpp"

// Automaton text format:
//   automaton <name> tracks <k>
//   state <q> [initial] [accepting]
//   trans <q> -> <q'> when <guard>
// Guard atoms: true, false, kind(i)=input|output|ext|bot|eps,
// chan(i)=secret|public, tag(i)=mem|branch|init|final, val(i) OP val(j),
// val(i) OP <int>, agree(i,j,inputs|outputs|low|all); connectives ! && || ().

namespace secwit::bundle {

namespace {

struct GCursor {
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
  bool try_eat(const std::string &tok) {
    skip_ws();
    if (s.compare(i, tok.size(), tok) != 0)
      return false;
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

GuardPtr mk(Guard g) { return std::make_shared<Guard>(std::move(g)); }

int parse_track(GCursor &c, int k) {
  c.eat("(");
  int t = c.number();
  if (t < 1 || t > k)
    c.fail("track index " + std::to_string(t) + " out of range for k=" +
           std::to_string(k));
  return t;
}

Guard::Cmp parse_cmp(GCursor &c) {
  if (c.try_eat("!=")) return Guard::Cmp::Ne;
  if (c.try_eat("<=")) return Guard::Cmp::Le;
  if (c.try_eat(">=")) return Guard::Cmp::Ge;
  if (c.try_eat("=")) return Guard::Cmp::Eq;
  if (c.try_eat("<")) return Guard::Cmp::Lt;
  if (c.try_eat(">")) return Guard::Cmp::Gt;
  c.fail("expected comparison operator");
}

GuardPtr parse_or(GCursor &c, int k);

GuardPtr parse_atom(GCursor &c, int k) {
  if (c.try_eat("(")) {
    GuardPtr g = parse_or(c, k);
    c.eat(")");
    return g;
  }
  if (c.try_eat("!")) {
    Guard g;
    g.kind = Guard::Kind::Not;
    g.a = parse_atom(c, k);
    return mk(std::move(g));
  }
  if (c.try_eat("true"))
    return mk(Guard{});
  if (c.try_eat("false")) {
    Guard g;
    g.kind = Guard::Kind::False;
    return mk(std::move(g));
  }
  if (c.try_eat("kind")) {
    Guard g;
    g.kind = Guard::Kind::KindIs;
    g.track = parse_track(c, k);
    c.eat(")");
    c.eat("=");
    if (c.try_eat("input")) g.ev_kind = secir::EvKind::Input;
    else if (c.try_eat("output")) g.ev_kind = secir::EvKind::Output;
    else if (c.try_eat("ext")) g.ev_kind = secir::EvKind::Ext;
    else if (c.try_eat("bot")) g.ev_kind = secir::EvKind::Bot;
    else if (c.try_eat("eps")) g.ev_kind = secir::EvKind::Eps;
    else c.fail("expected event kind");
    return mk(std::move(g));
  }
  if (c.try_eat("chan")) {
    Guard g;
    g.kind = Guard::Kind::ChanIs;
    g.track = parse_track(c, k);
    c.eat(")");
    c.eat("=");
    if (c.try_eat("secret")) g.chan = secir::Channel::Secret;
    else if (c.try_eat("public")) g.chan = secir::Channel::Public;
    else c.fail("expected channel");
    return mk(std::move(g));
  }
  if (c.try_eat("tag")) {
    Guard g;
    g.kind = Guard::Kind::TagIs;
    g.track = parse_track(c, k);
    c.eat(")");
    c.eat("=");
    if (c.try_eat("mem")) g.tag = secir::ExtTag::Mem;
    else if (c.try_eat("branch")) g.tag = secir::ExtTag::Branch;
    else if (c.try_eat("init")) g.tag = secir::ExtTag::Init;
    else if (c.try_eat("final")) g.tag = secir::ExtTag::Final;
    else c.fail("expected ext tag");
    return mk(std::move(g));
  }
  if (c.try_eat("val")) {
    Guard g;
    g.kind = Guard::Kind::ValCmp;
    g.track = parse_track(c, k);
    c.eat(")");
    g.cmp = parse_cmp(c);
    if (c.try_eat("val")) {
      g.rhs_is_track = true;
      g.track2 = parse_track(c, k);
      c.eat(")");
    } else {
      g.literal = c.number();
    }
    return mk(std::move(g));
  }
  if (c.try_eat("agree")) {
    Guard g;
    g.kind = Guard::Kind::Agree;
    g.track = parse_track(c, k);
    c.eat(",");
    g.track2 = c.number();
    if (g.track2 < 1 || g.track2 > k)
      c.fail("track index out of range");
    c.eat(",");
    if (c.try_eat("inputs")) g.gamma = Guard::Gamma::Inputs;
    else if (c.try_eat("outputs")) g.gamma = Guard::Gamma::Outputs;
    else if (c.try_eat("low")) g.gamma = Guard::Gamma::Low;
    else if (c.try_eat("all")) g.gamma = Guard::Gamma::All;
    else c.fail("expected symbol class inputs|outputs|low|all");
    c.eat(")");
    return mk(std::move(g));
  }
  c.fail("expected guard atom");
}

GuardPtr parse_and_g(GCursor &c, int k) {
  GuardPtr g = parse_atom(c, k);
  while (c.try_eat("&&")) {
    Guard h;
    h.kind = Guard::Kind::And;
    h.a = g;
    h.b = parse_atom(c, k);
    g = mk(std::move(h));
  }
  return g;
}

GuardPtr parse_or(GCursor &c, int k) {
  GuardPtr g = parse_and_g(c, k);
  while (c.try_eat("||")) {
    Guard h;
    h.kind = Guard::Kind::Or;
    h.a = g;
    h.b = parse_and_g(c, k);
    g = mk(std::move(h));
  }
  return g;
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

const char *cmp_token(Guard::Cmp c) {
  switch (c) {
  case Guard::Cmp::Eq: return "=";
  case Guard::Cmp::Ne: return "!=";
  case Guard::Cmp::Lt: return "<";
  case Guard::Cmp::Le: return "<=";
  case Guard::Cmp::Gt: return ">";
  case Guard::Cmp::Ge: return ">=";
  }
  return "=";
}

} // namespace

GuardPtr parse_guard(const std::string &text, int k) {
  GCursor c{text, 1};
  GuardPtr g = parse_or(c, k);
  if (!c.eof())
    c.fail("trailing input after guard");
  return g;
}

std::string to_string(const Guard &g) {
  using K = Guard::Kind;
  switch (g.kind) {
  case K::True:
    return "true";
  case K::False:
    return "false";
  case K::Not:
    return "!(" + to_string(*g.a) + ")";
  case K::And:
    return "(" + to_string(*g.a) + ") && (" + to_string(*g.b) + ")";
  case K::Or:
    return "(" + to_string(*g.a) + ") || (" + to_string(*g.b) + ")";
  case K::KindIs:
    return "kind(" + std::to_string(g.track) +
           ")=" + secir::to_string(g.ev_kind);
  case K::ChanIs:
    return "chan(" + std::to_string(g.track) + ")=" + secir::to_string(g.chan);
  case K::TagIs:
    return "tag(" + std::to_string(g.track) + ")=" + secir::to_string(g.tag);
  case K::ValCmp: {
    std::string rhs = g.rhs_is_track
                          ? "val(" + std::to_string(g.track2) + ")"
                          : std::to_string(g.literal);
    return "val(" + std::to_string(g.track) + ")" + cmp_token(g.cmp) + rhs;
  }
  case K::Agree: {
    const char *gs = g.gamma == Guard::Gamma::Inputs    ? "inputs"
                     : g.gamma == Guard::Gamma::Outputs ? "outputs"
                     : g.gamma == Guard::Gamma::Low     ? "low"
                                                        : "all";
    return "agree(" + std::to_string(g.track) + "," +
           std::to_string(g.track2) + "," + gs + ")";
  }
  }
  return "true";
}

BundleAutomaton parse_automaton(const std::string &text) {
  BundleAutomaton a;
  std::istringstream in(text);
  std::string raw;
  int lineno = 0;
  bool saw_header = false, saw_initial = false;
  struct PendingTrans {
    std::string from, to, guard;
    int line;
  };
  std::vector<PendingTrans> pending;
  while (std::getline(in, raw)) {
    ++lineno;
    std::string body = strip_comment(raw);
    if (blank(body))
      continue;
    GCursor c{body, lineno};
    if (!saw_header) {
      c.eat("automaton");
      a.name = c.ident();
      c.eat("tracks");
      a.k = c.number();
      if (a.k < 1)
        c.fail("tracks must be at least 1");
      saw_header = true;
      continue;
    }
    if (c.try_eat("state")) {
      std::string n = c.ident();
      for (auto &s : a.states)
        if (s == n)
          c.fail("duplicate state: " + n);
      a.states.push_back(n);
      a.accepting.push_back(false);
      for (;;) {
        if (c.try_eat("initial")) {
          if (saw_initial)
            c.fail("more than one initial state");
          saw_initial = true;
          a.initial = static_cast<int>(a.states.size()) - 1;
        } else if (c.try_eat("accepting")) {
          a.accepting.back() = true;
        } else {
          break;
        }
      }
      if (!c.eof())
        c.fail("trailing input after state");
      continue;
    }
    if (c.try_eat("trans")) {
      PendingTrans t;
      t.from = c.ident();
      c.eat("->");
      t.to = c.ident();
      c.eat("when");
      c.skip_ws();
      t.guard = body.substr(c.i);
      t.line = lineno;
      pending.push_back(std::move(t));
      continue;
    }
    c.fail("expected 'state' or 'trans'");
  }
  if (!saw_header)
    throw ParseError(1, 1, "missing 'automaton <name> tracks <k>' header");
  if (a.states.empty())
    throw ParseError(lineno, 1, "automaton has no states");
  if (!saw_initial)
    throw ParseError(lineno, 1, "automaton has no initial state");
  for (auto &t : pending) {
    Transition tr;
    try {
      tr.from = a.state_index(t.from);
      tr.to = a.state_index(t.to);
    } catch (const ConfigError &e) {
      throw ParseError(t.line, 1, e.what());
    }
    GCursor c{t.guard, t.line};
    tr.guard = parse_or(c, a.k);
    if (!c.eof())
      c.fail("trailing input after guard");
    a.transitions.push_back(std::move(tr));
  }
  return a;
}

std::string print_automaton(const BundleAutomaton &a) {
  std::ostringstream os;
  os << "automaton " << a.name << " tracks " << a.k << "\n";
  for (std::size_t i = 0; i < a.states.size(); ++i) {
    os << "state " << a.states[i];
    if (static_cast<int>(i) == a.initial)
      os << " initial";
    if (a.accepting[i])
      os << " accepting";
    os << "\n";
  }
  for (auto &t : a.transitions)
    os << "trans " << a.states[static_cast<std::size_t>(t.from)] << " -> "
       << a.states[static_cast<std::size_t>(t.to)] << " when "
       << to_string(*t.guard) << "\n";
  return os.str();
}

} // namespace secwit::bundle
