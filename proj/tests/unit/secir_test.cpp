#include <doctest.h>

#include <random>
#include <set>

#include "secwit/secir.hpp"
#include "secwit/traceops.hpp"

#include "gen.hpp"

using namespace secwit;
using namespace secwit::secir;

namespace {

const char *kFoldingSource = R"(
program source domain 4
var x
var y
var z
L1: x := input(secret)
L2: y := 42
L3: z := y - 41
L4: x := x * (z - 1)
)";

Program folding_source(int domain = 4) {
  Program p = parse_program(kFoldingSource);
  p.domain = domain;
  p.finalize();
  return p;
}

} // namespace

TEST_CASE("parse the worked example") {
  Program p = folding_source();
  CHECK(p.name == "source");
  CHECK(p.domain == 4);
  CHECK(p.labels == std::vector<std::string>{"L1", "L2", "L3", "L4"});
  CHECK(p.vars == std::vector<std::string>{"x", "y", "z"});
  CHECK(p.end_loc() == 4);
  CHECK(p.label_of(4) == "End");
  // round-trips through the printer
  Program q = parse_program(print_program(p));
  CHECK(print_program(q) == print_program(p));
}

TEST_CASE("parse errors") {
  CHECK_THROWS_AS(parse_program("program p domain 4\nL1: goto L9\n"),
                  ParseError);
  CHECK_THROWS_AS(parse_program("program p domain 4\nL1: x := 1\n"),
                  ParseError); // undeclared
  CHECK_THROWS_AS(parse_program("program p domain 4\nvar x\nL1: x = 1\n"),
                  ParseError); // := required
  CHECK_THROWS_AS(parse_program("program p domain 4\nL1: goto L1\n"),
                  ParseError); // silent cycle
  CHECK_THROWS_AS(
      parse_program("program p domain 4\nvar x\nL1: x := 1\nL1: skip\n"),
      ParseError); // duplicate label
  // a cycle with an output in it is fine
  CHECK_NOTHROW(parse_program(
      "program p domain 4\nL1: output(public, 1)\nL2: goto L1\n"));
}

TEST_CASE("empty program") {
  Program p = parse_program("program empty domain 4\n");
  AttackModel io = attack_model_by_name("io");
  Config c = initial_config(p, io);
  CHECK(c.loc == p.end_loc());
  CHECK(c.alpha.empty());
  auto succs = step(p, io, c);
  REQUIRE(succs.size() == 1);
  CHECK(succs[0].first == Event::bot());
  CHECK(succs[0].second == c);
}

TEST_CASE("initial config") {
  Program p = folding_source();
  Config c = initial_config(p);
  CHECK(c.loc == 0);
  CHECK(c.alpha == std::vector<int>{0, 0, 0});

  Program q = parse_program("program q domain 4\narray a[2]\nL1: skip\n");
  Config cq = initial_config(q);
  CHECK(cq.alpha == std::vector<int>{0, 0});
}

TEST_CASE("step") {
  Program p = folding_source();
  AttackModel io = attack_model_by_name("io");
  Config c = initial_config(p, io);

  auto succs = step(p, io, c);
  REQUIRE(succs.size() == 4);
  for (int v = 0; v < 4; ++v) {
    CHECK(succs[v].first == Event::input(Channel::Secret, v));
    CHECK(succs[v].second.loc == 1);
    CHECK(succs[v].second.alpha[0] == v);
  }

  // run to the end: y = 42 mod 4 = 2, z = (2-41) mod 4 = 1, x = v*(1-1) = 0
  Config cur = succs[3].second;
  for (int i = 0; i < 3; ++i) {
    auto s = step(p, io, cur);
    REQUIRE(s.size() == 1);
    CHECK(s[0].first == Event::eps());
    cur = s[0].second;
  }
  CHECK(cur.loc == p.end_loc());
  CHECK(cur.alpha == std::vector<int>{0, 2, 1});
  auto at_end = step(p, io, cur);
  REQUIRE(at_end.size() == 1);
  CHECK(at_end[0].first == Event::bot());
  CHECK(at_end[0].second == cur);

  Program skipper = parse_program("program s domain 4\nL1: skip\n");
  auto sk = step(skipper, io, initial_config(skipper, io));
  REQUIRE(sk.size() == 1);
  CHECK(sk[0].first == Event::eps());
}

TEST_CASE("final_memory model exposes memory around the run") {
  Program p = folding_source();
  AttackModel fm = attack_model_by_name("final_memory", {"x", "y", "z"});
  Config c = initial_config(p, fm);
  CHECK(c.phase == 0);
  auto first = step(p, fm, c);
  REQUIRE(first.size() == 1);
  CHECK(first[0].first ==
        Event::exposure(ExtTag::Init, {{"x", 0}, {"y", 0}, {"z", 0}}));
  CHECK(first[0].second.phase == 1);
  CHECK(first[0].second.loc == 0);

  // drive one run to End and check the one-shot final exposure
  Config cur = first[0].second;
  cur = step(p, fm, cur)[2].second; // input 2
  for (int i = 0; i < 3; ++i)
    cur = step(p, fm, cur)[0].second;
  REQUIRE(cur.loc == p.end_loc());
  auto fin = step(p, fm, cur);
  REQUIRE(fin.size() == 1);
  CHECK(fin[0].first ==
        Event::exposure(ExtTag::Final, {{"x", 0}, {"y", 2}, {"z", 1}}));
  auto after = step(p, fm, fin[0].second);
  REQUIRE(after.size() == 1);
  CHECK(after[0].first == Event::bot());
}

TEST_CASE("mem access model") {
  Program p = parse_program(R"(
program m domain 4
var j
array arr[2]
L1: j := input(secret)
L2: j := arr[j] + arr[1]
L3: arr[j] := 0
)");
  AttackModel mm = attack_model_by_name("mem");
  Config c = initial_config(p, mm);
  Config c1 = step(p, mm, c)[1].second; // j = 1
  auto s2 = step(p, mm, c1);
  REQUIRE(s2.size() == 1);
  CHECK(s2[0].first == Event::mem({{"arr", 1}})); // both reads hit index 1
  auto s3 = step(p, mm, s2[0].second);
  // j = arr[1]+arr[1] = 0; store writes arr[0]
  CHECK(s3[0].first == Event::mem({{"arr", 0}}));
}

TEST_CASE("index wrap and division totality") {
  Program p = parse_program(R"(
program w domain 4
var x
array a[2]
L1: a[3] := 2
L2: x := a[1] / 0
L3: x := a[1] % 0
)");
  AttackModel io = attack_model_by_name("io");
  Config c = initial_config(p, io);
  c = step(p, io, c)[0].second;
  CHECK(c.alpha == std::vector<int>{0, 0, 2}); // a[3 mod 2] = a[1]
  c = step(p, io, c)[0].second;
  CHECK(c.alpha[0] == 0); // x = 2/0 = 0
  c = step(p, io, c)[0].second;
  CHECK(c.alpha[0] == 0);
}

TEST_CASE("block executes atomically with one event") {
  Program p = parse_program(R"(
program b domain 4
var x
var y
L1: { x := 2; y := x + 1; output(public, y) }
)");
  AttackModel io = attack_model_by_name("io");
  auto succs = step(p, io, initial_config(p, io));
  REQUIRE(succs.size() == 1);
  CHECK(succs[0].first == Event::output(Channel::Public, 3));
  CHECK(succs[0].second.alpha == std::vector<int>{2, 3});

  // two outputs in one block is rejected already at parse (io model)
  CHECK_THROWS_AS(parse_program(R"(
program b2 domain 4
L1: { output(public, 1); output(public, 2) }
)"),
                  ParseError);

  // memory accesses of a block merge into a single canonical event
  Program mb = parse_program(R"(
program b3 domain 4
var t0
var t1
array a[2]
L1: { t0 := a[1]; t1 := a[0] }
)");
  AttackModel mm = attack_model_by_name("mem");
  auto ms = step(mb, mm, initial_config(mb, mm));
  REQUIRE(ms.size() == 1);
  CHECK(ms[0].first == Event::mem({{"a", 0}, {"a", 1}}));
}

TEST_CASE("choice branches silently") {
  Program p = parse_program(R"(
program c domain 4
L1: choose L2 or L3
L2: output(public, 1)
L3: output(public, 2)
)");
  AttackModel io = attack_model_by_name("io");
  auto succs = step(p, io, initial_config(p, io));
  REQUIRE(succs.size() == 2);
  CHECK(succs[0].first == Event::eps());
  CHECK(succs[1].first == Event::eps());
  CHECK(succs[0].second.loc != succs[1].second.loc);
}

TEST_CASE("enumerate lassos on the worked example") {
  Program p = folding_source(2);
  AttackModel io = attack_model_by_name("io");
  auto set = enumerate_lassos(p, io, 8, 2);
  REQUIRE(set.complete);
  REQUIRE(set.lassos.size() == 2);
  for (auto &x : set.lassos) {
    validate_lasso(p, io, x);
    REQUIRE(x.loop.size() == 1);
    CHECK(x.loop[0].ev == Event::bot());
    CHECK(x.loop[0].from == x.loop[0].to);
    // stem: input then three silent assignments
    REQUIRE(x.stem.size() == 4);
    CHECK(x.stem[0].ev.kind == EvKind::Input);
  }
  // the two lassos differ exactly in the secret input value
  CHECK(set.lassos[0].stem[0].ev != set.lassos[1].stem[0].ev);
}

TEST_CASE("enumerate lassos, straight line and loops") {
  AttackModel io = attack_model_by_name("io");
  Program s = parse_program("program s domain 2\nL1: skip\nL2: halt\n");
  auto set = enumerate_lassos(s, io, 6, 2);
  CHECK(set.lassos.size() == 1);

  Program loop = parse_program(
      "program l domain 2\nL1: output(public, 1)\nL2: goto L1\n");
  auto lset = enumerate_lassos(loop, io, 6, 4);
  REQUIRE(lset.lassos.size() == 1);
  auto &x = lset.lassos[0];
  CHECK(x.stem.empty());
  REQUIRE(x.loop.size() == 2);
  CHECK(x.loop[0].ev == Event::output(Channel::Public, 1));

  // budget exhaustion is reported, not silently wrong
  Budget tiny(3);
  auto bset = enumerate_lassos(folding_source(4), io, 8, 2, &tiny);
  CHECK_FALSE(bset.complete);
  CHECK(bset.note.find("budget") != std::string::npos);
}

TEST_CASE("trace_of and compression") {
  Program p = folding_source(2);
  AttackModel io = attack_model_by_name("io");
  auto set = enumerate_lassos(p, io, 8, 2);
  REQUIRE(set.lassos.size() == 2);
  auto w = trace_of(set.lassos[0]);
  REQUIRE(w.stem.size() == 4);
  CHECK(w.loop == std::vector<Event>{Event::bot()});
  auto c = traceops::compress(w);
  CHECK(c.stem.size() == 1); // only the input survives
  CHECK(c.loop == std::vector<Event>{Event::bot()});
  auto states = states_of(set.lassos[0]);
  CHECK(states.stem.size() == 4);

  // an all-eps loop is rejected by the lasso invariant
  LassoExecution bad;
  Config c0 = initial_config(p, io);
  bad.loop.push_back({c0, Event::eps(), c0});
  CHECK_THROWS_AS(validate_lasso(p, io, bad), ConfigError);
}

TEST_CASE("program_has_trace") {
  Program p = folding_source(2);
  AttackModel io = attack_model_by_name("io");
  for (auto &x : enumerate_lassos(p, io, 8, 2).lassos)
    CHECK(program_has_trace(p, io, trace_of(x)));
  traceops::UPWord<Event> not_a_trace{{Event::output(Channel::Public, 1)},
                                      {Event::bot()}};
  CHECK_FALSE(program_has_trace(p, io, not_a_trace));
}

TEST_CASE("determinism modulo input") {
  std::mt19937 rng(21);
  AttackModel io = attack_model_by_name("io");
  for (int iter = 0; iter < 30; ++iter) {
    // silent instructions allowed; inputs must fan out over the domain
    auto p = secwit::testgen::random_program(rng, false, 2);
    std::set<Config> frontier{initial_config(p, io)};
    for (int depth = 0; depth < 6; ++depth) {
      std::set<Config> next;
      for (auto &c : frontier) {
        auto succs = step(p, io, c);
        CHECK_FALSE(succs.empty()); // left-totality
        bool is_input =
            c.loc != p.end_loc() &&
            p.instrs[static_cast<std::size_t>(c.loc)].kind ==
                Instruction::Kind::Input;
        if (is_input) {
          CHECK(succs.size() == 2);
          CHECK(succs[0].first != succs[1].first);
        } else if (p.instrs.empty() ||
                   c.loc == p.end_loc() ||
                   p.instrs[static_cast<std::size_t>(c.loc)].kind !=
                       Instruction::Kind::Choice) {
          CHECK(succs.size() == 1);
        }
        for (auto &[ev, nc] : succs)
          next.insert(nc);
      }
      frontier = std::move(next);
    }
  }
}

TEST_CASE("attack model monotonicity") {
  std::mt19937 rng(22);
  AttackModel weak = attack_model_by_name("io");
  AttackModel strong = attack_model_by_name("ct");
  for (int iter = 0; iter < 30; ++iter) {
    auto p = secwit::testgen::random_program(rng, false, 2);
    std::set<Config> frontier{initial_config(p, weak)};
    for (int depth = 0; depth < 6; ++depth) {
      std::set<Config> next;
      for (auto &c : frontier) {
        auto a = step(p, weak, c);
        auto b = step(p, strong, c);
        REQUIRE(a.size() == b.size());
        for (std::size_t i = 0; i < a.size(); ++i) {
          CHECK(a[i].second == b[i].second); // same config graph
          if (a[i].first != b[i].first) {
            CHECK(a[i].first == Event::eps()); // only eps gets refined
            CHECK(b[i].first.kind == EvKind::Ext);
          }
          next.insert(a[i].second);
        }
      }
      frontier = std::move(next);
    }
  }
}
