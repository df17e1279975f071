#include <doctest.h>

#include <map>

#include "secwit/props.hpp"

using namespace secwit;
using namespace secwit::bundle;
using namespace secwit::props;
using secir::Channel;
using secir::Event;

namespace {
UPWord<traceops::EventVec> vecword(std::vector<traceops::EventVec> stem,
                                   std::vector<traceops::EventVec> loop) {
  return {std::move(stem), std::move(loop)};
}
} // namespace

TEST_CASE("built automata round-trip through print and parse") {
  for (auto &a : {negated_constant_time(), negated_noninterference({"l"}),
                  final_memory_equal({"x"}), universal_acceptor(2)}) {
    auto txt = print_automaton(a);
    auto b = parse_automaton(txt);
    CHECK(print_automaton(b) == txt);
  }
  CHECK(negated_constant_time().states.size() == 4);
  CHECK(negated_noninterference().states.size() == 4);
}

TEST_CASE("constant-time automaton") {
  auto ct = negated_constant_time("true");
  Event i0 = Event::input(Channel::Secret, 0);
  Event i1 = Event::input(Channel::Secret, 1);
  Event b1 = Event::branch(true), b0 = Event::branch(false);
  Event bot = Event::bot();

  // identical leakage labels: rejected
  CHECK_FALSE(accepts(ct, vecword({{i0, i1}, {b1, b1}}, {{bot, bot}})));
  // one differing branch observation: accepted
  CHECK(accepts(ct, vecword({{i0, i1}, {b1, b0}}, {{bot, bot}})));
  // phi = false funnels everything into the sink
  auto dead = negated_constant_time("false");
  CHECK_FALSE(accepts(dead, vecword({{i0, i1}, {b1, b0}}, {{bot, bot}})));
  // later inputs are compared as labels too
  CHECK(accepts(ct, vecword({{i0, i0}, {i0, i1}}, {{bot, bot}})));
}

TEST_CASE("constant-time phi restricts the initial pair") {
  auto ct = negated_constant_time("val(1)=val(2)");
  Event i0 = Event::input(Channel::Secret, 0);
  Event i1 = Event::input(Channel::Secret, 1);
  Event b1 = Event::branch(true), b0 = Event::branch(false);
  Event bot = Event::bot();
  CHECK(accepts(ct, vecword({{i0, i0}, {b1, b0}}, {{bot, bot}})));
  CHECK_FALSE(accepts(ct, vecword({{i0, i1}, {b1, b0}}, {{bot, bot}})));
}

TEST_CASE("property bundle files") {
  std::map<std::string, std::string> files{
      {"ni.aut", print_automaton(negated_noninterference())},
      {"uni.aut", print_automaton(universal_acceptor(2))}};
  auto loader = [&](const std::string &path) { return files.at(path); };

  auto prop = parse_property("property ni\n"
                             "prefix forall forall\n"
                             "automaton ni.aut\n"
                             "automaton uni.aut\n"
                             "attack final_memory expose x y\n",
                             loader);
  CHECK(prop.name == "ni");
  CHECK(prop.k() == 2);
  CHECK(prop.all_universal());
  CHECK(prop.automata.size() == 2);
  CHECK(prop.model.final_memory);
  CHECK(prop.model.exposed == std::vector<std::string>{"x", "y"});

  auto reprinted = print_property(prop, {"ni.aut", "uni.aut"});
  auto again = parse_property(reprinted, loader);
  CHECK(again.k() == 2);

  // arity mismatch between prefix and automaton
  CHECK_THROWS_AS(parse_property("property bad\n"
                                 "prefix forall\n"
                                 "automaton ni.aut\n"
                                 "attack io\n",
                                 loader),
                  ParseError);
  // alternation is representable (the oracle rejects it later)
  auto alt = parse_property("property alt\nprefix forall exists\n"
                            "automaton ni.aut\nattack io\n",
                            loader);
  CHECK_FALSE(alt.all_universal());
}
