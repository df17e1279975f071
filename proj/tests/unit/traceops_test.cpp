#include <doctest.h>

#include <random>

#include "secwit/traceops.hpp"

using namespace secwit;
using namespace secwit::traceops;
using secir::Channel;
using secir::Event;

namespace {

Event in1() { return Event::input(Channel::Secret, 1); }
Event outp(int v) { return Event::output(Channel::Public, v); }

// independent oracle: project a naively unrolled prefix
std::vector<Event> unrolled_projection(const UPWord<Event> &w,
                                       const EventPred &gamma, std::size_t n) {
  std::vector<Event> out;
  for (auto &e : w.unroll(n))
    if (gamma(e))
      out.push_back(e);
  return out;
}

std::vector<Event> event_pool() {
  return {Event::eps(),  Event::bot(),  in1(),
          Event::input(Channel::Public, 0), outp(0), outp(3),
          Event::branch(true), Event::mem({{"a", 1}})};
}

UPWord<Event> random_word(std::mt19937 &rng) {
  auto pool = event_pool();
  std::uniform_int_distribution<std::size_t> pick(0, pool.size() - 1);
  std::uniform_int_distribution<int> stem_len(0, 4), loop_len(1, 3);
  UPWord<Event> w;
  int s = stem_len(rng);
  for (int i = 0; i < s; ++i)
    w.stem.push_back(pool[pick(rng)]);
  int l = loop_len(rng);
  for (int i = 0; i < l; ++i)
    w.loop.push_back(pool[pick(rng)]);
  return w;
}

} // namespace

TEST_CASE("agree_on") {
  CHECK(agree_on(Event::eps(), outp(3), is_input_event));   // both outside
  CHECK(agree_on(in1(), in1(), is_input_event));            // equal members
  CHECK_FALSE(agree_on(in1(), Event::eps(), is_input_event));
  CHECK_FALSE(agree_on(Event::input(Channel::Secret, 1),
                       Event::input(Channel::Secret, 2), is_input_event));

  // reflexive on members, symmetric everywhere
  for (auto &a : event_pool()) {
    CHECK(agree_on(a, a, is_input_event));
    for (auto &b : event_pool())
      CHECK(agree_on(a, b, is_observable) == agree_on(b, a, is_observable));
  }
}

TEST_CASE("project") {
  UPWord<Event> w{{in1(), Event::eps(), outp(1)}, {Event::bot()}};
  auto pr = project(w, is_input_event);
  REQUIRE(pr.finite());
  CHECK(pr.prefix == std::vector<Event>{in1()});

  // word of all Gamma symbols is unchanged
  UPWord<Event> all{{outp(1)}, {outp(2), outp(3)}};
  auto pr2 = project(all, is_output_event);
  REQUIRE_FALSE(pr2.finite());
  CHECK(UPWord<Event>{pr2.prefix, pr2.cycle} == all);

  // stem [a,b], loop [eps,c], Gamma={c} -> ([],[c]); cross-check by unrolling
  Event a = outp(10), b = outp(11), c = outp(12);
  UPWord<Event> w3{{a, b}, {Event::eps(), c}};
  auto gamma = [&](const Event &e) { return e == c; };
  auto pr3 = project(w3, gamma);
  REQUIRE_FALSE(pr3.finite());
  CHECK(pr3.prefix.empty());
  CHECK(pr3.cycle == std::vector<Event>{c});
  auto naive = unrolled_projection(w3, gamma, 16);
  auto mine = UPWord<Event>{pr3.prefix, pr3.cycle}.unroll(naive.size());
  CHECK(naive == mine);
}

TEST_CASE("compress") {
  Event a = outp(1), b = outp(2);
  UPWord<Event> w{{Event::eps(), a, Event::eps()}, {b, Event::eps()}};
  auto c = compress(w);
  CHECK(c == UPWord<Event>{{a}, {b}});

  UPWord<Event> free_of_eps{{a}, {b, a}};
  CHECK(compress(free_of_eps) == free_of_eps);

  UPWord<Event> divergent{{}, {Event::eps()}};
  CHECK_THROWS_AS(compress(divergent), ConfigError);

  // idempotence on random words that have an observable loop
  std::mt19937 rng(7);
  int done = 0;
  while (done < 50) {
    auto w1 = random_word(rng);
    bool ok = false;
    for (auto &e : w1.loop)
      ok |= is_observable(e);
    if (!ok)
      continue;
    ++done;
    auto once = compress(w1);
    CHECK(compress(once) == once);
    auto naive = unrolled_projection(w1, is_observable, 64 * 4);
    naive.resize(64);
    CHECK(once.unroll(64) == naive);
  }
}

TEST_CASE("zip and unzip") {
  Event a = outp(1), b = outp(2), c = outp(3), d = outp(4);
  auto z = zip({UPWord<Event>{{a}, {c}}, UPWord<Event>{{b}, {d}}});
  CHECK(z.stem == std::vector<EventVec>{{a, b}});
  CHECK(z.loop == std::vector<EventVec>{{c, d}});
  auto back = unzip(z);
  CHECK(back[0] == UPWord<Event>{{a}, {c}});
  CHECK(back[1] == UPWord<Event>{{b}, {d}});

  // k=1 wraps and unwraps
  auto z1 = zip({UPWord<Event>{{a}, {b}}});
  CHECK(unzip(z1)[0] == UPWord<Event>{{a}, {b}});

  // loops of length 2 and 3 align at lcm 6; verify by unrolling 12 steps
  UPWord<Event> w1{{}, {a, b}}, w2{{}, {c, d, a}};
  auto z2 = zip({w1, w2});
  CHECK(z2.loop.size() == 6);
  for (std::size_t i = 0; i < 12; ++i) {
    CHECK(z2.at(i)[0] == w1.at(i));
    CHECK(z2.at(i)[1] == w2.at(i));
  }

  // round-trip property on random bundles
  std::mt19937 rng(11);
  for (int iter = 0; iter < 100; ++iter) {
    std::vector<UPWord<Event>> bundle{random_word(rng), random_word(rng)};
    auto rz = zip(bundle);
    auto ub = unzip(rz);
    REQUIRE(ub.size() == 2);
    for (int t = 0; t < 2; ++t) {
      auto lhs = ub[t].unroll(64);
      auto rhs = bundle[t].unroll(64);
      CHECK(lhs == rhs);
    }
    // zip of the unzip is the zip again
    CHECK(zip(ub) == rz);
  }
}

TEST_CASE("upword normalization") {
  Event a = outp(1), b = outp(2);
  UPWord<Event> w{{a, b}, {a, b, a, b}};
  w.normalize();
  CHECK(w.stem.empty());
  CHECK(w.loop == std::vector<Event>{a, b});
  CHECK(UPWord<Event>{{a}, {b, a}} == UPWord<Event>{{a, b}, {a, b}});
}
