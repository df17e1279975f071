// Random generators shared by the property-test suites.
#pragma once

#include <random>
#include <string>

#include "secwit/bundle_automaton.hpp"
#include "secwit/secir.hpp"

namespace secwit::testgen {

// Small forward-branching programs (always terminating, never a silent
// cycle). With `epsilon_free` every instruction is observable under the
// ct (= io+mem+branch) model, so the base product applies.
inline secir::Program random_program(std::mt19937 &rng, bool epsilon_free,
                                     int domain = 2) {
  using secir::Channel;
  using secir::Expr;
  using secir::Instruction;
  std::uniform_int_distribution<int> len_d(2, 5), val_d(0, domain - 1);
  std::uniform_int_distribution<int> coin(0, 1);
  secir::Program p;
  p.name = "rand";
  p.domain = domain;
  p.vars = {"x", "y"};
  p.arrays = {{"a", 2}};
  const int n = len_d(rng);

  auto rand_expr = [&](bool allow_arr) -> secir::ExprPtr {
    switch (std::uniform_int_distribution<int>(0, allow_arr ? 3 : 2)(rng)) {
    case 0:
      return Expr::constant(val_d(rng));
    case 1:
      return Expr::var("x");
    case 2:
      return Expr::binary(Expr::Op::Add, Expr::var("y"),
                          Expr::constant(val_d(rng)));
    default:
      return Expr::arr_read("a", Expr::var("x"));
    }
  };

  for (int i = 0; i < n; ++i) {
    p.labels.push_back("L" + std::to_string(i + 1));
    Instruction ins;
    const int max_kind = epsilon_free ? 3 : 5;
    switch (std::uniform_int_distribution<int>(0, max_kind)(rng)) {
    case 0:
      ins.kind = Instruction::Kind::Input;
      ins.var = coin(rng) ? "x" : "y";
      ins.chan = coin(rng) ? Channel::Secret : Channel::Public;
      break;
    case 1:
      ins.kind = Instruction::Kind::Output;
      ins.chan = coin(rng) ? Channel::Secret : Channel::Public;
      ins.expr = rand_expr(true);
      break;
    case 2:
      ins.kind = Instruction::Kind::Store;
      ins.var = "a";
      ins.index = rand_expr(false);
      ins.expr = rand_expr(true);
      break;
    case 3: {
      ins.kind = Instruction::Kind::Branch;
      ins.expr = rand_expr(true);
      // forward targets only
      std::uniform_int_distribution<int> tgt(i + 1, n);
      auto lab = [&](int t) {
        return t >= n ? std::string("End") : "L" + std::to_string(t + 1);
      };
      ins.then_label = lab(tgt(rng));
      ins.else_label = lab(tgt(rng));
      break;
    }
    case 4:
      ins.kind = Instruction::Kind::Assign;
      ins.var = coin(rng) ? "x" : "y";
      ins.expr = rand_expr(true);
      break;
    default:
      ins.kind = Instruction::Kind::Skip;
      break;
    }
    p.instrs.push_back(std::move(ins));
  }
  p.finalize();
  return p;
}

// Random guard over k tracks from a small pool of atoms.
inline std::string random_guard(std::mt19937 &rng, int k) {
  std::uniform_int_distribution<int> track_d(1, k), pick(0, 6);
  auto t = [&] { return std::to_string(track_d(rng)); };
  auto atom = [&]() -> std::string {
    switch (pick(rng)) {
    case 0:
      return "kind(" + t() + ")=input";
    case 1:
      return "kind(" + t() + ")=output";
    case 2:
      return "kind(" + t() + ")=bot";
    case 3:
      return "val(" + t() + ")=0";
    case 4:
      return k >= 2 ? "agree(1,2,inputs)" : "true";
    case 5:
      return k >= 2 ? "val(1)=val(2)" : "val(1)=1";
    default:
      return "true";
    }
  };
  std::string g = atom();
  if (pick(rng) < 3)
    g = "(" + g + (pick(rng) < 3 ? ") && (" : ") || (") + atom() + ")";
  if (pick(rng) == 0)
    g = "!(" + g + ")";
  return g;
}

inline bundle::BundleAutomaton random_automaton(std::mt19937 &rng, int k) {
  std::uniform_int_distribution<int> n_states(2, 4), pick(0, 3);
  const int n = n_states(rng);
  std::string text = "automaton rand tracks " + std::to_string(k) + "\n";
  for (int i = 0; i < n; ++i) {
    text += "state q" + std::to_string(i);
    if (i == 0)
      text += " initial";
    if (i == n - 1 || pick(rng) == 0)
      text += " accepting";
    text += "\n";
  }
  std::uniform_int_distribution<int> st(0, n - 1);
  const int edges = n + pick(rng) + 1;
  for (int e = 0; e < edges; ++e) {
    text += "trans q" + std::to_string(st(rng)) + " -> q" +
            std::to_string(st(rng)) + " when " + random_guard(rng, k) + "\n";
  }
  return bundle::parse_automaton(text);
}

} // namespace secwit::testgen
