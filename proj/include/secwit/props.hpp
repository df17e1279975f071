#pragma once

#include <functional>
#include <string>
#include <vector>

#include "secwit/bundle_automaton.hpp"
#include "secwit/secir.hpp"

// Ready-made negated-property automata: constant-time, non-interference and
// the final-memory-equality property of the worked example. All constructors
// emit automaton text and re-parse it, so every built automaton round-trips
// through print/parse by construction.

namespace secwit::props {

// k=2; states I (initial), S (sink), M (mid), F (fail, accepting). Accepts a
// pair of traces that starts with an input pair satisfying phi and later has
// unequal transition labels. `phi` is a guard over the two input events.
bundle::BundleAutomaton negated_constant_time(const std::string &phi = "true");

// k=2; same state shape. Accepts a pair of traces whose initial exposures
// agree on the low view but that later disagree on it (differing public
// output, differing final exposure, or termination mismatch). Exposure
// content is controlled by the attack model's exposed set; pass the low
// variables here to record the intended classification.
bundle::BundleAutomaton
negated_noninterference(const std::vector<std::string> &low_vars = {});

// k=2; accepts iff the two final exposures differ. Pair with an attack model
// exposing exactly `vars`.
bundle::BundleAutomaton
final_memory_equal(const std::vector<std::string> &vars = {});

// single accepting state with a `true` self-loop
bundle::BundleAutomaton universal_acceptor(int k);

// --- property bundles ---------------------------------------------------------
// File format (one item per line):
//   property <name>
//   prefix forall forall          (or: exists; alternation is stored, not run)
//   automaton <path.aut>          (repeated; index order = violation type)
//   attack <model-name> [expose <var> ...]
struct Property {
  std::string name;
  std::vector<bool> universal; // one entry per quantifier, true = forall
  std::vector<bundle::BundleAutomaton> automata;
  secir::AttackModel model;

  int k() const { return static_cast<int>(universal.size()); }
  bool all_universal() const {
    for (bool u : universal)
      if (!u)
        return false;
    return true;
  }
};

using FileLoader = std::function<std::string(const std::string &)>;

Property parse_property(const std::string &text, const FileLoader &load);
std::string print_property(const Property &p,
                           const std::vector<std::string> &automaton_paths);

} // namespace secwit::props
