#pragma once

#include <functional>
#include <vector>

#include "secwit/secir.hpp"
#include "secwit/upword.hpp"

// Word algebra over ultimately periodic event words: agreement, projection,
// compression, zip/unzip. Equalities on UP words are exact (checked on
// normalized stem/loop), no unrolled approximation needed.

namespace secwit::traceops {

using secir::Event;
using EventPred = std::function<bool(const Event &)>;

// common symbol classes
bool is_input_event(const Event &e);
bool is_output_event(const Event &e);
bool is_observable(const Event &e); // not eps

// x =_Gamma y: both outside Gamma, or both inside and equal.
bool agree_on(const Event &a, const Event &b, const EventPred &gamma);

// Projection to Gamma. When the loop contains no Gamma symbol the result is
// finite and `cycle` stays empty.
struct Projection {
  std::vector<Event> prefix;
  std::vector<Event> cycle;
  bool finite() const { return cycle.empty(); }

  friend bool operator==(const Projection &a, const Projection &b) {
    if (a.finite() != b.finite())
      return false;
    if (a.finite())
      return a.prefix == b.prefix;
    return UPWord<Event>{a.prefix, a.cycle} == UPWord<Event>{b.prefix, b.cycle};
  }
};

Projection project(const UPWord<Event> &u, const EventPred &gamma);

// compress = project to non-eps; throws on an all-silent loop.
UPWord<Event> compress(const UPWord<Event> &u);

template <typename Sym> UPWord<Sym> compress_generic(const UPWord<Sym> &u,
                                                     bool (*silent)(const Sym &));

// Input-equivalence: equality of the I-projections (Definition of matching).
bool input_equivalent(const UPWord<Event> &a, const UPWord<Event> &b,
                      const EventPred &input_set);

using EventVec = std::vector<Event>;

// Co-align k words (pad stems to the longest stem by unrolling loops, unroll
// loops to the lcm of their lengths), then take pointwise vectors.
UPWord<EventVec> zip(const std::vector<UPWord<Event>> &bundle);
std::vector<UPWord<Event>> unzip(const UPWord<EventVec> &u);

// compress each component of a vector word; used by the buffering lemma
// cross-checks.
std::vector<UPWord<Event>> unzip_compressed(const UPWord<EventVec> &u);

} // namespace secwit::traceops
