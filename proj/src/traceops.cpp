#include "secwit/traceops.hpp"

#include <stdexcept>

namespace secwit::traceops {

using secir::EvKind;

bool is_input_event(const Event &e) { return e.kind == EvKind::Input; }
bool is_output_event(const Event &e) { return e.kind == EvKind::Output; }
bool is_observable(const Event &e) { return e.kind != EvKind::Eps; }

bool agree_on(const Event &a, const Event &b, const EventPred &gamma) {
  const bool ga = gamma(a), gb = gamma(b);
  if (!ga && !gb)
    return true;
  return ga && gb && a == b;
}

Projection project(const UPWord<Event> &u, const EventPred &gamma) {
  Projection out;
  for (auto &e : u.stem)
    if (gamma(e))
      out.prefix.push_back(e);
  std::vector<Event> loop_part;
  for (auto &e : u.loop)
    if (gamma(e))
      loop_part.push_back(e);
  if (loop_part.empty())
    return out; // finite: the loop contributes nothing
  out.cycle = std::move(loop_part);
  UPWord<Event> w{std::move(out.prefix), std::move(out.cycle)};
  w.normalize();
  out.prefix = std::move(w.stem);
  out.cycle = std::move(w.loop);
  return out;
}

UPWord<Event> compress(const UPWord<Event> &u) {
  Projection pr = project(u, is_observable);
  if (pr.finite())
    throw ConfigError("silent divergence: loop contains only eps symbols");
  return UPWord<Event>{std::move(pr.prefix), std::move(pr.cycle)};
}

bool input_equivalent(const UPWord<Event> &a, const UPWord<Event> &b,
                      const EventPred &input_set) {
  return project(a, input_set) == project(b, input_set);
}

UPWord<EventVec> zip(const std::vector<UPWord<Event>> &bundle) {
  const std::size_t k = bundle.size();
  std::size_t stem_len = 0, loop_len = 1;
  for (auto &w : bundle) {
    if (w.loop.empty())
      throw ConfigError("zip: word with empty loop");
    stem_len = std::max(stem_len, w.stem.size());
    loop_len = lcm_size(loop_len, w.loop.size());
  }
  // pad stems by unrolling each word's loop, then rotate loops accordingly
  std::vector<std::vector<Event>> stems(k), loops(k);
  for (std::size_t t = 0; t < k; ++t) {
    const auto &w = bundle[t];
    stems[t] = w.stem;
    for (std::size_t i = w.stem.size(); i < stem_len; ++i)
      stems[t].push_back(w.at(i));
    const std::size_t rot = (stem_len - w.stem.size()) % w.loop.size();
    for (std::size_t i = 0; i < loop_len; ++i)
      loops[t].push_back(w.loop[(rot + i) % w.loop.size()]);
  }
  UPWord<EventVec> out;
  for (std::size_t i = 0; i < stem_len; ++i) {
    EventVec v(k);
    for (std::size_t t = 0; t < k; ++t)
      v[t] = stems[t][i];
    out.stem.push_back(std::move(v));
  }
  for (std::size_t i = 0; i < loop_len; ++i) {
    EventVec v(k);
    for (std::size_t t = 0; t < k; ++t)
      v[t] = loops[t][i];
    out.loop.push_back(std::move(v));
  }
  out.normalize();
  return out;
}

std::vector<UPWord<Event>> unzip(const UPWord<EventVec> &u) {
  if (u.loop.empty())
    throw ConfigError("unzip: empty loop");
  const std::size_t k = u.loop.front().size();
  std::vector<UPWord<Event>> out(k);
  for (auto &v : u.stem) {
    if (v.size() != k)
      throw ConfigError("unzip: ragged vector word");
    for (std::size_t t = 0; t < k; ++t)
      out[t].stem.push_back(v[t]);
  }
  for (auto &v : u.loop) {
    if (v.size() != k)
      throw ConfigError("unzip: ragged vector word");
    for (std::size_t t = 0; t < k; ++t)
      out[t].loop.push_back(v[t]);
  }
  for (auto &w : out)
    w.normalize();
  return out;
}

std::vector<UPWord<Event>> unzip_compressed(const UPWord<EventVec> &u) {
  auto words = unzip(u);
  std::vector<UPWord<Event>> out;
  out.reserve(words.size());
  for (auto &w : words)
    out.push_back(compress(w));
  return out;
}

} // namespace secwit::traceops
