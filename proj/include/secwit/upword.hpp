#pragma once

#include <algorithm>
#include <cstddef>
#include <numeric>
#include <vector>

namespace secwit::traceops {

// Ultimately periodic word: the infinite sequence stem . loop^omega.
// The canonical form has the shortest loop (minimal period) and the shortest
// stem (maximal rollback of the stem into the loop). Equality of canonical
// forms is exact equality of the denoted infinite words.
template <typename Sym> struct UPWord {
  std::vector<Sym> stem;
  std::vector<Sym> loop; // non-empty

  const Sym &at(std::size_t i) const {
    if (i < stem.size())
      return stem[i];
    return loop[(i - stem.size()) % loop.size()];
  }

  std::vector<Sym> unroll(std::size_t n) const {
    std::vector<Sym> out;
    out.reserve(n);
    for (std::size_t i = 0; i < n; ++i)
      out.push_back(at(i));
    return out;
  }

  void normalize() {
    // minimal period of the loop
    for (std::size_t p = 1; p <= loop.size() / 2; ++p) {
      if (loop.size() % p != 0)
        continue;
      bool periodic = true;
      for (std::size_t i = p; i < loop.size() && periodic; ++i)
        periodic = loop[i] == loop[i % p];
      if (periodic) {
        loop.resize(p);
        break;
      }
    }
    // roll the stem's tail into the loop where it matches the loop's tail
    while (!stem.empty() && stem.back() == loop.back()) {
      stem.pop_back();
      std::rotate(loop.begin(), loop.end() - 1, loop.end());
    }
  }

  UPWord normalized() const {
    UPWord w = *this;
    w.normalize();
    return w;
  }

  friend bool operator==(const UPWord &a, const UPWord &b) {
    UPWord x = a.normalized(), y = b.normalized();
    return x.stem == y.stem && x.loop == y.loop;
  }
  friend bool operator<(const UPWord &a, const UPWord &b) {
    UPWord x = a.normalized(), y = b.normalized();
    if (x.stem != y.stem)
      return x.stem < y.stem;
    return x.loop < y.loop;
  }
};

inline std::size_t lcm_size(std::size_t a, std::size_t b) {
  return a / std::gcd(a, b) * b;
}

} // namespace secwit::traceops
