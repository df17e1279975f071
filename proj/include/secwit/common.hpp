#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace secwit {

// Parse failure in any of the text formats (.sec, .aut, .wit, .prop).
struct ParseError : std::runtime_error {
  int line = 0;
  int col = 0;
  ParseError(int line_, int col_, const std::string &msg)
      : std::runtime_error("line " + std::to_string(line_) + ":" +
                           std::to_string(col_) + ": " + msg),
        line(line_), col(col_) {}
};

// Misconfiguration: k mismatch, unbuffered automaton on a silent program, ...
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Shared exploration budget. Charged per visited state or enumerated path
// step; exhaustion is reported as an inconclusive verdict, never an exception.
struct Budget {
  std::int64_t limit = 1'000'000;
  std::int64_t used = 0;

  Budget() = default;
  explicit Budget(std::int64_t limit_) : limit(limit_) {}

  bool charge(std::int64_t n = 1) {
    used += n;
    return used <= limit;
  }
  bool exceeded() const { return used > limit; }
};

inline void hash_combine(std::size_t &seed, std::size_t v) {
  seed ^= v + 0x9e3779b97f4a7c15ULL + (seed << 6) + (seed >> 2);
}

} // namespace secwit
