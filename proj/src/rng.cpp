#include "dfl/rng.hpp"

#include <cmath>
#include <numbers>

namespace dfl {

__extension__ using u128 = unsigned __int128;

double CounterRng::normal() {
  const double u1 = 1.0 - uniform();  // (0, 1]
  const double u2 = uniform();
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

std::int64_t CounterRng::uniform_int(std::int64_t lo, std::int64_t hi) {
  const auto span = static_cast<std::uint64_t>(hi - lo) + 1;
  // Multiply-shift; bias is below 2^-64 * span, irrelevant at our sizes.
  const auto r = static_cast<u128>(next_u64()) * span;
  return lo + static_cast<std::int64_t>(r >> 64);
}

}  // namespace dfl
