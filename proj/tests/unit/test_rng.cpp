#include <cmath>
#include <set>

#include "doctest.h"
#include "dfl/rng.hpp"

using dfl::CounterRng;

TEST_CASE("first draw of key 0 equals the SplitMix64 reference output") {
  // Published first output of SplitMix64 seeded with 0.
  CounterRng rng(0);
  CHECK(rng.next_u64() == 0xE220A8397B1DCDAFULL);
  CHECK(rng.next_u64() == 0x6E789E6AA1B965F4ULL);
}

TEST_CASE("streams are reproducible and substreams differ") {
  CounterRng a = CounterRng(42).substream(7);
  CounterRng b = CounterRng(42).substream(7);
  CounterRng c = CounterRng(42).substream(8);
  for (int i = 0; i < 100; ++i) {
    const auto x = a.next_u64();
    CHECK(x == b.next_u64());
    CHECK(x != c.next_u64());
  }
  CHECK(CounterRng(42).substream(7).key() == CounterRng::derive_key(42, 7));
}

TEST_CASE("uniform_int covers its closed range") {
  CounterRng rng(3);
  std::set<std::int64_t> seen;
  for (int i = 0; i < 2000; ++i) {
    const auto v = rng.uniform_int(3, 8);
    CHECK(v >= 3);
    CHECK(v <= 8);
    seen.insert(v);
  }
  CHECK(seen.size() == 6);
}

TEST_CASE("uniform and normal moments") {
  CounterRng rng(5);
  const int n = 200000;
  double su = 0, sn = 0, sn2 = 0;
  for (int i = 0; i < n; ++i) {
    const double u = rng.uniform();
    CHECK(u >= 0.0);
    CHECK(u < 1.0);
    su += u;
    const double z = rng.normal();
    sn += z;
    sn2 += z * z;
  }
  CHECK(su / n == doctest::Approx(0.5).epsilon(0.01));
  CHECK(std::abs(sn / n) < 0.01);
  CHECK(sn2 / n == doctest::Approx(1.0).epsilon(0.02));
}

TEST_CASE("normal consumes exactly two draws") {
  CounterRng rng(9);
  rng.normal();
  CHECK(rng.counter() == 2);
}
