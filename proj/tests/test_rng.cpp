#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <set>
#include <vector>

#include "mcmclab/rng.hpp"

using namespace mcmclab;

TEST_CASE("mix64 matches the splitmix64 reference outputs for seed zero") {
  // splitmix64 emits finalize(n * golden gamma) for n = 1, 2, 3, ...
  CHECK(mix64(1 * kGoldenGamma) == 0xE220A8397B1DCDAFull);
  CHECK(mix64(2 * kGoldenGamma) == 0x6E789E6AA1B965F4ull);
  CHECK(mix64(3 * kGoldenGamma) == 0x06C45D188009454Full);
}

TEST_CASE("streams replay exactly and copies snapshot the position") {
  RngStream a(42, 7);
  RngStream b(42, 7);
  for (int i = 0; i < 100; ++i) CHECK(a.next_u64() == b.next_u64());

  for (int i = 0; i < 5; ++i) a.gaussian();
  RngStream c = a;
  for (int i = 0; i < 50; ++i) CHECK(a.gaussian() == c.gaussian());
}

TEST_CASE("distinct stream ids give distinct sequences") {
  RngStream a(42, 7);
  RngStream b(42, 8);
  RngStream c(43, 7);
  int equal_ab = 0, equal_ac = 0;
  for (int i = 0; i < 64; ++i) {
    const std::uint64_t x = a.next_u64();
    equal_ab += x == b.next_u64();
    equal_ac += x == c.next_u64();
  }
  CHECK(equal_ab == 0);
  CHECK(equal_ac == 0);
}

TEST_CASE("derived stream ids do not collide over a tuple grid") {
  std::set<std::uint64_t> seen;
  for (std::uint64_t seed : {0ull, 1ull, 42ull, 1048576ull})
    for (std::uint64_t chain = 0; chain < 50; ++chain)
      for (std::uint64_t tag = 1; tag <= 9; ++tag)
        seen.insert(derive_stream_id(seed, chain, tag));
  CHECK(seen.size() == 4u * 50u * 9u);
}

TEST_CASE("uniform stays strictly inside the open unit interval") {
  RngStream s(7, 1);
  double lo = 1.0, hi = 0.0, sum = 0.0;
  const int n = 100000;
  for (int i = 0; i < n; ++i) {
    const double u = s.uniform();
    lo = std::min(lo, u);
    hi = std::max(hi, u);
    sum += u;
  }
  CHECK(lo > 0.0);
  CHECK(hi < 1.0);
  // mean of n iid U(0,1): se = 1/sqrt(12 n)
  CHECK(std::abs(sum / n - 0.5) < 4.0 / std::sqrt(12.0 * n));
}

TEST_CASE("gaussian moments match the standard normal") {
  RngStream s(11, 2);
  const int n = 200000;
  double m1 = 0, m2 = 0, m3 = 0, m4 = 0;
  for (int i = 0; i < n; ++i) {
    const double g = s.gaussian();
    m1 += g;
    m2 += g * g;
    m3 += g * g * g;
    m4 += g * g * g * g;
  }
  m1 /= n;
  m2 /= n;
  m3 /= n;
  m4 /= n;
  CHECK(std::abs(m1) < 4.0 / std::sqrt(double(n)));
  CHECK(std::abs(m2 - 1.0) < 4.0 * std::sqrt(2.0 / n));
  CHECK(std::abs(m3) < 4.0 * std::sqrt(15.0 / n));
  CHECK(std::abs(m4 - 3.0) < 4.0 * std::sqrt(96.0 / n));
}

TEST_CASE("exponential draws have unit mean") {
  RngStream s(13, 3);
  const int n = 100000;
  double sum = 0;
  for (int i = 0; i < n; ++i) sum += s.exponential();
  CHECK(std::abs(sum / n - 1.0) < 4.0 / std::sqrt(double(n)));
}

TEST_CASE("gaussian_vector equals sequential scalar draws") {
  RngStream a(5, 9);
  RngStream b(5, 9);
  const Eigen::VectorXd v = a.gaussian_vector(7);
  for (int i = 0; i < 7; ++i) CHECK(v[i] == b.gaussian());
}
