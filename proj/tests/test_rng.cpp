#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <array>
#include <cmath>
#include <cstdint>
#include <set>
#include <vector>

#include "balayage/rng.hpp"

using namespace balayage;

TEST_CASE("identical seed and stream reproduce the sequence") {
  Rng a(42, 7), b(42, 7);
  for (int i = 0; i < 1000; ++i) CHECK(a.next_u64() == b.next_u64());
}

TEST_CASE("distinct streams from one seed decorrelate") {
  Rng a(42, 0), b(42, 1);
  int agree = 0;
  for (int i = 0; i < 1000; ++i)
    if (a.next_u64() == b.next_u64()) ++agree;
  CHECK(agree == 0);
}

TEST_CASE("uniform stays in the half-open unit interval") {
  Rng r(1, 0);
  for (int i = 0; i < 100000; ++i) {
    const double u = r.uniform();
    CHECK(u >= 0.0);
    CHECK(u < 1.0);
  }
}

TEST_CASE("uniform_open avoids both endpoints") {
  Rng r(9, 3);
  for (int i = 0; i < 100000; ++i) {
    const double u = r.uniform_open();
    CHECK(u > 0.0);
    CHECK(u < 1.0);
  }
}

TEST_CASE("uniform passes a 32-bin chi-squared test at one million draws") {
  // 0.999 quantile of chi-squared with 31 degrees of freedom
  const double quantile = 61.098306081058126;
  Rng r(2024, 0);
  std::array<std::uint64_t, 32> bins{};
  const std::uint64_t n = 1000000;
  for (std::uint64_t i = 0; i < n; ++i) {
    const double u = r.uniform();
    const auto b = static_cast<std::size_t>(u * 32.0);
    ++bins[b < 32 ? b : 31];
  }
  const double expected = static_cast<double>(n) / 32.0;
  double chi2 = 0.0;
  for (std::uint64_t c : bins) {
    const double d = static_cast<double>(c) - expected;
    chi2 += d * d / expected;
  }
  CHECK(chi2 < quantile);
}

TEST_CASE("gaussian has sane moments") {
  Rng r(5, 11);
  const int n = 200000;
  double s = 0.0, s2 = 0.0, s3 = 0.0;
  for (int i = 0; i < n; ++i) {
    const double g = r.gaussian();
    s += g;
    s2 += g * g;
    s3 += g * g * g;
  }
  const double mean = s / n;
  const double var = s2 / n - mean * mean;
  const double skew = s3 / n;
  CHECK(std::abs(mean) < 0.01);
  CHECK(std::abs(var - 1.0) < 0.02);
  CHECK(std::abs(skew) < 0.03);
}

TEST_CASE("seed changes the stream") {
  Rng a(1, 0), b(2, 0);
  std::vector<std::uint64_t> va, vb;
  for (int i = 0; i < 64; ++i) {
    va.push_back(a.next_u64());
    vb.push_back(b.next_u64());
  }
  CHECK(va != vb);
}

TEST_CASE("first draws across many streams are distinct") {
  std::set<std::uint64_t> seen;
  for (std::uint64_t s = 0; s < 4096; ++s) seen.insert(Rng(77, s).next_u64());
  CHECK(seen.size() == 4096);
}
