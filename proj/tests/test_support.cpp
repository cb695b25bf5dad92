#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdlib>

#include "epscope/assignment.hpp"
#include "epscope/io.hpp"
#include "epscope/rng.hpp"

using namespace epscope;

TEST_CASE("splitmix64: substreams are order-independent and reproducible") {
  SplitMix64 a(7, 3);
  SplitMix64 b(7, 3);
  for (int i = 0; i < 100; ++i) CHECK(a.next_u64() == b.next_u64());

  // drawing stream 5 is unaffected by whether stream 4 was drawn first
  SplitMix64 s5(42, 5);
  const auto first = s5.next_u64();
  SplitMix64 s4(42, 4);
  (void)s4.next_u64();
  SplitMix64 s5_again(42, 5);
  CHECK(s5_again.next_u64() == first);
}

TEST_CASE("splitmix64: units stay in range with a sane mean") {
  SplitMix64 rng(9);
  double sum = 0;
  for (int i = 0; i < 20000; ++i) {
    const double u = rng.next_unit();
    CHECK(u >= 0.0);
    CHECK(u < 1.0);
    sum += u;
  }
  CHECK(std::abs(sum / 20000 - 0.5) < 0.01);
}

TEST_CASE("format_double round-trips exactly") {
  SplitMix64 rng(11);
  for (int i = 0; i < 2000; ++i) {
    double v = rng.next_symmetric(1.0) *
               std::pow(10.0, rng.next_symmetric(30.0));
    if (i % 7 == 0) v = -v;
    const std::string s = format_double(v);
    CHECK(std::strtod(s.c_str(), nullptr) == v);
  }
  CHECK(format_double(0.0) == "0");
  CHECK(format_double(1.0) == "1");
  CHECK(format_double(0.5) == "0.5");
}

TEST_CASE("csv table emits fixed columns") {
  CsvTable t({"a", "b"});
  t.add_row({1.0, 2.5});
  t.add_row({-0.25, 1e-300});
  CHECK(t.str() == "a,b\n1,2.5\n-0.25,1e-300\n");
  CHECK_THROWS_AS(t.add_row({1.0}), ParameterError);
}

TEST_CASE("min-cost assignment solves brute-forceable instances") {
  SplitMix64 rng(13);
  for (int trial = 0; trial < 200; ++trial) {
    const int n = 2 + static_cast<int>(rng.next_u64() % 5);
    Eigen::MatrixXd cost(n, n);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) cost(i, j) = rng.next_unit();
    const auto got = min_cost_assignment(cost);
    double got_cost = 0;
    std::vector<char> used(n, 0);
    for (int i = 0; i < n; ++i) {
      got_cost += cost(i, got[i]);
      CHECK(!used[got[i]]);
      used[got[i]] = 1;
    }
    // brute force over permutations
    std::vector<int> perm(n);
    for (int i = 0; i < n; ++i) perm[i] = i;
    double best = 1e300;
    do {
      double c = 0;
      for (int i = 0; i < n; ++i) c += cost(i, perm[i]);
      best = std::min(best, c);
    } while (std::next_permutation(perm.begin(), perm.end()));
    CHECK(got_cost == doctest::Approx(best).epsilon(1e-12));
  }
}
