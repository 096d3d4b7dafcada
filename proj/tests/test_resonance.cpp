#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <random>
#include <set>

#include "nfnls/resonance.hpp"

using namespace nfnls;

TEST_CASE("phase function closed forms") {
  CHECK(phase_phi(i64(0), 0, 0, 0) == 0);
  CHECK(phase_phi(i64(4), 3, 1, 2) == 4);
  CHECK(2 * (4 - 3) * (4 - 2) == 4);
  CHECK(phase_phi(i64(4), 5, 2, 1) == -6);
  CHECK(box_phase({4, 5, 2, 1}, PhaseRule::factorized) == -6);
  CHECK(phase_phi(4.0, 3.0, 1.0, 2.0) == doctest::Approx(4.0));
  // the two forms agree whenever n = n1 - n2 + n3
  std::mt19937_64 rng(31);
  std::uniform_int_distribution<int> u(-500, 500);
  for (int i = 0; i < 1000; ++i) {
    int n1 = u(rng), n2 = u(rng), n3 = u(rng);
    FrequencyTriple t{n1 - n2 + n3, n1, n2, n3};
    CHECK(box_phase(t, PhaseRule::tuple) == box_phase(t, PhaseRule::factorized));
  }
}

TEST_CASE("phase record") {
  auto r = make_phase_record({200, -190, 7});
  CHECK(r.mu_tilde == std::vector<i64>{200, 10, 17});
  CHECK(r.mu_hat[2] == doctest::Approx(200.0 * 10 * 17));
}

TEST_CASE("divisor counts") {
  CHECK(divisor_count(1) == 1);
  CHECK(divisor_count(12) == 6);
  CHECK(divisor_count(36) == 9);
  CHECK(divisor_count(97) == 2);
  CHECK_THROWS_AS(divisor_count(0), DomainError);
  auto sieve = divisor_sieve(2000);
  for (int m = 1; m <= 2000; ++m) CHECK(sieve[m] == divisor_count(m));
  auto g = divisor_growth(5000, 0.5);
  CHECK(g.max_ratio >= 1.0);
  CHECK(g.max_ratio == doctest::Approx(divisor_count(g.argmax) / std::sqrt(g.argmax)));
}

TEST_CASE("resonant R1 by brute force") {
  auto got = enumerate_triples(0, 1, ResonanceThreshold(1), TripleMode::resonant_R1);
  std::set<FrequencyTriple> want;
  for (int n1 = -1; n1 <= 1; ++n1)
    for (int n2 = -1; n2 <= 1; ++n2)
      for (int n3 = -1; n3 <= 1; ++n3)
        if (std::abs(n1 - n2 + n3) <= 1) want.insert({0, n1, n2, n3});
  CHECK(std::set<FrequencyTriple>(got.begin(), got.end()) == want);
  CHECK(std::is_sorted(got.begin(), got.end()));
}

TEST_CASE("far threshold empties the complement") {
  CHECK(enumerate_triples(0, 5, ResonanceThreshold(1000), TripleMode::A_N_complement).empty());
  CHECK_THROWS_AS(ResonanceThreshold(0.0), DomainError);
  CHECK_THROWS_AS(enumerate_triples(0, 6, 5, ResonanceThreshold(2), TripleMode::A_N), RangeError);
}

TEST_CASE("modes partition the window") {
  for (PhaseRule rule : {PhaseRule::tuple, PhaseRule::factorized})
    for (int n : {-3, 0, 2})
      for (double N : {2.0, 10.0, 40.0}) {
        const int W = 6;
        ResonanceThreshold th(N);
        auto a = enumerate_triples(n, W, th, TripleMode::A_N, rule);
        auto c = enumerate_triples(n, W, th, TripleMode::A_N_complement, rule);
        auto r = enumerate_triples(n, W, th, TripleMode::resonant_R2, rule);
        i64 total = 0;
        for (int n1 = -W; n1 <= W; ++n1)
          for (int n2 = -W; n2 <= W; ++n2)
            for (int n3 = -W; n3 <= W; ++n3) total += std::abs(n1 - n2 + n3 - n) <= 1;
        CHECK(static_cast<i64>(a.size() + c.size() + r.size()) == total);
        for (auto& t : c) CHECK(std::llabs(box_phase(t, rule)) > N);
        for (auto& t : a) CHECK(!is_resonant(t));
        auto r1 = enumerate_triples(n, W, th, TripleMode::resonant_R1, rule);
        for (auto& t : r1) CHECK(std::binary_search(r.begin(), r.end(), t));
      }
}

TEST_CASE("C set membership") {
  CHECK(c_set_member(1, 200, 10, 200));
  CHECK(10 <= 125 * std::pow(200.0, 0.99));
  CHECK_FALSE(c_set_member(1, 200, 1e6, 200));
  CHECK(c_set_member(3, 5, 0, 7));
  CHECK(c_set_threshold(1, 200, 3) == doctest::Approx(125 * std::pow(200.0, 0.99)));
  CHECK(c_set_threshold(2, 3, -400) == doctest::Approx(343 * std::pow(400.0, 0.99)));
}

TEST_CASE("divisor choice count") {
  CHECK(divisor_choice_count(0, 7, 100) == 0);
  CHECK(divisor_choice_count(0, 0, 100) == 0);
  CHECK(divisor_choice_count(0, 2, 100) == 2);
  for (int n : {0, 3, -4})
    for (i64 mu : {24, -24, 72, 2, 50}) {
      const int W = 30;
      i64 brute = 0;
      for (int n1 = -W; n1 <= W; ++n1)
        for (int n3 = -W; n3 <= W; ++n3) brute += 2 * i64(n - n1) * (n - n3) == mu;
      CHECK(divisor_choice_count(n, mu, W) == brute);
    }
}
