#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "nfnls/multilinear.hpp"

using namespace nfnls;

namespace {

double max_diff(const BandCoefficients& a, const BandCoefficients& b) {
  double m = 0.0;
  for (int i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a.coeffs[i] - b.coeffs[i]));
  return m;
}

double max_abs(const BandCoefficients& a) {
  double m = 0.0;
  for (auto z : a.coeffs) m = std::max(m, std::abs(z));
  return m;
}

BandCoefficients single_bin(const Grid& g, int j, cplx value) {
  BandCoefficients b = zero_band(g, g.box_of_bin(j));
  b.coeffs[j - b.first_bin] = value;
  return b;
}

IndexAssignment assignment(const OrderedTree& t, std::vector<int> freq) {
  IndexAssignment a;
  a.tree = t;
  a.freq = freq;
  a.phases = compute_phases(t, freq, PhaseRule::tuple);
  a.n_root = freq[0];
  return a;
}

}  // namespace

TEST_CASE("q1 on single bins") {
  Grid g = make_grid(1, 12);
  auto b1 = single_bin(g, 3, 1.0), b2 = single_bin(g, 1, 1.0), b3 = single_bin(g, 2, 1.0);
  auto at4 = q1(4, b1, b2, b3, 0.0);
  CHECK(std::abs(at4.coeffs[0] - 1.0 / (2 * kPi)) < 1e-14);
  CHECK(max_abs(q1(10, b1, b2, b3, 0.0)) < 1e-15);
  CHECK(max_diff(q1_band(4, b1, b2, b3, 0.0), at4) < 1e-15);
  CHECK(max_abs(q1(4, zero_band(g, 3), b2, b3, 0.3)) == 0.0);
}

TEST_CASE("padded product and band convolution agree") {
  std::mt19937_64 rng(41);
  for (int B : {1, 3, 8}) {
    Grid g = make_grid(B, 10);
    for (int trial = 0; trial < 10; ++trial) {
      std::uniform_int_distribution<int> box(-8, 8);
      auto b1 = random_band(g, box(rng), rng), b2 = random_band(g, box(rng), rng), b3 = random_band(g, box(rng), rng);
      int n = b1.n - b2.n + b3.n;
      if (n < -10 || n >= 10) continue;
      double t = 0.1 * trial;
      auto a = q1(n, b1, b2, b3, t), b = q1_band(n, b1, b2, b3, t);
      CHECK(max_diff(a, b) <= 1e-12 * std::max(1.0, max_abs(a)));
      CHECK(a.l2_norm() > 1e-6);
    }
  }
}

TEST_CASE("q1 bound constant is stable") {
  // coherent unit bands; random phases average out and shrink like 1/B
  std::mt19937_64 rng(42);
  std::uniform_real_distribution<double> ang(0.0, 6.283185307179586);
  auto coherent = [&](const Grid& g, int n) {
    BandCoefficients b = zero_band(g, n);
    const cplx z = std::polar(1.0, ang(rng));
    for (auto& c : b.coeffs) c = z;
    return b;
  };
  auto sweep = [&](int B) {
    Grid g = make_grid(B, 12);
    double worst = 0.0;
    std::uniform_int_distribution<int> box(-5, 5);
    for (int i = 0; i < 100; ++i) {
      auto b1 = coherent(g, box(rng)), b2 = coherent(g, box(rng)), b3 = coherent(g, box(rng));
      int n = b1.n - b2.n + b3.n;
      double m = 0.0;
      for (int k = n - 1; k <= n + 1; ++k) m = std::max(m, q1_band(k, b1, b2, b3, 0.2).l2_norm());
      worst = std::max(worst, m);
    }
    return worst;
  };
  double c4 = sweep(4), c8 = sweep(8);
  CHECK(c4 < 1.0);
  CHECK(c8 < 1.0);
  CHECK(c8 / c4 < 2.0);
  CHECK(c4 / c8 < 2.0);
}

TEST_CASE("q1_tilde") {
  Grid g = make_grid(4, 16);
  std::mt19937_64 rng(43);
  auto b1 = random_band(g, 7, rng), b2 = random_band(g, 4, rng), b3 = random_band(g, -1, rng);
  CHECK(max_abs(q1_tilde(2, zero_band(g, 7), b2, b3, 0.1)) == 0.0);
  CHECK_THROWS_AS(q1_tilde(2, random_band(g, 3, rng), b2, b3, 0.0), ContractError);

  // d/dt of the frozen-data operator is -2i times q1 on the same boxes
  const double t = 0.3, h = 1e-5;
  for (int n : {1, 2, 3}) {
    auto p = q1_tilde(n, b1, b2, b3, t + h), m = q1_tilde(n, b1, b2, b3, t - h);
    auto ref = q1_band(n, b1, b2, b3, t);
    double err = 0.0;
    for (int i = 0; i < g.B; ++i) err = std::max(err, std::abs((p.coeffs[i] - m.coeffs[i]) / (2 * h) - cplx(0, -2) * ref.coeffs[i]));
    CHECK(err <= 1e-6 * max_abs(ref));
  }

  // bound shape: norm times |n-n1||n-n3| stays bounded over the separation sweep
  double lo = INFINITY, hi = 0.0;
  Grid h4 = make_grid(4, 104);
  for (int d1 = 2; d1 <= 50; d1 += 6)
    for (int d3 = 2; d3 <= 50; d3 += 8) {
      auto c1 = random_band(h4, d1, rng), c3 = random_band(h4, d3, rng), c2 = random_band(h4, d1 + d3, rng);
      double r = q1_tilde(0, c1, c2, c3, 0.0).l2_norm() * d1 * d3;
      lo = std::min(lo, r);
      hi = std::max(hi, r);
    }
  CHECK(hi < 1.0);
  CHECK(hi / lo < 50.0);
}

TEST_CASE("q_tree at J = 1 is q1_tilde") {
  Grid g = make_grid(4, 16);
  std::mt19937_64 rng(44);
  OrderedTree t = enumerate_trees(1)[0];
  for (auto f : {std::vector<int>{0, 5, 8, 3}, {-2, 4, -3, -9}, {3, -4, -8, -1}}) {
    auto b1 = random_band(g, f[1], rng), b2 = random_band(g, f[2], rng), b3 = random_band(g, f[3], rng);
    auto qt = q_tree(t, assignment(t, f), make_band_tuple(t, {b1, b2, b3}), 0.25);
    auto ref = q1_tilde(f[0], b1, b2, b3, 0.25);
    CHECK(max_diff(qt, ref) <= 1e-13 * max_abs(ref));
  }
}

TEST_CASE("q_tree is multilinear") {
  Grid g = make_grid(2, 32);
  std::mt19937_64 rng(45);
  OrderedTree t = tree_from_chronicle({0, 1});
  // node 1 = 10 splits into 4,5,6 ; root 1 from 1,2,3
  std::vector<int> f{1, 10, 3, -6, 0, 0, 0};
  f[4] = 14;
  f[6] = 20;
  f[5] = f[4] + f[6] - f[1];
  auto a = assignment(t, f);
  std::vector<BandCoefficients> leaves;
  for (int b : t.terminals()) leaves.push_back(random_band(g, f[b], rng));
  auto base = q_tree(t, a, make_band_tuple(t, leaves), 0.1);
  REQUIRE(base.l2_norm() > 0.0);
  auto twice = leaves;
  for (auto& z : twice[2].coeffs) z *= 2.0;
  CHECK(q_tree(t, a, make_band_tuple(t, twice), 0.1).l2_norm() == doctest::Approx(2 * base.l2_norm()).epsilon(1e-12));
  auto zero = leaves;
  zero[3] = zero_band(g, f[t.terminals()[3]]);
  CHECK(max_abs(q_tree(t, a, make_band_tuple(t, zero), 0.1)) == 0.0);
  CHECK_THROWS_AS(make_band_tuple(t, {leaves[0]}), ContractError);
}

TEST_CASE("parallel kernel matches the serial reference") {
  Grid g = make_grid(4, 24);
  std::mt19937_64 rng(46);
  OrderedTree t = tree_from_chronicle({0, 3});
  std::vector<int> f{3, 5, -2, -4, -9, -6, -1};
  SignTable s = compute_signs(t);
  std::vector<BandCoefficients> store;
  auto term = t.terminals();
  store.reserve(term.size());
  KernelInput in;
  in.tree = &t;
  in.signs = &s;
  in.freq = &f;
  in.leaf_by_node.assign(t.size(), nullptr);
  for (int b : term) {
    store.push_back(random_band(g, f[b], rng));
    in.leaf_by_node[b] = &store.back();
  }
  in.t = 0.2;
  for (auto w : {KernelWeight::half_phase, KernelWeight::time_derivative}) {
    in.weight = w;
    BandCoefficients a = zero_band(g, f[0]), b = zero_band(g, f[0]);
    tree_kernel_serial(in, a, cplx(0.5, 1.0));
    tree_kernel(in, b, cplx(0.5, 1.0));
    CHECK(a.l2_norm() > 0.0);
    CHECK(max_diff(a, b) <= 1e-13 * max_abs(a));
  }
  BandCoefficients wrong = zero_band(g, f[0] + 1);
  CHECK_THROWS_AS(tree_kernel(in, wrong), ContractError);
}

TEST_CASE("second-generation denominator by hand") {
  Grid g = make_grid(1, 64);
  OrderedTree t = tree_from_chronicle({0, 1});
  // terminals depth first: 4, 5, 6, 2, 3
  const int m1 = 20, m2 = 3, m3 = -7, x2 = 4, x3 = -15;
  const int x1 = m1 - m2 + m3, x = x1 - x2 + x3;
  std::vector<int> f{x, x1, x2, x3, m1, m2, m3};
  auto ev = evaluate_symbol(t, f, g, {m1, m2, m3, x2, x3});
  const double a = double(x - x1) * (x - x3), b = double(x1 - m1) * (x1 - m3);
  CHECK(ev.denominators.size() == 2);
  CHECK(ev.denominators[0] == doctest::Approx(2 * a));
  CHECK(ev.denominators[1] == doctest::Approx(2 * (a + b)));
  CHECK(std::abs(ev.value - cplx(1.0 / (a * (a + b)))) < 1e-15);
  // a bin outside the assigned box kills the symbol
  auto off = evaluate_symbol(t, f, g, {m1 + 1, m2, m3, x2, x3});
  CHECK(off.value == cplx(0.0));
}

TEST_CASE("tree bound constants") {
  std::mt19937_64 rng(47);
  OrderedTree t1 = enumerate_trees(1)[0];
  auto cells = [&](int B) {
    double worst = 0.0;
    for (auto f : {std::vector<int>{0, 3, 7, 4}, {0, -5, -2, 3}, {2, 9, 30, 23}, {-1, 12, 2, -11}})
      worst = std::max(worst, certify_tree_bound(t1, assignment(t1, f), 8, B, rng));
    return worst;
  };
  const double c4 = cells(4), c8 = cells(8);
  CHECK(c4 < 1.0);
  CHECK(c8 / c4 < 2.0);
  CHECK(c4 / c8 < 2.0);

  // J = 1 cells against the q1_tilde sweep with |n - n1||n - n3| weights
  Grid g = make_grid(4, 40);
  double fir = 0.0;
  for (auto f : {std::vector<int>{0, 3, 7, 4}, {0, -5, -2, 3}, {2, 9, 30, 23}, {-1, 12, 2, -11}})
    for (int k = 0; k < 8; ++k) {
      auto b1 = random_band(g, f[1], rng), b2 = random_band(g, f[2], rng), b3 = random_band(g, f[3], rng);
      fir = std::max(fir, q1_tilde(f[0], b1, b2, b3, 0.0).l2_norm() * std::abs(f[0] - f[1]) * std::abs(f[0] - f[3]));
    }
  CHECK(c4 / fir < 3.0);
  CHECK(fir / c4 < 3.0);
}
