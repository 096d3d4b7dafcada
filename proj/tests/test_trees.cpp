#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdlib>
#include <fstream>
#include <random>
#include <set>
#include <sstream>

#include "nfnls/trees.hpp"

using namespace nfnls;

namespace {

bool close(int a, int b) { return std::abs(a - b) <= 1; }

// Independent validity check: tuple phases, signs from counting middle ancestors.
bool oracle_valid(const OrderedTree& t, const std::vector<int>& f, int W, double N, bool chain) {
  for (int k : f)
    if (std::abs(k) > W) return false;
  std::vector<long long> mu;
  for (int a : t.chronicle) {
    const auto& c = t.nodes[a].children;
    if (!close(f[c[0]] - f[c[1]] + f[c[2]], f[a])) return false;
    if (close(f[c[0]], f[a]) || close(f[c[2]], f[a])) return false;
    int flips = 0;
    for (int p = a; p > 0; p = t.nodes[p].parent)
      if (t.nodes[p].role == NodeRole::middle) ++flips;
    long long n = f[a], n1 = f[c[0]], n2 = f[c[1]], n3 = f[c[2]];
    long long ph = n * n - n1 * n1 + n2 * n2 - n3 * n3;
    mu.push_back(flips % 2 ? -ph : ph);
  }
  if (!(std::llabs(mu[0]) > N)) return false;
  long long partial = 0;
  for (long long m : mu)
    if ((partial += m) == 0) return false;
  if (chain) {
    long long prev = mu[0];
    for (size_t g = 1; g < mu.size(); ++g) {
      long long cur = prev + mu[g];
      if (c_set_member(static_cast<int>(g), prev, cur, mu[0])) return false;
      prev = cur;
    }
  }
  return true;
}

std::set<std::vector<int>> brute_force(const OrderedTree& t, int root, int W, double N, bool chain) {
  std::set<std::vector<int>> out;
  std::vector<int> f(t.size(), -W);
  f[0] = root;
  while (true) {
    if (oracle_valid(t, f, W, N, chain)) out.insert(f);
    int i = 1;
    while (i < t.size() && f[i] == W) f[i++] = -W;
    if (i == t.size()) break;
    ++f[i];
  }
  return out;
}

}  // namespace

TEST_CASE("tree counts are double factorials") {
  CHECK(enumerate_trees(1).size() == 1);
  CHECK(enumerate_trees(2).size() == 3);
  CHECK(enumerate_trees(3).size() == 15);
  CHECK(enumerate_trees(6).size() == 10395);
  for (int J = 1; J <= 6; ++J) CHECK(static_cast<i64>(enumerate_trees(J).size()) == double_factorial_odd(J));
  CHECK_THROWS_AS(enumerate_trees(7), ResourceError);
  CHECK_THROWS_AS(enumerate_trees(0), ContractError);
}

TEST_CASE("trees are distinct and well formed") {
  for (int J = 1; J <= 4; ++J) {
    auto ts = enumerate_trees(J);
    std::set<std::vector<int>> seen;
    for (auto& t : ts) {
      CHECK(seen.insert(t.chronicle).second);
      CHECK(t.size() == 3 * J + 1);
      CHECK(static_cast<int>(t.terminals().size()) == 2 * J + 1);
      for (int g = 1; g <= J; ++g) {
        const int a = t.chronicle[g - 1];
        CHECK(t.generation_of(a) == g);
        CHECK(t.nodes[a].children[0] == 3 * g - 2);
        CHECK(t.nodes[a].children[2] == 3 * g);
      }
    }
  }
}

TEST_CASE("signs") {
  OrderedTree t = enumerate_trees(1)[0];
  SignTable s = compute_signs(t);
  CHECK(s.psgn == std::vector<int>{1, 1, -1, 1});
  CHECK(s.fsgn == s.psgn);

  OrderedTree mm = tree_from_chronicle({0, 2});  // node 6 is the middle child of the middle child
  SignTable sm = compute_signs(mm);
  CHECK(sm.psgn[5] == -1);
  CHECK(sm.fsgn[5] == 1);
  CHECK(sm.fsgn[4] == -1);

  for (int J = 1; J <= 3; ++J)
    for (auto& tr : enumerate_trees(J)) {
      SignTable st = compute_signs(tr);
      for (int a = 0; a < tr.size(); ++a) {
        int m = 0;
        for (int p = tr.nodes[a].parent; p >= 0; p = tr.nodes[p].parent) m += tr.nodes[p].role == NodeRole::middle;
        CHECK(st.fsgn[a] * st.psgn[a] == (m % 2 ? -1 : 1));
      }
    }
}

TEST_CASE("expand contract") {
  OrderedTree t = enumerate_trees(1)[0];
  CHECK_THROWS_AS(expand(t, 0), ContractError);
  CHECK_THROWS_AS(expand(t, 9), ContractError);
}

TEST_CASE("chronicle text round trip and golden list") {
  for (auto& t : enumerate_trees(4)) CHECK(parse_tree(dump_tree(t)) == t);
  std::ifstream in(std::string(NFNLS_GOLDEN_DIR) + "/trees_J3.txt");
  REQUIRE(in.good());
  std::stringstream ss;
  ss << in.rdbuf();
  CHECK(dump_trees(enumerate_trees(3)) == ss.str());
  CHECK_THROWS_AS(parse_tree("(1)(2)"), ConfigError);
  CHECK_THROWS_AS(parse_tree("(0)(x)"), ConfigError);
  CHECK_THROWS_AS(parse_tree("(0)(0)"), ConfigError);
  CHECK_THROWS_AS(parse_tree("(0"), ConfigError);
}

TEST_CASE("J = 1 assignments are the complement triples") {
  OrderedTree t = enumerate_trees(1)[0];
  for (int n = -3; n <= 3; ++n) {
    IndexSearch o;
    o.window = 3;
    o.N = 2;
    std::set<FrequencyTriple> got;
    for (auto& a : enumerate_index_functions(t, n, o)) got.insert({a.freq[0], a.freq[1], a.freq[2], a.freq[3]});
    auto want = enumerate_triples(n, 3, ResonanceThreshold(2), TripleMode::A_N_complement);
    CHECK(got == std::set<FrequencyTriple>(want.begin(), want.end()));
  }
}

TEST_CASE("threshold beyond the window gives nothing") {
  IndexSearch o;
  o.window = 3;
  o.N = 2.0 * 36 + 1;
  for (int J = 1; J <= 2; ++J)
    for (auto& t : enumerate_trees(J))
      for (int n = -3; n <= 3; ++n) CHECK(count_index_functions(t, n, o) == 0);
}

TEST_CASE("J = 2 enumeration against brute force") {
  for (bool chain : {false, true})
    for (auto& t : enumerate_trees(2))
      for (int n : {-2, 0, 1}) {
        IndexSearch o;
        o.window = 3;
        o.N = 3;
        o.filter = chain ? ChainFilter::C_complement_chain : ChainFilter::none;
        std::set<std::vector<int>> got;
        enumerate_index_functions(t, n, o, [&](const AssignmentView& v) {
          got.insert(v.freq);
          auto r = compute_phases(t, v.freq, o.rule);
          CHECK(r.mu == v.mu);
          CHECK(r.mu_tilde == v.mu_tilde);
          for (double h : r.mu_hat) CHECK(h != 0.0);
        });
        CHECK(got == brute_force(t, n, 3, 3, chain));
        CHECK(count_index_functions(t, n, o) == static_cast<i64>(got.size()));
      }
}

TEST_CASE("all-roots enumeration equals the per-root search") {
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 12; ++trial) {
    const int J = 1 + trial % 3;
    const int W = (J == 3 ? 3 : 5) + trial % 2;
    std::vector<char> sup(2 * W + 1), core(2 * W + 1);
    for (auto& c : sup) c = rng() % 3 != 0;
    for (int i = 0; i < 2 * W + 1; ++i) core[i] = sup[i] && rng() % 2;
    IndexSearch o;
    o.window = W;
    o.N = 2 + trial % 4;
    o.filter = trial % 2 ? ChainFilter::C_complement_chain : ChainFilter::none;
    o.rule = trial % 3 == 0 ? PhaseRule::factorized : PhaseRule::tuple;
    o.leaf_support = &sup;
    o.core_support = trial % 4 < 2 ? &core : nullptr;
    o.max_outside = trial % 3 == 0 ? 0 : 1;
    o.upper = W - trial % 3;
    for (auto& t : enumerate_trees(J)) {
      std::set<std::vector<int>> a, b;
      for (int n = -W; n <= std::min(W, o.upper); ++n)
        enumerate_index_functions(t, n, o, [&](const AssignmentView& v) { a.insert(v.freq); });
      enumerate_all_roots(t, o, [&](const AssignmentView& v) {
        b.insert(v.freq);
        CHECK(valid_assignment(t, v.freq, o));
      });
      CHECK(a == b);
      CHECK(count_all_roots(t, o) == static_cast<i64>(b.size()));
    }
  }
}

TEST_CASE("node form of the phase sum") {
  OrderedTree t = tree_from_chronicle({0, 1, 4});
  IndexSearch o;
  o.window = 8;
  o.N = 2;
  std::mt19937_64 rng(9);
  auto a = sample_index_function(t, 0, o, rng);
  REQUIRE(a.has_value());
  CHECK(valid_assignment(t, a->freq, o));
  auto r = compute_phases(t, a->freq, o.rule);
  // root: nothing lies outside its subtree, so nothing counts except the root itself
  CHECK(node_mu_tilde(t, a->freq, o.rule, 0) == r.mu[0]);
  // node 1 drops its descendant node 4
  CHECK(node_mu_tilde(t, a->freq, o.rule, 1) == r.mu[0] + r.mu[1]);
  CHECK(node_mu_tilde(t, a->freq, o.rule, 2) == r.mu_tilde[2]);
}

TEST_CASE("chain floor and search errors") {
  CHECK(chain_phase_floor(1, 4.0) == 4.0);
  CHECK(chain_phase_floor(2, 4.0) >= 0.0);
  CHECK_THROWS_AS(chain_phase_floor(0, 4.0), ContractError);
  OrderedTree t = enumerate_trees(1)[0];
  IndexSearch o;
  o.window = 5;
  o.n_max = 4;
  CHECK_THROWS_AS(count_index_functions(t, 0, o), RangeError);
  o.n_max = -1;
  o.N = 0.0;
  CHECK_THROWS_AS(count_index_functions(t, 0, o), DomainError);
}

TEST_CASE("sampler output is valid") {
  std::mt19937_64 rng(10);
  for (int J = 1; J <= 3; ++J)
    for (auto& t : enumerate_trees(J)) {
      IndexSearch o;
      o.window = 200;
      o.N = 4;
      o.filter = ChainFilter::C_complement_chain;
      auto a = sample_index_function(t, 3, o, rng, 4000000);
      if (!a) continue;
      CHECK(valid_assignment(t, a->freq, o));
      CHECK(a->freq[0] == 3);
    }
}
