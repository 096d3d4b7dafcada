#pragma once

#include <functional>
#include <limits>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "nfnls/resonance.hpp"

namespace nfnls {

enum class NodeRole { root, left, middle, right };

struct TreeNode {
  int parent = -1;
  int children[3] = {-1, -1, -1};
  int generation_born = 0;
  NodeRole role = NodeRole::root;

  bool terminal() const { return children[0] < 0; }
};

// Node ids: root 0; generation g adds 3g-2, 3g-1, 3g (left, middle, right).
// chronicle[g-1] is the node expanded at generation g.
struct OrderedTree {
  int J = 0;
  std::vector<TreeNode> nodes;
  std::vector<int> chronicle;

  int size() const { return static_cast<int>(nodes.size()); }
  std::vector<int> terminals() const;  // depth-first, left/middle/right
  std::vector<int> internals() const { return chronicle; }
  int generation_of(int node) const;  // generation at which node was expanded, 0 if terminal
  bool is_descendant(int node, int ancestor) const;
  int middle_predecessors(int node) const;
  bool operator==(const OrderedTree& o) const { return chronicle == o.chronicle; }
};

inline constexpr int kDefaultJMax = 6;

OrderedTree root_tree();
OrderedTree expand(const OrderedTree& t, int node);
OrderedTree tree_from_chronicle(const std::vector<int>& chronicle);
std::vector<OrderedTree> enumerate_trees(int J, int J_max = kDefaultJMax);
i64 double_factorial_odd(int J);  // (2J-1)!!

struct SignTable {
  std::vector<int> psgn;
  std::vector<int> fsgn;
};

SignTable compute_signs(const OrderedTree& t);

// One tree per line: the chronicle as parenthesized node ids, e.g. (0)(1)(4)
std::string dump_tree(const OrderedTree& t);
std::string dump_trees(const std::vector<OrderedTree>& ts);
OrderedTree parse_tree(const std::string& line);

enum class ChainFilter { none, C_complement_chain };

struct IndexSearch {
  int window = 0;
  double N = 1.0;
  ChainFilter filter = ChainFilter::none;
  PhaseRule rule = PhaseRule::tuple;
  int n_max = -1;  // when set, window must not exceed it
  int upper = std::numeric_limits<int>::max();  // optional cap on every box index
  // optional box support for terminal nodes: leaf_support[k + window] != 0 allows box k
  const std::vector<char>* leaf_support = nullptr;
  // optional core support, same layout: at most max_outside terminals may fall outside it
  const std::vector<char>* core_support = nullptr;
  int max_outside = 0;
};

struct IndexAssignment {
  OrderedTree tree;
  std::vector<int> freq;  // by node id
  PhaseRecord phases;     // signed per-generation phases
  int n_root = 0;
};

struct AssignmentView {
  const std::vector<int>& freq;
  const std::vector<i64>& mu;
  const std::vector<i64>& mu_tilde;
};

using AssignmentVisitor = std::function<void(const AssignmentView&)>;

// Generation phase: fsgn(a) * Phi_rule(n_a, n_a1, n_a2, n_a3) for the node a expanded at that generation.
std::vector<i64> generation_phases(const OrderedTree& t, const SignTable& s, const std::vector<int>& freq,
                                   PhaseRule rule);
PhaseRecord compute_phases(const OrderedTree& t, const std::vector<int>& freq, PhaseRule rule);

// Node form: sum of the phases of internal nodes that are not strict descendants of alpha.
i64 node_mu_tilde(const OrderedTree& t, const std::vector<int>& freq, PhaseRule rule, int alpha);

bool valid_assignment(const OrderedTree& t, const std::vector<int>& freq, const IndexSearch& opt);

i64 count_index_functions(const OrderedTree& t, int n_root, const IndexSearch& opt);
void enumerate_index_functions(const OrderedTree& t, int n_root, const IndexSearch& opt,
                               const AssignmentVisitor& visit);
std::vector<IndexAssignment> enumerate_index_functions(const OrderedTree& t, int n_root,
                                                       const IndexSearch& opt);

// Same assignments as the per-root search, over every root box at once, built from the leaves up.
void enumerate_all_roots(const OrderedTree& t, const IndexSearch& opt, const AssignmentVisitor& visit);
i64 count_all_roots(const OrderedTree& t, const IndexSearch& opt);

// Lower bound on |mu_g| implied by the chain through C_1^c .. C_{g-1}^c (g >= 2), or N for g = 1.
double chain_phase_floor(int g, double N);

// Random assignment by generation; leaf_support and core_support are not consulted.
std::optional<IndexAssignment> sample_index_function(const OrderedTree& t, int n_root, const IndexSearch& opt,
                                                     std::mt19937_64& rng, int max_tries = 200000);

}  // namespace nfnls
