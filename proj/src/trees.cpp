#include "nfnls/trees.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdlib>
#include <sstream>
#include <unordered_map>

namespace nfnls {

std::vector<int> OrderedTree::terminals() const {
  std::vector<int> out;
  std::vector<int> stack{0};
  while (!stack.empty()) {
    int a = stack.back();
    stack.pop_back();
    if (nodes[a].terminal()) {
      out.push_back(a);
    } else {
      for (int k = 2; k >= 0; --k) stack.push_back(nodes[a].children[k]);
    }
  }
  return out;
}

int OrderedTree::generation_of(int node) const {
  for (int g = 0; g < static_cast<int>(chronicle.size()); ++g)
    if (chronicle[g] == node) return g + 1;
  return 0;
}

bool OrderedTree::is_descendant(int node, int ancestor) const {
  int p = nodes[node].parent;
  while (p >= 0) {
    if (p == ancestor) return true;
    p = nodes[p].parent;
  }
  return false;
}

int OrderedTree::middle_predecessors(int node) const {
  int count = 0;
  int p = nodes[node].parent;
  while (p >= 0) {
    if (nodes[p].role == NodeRole::middle) ++count;
    p = nodes[p].parent;
  }
  return count;
}

OrderedTree root_tree() {
  OrderedTree t;
  t.J = 0;
  t.nodes.resize(1);
  return t;
}

OrderedTree expand(const OrderedTree& t, int node) {
  if (node < 0 || node >= t.size()) throw ContractError("expand: node id out of range");
  if (!t.nodes[node].terminal()) throw ContractError("expand: node is not terminal");
  OrderedTree out = t;
  out.J = t.J + 1;
  const NodeRole roles[3] = {NodeRole::left, NodeRole::middle, NodeRole::right};
  for (int k = 0; k < 3; ++k) {
    TreeNode c;
    c.parent = node;
    c.generation_born = out.J;
    c.role = roles[k];
    out.nodes[node].children[k] = out.size();
    out.nodes.push_back(c);
  }
  out.chronicle.push_back(node);
  return out;
}

OrderedTree tree_from_chronicle(const std::vector<int>& chronicle) {
  OrderedTree t = root_tree();
  for (int a : chronicle) t = expand(t, a);
  return t;
}

i64 double_factorial_odd(int J) {
  i64 r = 1;
  for (int k = 1; k <= 2 * J - 1; k += 2) r *= k;
  return r;
}

std::vector<OrderedTree> enumerate_trees(int J, int J_max) {
  if (J < 1) throw ContractError("enumerate_trees: J must be >= 1");
  if (J > J_max) throw ResourceError("enumerate_trees: J exceeds J_max");
  std::vector<OrderedTree> level{root_tree()};
  for (int g = 1; g <= J; ++g) {
    std::vector<OrderedTree> next;
    next.reserve(level.size() * (2 * g - 1));
    for (const auto& t : level)
      for (int a : t.terminals()) next.push_back(expand(t, a));
    level.swap(next);
  }
  return level;
}

SignTable compute_signs(const OrderedTree& t) {
  SignTable s;
  s.psgn.resize(t.size());
  s.fsgn.resize(t.size());
  for (int a = 0; a < t.size(); ++a) {
    s.psgn[a] = t.nodes[a].role == NodeRole::middle ? -1 : 1;
    s.fsgn[a] = (t.middle_predecessors(a) % 2 == 0) ? s.psgn[a] : -s.psgn[a];
  }
  return s;
}

std::string dump_tree(const OrderedTree& t) {
  std::string out;
  for (int a : t.chronicle) out += "(" + std::to_string(a) + ")";
  return out;
}

std::string dump_trees(const std::vector<OrderedTree>& ts) {
  std::string out;
  for (const auto& t : ts) out += dump_tree(t) + "\n";
  return out;
}

OrderedTree parse_tree(const std::string& line) {
  std::vector<int> chronicle;
  size_t i = 0;
  while (i < line.size()) {
    if (std::isspace(static_cast<unsigned char>(line[i]))) {
      ++i;
      continue;
    }
    if (line[i] != '(') throw ConfigError("parse_tree: expected '(' in \"" + line + "\"");
    size_t close = line.find(')', i);
    if (close == std::string::npos) throw ConfigError("parse_tree: unterminated group");
    std::string num = line.substr(i + 1, close - i - 1);
    if (num.empty() || num.find_first_not_of("0123456789") != std::string::npos)
      throw ConfigError("parse_tree: bad node id \"" + num + "\"");
    chronicle.push_back(std::stoi(num));
    i = close + 1;
  }
  if (chronicle.empty() || chronicle.front() != 0) throw ConfigError("parse_tree: chronicle must start at (0)");
  try {
    return tree_from_chronicle(chronicle);
  } catch (const ContractError& e) {
    throw ConfigError(std::string("parse_tree: ") + e.what());
  }
}

namespace {

i64 node_phase(const OrderedTree& t, const std::vector<int>& freq, int a, PhaseRule rule) {
  const auto& c = t.nodes[a].children;
  return box_phase(FrequencyTriple{freq[a], freq[c[0]], freq[c[1]], freq[c[2]]}, rule);
}

i64 max_phase_bound(int W, PhaseRule rule) {
  i64 w = W;
  return rule == PhaseRule::tuple ? 2 * w * w : 8 * w * w;
}

std::vector<int> subtree_leaf_counts(const OrderedTree& t) {
  std::vector<int> k(t.size(), 0);
  for (int a = t.size() - 1; a >= 0; --a) {
    if (t.nodes[a].terminal()) {
      k[a] = 1;
    } else {
      for (int c : t.nodes[a].children) k[a] += k[c];
    }
  }
  return k;
}

// allowed[node] is the sorted list of boxes the node may take.
std::vector<std::vector<int>> allowed_boxes(const OrderedTree& t, const IndexSearch& opt) {
  const int W = opt.window;
  const int hi = std::min(W, opt.upper);
  std::vector<int> full;
  for (int k = -W; k <= hi; ++k) full.push_back(k);
  std::vector<std::vector<int>> out(t.size(), full);
  if (!opt.leaf_support) return out;
  const auto& sup = *opt.leaf_support;
  if (static_cast<int>(sup.size()) != 2 * W + 1) throw ContractError("leaf_support size must be 2*window+1");
  std::vector<int> pts;
  for (int k = -W; k <= hi; ++k)
    if (sup[k + W]) pts.push_back(k);
  auto counts = subtree_leaf_counts(t);
  for (int a = 0; a < t.size(); ++a) {
    if (t.nodes[a].terminal()) {
      out[a] = pts;
      continue;
    }
    if (static_cast<int>(pts.size()) * 4 > 2 * W + 1) continue;
    const int k = counts[a];
    const int plus = (k + 1) / 2, minus = (k - 1) / 2, slack = (k - 1) / 2;
    const int R = k * W + slack;
    std::vector<char> cur(2 * R + 1, 0), nxt;
    cur[R] = 1;
    auto step = [&](int sgn) {
      nxt.assign(2 * R + 1, 0);
      for (int x = -R; x <= R; ++x) {
        if (!cur[x + R]) continue;
        for (int p : pts) {
          int y = x + sgn * p;
          if (y >= -R && y <= R) nxt[y + R] = 1;
        }
      }
      cur.swap(nxt);
    };
    for (int i = 0; i < plus; ++i) step(+1);
    for (int i = 0; i < minus; ++i) step(-1);
    std::vector<int> list;
    for (int y = -W; y <= hi; ++y) {
      bool hit = false;
      for (int d = -slack; d <= slack && !hit; ++d) {
        int x = y + d;
        if (x >= -R && x <= R && cur[x + R]) hit = true;
      }
      if (hit) list.push_back(y);
    }
    out[a] = list;
  }
  return out;
}

bool in_core(const IndexSearch& opt, int k) {
  const int W = opt.window;
  return k >= -W && k <= W && (*opt.core_support)[k + W];
}

void check_search(const IndexSearch& opt) {
  if (opt.window < 0) throw RangeError("index search: negative window");
  if (opt.n_max >= 0 && opt.window > opt.n_max) throw RangeError("index search: window exceeds grid n_max");
  if (!(opt.N > 0.0)) throw DomainError("index search: N must be positive");
  if (opt.core_support && static_cast<int>(opt.core_support->size()) != 2 * opt.window + 1)
    throw ContractError("core_support size must be 2*window+1");
  if (opt.max_outside < 0) throw ContractError("index search: negative max_outside");
}

struct Enumerator {
  const OrderedTree& t;
  const IndexSearch& opt;
  SignTable signs;
  std::vector<std::vector<int>> allowed;
  std::vector<std::vector<char>> allowed_mask;
  std::vector<int> freq;
  std::vector<i64> mu, mu_tilde;
  i64 bound;
  const AssignmentVisitor* visit = nullptr;
  i64 count = 0;

  Enumerator(const OrderedTree& tree, int n_root, const IndexSearch& o) : t(tree), opt(o) {
    check_search(opt);
    signs = compute_signs(t);
    allowed = allowed_boxes(t, opt);
    const int W = opt.window;
    allowed_mask.assign(t.size(), std::vector<char>(2 * W + 1, 0));
    for (int a = 0; a < t.size(); ++a)
      for (int k : allowed[a]) allowed_mask[a][k + W] = 1;
    freq.assign(t.size(), 0);
    freq[0] = n_root;
    mu.assign(t.J, 0);
    mu_tilde.assign(t.J, 0);
    bound = max_phase_bound(W, opt.rule);
  }

  bool in_mask(int a, int k) const {
    const int W = opt.window;
    return k >= -W && k <= W && allowed_mask[a][k + W];
  }

  int outside = 0;

  int outside_count(const int* ch, int c1, int c2, int c3) const {
    if (!opt.core_support) return 0;
    const int v[3] = {c1, c2, c3};
    int k = 0;
    for (int i = 0; i < 3; ++i)
      if (t.nodes[ch[i]].terminal() && !in_core(opt, v[i])) ++k;
    return k;
  }

  void run(int g) {
    if (g > t.J) {
      ++count;
      if (visit) (*visit)(AssignmentView{freq, mu, mu_tilde});
      return;
    }
    const int a = t.chronicle[g - 1];
    const int na = freq[a];
    const auto& ch = t.nodes[a].children;
    const bool chain = opt.filter == ChainFilter::C_complement_chain;
    for (int c1 : allowed[ch[0]]) {
      if (near(c1, na)) continue;
      for (int c3 : allowed[ch[2]]) {
        if (near(c3, na)) continue;
        for (int d = -1; d <= 1; ++d) {
          int c2 = c1 + c3 - na + d;
          if (!in_mask(ch[1], c2)) continue;
          i64 ph = signs.fsgn[a] * box_phase(FrequencyTriple{na, c1, c2, c3}, opt.rule);
          i64 mt = (g == 1 ? 0 : mu_tilde[g - 2]) + ph;
          if (mt == 0) continue;
          if (g == 1) {
            if (!(static_cast<double>(std::llabs(ph)) > opt.N)) continue;
          } else if (chain) {
            if (c_set_member(g - 1, static_cast<double>(mu_tilde[g - 2]), static_cast<double>(mt),
                             static_cast<double>(mu[0])))
              continue;
          }
          if (chain && g < t.J) {
            double m1 = g == 1 ? static_cast<double>(ph) : static_cast<double>(mu[0]);
            if (static_cast<double>(std::llabs(mt) + bound) <= c_set_threshold(g, static_cast<double>(mt), m1))
              continue;
          }
          const int out = outside_count(ch, c1, c2, c3);
          if (outside + out > opt.max_outside) continue;
          freq[ch[0]] = c1;
          freq[ch[1]] = c2;
          freq[ch[2]] = c3;
          mu[g - 1] = ph;
          mu_tilde[g - 1] = mt;
          outside += out;
          run(g + 1);
          outside -= out;
        }
      }
    }
  }
};

}  // namespace

std::vector<i64> generation_phases(const OrderedTree& t, const SignTable& s, const std::vector<int>& freq,
                                   PhaseRule rule) {
  std::vector<i64> mu;
  for (int a : t.chronicle) mu.push_back(s.fsgn[a] * node_phase(t, freq, a, rule));
  return mu;
}

PhaseRecord compute_phases(const OrderedTree& t, const std::vector<int>& freq, PhaseRule rule) {
  return make_phase_record(generation_phases(t, compute_signs(t), freq, rule));
}

i64 node_mu_tilde(const OrderedTree& t, const std::vector<int>& freq, PhaseRule rule, int alpha) {
  SignTable s = compute_signs(t);
  i64 acc = 0;
  for (int b : t.chronicle)
    if (!t.is_descendant(b, alpha)) acc += s.fsgn[b] * node_phase(t, freq, b, rule);
  return acc;
}

bool valid_assignment(const OrderedTree& t, const std::vector<int>& freq, const IndexSearch& opt) {
  if (static_cast<int>(freq.size()) != t.size()) return false;
  for (int k : freq)
    if (std::abs(k) > opt.window || k > opt.upper) return false;
  auto mu = generation_phases(t, compute_signs(t), freq, opt.rule);
  for (int a : t.chronicle) {
    const auto& c = t.nodes[a].children;
    if (!near(freq[c[0]] - freq[c[1]] + freq[c[2]], freq[a])) return false;
    if (near(freq[c[0]], freq[a]) || near(freq[c[2]], freq[a])) return false;
  }
  if (!(static_cast<double>(std::llabs(mu[0])) > opt.N)) return false;
  i64 partial = 0;
  for (i64 m : mu)
    if ((partial += m) == 0) return false;
  if (opt.leaf_support || opt.core_support) {
    int out = 0;
    for (int b : t.terminals()) {
      if (opt.leaf_support && !(*opt.leaf_support)[freq[b] + opt.window]) return false;
      if (opt.core_support && !in_core(opt, freq[b])) ++out;
    }
    if (out > opt.max_outside) return false;
  }
  if (opt.filter == ChainFilter::C_complement_chain) {
    i64 prev = mu[0];
    for (int g = 2; g <= t.J; ++g) {
      i64 cur = prev + mu[g - 1];
      if (c_set_member(g - 1, static_cast<double>(prev), static_cast<double>(cur), static_cast<double>(mu[0])))
        return false;
      prev = cur;
    }
  }
  return true;
}

i64 count_index_functions(const OrderedTree& t, int n_root, const IndexSearch& opt) {
  Enumerator e(t, n_root, opt);
  e.run(1);
  return e.count;
}

void enumerate_index_functions(const OrderedTree& t, int n_root, const IndexSearch& opt,
                               const AssignmentVisitor& visit) {
  Enumerator e(t, n_root, opt);
  e.visit = &visit;
  e.run(1);
}

std::vector<IndexAssignment> enumerate_index_functions(const OrderedTree& t, int n_root,
                                                       const IndexSearch& opt) {
  std::vector<IndexAssignment> out;
  AssignmentVisitor v = [&](const AssignmentView& view) {
    out.push_back(IndexAssignment{t, view.freq, make_phase_record(view.mu), n_root});
  };
  enumerate_index_functions(t, n_root, opt, v);
  return out;
}

double chain_phase_floor(int g, double N) {
  if (g < 1) throw ContractError("chain_phase_floor: generation must be positive");
  double lambda = N;
  if (g == 1) return N;
  double floor = 0.0;
  for (int k = 2; k <= g; ++k) {
    const double c = std::pow(2.0 * k + 1.0, 3);
    lambda = c * std::pow(lambda, 0.99);
    floor = lambda - std::pow(lambda / c, 1.0 / 0.99);
  }
  return std::max(0.0, floor);
}

namespace {

// Given |mu_{g+1}|, an upper bound on |mu_g| for any assignment on the chain through C_g^c.
double phase_ceiling(int g, double next) {
  const double c = std::pow(2.0 * g + 3.0, 3);
  // |mu~_g| < U with c U^0.99 - U = |mu_{g+1}|; the left side increases on the range that matters.
  // The fixed point U = ((next + U) / c)^{1/0.99} is approached from below.
  auto F = [&](double U) { return c * std::pow(U, 0.99) - U; };
  double U = 0.0;
  for (int it = 0; it < 12; ++it) U = std::pow((next + U) / c, 1.0 / 0.99);
  double hi = U * (1.0 + 1e-6) + 1.0;
  if (F(hi) < next) {
    double lo = U;
    while (F(hi) < next && hi < 1e30) hi *= 2.0;
    for (int it = 0; it < 200; ++it) {
      const double mid = 0.5 * (lo + hi);
      (F(mid) < next ? lo : hi) = mid;
    }
  }
  U = hi;
  double bound = U;
  if (g >= 2) bound += std::pow(U / std::pow(2.0 * g + 1.0, 3), 1.0 / 0.99);
  return bound * (1.0 + 1e-9) + 2.0;
}

struct LeafUp {
  const OrderedTree& t;
  const IndexSearch& opt;
  SignTable signs;
  std::vector<int> pts, core_pts;  // allowed boxes; the subset inside the core
  std::vector<char> pt_outside;
  std::vector<std::unordered_map<i64, double>> ceilings;  // by generation, keyed by |mu_{g+1}|
  std::vector<double> floors;  // by generation, pruning only
  std::vector<int> freq;
  std::vector<i64> mu, mu_tilde;
  int outside = 0;
  int hi;
  const AssignmentVisitor* visit = nullptr;
  i64 count = 0;

  LeafUp(const OrderedTree& tree, const IndexSearch& o) : t(tree), opt(o) {
    check_search(opt);
    signs = compute_signs(t);
    const int W = opt.window;
    hi = std::min(W, opt.upper);
    for (int k = -W; k <= hi; ++k)
      if (!opt.leaf_support || (*opt.leaf_support)[k + W]) {
        pts.push_back(k);
        pt_outside.push_back(outside_core(k) ? 1 : 0);
        if (!pt_outside.back()) core_pts.push_back(k);
      }
    ceilings.resize(t.J + 1);
    floors.assign(t.J + 1, 0.0);
    if (opt.filter == ChainFilter::C_complement_chain)
      for (int g = 2; g <= t.J; ++g) floors[g] = chain_phase_floor(g, opt.N) * (1.0 - 1e-12) - 1.0;
    freq.assign(t.size(), 0);
    mu.assign(t.J, 0);
    mu_tilde.assign(t.J, 0);
  }

  bool outside_core(int k) const { return opt.core_support && !in_core(opt, k); }

  // generations J..1; the node's free children are the middle one, then one side, then the
  // other side restricted to the index range its phase bounds allow
  void gen(int g) {
    if (g == 0) {
      finish();
      return;
    }
    const int a = t.chronicle[g - 1];
    const auto& ch = t.nodes[a].children;
    double lb = g == 1 ? opt.N : floors[g];
    double ub = std::numeric_limits<double>::infinity();
    if (opt.filter == ChainFilter::C_complement_chain && g < t.J) {
      const i64 key = std::llabs(mu[g]);
      auto it = ceilings[g].find(key);
      if (it == ceilings[g].end()) it = ceilings[g].emplace(key, phase_ceiling(g, static_cast<double>(key))).first;
      ub = it->second;
    }
    Frame f{g, a, ch, lb, ub};
    middle(f);
  }

  struct Frame {
    int g, a;
    const int* ch;
    double lb, ub;
  };

  bool free_child(int c) const { return t.nodes[c].terminal(); }

  template <class F>
  void assign(int node, F&& body) {
    if (!free_child(node)) {
      body();
      return;
    }
    if (outside >= opt.max_outside) {
      for (int k : core_pts) place(node, k, body, 0);
    } else {
      for (size_t i = 0; i < pts.size(); ++i) place(node, pts[i], body, pt_outside[i]);
    }
  }

  template <class F>
  void place(int node, int k, F&& body, int o) {
    if (outside + o > opt.max_outside) return;
    freq[node] = k;
    outside += o;
    body();
    outside -= o;
  }

  void middle(const Frame& f) {
    assign(f.ch[1], [&] { sides(f); });
  }

  void sides(const Frame& f) {
    // the ranged side is the right child when free, else the left child
    const int ranged = free_child(f.ch[2]) ? f.ch[2] : (free_child(f.ch[0]) ? f.ch[0] : -1);
    const int other = ranged == f.ch[2] ? f.ch[0] : f.ch[2];
    if (ranged < 0) {
      close(f);
      return;
    }
    if (!free_child(other) || !std::isfinite(f.ub)) {
      assign(other, [&] { ranged_side(f, ranged, other); });
      return;
    }
    // |Phi| >= 2 * 2 * |other - c2 + d| - slack, since the ranged factor is at least 2
    const int c2 = freq[f.ch[1]];
    const double slack = opt.rule == PhaseRule::tuple ? 2.0 * std::abs(static_cast<double>(c2)) + 3.0 : 0.0;
    const double reach = std::min((f.ub + slack) / 4.0 + 1.0, static_cast<double>(opt.window) * 4.0 + 4.0);
    const int r = static_cast<int>(std::floor(reach + 1e-9));
    const bool core_only = outside >= opt.max_outside;
    const std::vector<int>& list = core_only ? core_pts : pts;
    auto it = std::lower_bound(list.begin(), list.end(), c2 - r);
    for (; it != list.end() && *it <= c2 + r; ++it)
      place(other, *it, [&] { ranged_side(f, ranged, other); }, core_only ? 0 : pt_outside[it - list.begin()]);
  }

  void ranged_side(const Frame& f, int ranged, int other) {
    const int c2 = freq[f.ch[1]];
    const double b = std::abs(static_cast<double>(freq[other] - c2));
    if (b < 1.0) return;  // every slack leaves the other side resonant
    const double slack = opt.rule == PhaseRule::tuple ? 2.0 * std::abs(static_cast<double>(c2)) + 3.0 : 0.0;
    double lo = (f.lb - slack) / (2.0 * (b + 1.0)) - 1.0;
    double hi = (f.ub + slack) / (2.0 * std::max(b - 1.0, 2.0)) + 1.0;
    lo = std::max(lo, 1.0);
    if (hi < lo) return;
    const double hw = static_cast<double>(opt.window) * 4.0 + 4.0;
    hi = std::min(hi, hw);
    const int ilo = static_cast<int>(std::ceil(lo - 1e-9));
    const int ihi = static_cast<int>(std::floor(hi + 1e-9));
    const bool core_only = outside >= opt.max_outside;
    const std::vector<int>& list = core_only ? core_pts : pts;
    auto scan = [&](int from, int to) {
      auto it = std::lower_bound(list.begin(), list.end(), from);
      for (; it != list.end() && *it <= to; ++it)
        place(ranged, *it, [&] { close(f); }, core_only ? 0 : pt_outside[it - list.begin()]);
    };
    scan(c2 - ihi, c2 - ilo);
    scan(c2 + ilo, c2 + ihi);
  }

  void close(const Frame& f) {
    const int g = f.g, a = f.a;
    const int* ch = f.ch;
    const int c1 = freq[ch[0]], c2 = freq[ch[1]], c3 = freq[ch[2]];
    const int W = opt.window;
    for (int d = -1; d <= 1; ++d) {
      const int x = c1 + c3 - c2 + d;
      if (x < -W || x > hi) continue;
      if (near(c1, x) || near(c3, x)) continue;
      const i64 ph = signs.fsgn[a] * box_phase(FrequencyTriple{x, c1, c2, c3}, opt.rule);
      const double aph = static_cast<double>(std::llabs(ph));
      if (g == 1) {
        if (!(aph > opt.N)) continue;
      } else if (aph < floors[g]) {
        continue;
      }
      if (aph > f.ub) continue;
      freq[a] = x;
      mu[g - 1] = ph;
      gen(g - 1);
    }
  }

  void finish() {
    i64 acc = 0;
    for (int g = 1; g <= t.J; ++g) {
      const i64 next = acc + mu[g - 1];
      if (next == 0) return;
      if (g >= 2 && opt.filter == ChainFilter::C_complement_chain &&
          c_set_member(g - 1, static_cast<double>(acc), static_cast<double>(next), static_cast<double>(mu[0])))
        return;
      mu_tilde[g - 1] = next;
      acc = next;
    }
    ++count;
    if (visit) (*visit)(AssignmentView{freq, mu, mu_tilde});
  }
};

}  // namespace

void enumerate_all_roots(const OrderedTree& t, const IndexSearch& opt, const AssignmentVisitor& visit) {
  LeafUp e(t, opt);
  e.visit = &visit;
  e.gen(t.J);
}

i64 count_all_roots(const OrderedTree& t, const IndexSearch& opt) {
  LeafUp e(t, opt);
  e.gen(t.J);
  return e.count;
}

std::optional<IndexAssignment> sample_index_function(const OrderedTree& t, int n_root, const IndexSearch& opt,
                                                     std::mt19937_64& rng, int max_tries) {
  check_search(opt);
  const SignTable signs = compute_signs(t);
  const int W = opt.window;
  // offsets n_a - c drawn with log-uniform magnitude, so early generations can stay small
  std::uniform_real_distribution<double> logmag(std::log(2.0), std::log(2.0 * W + 1.0));
  std::uniform_int_distribution<int> coin(0, 1);
  auto offset = [&] {
    const int m = static_cast<int>(std::floor(std::exp(logmag(rng))));
    return coin(rng) ? m : -m;
  };
  std::uniform_int_distribution<int> slack(-1, 1);
  const bool chain = opt.filter == ChainFilter::C_complement_chain;
  int tries = 0;
  while (tries < max_tries) {
    std::vector<int> freq(t.size(), 0);
    freq[0] = n_root;
    std::vector<i64> mu;
    i64 mt = 0;
    bool ok = true;
    for (int g = 1; g <= t.J && ok; ++g) {
      const int a = t.chronicle[g - 1];
      const auto& ch = t.nodes[a].children;
      bool placed = false;
      for (int local = 0; local < 256 && tries < max_tries; ++local, ++tries) {
        int c1 = freq[a] - offset(), c3 = freq[a] - offset();
        int c2 = c1 + c3 - freq[a] + slack(rng);
        if (std::abs(c1) > W || std::abs(c3) > W || std::abs(c2) > W || c1 > opt.upper || c2 > opt.upper || c3 > opt.upper || near(c1, freq[a]) || near(c3, freq[a])) continue;
        i64 ph = signs.fsgn[a] * box_phase(FrequencyTriple{freq[a], c1, c2, c3}, opt.rule);
        i64 next = mt + ph;
        if (next == 0) continue;
        if (g == 1) {
          if (!(static_cast<double>(std::llabs(ph)) > opt.N)) continue;
        } else if (chain && c_set_member(g - 1, static_cast<double>(mt), static_cast<double>(next),
                                         static_cast<double>(mu[0]))) {
          continue;
        }
        freq[ch[0]] = c1;
        freq[ch[1]] = c2;
        freq[ch[2]] = c3;
        mu.push_back(ph);
        mt = next;
        placed = true;
        break;
      }
      ok = placed;
    }
    if (ok) return IndexAssignment{t, freq, make_phase_record(mu), n_root};
  }
  return std::nullopt;
}

}  // namespace nfnls
