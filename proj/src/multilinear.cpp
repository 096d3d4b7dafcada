#include "nfnls/multilinear.hpp"

#include <omp.h>

#include <algorithm>
#include <cmath>
#include <string>

namespace nfnls {

namespace {

int floor_div(int a, int b) {
  int q = a / b;
  if ((a % b != 0) && ((a < 0) != (b < 0))) --q;
  return q;
}

std::vector<cplx> u_values(const BandCoefficients& b, double t) {
  std::vector<cplx> u(b.coeffs);
  if (t == 0.0) return u;
  for (int i = 0; i < b.size(); ++i) {
    double xi = b.grid.xi(b.first_bin + i);
    u[i] *= std::polar(1.0, t * xi * xi);
  }
  return u;
}

void check_grids(const BandCoefficients& a, const BandCoefficients& b, const BandCoefficients& c) {
  if (a.grid != b.grid || a.grid != c.grid) throw ContractError("multilinear: grid mismatch");
}

const double kTwoPi = 2.0 * kPi;

}  // namespace

BandCoefficients q1(int n, const BandCoefficients& b1, const BandCoefficients& b2, const BandCoefficients& b3,
                    double t) {
  check_grids(b1, b2, b3);
  const Grid& g = b1.grid;
  Grid pg = make_grid(g.B, 2 * g.n_max);
  const BandCoefficients* bs[3] = {&b1, &b2, &b3};
  std::vector<Field> f;
  for (auto* b : bs) {
    Spectrum S = zero_spectrum(pg);
    auto u = u_values(*b, t);
    for (int i = 0; i < b->size(); ++i) {
      int j = b->first_bin + i;
      if (j >= g.j_min() && j < g.j_max()) S.at(j) = u[i];
    }
    f.push_back(inverse(S));
  }
  Field prod = zero_field(pg);
  for (int m = 0; m < pg.M; ++m) prod.samples[m] = f[0].samples[m] * std::conj(f[1].samples[m]) * f[2].samples[m];
  Spectrum P = forward(prod);
  BandCoefficients out = zero_band(g, n);
  for (int i = 0; i < g.B; ++i) {
    int j = n * g.B + i;
    double xi = g.xi(j);
    out.coeffs[i] = P.at(j) * std::polar(1.0, -t * xi * xi);
  }
  return out;
}

void q1_band_accumulate(BandCoefficients& out, const BandCoefficients& b1, const BandCoefficients& b2,
                        const BandCoefficients& b3, double t, cplx coef) {
  check_grids(b1, b2, b3);
  const Grid& g = b1.grid;
  auto a1 = u_values(b1, t), a2 = u_values(b2, t), a3 = u_values(b3, t);
  // P(k) = sum_{j1 - j2 = k} a1(j1) conj(a2(j2))
  const int kmin = b1.first_bin - (b2.last_bin() - 1);
  const int kmax = (b1.last_bin() - 1) - b2.first_bin;
  std::vector<cplx> P(kmax - kmin + 1);
  for (int i1 = 0; i1 < b1.size(); ++i1) {
    if (a1[i1] == cplx(0.0)) continue;
    for (int i2 = 0; i2 < b2.size(); ++i2) {
      int k = (b1.first_bin + i1) - (b2.first_bin + i2);
      P[k - kmin] += a1[i1] * std::conj(a2[i2]);
    }
  }
  const double scale = 1.0 / (kTwoPi * g.B * g.B);
  for (int i = 0; i < out.size(); ++i) {
    int j = out.first_bin + i;
    cplx acc = 0.0;
    for (int i3 = 0; i3 < b3.size(); ++i3) {
      int k = j - (b3.first_bin + i3);
      if (k < kmin || k > kmax) continue;
      acc += P[k - kmin] * a3[i3];
    }
    double xi = g.xi(j);
    out.coeffs[i] += coef * scale * acc * std::polar(1.0, -t * xi * xi);
  }
}

BandCoefficients q1_band(int n, const BandCoefficients& b1, const BandCoefficients& b2,
                         const BandCoefficients& b3, double t) {
  BandCoefficients out = zero_band(b1.grid, n);
  q1_band_accumulate(out, b1, b2, b3, t, 1.0);
  return out;
}

BandCoefficients q1_tilde(int n, const BandCoefficients& b1, const BandCoefficients& b2,
                          const BandCoefficients& b3, double t) {
  check_grids(b1, b2, b3);
  if (near(b1.n, n) || near(b3.n, n))
    throw ContractError("q1_tilde: resonant tuple (n=" + std::to_string(n) + ", n1=" + std::to_string(b1.n) +
                        ", n3=" + std::to_string(b3.n) + ")");
  const Grid& g = b1.grid;
  auto a1 = u_values(b1, t), a2 = u_values(b2, t), a3 = u_values(b3, t);
  BandCoefficients out = zero_band(g, n);
  const double scale = 1.0 / (kTwoPi * g.B * g.B);
  for (int i = 0; i < g.B; ++i) {
    const int j = n * g.B + i;
    const double xi = g.xi(j);
    cplx acc = 0.0;
    for (int i1 = 0; i1 < b1.size(); ++i1) {
      const int j1 = b1.first_bin + i1;
      const double d1 = xi - g.xi(j1);
      for (int i3 = 0; i3 < b3.size(); ++i3) {
        const int j3 = b3.first_bin + i3;
        const int i2 = j1 + j3 - j - b2.first_bin;
        if (i2 < 0 || i2 >= b2.size()) continue;
        const double d3 = xi - g.xi(j3);
        acc += a1[i1] * std::conj(a2[i2]) * a3[i3] / (d1 * d3);
      }
    }
    out.coeffs[i] = scale * acc * std::polar(1.0, -t * xi * xi);
  }
  return out;
}

BandTuple make_band_tuple(const OrderedTree& t, std::vector<BandCoefficients> bands) {
  auto leaves = t.terminals();
  if (bands.size() != leaves.size()) throw ContractError("make_band_tuple: need one band per terminal node");
  SignTable s = compute_signs(t);
  BandTuple bt;
  bt.bands = std::move(bands);
  for (int b : leaves) bt.conjugate.push_back(s.fsgn[b] == -1);
  return bt;
}

namespace {

struct KernelPlan {
  const KernelInput& in;
  const OrderedTree& t;
  std::vector<int> leaves;
  std::vector<std::vector<int>> complete;  // internal nodes finished by each leaf, deepest first
  std::vector<bool> conj;
  std::vector<std::vector<cplx>> uvals;  // per leaf, u-picture and conjugated where needed
  int B;
  double scale;
  cplx step;

  explicit KernelPlan(const KernelInput& input) : in(input), t(*input.tree) {
    leaves = t.terminals();
    complete.resize(leaves.size());
    for (size_t i = 0; i < leaves.size(); ++i) {
      int c = leaves[i];
      while (c != 0 && t.nodes[c].role == NodeRole::right) {
        c = t.nodes[c].parent;
        complete[i].push_back(c);
      }
    }
    for (int b : leaves) conj.push_back(in.signs->fsgn[b] == -1);
    for (size_t i = 0; i < leaves.size(); ++i) {
      auto u = u_values(*in.leaf_by_node[leaves[i]], in.t);
      if (conj[i])
        for (auto& z : u) z = std::conj(z);
      uvals.push_back(std::move(u));
    }
    const auto* first = in.leaf_by_node[leaves[0]];
    B = first->grid.B;
    scale = std::pow(kTwoPi, -t.J) * std::pow(static_cast<double>(B), -2.0 * t.J);
    step = in.weight == KernelWeight::half_phase ? cplx(0.5, 0.0) : cplx(0.0, -1.0);
  }
};

struct KernelWorker {
  const KernelPlan& p;
  std::vector<int> jn;
  std::vector<double> mu;
  cplx* out;
  int out_first;

  KernelWorker(const KernelPlan& plan, cplx* dst, int dst_first)
      : p(plan), jn(plan.t.size()), mu(plan.t.size()), out(dst), out_first(dst_first) {}

  bool close_nodes(size_t i) {
    const auto& freq = *p.in.freq;
    for (int a : p.complete[i]) {
      const auto& c = p.t.nodes[a].children;
      const int ja = jn[c[0]] - jn[c[1]] + jn[c[2]];
      if (floor_div(ja, p.B) != freq[a]) return false;
      jn[a] = ja;
      const double xa = static_cast<double>(ja) / p.B;
      mu[a] = 2.0 * (xa - static_cast<double>(jn[c[0]]) / p.B) * (xa - static_cast<double>(jn[c[2]]) / p.B);
    }
    return true;
  }

  void finish(cplx prod) {
    double acc = 0.0;
    cplx w = 1.0;
    for (int a : p.t.chronicle) {
      acc += p.in.signs->fsgn[a] * mu[a];
      if (std::abs(acc) < 1e-9) throw ContractError("tree kernel: singular phase sum");
      w /= p.step * acc;
    }
    const int idx = jn[0] - out_first;
    out[idx] += prod * w;
  }

  void run(size_t i, cplx partial) {
    const int node = p.leaves[i];
    const BandCoefficients& band = *p.in.leaf_by_node[node];
    for (int k = 0; k < band.size(); ++k) visit(i, k, partial, band);
  }

  void visit(size_t i, int k, cplx partial, const BandCoefficients& band) {
    const cplx v = p.uvals[i][k];
    if (v == cplx(0.0)) return;
    jn[p.leaves[i]] = band.first_bin + k;
    if (!close_nodes(i)) return;
    if (i + 1 == p.leaves.size()) {
      finish(partial * v);
    } else {
      run(i + 1, partial * v);
    }
  }
};

void check_kernel_input(const KernelInput& in, const BandCoefficients& out) {
  if (!in.tree || !in.signs || !in.freq) throw ContractError("tree kernel: incomplete input");
  if (in.tree->J > kKernelJMax) throw ResourceError("tree kernel: J exceeds kernel-exact cap");
  if (out.n != (*in.freq)[0] || out.first_bin != out.n * out.grid.B || out.size() != out.grid.B)
    throw ContractError("tree kernel: output band must be the sharp root box");
  for (int b : in.tree->terminals())
    if (!in.leaf_by_node.at(b)) throw ContractError("tree kernel: missing leaf band");
}

}  // namespace

// Leaves enter in the u-picture and the output is taken back with exp(-it xi^2), which together
// produce the exp(-it Omega) oscillation.
void tree_kernel_serial(const KernelInput& in, BandCoefficients& out, cplx coef) {
  check_kernel_input(in, out);
  KernelPlan plan(in);
  std::vector<cplx> acc(out.size());
  KernelWorker w(plan, acc.data(), out.first_bin);
  w.run(0, 1.0);
  for (int i = 0; i < out.size(); ++i) {
    double xi = out.grid.xi(out.first_bin + i);
    out.coeffs[i] += coef * plan.scale * acc[i] * std::polar(1.0, -in.t * xi * xi);
  }
}

void tree_kernel(const KernelInput& in, BandCoefficients& out, cplx coef) {
  check_kernel_input(in, out);
  KernelPlan plan(in);
  const BandCoefficients& first = *in.leaf_by_node[plan.leaves[0]];
  const int K = first.size();
  const int W = out.size();
  std::vector<cplx> part(static_cast<size_t>(K) * W);
  bool failed = false;
  std::string err;
#pragma omp parallel for schedule(dynamic)
  for (int k = 0; k < K; ++k) {
    try {
      KernelWorker w(plan, part.data() + static_cast<size_t>(k) * W, out.first_bin);
      w.visit(0, k, 1.0, first);
    } catch (const std::exception& e) {
#pragma omp critical
      {
        failed = true;
        err = e.what();
      }
    }
  }
  if (failed) throw ContractError(err);
  for (int i = 0; i < W; ++i) {
    cplx acc = 0.0;
    for (int k = 0; k < K; ++k) acc += part[static_cast<size_t>(k) * W + i];
    double xi = out.grid.xi(out.first_bin + i);
    out.coeffs[i] += coef * plan.scale * acc * std::polar(1.0, -in.t * xi * xi);
  }
}

BandCoefficients q_tree(const OrderedTree& t, const IndexAssignment& assign, const BandTuple& leaves,
                        double time) {
  if (t.J > kKernelJMax) throw ResourceError("q_tree: J exceeds kernel-exact cap");
  auto term = t.terminals();
  if (leaves.bands.size() != term.size() || leaves.conjugate.size() != term.size())
    throw ContractError("q_tree: band tuple must have 2J+1 entries");
  SignTable s = compute_signs(t);
  KernelInput in;
  in.tree = &t;
  in.signs = &s;
  in.freq = &assign.freq;
  in.leaf_by_node.assign(t.size(), nullptr);
  for (size_t i = 0; i < term.size(); ++i) {
    if (leaves.conjugate[i] != (s.fsgn[term[i]] == -1)) throw ContractError("q_tree: conjugation flags disagree with signs");
    if (leaves.bands[i].n != assign.freq[term[i]]) throw ContractError("q_tree: leaf band box differs from assignment");
    in.leaf_by_node[term[i]] = &leaves.bands[i];
  }
  in.t = time;
  in.weight = KernelWeight::half_phase;
  BandCoefficients out = zero_band(leaves.bands.front().grid, assign.freq[0]);
  tree_kernel(in, out);
  return out;
}

SymbolEvaluation evaluate_symbol(const OrderedTree& t, const std::vector<int>& freq, const Grid& g,
                                 const std::vector<int>& leaf_bins) {
  auto term = t.terminals();
  if (leaf_bins.size() != term.size()) throw ContractError("evaluate_symbol: need one bin per terminal");
  SignTable s = compute_signs(t);
  std::vector<int> jn(t.size());
  std::vector<double> mu(t.size());
  for (size_t i = 0; i < term.size(); ++i) jn[term[i]] = leaf_bins[i];
  SymbolEvaluation ev{0.0, {}};
  for (int a = t.size() - 1; a >= 0; --a) {
    if (t.nodes[a].terminal()) continue;
    const auto& c = t.nodes[a].children;
    jn[a] = jn[c[0]] - jn[c[1]] + jn[c[2]];
    if (floor_div(jn[a], g.B) != freq[a]) return ev;
    double xa = g.xi(jn[a]);
    mu[a] = 2.0 * (xa - g.xi(jn[c[0]])) * (xa - g.xi(jn[c[2]]));
  }
  double acc = 0.0;
  cplx w = 1.0;
  for (int a : t.chronicle) {
    acc += s.fsgn[a] * mu[a];
    ev.denominators.push_back(acc);
    w /= 0.5 * acc;
  }
  ev.value = w;
  return ev;
}

BandCoefficients random_band(const Grid& g, int n, std::mt19937_64& rng) {
  std::normal_distribution<double> nd(0.0, 1.0);
  BandCoefficients b = zero_band(g, n);
  for (auto& z : b.coeffs) z = cplx(nd(rng), nd(rng));
  double norm = b.l2_norm();
  for (auto& z : b.coeffs) z /= norm;
  return b;
}

double certify_tree_bound(const OrderedTree& t, const IndexAssignment& assign, int trials, int B,
                          std::mt19937_64& rng) {
  int reach = 0;
  for (int k : assign.freq) reach = std::max(reach, std::abs(k));
  Grid g = make_grid(B, reach + 2);
  auto term = t.terminals();
  const double mu_hat = std::abs(assign.phases.mu_hat.back()) / std::pow(2.0, t.J);
  double worst = 0.0;
  for (int k = 0; k < trials; ++k) {
    std::vector<BandCoefficients> bands;
    double prod = 1.0;
    for (int b : term) {
      bands.push_back(random_band(g, assign.freq[b], rng));
      prod *= bands.back().l2_norm();
    }
    auto out = q_tree(t, assign, make_band_tuple(t, std::move(bands)), 0.0);
    worst = std::max(worst, out.l2_norm() * mu_hat / prod);
  }
  return worst;
}

}  // namespace nfnls
