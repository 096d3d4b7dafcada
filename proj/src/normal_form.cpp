#include "nfnls/normal_form.hpp"

#include <omp.h>

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdlib>
#include <limits>
#include <string>

namespace nfnls {

BoxedState make_state(const Spectrum& v, double t) { return BoxedState{v, t}; }

BoxedState zero_state(const Grid& g, double t) { return BoxedState{zero_spectrum(g), t}; }

void set_band(Spectrum& S, const BandCoefficients& b) {
  for (int i = 0; i < b.size(); ++i) {
    int j = b.first_bin + i;
    if (j >= S.grid.j_min() && j < S.grid.j_max()) S.at(j) = b.coeffs[i];
  }
}

double lq_l2_norm(const Spectrum& S, double s, double q) {
  const Grid& g = S.grid;
  std::vector<double> norms(g.box_count());
  for (int n = g.box_min(); n <= g.box_max(); ++n) {
    double acc = 0.0;
    for (int i = 0; i < g.B; ++i) acc += std::norm(S.at(n * g.B + i));
    norms[n - g.box_min()] = std::sqrt(acc / g.B);
  }
  return lq_weighted(norms, g.box_min(), s, q);
}

void validate(const SolverParams& p) {
  if (p.J < 1 || p.J > p.J_max) throw ConfigError("solver: J outside [1, J_max]");
  if (!(p.q >= 1.0 && p.q <= 2.0)) throw ConfigError("solver: q must lie in [1, 2]");
  if (!(p.N > 0.0)) throw ConfigError("solver: N must be positive");
  if (!(p.T >= 0.0)) throw ConfigError("solver: T must be nonnegative");
  if (p.K < 1) throw ConfigError("solver: K must be >= 1");
  if (p.sigma != 1 && p.sigma != -1) throw ConfigError("solver: sign must be +1 or -1");
  if (p.picard_max_iter < 1) throw ConfigError("solver: picard_max_iter must be >= 1");
  if (!(p.prune_tol >= 0.0)) throw ConfigError("solver: prune_tol must be >= 0");
}

namespace {

// 1/q' with the q = 1 limit
double inv_qprime(double q) { return q == 1.0 ? 0.0 : 1.0 - 1.0 / q; }

}  // namespace

double threshold_N(double R_tilde, double q) {
  if (!(q >= 1.0 && q <= 2.0)) throw ConfigError("threshold_N: q must lie in [1, 2]");
  double e;
  if (q == 1.0) {
    e = 100.0 / 99.0;
  } else {
    double qp = q / (q - 1.0);
    e = 100.0 * qp / (99.0 * (qp - 1.0));
  }
  return std::ceil(std::pow(2.0 * R_tilde * R_tilde, e) - 1e-12);
}

double time_bracket(double N, double R_tilde, double q, double eps) {
  const double a = inv_qprime(q);
  const double R2 = R_tilde * R_tilde, R4 = R2 * R2;
  // (199 - 100 q') / (100 q') = 1.99 / q' - 1
  const double third = 1.99 * a - 1.0;
  return (1.0 + std::pow(N, a + eps)) * R2 + 2.0 * std::pow(N, a - 1.0 + eps) * R4 +
         2.0 * std::pow(N, third + eps) * R4;
}

SolverParams choose_parameters(double R, double q, double C, double eps) {
  if (!(R >= 1.0)) throw ConfigError("choose_parameters: R must be >= 1");
  if (!(q >= 1.0 && q <= 2.0)) throw ConfigError("choose_parameters: q must lie in [1, 2]");
  if (!(C > 0.0)) throw ConfigError("choose_parameters: C must be positive");
  SolverParams p;
  p.R = R;
  p.R_tilde = 4.0 * R;
  p.q = q;
  p.C = C;
  p.eps = eps;
  p.N = threshold_N(p.R_tilde, q);
  p.T = 0.1 * (1.0 - 1e-6) / (C * time_bracket(p.N, p.R_tilde, q, eps));
  const double a = inv_qprime(q);
  // (1 - q') / (100 q') = (1/q' - 1) / 100
  p.argg5_satisfied = C * std::pow(p.N, (a - 1.0) / 100.0 + eps) < 0.1;
  return p;
}

GenerationOptions generation_options(const SolverParams& p) {
  GenerationOptions o;
  o.N = p.N;
  o.rule = p.rule;
  o.sigma = p.sigma;
  o.prune_tol = p.prune_tol;
  o.J_max = p.J_max;
  return o;
}

namespace {

Grid padded(const Grid& g) { return make_grid(g.B, 2 * g.n_max); }

// u-picture field on the padded grid built from the given bins of a v-picture spectrum
Field u_field(const Spectrum& v, double t, int j0, int j1) {
  const Grid& g = v.grid;
  Grid pg = padded(g);
  Spectrum S = zero_spectrum(pg);
  j0 = std::max(j0, g.j_min());
  j1 = std::min(j1, g.j_max());
  for (int j = j0; j < j1; ++j) {
    double xi = g.xi(j);
    S.at(j) = v.at(j) * std::polar(1.0, t * xi * xi);
  }
  return inverse(S);
}

BandCoefficients extract(const Spectrum& P, const Grid& g, int n, double t, double factor) {
  BandCoefficients out = zero_band(g, n);
  for (int i = 0; i < g.B; ++i) {
    int j = n * g.B + i;
    double xi = g.xi(j);
    out.coeffs[i] = factor * P.at(j) * std::polar(1.0, -t * xi * xi);
  }
  return out;
}

void check_box(const Grid& g, int n) {
  if (n < g.box_min() || n > g.box_max()) throw RangeError("box " + std::to_string(n) + " outside grid");
}

enum class ResKind { r1, r2 };

BandCoefficients resonant_fast(const BoxedState& v, int n, const Field& u, ResKind kind) {
  const Grid& g = v.grid();
  Field Un = u_field(v.v, v.t, (n - 1) * g.B, (n + 2) * g.B);
  Field prod = zero_field(Un.grid);
  if (kind == ResKind::r2) {
    for (int m = 0; m < prod.grid.M; ++m) prod.samples[m] = Un.samples[m] * std::norm(u.samples[m]);
    return extract(forward(prod), g, n, v.t, 2.0);
  }
  for (int m = 0; m < prod.grid.M; ++m)
    prod.samples[m] = Un.samples[m] * std::conj(u.samples[m]) * Un.samples[m];
  return extract(forward(prod), g, n, v.t, 1.0);
}

BandCoefficients sub(BandCoefficients a, const BandCoefficients& b) {
  for (int i = 0; i < a.size(); ++i) a.coeffs[i] -= b.coeffs[i];
  return a;
}

}  // namespace

BandCoefficients full_nonlinearity(const BoxedState& v, int n) {
  const Grid& g = v.grid();
  check_box(g, n);
  Field u = u_field(v.v, v.t, g.j_min(), g.j_max());
  Field prod = zero_field(u.grid);
  for (int m = 0; m < u.grid.M; ++m) prod.samples[m] = std::norm(u.samples[m]) * u.samples[m];
  return extract(forward(prod), g, n, v.t, 1.0);
}

BandCoefficients resonant_r1(const BoxedState& v, int n) {
  check_box(v.grid(), n);
  Field u = u_field(v.v, v.t, v.grid().j_min(), v.grid().j_max());
  return resonant_fast(v, n, u, ResKind::r1);
}

BandCoefficients resonant_r2(const BoxedState& v, int n) {
  check_box(v.grid(), n);
  Field u = u_field(v.v, v.t, v.grid().j_min(), v.grid().j_max());
  return resonant_fast(v, n, u, ResKind::r2);
}

namespace {

BandCoefficients resonant_reference(const BoxedState& v, int n, TripleMode mode) {
  const Grid& g = v.grid();
  check_box(g, n);
  BandCoefficients out = zero_band(g, n);
  for (const auto& tr : enumerate_triples(n, g.n_max, ResonanceThreshold(1.0), mode)) {
    if (tr.n1 > g.box_max() || tr.n2 > g.box_max() || tr.n3 > g.box_max()) continue;
    auto q = q1(n, v.band(tr.n1), v.band(tr.n2), v.band(tr.n3), v.t);
    for (int i = 0; i < g.B; ++i) out.coeffs[i] += q.coeffs[i];
  }
  return out;
}

}  // namespace

BandCoefficients resonant_r1_reference(const BoxedState& v, int n) {
  return resonant_reference(v, n, TripleMode::resonant_R1);
}

// two singly-matched sums: the union, plus the doubly-matched triples a second time
BandCoefficients resonant_r2_reference(const BoxedState& v, int n) {
  BandCoefficients out = resonant_reference(v, n, TripleMode::resonant_R2);
  BandCoefficients twice = resonant_reference(v, n, TripleMode::resonant_R1);
  for (int i = 0; i < out.size(); ++i) out.coeffs[i] += twice.coeffs[i];
  return out;
}

ResonantParts resonant_parts(const BoxedState& v) {
  const Grid& g = v.grid();
  Field u = u_field(v.v, v.t, g.j_min(), g.j_max());
  ResonantParts parts;
  const int nb = g.box_count();
  parts.full.resize(nb);
  parts.r1.resize(nb);
  parts.r2.resize(nb);
  {
    Field prod = zero_field(u.grid);
    for (int m = 0; m < u.grid.M; ++m) prod.samples[m] = std::norm(u.samples[m]) * u.samples[m];
    Spectrum P = forward(prod);
    for (int n = g.box_min(); n <= g.box_max(); ++n) parts.full[n - g.box_min()] = extract(P, g, n, v.t, 1.0);
  }
#pragma omp parallel for schedule(dynamic)
  for (int k = 0; k < nb; ++k) {
    const int n = g.box_min() + k;
    parts.r1[k] = resonant_fast(v, n, u, ResKind::r1);
    parts.r2[k] = resonant_fast(v, n, u, ResKind::r2);
  }
  return parts;
}

BandCoefficients nonres_full(const BoxedState& v, int n) {
  return sub(sub(full_nonlinearity(v, n), resonant_r2(v, n)), sub(zero_band(v.grid(), n), resonant_r1(v, n)));
}

namespace {

std::vector<char> box_support(const BoxedState& v, double prune_tol, int W) {
  const Grid& g = v.grid();
  std::vector<double> norms(g.box_count());
  double mx = 0.0;
  for (int n = g.box_min(); n <= g.box_max(); ++n) {
    double acc = 0.0;
    for (int i = 0; i < g.B; ++i) acc += std::norm(v.v.at(n * g.B + i));
    norms[n - g.box_min()] = std::sqrt(acc);
    mx = std::max(mx, norms[n - g.box_min()]);
  }
  std::vector<char> sup(2 * W + 1, 0);
  for (int n = g.box_min(); n <= g.box_max(); ++n) {
    double x = norms[n - g.box_min()];
    sup[n + W] = (x > 0.0 && x > prune_tol * mx) ? 1 : 0;
  }
  return sup;
}

// supported non-resonant triples with |Phi| > N (above) or |Phi| <= N
void nonres_accumulate(const BoxedState& v, int n, const GenerationOptions& o, const std::vector<char>& sup,
                       const std::vector<BandCoefficients>& bands, BandCoefficients& out, cplx coef, bool above) {
  const Grid& g = v.grid();
  const int W = g.n_max;
  auto in_sup = [&](int k) { return k >= g.box_min() && k <= g.box_max() && sup[k + W]; };
  for (int n1 = g.box_min(); n1 <= g.box_max(); ++n1) {
    if (!in_sup(n1) || near(n1, n)) continue;
    for (int n3 = g.box_min(); n3 <= g.box_max(); ++n3) {
      if (!in_sup(n3) || near(n3, n)) continue;
      for (int d = -1; d <= 1; ++d) {
        int n2 = n1 + n3 - n + d;
        if (!in_sup(n2)) continue;
        FrequencyTriple tr{n, n1, n2, n3};
        if ((static_cast<double>(std::llabs(box_phase(tr, o.rule))) > o.N) != above) continue;
        q1_band_accumulate(out, bands[n1 - g.box_min()], bands[n2 - g.box_min()], bands[n3 - g.box_min()], v.t,
                           coef);
      }
    }
  }
}

std::vector<BandCoefficients> all_bands(const BoxedState& v) {
  const Grid& g = v.grid();
  std::vector<BandCoefficients> b;
  for (int n = g.box_min(); n <= g.box_max(); ++n) b.push_back(v.band(n));
  return b;
}

}  // namespace

BandCoefficients nonres_n12(const BoxedState& v, int n, const GenerationOptions& o) {
  const Grid& g = v.grid();
  check_box(g, n);
  auto sup = box_support(v, o.prune_tol, g.n_max);
  auto bands = all_bands(v);
  BandCoefficients out = zero_band(g, n);
  nonres_accumulate(v, n, o, sup, bands, out, 1.0, true);
  return out;
}

BandCoefficients nonres_n11(const BoxedState& v, int n, const GenerationOptions& o) {
  const Grid& g = v.grid();
  check_box(g, n);
  auto sup = box_support(v, o.prune_tol, g.n_max);
  auto bands = all_bands(v);
  BandCoefficients out = zero_band(g, n);
  nonres_accumulate(v, n, o, sup, bands, out, 1.0, false);
  return out;
}

Spectrum base_integrand(const BoxedState& v, const GenerationOptions& o) {
  const Grid& g = v.grid();
  const cplx c(0.0, static_cast<double>(o.sigma));
  auto parts = resonant_parts(v);
  auto sup = box_support(v, o.prune_tol, g.n_max);
  auto bands = all_bands(v);
  Spectrum out = zero_spectrum(g);
  const int nb = g.box_count();
  std::vector<BandCoefficients> res(nb);
#pragma omp parallel for schedule(dynamic)
  for (int k = 0; k < nb; ++k) {
    const int n = g.box_min() + k;
    // R2 - R1 + N11 = full - N12
    BandCoefficients b = parts.full[k];
    nonres_accumulate(v, n, o, sup, bands, b, -1.0, true);
    for (auto& z : b.coeffs) z *= c;
    res[k] = std::move(b);
  }
  for (const auto& b : res) set_band(out, b);
  return out;
}

namespace {

struct Record {
  int tree;
  int root;
  std::array<int, 3 * kKernelJMax + 1> freq;
  i64 mu_tilde_J, mu1;
};

inline constexpr size_t kRecordChunk = size_t(1) << 20;

struct GenerationContext {
  const BoxedState& v;
  const GenerationOptions& o;
  int J;
  unsigned mask;
  const Grid& g;
  int W;
  cplx c;
  bool inserts;
  std::vector<BandCoefficients> bands;
  std::vector<int> core;        // supported boxes
  std::vector<char> sup, ext;   // masks over [-W, W]; ext adds every box a supported triple reaches
  std::vector<BandCoefficients> resonant, nonres, full;  // by box, filled on ext
  std::vector<i64> max_phase;   // max |Phi| over supported non-resonant triples, by box
  std::vector<OrderedTree> trees;
  std::vector<SignTable> signs;
  std::vector<cplx> kappa;

  GenerationContext(const BoxedState& state, const GenerationOptions& opt, int gen, unsigned m)
      : v(state), o(opt), J(gen), mask(m), g(state.grid()), W(state.grid().n_max),
        c(0.0, static_cast<double>(opt.sigma)), inserts((m & (kNr | kN1 | kN2 | kFull)) != 0) {
    if (J < 1 || J > o.J_max || J > kKernelJMax) throw ResourceError("generation: J outside kernel-exact range");
    sup = box_support(v, o.prune_tol, W);
    bands = all_bands(v);
    for (int n = g.box_min(); n <= g.box_max(); ++n)
      if (sup[n + W]) core.push_back(n);
    ext = sup;
    if (inserts) {
      for (int n1 : core)
        for (int n2 : core)
          for (int n3 : core)
            for (int d = -1; d <= 1; ++d) {
              const int n = n1 - n2 + n3 + d;
              if (n >= g.box_min() && n <= g.box_max()) ext[n + W] = 1;
            }
      compute_parts();
    }
    trees = enumerate_trees(J, o.J_max);
    for (const auto& t : trees) {
      signs.push_back(compute_signs(t));
      cplx k = c;
      for (int gg = 2; gg <= J; ++gg) k *= -static_cast<double>(signs.back().fsgn[t.chronicle[gg - 1]]) * c;
      kappa.push_back(k);
    }
  }

  bool in_sup(int k) const { return k >= g.box_min() && k <= g.box_max() && sup[k + W]; }

  // triple sums over supported boxes at every reachable box
  void compute_parts() {
    const int nb = g.box_count();
    resonant.resize(nb);
    nonres.resize(nb);
    full.resize(nb);
    max_phase.assign(nb, 0);
#pragma omp parallel for schedule(dynamic)
    for (int k = 0; k < nb; ++k) {
      const int n = g.box_min() + k;
      resonant[k] = zero_band(g, n);
      nonres[k] = zero_band(g, n);
      full[k] = zero_band(g, n);
      if (!ext[n + W]) continue;
      i64 m = 0;
      for (int n1 : core)
        for (int n3 : core)
          for (int d = -1; d <= 1; ++d) {
            const int n2 = n1 + n3 - n + d;
            if (!in_sup(n2)) continue;
            const auto& b1 = bands[n1 - g.box_min()];
            const auto& b2 = bands[n2 - g.box_min()];
            const auto& b3 = bands[n3 - g.box_min()];
            if (near(n1, n) || near(n3, n)) {
              q1_band_accumulate(resonant[k], b1, b2, b3, v.t, 1.0);
            } else {
              q1_band_accumulate(nonres[k], b1, b2, b3, v.t, 1.0);
              m = std::max<i64>(m, std::llabs(box_phase(FrequencyTriple{n, n1, n2, n3}, o.rule)));
            }
          }
      for (int i = 0; i < full[k].size(); ++i) full[k].coeffs[i] = resonant[k].coeffs[i] + nonres[k].coeffs[i];
      max_phase[k] = m;
    }
  }

  // Non-resonant inner triples at box na split by membership in C_J given the outer phases.
  void split_inner(int na, int fs, i64 mu_tilde_J, i64 mu1, BandCoefficients& in_c, BandCoefficients& out_c) const {
    const int k = na - g.box_min();
    const double thr = c_set_threshold(J, static_cast<double>(mu_tilde_J), static_cast<double>(mu1));
    const double lo = static_cast<double>(std::llabs(mu_tilde_J)) - static_cast<double>(max_phase[k]);
    const double hi = static_cast<double>(std::llabs(mu_tilde_J)) + static_cast<double>(max_phase[k]);
    in_c = zero_band(g, na);
    out_c = zero_band(g, na);
    if (hi <= thr) {
      in_c = nonres[k];
      return;
    }
    if (lo > thr) {
      out_c = nonres[k];
      return;
    }
    for (int n1 : core) {
      if (near(n1, na)) continue;
      for (int n3 : core) {
        if (near(n3, na)) continue;
        for (int d = -1; d <= 1; ++d) {
          const int n2 = n1 + n3 - na + d;
          if (!in_sup(n2)) continue;
          const i64 mu = fs * box_phase(FrequencyTriple{na, n1, n2, n3}, o.rule);
          const bool member = std::abs(static_cast<double>(mu_tilde_J + mu)) <= thr;
          q1_band_accumulate(member ? in_c : out_c, bands[n1 - g.box_min()], bands[n2 - g.box_min()],
                             bands[n3 - g.box_min()], v.t, 1.0);
        }
      }
    }
  }

  // Streams the assignments of every tree to sink in chunks of at most kRecordChunk records.
  template <class Sink>
  void collect(Sink&& sink) const {
    IndexSearch opt;
    opt.window = W;
    opt.upper = g.box_max();
    opt.N = o.N;
    opt.filter = ChainFilter::C_complement_chain;
    opt.rule = o.rule;
    opt.leaf_support = &ext;
    opt.core_support = &sup;
    opt.max_outside = inserts ? 1 : 0;
    std::vector<Record> buf;
    buf.reserve(kRecordChunk);
    for (size_t ti = 0; ti < trees.size(); ++ti) {
      enumerate_all_roots(trees[ti], opt, [&](const AssignmentView& a) {
        Record r{static_cast<int>(ti), a.freq[0] - g.box_min(), {}, a.mu_tilde[J - 1], a.mu[0]};
        std::copy(a.freq.begin(), a.freq.end(), r.freq.begin());
        buf.push_back(r);
        if (buf.size() == kRecordChunk) {
          sink(buf);
          buf.clear();
        }
      });
    }
    if (!buf.empty()) sink(buf);
  }

  void run(const Record& r, BandCoefficients* out[5]) const {
    const OrderedTree& t = trees[r.tree];
    const SignTable& s = signs[r.tree];
    const auto leaves = t.terminals();
    const std::vector<int> freq(r.freq.begin(), r.freq.begin() + t.size());
    KernelInput in;
    in.tree = &t;
    in.signs = &s;
    in.freq = &freq;
    in.t = v.t;
    in.weight = KernelWeight::time_derivative;
    in.leaf_by_node.assign(t.size(), nullptr);
    int outside = -1;
    for (int b : leaves) {
      in.leaf_by_node[b] = &bands[r.freq[b] - g.box_min()];
      if (!sup[r.freq[b] + W]) outside = b;
    }
    if ((mask & kN0) && outside < 0) tree_kernel_serial(in, *out[0], kappa[r.tree]);
    if (!inserts) return;
    for (int b : leaves) {
      if (outside >= 0 && b != outside) continue;
      const int nb = r.freq[b];
      const int k = nb - g.box_min();
      const cplx coef = -static_cast<double>(s.fsgn[b]) * c * kappa[r.tree];
      const BandCoefficients* keep = in.leaf_by_node[b];
      if ((mask & kNr) && !resonant[k].is_zero()) {
        in.leaf_by_node[b] = &resonant[k];
        tree_kernel_serial(in, *out[1], coef);
      }
      if ((mask & (kN1 | kN2)) && !nonres[k].is_zero()) {
        BandCoefficients x1, x2;
        split_inner(nb, s.fsgn[b], r.mu_tilde_J, r.mu1, x1, x2);
        if ((mask & kN1) && !x1.is_zero()) {
          in.leaf_by_node[b] = &x1;
          tree_kernel_serial(in, *out[2], coef);
        }
        if ((mask & kN2) && !x2.is_zero()) {
          in.leaf_by_node[b] = &x2;
          tree_kernel_serial(in, *out[3], coef);
        }
      }
      if ((mask & kFull) && !full[k].is_zero()) {
        in.leaf_by_node[b] = &full[k];
        tree_kernel_serial(in, *out[4], coef);
      }
      in.leaf_by_node[b] = keep;
    }
  }
};

}  // namespace

GenerationTerms generation_terms(const BoxedState& v, int J, const GenerationOptions& o, unsigned mask) {
  GenerationContext ctx(v, o, J, mask);
  const Grid& g = v.grid();
  const int nb = g.box_count();
  std::vector<std::vector<BandCoefficients>> res(5, std::vector<BandCoefficients>(nb));
  for (int r = 0; r < 5; ++r)
    for (int k = 0; k < nb; ++k) res[r][k] = zero_band(g, g.box_min() + k);
  long long assignments = 0;
  bool failed = false;
  std::string err;
  std::vector<size_t> start(nb + 1), order;
  ctx.collect([&](const std::vector<Record>& buf) {
    // bucket by root, keeping enumeration order inside each root
    std::fill(start.begin(), start.end(), 0);
    for (const auto& r : buf) ++start[r.root + 1];
    for (int k = 0; k < nb; ++k) start[k + 1] += start[k];
    order.assign(buf.size(), 0);
    std::vector<size_t> fill(start.begin(), start.end() - 1);
    for (size_t i = 0; i < buf.size(); ++i) order[fill[buf[i].root]++] = i;
    assignments += static_cast<long long>(buf.size());
#pragma omp parallel for schedule(dynamic)
    for (int k = 0; k < nb; ++k) {
      if (start[k] == start[k + 1]) continue;
      BandCoefficients* out[5];
      for (int r = 0; r < 5; ++r) out[r] = &res[r][k];
      try {
        for (size_t i = start[k]; i < start[k + 1]; ++i) ctx.run(buf[order[i]], out);
      } catch (const std::exception& e) {
#pragma omp critical
        {
          failed = true;
          err = e.what();
        }
      }
    }
  });
  if (failed) throw ContractError(err);
  GenerationTerms terms{zero_spectrum(g), zero_spectrum(g), zero_spectrum(g), zero_spectrum(g), zero_spectrum(g), 0};
  Spectrum* dst[5] = {&terms.n0, &terms.nr, &terms.n1, &terms.n2, &terms.full};
  for (int r = 0; r < 5; ++r)
    for (int k = 0; k < nb; ++k) set_band(*dst[r], res[r][k]);
  terms.assignments = assignments;
  return terms;
}

BoxedState generation_n0(const BoxedState& v, int J, const GenerationOptions& o) {
  return make_state(generation_terms(v, J, o, kN0).n0, v.t);
}

BoxedState generation_nr(const BoxedState& v, int J, const GenerationOptions& o) {
  return make_state(generation_terms(v, J, o, kNr).nr, v.t);
}

BoxedState generation_n1(const BoxedState& v, int J, const GenerationOptions& o) {
  return make_state(generation_terms(v, J, o, kN1).n1, v.t);
}

BoxedState remainder_n2(const BoxedState& v, int J, const GenerationOptions& o) {
  return make_state(generation_terms(v, J, o, kN2).n2, v.t);
}

std::vector<double> quadrature_nodes(double T, int K) {
  std::vector<double> t(K + 1);
  for (int k = 0; k <= K; ++k) t[k] = T * static_cast<double>(k) / K;
  return t;
}

namespace {

void axpy(Spectrum& y, cplx a, const Spectrum& x) {
  for (size_t i = 0; i < y.coeffs.size(); ++i) y.coeffs[i] += a * x.coeffs[i];
}

Spectrum diff(const Spectrum& a, const Spectrum& b) {
  Spectrum d = a;
  axpy(d, -1.0, b);
  return d;
}

// cumulative trapezoid: out[k] = int_0^{t_k} f
std::vector<Spectrum> cumulative(const std::vector<double>& t, const std::vector<Spectrum>& f) {
  std::vector<Spectrum> out;
  out.push_back(zero_spectrum(f.front().grid));
  for (size_t k = 1; k < t.size(); ++k) {
    Spectrum s = out.back();
    const double h = 0.5 * (t[k] - t[k - 1]);
    axpy(s, h, f[k - 1]);
    axpy(s, h, f[k]);
    out.push_back(std::move(s));
  }
  return out;
}

}  // namespace

Trajectory gamma_partial(const BoxedState& v0, const Trajectory& v, const SolverParams& p) {
  validate(p);
  if (v.times.size() != v.states.size() || v.times.empty()) throw ConfigError("gamma_partial: malformed trajectory");
  if (v.times.front() != 0.0) throw ConfigError("gamma_partial: trajectory must start at t = 0");
  for (size_t k = 1; k < v.times.size(); ++k)
    if (!(v.times[k] > v.times[k - 1])) throw ConfigError("gamma_partial: times must increase");
  const GenerationOptions o = generation_options(p);
  const size_t nodes = v.times.size();
  std::vector<Spectrum> base;
  std::vector<std::vector<Spectrum>> bnd(p.J), integ(p.J);
  for (size_t k = 0; k < nodes; ++k) {
    const BoxedState& s = v.states[k];
    base.push_back(base_integrand(s, o));
    for (int j = 1; j < p.J; ++j) {
      auto terms = generation_terms(s, j, o, kN0 | kNr | kN1);
      Spectrum f = terms.nr;
      axpy(f, 1.0, terms.n1);
      bnd[j].push_back(std::move(terms.n0));
      integ[j].push_back(std::move(f));
    }
  }
  auto base_int = cumulative(v.times, base);
  std::vector<std::vector<Spectrum>> integ_cum(p.J);
  std::vector<Spectrum> b0(p.J, zero_spectrum(v0.grid()));
  BoxedState start = make_state(v0.v, 0.0);
  for (int j = 1; j < p.J; ++j) {
    integ_cum[j] = cumulative(v.times, integ[j]);
    b0[j] = generation_terms(start, j, o, kN0).n0;
  }
  Trajectory out;
  out.times = v.times;
  for (size_t k = 0; k < nodes; ++k) {
    Spectrum s = v0.v;
    axpy(s, 1.0, base_int[k]);
    for (int j = 1; j < p.J; ++j) {
      axpy(s, 1.0, diff(bnd[j][k], b0[j]));
      axpy(s, 1.0, integ_cum[j][k]);
    }
    out.states.push_back(make_state(s, v.times[k]));
  }
  return out;
}

SolveResult solve(const Field& u0, const SolverParams& p) {
  validate(p);
  const Spectrum v0 = forward(u0);
  SolveResult r;
  Trajectory cur;
  cur.times = quadrature_nodes(p.T, p.K);
  if (p.T == 0.0) cur.times = {0.0};
  for (double t : cur.times) cur.states.push_back(make_state(v0, t));
  const BoxedState start = make_state(v0, 0.0);
  int bad = 0;
  for (int it = 0; it < p.picard_max_iter; ++it) {
    Trajectory next = cur.times.size() == 1 ? cur : gamma_partial(start, cur, p);
    double d = 0.0;
    for (size_t k = 0; k < cur.states.size(); ++k)
      d = std::max(d, modulation_norm(diff(next.states[k].v, cur.states[k].v), p.s, p.q));
    r.differences.push_back(d);
    ++r.iterations;
    cur = std::move(next);
    if (r.differences.size() >= 2) {
      double prev = r.differences[r.differences.size() - 2];
      double ratio = prev > 0.0 ? d / prev : 0.0;
      r.ratios.push_back(ratio);
      bad = ratio >= 1.0 ? bad + 1 : 0;
      if (bad >= 3) throw DivergenceError("solve: Picard iteration is not contracting", r.ratios);
    }
    if (d < p.picard_tol) break;
  }
  r.v = cur;
  r.u.times = cur.times;
  for (size_t k = 0; k < cur.states.size(); ++k)
    r.u.states.push_back(make_state(free_propagate(cur.states[k].v, cur.times[k], Semigroup::minus), cur.times[k]));
  return r;
}

}  // namespace nfnls
