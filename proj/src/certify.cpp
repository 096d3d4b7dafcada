#include "nfnls/certify.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <sstream>

#include "nfnls/harness.hpp"

namespace nfnls {

double EmpiricalConstants::C() const { return std::max({C_fir, C_fir_2B, C_Q1, C_R}); }

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

std::uint64_t sub_seed(std::uint64_t seed, int k) { return seed * 6364136223846793005ULL + 1442695040888963407ULL * (k + 1); }

CheckRecord failed(const std::string& name, const std::string& anchor, const std::string& what) {
  return CheckRecord{name, std::numeric_limits<double>::quiet_NaN(), 0.0, false, anchor, what};
}

std::string fmt(double x) {
  std::ostringstream os;
  os.precision(6);
  os << x;
  return os.str();
}

// least-squares slope of log y against log x
double loglog_slope(const std::vector<double>& x, const std::vector<double>& y) {
  double mx = 0.0, my = 0.0;
  const size_t n = x.size();
  for (size_t i = 0; i < n; ++i) {
    mx += std::log(x[i]);
    my += std::log(y[i]);
  }
  mx /= n;
  my /= n;
  double sxy = 0.0, sxx = 0.0;
  for (size_t i = 0; i < n; ++i) {
    const double dx = std::log(x[i]) - mx;
    sxy += dx * (std::log(y[i]) - my);
    sxx += dx * dx;
  }
  return sxy / sxx;
}

BandCoefficients shaped_band(const Grid& g, int n, int shape, std::mt19937_64& rng) {
  if (shape >= 2) return random_band(g, n, rng);
  BandCoefficients b = zero_band(g, n);
  for (int i = 0; i < g.B; ++i)
    b.coeffs[i] = shape == 0 ? 1.0 : std::sin(kPi * (i + 0.5) / g.B);
  const double s = b.l2_norm();
  for (auto& z : b.coeffs) z /= s;
  return b;
}

Spectrum random_state(const Grid& g, int lo, int hi, double norm, double s, double q, std::mt19937_64& rng) {
  Spectrum S = zero_spectrum(g);
  for (int n = lo; n < hi; ++n) add_band(S, random_band(g, n, rng));
  const double m = modulation_norm(S, s, q);
  for (auto& z : S.coeffs) z *= norm / m;
  return S;
}

struct FirSweep {
  double C_fir = 0.0;
  double C_Q1 = 0.0;
};

FirSweep fir_sweep(int B, std::uint64_t seed) {
  const int ds[] = {2, 3, 5, 10, 25, 50};
  const Grid g = make_grid(B, 104);
  std::mt19937_64 rng(seed);
  FirSweep out;
  const int shapes = 4;  // constant, sine, two random draws
  for (int d1 : ds)
    for (int d3 : ds)
      for (int s3 : {1, -1})
        for (int delta : {-1, 0, 1}) {
          const int n = 0, n1 = n - d1, n3 = n - s3 * d3;
          const int n2 = n1 + n3 - n + delta;
          for (int a = 0; a < shapes; ++a)
            for (int b = 0; b < shapes; ++b)
              for (int c = 0; c < shapes; ++c) {
                auto b1 = shaped_band(g, n1, a, rng), b2 = shaped_band(g, n2, b, rng), b3 = shaped_band(g, n3, c, rng);
                const double prod = b1.l2_norm() * b2.l2_norm() * b3.l2_norm();
                for (double t : {0.0, 0.37}) {
                  const double qt = q1_tilde(n, b1, b2, b3, t).l2_norm() * d1 * d3 / prod;
                  out.C_fir = std::max(out.C_fir, qt);
                  if (t == 0.0) out.C_Q1 = std::max(out.C_Q1, q1_band(n, b1, b2, b3, t).l2_norm() / prod);
                }
              }
        }
  return out;
}

}  // namespace

CheckRecord check_tree_counts() {
  const std::string name = "1 tree combinatorics", anchor = "ordered tree count (2J-1)!!";
  try {
    const auto t0 = Clock::now();
    int mismatches = 0;
    std::string detail;
    for (int J = 1; J <= 6; ++J) {
      auto ts = enumerate_trees(J);
      if (static_cast<i64>(ts.size()) != double_factorial_odd(J)) {
        ++mismatches;
        detail += "J=" + std::to_string(J) + " count " + std::to_string(ts.size()) + "; ";
      }
      for (const auto& t : ts)
        if (t.size() != 3 * J + 1 || static_cast<int>(t.terminals().size()) != 2 * J + 1) ++mismatches;
    }
    const double secs = seconds_since(t0);
    detail += "seconds " + fmt(secs);
    return CheckRecord{name, double(mismatches), 0.0, mismatches == 0 && secs < 5.0, anchor, detail};
  } catch (const std::exception& e) {
    return failed(name, anchor, e.what());
  }
}

CheckRecord check_phase_identity(std::uint64_t seed) {
  const std::string name = "2 phase identity", anchor = "phase factorization";
  try {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(-100.0, 100.0);
    double worst = 0.0;
    for (int k = 0; k < 10000; ++k) {
      const double x1 = u(rng), x2 = u(rng), x3 = u(rng);
      const double x = x1 - x2 + x3;
      const double lhs = phase_phi(x, x1, x2, x3);
      const double rhs = 2.0 * (x - x1) * (x - x3);
      const double scale = x * x + x1 * x1 + x2 * x2 + x3 * x3;
      worst = std::max(worst, std::abs(lhs - rhs) / scale);
    }
    const double bound = 16.0 * std::numeric_limits<double>::epsilon();
    return CheckRecord{name, worst, bound, worst <= bound, anchor, "relative to xi^2 + xi1^2 + xi2^2 + xi3^2"};
  } catch (const std::exception& e) {
    return failed(name, anchor, e.what());
  }
}

CheckRecord check_unitarity(std::uint64_t seed) {
  const std::string name = "3 propagator unitarity", anchor = "Schrodinger group isometry";
  try {
    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<int> pick(0, 2);
    const Grid grids[] = {make_grid(1, 32), make_grid(4, 16), make_grid(8, 12)};
    double worst = 0.0;
    for (int k = 0; k < 100; ++k) {
      const Grid& g = grids[pick(rng)];
      Spectrum F = random_state(g, g.box_min(), g.box_max() + 1, 1.0, 0.0, 2.0, rng);
      const double q = k % 2 ? 1.5 : 2.0;
      const double s = k % 3 ? 0.0 : 1.0;
      const double l2 = F.l2_norm(), m = modulation_norm(F, s, q);
      for (double t : {0.1, 1.0, 10.0}) {
        Spectrum G = free_propagate(F, t);
        worst = std::max(worst, std::abs(G.l2_norm() - l2) / l2);
        worst = std::max(worst, std::abs(modulation_norm(G, s, q) - m) / m);
        Field f = inverse(F), h = inverse(G);
        worst = std::max(worst, std::abs(h.l2_norm() - f.l2_norm()) / f.l2_norm());
      }
    }
    return CheckRecord{name, worst, 1e-10, worst <= 1e-10, anchor, "L2 and modulation norms, 100 fields"};
  } catch (const std::exception& e) {
    return failed(name, anchor, e.what());
  }
}

CheckRecord check_fir(std::uint64_t seed, EmpiricalConstants& k) {
  const std::string name = "4 first-order kernel bound", anchor = "q1_tilde times |n-n1||n-n3|";
  try {
    const auto t0 = Clock::now();
    const FirSweep a = fir_sweep(4, seed), b = fir_sweep(8, seed);
    const double secs = seconds_since(t0);
    k.C_fir = a.C_fir;
    k.C_fir_2B = b.C_fir;
    k.C_Q1 = std::max(a.C_Q1, b.C_Q1);
    const double stab = std::max(a.C_fir / b.C_fir, b.C_fir / a.C_fir);
    const bool ok = std::isfinite(a.C_fir) && std::isfinite(b.C_fir) && a.C_fir > 0.0 && stab <= 2.0 && secs < 60.0;
    return CheckRecord{name, stab, 2.0, ok, anchor,
                       "C(B=4) " + fmt(a.C_fir) + ", C(B=8) " + fmt(b.C_fir) + ", seconds " + fmt(secs)};
  } catch (const std::exception& e) {
    return failed(name, anchor, e.what());
  }
}

CheckRecord check_tree_bound(std::uint64_t seed, const EmpiricalConstants& k) {
  const std::string name = "5 tree kernel bound", anchor = "q_tree times |mu_hat| over all trees";
  try {
    const auto t0 = Clock::now();
    std::mt19937_64 rng(seed);
    IndexSearch opt;
    opt.window = 1000;
    opt.N = 4.0;
    opt.filter = ChainFilter::C_complement_chain;
    double worst_ratio = 0.0;
    long long samples = 0, missing = 0;
    std::string detail;
    for (int J = 2; J <= 3; ++J) {
      const double bound = 4.0 * std::pow(k.C_fir, J);
      double worst = 0.0;
      for (const auto& t : enumerate_trees(J)) {
        for (int s = 0; s < 50; ++s) {
          auto a = sample_index_function(t, 0, opt, rng, 4000000);
          if (!a) {
            ++missing;
            continue;
          }
          ++samples;
          worst = std::max(worst, certify_tree_bound(t, *a, 4, 4, rng));
        }
      }
      worst_ratio = std::max(worst_ratio, worst / bound);
      detail += "J=" + std::to_string(J) + " max " + fmt(worst) + " bound " + fmt(bound) + "; ";
    }
    const double secs = seconds_since(t0);
    detail += std::to_string(samples) + " assignments, " + std::to_string(missing) + " not found, seconds " + fmt(secs);
    const bool ok = worst_ratio <= 1.0 && missing == 0 && secs < 600.0;
    return CheckRecord{name, worst_ratio, 1.0, ok, anchor, detail};
  } catch (const std::exception& e) {
    return failed(name, anchor, e.what());
  }
}

CheckRecord check_decomposition(std::uint64_t seed) {
  const std::string name = "6 first-step decomposition", anchor = "R2 - R1 + N11 + N12 = boxed cubic";
  try {
    std::mt19937_64 rng(seed);
    const Grid g = make_grid(2, 8);
    GenerationOptions o;
    o.N = 20.0;
    double worst = 0.0;
    for (int k = 0; k < 20; ++k) {
      BoxedState v = make_state(random_state(g, g.box_min(), g.box_max() + 1, 1.0, 0.0, 2.0, rng), 0.1 * k);
      double scale = 0.0, err = 0.0;
      for (int n = g.box_min(); n <= g.box_max(); ++n) {
        auto full = full_nonlinearity(v, n);
        auto r2 = resonant_r2_reference(v, n), r1 = resonant_r1_reference(v, n);
        auto a = nonres_n11(v, n, o), b = nonres_n12(v, n, o);
        BandCoefficients d = full;
        for (int i = 0; i < d.size(); ++i)
          d.coeffs[i] -= r2.coeffs[i] - r1.coeffs[i] + a.coeffs[i] + b.coeffs[i];
        scale = std::max(scale, full.l2_norm());
        err = std::max(err, d.l2_norm());
      }
      worst = std::max(worst, err / scale);
    }
    return CheckRecord{name, worst, 1e-8, worst <= 1e-8, anchor, "20 random states, relative to max box norm"};
  } catch (const std::exception& e) {
    return failed(name, anchor, e.what());
  }
}

CheckRecord check_n_decay(std::uint64_t seed) {
  const std::string name = "7 threshold exponents", anchor = "N11 growth and N0 decay in N";
  try {
    std::mt19937_64 rng(seed);
    const Grid g = make_grid(2, 64);
    const std::vector<double> Ns = {4.0, 16.0, 64.0};
    const Spectrum base = random_state(g, -16, 16, 1.0, 0.0, 2.0, rng);
    double excess = -std::numeric_limits<double>::infinity();
    std::string detail;
    for (double q : {1.5, 2.0}) {
      const double a = 1.0 - 1.0 / q;
      Spectrum S = base;
      const double m = modulation_norm(S, 0.0, q);
      for (auto& z : S.coeffs) z /= m;
      const BoxedState v = make_state(S, 0.0);
      std::vector<double> n11, n0;
      for (double N : Ns) {
        GenerationOptions o;
        o.N = N;
        Spectrum A = zero_spectrum(g);
        for (int n = g.box_min(); n <= g.box_max(); ++n) set_band(A, nonres_n11(v, n, o));
        n11.push_back(lq_l2_norm(A, 0.0, q));
        n0.push_back(lq_l2_norm(generation_n0(v, 1, o).v, 0.0, q));
      }
      const double s11 = loglog_slope(Ns, n11), s0 = loglog_slope(Ns, n0);
      excess = std::max({excess, s11 - (a + 0.2), s0 - (a - 1.0 + 0.2), (a - 1.0 - 0.2) - s0});
      detail += "q=" + fmt(q) + ": N11 slope " + fmt(s11) + " (<= " + fmt(a + 0.2) + "), N0 slope " + fmt(s0) +
                " (in [" + fmt(a - 1.2) + ", " + fmt(a - 0.8) + "]); ";
    }
    return CheckRecord{name, excess, 0.0, excess <= 0.0, anchor, detail};
  } catch (const std::exception& e) {
    return failed(name, anchor, e.what());
  }
}

namespace {

// Tones on a chain of widening triples: every deeper generation has a phase far above the previous one.
const int kChainTones[] = {-2, -4, -27, -52, -487, -947, -12487, -24487};

}  // namespace

CheckRecord check_remainder_decay() {
  const std::string name = "8 remainder decay", anchor = "N2 remainder in l^inf L2 over J = 1, 2, 3";
  try {
    const Grid g = make_grid(1, 24600);
    Spectrum S = zero_spectrum(g);
    for (int k : kChainTones) S.at(k) = std::polar(1.0, 0.7 * k);
    const double m = modulation_norm(S, 0.0, 2.0);
    for (auto& z : S.coeffs) z *= 0.5 / m;
    const BoxedState v = make_state(S, 0.0);
    GenerationOptions o;
    o.N = 4.0;
    std::vector<double> r;
    std::string detail;
    for (int J = 1; J <= 3; ++J) {
      r.push_back(lq_l2_norm(remainder_n2(v, J, o).v, 0.0, std::numeric_limits<double>::infinity()));
      detail += "J=" + std::to_string(J) + " " + fmt(r.back()) + "; ";
    }
    const bool ok = r[0] > r[1] && r[1] > r[2] && r[2] > 0.0;
    return CheckRecord{name, std::max(r[1] / r[0], r[2] / r[1]), 1.0, ok, anchor, detail};
  } catch (const std::exception& e) {
    return failed(name, anchor, e.what());
  }
}

double measure_C_R(std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  const Grid g = make_grid(2, 16);
  double worst = 0.0;
  for (int k = 0; k < 10; ++k) {
    const BoxedState v = make_state(random_state(g, -8, 8, 1.0, 0.0, 2.0, rng), 0.05 * k);
    const double nv = modulation_norm(v.v, 0.0, 2.0);
    double r1 = 0.0, r2 = 0.0;
    for (int n = g.box_min(); n <= g.box_max(); ++n) {
      r1 = std::max(r1, resonant_r1(v, n).l2_norm());
      r2 = std::max(r2, resonant_r2(v, n).l2_norm());
    }
    worst = std::max(worst, std::max(r1, r2) / (nv * nv * nv));
  }
  return worst;
}

namespace {

Field gaussian_datum(const Grid& g, double amp) {
  Field f = zero_field(g);
  for (int m = 0; m < g.M; ++m) {
    double x = g.x(m);
    if (x >= 0.5 * g.L) x -= g.L;
    f.samples[m] = amp * std::exp(-x * x);
  }
  return f;
}

}  // namespace

void check_solver(const EmpiricalConstants& k, CheckRecord& agreement, CheckRecord& contraction) {
  const std::string n9 = "9 solver agreement", a9 = "split-step oracle at T, J = 1..3";
  const std::string n10 = "10 contraction", a10 = "Picard ratio after the first iterate";
  try {
    const auto t0 = Clock::now();
    const Grid g = make_grid(4, 16);
    const Field u0 = gaussian_datum(g, 0.01);
    SolverParams p = choose_parameters(1.0, 2.0, k.C(), 0.2);
    p.J = 2;
    p.s = 0.0;
    p.prune_tol = 1e-20;
    const double m0 = modulation_norm(forward(u0), p.s, p.q);
    auto rows = compare_with_reference(u0, p, {1, 2, 3});
    const double secs = seconds_since(t0);
    std::string d9 = "N " + fmt(p.N) + ", T " + fmt(p.T) + ", C " + fmt(p.C) + ", datum norm " + fmt(m0) + "; ";
    bool monotone = true;
    double e2 = 0.0;
    for (size_t i = 0; i < rows.size(); ++i) {
      d9 += "J=" + std::to_string(rows[i].J) + " err " + fmt(rows[i].error) + "; ";
      if (rows[i].J == 2) e2 = rows[i].error;
      if (i > 0 && rows[i].error > rows[i - 1].error) monotone = false;
    }
    d9 += "seconds " + fmt(secs);
    agreement = CheckRecord{n9, e2, 1e-3, e2 <= 1e-3 && monotone && m0 <= p.R && secs < 300.0, a9, d9};
    double worst = 0.0;
    std::string d10;
    for (const auto& row : rows)
      if (row.J == 2) {
        for (double r : row.ratios) {
          worst = std::max(worst, r);
          d10 += fmt(r) + " ";
        }
        d10 += "(" + std::to_string(row.iterations) + " iterations, last difference " + fmt(row.differences.back()) + ")";
      }
    contraction = CheckRecord{n10, worst, 0.5, worst <= 0.5, a10, d10};
  } catch (const std::exception& e) {
    agreement = failed(n9, a9, e.what());
    contraction = failed(n10, a10, e.what());
  }
}

CheckRecord check_gamma_bound(std::uint64_t seed, const EmpiricalConstants& k) {
  const std::string name = "11 partial-sum bound", anchor = "sup_t ||Gamma2 v|| <= 1.1 R + 0.2 R~";
  try {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(0.5, 1.0);
    const Grid g = make_grid(2, 32);
    SolverParams p = choose_parameters(1.0, 2.0, k.C(), 0.2);
    p.J = 2;
    p.prune_tol = 1e-20;
    const double bound = 1.1 * p.R + 0.2 * p.R_tilde;
    double worst = 0.0;
    long long above = 0;
    for (int k = 0; k < 20; ++k) {
      const Spectrum v0 = random_state(g, -32, 32, p.R * u(rng), p.s, p.q, rng);
      const Spectrum a = random_state(g, -32, 32, p.R_tilde * u(rng), p.s, p.q, rng);
      const Spectrum b = random_state(g, -32, 32, p.R_tilde * u(rng), p.s, p.q, rng);
      Trajectory v;
      v.times = quadrature_nodes(p.T, p.K);
      for (double t : v.times) {
        const double w = p.T > 0.0 ? t / p.T : 0.0;
        Spectrum s = a;
        for (size_t i = 0; i < s.coeffs.size(); ++i) s.coeffs[i] = (1.0 - w) * a.coeffs[i] + w * b.coeffs[i];
        v.states.push_back(make_state(s, t));
      }
      if (k == 0) above = generation_terms(v.states[0], 1, generation_options(p), kN0).assignments;
      const Trajectory G = gamma_partial(make_state(v0, 0.0), v, p);
      for (const auto& s : G.states) worst = std::max(worst, modulation_norm(s.v, p.s, p.q));
    }
    return CheckRecord{name, worst, bound, worst <= bound, anchor,
                       "N " + fmt(p.N) + ", T " + fmt(p.T) + ", 20 pairs, " + std::to_string(above) +
                           " first-generation assignments above N"};
  } catch (const std::exception& e) {
    return failed(name, anchor, e.what());
  }
}

RunReport acceptance_suite(std::uint64_t seed) {
  RunReport r;
  r.kind = "verify_lemmas";
  EmpiricalConstants k;
  r.checks.push_back(check_tree_counts());
  r.checks.push_back(check_phase_identity(sub_seed(seed, 2)));
  r.checks.push_back(check_unitarity(sub_seed(seed, 3)));
  r.checks.push_back(check_fir(sub_seed(seed, 4), k));
  try {
    k.C_R = measure_C_R(sub_seed(seed, 12));
  } catch (const std::exception&) {
    k.C_R = 0.0;
  }
  r.checks.push_back(check_tree_bound(sub_seed(seed, 5), k));
  r.checks.push_back(check_decomposition(sub_seed(seed, 6)));
  r.checks.push_back(check_n_decay(sub_seed(seed, 7)));
  r.checks.push_back(check_remainder_decay());
  CheckRecord c9, c10;
  check_solver(k, c9, c10);
  r.checks.push_back(c9);
  r.checks.push_back(c10);
  r.checks.push_back(check_gamma_bound(sub_seed(seed, 11), k));
  r.constants["C_fir"] = k.C_fir;
  r.constants["C_fir_2B"] = k.C_fir_2B;
  r.constants["C_Q1"] = k.C_Q1;
  r.constants["C_R"] = k.C_R;
  r.constants["C"] = k.C();
  return r;
}

}  // namespace nfnls
