#include "nfnls/resonance.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <string>
#include <tuple>

namespace nfnls {

bool FrequencyTriple::operator<(const FrequencyTriple& o) const {
  return std::tie(n, n1, n2, n3) < std::tie(o.n, o.n1, o.n2, o.n3);
}

PhaseRecord make_phase_record(const std::vector<i64>& mu) {
  PhaseRecord r;
  r.mu = mu;
  i64 acc = 0;
  double prod = 1.0;
  for (i64 m : mu) {
    acc += m;
    prod *= static_cast<double>(acc);
    r.mu_tilde.push_back(acc);
    r.mu_hat.push_back(prod);
  }
  return r;
}

ResonanceThreshold::ResonanceThreshold(double value) : N(value) {
  if (!(value > 0.0)) throw DomainError("resonance threshold must be positive");
}

double phase_phi(double xi, double xi1, double xi2, double xi3) {
  return xi * xi - xi1 * xi1 + xi2 * xi2 - xi3 * xi3;
}

i64 phase_phi(i64 n, i64 n1, i64 n2, i64 n3) { return n * n - n1 * n1 + n2 * n2 - n3 * n3; }

i64 box_phase(const FrequencyTriple& t, PhaseRule rule) {
  if (rule == PhaseRule::tuple) return phase_phi(i64(t.n), i64(t.n1), i64(t.n2), i64(t.n3));
  return 2 * (i64(t.n) - t.n1) * (i64(t.n) - t.n3);
}

i64 divisor_count(i64 m) {
  if (m <= 0) throw DomainError("divisor_count: m must be positive");
  i64 count = 1;
  for (i64 p = 2; p * p <= m; ++p) {
    int e = 0;
    while (m % p == 0) {
      m /= p;
      ++e;
    }
    count *= (e + 1);
  }
  if (m > 1) count *= 2;
  return count;
}

std::vector<int> divisor_sieve(int limit) {
  std::vector<int> d(limit + 1, 0);
  for (int a = 1; a <= limit; ++a)
    for (int m = a; m <= limit; m += a) ++d[m];
  return d;
}

DivisorGrowth divisor_growth(int limit, double eps) {
  auto d = divisor_sieve(limit);
  DivisorGrowth g;
  for (int m = 1; m <= limit; ++m) {
    double r = d[m] / std::pow(static_cast<double>(m), eps);
    if (r > g.max_ratio) {
      g.max_ratio = r;
      g.argmax = m;
    }
  }
  return g;
}

bool is_resonant(const FrequencyTriple& t) { return near(t.n1, t.n) || near(t.n3, t.n); }

std::vector<FrequencyTriple> enumerate_triples(int n, int window, const ResonanceThreshold& N,
                                               TripleMode mode, PhaseRule rule) {
  if (window < 0) throw RangeError("enumerate_triples: negative window");
  std::vector<FrequencyTriple> out;
  for (int n1 = -window; n1 <= window; ++n1) {
    bool r1 = near(n1, n);
    if (mode == TripleMode::resonant_R1 && !r1) continue;
    for (int n2 = -window; n2 <= window; ++n2) {
      for (int n3 = -window; n3 <= window; ++n3) {
        if (!near(n1 - n2 + n3, n)) continue;
        bool r3 = near(n3, n);
        FrequencyTriple t{n, n1, n2, n3};
        bool keep = false;
        switch (mode) {
          case TripleMode::resonant_R1: keep = r1 && r3; break;
          case TripleMode::resonant_R2: keep = r1 || r3; break;
          case TripleMode::A_N:
            keep = !r1 && !r3 && static_cast<double>(std::llabs(box_phase(t, rule))) <= N.N;
            break;
          case TripleMode::A_N_complement:
            keep = !r1 && !r3 && static_cast<double>(std::llabs(box_phase(t, rule))) > N.N;
            break;
        }
        if (keep) out.push_back(t);
      }
    }
  }
  return out;
}

std::vector<FrequencyTriple> enumerate_triples(int n, int window, int n_max, const ResonanceThreshold& N,
                                               TripleMode mode, PhaseRule rule) {
  if (window > n_max)
    throw RangeError("enumerate_triples: window " + std::to_string(window) + " exceeds grid n_max " +
                     std::to_string(n_max));
  return enumerate_triples(n, window, N, mode, rule);
}

double c_set_threshold(int J, double mu_tilde_J, double mu_1) {
  double c = std::pow(2.0 * J + 3.0, 3);
  double e = 1.0 - 1.0 / 100.0;
  return c * std::max(std::pow(std::abs(mu_tilde_J), e), std::pow(std::abs(mu_1), e));
}

bool c_set_member(int J, double mu_tilde_J, double mu_tilde_J1, double mu_1) {
  return std::abs(mu_tilde_J1) <= c_set_threshold(J, mu_tilde_J, mu_1);
}

i64 divisor_choice_count(int n, i64 mu, int window) {
  if (mu == 0 || (mu % 2) != 0) return 0;
  i64 m = mu / 2;
  i64 am = std::llabs(m);
  i64 count = 0;
  for (i64 a = 1; a * a <= am; ++a) {
    if (am % a != 0) continue;
    i64 b = am / a;
    std::vector<std::pair<i64, i64>> pairs;
    for (int sa : {1, -1}) {
      i64 x = sa * a;
      i64 y = m / x;
      pairs.push_back({x, y});
      if (a != b) pairs.push_back({y, x});
    }
    for (auto [x, y] : pairs) {
      i64 n1 = n - x, n3 = n - y;
      if (std::llabs(n1) <= window && std::llabs(n3) <= window) ++count;
    }
  }
  return count;
}

}  // namespace nfnls
