#pragma once

#include <cstdint>
#include <vector>

#include "nfnls/errors.hpp"

namespace nfnls {

using i64 = std::int64_t;

struct FrequencyTriple {
  int n = 0, n1 = 0, n2 = 0, n3 = 0;
  bool operator==(const FrequencyTriple& o) const {
    return n == o.n && n1 == o.n1 && n2 == o.n2 && n3 == o.n3;
  }
  bool operator<(const FrequencyTriple& o) const;
};

struct PhaseRecord {
  std::vector<i64> mu;
  std::vector<i64> mu_tilde;
  std::vector<double> mu_hat;
};

PhaseRecord make_phase_record(const std::vector<i64>& mu);

struct ResonanceThreshold {
  double N = 1.0;
  explicit ResonanceThreshold(double value);
};

// How the integer phase of a box tuple is measured.
// tuple:      n^2 - n1^2 + n2^2 - n3^2 on the tuple itself (carries the +-1 slack)
// factorized: 2 (n - n1)(n - n3)
enum class PhaseRule { tuple, factorized };

double phase_phi(double xi, double xi1, double xi2, double xi3);
i64 phase_phi(i64 n, i64 n1, i64 n2, i64 n3);
i64 box_phase(const FrequencyTriple& t, PhaseRule rule);

inline bool near(int a, int b) { return a - b >= -1 && a - b <= 1; }

i64 divisor_count(i64 m);
std::vector<int> divisor_sieve(int limit);

struct DivisorGrowth {
  double max_ratio = 0.0;
  int argmax = 1;
};
// max_{m <= limit} d(m) / m^eps
DivisorGrowth divisor_growth(int limit, double eps);

enum class TripleMode { resonant_R1, resonant_R2, A_N, A_N_complement };

// All (n1, n2, n3) in [-window, window]^3 with n1 - n2 + n3 in {n-1, n, n+1}
// matching the mode; lexicographic order.
std::vector<FrequencyTriple> enumerate_triples(int n, int window, const ResonanceThreshold& N,
                                               TripleMode mode, PhaseRule rule = PhaseRule::tuple);
// Same, checked against a box window n_max (indices limited to [-window, window], window <= n_max).
std::vector<FrequencyTriple> enumerate_triples(int n, int window, int n_max, const ResonanceThreshold& N,
                                               TripleMode mode, PhaseRule rule = PhaseRule::tuple);

bool is_resonant(const FrequencyTriple& t);

// (2J+3)^3 with exponent 1 - 1/100
bool c_set_member(int J, double mu_tilde_J, double mu_tilde_J1, double mu_1);
double c_set_threshold(int J, double mu_tilde_J, double mu_1);

// #{(n1, n3) in [-window, window]^2 : 2 (n - n1)(n - n3) = mu}
i64 divisor_choice_count(int n, i64 mu, int window);

}  // namespace nfnls
