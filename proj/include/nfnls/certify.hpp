#pragma once

#include <cstdint>
#include <random>

#include "nfnls/report.hpp"

namespace nfnls {

// Empirical constants measured on the certification sweeps.
struct EmpiricalConstants {
  double C_fir = 0.0;     // sup ||q1_tilde|| |n-n1||n-n3| / prod ||v||, at B = 4
  double C_fir_2B = 0.0;  // same sweep at B = 8
  double C_Q1 = 0.0;      // sup ||q1|| / prod ||v||
  double C_R = 0.0;       // sup ||R_j(v)||_{l^inf L^2} / ||v||^3 over random states

  double C() const;  // max of the above
};

// One record per acceptance criterion; every check catches its own exceptions.
CheckRecord check_tree_counts();
CheckRecord check_phase_identity(std::uint64_t seed);
CheckRecord check_unitarity(std::uint64_t seed);
CheckRecord check_fir(std::uint64_t seed, EmpiricalConstants& k);
CheckRecord check_tree_bound(std::uint64_t seed, const EmpiricalConstants& k);
CheckRecord check_decomposition(std::uint64_t seed);
CheckRecord check_n_decay(std::uint64_t seed);
CheckRecord check_remainder_decay();
// criterion 9 and 10 share one run
void check_solver(const EmpiricalConstants& k, CheckRecord& agreement, CheckRecord& contraction);
CheckRecord check_gamma_bound(std::uint64_t seed, const EmpiricalConstants& k);

double measure_C_R(std::uint64_t seed);

RunReport acceptance_suite(std::uint64_t seed);

}  // namespace nfnls
