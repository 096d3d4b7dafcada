#pragma once

#include <string>
#include <vector>

#include "nfnls/multilinear.hpp"

namespace nfnls {

// Sequence {v_n} over boxes [-n_max, n_max), stored as one spectrum of sharp boxes.
struct BoxedState {
  Spectrum v;
  double t = 0.0;

  const Grid& grid() const { return v.grid; }
  BandCoefficients band(int n) const { return box_project(v, n); }
};

BoxedState make_state(const Spectrum& v, double t);
BoxedState zero_state(const Grid& g, double t);
void set_band(Spectrum& S, const BandCoefficients& b);

// ||v||_{l^q L^2} with weight <n>^s; q may be infinity.
double lq_l2_norm(const Spectrum& S, double s, double q);

struct Trajectory {
  std::vector<double> times;
  std::vector<BoxedState> states;
};

struct SolverParams {
  int J = 2;
  double N = 1.0;
  double T = 0.0;
  double q = 2.0;
  double s = 0.0;
  double R = 1.0;
  double R_tilde = 4.0;
  int K = 16;  // quadrature intervals, K+1 nodes
  double picard_tol = 1e-14;
  int picard_max_iter = 50;
  int sigma = 1;  // +1: i u_t - u_xx + |u|^2 u = 0 (default), -1: minus sign
  PhaseRule rule = PhaseRule::tuple;
  double prune_tol = 1e-20;  // boxes with norm <= prune_tol * max box norm are left out of index sums
  double C = 1.0;            // empirical constant used for T
  double eps = 0.2;
  int J_max = 3;
  bool argg5_satisfied = false;
};

void validate(const SolverParams& p);

// N >= (2 R~^2)^{100 q' / (99 (q' - 1))}, rounded up; q = 1 uses the limit exponent 100/99.
double threshold_N(double R_tilde, double q);
double time_bracket(double N, double R_tilde, double q, double eps);
SolverParams choose_parameters(double R, double q, double C = 1.0, double eps = 0.2);

struct GenerationOptions {
  double N = 1.0;
  PhaseRule rule = PhaseRule::tuple;
  int sigma = 1;
  double prune_tol = 0.0;
  int J_max = 3;
};

GenerationOptions generation_options(const SolverParams& p);

// box_n S(t)[|S(-t)v|^2 S(-t)v]
BandCoefficients full_nonlinearity(const BoxedState& v, int n);
BandCoefficients resonant_r1(const BoxedState& v, int n);
BandCoefficients resonant_r2(const BoxedState& v, int n);
// Triple-by-triple reference sums of q1.
BandCoefficients resonant_r1_reference(const BoxedState& v, int n);
BandCoefficients resonant_r2_reference(const BoxedState& v, int n);
BandCoefficients nonres_full(const BoxedState& v, int n);
BandCoefficients nonres_n12(const BoxedState& v, int n, const GenerationOptions& o);
BandCoefficients nonres_n11(const BoxedState& v, int n, const GenerationOptions& o);

struct ResonantParts {
  std::vector<BandCoefficients> full, r1, r2;  // index n + n_max
};
ResonantParts resonant_parts(const BoxedState& v);

enum TermMask : unsigned { kN0 = 1, kNr = 2, kN1 = 4, kN2 = 8, kFull = 16, kAllTerms = 31 };

// Generation-J terms with all constants in place (c = i*sigma):
//   n0   boundary term after the J-th differentiation by parts
//   nr   resonant insert, n1 insert restricted to C_J, n2 insert on C_J^c, full = unrestricted insert.
struct GenerationTerms {
  Spectrum n0, nr, n1, n2, full;
  long long assignments = 0;
};

GenerationTerms generation_terms(const BoxedState& v, int J, const GenerationOptions& o, unsigned mask);
BoxedState generation_n0(const BoxedState& v, int J, const GenerationOptions& o);
BoxedState generation_nr(const BoxedState& v, int J, const GenerationOptions& o);
BoxedState generation_n1(const BoxedState& v, int J, const GenerationOptions& o);
BoxedState remainder_n2(const BoxedState& v, int J, const GenerationOptions& o);

// c [(R2 - R1) + N11] over all boxes
Spectrum base_integrand(const BoxedState& v, const GenerationOptions& o);

Trajectory gamma_partial(const BoxedState& v0, const Trajectory& v, const SolverParams& p);

struct SolveResult {
  Trajectory u;  // u-picture
  Trajectory v;
  std::vector<double> differences;
  std::vector<double> ratios;
  int iterations = 0;
};

std::vector<double> quadrature_nodes(double T, int K);
SolveResult solve(const Field& u0, const SolverParams& p);

struct DivergenceError : NumericalError {
  std::vector<double> ratios;
  DivergenceError(const std::string& what, std::vector<double> r) : NumericalError(what), ratios(std::move(r)) {}
};

}  // namespace nfnls
