#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "nfnls/normal_form.hpp"
#include "nfnls/report.hpp"

namespace nfnls {

// dt * max xi^2 on the grid; the split-step run counts as resolved when this is <= 0.1
double kinetic_number(const Grid& g, double dt);

// Strang splitting for i u_t - u_xx + sign |u|^2 u = 0:
//   half kinetic step (u_hat *= exp(+i dt/2 xi^2)), u *= exp(+i sign |u|^2 dt), half kinetic step.
// States are u-picture spectra; record_every = 0 keeps the two end points only.
Trajectory split_step_solve(const Field& u0, double dt, int steps, int sign, int record_every = 0);

// Zero extension onto a grid with the same B and larger n_max, and the restriction back.
Spectrum embed(const Spectrum& S, const Grid& g);
Spectrum restrict_to(const Spectrum& S, const Grid& g);

// Split-step oracle for a normal-form run with K intervals up to T: window x4, step T/(16K).
Spectrum reference_solution(const Field& u0, double T, int K, int sign);

double relative_l2(const Spectrum& a, const Spectrum& ref);

struct ComparisonRow {
  int J = 0;
  double error = 0.0;  // relative L2 against the oracle at T
  int iterations = 0;
  std::vector<double> differences;
  std::vector<double> ratios;
};

// Normal-form solve at each J against one split-step oracle run.
std::vector<ComparisonRow> compare_with_reference(const Field& u0, const SolverParams& p, const std::vector<int>& Js);

enum class ExperimentKind { verify_lemmas, converge, solve, compare, trees, norms };

std::string kind_name(ExperimentKind k);
ExperimentKind parse_kind(const std::string& s);

struct ExperimentConfig {
  int B = 16;
  int n_max = 32;
  SolverParams solver;
  bool N_auto = true;
  bool T_auto = true;
  bool C_auto = false;  // measure the constant before choosing T
  ExperimentKind kind = ExperimentKind::trees;
  std::uint64_t seed = 1;
  std::string output_path;
  int trees_J = 4;
  std::map<std::string, std::string> data;  // data.* keys without the prefix
};

// key = value lines, '#' comments, optional [section] headers that prefix the keys.
ExperimentConfig parse_config(const std::string& text);
ExperimentConfig load_config(const std::string& path);
std::map<std::string, std::string> config_echo(const ExperimentConfig& cfg);

// Initial datum from the data.* keys:
//   profile = gaussian: amplitude * exp(-(x/width)^2), centred at 0 on the torus
//             random:   random bands in boxes [-boxes, boxes), scaled to M_{2,q} norm = amplitude
//             tones:    equal plane waves at the listed integer frequencies ("0,3,-5"), same scaling
Field initial_datum(const ExperimentConfig& cfg);

// Fills N and T from choose_parameters where they are set to auto.
SolverParams resolve_params(const ExperimentConfig& cfg, double C);

RunReport run_experiment(const ExperimentConfig& cfg);

}  // namespace nfnls
