#pragma once

#include <random>
#include <vector>

#include "nfnls/modulation.hpp"
#include "nfnls/trees.hpp"

namespace nfnls {

// All bands are v-picture data; the u-picture is u_hat = exp(+i t xi^2) v_hat.

// box_n S(t)[S(-t)v1 * conj(S(-t)v2) * S(-t)v3], physical products on a padded grid.
BandCoefficients q1(int n, const BandCoefficients& b1, const BandCoefficients& b2, const BandCoefficients& b3,
                    double t);
// Same operator as a direct band convolution.
BandCoefficients q1_band(int n, const BandCoefficients& b1, const BandCoefficients& b2,
                         const BandCoefficients& b3, double t);
// Adds the convolution into out (out.n fixed) scaled by coef.
void q1_band_accumulate(BandCoefficients& out, const BandCoefficients& b1, const BandCoefficients& b2,
                        const BandCoefficients& b3, double t, cplx coef);

// e^{-it xi^2} (2pi)^{-1} B^{-2} sum u1(xi1) conj(u2(xi1+xi3-xi)) u3(xi3) / ((xi-xi1)(xi-xi3))
BandCoefficients q1_tilde(int n, const BandCoefficients& b1, const BandCoefficients& b2,
                          const BandCoefficients& b3, double t);

struct BandTuple {
  std::vector<BandCoefficients> bands;  // terminal nodes in depth-first order
  std::vector<bool> conjugate;          // fsgn == -1
};

BandTuple make_band_tuple(const OrderedTree& t, std::vector<BandCoefficients> bands);

// Per-generation factor 1/(scale * mu_tilde_k) on continuous bin frequencies.
// half_phase: scale 1/2 (mu_hat / 2^J);  time_derivative: scale -i (full phase).
enum class KernelWeight { half_phase, time_derivative };

struct KernelInput {
  const OrderedTree* tree = nullptr;
  const SignTable* signs = nullptr;
  const std::vector<int>* freq = nullptr;                 // box of every node
  std::vector<const BandCoefficients*> leaf_by_node;      // indexed by node id, null for internal nodes
  double t = 0.0;
  KernelWeight weight = KernelWeight::half_phase;
};

// Output band at box freq[0], accumulated into out with factor coef.
void tree_kernel_serial(const KernelInput& in, BandCoefficients& out, cplx coef = 1.0);
void tree_kernel(const KernelInput& in, BandCoefficients& out, cplx coef = 1.0);

inline constexpr int kKernelJMax = 3;

BandCoefficients q_tree(const OrderedTree& t, const IndexAssignment& assign, const BandTuple& leaves, double time);

struct SymbolEvaluation {
  cplx value;
  std::vector<double> denominators;
};
// rho for one tuple of terminal bins (depth-first order); value 0 when a window kills it.
SymbolEvaluation evaluate_symbol(const OrderedTree& t, const std::vector<int>& freq, const Grid& g,
                                 const std::vector<int>& leaf_bins);

// Random unit-norm band in box n.
BandCoefficients random_band(const Grid& g, int n, std::mt19937_64& rng);

// max over trials of ||q_tree|| * |mu_hat / 2^J| / prod ||v||
double certify_tree_bound(const OrderedTree& t, const IndexAssignment& assign, int trials, int B,
                          std::mt19937_64& rng);

}  // namespace nfnls
