#pragma once

#include <utility>
#include <vector>

#include "nfnls/spectral.hpp"

namespace nfnls {

// Bins [first_bin, first_bin + coeffs.size()) of a spectrum; everything else is zero.
// Sharp boxes have first_bin = n*B and B coefficients; raised-cosine boxes span 2B-1 bins.
struct BandCoefficients {
  int n = 0;
  Grid grid;
  int first_bin = 0;
  std::vector<cplx> coeffs;

  int size() const { return static_cast<int>(coeffs.size()); }
  int last_bin() const { return first_bin + size(); }
  double l2_norm() const;
  bool is_zero() const;
};

BandCoefficients zero_band(const Grid& g, int n);

enum class WindowKind { sharp_indicator, raised_cosine };

// profile[i] = sigma_0(xi) at xi = (first_offset + i)/B
struct WindowFamily {
  WindowKind kind = WindowKind::sharp_indicator;
  int B = 0;
  int first_offset = 0;
  std::vector<double> profile;

  int box_min(const Grid& g) const;
  int box_max(const Grid& g) const;
};

WindowFamily make_window(WindowKind kind, int B);

BandCoefficients box_project(const Spectrum& F, int n, const WindowFamily& w);
BandCoefficients box_project(const Spectrum& F, int n);  // sharp

void add_band(Spectrum& F, const BandCoefficients& b);
Spectrum reconstruct(const BandCoefficients& b);
Spectrum reconstruct(const std::vector<BandCoefficients>& bands);

// <k> = (1 + k^2)^(1/2)
double japanese(double k);

// (sum_k <k>^{sq} ||box_k F||_2^q)^{1/q}; q = infinity gives the weighted sup.
double modulation_norm(const Spectrum& F, double s, double q, const WindowFamily& w);
double modulation_norm(const Spectrum& F, double s, double q);

// l^q of the weighted box norms, given the box norms directly (index 0 is box k0).
double lq_weighted(const std::vector<double>& box_norms, int k0, double s, double q);

double norm_equivalence_ratio(const Spectrum& F, double s, double q);

struct MultiplierCheck {
  double lhs = 0.0;  // ||box_n f||_{p2}
  double rhs = 0.0;  // ||box_n f||_{p1}
};

// Discrete L^p norms; diagnostic accuracy only for p != 2.
MultiplierCheck multiplier_bound_check(const Field& f, int n, double p1, double p2);

}  // namespace nfnls
