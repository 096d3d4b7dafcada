#pragma once

#include <complex>
#include <vector>

#include "nfnls/errors.hpp"

namespace nfnls {

using cplx = std::complex<double>;

inline constexpr double kPi = 3.14159265358979323846;

// Torus of circumference L = 2*pi*B sampled at M = 2*B*n_max points.
// Bin j in [-M/2, M/2) carries frequency j/B; box n holds bins [n*B, n*B + B).
struct Grid {
  int B = 0;
  int n_max = 0;
  int M = 0;
  double L = 0.0;

  double xi(int j) const { return static_cast<double>(j) / B; }
  double x(int m) const { return m * L / M; }
  int j_min() const { return -M / 2; }
  int j_max() const { return M / 2; }
  int slot(int j) const { return j + M / 2; }
  int box_min() const { return -n_max; }
  int box_max() const { return n_max - 1; }
  int box_count() const { return 2 * n_max; }
  int box_of_bin(int j) const;

  bool operator==(const Grid& o) const { return B == o.B && n_max == o.n_max; }
  bool operator!=(const Grid& o) const { return !(*this == o); }
};

// Any even M up to kMaxSamples is accepted (the transform is FFTW, mixed radix).
inline constexpr int kMaxSamples = 1 << 22;

Grid make_grid(int B, int n_max);

struct Field {
  Grid grid;
  std::vector<cplx> samples;

  double l2_norm() const;
};

struct Spectrum {
  Grid grid;
  std::vector<cplx> coeffs;  // stored at grid.slot(j)

  cplx& at(int j) { return coeffs[grid.slot(j)]; }
  const cplx& at(int j) const { return coeffs[grid.slot(j)]; }
  double l2_norm() const;
};

Field zero_field(const Grid& g);
Spectrum zero_spectrum(const Grid& g);

// coeff_j = (L/M)/sqrt(2 pi) * sum_m f_m exp(-i xi_j x_m)
Spectrum forward(const Field& f);
Field inverse(const Spectrum& F);

// plus:  e^{+it d_x^2}, symbol exp(-i t xi^2)   (u -> v)
// minus: e^{-it d_x^2}, symbol exp(+i t xi^2)   (v -> u, free NLS flow)
enum class Semigroup { plus, minus };

Spectrum free_propagate(const Spectrum& F, double t, Semigroup dir = Semigroup::plus);
void free_propagate_inplace(Spectrum& F, double t, Semigroup dir = Semigroup::plus);

// Discrete L^p norm of samples with weight L/M; p = infinity gives the max.
double lp_norm(const Field& f, double p);

// Raw unnormalized DFT on a length-M buffer, sign -1 forward, +1 backward.
void raw_dft(std::vector<cplx>& data, int sign);

}  // namespace nfnls
