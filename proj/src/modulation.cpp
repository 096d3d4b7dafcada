#include "nfnls/modulation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace nfnls {

double BandCoefficients::l2_norm() const {
  double s = 0.0;
  for (const auto& z : coeffs) s += std::norm(z);
  return std::sqrt(s / grid.B);
}

bool BandCoefficients::is_zero() const {
  for (const auto& z : coeffs)
    if (z != cplx(0.0)) return false;
  return true;
}

BandCoefficients zero_band(const Grid& g, int n) {
  return BandCoefficients{n, g, n * g.B, std::vector<cplx>(g.B)};
}

int WindowFamily::box_min(const Grid& g) const { return -g.n_max; }

int WindowFamily::box_max(const Grid& g) const {
  return kind == WindowKind::sharp_indicator ? g.n_max - 1 : g.n_max;
}

WindowFamily make_window(WindowKind kind, int B) {
  if (B < 1) throw ConfigError("make_window: B must be positive");
  WindowFamily w;
  w.kind = kind;
  w.B = B;
  if (kind == WindowKind::sharp_indicator) {
    w.first_offset = 0;
    w.profile.assign(B, 1.0);
  } else {
    w.first_offset = -(B - 1);
    for (int i = -(B - 1); i <= B - 1; ++i) {
      double c = std::cos(0.5 * kPi * static_cast<double>(i) / B);
      w.profile.push_back(c * c);
    }
  }
  return w;
}

BandCoefficients box_project(const Spectrum& F, int n, const WindowFamily& w) {
  const Grid& g = F.grid;
  if (w.B != g.B) throw ContractError("box_project: window built for a different B");
  if (n < w.box_min(g) || n > w.box_max(g))
    throw RangeError("box_project: box " + std::to_string(n) + " outside window");
  BandCoefficients b;
  b.n = n;
  b.grid = g;
  b.first_bin = n * g.B + w.first_offset;
  b.coeffs.resize(w.profile.size());
  for (int i = 0; i < static_cast<int>(w.profile.size()); ++i) {
    int j = b.first_bin + i;
    if (j >= g.j_min() && j < g.j_max()) b.coeffs[i] = F.at(j) * w.profile[i];
  }
  return b;
}

BandCoefficients box_project(const Spectrum& F, int n) {
  const Grid& g = F.grid;
  if (n < -g.n_max || n >= g.n_max)
    throw RangeError("box_project: box " + std::to_string(n) + " outside window");
  BandCoefficients b{n, g, n * g.B, std::vector<cplx>(g.B)};
  std::copy_n(F.coeffs.begin() + g.slot(n * g.B), g.B, b.coeffs.begin());
  return b;
}

void add_band(Spectrum& F, const BandCoefficients& b) {
  if (F.grid != b.grid) throw ContractError("add_band: grid mismatch");
  const Grid& g = F.grid;
  for (int i = 0; i < b.size(); ++i) {
    int j = b.first_bin + i;
    if (j >= g.j_min() && j < g.j_max()) F.at(j) += b.coeffs[i];
  }
}

Spectrum reconstruct(const BandCoefficients& b) {
  Spectrum F = zero_spectrum(b.grid);
  add_band(F, b);
  return F;
}

Spectrum reconstruct(const std::vector<BandCoefficients>& bands) {
  if (bands.empty()) throw ContractError("reconstruct: no bands");
  Spectrum F = zero_spectrum(bands.front().grid);
  for (const auto& b : bands) add_band(F, b);
  return F;
}

double japanese(double k) { return std::sqrt(1.0 + k * k); }

double lq_weighted(const std::vector<double>& box_norms, int k0, double s, double q) {
  if (!(q >= 1.0)) throw DomainError("modulation norm: q must be >= 1");
  if (std::isinf(q)) {
    double m = 0.0;
    for (int i = 0; i < static_cast<int>(box_norms.size()); ++i)
      m = std::max(m, std::pow(japanese(k0 + i), s) * box_norms[i]);
    return m;
  }
  double acc = 0.0;
  for (int i = 0; i < static_cast<int>(box_norms.size()); ++i) {
    if (box_norms[i] == 0.0) continue;
    acc += std::pow(std::pow(japanese(k0 + i), s) * box_norms[i], q);
  }
  return std::pow(acc, 1.0 / q);
}

double modulation_norm(const Spectrum& F, double s, double q, const WindowFamily& w) {
  if (!(q >= 1.0)) throw DomainError("modulation_norm: q must be >= 1");
  const Grid& g = F.grid;
  const int k0 = w.box_min(g), k1 = w.box_max(g);
  std::vector<double> norms(k1 - k0 + 1);
  for (int k = k0; k <= k1; ++k) norms[k - k0] = box_project(F, k, w).l2_norm();
  return lq_weighted(norms, k0, s, q);
}

double modulation_norm(const Spectrum& F, double s, double q) {
  return modulation_norm(F, s, q, make_window(WindowKind::sharp_indicator, F.grid.B));
}

double norm_equivalence_ratio(const Spectrum& F, double s, double q) {
  double sharp = modulation_norm(F, s, q, make_window(WindowKind::sharp_indicator, F.grid.B));
  if (sharp == 0.0) throw DomainError("norm_equivalence_ratio: zero input");
  double smooth = modulation_norm(F, s, q, make_window(WindowKind::raised_cosine, F.grid.B));
  return smooth / sharp;
}

MultiplierCheck multiplier_bound_check(const Field& f, int n, double p1, double p2) {
  if (p1 > p2) throw DomainError("multiplier_bound_check: need p1 <= p2");
  Spectrum F = forward(f);
  Field boxed = inverse(reconstruct(box_project(F, n)));
  return MultiplierCheck{lp_norm(boxed, p2), lp_norm(boxed, p1)};
}

}  // namespace nfnls
