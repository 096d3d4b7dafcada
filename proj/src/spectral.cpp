#include "nfnls/spectral.hpp"

#include <fftw3.h>

#include <cmath>
#include <map>
#include <mutex>
#include <string>

namespace nfnls {

namespace {

std::mutex g_plan_mutex;
std::map<std::pair<int, int>, fftw_plan> g_plans;

fftw_plan plan_for(int M, int sign) {
  std::lock_guard<std::mutex> lock(g_plan_mutex);
  auto key = std::make_pair(M, sign);
  auto it = g_plans.find(key);
  if (it != g_plans.end()) return it->second;
  fftw_complex* a = fftw_alloc_complex(M);
  fftw_complex* b = fftw_alloc_complex(M);
  fftw_plan p = fftw_plan_dft_1d(M, a, b, sign < 0 ? FFTW_FORWARD : FFTW_BACKWARD,
                                 FFTW_ESTIMATE | FFTW_UNALIGNED);
  fftw_free(a);
  fftw_free(b);
  if (!p) throw ResourceError("fftw plan creation failed for M=" + std::to_string(M));
  g_plans.emplace(key, p);
  return p;
}

int floor_div(int a, int b) {
  int q = a / b;
  if ((a % b != 0) && ((a < 0) != (b < 0))) --q;
  return q;
}

}  // namespace

int Grid::box_of_bin(int j) const { return floor_div(j, B); }

Grid make_grid(int B, int n_max) {
  if (B < 1 || n_max < 1) throw ConfigError("make_grid: B and n_max must be positive");
  long long M = 2LL * B * n_max;
  if (M > kMaxSamples)
    throw ConfigError("make_grid: sample count " + std::to_string(M) + " exceeds supported maximum");
  Grid g;
  g.B = B;
  g.n_max = n_max;
  g.M = static_cast<int>(M);
  g.L = 2.0 * kPi * B;
  return g;
}

double Field::l2_norm() const {
  double s = 0.0;
  for (const auto& z : samples) s += std::norm(z);
  return std::sqrt(s * grid.L / grid.M);
}

double Spectrum::l2_norm() const {
  double s = 0.0;
  for (const auto& z : coeffs) s += std::norm(z);
  return std::sqrt(s / grid.B);
}

Field zero_field(const Grid& g) { return Field{g, std::vector<cplx>(g.M)}; }
Spectrum zero_spectrum(const Grid& g) { return Spectrum{g, std::vector<cplx>(g.M)}; }

void raw_dft(std::vector<cplx>& data, int sign) {
  const int M = static_cast<int>(data.size());
  if (M == 0) return;
  fftw_plan p = plan_for(M, sign);
  std::vector<cplx> out(M);
  fftw_execute_dft(p, reinterpret_cast<fftw_complex*>(data.data()),
                   reinterpret_cast<fftw_complex*>(out.data()));
  data.swap(out);
}

Spectrum forward(const Field& f) {
  const Grid& g = f.grid;
  if (static_cast<int>(f.samples.size()) != g.M) throw ContractError("forward: sample count mismatch");
  std::vector<cplx> buf = f.samples;
  raw_dft(buf, -1);
  const double scale = (g.L / g.M) / std::sqrt(2.0 * kPi);
  Spectrum F = zero_spectrum(g);
  const int half = g.M / 2;
  for (int k = 0; k < g.M; ++k) {
    int j = k < half ? k : k - g.M;
    F.at(j) = buf[k] * scale;
  }
  return F;
}

Field inverse(const Spectrum& F) {
  const Grid& g = F.grid;
  if (static_cast<int>(F.coeffs.size()) != g.M) throw ContractError("inverse: coefficient count mismatch");
  std::vector<cplx> buf(g.M);
  const int half = g.M / 2;
  for (int j = -half; j < half; ++j) buf[j < 0 ? j + g.M : j] = F.at(j);
  raw_dft(buf, +1);
  const double scale = std::sqrt(2.0 * kPi) / g.L;
  for (auto& z : buf) z *= scale;
  return Field{g, std::move(buf)};
}

void free_propagate_inplace(Spectrum& F, double t, Semigroup dir) {
  if (t == 0.0) return;
  const double s = dir == Semigroup::plus ? -t : t;
  const Grid& g = F.grid;
  for (int j = g.j_min(); j < g.j_max(); ++j) {
    double xi = g.xi(j);
    F.at(j) *= std::polar(1.0, s * xi * xi);
  }
}

Spectrum free_propagate(const Spectrum& F, double t, Semigroup dir) {
  Spectrum out = F;
  free_propagate_inplace(out, t, dir);
  return out;
}

double lp_norm(const Field& f, double p) {
  if (std::isinf(p)) {
    double m = 0.0;
    for (const auto& z : f.samples) m = std::max(m, std::abs(z));
    return m;
  }
  if (p < 1.0) throw DomainError("lp_norm: p must be >= 1");
  double s = 0.0;
  for (const auto& z : f.samples) s += std::pow(std::abs(z), p);
  return std::pow(s * f.grid.L / f.grid.M, 1.0 / p);
}

}  // namespace nfnls
