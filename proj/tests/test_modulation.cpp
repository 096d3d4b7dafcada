#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "nfnls/modulation.hpp"

using namespace nfnls;

namespace {

std::normal_distribution<double> nd;

Spectrum random_spectrum(const Grid& g, int lo_box, int hi_box, std::mt19937_64& rng) {
  Spectrum S = zero_spectrum(g);
  for (int j = lo_box * g.B; j < hi_box * g.B; ++j) S.at(j) = {nd(rng), nd(rng)};
  return S;
}

Spectrum unit_band(const Grid& g, int n, std::mt19937_64& rng) {
  Spectrum S = random_spectrum(g, n, n + 1, rng);
  double s = S.l2_norm();
  for (auto& z : S.coeffs) z /= s;
  return S;
}

}  // namespace

TEST_CASE("sharp projection") {
  std::mt19937_64 rng(21);
  Grid g = make_grid(4, 8);
  Spectrum F = random_spectrum(g, 0, 1, rng);
  auto b0 = box_project(F, 0);
  CHECK(b0.first_bin == 0);
  CHECK(b0.size() == 4);
  for (int i = 0; i < 4; ++i) CHECK(b0.coeffs[i] == F.at(i));
  CHECK(box_project(F, 5).is_zero());
  CHECK_THROWS_AS(box_project(F, 8), RangeError);
  CHECK_THROWS_AS(box_project(F, -9), RangeError);
}

TEST_CASE("sharp boxes reassemble the spectrum") {
  std::mt19937_64 rng(22);
  Grid g = make_grid(3, 5);
  Spectrum F = random_spectrum(g, -5, 5, rng);
  std::vector<BandCoefficients> bands;
  for (int n = -5; n < 5; ++n) bands.push_back(box_project(F, n));
  Spectrum R = reconstruct(bands);
  for (size_t i = 0; i < F.coeffs.size(); ++i) CHECK(R.coeffs[i] == F.coeffs[i]);
}

TEST_CASE("raised cosine partition of unity") {
  std::mt19937_64 rng(23);
  for (int B : {1, 2, 5, 8}) {
    Grid g = make_grid(B, 6);
    Spectrum F = random_spectrum(g, -6, 6, rng);
    WindowFamily w = make_window(WindowKind::raised_cosine, B);
    std::vector<BandCoefficients> bands;
    for (int n = w.box_min(g); n <= w.box_max(g); ++n) bands.push_back(box_project(F, n, w));
    Spectrum R = reconstruct(bands);
    double err = 0.0;
    for (size_t i = 0; i < F.coeffs.size(); ++i) err = std::max(err, std::abs(R.coeffs[i] - F.coeffs[i]));
    CHECK(err < 1e-10);
  }
}

TEST_CASE("window mismatch is a contract error") {
  Grid g = make_grid(4, 4);
  CHECK_THROWS_AS(box_project(zero_spectrum(g), 0, make_window(WindowKind::sharp_indicator, 2)), ContractError);
}

TEST_CASE("single band at zero has norm one") {
  std::mt19937_64 rng(24);
  Grid g = make_grid(4, 6);
  Spectrum F = unit_band(g, 0, rng);
  for (double s : {0.0, 1.0, 2.5})
    for (double q : {1.0, 1.5, 2.0, double(INFINITY)}) CHECK(modulation_norm(F, s, q) == doctest::Approx(1.0).epsilon(1e-13));
}

TEST_CASE("s = 0, q = 2 is the L2 norm") {
  std::mt19937_64 rng(25);
  Grid g = make_grid(4, 6);
  Spectrum F = random_spectrum(g, -6, 6, rng);
  CHECK(modulation_norm(F, 0.0, 2.0) == doctest::Approx(F.l2_norm()).epsilon(1e-13));
}

TEST_CASE("gaussian M_{2,1} norm against the analytic transform") {
  Grid g = make_grid(16, 12);
  Field f = zero_field(g);
  for (int m = 0; m < g.M; ++m) {
    double x = g.x(m);
    if (x > g.L / 2) x -= g.L;
    f.samples[m] = std::exp(-x * x);
  }
  const double measured = modulation_norm(forward(f), 0.0, 1.0);
  // hat g(xi) = exp(-xi^2/4)/sqrt(2), summed box by box with the same bin weights
  double oracle = 0.0;
  for (int k = -g.n_max; k < g.n_max; ++k) {
    double acc = 0.0;
    for (int i = 0; i < g.B; ++i) {
      double xi = g.xi(k * g.B + i);
      acc += 0.5 * std::exp(-xi * xi / 2.0) / g.B;
    }
    oracle += std::sqrt(acc);
  }
  CHECK(measured == doctest::Approx(oracle).epsilon(1e-6));
  // dense quadrature of the continuous box integrals, to Riemann accuracy
  double dense = 0.0;
  for (int k = -g.n_max; k < g.n_max; ++k) {
    const int P = 4000;
    double acc = 0.0;
    for (int i = 0; i < P; ++i) {
      double xi = k + (i + 0.5) / P;
      acc += 0.5 * std::exp(-xi * xi / 2.0) / P;
    }
    dense += std::sqrt(acc);
  }
  CHECK(measured == doctest::Approx(dense).epsilon(0.05));
}

TEST_CASE("embedding monotonicity") {
  std::mt19937_64 rng(26);
  Grid g = make_grid(2, 8);
  for (int trial = 0; trial < 20; ++trial) {
    Spectrum F = random_spectrum(g, -8, 8, rng);
    double prev = INFINITY;
    for (double q : {1.0, 1.25, 1.5, 2.0, 4.0, double(INFINITY)}) {
      double v = modulation_norm(F, 0.5, q);
      CHECK(v <= prev * (1 + 1e-12));
      prev = v;
    }
    CHECK(modulation_norm(F, 0.0, 2.0) <= modulation_norm(F, 1.0, 2.0));
  }
}

TEST_CASE("lq_weighted by hand") {
  // boxes -1, 0, 1 with norms 1, 2, 3 and s = 1
  std::vector<double> v{1.0, 2.0, 3.0};
  const double r2 = std::sqrt(2.0);
  CHECK(lq_weighted(v, -1, 1.0, 1.0) == doctest::Approx(r2 + 2 + 3 * r2));
  CHECK(lq_weighted(v, -1, 1.0, INFINITY) == doctest::Approx(3 * r2));
  CHECK(lq_weighted(v, -1, 0.0, 2.0) == doctest::Approx(std::sqrt(14.0)));
  CHECK_THROWS_AS(lq_weighted(v, 0, 0.0, 0.5), DomainError);
}

TEST_CASE("norm equivalence ratio") {
  std::mt19937_64 rng(27);
  Grid g = make_grid(4, 8);
  Spectrum one = unit_band(g, 2, rng);
  double r = norm_equivalence_ratio(one, 0.0, 2.0);
  CHECK(r >= 0.5);
  CHECK(r <= 2.0);
  Spectrum two = one;
  for (auto& z : two.coeffs) z *= 2.0;
  CHECK(norm_equivalence_ratio(two, 0.0, 2.0) == doctest::Approx(r).epsilon(1e-13));
  CHECK_THROWS_AS(norm_equivalence_ratio(zero_spectrum(g), 0.0, 2.0), DomainError);

  auto spread = [&](int B) {
    Grid h = make_grid(B, 8);
    double lo = INFINITY, hi = 0.0;
    for (int i = 0; i < 50; ++i) {
      double x = norm_equivalence_ratio(random_spectrum(h, -6, 6, rng), 0.5, 1.5);
      lo = std::min(lo, x);
      hi = std::max(hi, x);
    }
    return hi / lo;
  };
  double c4 = spread(4), c8 = spread(8);
  CHECK(c4 <= 4.0);
  CHECK(c8 <= 4.0);
  CHECK(c8 / c4 <= 2.0);
  CHECK(c4 / c8 <= 2.0);
}

TEST_CASE("box multiplier bound") {
  Grid g = make_grid(2, 32);
  double worst = 0.0;
  for (int n = -30; n <= 30; ++n) {
    Field f = zero_field(g);
    const int j = n * g.B + 1;
    for (int m = 0; m < g.M; ++m) f.samples[m] = std::polar(1.0, g.xi(j) * g.x(m));
    MultiplierCheck c = multiplier_bound_check(f, n, 2.0, INFINITY);
    worst = std::max(worst, c.lhs / c.rhs);
    MultiplierCheck same = multiplier_bound_check(f, n, 2.0, 2.0);
    CHECK(same.lhs == same.rhs);
  }
  CHECK(worst <= 2.0);

  // one random band shape carried to box n by a bin shift: |f| does not change
  std::mt19937_64 rng(28);
  std::vector<cplx> shape(g.B);
  for (auto& z : shape) z = {nd(rng), nd(rng)};
  double lo = INFINITY, hi = 0.0;
  for (int n = -30; n <= 30; ++n) {
    Spectrum S = zero_spectrum(g);
    for (int i = 0; i < g.B; ++i) S.at(n * g.B + i) = shape[i];
    MultiplierCheck c = multiplier_bound_check(inverse(S), n, 2.0, 4.0);
    lo = std::min(lo, c.lhs / c.rhs);
    hi = std::max(hi, c.lhs / c.rhs);
  }
  CHECK(hi / lo <= 1.05);
  CHECK_THROWS_AS(multiplier_bound_check(zero_field(g), 0, 4.0, 2.0), DomainError);
}
