// Serial reference kernels against their OpenMP versions.
#include <benchmark/benchmark.h>

#include <random>

#include "nfnls/normal_form.hpp"

using namespace nfnls;

namespace {

struct TreeCase {
  Grid g = make_grid(32, 24);
  OrderedTree t = tree_from_chronicle({0, 1});
  std::vector<int> f{1, 10, 3, -6, 14, 24, 20};
  SignTable s = compute_signs(t);
  std::vector<BandCoefficients> store;
  KernelInput in;

  TreeCase() {
    std::mt19937_64 rng(1);
    auto term = t.terminals();
    store.reserve(term.size());
    in.tree = &t;
    in.signs = &s;
    in.freq = &f;
    in.leaf_by_node.assign(t.size(), nullptr);
    for (int b : term) {
      store.push_back(random_band(g, f[b], rng));
      in.leaf_by_node[b] = &store.back();
    }
    in.t = 0.1;
  }
};

void BM_tree_kernel_serial(benchmark::State& st) {
  TreeCase c;
  for (auto _ : st) {
    BandCoefficients out = zero_band(c.g, c.f[0]);
    tree_kernel_serial(c.in, out);
    benchmark::DoNotOptimize(out.coeffs.data());
  }
}

void BM_tree_kernel_parallel(benchmark::State& st) {
  TreeCase c;
  for (auto _ : st) {
    BandCoefficients out = zero_band(c.g, c.f[0]);
    tree_kernel(c.in, out);
    benchmark::DoNotOptimize(out.coeffs.data());
  }
}

void BM_q1_padded(benchmark::State& st) {
  const int B = static_cast<int>(st.range(0));
  Grid g = make_grid(B, 16);
  std::mt19937_64 rng(2);
  auto b1 = random_band(g, 3, rng), b2 = random_band(g, -4, rng), b3 = random_band(g, 5, rng);
  for (auto _ : st) benchmark::DoNotOptimize(q1(12, b1, b2, b3, 0.2).coeffs.data());
}

void BM_q1_band(benchmark::State& st) {
  const int B = static_cast<int>(st.range(0));
  Grid g = make_grid(B, 16);
  std::mt19937_64 rng(2);
  auto b1 = random_band(g, 3, rng), b2 = random_band(g, -4, rng), b3 = random_band(g, 5, rng);
  for (auto _ : st) benchmark::DoNotOptimize(q1_band(12, b1, b2, b3, 0.2).coeffs.data());
}

void BM_resonant_reference(benchmark::State& st) {
  Grid g = make_grid(4, 12);
  std::mt19937_64 rng(3);
  Spectrum v = zero_spectrum(g);
  std::normal_distribution<double> nd;
  for (auto& z : v.coeffs) z = {nd(rng), nd(rng)};
  BoxedState s = make_state(v, 0.1);
  for (auto _ : st)
    for (int n = g.box_min(); n <= g.box_max(); ++n) benchmark::DoNotOptimize(resonant_r2_reference(s, n).coeffs.data());
}

void BM_resonant_parts(benchmark::State& st) {
  Grid g = make_grid(4, 12);
  std::mt19937_64 rng(3);
  Spectrum v = zero_spectrum(g);
  std::normal_distribution<double> nd;
  for (auto& z : v.coeffs) z = {nd(rng), nd(rng)};
  BoxedState s = make_state(v, 0.1);
  for (auto _ : st) benchmark::DoNotOptimize(resonant_parts(s).r2.data());
}

}  // namespace

BENCHMARK(BM_tree_kernel_serial)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_tree_kernel_parallel)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_q1_padded)->Arg(4)->Arg(16)->Arg(64);
BENCHMARK(BM_q1_band)->Arg(4)->Arg(16)->Arg(64);
BENCHMARK(BM_resonant_reference)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_resonant_parts)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
