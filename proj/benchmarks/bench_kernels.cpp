#include <benchmark/benchmark.h>

#include <random>

#include "rfls/numkernel.hpp"

namespace {

using rfls::Matrix;

Matrix random_hurwitz(int n, unsigned seed) {
  std::mt19937_64 gen(seed);
  std::normal_distribution<double> nd;
  Matrix a = Matrix::NullaryExpr(n, n, [&] { return nd(gen); });
  const double shift = rfls::numkernel::spectral_abscissa(a);
  return a - (shift + 1.0) * Matrix::Identity(n, n);
}

void BM_Care(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  std::mt19937_64 gen(7);
  std::normal_distribution<double> nd;
  rfls::numkernel::RiccatiProblem prob;
  prob.A = random_hurwitz(n, 11);
  const Matrix b = Matrix::NullaryExpr(n, 1, [&] { return nd(gen); });
  const Matrix c = Matrix::NullaryExpr(1, n, [&] { return nd(gen); });
  prob.S = -b * b.transpose();
  prob.Q = c.transpose() * c;
  for (auto _ : state) benchmark::DoNotOptimize(rfls::numkernel::solve_care(prob));
}
BENCHMARK(BM_Care)->Arg(3)->Arg(6)->Arg(12);

void BM_Lyapunov(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const Matrix a = random_hurwitz(n, 3);
  const Matrix w = Matrix::Identity(n, n);
  for (auto _ : state) benchmark::DoNotOptimize(rfls::numkernel::solve_lyapunov(a, w));
}
BENCHMARK(BM_Lyapunov)->Arg(6)->Arg(12)->Arg(24);

void BM_Expm(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const Matrix a = random_hurwitz(n, 5);
  for (auto _ : state) benchmark::DoNotOptimize(rfls::numkernel::expm(a, 0.5));
}
BENCHMARK(BM_Expm)->Arg(6)->Arg(12);

}  // namespace
