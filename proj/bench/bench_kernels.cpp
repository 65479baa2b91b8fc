// Serial reference kernels against their OpenMP counterparts.
// Thread count follows OMP_NUM_THREADS.

#include <benchmark/benchmark.h>

#include "grok/kernels.hpp"
#include "grok/rng.hpp"

namespace {

using Eigen::MatrixXd;
using Eigen::VectorXd;

MatrixXd random_matrix(long rows, long cols, std::uint64_t seed) {
  grok::Rng rng(seed);
  MatrixXd m(rows, cols);
  for (long i = 0; i < m.size(); ++i) m.data()[i] = rng.normal();
  return m;
}

using MatmulFn = void (*)(const MatrixXd&, const MatrixXd&, MatrixXd&);
using MatvecFn = void (*)(const MatrixXd&, const VectorXd&, VectorXd&);

template <MatmulFn F>
void BM_matmul(benchmark::State& state) {
  const long n = state.range(0);
  const MatrixXd A = random_matrix(n, n, 1), B = random_matrix(n, n, 2);
  MatrixXd C;
  for (auto _ : state) {
    F(A, B, C);
    benchmark::DoNotOptimize(C.data());
  }
  state.SetItemsProcessed(state.iterations() * n * n * n);
}

template <MatvecFn F>
void BM_matvec(benchmark::State& state) {
  const long n = state.range(0);
  const MatrixXd A = random_matrix(n, n, 3);
  const VectorXd x = random_matrix(n, 1, 4);
  VectorXd y;
  for (auto _ : state) {
    F(A, x, y);
    benchmark::DoNotOptimize(y.data());
  }
  state.SetItemsProcessed(state.iterations() * n * n);
}

// Mod-add MLP shape: 97 logits, 64 hidden units, 3764 training pairs.
template <MatmulFn F>
void BM_mlp_layer(benchmark::State& state) {
  const MatrixXd W = random_matrix(97, 64, 5), H = random_matrix(64, 3764, 6);
  MatrixXd out;
  for (auto _ : state) {
    F(W, H, out);
    benchmark::DoNotOptimize(out.data());
  }
}

}  // namespace

BENCHMARK(BM_matmul<grok::kernels::ref::matmul>)->Name("matmul/serial")->Arg(128)->Arg(512);
BENCHMARK(BM_matmul<grok::kernels::matmul>)->Name("matmul/omp")->Arg(128)->Arg(512);
BENCHMARK(BM_matmul<grok::kernels::ref::matmul_tn>)->Name("matmul_tn/serial")->Arg(128)->Arg(512);
BENCHMARK(BM_matmul<grok::kernels::matmul_tn>)->Name("matmul_tn/omp")->Arg(128)->Arg(512);
BENCHMARK(BM_matmul<grok::kernels::ref::matmul_nt>)->Name("matmul_nt/serial")->Arg(128)->Arg(512);
BENCHMARK(BM_matmul<grok::kernels::matmul_nt>)->Name("matmul_nt/omp")->Arg(128)->Arg(512);
BENCHMARK(BM_matvec<grok::kernels::ref::matvec>)->Name("matvec/serial")->Arg(1024)->Arg(4096);
BENCHMARK(BM_matvec<grok::kernels::matvec>)->Name("matvec/omp")->Arg(1024)->Arg(4096);
BENCHMARK(BM_matvec<grok::kernels::ref::matvec_t>)->Name("matvec_t/serial")->Arg(1024)->Arg(4096);
BENCHMARK(BM_matvec<grok::kernels::matvec_t>)->Name("matvec_t/omp")->Arg(1024)->Arg(4096);
BENCHMARK(BM_mlp_layer<grok::kernels::ref::matmul>)->Name("mlp_layer/serial");
BENCHMARK(BM_mlp_layer<grok::kernels::matmul>)->Name("mlp_layer/omp");

BENCHMARK_MAIN();
