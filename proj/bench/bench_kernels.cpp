// Serial reference loops against the OpenMP kernels.
// Run with SPIKEGRAD_WORKERS or OMP_NUM_THREADS to pick the thread count.

#include <benchmark/benchmark.h>

#include "spikegrad/kernels.hpp"
#include "spikegrad/parallel.hpp"
#include "spikegrad/rng.hpp"
#include "spikegrad/synapse.hpp"

using namespace spikegrad;

namespace {

SpikeTensor spikes(Rng& rng, Shape shape, std::size_t steps, double p) {
  SpikeTensor s(std::move(shape), steps);
  for (double& v : s.data()) v = rng.uniform() < p ? 1.0 : 0.0;
  return s;
}

Tensor weights(Rng& rng, Shape shape) {
  Tensor w(std::move(shape));
  for (double& v : w.data()) v = rng.uniform(-1.0, 1.0);
  return w;
}

template <auto Fn>
void bench_convolve(benchmark::State& state) {
  Rng rng(1);
  const auto units = static_cast<std::size_t>(state.range(0));
  const auto x = spikes(rng, {units}, 300, 0.1);
  const auto k = build_response_kernel(5.0, TimeGrid(1.0, 300));
  for (auto _ : state) benchmark::DoNotOptimize(Fn(k, x));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(units * 300));
}

template <auto Fn>
void bench_dense(benchmark::State& state) {
  Rng rng(2);
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto x = spikes(rng, {n}, 300, 0.1);
  const auto w = weights(rng, {n, n});
  for (auto _ : state) benchmark::DoNotOptimize(Fn(w, x));
}

template <auto Fn>
void bench_dense_grad(benchmark::State& state) {
  Rng rng(3);
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto x = spikes(rng, {n}, 300, 0.1);
  SpikeTensor e({n}, 300);
  for (double& v : e.data()) v = rng.uniform(-1.0, 1.0);
  for (auto _ : state) benchmark::DoNotOptimize(Fn(e, x));
}

template <auto Fn>
void bench_conv(benchmark::State& state) {
  Rng rng(4);
  const Shape3 in{2, 34, 34};
  const auto x = spikes(rng, {2, 34, 34}, 50, 0.05);
  const auto w = weights(rng, {16, 2, 5, 5});
  for (auto _ : state) benchmark::DoNotOptimize(Fn(w, x, in));
}

template <auto Fn>
void bench_conv_transpose(benchmark::State& state) {
  Rng rng(5);
  const Shape3 in{2, 34, 34};
  SpikeTensor e({16, 34, 34}, 50);
  for (double& v : e.data()) v = rng.uniform(-1.0, 1.0);
  const auto w = weights(rng, {16, 2, 5, 5});
  for (auto _ : state) benchmark::DoNotOptimize(Fn(w, e, in));
}

SpikeTensor conv_ref(const KernelVector& k, const SpikeTensor& x) { return reference::temporal_convolve(k, x); }
SpikeTensor conv_par(const KernelVector& k, const SpikeTensor& x) { return temporal_convolve(k, x); }
SpikeTensor corr_ref(const KernelVector& k, const SpikeTensor& g) { return reference::temporal_correlate(k, g); }
SpikeTensor corr_par(const KernelVector& k, const SpikeTensor& g) { return temporal_correlate(k, g); }
SpikeTensor dense_ref(const Tensor& w, const SpikeTensor& x) { return reference::dense_forward(w, x); }
SpikeTensor dense_par(const Tensor& w, const SpikeTensor& x) { return dense_forward(w, x); }
Tensor dgrad_ref(const SpikeTensor& e, const SpikeTensor& x) { return reference::dense_weight_grad(e, x); }
Tensor dgrad_par(const SpikeTensor& e, const SpikeTensor& x) { return dense_weight_grad(e, x); }
SpikeTensor cf_ref(const Tensor& w, const SpikeTensor& x, const Shape3& in) { return reference::conv_forward(w, x, in); }
SpikeTensor cf_par(const Tensor& w, const SpikeTensor& x, const Shape3& in) { return conv_forward(w, x, in); }
SpikeTensor ct_ref(const Tensor& w, const SpikeTensor& e, const Shape3& in) { return reference::conv_transpose(w, e, in); }
SpikeTensor ct_par(const Tensor& w, const SpikeTensor& e, const Shape3& in) { return conv_transpose(w, e, in); }

}  // namespace

BENCHMARK(bench_convolve<conv_ref>)->Name("temporal_convolve/serial")->Arg(256)->Arg(4096);
BENCHMARK(bench_convolve<conv_par>)->Name("temporal_convolve/openmp")->Arg(256)->Arg(4096);
BENCHMARK(bench_convolve<corr_ref>)->Name("temporal_correlate/serial")->Arg(256)->Arg(4096);
BENCHMARK(bench_convolve<corr_par>)->Name("temporal_correlate/openmp")->Arg(256)->Arg(4096);
BENCHMARK(bench_dense<dense_ref>)->Name("dense_forward/serial")->Arg(256)->Arg(512);
BENCHMARK(bench_dense<dense_par>)->Name("dense_forward/openmp")->Arg(256)->Arg(512);
BENCHMARK(bench_dense_grad<dgrad_ref>)->Name("dense_weight_grad/serial")->Arg(256)->Arg(512);
BENCHMARK(bench_dense_grad<dgrad_par>)->Name("dense_weight_grad/openmp")->Arg(256)->Arg(512);
BENCHMARK(bench_conv<cf_ref>)->Name("conv_forward/serial");
BENCHMARK(bench_conv<cf_par>)->Name("conv_forward/openmp");
BENCHMARK(bench_conv_transpose<ct_ref>)->Name("conv_transpose/serial");
BENCHMARK(bench_conv_transpose<ct_par>)->Name("conv_transpose/openmp");

int main(int argc, char** argv) {
  if (const int n = parallel::workers_from_environment(); n > 0) parallel::set_worker_count(n);
  benchmark::Initialize(&argc, argv);
  if (benchmark::ReportUnrecognizedArguments(argc, argv)) return 1;
  benchmark::RunSpecifiedBenchmarks();
  benchmark::Shutdown();
  return 0;
}
