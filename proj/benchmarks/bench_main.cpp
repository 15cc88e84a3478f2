#include <benchmark/benchmark.h>

#include <random>

#include "mixht/envelope.hpp"
#include "mixht/exponent_opt.hpp"
#include "mixht/finite_n_lab.hpp"
#include "mixht/simplex_lp.hpp"

using namespace mixht;

namespace {

const Dist kPx({0.643, 0.357});

ClassStructure binary_structure() {
  MixtureProblem p;
  p.joints = {Joint::from_channel(kPx, Channel::bsc(0.1)), Joint::from_channel(kPx, Channel::z_channel(0.8))};
  p.weights = Dist({0.5, 0.5});
  p.y_alternatives = {SourceModel::iid(Dist::uniform(2))};
  p.x_alternatives = {SourceModel::iid(kPx)};
  return classify(p);
}

void BM_SimplexDense(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(0.1, 1.0);
  lp::Problem p;
  p.num_vars = n;
  for (std::size_t j = 0; j < n; ++j) p.objective.push_back(u(rng));
  for (std::size_t i = 0; i < n; ++i) {
    lp::Constraint c;
    for (std::size_t j = 0; j < n; ++j) c.coef.push_back(u(rng));
    c.sense = lp::Sense::le;
    c.rhs = u(rng) * static_cast<double>(n);
    p.constraints.push_back(c);
  }
  for (auto _ : state) benchmark::DoNotOptimize(lp::solve(p).objective);
}
BENCHMARK(BM_SimplexDense)->Arg(10)->Arg(40)->Arg(100);

void BM_ThetaBinary(benchmark::State& state) {
  const ClassStructure st = binary_structure();
  for (auto _ : state) benchmark::DoNotOptimize(theta_s(st, 0, 0.385));
}
BENCHMARK(BM_ThetaBinary)->Unit(benchmark::kMillisecond);

void BM_XiBinary(benchmark::State& state) {
  const ClassStructure st = binary_structure();
  for (auto _ : state) benchmark::DoNotOptimize(xi_i(st, 1, 0.385));
}
BENCHMARK(BM_XiBinary)->Unit(benchmark::kMillisecond);

void BM_EnvelopeGrid(benchmark::State& state) {
  const BinaryScenario s{0.1, 0.8, 0.28};
  EnvelopeOptions opt;
  opt.grid = static_cast<std::size_t>(state.range(0));
  for (auto _ : state)
    benchmark::DoNotOptimize(lower_convex_envelope([&](double p) { return phi(s, 0.566, p); }, opt).size());
}
BENCHMARK(BM_EnvelopeGrid)->Arg(2001)->Arg(20001)->Unit(benchmark::kMillisecond);

void BM_FAlpha(benchmark::State& state) {
  const EnvelopeEvaluator ev(0.1, 0.8, 0.643);
  for (auto _ : state) benchmark::DoNotOptimize(ev.f_alpha(0.28, 0.266));
}
BENCHMARK(BM_FAlpha)->Unit(benchmark::kMillisecond);

void BM_CounterexamplePipeline(benchmark::State& state) {
  for (auto _ : state) benchmark::DoNotOptimize(counterexample_pipeline(PipelineInputs{}).separation);
}
BENCHMARK(BM_CounterexamplePipeline)->Unit(benchmark::kMillisecond);

void BM_ExactErrors(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  set_lab_workers(static_cast<std::size_t>(state.range(1)));
  const Joint j = Joint::from_channel(kPx, Channel::bsc(0.1));
  TestingScheme s;
  s.n = n;
  s.nx = s.ny = 2;
  s.compress = TestingScheme::type_compression(n, 2, &s.messages);
  s.accept.assign((std::size_t{1} << n) * s.messages, 0.0);
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (double& a : s.accept) a = u(rng);
  const std::pair<SourceModel, SourceModel> alt{SourceModel::iid(Dist::uniform(2)), SourceModel::iid(kPx)};
  for (auto _ : state) benchmark::DoNotOptimize(exact_errors(s, j, alt).beta);
  set_lab_workers(1);
}
BENCHMARK(BM_ExactErrors)->Args({6, 1})->Args({10, 1})->Args({10, 4})->Unit(benchmark::kMillisecond);

}  // namespace
BENCHMARK_MAIN();
