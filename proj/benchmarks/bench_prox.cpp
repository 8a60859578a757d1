#include <random>
#include <vector>

#include <benchmark/benchmark.h>

#include "mtgraph/prox.hpp"

using namespace mtgraph;

namespace {

std::vector<Anchor> anchors(std::size_t n, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> b(-10, 10), c(0.1, 2.0);
  std::vector<Anchor> out(n);
  for (auto& a : out) a = {b(rng), c(rng)};
  return out;
}

void BM_ElasticNetSum(benchmark::State& state) {
  std::mt19937_64 rng(1);
  const auto p = ProxProblem::make(anchors(static_cast<std::size_t>(state.range(0)), rng), 0.7, 0.5);
  std::uniform_real_distribution<double> v(-15, 15);
  std::vector<double> inputs(256);
  for (auto& x : inputs) x = v(rng);
  std::size_t i = 0;
  for (auto _ : state) benchmark::DoNotOptimize(prox_elastic_net_sum(inputs[i++ & 255], p));
}
BENCHMARK(BM_ElasticNetSum)->Arg(1)->Arg(3)->Arg(6)->Arg(20);

void BM_L0Sum(benchmark::State& state) {
  std::mt19937_64 rng(2);
  const auto p = ProxProblem::make(anchors(static_cast<std::size_t>(state.range(0)), rng), 0.7, 0.0, 1.0);
  std::uniform_real_distribution<double> v(-15, 15);
  std::vector<double> inputs(256);
  for (auto& x : inputs) x = v(rng);
  std::size_t i = 0;
  for (auto _ : state) benchmark::DoNotOptimize(prox_l0_sum(inputs[i++ & 255], p));
}
BENCHMARK(BM_L0Sum)->Arg(1)->Arg(3)->Arg(6);

void BM_SocialStep(benchmark::State& state) {
  const auto kind = static_cast<Regularizer::Kind>(state.range(0));
  Regularizer reg;
  reg.kind = kind;
  const Eigen::Index m = 10;
  std::mt19937_64 rng(3);
  std::normal_distribution<double> g;
  auto draw = [&] {
    Eigen::VectorXd x(m);
    for (Eigen::Index i = 0; i < m; ++i) x[i] = g(rng);
    return x;
  };
  const Eigen::VectorXd psi = draw();
  std::vector<Eigen::VectorXd> nb = {draw(), draw(), draw(), draw()};
  std::vector<NeighborEstimate> n;
  for (const auto& x : nb) n.push_back({&x, 0.25});
  SocialStepWorkspace ws;
  Eigen::VectorXd out;
  for (auto _ : state) {
    prox_social_step(psi, n, 0.05, reg, ws, out);
    benchmark::DoNotOptimize(out.data());
  }
  state.SetLabel(std::string(to_string(kind)));
}
BENCHMARK(BM_SocialStep)->DenseRange(0, 4);

}  // namespace
