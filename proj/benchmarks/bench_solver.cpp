#include <benchmark/benchmark.h>

#include "mtgraph/cost_models.hpp"
#include "mtgraph/graph.hpp"
#include "mtgraph/solver.hpp"

using namespace mtgraph;

namespace {

// One full iteration of the network recursion, reported per agent.
void BM_NetworkIteration(benchmark::State& state) {
  const auto agents = static_cast<std::size_t>(state.range(0));
  const auto net = ring_network(agents);
  const auto ens = generate_sparse_models(agents, 10, 5);
  SolverConfig cfg;
  cfg.mu = 0.005;
  cfg.eta = 0.05;
  cfg.regularizer = Regularizer::l1();
  cfg.iterations = 1000;
  for (auto _ : state) {
    SampledGradients src(ens, 1, 0);
    run_decentralized(net, src, cfg, 1, 0, [](std::size_t, std::span<const Eigen::VectorXd>,
                                              std::span<const Eigen::VectorXd>) {});
  }
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(agents * cfg.iterations));
}
BENCHMARK(BM_NetworkIteration)->Arg(5)->Arg(20)->Unit(benchmark::kMillisecond);

}  // namespace
