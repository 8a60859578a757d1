#include <cmath>
#include <numeric>
#include <random>

#include "checks.hpp"
#include "doctest.h"
#include "mtgraph/errors.hpp"
#include "mtgraph/solver.hpp"

using namespace mtgraph;

namespace {

Network five_ring() { return ring_network(5); }

SolverConfig config(double mu, double eta, Regularizer reg, std::size_t iterations) {
  SolverConfig c;
  c.mu = mu;
  c.eta = eta;
  c.regularizer = reg;
  c.iterations = iterations;
  return c;
}

}  // namespace

TEST_CASE("eta = 0 reproduces independent LMS recursions") {
  const auto net = five_ring();
  const auto ens = generate_sparse_models(5, 3, 4);
  const auto cfg = config(0.02, 0.0, Regularizer::l1(), 200);
  const auto traj = run_decentralized(net, ens, cfg, 17, 2);
  for (std::size_t k = 0; k < 5; ++k) {
    AgentStream stream(17, 2, k, StreamPurpose::samples);
    Eigen::VectorXd w = Eigen::VectorXd::Zero(3);
    for (std::size_t i = 1; i <= 200; ++i) {
      const auto s = mse_sample(ens.agents[k], stream);
      w += 0.02 * s.x * (s.y - s.x.dot(w));
      CHECK((traj.estimates[i][k] - w).norm() <= 1e-13 * (1 + w.norm()));
    }
  }
}

TEST_CASE("single agent ignores eta") {
  const Network one = Network::from_adjacency(Adjacency(1, std::vector<bool>(1, false)),
                                              Eigen::MatrixXd::Zero(1, 1));
  const auto ens = generate_sparse_models(1, 2, 1);
  const auto a = run_decentralized(one, ens, config(0.05, 0.0, Regularizer::l1(), 50), 3);
  const auto b = run_decentralized(one, ens, config(0.05, 10.0, Regularizer::l1(), 50), 3);
  CHECK(a.estimates.back()[0] == b.estimates.back()[0]);
}

TEST_CASE("runs are deterministic and independent of agent order") {
  const auto net = five_ring();
  const auto ens = generate_sparse_models(5, 4, 8);
  for (const auto& reg : {Regularizer::l1(), Regularizer::l0(1.0), Regularizer::reweighted_l1(0.1),
                          Regularizer::elastic_net(0.5), Regularizer::squared_l2()}) {
    const auto cfg = config(0.01, 2.0, reg, 100);
    const auto a = run_decentralized(net, ens, cfg, 5, 1);
    const auto b = run_decentralized(net, ens, cfg, 5, 1);
    RunOptions reversed;
    reversed.agent_order = {4, 3, 2, 1, 0};
    const auto c = run_decentralized(net, ens, cfg, 5, 1, reversed);
    for (std::size_t i = 0; i <= 100; ++i) {
      for (std::size_t k = 0; k < 5; ++k) {
        CHECK(a.estimates[i][k] == b.estimates[i][k]);
        CHECK(a.estimates[i][k] == c.estimates[i][k]);
      }
    }
  }
}

TEST_CASE("social step sees only same-iteration intermediates") {
  const auto net = five_ring();
  const auto ens = generate_sparse_models(5, 2, 2);
  const auto cfg = config(0.05, 1.5, Regularizer::l1(), 20);
  RunOptions opts;
  opts.keep_intermediates = true;
  const auto traj = run_decentralized(net, ens, cfg, 9, 0, opts);
  for (std::size_t i = 1; i <= 20; ++i) {
    for (std::size_t k = 0; k < 5; ++k) {
      std::vector<NeighborEstimate> n;
      for (const auto& l : net.links(k)) n.push_back({&traj.intermediates[i][l.neighbor], l.p});
      const auto want = prox_social_step(traj.intermediates[i][k], n, cfg.mu * cfg.eta, cfg.regularizer);
      CHECK(traj.estimates[i][k] == want);
    }
  }
}

TEST_CASE("gaussian and explicit initialization") {
  const auto a = initial_estimates(Initialization::gaussian(), 3, 2, 7, 0);
  const auto b = initial_estimates(Initialization::gaussian(), 3, 2, 7, 1);
  CHECK(a[0] != b[0]);
  CHECK(a[0] == initial_estimates(Initialization::gaussian(), 3, 2, 7, 0)[0]);
  std::vector<Eigen::VectorXd> v(3, Eigen::VectorXd::Constant(2, 4.0));
  CHECK(initial_estimates(Initialization::from(v), 3, 2, 7, 0)[2] == v[2]);
  CHECK_THROWS_AS(initial_estimates(Initialization::from(v), 4, 2, 7, 0), InvalidArgument);
}

TEST_CASE("invalid configs and divergence are reported") {
  const auto net = five_ring();
  const auto ens = generate_sparse_models(5, 2, 2);
  CHECK_THROWS_AS(run_decentralized(net, ens, config(0.0, 0.0, Regularizer::l1(), 10), 1), InvalidArgument);
  CHECK_THROWS_AS(run_decentralized(net, ens, config(0.1, -1.0, Regularizer::l1(), 10), 1), InvalidArgument);
  CHECK_THROWS_AS(run_decentralized(net, ens, config(0.1, 1.0, Regularizer::reweighted_l1(0.0), 10), 1),
                  InvalidArgument);
  const auto small = generate_sparse_models(3, 2, 2);
  CHECK_THROWS_AS(run_decentralized(net, small, config(0.1, 0.0, Regularizer::l1(), 10), 1), InvalidArgument);
  try {
    run_decentralized(net, ens, config(50.0, 0.0, Regularizer::l1(), 500), 1);
    FAIL("expected divergence");
  } catch (const NonFiniteIterate& e) {
    CHECK(e.iteration() >= 1);
    CHECK(e.agent() < 5);
  }
}

TEST_CASE("l1 runs stay bounded inside the stable step range") {
  const auto net = five_ring();
  const auto ens = generate_sparse_models(5, 3, 6);
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const auto cfg = config(0.01, 1.0, Regularizer::l1(), 20000);
    double worst = 0;
    SampledGradients src(ens, seed, 0);
    run_decentralized(net, src, cfg, seed, 0, [&](std::size_t, std::span<const Eigen::VectorXd> w,
                                                  std::span<const Eigen::VectorXd>) {
      for (const auto& x : w) worst = std::max(worst, x.norm());
    });
    CHECK(worst < 20.0);
  }
}

TEST_CASE("cyclic logistic replay") {
  std::vector<std::vector<Sample>> samples(1);
  samples[0].push_back({Eigen::Vector2d(1.0, 0.0), 1.0});
  samples[0].push_back({Eigen::Vector2d(0.0, 1.0), -1.0});
  CyclicLogisticGradients src(samples, 0.0);
  Eigen::VectorXd w = Eigen::VectorXd::Zero(2), out;
  src.gradient(0, 1, w, out);
  CHECK(out.isApprox(Eigen::Vector2d(-0.5, 0.0)));
  src.gradient(0, 2, w, out);
  CHECK(out.isApprox(Eigen::Vector2d(0.0, 0.5)));
  src.gradient(0, 3, w, out);
  CHECK(out.isApprox(Eigen::Vector2d(-0.5, 0.0)));
}

TEST_CASE("exact gradient mode converges to the regularization-free optimum at eta = 0") {
  const auto net = five_ring();
  const auto ens = generate_sparse_models(5, 3, 6);
  auto cfg = config(0.1, 0.0, Regularizer::l1(), 2000);
  cfg.gradient_mode = GradientMode::exact;
  const auto traj = run_decentralized(net, ens, cfg, 1);
  for (std::size_t k = 0; k < 5; ++k) {
    CHECK((traj.estimates.back()[k] - ens.agents[k].w_true()).norm() < 1e-10);
  }
}
