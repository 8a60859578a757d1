#include "mtgraph/solver.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "mtgraph/errors.hpp"

namespace mtgraph {

void SolverConfig::validate() const {
  std::vector<std::string> problems;
  if (!(mu > 0.0) || !std::isfinite(mu)) problems.push_back("mu must be positive");
  if (!(eta >= 0.0) || !std::isfinite(eta)) problems.push_back("eta must be nonnegative");
  if (iterations == 0) problems.push_back("iterations must be positive");
  try {
    regularizer.validate();
  } catch (const InvalidArgument& e) {
    problems.push_back(e.what());
  }
  if (!problems.empty()) {
    std::string msg = "invalid solver config:";
    for (const auto& p : problems) msg += " " + p + ";";
    throw InvalidArgument(msg);
  }
}

SampledGradients::SampledGradients(const ModelEnsemble& ensemble, std::uint64_t seed,
                                   std::uint64_t run)
    : ensemble_(&ensemble) {
  ensemble.validate();
  streams_.reserve(ensemble.size());
  for (std::size_t k = 0; k < ensemble.size(); ++k) {
    streams_.emplace_back(seed, run, k, StreamPurpose::samples);
  }
}

void SampledGradients::gradient(std::size_t agent, std::size_t, const Eigen::VectorXd& w,
                                Eigen::VectorXd& out) {
  const auto& model = ensemble_->agents[agent];
  draw_sample(model, streams_[agent], sample_);
  stochastic_gradient(model, w, sample_, out);
}

ExactGradients::ExactGradients(const ModelEnsemble& ensemble) : ensemble_(&ensemble) {
  ensemble.validate();
  for (const auto& a : ensemble.agents) {
    if (a.kind() != CostKind::mse) {
      throw InvalidArgument("exact gradient mode is only available for MSE agents");
    }
  }
}

void ExactGradients::gradient(std::size_t agent, std::size_t, const Eigen::VectorXd& w,
                              Eigen::VectorXd& out) {
  const auto& model = ensemble_->agents[agent];
  out.noalias() = model.feature_covariance() * (w - model.w_true());
}

CyclicLogisticGradients::CyclicLogisticGradients(std::vector<std::vector<Sample>> samples,
                                                 double ridge)
    : samples_(std::move(samples)), ridge_(ridge) {
  if (samples_.empty()) throw InvalidArgument("no agents in sample set");
  if (!(ridge_ >= 0.0)) throw InvalidArgument("ridge must be nonnegative");
  for (std::size_t k = 0; k < samples_.size(); ++k) {
    if (samples_[k].empty()) {
      throw InvalidArgument("agent " + std::to_string(k) + " has no training samples");
    }
    for (const auto& s : samples_[k]) {
      const auto m = static_cast<std::size_t>(s.x.size());
      if (dimension_ == 0) dimension_ = m;
      if (m != dimension_ || m == 0) throw InvalidArgument("inconsistent sample dimension");
    }
  }
}

void CyclicLogisticGradients::gradient(std::size_t agent, std::size_t iteration,
                                       const Eigen::VectorXd& w, Eigen::VectorXd& out) {
  const auto& stream = samples_[agent];
  const auto& s = stream[(iteration - 1) % stream.size()];
  const double t = s.y * s.x.dot(w);
  out = ridge_ * w - (s.y * logistic_tail(t)) * s.x;
}

std::vector<Eigen::VectorXd> initial_estimates(const Initialization& init, std::size_t agents,
                                               std::size_t dimension, std::uint64_t seed,
                                               std::uint64_t run) {
  std::vector<Eigen::VectorXd> w;
  w.reserve(agents);
  switch (init.kind) {
    case Initialization::Kind::zeros:
      for (std::size_t k = 0; k < agents; ++k) w.push_back(Eigen::VectorXd::Zero(dimension));
      break;
    case Initialization::Kind::gaussian:
      for (std::size_t k = 0; k < agents; ++k) {
        AgentStream stream(seed, run, k, StreamPurpose::initialization);
        Eigen::VectorXd v(dimension);
        for (std::size_t m = 0; m < dimension; ++m) v[m] = stream.normal();
        w.push_back(std::move(v));
      }
      break;
    case Initialization::Kind::explicit_vectors:
      if (init.vectors.size() != agents) {
        throw InvalidArgument("explicit initialization needs one vector per agent");
      }
      for (const auto& v : init.vectors) {
        if (static_cast<std::size_t>(v.size()) != dimension) {
          throw InvalidArgument("explicit initialization has the wrong dimension");
        }
        w.push_back(v);
      }
      break;
  }
  return w;
}

namespace {

std::vector<std::size_t> checked_order(const RunOptions& options, std::size_t agents) {
  if (options.agent_order.empty()) {
    std::vector<std::size_t> order(agents);
    for (std::size_t k = 0; k < agents; ++k) order[k] = k;
    return order;
  }
  if (options.agent_order.size() != agents) {
    throw InvalidArgument("agent order must list every agent once");
  }
  std::vector<bool> seen(agents, false);
  for (auto k : options.agent_order) {
    if (k >= agents || seen[k]) throw InvalidArgument("agent order must be a permutation");
    seen[k] = true;
  }
  return options.agent_order;
}

}  // namespace

void run_decentralized(const Network& network, GradientSource& gradients,
                       const SolverConfig& config, std::uint64_t seed, std::uint64_t run,
                       const IterationObserver& observer, const RunOptions& options) {
  config.validate();
  const auto agents = network.size();
  if (gradients.agents() != agents) {
    throw InvalidArgument("network has " + std::to_string(agents) + " agents but the cost model has " +
                          std::to_string(gradients.agents()));
  }
  const auto dimension = gradients.dimension();
  const auto order = checked_order(options, agents);

  std::vector<Eigen::VectorXd> w = initial_estimates(config.init, agents, dimension, seed, run);
  std::vector<Eigen::VectorXd> psi(agents, Eigen::VectorXd::Zero(dimension));
  Eigen::VectorXd grad(dimension);

  // Neighbor views point into psi, whose element addresses never change.
  std::vector<std::vector<NeighborEstimate>> neighbors(agents);
  for (std::size_t k = 0; k < agents; ++k) {
    for (const auto& link : network.links(k)) {
      neighbors[k].push_back({&psi[link.neighbor], link.p});
    }
  }
  SocialStepWorkspace workspace;
  const double step = config.mu * config.eta;

  if (observer) observer(0, w, {});
  for (std::size_t i = 1; i <= config.iterations; ++i) {
    for (auto k : order) {
      gradients.gradient(k, i, w[k], grad);
      psi[k] = w[k] - config.mu * grad;
    }
    // barrier: every psi_k of iteration i exists before any social step
    for (auto k : order) {
      prox_social_step(psi[k], neighbors[k], step, config.regularizer, workspace, w[k]);
      if (!w[k].allFinite()) throw NonFiniteIterate(k, i);
    }
    if (observer) observer(i, w, psi);
  }
}

Trajectory run_decentralized(const Network& network, const ModelEnsemble& ensemble,
                             const SolverConfig& config, std::uint64_t seed, std::uint64_t run,
                             const RunOptions& options) {
  std::unique_ptr<GradientSource> source;
  if (config.gradient_mode == GradientMode::exact) {
    source = std::make_unique<ExactGradients>(ensemble);
  } else {
    source = std::make_unique<SampledGradients>(ensemble, seed, run);
  }
  Trajectory traj;
  traj.seed = seed;
  traj.run = run;
  traj.estimates.reserve(config.iterations + 1);
  if (options.keep_intermediates) traj.intermediates.reserve(config.iterations + 1);
  run_decentralized(
      network, *source, config, seed, run,
      [&](std::size_t, std::span<const Eigen::VectorXd> w, std::span<const Eigen::VectorXd> psi) {
        traj.estimates.emplace_back(w.begin(), w.end());
        if (options.keep_intermediates) traj.intermediates.emplace_back(psi.begin(), psi.end());
      },
      options);
  return traj;
}

}  // namespace mtgraph
