#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <memory>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "mtgraph/cost_models.hpp"
#include "mtgraph/graph.hpp"
#include "mtgraph/prox.hpp"
#include "mtgraph/random.hpp"

namespace mtgraph {

struct Initialization {
  enum class Kind { zeros, gaussian, explicit_vectors };

  Kind kind = Kind::zeros;
  std::vector<Eigen::VectorXd> vectors;  ///< explicit_vectors only

  static Initialization zeros() { return {}; }
  static Initialization gaussian() { return {Kind::gaussian, {}}; }
  static Initialization from(std::vector<Eigen::VectorXd> vectors) {
    return {Kind::explicit_vectors, std::move(vectors)};
  }
};

enum class GradientMode { stochastic, exact };

struct SolverConfig {
  double mu = 0.01;
  double eta = 0.0;
  Regularizer regularizer;
  std::size_t iterations = 1000;
  Initialization init;
  GradientMode gradient_mode = GradientMode::stochastic;

  void validate() const;
};

/// Supplies the gradient approximation used in the self-learning step.
///
/// Called exactly once per (agent, iteration), iterations starting at 1.
class GradientSource {
 public:
  virtual ~GradientSource() = default;
  virtual std::size_t agents() const = 0;
  virtual std::size_t dimension() const = 0;
  virtual void gradient(std::size_t agent, std::size_t iteration, const Eigen::VectorXd& w,
                        Eigen::VectorXd& out) = 0;
};

/// Streaming samples from an ensemble: one fresh draw per agent and
/// iteration from the stream keyed by (seed, run, agent).
class SampledGradients final : public GradientSource {
 public:
  SampledGradients(const ModelEnsemble& ensemble, std::uint64_t seed, std::uint64_t run);

  std::size_t agents() const override { return ensemble_->size(); }
  std::size_t dimension() const override { return ensemble_->dimension(); }
  void gradient(std::size_t agent, std::size_t iteration, const Eigen::VectorXd& w,
                Eigen::VectorXd& out) override;

 private:
  const ModelEnsemble* ensemble_;
  std::vector<AgentStream> streams_;
  Sample sample_;
};

/// Exact MSE gradients R_u (w - w_true); the noiseless mode.
class ExactGradients final : public GradientSource {
 public:
  explicit ExactGradients(const ModelEnsemble& ensemble);

  std::size_t agents() const override { return ensemble_->size(); }
  std::size_t dimension() const override { return ensemble_->dimension(); }
  void gradient(std::size_t agent, std::size_t iteration, const Eigen::VectorXd& w,
                Eigen::VectorXd& out) override;

 private:
  const ModelEnsemble* ensemble_;
};

/// Per-agent recorded logistic samples replayed cyclically: iteration i uses
/// sample (i - 1) mod n_k of agent k.
class CyclicLogisticGradients final : public GradientSource {
 public:
  CyclicLogisticGradients(std::vector<std::vector<Sample>> samples, double ridge);

  std::size_t agents() const override { return samples_.size(); }
  std::size_t dimension() const override { return dimension_; }
  void gradient(std::size_t agent, std::size_t iteration, const Eigen::VectorXd& w,
                Eigen::VectorXd& out) override;

 private:
  std::vector<std::vector<Sample>> samples_;
  double ridge_;
  std::size_t dimension_ = 0;
};

struct Trajectory {
  /// estimates[i][k] is w_{k,i}; estimates[0] is the initialization.
  std::vector<std::vector<Eigen::VectorXd>> estimates;
  /// intermediates[i][k] is psi_{k,i} for i >= 1 (index 0 left empty); only
  /// filled when requested.
  std::vector<std::vector<Eigen::VectorXd>> intermediates;
  std::uint64_t seed = 0;
  std::uint64_t run = 0;
  std::uint64_t config_digest = 0;

  std::size_t iterations() const noexcept {
    return estimates.empty() ? 0 : estimates.size() - 1;
  }
  std::size_t agents() const noexcept { return estimates.empty() ? 0 : estimates.front().size(); }
  std::size_t dimension() const noexcept {
    return agents() == 0 ? 0 : static_cast<std::size_t>(estimates.front().front().size());
  }
};

struct RunOptions {
  bool keep_intermediates = false;
  /// Order in which agents are visited inside each phase; empty means 0..K-1.
  /// Must be a permutation. Results do not depend on it.
  std::vector<std::size_t> agent_order;
};

/// Called after initialization (iteration 0, empty psi) and after every
/// completed iteration with the current estimates and intermediates.
using IterationObserver = std::function<void(std::size_t iteration,
                                             std::span<const Eigen::VectorXd> estimates,
                                             std::span<const Eigen::VectorXd> intermediates)>;

/// Initial estimates for `run`: zeros, N(0, I) draws keyed by
/// (seed, run, agent), or the explicit vectors.
std::vector<Eigen::VectorXd> initial_estimates(const Initialization& init, std::size_t agents,
                                               std::size_t dimension, std::uint64_t seed,
                                               std::uint64_t run);

/// Decentralized stochastic forward-backward recursion.
///
/// Each iteration first computes psi_k = w_k - mu * grad_k(w_k) for every
/// agent, and only then replaces every w_k by the prox of
/// mu * eta * sum_l p_kl f(. - psi_l) at psi_k. Throws NonFiniteIterate if an
/// estimate stops being finite.
void run_decentralized(const Network& network, GradientSource& gradients,
                       const SolverConfig& config, std::uint64_t seed, std::uint64_t run,
                       const IterationObserver& observer, const RunOptions& options = {});

/// Convenience form that draws from `ensemble` (or uses exact gradients when
/// config.gradient_mode is exact) and records the full trajectory.
Trajectory run_decentralized(const Network& network, const ModelEnsemble& ensemble,
                             const SolverConfig& config, std::uint64_t seed,
                             std::uint64_t run = 0, const RunOptions& options = {});

}  // namespace mtgraph
