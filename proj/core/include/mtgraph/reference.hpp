#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <vector>

#include <Eigen/Dense>

#include "mtgraph/cost_models.hpp"
#include "mtgraph/graph.hpp"
#include "mtgraph/prox.hpp"

namespace mtgraph {

/// Deterministic smooth part sum_k J_k of the stacked problem.
class SmoothCosts {
 public:
  virtual ~SmoothCosts() = default;
  virtual std::size_t agents() const = 0;
  virtual std::size_t dimension() const = 0;
  virtual double value(std::size_t agent, const Eigen::VectorXd& w) const = 0;
  virtual void gradient(std::size_t agent, const Eigen::VectorXd& w, Eigen::VectorXd& out) const = 0;
  /// Upper bound on the Lipschitz constant of agent's gradient.
  virtual double lipschitz(std::size_t agent) const = 0;
  /// Where the reference solver starts; the agent's own minimizer when known.
  virtual Eigen::VectorXd starting_point(std::size_t agent) const {
    (void)agent;
    return Eigen::VectorXd::Zero(static_cast<Eigen::Index>(dimension()));
  }
};

/// Population MSE risks 1/2 [(w - w_true)^T R_u (w - w_true) + sigma_v^2].
std::unique_ptr<SmoothCosts> mse_population_costs(const ModelEnsemble& ensemble);

/// Finite-sum stand-in for logistic risks: the average loss over `samples`
/// draws per agent from the generating model, keyed by `seed`. The draws are
/// regenerated on every evaluation, so memory stays O(M).
std::unique_ptr<SmoothCosts> logistic_surrogate_costs(const ModelEnsemble& ensemble,
                                                      std::size_t samples, std::uint64_t seed);

struct ReferenceOptions {
  double tolerance = 1e-8;
  std::size_t max_outer_iterations = 20000;
  std::size_t max_inner_passes = 200000;
  std::size_t surrogate_samples = 1000000;
  std::uint64_t surrogate_seed = 0x5eed;
};

struct ReferenceSolution {
  std::vector<Eigen::VectorXd> blocks;  ///< w_{k,eta}^o per agent
  double residual = 0.0;
  std::size_t iterations = 0;
  std::vector<double> objective_history;  ///< global objective after each outer step

  Eigen::VectorXd stacked() const;
};

/// sum_k J_k(w_k) + eta * sum over undirected links of p_kl f(w_k - w_l).
///
/// This equals sum_k J_k + (eta / 2) sum_k sum_{l in N_k} p_kl f(w_k - w_l).
double global_objective(const SmoothCosts& costs, const Network& network, double eta,
                        const Regularizer& regularizer, const std::vector<Eigen::VectorXd>& blocks);

/// Euclidean norm of the minimum-norm element of
/// grad(sum J_k) + (eta / 2) dR at `blocks`.
///
/// Differences with |w_k - w_l|_m <= fuse_threshold are treated as zero, so
/// their subgradient may be chosen freely in the allowed interval.
double optimality_residual(const SmoothCosts& costs, const Network& network, double eta,
                           const Regularizer& regularizer,
                           const std::vector<Eigen::VectorXd>& blocks, double fuse_threshold);

/// Minimizer of the regularized network problem for a convex regularizer
/// (l1, elastic net or squared l2).
///
/// Forward-backward on the stacked problem with backtracking; the prox of
/// the coupled penalty is evaluated by dual coordinate ascent over links.
/// Throws InvalidArgument for l0 or reweighted l1 and ConvergenceFailure if
/// the residual stays above tolerance.
ReferenceSolution solve_reference(const Network& network, const SmoothCosts& costs, double eta,
                                  const Regularizer& regularizer,
                                  const ReferenceOptions& options = {});

/// Chooses MSE population costs or the logistic surrogate per the ensemble.
ReferenceSolution solve_reference(const Network& network, const ModelEnsemble& ensemble, double eta,
                                  const Regularizer& regularizer,
                                  const ReferenceOptions& options = {});

}  // namespace mtgraph
