#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <vector>

#include <Eigen/Dense>

#include "mtgraph/graph.hpp"
#include "mtgraph/random.hpp"

namespace mtgraph {

enum class CostKind { mse, logistic };

/// One agent's cost family, data distribution and true model w_k^o.
///
/// MSE agents observe d = u^T w_true + v with u ~ N(0, R_u) and
/// v ~ N(0, sigma_v^2); their risk is 1/2 E (d - u^T w)^2. Logistic agents
/// observe features h ~ N(0, R_h) and labels +-1 drawn from the logistic
/// model at w_true; their risk is E ln(1 + exp(-gamma h^T w)) + rho/2 |w|^2.
class AgentModel {
 public:
  static AgentModel mse(Eigen::VectorXd w_true, const Eigen::MatrixXd& feature_covariance,
                        double noise_variance);
  static AgentModel mse(Eigen::VectorXd w_true, double feature_variance, double noise_variance);
  static AgentModel logistic(Eigen::VectorXd w_true, const Eigen::MatrixXd& feature_covariance,
                             double ridge);
  static AgentModel logistic(Eigen::VectorXd w_true, double feature_variance, double ridge);

  CostKind kind() const noexcept { return kind_; }
  std::size_t dimension() const noexcept { return static_cast<std::size_t>(w_true_.size()); }
  const Eigen::VectorXd& w_true() const noexcept { return w_true_; }
  const Eigen::MatrixXd& feature_covariance() const noexcept { return covariance_; }
  double noise_variance() const noexcept { return noise_variance_; }
  double ridge() const noexcept { return ridge_; }

  /// Draws a feature vector from N(0, R) into `out`.
  void draw_features(AgentStream& stream, Eigen::VectorXd& out) const;

 private:
  AgentModel(CostKind kind, Eigen::VectorXd w_true, const Eigen::MatrixXd& covariance,
             double noise_variance, double ridge);

  CostKind kind_ = CostKind::mse;
  Eigen::VectorXd w_true_;
  Eigen::MatrixXd covariance_;
  Eigen::MatrixXd factor_;  // lower Cholesky factor of covariance_
  std::optional<double> isotropic_sd_;
  double noise_variance_ = 0.0;
  double ridge_ = 0.0;
};

enum class ConstructionMode { sparse_differences, smooth_graph, custom };

struct ModelEnsemble {
  std::vector<AgentModel> agents;
  ConstructionMode mode = ConstructionMode::custom;
  std::optional<Eigen::VectorXd> center;  ///< w_c for sparse_differences

  std::size_t size() const noexcept { return agents.size(); }
  std::size_t dimension() const;
  /// Per-agent true models, in agent order.
  std::vector<Eigen::VectorXd> true_models() const;
  /// Throws InvalidArgument if agents disagree on dimension.
  void validate() const;
};

/// Uniform ranges for per-agent regressor and noise variances.
struct VarianceRanges {
  double feature_lo = 1.0;
  double feature_hi = 1.5;
  double noise_lo = 0.15;
  double noise_hi = 0.25;
};

/// MSE ensemble whose models differ from a common Gaussian center in one entry.
///
/// Agent k (0-based) perturbs entry (k mod M) by +1 when floor(k / M) is even
/// and by -1 when it is odd; with K = 2M this is agents 1..M at +1 and
/// M+1..2M at -1 in one-based terms. Variances are drawn per agent from
/// `ranges`.
ModelEnsemble generate_sparse_models(std::size_t agents, std::size_t dimension, std::uint64_t seed,
                                     const VarianceRanges& ranges = {});

/// MSE ensemble whose models vary smoothly over `network`.
///
/// Draws i.i.d. N(0, 1) entries for every agent and coordinate, then applies
/// (I + tau L)^{-1} per coordinate with L the unweighted graph Laplacian.
ModelEnsemble generate_smooth_models(const Network& network, std::size_t dimension, double tau,
                                     std::uint64_t seed, const VarianceRanges& ranges = {});

/// Applies (I + tau L)^{-1} to each column of `draws` (K x M).
Eigen::MatrixXd smooth_over_graph(const Network& network, const Eigen::MatrixXd& draws, double tau);

/// sum over coordinates of x_m^T L x_m for a K x M matrix of agent rows.
double laplacian_quadratic_form(const Network& network, const Eigen::MatrixXd& models);

/// Same true models and feature variances, switched to the logistic family.
ModelEnsemble as_logistic(const ModelEnsemble& ensemble, double ridge);

/// One streaming observation: (u, d) for MSE, (h, label) for logistic.
struct Sample {
  Eigen::VectorXd x;
  double y = 0.0;
};

void draw_sample(const AgentModel& model, AgentStream& stream, Sample& out);

Sample mse_sample(const AgentModel& model, AgentStream& stream);
Sample logistic_sample(const AgentModel& model, AgentStream& stream);

/// -u (d - u^T w).
Eigen::VectorXd mse_stochastic_gradient(const Eigen::VectorXd& w, const Sample& sample);
/// R_u (w - w_true).
Eigen::VectorXd mse_true_gradient(const Eigen::VectorXd& w, const AgentModel& model);
/// 1/2 [(w - w_true)^T R_u (w - w_true) + sigma_v^2].
double mse_risk(const Eigen::VectorXd& w, const AgentModel& model);

/// rho w - label h / (1 + exp(label h^T w)), overflow-safe.
Eigen::VectorXd logistic_stochastic_gradient(const Eigen::VectorXd& w, const Sample& sample,
                                             double rho);
/// ln(1 + exp(-label h^T w)) + rho/2 |w|^2, overflow-safe.
double logistic_loss(const Eigen::VectorXd& w, const Sample& sample, double rho);
/// Hessian of logistic_loss at w applied to v.
Eigen::VectorXd logistic_hessian_vector(const Eigen::VectorXd& w, const Sample& sample, double rho,
                                        const Eigen::VectorXd& v);

/// Instantaneous gradient of the agent's family, written into `out`.
void stochastic_gradient(const AgentModel& model, const Eigen::VectorXd& w, const Sample& sample,
                         Eigen::VectorXd& out);

/// 1 / (1 + exp(t)) without overflow.
double logistic_tail(double t) noexcept;
/// ln(1 + exp(t)) without overflow.
double softplus(double t) noexcept;

}  // namespace mtgraph
