#pragma once

#include <cstddef>
#include <vector>

#include <Eigen/Dense>

namespace mtgraph {

/// Per-agent constants of the mean-square stability analysis.
///
/// nu, delta bound the Hessians (nu I <= H <= delta I); the gradient noise
/// satisfies E|s(w)|^2 <= beta_s_sq |w|^2 + sigma_s_sq; e bounds the
/// subgradients of the co-regularizer. eta = kappa * mu^alpha.
struct StabilityConstants {
  Eigen::VectorXd nu;
  Eigen::VectorXd delta;
  Eigen::VectorXd beta_s_sq;
  Eigen::VectorXd sigma_s_sq;
  Eigen::VectorXd e;
  double kappa = 0.0;
  double alpha = 1.0;

  std::size_t size() const noexcept { return static_cast<std::size_t>(nu.size()); }
  void validate() const;
  double eta(double mu) const;
};

/// Largest step size allowed by the stability condition, exclusive.
double max_stable_step(const StabilityConstants& constants);

struct BoundRecursion {
  std::vector<Eigen::VectorXd> msp;  ///< msp[0] = msp_0, then one entry per iteration
  Eigen::VectorXd a;                 ///< diagonal of A
  Eigen::VectorXd c;
  Eigen::VectorXd d;
  Eigen::VectorXd zeta;
  double limsup_bound = 0.0;  ///< mu |c + mu d|_inf / (1 - |A|_inf)
};

/// Iterates MSP_i = A MSP_{i-1} + mu (c + mu d) with
///   A_k = 1 - mu nu_k / 2 + 2 mu^2 beta_k^2 / (1 - mu nu_k / 2)
///   c_k = eta^2 8 e_k^2 / nu_k
///   d_k = (2 beta_k^2 |w_k|^2 + sigma_k^2) / (1 - mu nu_k / 2)
/// Throws InvalidArgument naming the violated bound when mu is outside
/// 0 < mu < min_k min(nu_k / delta_k^2, nu_k / (4 beta_k^2 + nu_k^2 / 2)).
BoundRecursion theorem_bound_recursion(const StabilityConstants& constants, double mu, double eta,
                                       const Eigen::VectorXd& msp_0,
                                       const Eigen::VectorXd& w_eta_norms, std::size_t iterations);

/// Same, with eta = kappa * mu^alpha.
BoundRecursion theorem_bound_recursion(const StabilityConstants& constants, double mu,
                                       const Eigen::VectorXd& msp_0,
                                       const Eigen::VectorXd& w_eta_norms, std::size_t iterations);

/// Constants of a single MSE agent with u ~ N(0, sigma_u^2 I_M), noise
/// variance sigma_v^2 and w_true = 0, where they are known exactly:
/// nu = delta = sigma_u^2, beta_s^2 = sigma_u^4 (M + 1), sigma_s^2 = M sigma_u^2 sigma_v^2.
StabilityConstants isotropic_mse_constants(std::size_t dimension, double sigma_u_sq,
                                           double sigma_v_sq);

}  // namespace mtgraph
