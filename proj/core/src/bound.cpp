#include "mtgraph/bound.hpp"

#include <cmath>
#include <limits>
#include <sstream>

#include "mtgraph/errors.hpp"

namespace mtgraph {

void StabilityConstants::validate() const {
  const auto k = nu.size();
  if (k == 0) throw InvalidArgument("stability constants need at least one agent");
  if (delta.size() != k || beta_s_sq.size() != k || sigma_s_sq.size() != k || e.size() != k) {
    throw InvalidArgument("stability constants must all have one entry per agent");
  }
  for (Eigen::Index i = 0; i < k; ++i) {
    if (!(nu[i] > 0.0) || !(delta[i] >= nu[i])) {
      throw InvalidArgument("agent " + std::to_string(i) + ": need 0 < nu <= delta");
    }
    if (!(beta_s_sq[i] >= 0.0) || !(sigma_s_sq[i] >= 0.0) || !(e[i] >= 0.0)) {
      throw InvalidArgument("agent " + std::to_string(i) + ": noise and subgradient bounds must be nonnegative");
    }
  }
  if (!(kappa >= 0.0)) throw InvalidArgument("kappa must be nonnegative");
  if (!(alpha >= 0.5)) throw InvalidArgument("alpha must be at least 1/2");
}

double StabilityConstants::eta(double mu) const { return kappa * std::pow(mu, alpha); }

double max_stable_step(const StabilityConstants& constants) {
  constants.validate();
  double bound = std::numeric_limits<double>::infinity();
  for (Eigen::Index k = 0; k < constants.nu.size(); ++k) {
    const double nu = constants.nu[k];
    bound = std::min(bound, nu / (constants.delta[k] * constants.delta[k]));
    bound = std::min(bound, nu / (4.0 * constants.beta_s_sq[k] + 0.5 * nu * nu));
  }
  return bound;
}

BoundRecursion theorem_bound_recursion(const StabilityConstants& constants, double mu, double eta,
                                       const Eigen::VectorXd& msp_0,
                                       const Eigen::VectorXd& w_eta_norms,
                                       std::size_t iterations) {
  constants.validate();
  const auto agents = constants.nu.size();
  if (msp_0.size() != agents || w_eta_norms.size() != agents) {
    throw InvalidArgument("msp_0 and w_eta_norms need one entry per agent");
  }
  if (!(eta >= 0.0)) throw InvalidArgument("eta must be nonnegative");
  if (!(mu > 0.0)) throw InvalidArgument("mu must be positive");
  for (Eigen::Index k = 0; k < agents; ++k) {
    const double nu = constants.nu[k];
    const double hessian_bound = nu / (constants.delta[k] * constants.delta[k]);
    const double noise_bound = nu / (4.0 * constants.beta_s_sq[k] + 0.5 * nu * nu);
    if (mu >= hessian_bound) {
      std::ostringstream msg;
      msg << "step size " << mu << " violates mu < nu/delta^2 = " << hessian_bound << " at agent " << k;
      throw InvalidArgument(msg.str());
    }
    if (mu >= noise_bound) {
      std::ostringstream msg;
      msg << "step size " << mu << " violates mu < nu/(4 beta_s^2 + nu^2/2) = " << noise_bound
          << " at agent " << k;
      throw InvalidArgument(msg.str());
    }
  }

  BoundRecursion out;
  out.a.resize(agents);
  out.c.resize(agents);
  out.d.resize(agents);
  out.zeta.resize(agents);
  for (Eigen::Index k = 0; k < agents; ++k) {
    const double nu = constants.nu[k];
    const double shrink = 1.0 - 0.5 * mu * nu;
    const double b2 = constants.beta_s_sq[k];
    out.a[k] = shrink + 2.0 * mu * mu * b2 / shrink;
    out.c[k] = eta * eta * 8.0 * constants.e[k] * constants.e[k] / nu;
    const double w2 = w_eta_norms[k] * w_eta_norms[k];
    out.d[k] = (2.0 * b2 * w2 + constants.sigma_s_sq[k]) / shrink;
    out.zeta[k] = 0.5 * nu - 2.0 * mu * b2 / shrink;
  }
  const Eigen::VectorXd drive = mu * (out.c + mu * out.d);
  out.msp.reserve(iterations + 1);
  out.msp.push_back(msp_0);
  for (std::size_t i = 1; i <= iterations; ++i) {
    out.msp.push_back(out.a.cwiseProduct(out.msp.back()) + drive);
  }
  const double a_norm = out.a.cwiseAbs().maxCoeff();
  out.limsup_bound = drive.cwiseAbs().maxCoeff() / (1.0 - a_norm);
  return out;
}

BoundRecursion theorem_bound_recursion(const StabilityConstants& constants, double mu,
                                       const Eigen::VectorXd& msp_0,
                                       const Eigen::VectorXd& w_eta_norms,
                                       std::size_t iterations) {
  return theorem_bound_recursion(constants, mu, constants.eta(mu), msp_0, w_eta_norms, iterations);
}

StabilityConstants isotropic_mse_constants(std::size_t dimension, double sigma_u_sq,
                                           double sigma_v_sq) {
  if (dimension == 0 || !(sigma_u_sq > 0.0) || !(sigma_v_sq >= 0.0)) {
    throw InvalidArgument("invalid isotropic MSE parameters");
  }
  const double m = static_cast<double>(dimension);
  StabilityConstants c;
  c.nu = Eigen::VectorXd::Constant(1, sigma_u_sq);
  c.delta = c.nu;
  c.beta_s_sq = Eigen::VectorXd::Constant(1, sigma_u_sq * sigma_u_sq * (m + 1.0));
  c.sigma_s_sq = Eigen::VectorXd::Constant(1, m * sigma_u_sq * sigma_v_sq);
  c.e = Eigen::VectorXd::Zero(1);
  return c;
}

}  // namespace mtgraph
