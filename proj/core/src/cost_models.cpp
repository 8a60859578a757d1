#include "mtgraph/cost_models.hpp"

#include <cmath>

#include "mtgraph/errors.hpp"

namespace mtgraph {

AgentModel::AgentModel(CostKind kind, Eigen::VectorXd w_true, const Eigen::MatrixXd& covariance,
                       double noise_variance, double ridge)
    : kind_(kind),
      w_true_(std::move(w_true)),
      covariance_(covariance),
      noise_variance_(noise_variance),
      ridge_(ridge) {
  const auto m = w_true_.size();
  if (m == 0) throw InvalidArgument("model dimension must be positive");
  if (covariance_.rows() != m || covariance_.cols() != m) {
    throw InvalidArgument("feature covariance must be " + std::to_string(m) + "x" +
                          std::to_string(m));
  }
  if (!covariance_.isApprox(covariance_.transpose())) {
    throw InvalidArgument("feature covariance must be symmetric");
  }
  Eigen::LLT<Eigen::MatrixXd> llt(covariance_);
  if (llt.info() != Eigen::Success) {
    throw InvalidArgument("feature covariance must be positive definite");
  }
  factor_ = llt.matrixL();
  const double d0 = covariance_(0, 0);
  if (covariance_.isApprox(d0 * Eigen::MatrixXd::Identity(m, m), 0.0)) {
    isotropic_sd_ = std::sqrt(d0);
  }
  if (!(noise_variance_ >= 0.0)) throw InvalidArgument("noise variance must be nonnegative");
  if (!(ridge_ >= 0.0)) throw InvalidArgument("ridge must be nonnegative");
}

AgentModel AgentModel::mse(Eigen::VectorXd w_true, const Eigen::MatrixXd& feature_covariance,
                           double noise_variance) {
  return AgentModel(CostKind::mse, std::move(w_true), feature_covariance, noise_variance, 0.0);
}

AgentModel AgentModel::mse(Eigen::VectorXd w_true, double feature_variance, double noise_variance) {
  if (!(feature_variance > 0.0)) throw InvalidArgument("feature variance must be positive");
  const auto m = w_true.size();
  return mse(std::move(w_true), feature_variance * Eigen::MatrixXd::Identity(m, m), noise_variance);
}

AgentModel AgentModel::logistic(Eigen::VectorXd w_true, const Eigen::MatrixXd& feature_covariance,
                                double ridge) {
  return AgentModel(CostKind::logistic, std::move(w_true), feature_covariance, 0.0, ridge);
}

AgentModel AgentModel::logistic(Eigen::VectorXd w_true, double feature_variance, double ridge) {
  if (!(feature_variance > 0.0)) throw InvalidArgument("feature variance must be positive");
  const auto m = w_true.size();
  return logistic(std::move(w_true), feature_variance * Eigen::MatrixXd::Identity(m, m), ridge);
}

void AgentModel::draw_features(AgentStream& stream, Eigen::VectorXd& out) const {
  const auto m = w_true_.size();
  out.resize(m);
  for (Eigen::Index i = 0; i < m; ++i) out[i] = stream.normal();
  if (isotropic_sd_) {
    out *= *isotropic_sd_;
  } else {
    out = factor_.triangularView<Eigen::Lower>() * out;
  }
}

// ---------------------------------------------------------------------------

std::size_t ModelEnsemble::dimension() const {
  if (agents.empty()) throw InvalidArgument("empty model ensemble");
  return agents.front().dimension();
}

std::vector<Eigen::VectorXd> ModelEnsemble::true_models() const {
  std::vector<Eigen::VectorXd> out;
  out.reserve(agents.size());
  for (const auto& a : agents) out.push_back(a.w_true());
  return out;
}

void ModelEnsemble::validate() const {
  const auto m = dimension();
  for (std::size_t k = 0; k < agents.size(); ++k) {
    if (agents[k].dimension() != m) {
      throw InvalidArgument("agent " + std::to_string(k) + " has dimension " +
                            std::to_string(agents[k].dimension()) + ", expected " +
                            std::to_string(m));
    }
  }
}

namespace {

struct Variances {
  double feature;
  double noise;
};

std::vector<Variances> draw_variances(std::size_t agents, std::uint64_t seed,
                                      const VarianceRanges& ranges) {
  if (!(ranges.feature_lo > 0.0) || ranges.feature_hi < ranges.feature_lo ||
      ranges.noise_lo < 0.0 || ranges.noise_hi < ranges.noise_lo) {
    throw InvalidArgument("invalid variance ranges");
  }
  AgentStream stream(seed, 0, 0, StreamPurpose::model_generation);
  std::vector<Variances> out(agents);
  for (auto& v : out) {
    v.feature = ranges.feature_lo + (ranges.feature_hi - ranges.feature_lo) * stream.uniform();
    v.noise = ranges.noise_lo + (ranges.noise_hi - ranges.noise_lo) * stream.uniform();
  }
  return out;
}

}  // namespace

ModelEnsemble generate_sparse_models(std::size_t agents, std::size_t dimension, std::uint64_t seed,
                                     const VarianceRanges& ranges) {
  if (agents == 0 || dimension == 0) throw InvalidArgument("agents and dimension must be positive");
  const auto variances = draw_variances(agents, seed, ranges);
  AgentStream stream(seed, 0, 1, StreamPurpose::model_generation);
  Eigen::VectorXd center(dimension);
  for (std::size_t m = 0; m < dimension; ++m) center[m] = stream.normal();

  ModelEnsemble ensemble;
  ensemble.mode = ConstructionMode::sparse_differences;
  ensemble.center = center;
  for (std::size_t k = 0; k < agents; ++k) {
    Eigen::VectorXd w = center;
    const auto entry = k % dimension;
    w[entry] += (k / dimension) % 2 == 0 ? 1.0 : -1.0;
    ensemble.agents.push_back(AgentModel::mse(std::move(w), variances[k].feature, variances[k].noise));
  }
  return ensemble;
}

Eigen::MatrixXd smooth_over_graph(const Network& network, const Eigen::MatrixXd& draws,
                                  double tau) {
  if (!(tau > 0.0)) throw InvalidArgument("smoothness tau must be positive");
  const auto k = network.size();
  if (draws.rows() != static_cast<Eigen::Index>(k)) {
    throw InvalidArgument("draw matrix must have one row per agent");
  }
  const Eigen::MatrixXd op = Eigen::MatrixXd::Identity(k, k) + tau * laplacian(network);
  return op.ldlt().solve(draws);
}

double laplacian_quadratic_form(const Network& network, const Eigen::MatrixXd& models) {
  const Eigen::MatrixXd lap = laplacian(network);
  return (models.transpose() * lap * models).trace();
}

ModelEnsemble generate_smooth_models(const Network& network, std::size_t dimension, double tau,
                                     std::uint64_t seed, const VarianceRanges& ranges) {
  if (dimension == 0) throw InvalidArgument("dimension must be positive");
  if (!(tau > 0.0)) throw InvalidArgument("smoothness tau must be positive");
  const auto k = network.size();
  const auto variances = draw_variances(k, seed, ranges);
  AgentStream stream(seed, 0, 1, StreamPurpose::model_generation);
  Eigen::MatrixXd draws(k, dimension);
  for (std::size_t a = 0; a < k; ++a) {
    for (std::size_t m = 0; m < dimension; ++m) draws(a, m) = stream.normal();
  }
  const Eigen::MatrixXd smooth = smooth_over_graph(network, draws, tau);

  ModelEnsemble ensemble;
  ensemble.mode = ConstructionMode::smooth_graph;
  for (std::size_t a = 0; a < k; ++a) {
    ensemble.agents.push_back(AgentModel::mse(smooth.row(a).transpose(), variances[a].feature,
                                              variances[a].noise));
  }
  return ensemble;
}

ModelEnsemble as_logistic(const ModelEnsemble& ensemble, double ridge) {
  ModelEnsemble out;
  out.mode = ensemble.mode;
  out.center = ensemble.center;
  for (const auto& a : ensemble.agents) {
    out.agents.push_back(AgentModel::logistic(a.w_true(), a.feature_covariance(), ridge));
  }
  return out;
}

// ---------------------------------------------------------------------------

double logistic_tail(double t) noexcept {
  if (t > 0.0) {
    const double e = std::exp(-t);
    return e / (1.0 + e);
  }
  return 1.0 / (1.0 + std::exp(t));
}

double softplus(double t) noexcept {
  if (t > 0.0) return t + std::log1p(std::exp(-t));
  return std::log1p(std::exp(t));
}

void draw_sample(const AgentModel& model, AgentStream& stream, Sample& out) {
  model.draw_features(stream, out.x);
  const double margin = out.x.dot(model.w_true());
  if (model.kind() == CostKind::mse) {
    const double noise = stream.normal() * std::sqrt(model.noise_variance());
    out.y = margin + noise;
  } else {
    // P(label = +1) = 1 / (1 + exp(-margin))
    out.y = stream.uniform() < logistic_tail(-margin) ? 1.0 : -1.0;
  }
}

Sample mse_sample(const AgentModel& model, AgentStream& stream) {
  if (model.kind() != CostKind::mse) throw InvalidArgument("mse_sample needs an MSE model");
  Sample s;
  draw_sample(model, stream, s);
  return s;
}

Sample logistic_sample(const AgentModel& model, AgentStream& stream) {
  if (model.kind() != CostKind::logistic) {
    throw InvalidArgument("logistic_sample needs a logistic model");
  }
  Sample s;
  draw_sample(model, stream, s);
  return s;
}

Eigen::VectorXd mse_stochastic_gradient(const Eigen::VectorXd& w, const Sample& sample) {
  if (w.size() != sample.x.size()) throw InvalidArgument("dimension mismatch");
  return -(sample.y - sample.x.dot(w)) * sample.x;
}

Eigen::VectorXd mse_true_gradient(const Eigen::VectorXd& w, const AgentModel& model) {
  if (model.kind() != CostKind::mse) throw InvalidArgument("mse_true_gradient needs an MSE model");
  return model.feature_covariance() * (w - model.w_true());
}

double mse_risk(const Eigen::VectorXd& w, const AgentModel& model) {
  const Eigen::VectorXd e = w - model.w_true();
  return 0.5 * (e.dot(model.feature_covariance() * e) + model.noise_variance());
}

Eigen::VectorXd logistic_stochastic_gradient(const Eigen::VectorXd& w, const Sample& sample,
                                             double rho) {
  if (w.size() != sample.x.size()) throw InvalidArgument("dimension mismatch");
  const double t = sample.y * sample.x.dot(w);
  return rho * w - (sample.y * logistic_tail(t)) * sample.x;
}

double logistic_loss(const Eigen::VectorXd& w, const Sample& sample, double rho) {
  return softplus(-sample.y * sample.x.dot(w)) + 0.5 * rho * w.squaredNorm();
}

Eigen::VectorXd logistic_hessian_vector(const Eigen::VectorXd& w, const Sample& sample, double rho,
                                        const Eigen::VectorXd& v) {
  const double t = sample.y * sample.x.dot(w);
  const double s = logistic_tail(t);
  return (s * (1.0 - s) * sample.x.dot(v)) * sample.x + rho * v;
}

void stochastic_gradient(const AgentModel& model, const Eigen::VectorXd& w, const Sample& sample,
                         Eigen::VectorXd& out) {
  if (model.kind() == CostKind::mse) {
    out = -(sample.y - sample.x.dot(w)) * sample.x;
  } else {
    const double t = sample.y * sample.x.dot(w);
    out = model.ridge() * w - (sample.y * logistic_tail(t)) * sample.x;
  }
}

}  // namespace mtgraph
