#include "mtgraph/reference.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "mtgraph/errors.hpp"
#include "mtgraph/random.hpp"

namespace mtgraph {

namespace {

class MseCosts final : public SmoothCosts {
 public:
  explicit MseCosts(const ModelEnsemble& ensemble) : ensemble_(&ensemble) {
    ensemble.validate();
    for (const auto& a : ensemble.agents) {
      if (a.kind() != CostKind::mse) throw InvalidArgument("MSE costs need MSE agents");
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(a.feature_covariance(),
                                                        Eigen::EigenvaluesOnly);
      lipschitz_.push_back(es.eigenvalues().maxCoeff());
    }
  }

  std::size_t agents() const override { return ensemble_->size(); }
  std::size_t dimension() const override { return ensemble_->dimension(); }
  double value(std::size_t k, const Eigen::VectorXd& w) const override {
    return mse_risk(w, ensemble_->agents[k]);
  }
  void gradient(std::size_t k, const Eigen::VectorXd& w, Eigen::VectorXd& out) const override {
    const auto& a = ensemble_->agents[k];
    out.noalias() = a.feature_covariance() * (w - a.w_true());
  }
  double lipschitz(std::size_t k) const override { return lipschitz_[k]; }
  Eigen::VectorXd starting_point(std::size_t k) const override {
    return ensemble_->agents[k].w_true();
  }

 private:
  const ModelEnsemble* ensemble_;
  std::vector<double> lipschitz_;
};

class LogisticSurrogate final : public SmoothCosts {
 public:
  LogisticSurrogate(const ModelEnsemble& ensemble, std::size_t samples, std::uint64_t seed)
      : ensemble_(&ensemble), samples_(samples), seed_(seed) {
    ensemble.validate();
    if (samples == 0) throw InvalidArgument("surrogate needs at least one sample");
    for (const auto& a : ensemble.agents) {
      if (a.kind() != CostKind::logistic) {
        throw InvalidArgument("logistic surrogate needs logistic agents");
      }
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(a.feature_covariance(),
                                                        Eigen::EigenvaluesOnly);
      // sample second moments may exceed R; backtracking absorbs the rest
      lipschitz_.push_back(0.25 * 2.0 * es.eigenvalues().maxCoeff() + a.ridge());
    }
  }

  std::size_t agents() const override { return ensemble_->size(); }
  std::size_t dimension() const override { return ensemble_->dimension(); }

  double value(std::size_t k, const Eigen::VectorXd& w) const override {
    const auto& a = ensemble_->agents[k];
    AgentStream stream(seed_, 0, k, StreamPurpose::surrogate);
    Sample s;
    long double sum = 0.0L;
    for (std::size_t n = 0; n < samples_; ++n) {
      draw_sample(a, stream, s);
      sum += softplus(-s.y * s.x.dot(w));
    }
    return static_cast<double>(sum / samples_) + 0.5 * a.ridge() * w.squaredNorm();
  }

  void gradient(std::size_t k, const Eigen::VectorXd& w, Eigen::VectorXd& out) const override {
    const auto& a = ensemble_->agents[k];
    AgentStream stream(seed_, 0, k, StreamPurpose::surrogate);
    Sample s;
    out = Eigen::VectorXd::Zero(w.size());
    for (std::size_t n = 0; n < samples_; ++n) {
      draw_sample(a, stream, s);
      out -= (s.y * logistic_tail(s.y * s.x.dot(w))) * s.x;
    }
    out /= static_cast<double>(samples_);
    out += a.ridge() * w;
  }

  double lipschitz(std::size_t k) const override { return lipschitz_[k]; }

 private:
  const ModelEnsemble* ensemble_;
  std::size_t samples_;
  std::uint64_t seed_;
  std::vector<double> lipschitz_;
};

// Per-unit-weight shape of f(s) = a|s| + (b/2) s^2.
struct PenaltyShape {
  double a = 0.0;
  double b = 0.0;
};

PenaltyShape penalty_shape(const Regularizer& reg) {
  switch (reg.kind) {
    case Regularizer::Kind::l1:
      return {1.0, 0.0};
    case Regularizer::Kind::elastic_net:
      return {1.0, reg.beta};
    case Regularizer::Kind::squared_l2:
      return {0.0, 2.0};
    case Regularizer::Kind::reweighted_l1:
    case Regularizer::Kind::l0:
      break;
  }
  throw InvalidArgument("reference solution is only defined for l1, elastic_net and squared_l2, not " +
                        std::string(to_string(reg.kind)));
}

double penalty_value(const PenaltyShape& f, double s) {
  return f.a * std::fabs(s) + 0.5 * f.b * s * s;
}

// h(s) + h*(z) - z s for h(s) = a|s| + (b/2)s^2, arranged to avoid cancellation.
double fenchel_gap(double s, double z, double a, double b) {
  const double as = std::fabs(s);
  const double az = std::fabs(z);
  if (az <= a) {
    const double zs = s >= 0.0 ? z : -z;
    return as * (a - zs) + 0.5 * b * s * s;
  }
  if (b <= 0.0) return std::numeric_limits<double>::infinity();
  const double r = az - a;
  if (s == 0.0 || (s > 0.0) == (z > 0.0)) {
    const double d = b * as - r;
    return d * d / (2.0 * b);
  }
  return a * as + 0.5 * b * s * s + r * r / (2.0 * b) + (a + r) * as;
}

double dual_update(double y, double a, double b) {
  if (std::fabs(y) <= a) return y;
  if (b <= 0.0) return y > 0.0 ? a : -a;
  const double mag = (2.0 * b * std::fabs(y) + a) / (2.0 * b + 1.0);
  return y > 0.0 ? mag : -mag;
}

using Blocks = std::vector<Eigen::VectorXd>;

// Prox of x -> sum_e h_e(x_k - x_l) at v, coordinate-wise, by cyclic dual
// coordinate ascent. z holds one M-vector per edge and is warm-started.
// Returns the certified distance bound sqrt(2 * duality gap).
double coupled_prox(const Blocks& v, const std::vector<Edge>& edges, const std::vector<double>& a,
                    const std::vector<double>& b, Blocks& z, Blocks& x, std::size_t max_passes,
                    double target) {
  const auto dim = v.empty() ? 0 : v.front().size();
  auto rebuild = [&] {
    x = v;
    for (std::size_t e = 0; e < edges.size(); ++e) {
      x[edges[e].first] -= z[e];
      x[edges[e].second] += z[e];
    }
  };
  auto gap = [&] {
    double g = 0.0;
    for (std::size_t e = 0; e < edges.size(); ++e) {
      const auto& xk = x[edges[e].first];
      const auto& xl = x[edges[e].second];
      for (Eigen::Index m = 0; m < dim; ++m) g += fenchel_gap(xk[m] - xl[m], z[e][m], a[e], b[e]);
    }
    return std::sqrt(2.0 * std::max(g, 0.0));
  };

  rebuild();
  double bound = gap();
  for (std::size_t pass = 1; pass <= max_passes && bound > target; ++pass) {
    for (std::size_t e = 0; e < edges.size(); ++e) {
      auto& xk = x[edges[e].first];
      auto& xl = x[edges[e].second];
      auto& ze = z[e];
      for (Eigen::Index m = 0; m < dim; ++m) {
        const double y = ze[m] + 0.5 * (xk[m] - xl[m]);
        const double zn = dual_update(y, a[e], b[e]);
        const double d = zn - ze[m];
        ze[m] = zn;
        xk[m] -= d;
        xl[m] += d;
      }
    }
    if (pass % 8 == 0 || pass == max_passes) {
      rebuild();
      bound = gap();
    }
  }
  return bound;
}

// Min-norm element of grad + (eta/2) dR. `warm` optionally seeds the free
// subgradients of fused links (scaled like the dual variables divided by t).
double residual_impl(const Blocks& grad, const Network& network, double eta,
                     const PenaltyShape& f, const Blocks& w, double fuse_threshold,
                     const Blocks* warm) {
  const auto edges = network.edges();
  const auto dim = w.front().size();
  Blocks y = grad;

  struct Free {
    std::size_t edge;
    Eigen::Index m;
    double bound;
    double q;
  };
  std::vector<Free> free;
  for (std::size_t e = 0; e < edges.size(); ++e) {
    const auto k = edges[e].first;
    const auto l = edges[e].second;
    const double weight = eta * edges[e].p;
    if (weight == 0.0) continue;
    for (Eigen::Index m = 0; m < dim; ++m) {
      const double s = w[k][m] - w[l][m];
      double fixed = weight * f.b * s;
      if (f.a > 0.0) {
        if (std::fabs(s) > fuse_threshold) {
          fixed += weight * f.a * (s > 0.0 ? 1.0 : -1.0);
        } else {
          const double bound = weight * f.a;
          double q = 0.0;
          if (warm != nullptr) q = std::clamp((*warm)[e][m] - weight * f.b * s, -bound, bound);
          free.push_back({e, m, bound, q});
          y[k][m] += q;
          y[l][m] -= q;
        }
      }
      y[k][m] += fixed;
      y[l][m] -= fixed;
    }
  }

  // projected coordinate descent on the box QP over the free subgradients
  for (std::size_t pass = 0; pass < 100000 && !free.empty(); ++pass) {
    double change = 0.0;
    double scale = 0.0;
    for (auto& fr : free) {
      const auto k = edges[fr.edge].first;
      const auto l = edges[fr.edge].second;
      const double qn = std::clamp(fr.q - 0.5 * (y[k][fr.m] - y[l][fr.m]), -fr.bound, fr.bound);
      const double d = qn - fr.q;
      if (d != 0.0) {
        fr.q = qn;
        y[k][fr.m] += d;
        y[l][fr.m] -= d;
      }
      change = std::max(change, std::fabs(d));
      scale = std::max(scale, fr.bound);
    }
    if (change <= 1e-15 * scale) break;
  }

  double sq = 0.0;
  for (const auto& yk : y) sq += yk.squaredNorm();
  return std::sqrt(sq);
}

double max_abs(const Blocks& w) {
  double m = 0.0;
  for (const auto& b : w) m = std::max(m, b.cwiseAbs().maxCoeff());
  return m;
}

void check_blocks(const SmoothCosts& costs, const Network& network, const Blocks& blocks) {
  if (costs.agents() != network.size() || blocks.size() != network.size()) {
    throw InvalidArgument("agent count mismatch between network, costs and estimates");
  }
  for (const auto& b : blocks) {
    if (static_cast<std::size_t>(b.size()) != costs.dimension()) {
      throw InvalidArgument("block dimension mismatch");
    }
  }
}

}  // namespace

std::unique_ptr<SmoothCosts> mse_population_costs(const ModelEnsemble& ensemble) {
  return std::make_unique<MseCosts>(ensemble);
}

std::unique_ptr<SmoothCosts> logistic_surrogate_costs(const ModelEnsemble& ensemble,
                                                      std::size_t samples, std::uint64_t seed) {
  return std::make_unique<LogisticSurrogate>(ensemble, samples, seed);
}

Eigen::VectorXd ReferenceSolution::stacked() const {
  Eigen::Index total = 0;
  for (const auto& b : blocks) total += b.size();
  Eigen::VectorXd out(total);
  Eigen::Index at = 0;
  for (const auto& b : blocks) {
    out.segment(at, b.size()) = b;
    at += b.size();
  }
  return out;
}

double global_objective(const SmoothCosts& costs, const Network& network, double eta,
                        const Regularizer& regularizer, const Blocks& blocks) {
  check_blocks(costs, network, blocks);
  const auto f = penalty_shape(regularizer);
  double total = 0.0;
  for (std::size_t k = 0; k < blocks.size(); ++k) total += costs.value(k, blocks[k]);
  if (eta == 0.0) return total;
  double penalty = 0.0;
  for (const auto& e : network.edges()) {
    const Eigen::VectorXd d = blocks[e.first] - blocks[e.second];
    double sum = 0.0;
    for (Eigen::Index m = 0; m < d.size(); ++m) sum += penalty_value(f, d[m]);
    penalty += e.p * sum;
  }
  return total + eta * penalty;
}

double optimality_residual(const SmoothCosts& costs, const Network& network, double eta,
                           const Regularizer& regularizer, const Blocks& blocks,
                           double fuse_threshold) {
  check_blocks(costs, network, blocks);
  const auto f = penalty_shape(regularizer);
  Blocks grad(blocks.size());
  for (std::size_t k = 0; k < blocks.size(); ++k) costs.gradient(k, blocks[k], grad[k]);
  return residual_impl(grad, network, eta, f, blocks, fuse_threshold, nullptr);
}

ReferenceSolution solve_reference(const Network& network, const SmoothCosts& costs, double eta,
                                  const Regularizer& regularizer, const ReferenceOptions& options) {
  regularizer.validate();
  const auto f = penalty_shape(regularizer);
  if (!(eta >= 0.0) || !std::isfinite(eta)) throw InvalidArgument("eta must be nonnegative");
  if (!(options.tolerance > 0.0)) throw InvalidArgument("tolerance must be positive");
  const auto agents = network.size();
  if (costs.agents() != agents) throw InvalidArgument("agent count mismatch");
  const auto dim = static_cast<Eigen::Index>(costs.dimension());
  const auto edges = network.edges();

  double lipschitz = 0.0;
  for (std::size_t k = 0; k < agents; ++k) lipschitz = std::max(lipschitz, costs.lipschitz(k));
  double t = 1.0 / lipschitz;

  Blocks x(agents);
  for (std::size_t k = 0; k < agents; ++k) x[k] = costs.starting_point(k);
  Blocks grad(agents);
  double smooth = 0.0;
  for (std::size_t k = 0; k < agents; ++k) {
    smooth += costs.value(k, x[k]);
    costs.gradient(k, x[k], grad[k]);
  }

  ReferenceSolution sol;
  const double fuse_base = 1e-9;
  double best = residual_impl(grad, network, eta, f, x, fuse_base * (1.0 + max_abs(x)), nullptr);
  Blocks best_x = x;
  if (best <= options.tolerance) {
    sol.blocks = x;
    sol.residual = best;
    return sol;
  }

  Blocks z(edges.size(), Eigen::VectorXd::Zero(dim));
  Blocks v(agents), xn(agents), grad_n(agents);
  std::vector<double> a(edges.size()), b(edges.size());
  double t_used = t;

  for (std::size_t it = 1; it <= options.max_outer_iterations; ++it) {
    double bound = 0.0;
    double smooth_n = 0.0;
    for (int attempt = 0;; ++attempt) {
      if (t != t_used) {
        for (auto& ze : z) ze *= t / t_used;
        t_used = t;
      }
      for (std::size_t e = 0; e < edges.size(); ++e) {
        a[e] = t * eta * edges[e].p * f.a;
        b[e] = t * eta * edges[e].p * f.b;
      }
      for (std::size_t k = 0; k < agents; ++k) v[k] = x[k] - t * grad[k];
      bound = coupled_prox(v, edges, a, b, z, xn, options.max_inner_passes,
                           t * options.tolerance / 10.0);

      smooth_n = 0.0;
      double lin = 0.0;
      double sq = 0.0;
      for (std::size_t k = 0; k < agents; ++k) {
        smooth_n += costs.value(k, xn[k]);
        const Eigen::VectorXd d = xn[k] - x[k];
        lin += grad[k].dot(d);
        sq += d.squaredNorm();
      }
      const double slack = 1e-13 * (1.0 + std::fabs(smooth));
      if (smooth_n <= smooth + lin + sq / (2.0 * t) + slack || attempt >= 60) break;
      t *= 0.5;
    }

    x.swap(xn);
    smooth = smooth_n;
    for (std::size_t k = 0; k < agents; ++k) costs.gradient(k, x[k], grad[k]);

    double penalty = 0.0;
    for (const auto& e : edges) {
      double sum = 0.0;
      for (Eigen::Index m = 0; m < dim; ++m) sum += penalty_value(f, x[e.first][m] - x[e.second][m]);
      penalty += e.p * sum;
    }
    sol.objective_history.push_back(smooth + eta * penalty);

    Blocks warm(edges.size());
    for (std::size_t e = 0; e < edges.size(); ++e) warm[e] = z[e] / t;
    const double threshold = fuse_base * (1.0 + max_abs(x)) + 4.0 * bound;
    const double residual = residual_impl(grad, network, eta, f, x, threshold, &warm);
    if (residual < best) {
      best = residual;
      best_x = x;
    }
    if (residual <= options.tolerance) {
      sol.blocks = std::move(x);
      sol.residual = residual;
      sol.iterations = it;
      return sol;
    }
  }
  throw ConvergenceFailure("reference solver did not reach tolerance " +
                               std::to_string(options.tolerance) + " (best residual " +
                               std::to_string(best) + ")",
                           best);
}

ReferenceSolution solve_reference(const Network& network, const ModelEnsemble& ensemble, double eta,
                                  const Regularizer& regularizer, const ReferenceOptions& options) {
  penalty_shape(regularizer);
  ensemble.validate();
  if (ensemble.agents.front().kind() == CostKind::mse) {
    return solve_reference(network, *mse_population_costs(ensemble), eta, regularizer, options);
  }
  return solve_reference(
      network, *logistic_surrogate_costs(ensemble, options.surrogate_samples, options.surrogate_seed),
      eta, regularizer, options);
}

}  // namespace mtgraph
