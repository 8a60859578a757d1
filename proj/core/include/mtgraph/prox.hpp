#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

namespace mtgraph {

/// One weighted term c * f(x - b) of a scalar co-regularizer.
struct Anchor {
  double b = 0.0;
  double c = 0.0;
};

/// Scalar proximal subproblem: prox of gamma * sum_j c_j f(x - b_j).
///
/// `f` is |t| + (beta/2) t^2 for the elastic-net family (beta = 0 gives l1)
/// and the l0 indicator lambda * [t != 0] for the l0 family.
struct ProxProblem {
  std::vector<Anchor> anchors;  ///< strictly increasing b, positive c
  double gamma = 1.0;
  double beta = 0.0;
  double lambda = 1.0;

  /// Sorts anchors by position and merges coincident positions by summing
  /// their coefficients, then validates.
  static ProxProblem make(std::vector<Anchor> anchors, double gamma, double beta = 0.0,
                          double lambda = 1.0);

  /// Throws InvalidArgument unless anchors are strictly increasing with
  /// positive coefficients, gamma > 0, beta >= 0 and lambda > 0.
  void validate() const;
};

/// Half-open interval [lo, hi).
struct Interval {
  double lo = 0.0;
  double hi = 0.0;
};

/// The J + 1 pieces on which the elastic-net-sum prox is affine or constant.
///
/// `head_end` closes ]-inf, head_end[. For anchor n, `at_anchor[n]` is the
/// range of v mapped exactly onto b_n and `after_anchor[n]` the range mapped
/// into ]b_n, b_{n+1}[ (the last one extends to +inf).
struct ProxPartition {
  double head_end = 0.0;
  std::vector<Interval> at_anchor;
  std::vector<Interval> after_anchor;
};

ProxPartition elastic_net_partition(const ProxProblem& problem);

/// Unique minimizer of sum_j c_j(|x - b_j| + beta/2 (x - b_j)^2) + (x - v)^2 / (2 gamma).
double prox_elastic_net_sum(double v, const ProxProblem& problem);

/// prox_elastic_net_sum with beta forced to zero.
double prox_l1_sum(double v, const ProxProblem& problem);

struct ProxResult {
  std::vector<double> values;  ///< every global minimizer, ascending
  double selected = 0.0;       ///< smallest |x|, then smallest x
};

/// All minimizers of sum_j c_j lambda [x != b_j] + (x - v)^2 / (2 gamma).
///
/// Only the candidates {v} and {b_j} can be optimal. Two candidates tie when
/// their objective values agree to within a few units in the last place of
/// the terms involved.
ProxResult prox_l0_sum(double v, const ProxProblem& problem);

/// Reweighted-l1 coefficients base_p / (epsilon + |delta_m|).
Eigen::VectorXd reweight_coefficients(const Eigen::VectorXd& delta, double base_p, double epsilon);

/// Co-regularizer family used in the social-learning step.
struct Regularizer {
  enum class Kind { l1, reweighted_l1, l0, elastic_net, squared_l2 };

  Kind kind = Kind::l1;
  double epsilon = 0.1;  ///< reweighted_l1
  double lambda = 1.0;   ///< l0
  double beta = 0.0;     ///< elastic_net

  static Regularizer l1() { return {Kind::l1}; }
  static Regularizer reweighted_l1(double epsilon) { return {Kind::reweighted_l1, epsilon}; }
  static Regularizer l0(double lambda) { return {Kind::l0, 0.1, lambda}; }
  static Regularizer elastic_net(double beta) { return {Kind::elastic_net, 0.1, 1.0, beta}; }
  static Regularizer squared_l2() { return {Kind::squared_l2}; }

  bool convex() const noexcept { return kind != Kind::l0; }
  void validate() const;
};

std::string_view to_string(Regularizer::Kind kind);
Regularizer::Kind parse_regularizer_kind(std::string_view name);

/// Short stable label, e.g. "l1", "reweighted_l1(eps=0.1)".
std::string describe(const Regularizer& regularizer);

/// A neighbor's intermediate estimate together with the link weight p_kl.
struct NeighborEstimate {
  const Eigen::VectorXd* psi = nullptr;
  double p = 0.0;
};

/// Reusable buffers for prox_social_step.
class SocialStepWorkspace {
 public:
  void reserve(std::size_t neighbors);

 private:
  friend void prox_social_step(const Eigen::VectorXd&, std::span<const NeighborEstimate>, double,
                               const Regularizer&, SocialStepWorkspace&, Eigen::VectorXd&);
  std::vector<double> b_;
  std::vector<double> c_;
};

/// Social-learning step: coordinate-wise prox of
/// step * sum_l p_kl f([x]_m - [psi_l]_m) evaluated at psi_k.
///
/// Reweighted-l1 coefficients are frozen from psi_k - psi_l before the prox.
/// For l0 the deterministic selector of prox_l0_sum is used. A zero step or
/// an empty neighborhood returns psi_k.
void prox_social_step(const Eigen::VectorXd& psi_k, std::span<const NeighborEstimate> neighbors,
                      double step, const Regularizer& regularizer, SocialStepWorkspace& workspace,
                      Eigen::VectorXd& out);

Eigen::VectorXd prox_social_step(const Eigen::VectorXd& psi_k,
                                 std::span<const NeighborEstimate> neighbors, double step,
                                 const Regularizer& regularizer);

namespace detail {

/// Closed-form elastic-net-sum prox on pre-sorted, merged anchors.
double prox_elastic_net_sorted(double v, std::span<const double> b, std::span<const double> c,
                               double gamma, double beta);

/// Deterministic l0 selector on merged anchors (any order).
double prox_l0_selected(double v, std::span<const double> b, std::span<const double> c,
                        double gamma, double lambda);

}  // namespace detail

}  // namespace mtgraph
