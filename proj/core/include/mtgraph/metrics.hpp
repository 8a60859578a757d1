#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "mtgraph/cost_models.hpp"
#include "mtgraph/solver.hpp"

namespace mtgraph {

enum class ReferenceKind { regularized_solution, local_models };

/// Network MSD per iteration, averaged over agents and Monte-Carlo runs.
/// values[i - 1] is the MSD after iteration i.
struct LearningCurve {
  std::vector<double> values;
  std::size_t n_runs = 0;
  ReferenceKind reference_kind = ReferenceKind::regularized_solution;
};

/// Splits a stacked KM vector into K blocks of size M.
std::vector<Eigen::VectorXd> split_blocks(const Eigen::VectorXd& stacked, std::size_t agents);

/// Streams one run and records (1/K) sum_k |reference_k - w_{k,i}|^2 per iteration.
class MsdRecorder {
 public:
  MsdRecorder(std::vector<Eigen::VectorXd> reference, std::size_t iterations);

  void operator()(std::size_t iteration, std::span<const Eigen::VectorXd> estimates,
                  std::span<const Eigen::VectorXd> intermediates);
  const std::vector<double>& values() const noexcept { return values_; }
  std::vector<double> take() { return std::move(values_); }

 private:
  std::vector<Eigen::VectorXd> reference_;
  std::vector<double> values_;
};

/// Averages per-run curves in run order (deterministic summation).
LearningCurve average_runs(const std::vector<std::vector<double>>& per_run, ReferenceKind kind);

LearningCurve msd_curve(std::span<const Trajectory> runs, const Eigen::VectorXd& reference);
LearningCurve msd_loc_curve(std::span<const Trajectory> runs, const ModelEnsemble& ensemble);

/// 10 log10 of the mean of the last `window` values.
double steady_state_db(const LearningCurve& curve, std::size_t window = 200);
double steady_state_db(std::span<const double> values, std::size_t window = 200);

struct SteadyStateCheck {
  double db = 0.0;
  double first_half_db = 0.0;
  double second_half_db = 0.0;
  bool converged = false;  ///< half windows within tolerance_db
};

/// steady_state_db plus the comparison of the two halves of the window.
SteadyStateCheck check_steady_state(std::span<const double> values, std::size_t window = 200,
                                    double tolerance_db = 0.2);

/// Running mean of the last `window` iterates of every agent.
class TailAverager {
 public:
  TailAverager(std::size_t iterations, std::size_t window);

  void operator()(std::size_t iteration, std::span<const Eigen::VectorXd> estimates,
                  std::span<const Eigen::VectorXd> intermediates);
  std::vector<Eigen::VectorXd> average() const;

 private:
  std::size_t first_;
  std::size_t count_ = 0;
  std::vector<Eigen::VectorXd> sum_;
};

/// Fraction of test samples misclassified by sign(h^T w_k), averaged over
/// agents. A zero score counts as an error.
double prediction_error(std::span<const Eigen::VectorXd> weights,
                        const std::vector<std::vector<Sample>>& test_set);

}  // namespace mtgraph
