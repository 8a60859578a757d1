#include "mtgraph/metrics.hpp"

#include <cmath>
#include <string>

#include "mtgraph/errors.hpp"

namespace mtgraph {

std::vector<Eigen::VectorXd> split_blocks(const Eigen::VectorXd& stacked, std::size_t agents) {
  if (agents == 0 || stacked.size() % static_cast<Eigen::Index>(agents) != 0) {
    throw InvalidArgument("stacked vector length is not a multiple of the agent count");
  }
  const auto m = stacked.size() / static_cast<Eigen::Index>(agents);
  std::vector<Eigen::VectorXd> out;
  for (std::size_t k = 0; k < agents; ++k) {
    out.push_back(stacked.segment(static_cast<Eigen::Index>(k) * m, m));
  }
  return out;
}

MsdRecorder::MsdRecorder(std::vector<Eigen::VectorXd> reference, std::size_t iterations)
    : reference_(std::move(reference)) {
  if (reference_.empty()) throw InvalidArgument("empty reference");
  values_.reserve(iterations);
}

void MsdRecorder::operator()(std::size_t iteration, std::span<const Eigen::VectorXd> estimates,
                             std::span<const Eigen::VectorXd>) {
  if (iteration == 0) return;
  if (estimates.size() != reference_.size()) {
    throw InvalidArgument("reference has " + std::to_string(reference_.size()) +
                          " blocks but the run has " + std::to_string(estimates.size()) + " agents");
  }
  double sum = 0.0;
  for (std::size_t k = 0; k < estimates.size(); ++k) {
    if (estimates[k].size() != reference_[k].size()) {
      throw InvalidArgument("reference block dimension mismatch");
    }
    sum += (reference_[k] - estimates[k]).squaredNorm();
  }
  values_.push_back(sum / static_cast<double>(estimates.size()));
}

LearningCurve average_runs(const std::vector<std::vector<double>>& per_run, ReferenceKind kind) {
  if (per_run.empty()) throw InvalidArgument("no runs to average");
  const auto n = per_run.front().size();
  LearningCurve curve;
  curve.reference_kind = kind;
  curve.n_runs = per_run.size();
  curve.values.assign(n, 0.0);
  for (const auto& run : per_run) {
    if (run.size() != n) throw InvalidArgument("runs have different lengths");
    for (std::size_t i = 0; i < n; ++i) curve.values[i] += run[i];
  }
  for (auto& v : curve.values) v /= static_cast<double>(per_run.size());
  return curve;
}

namespace {

LearningCurve curve_against(std::span<const Trajectory> runs,
                            const std::vector<Eigen::VectorXd>& reference, ReferenceKind kind) {
  if (runs.empty()) throw InvalidArgument("no runs");
  std::vector<std::vector<double>> per_run;
  for (const auto& traj : runs) {
    if (traj.iterations() != runs.front().iterations()) {
      throw InvalidArgument("runs have different lengths");
    }
    MsdRecorder rec(reference, traj.iterations());
    for (std::size_t i = 0; i < traj.estimates.size(); ++i) rec(i, traj.estimates[i], {});
    per_run.push_back(rec.take());
  }
  return average_runs(per_run, kind);
}

}  // namespace

LearningCurve msd_curve(std::span<const Trajectory> runs, const Eigen::VectorXd& reference) {
  if (runs.empty()) throw InvalidArgument("no runs");
  const auto k = runs.front().agents();
  if (static_cast<std::size_t>(reference.size()) != k * runs.front().dimension()) {
    throw InvalidArgument("reference length does not match K * M");
  }
  return curve_against(runs, split_blocks(reference, k), ReferenceKind::regularized_solution);
}

LearningCurve msd_loc_curve(std::span<const Trajectory> runs, const ModelEnsemble& ensemble) {
  return curve_against(runs, ensemble.true_models(), ReferenceKind::local_models);
}

double steady_state_db(std::span<const double> values, std::size_t window) {
  if (window == 0) throw InvalidArgument("window must be positive");
  if (values.size() <= window) {
    throw InvalidArgument("curve of length " + std::to_string(values.size()) +
                          " is not longer than the window " + std::to_string(window));
  }
  double sum = 0.0;
  for (std::size_t i = values.size() - window; i < values.size(); ++i) {
    if (!(values[i] > 0.0)) throw InvalidArgument("nonpositive value in steady-state window");
    sum += values[i];
  }
  return 10.0 * std::log10(sum / static_cast<double>(window));
}

double steady_state_db(const LearningCurve& curve, std::size_t window) {
  return steady_state_db(std::span<const double>(curve.values), window);
}

SteadyStateCheck check_steady_state(std::span<const double> values, std::size_t window,
                                    double tolerance_db) {
  SteadyStateCheck out;
  out.db = steady_state_db(values, window);
  const auto half = window / 2;
  if (half == 0) throw InvalidArgument("window too small to split");
  const auto tail = values.subspan(values.size() - window);
  auto mean_db = [](std::span<const double> part) {
    double s = 0.0;
    for (double v : part) s += v;
    return 10.0 * std::log10(s / static_cast<double>(part.size()));
  };
  out.first_half_db = mean_db(tail.first(half));
  out.second_half_db = mean_db(tail.subspan(half));
  out.converged = std::fabs(out.first_half_db - out.second_half_db) < tolerance_db;
  return out;
}

TailAverager::TailAverager(std::size_t iterations, std::size_t window) {
  if (window == 0) throw InvalidArgument("window must be positive");
  first_ = iterations >= window ? iterations - window + 1 : 1;
}

void TailAverager::operator()(std::size_t iteration, std::span<const Eigen::VectorXd> estimates,
                              std::span<const Eigen::VectorXd>) {
  if (iteration < first_) return;
  if (sum_.empty()) {
    sum_.assign(estimates.begin(), estimates.end());
  } else {
    for (std::size_t k = 0; k < estimates.size(); ++k) sum_[k] += estimates[k];
  }
  ++count_;
}

std::vector<Eigen::VectorXd> TailAverager::average() const {
  if (count_ == 0) throw InvalidArgument("no iterates averaged");
  std::vector<Eigen::VectorXd> out = sum_;
  for (auto& v : out) v /= static_cast<double>(count_);
  return out;
}

double prediction_error(std::span<const Eigen::VectorXd> weights,
                        const std::vector<std::vector<Sample>>& test_set) {
  if (weights.size() != test_set.size() || weights.empty()) {
    throw InvalidArgument("need one weight vector per agent test stream");
  }
  double total = 0.0;
  for (std::size_t k = 0; k < weights.size(); ++k) {
    const auto& stream = test_set[k];
    if (stream.empty()) throw InvalidArgument("agent " + std::to_string(k) + " has an empty test set");
    std::size_t wrong = 0;
    for (const auto& s : stream) {
      const double score = s.x.dot(weights[k]);
      const double predicted = score > 0.0 ? 1.0 : (score < 0.0 ? -1.0 : 0.0);
      if (predicted != s.y) ++wrong;
    }
    total += static_cast<double>(wrong) / static_cast<double>(stream.size());
  }
  return total / static_cast<double>(weights.size());
}

}  // namespace mtgraph
