#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "mtgraph/cost_models.hpp"
#include "mtgraph/graph.hpp"
#include "mtgraph/metrics.hpp"
#include "mtgraph/prox.hpp"
#include "mtgraph/solver.hpp"

namespace mtgraph {

enum class ExperimentKind { theorem_illustration, eta_sweep_sparse, eta_sweep_smooth, weather, custom };

std::string_view to_string(ExperimentKind kind);

struct TopologySpec {
  enum class Type { random_knn, ring, file, points };

  Type type = Type::random_knn;
  std::size_t agents = 20;
  std::size_t k_neighbors = 3;
  std::string path;             ///< file
  std::vector<Point2> points;   ///< points
};

struct ModelSpec {
  enum class Type { sparse, smooth };
  enum class Family { mse, logistic };

  Type type = Type::sparse;
  Family family = Family::mse;
  std::size_t dimension = 10;
  double tau = 5.0;      ///< smooth only
  double ridge = 1e-5;   ///< logistic only
  VarianceRanges variances;
};

struct SweepSpec {
  std::vector<double> mu;
  std::vector<double> eta;               ///< used when eta_per_mu is unset
  std::optional<double> eta_per_mu;      ///< eta = eta_per_mu * mu
  std::size_t iterations = 3000;
  Initialization::Kind init = Initialization::Kind::zeros;
  GradientMode gradients = GradientMode::stochastic;
};

struct MetricSpec {
  ReferenceKind reference = ReferenceKind::local_models;
  std::size_t window = 200;
  double convergence_tolerance_db = 0.2;
  bool require_convergence = true;
  double reference_tolerance = 1e-8;
};

struct OutputSpec {
  std::string directory = "out";
  bool trajectories = false;  ///< per-run trajectory CSV + binary dumps
};

struct WeatherSpec {
  std::string path;
  std::size_t k_neighbors = 4;
  int train_first_year = 2004;
  int train_last_year = 2012;
  int test_first_year = 2013;
  int test_last_year = 2017;
  double mu = 5e-4;
  double ridge = 1e-5;
  std::size_t tail_window = 200;
};

/// Declarative description of one experiment, with every default resolved.
struct ExperimentConfig {
  ExperimentKind kind = ExperimentKind::custom;
  std::uint64_t seed = 1;
  std::size_t runs = 30;
  std::size_t runs_l0 = 400;  ///< Monte-Carlo runs for the l0 regularizer
  TopologySpec topology;
  ModelSpec models;
  SweepSpec solver;
  std::vector<Regularizer> regularizers;
  MetricSpec metrics;
  OutputSpec output;
  WeatherSpec weather;

  /// Canonical JSON of every field that affects results (not output or workers).
  std::string canonical() const;
  /// FNV-1a of canonical().
  std::uint64_t digest() const;
};

/// The documented defaults of each experiment kind.
ExperimentConfig default_config(ExperimentKind kind);

/// Parses a JSON config. The "kind" key selects the defaults, every other
/// key overrides them. Unknown keys, wrong types and out-of-range values are
/// collected and thrown together as one ConfigError with a diagnostic per
/// field, e.g. "solver.mu[1]: must be positive".
ExperimentConfig parse_experiment_config(std::string_view json_text);
ExperimentConfig load_experiment_config(const std::string& path);

/// Checks cross-field constraints; throws ConfigError.
void validate(const ExperimentConfig& config);

}  // namespace mtgraph
