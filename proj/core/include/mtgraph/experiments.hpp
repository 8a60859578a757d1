#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "mtgraph/config.hpp"
#include "mtgraph/cost_models.hpp"
#include "mtgraph/graph.hpp"
#include "mtgraph/io.hpp"
#include "mtgraph/metrics.hpp"
#include "mtgraph/weather.hpp"

namespace mtgraph {

/// Builds the agent graph of a topology spec. random_knn scatters agents
/// uniformly in the unit square and links k nearest neighbors, redrawing
/// (deterministically) until the graph is connected.
Network build_topology(const TopologySpec& spec, std::uint64_t seed);

/// Builds the model ensemble of a model spec on `network`.
ModelEnsemble build_models(const ModelSpec& spec, const Network& network, std::uint64_t seed);

/// One (mu, eta, regularizer) point of an experiment grid.
struct GridPoint {
  double mu = 0.0;
  double eta = 0.0;
  Regularizer regularizer;
  std::size_t runs = 0;
};

struct PointResult {
  GridPoint point;
  LearningCurve curve;
  SteadyStateCheck steady;
  std::optional<double> reference_residual;
};

struct ExperimentResult {
  std::uint64_t digest = 0;
  std::vector<PointResult> points;            ///< synthetic kinds, in grid order
  std::optional<WeatherTable> weather;        ///< weather kind
  std::optional<WeatherDataset> dataset;      ///< weather kind, after ingestion
  std::vector<std::pair<std::string, std::string>> summary;
  std::vector<std::string> files;             ///< artifacts written, relative to the output dir
};

struct RunContext {
  std::size_t workers = 1;
  bool write_files = true;
  std::ostream* log = nullptr;  ///< progress messages, optional
};

/// Expands the config into its grid, in the order mu, regularizer, eta.
std::vector<GridPoint> experiment_grid(const ExperimentConfig& config);

/// Runs a validated config end to end and, unless write_files is false,
/// writes curves, tables, summary.txt and provenance.txt under
/// config.output.directory. Regularized references are cached in its
/// references/ subdirectory and reused by later runs of the same config. Throws ConvergenceFailure (after writing the
/// outputs) when require_convergence is set and a curve's two steady-state
/// half windows differ by more than the tolerance.
ExperimentResult run_experiment(const ExperimentConfig& config, const RunContext& context = {});

/// Labeled logistic streams drawn from `ensemble`, laid out like an ingested
/// weather dataset so weather_experiment can score them.
WeatherDataset synthetic_classification_dataset(const ModelEnsemble& ensemble,
                                                std::size_t train_days, std::size_t test_days,
                                                std::uint64_t seed);

/// Library version string.
const char* version() noexcept;

}  // namespace mtgraph
