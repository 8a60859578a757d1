#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "mtgraph/cost_models.hpp"
#include "mtgraph/graph.hpp"
#include "mtgraph/prox.hpp"

namespace mtgraph {

/// Number of features per daily record.
inline constexpr std::size_t kWeatherFeatures = 5;

/// One daily station record.
///
/// features: mean temperature, mean dew point, mean visibility, mean wind
/// speed, maximum sustained wind speed. label is +1 when rain or snow
/// occurred and -1 otherwise.
struct WeatherRecord {
  std::string station;
  int year = 0;
  int month = 0;
  int day = 0;
  Eigen::Matrix<double, kWeatherFeatures, 1> features;
  double label = -1.0;
  double latitude = 0.0;
  double longitude = 0.0;
};

/// Dataset file layout.
///
/// Comma-separated text with a header row naming at least the columns
/// station, date, temp, dewp, visib, wdsp, mxspd, prcp, lat, lon (any order,
/// extra columns ignored, '#' lines skipped). date is YYYY-MM-DD or
/// YYYYMMDD; prcp is 1 for rain or snow and 0 otherwise. Values 9999.9,
/// 999.9, empty fields and NA mark a missing measurement.
struct WeatherSchema {
  std::string station = "station";
  std::string date = "date";
  std::vector<std::string> features = {"temp", "dewp", "visib", "wdsp", "mxspd"};
  std::string label = "prcp";
  std::string latitude = "lat";
  std::string longitude = "lon";
};

struct WeatherSplit {
  int train_first_year = 2004;
  int train_last_year = 2012;
  int test_first_year = 2013;
  int test_last_year = 2017;
};

struct WeatherDataset {
  std::vector<std::string> stations;           ///< sorted ids, one per agent
  std::vector<Point2> coordinates;             ///< (longitude, latitude) in degrees
  std::vector<std::vector<Sample>> train;      ///< z-scored, ordered by date
  std::vector<std::vector<Sample>> test;       ///< z-scored with training statistics
  std::size_t rows_read = 0;
  std::size_t dropped_missing = 0;
  std::size_t dropped_malformed = 0;
  std::size_t outside_split = 0;
  std::vector<std::string> warnings;           ///< excluded stations and similar

  std::size_t dropped() const noexcept { return dropped_missing + dropped_malformed; }
  std::size_t max_train_days() const;
  std::size_t max_test_days() const;
};

/// Parses records; rows with missing values or parse errors are counted and
/// skipped. Throws ConfigError naming each required column the header lacks.
std::vector<WeatherRecord> parse_weather_records(std::istream& in, const WeatherSchema& schema,
                                                 std::size_t& dropped_missing,
                                                 std::size_t& dropped_malformed);

/// Groups records by station, splits them by year, z-scores every feature
/// with the station's training mean and standard deviation, and drops
/// stations without training or test days (with a warning).
WeatherDataset build_weather_dataset(const std::vector<WeatherRecord>& records,
                                     const WeatherSplit& split);

/// parse_weather_records + build_weather_dataset on a file. A missing file
/// raises ConfigError describing the expected layout.
WeatherDataset ingest_weather(const std::string& path, const WeatherSplit& split = {},
                              const WeatherSchema& schema = {});

/// k-NN network over the stations, on an equirectangular projection of
/// (longitude, latitude) scaled by the cosine of the mean latitude.
Network weather_network(const WeatherDataset& dataset, std::size_t k_neighbors);

struct WeatherOptions {
  double mu = 5e-4;
  double ridge = 1e-5;
  std::size_t tail_window = 200;
  std::uint64_t seed = 1;  ///< Gaussian initialization stream
};

/// errors[r][e] is the test prediction error for regularizers[r] at eta_grid[e].
struct WeatherTable {
  std::vector<double> eta_grid;
  std::vector<Regularizer> regularizers;
  std::vector<std::vector<double>> errors;
};

/// Runs the recursion once per (eta, regularizer) over the training days,
/// replaying each station's samples cyclically when the horizon exceeds
/// them, then scores the average of the last `tail_window` iterates on the
/// test days. The horizon is the longest training stream. eta = 0 is run
/// once and shared by every regularizer.
WeatherTable weather_experiment(const WeatherDataset& dataset, const Network& network,
                                const std::vector<double>& eta_grid,
                                const std::vector<Regularizer>& regularizers,
                                const WeatherOptions& options, std::size_t workers = 1);

}  // namespace mtgraph
