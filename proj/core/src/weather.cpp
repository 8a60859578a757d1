#include "mtgraph/weather.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <map>
#include <numbers>
#include <string_view>
#include <tuple>

#include "mtgraph/errors.hpp"
#include "mtgraph/metrics.hpp"
#include "mtgraph/solver.hpp"
#include "mtgraph/thread_pool.hpp"

namespace mtgraph {

namespace {

std::vector<std::string_view> split_fields(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  for (;;) {
    const auto comma = line.find(',', start);
    if (comma == std::string_view::npos) {
      out.push_back(line.substr(start));
      break;
    }
    out.push_back(line.substr(start, comma - start));
    start = comma + 1;
  }
  return out;
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '"')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r' || s.back() == '"')) {
    s.remove_suffix(1);
  }
  return s;
}

bool is_missing(std::string_view s) {
  return s.empty() || s == "NA" || s == "9999.9" || s == "999.9";
}

bool parse_double(std::string_view s, double& out) {
  if (s.empty()) return false;
  if (s.front() == '+') s.remove_prefix(1);
  const auto res = std::from_chars(s.data(), s.data() + s.size(), out);
  return res.ec == std::errc() && res.ptr == s.data() + s.size() && std::isfinite(out);
}

bool parse_int(std::string_view s, int& out) {
  const auto res = std::from_chars(s.data(), s.data() + s.size(), out);
  return res.ec == std::errc() && res.ptr == s.data() + s.size();
}

bool leap(int y) { return (y % 4 == 0 && y % 100 != 0) || y % 400 == 0; }

bool parse_date(std::string_view s, int& y, int& m, int& d) {
  bool ok = false;
  if (s.size() == 10 && s[4] == '-' && s[7] == '-') {
    ok = parse_int(s.substr(0, 4), y) && parse_int(s.substr(5, 2), m) && parse_int(s.substr(8, 2), d);
  } else if (s.size() == 8) {
    ok = parse_int(s.substr(0, 4), y) && parse_int(s.substr(4, 2), m) && parse_int(s.substr(6, 2), d);
  }
  if (!ok || m < 1 || m > 12 || d < 1) return false;
  static constexpr int days[] = {31, 28, 31, 30, 31, 30, 31, 31, 30, 31, 30, 31};
  const int limit = days[m - 1] + (m == 2 && leap(y) ? 1 : 0);
  return d <= limit;
}

}  // namespace

std::size_t WeatherDataset::max_train_days() const {
  std::size_t n = 0;
  for (const auto& s : train) n = std::max(n, s.size());
  return n;
}

std::size_t WeatherDataset::max_test_days() const {
  std::size_t n = 0;
  for (const auto& s : test) n = std::max(n, s.size());
  return n;
}

std::vector<WeatherRecord> parse_weather_records(std::istream& in, const WeatherSchema& schema,
                                                 std::size_t& dropped_missing,
                                                 std::size_t& dropped_malformed) {
  dropped_missing = 0;
  dropped_malformed = 0;
  std::string line;
  std::vector<std::string_view> header;
  std::string header_line;
  while (std::getline(in, line)) {
    const auto t = trim(line);
    if (t.empty() || t.front() == '#') continue;
    header_line = line;
    break;
  }
  if (header_line.empty()) throw ConfigError({"dataset: empty file, expected a header row"});
  header = split_fields(header_line);

  auto column = [&](const std::string& name, std::vector<std::string>& missing) -> std::size_t {
    for (std::size_t i = 0; i < header.size(); ++i) {
      if (trim(header[i]) == name) return i;
    }
    missing.push_back("dataset: missing column '" + name + "'");
    return 0;
  };
  std::vector<std::string> missing;
  if (schema.features.size() != kWeatherFeatures) {
    throw InvalidArgument("weather schema needs exactly 5 feature columns");
  }
  const auto c_station = column(schema.station, missing);
  const auto c_date = column(schema.date, missing);
  std::size_t c_feat[kWeatherFeatures];
  for (std::size_t f = 0; f < kWeatherFeatures; ++f) c_feat[f] = column(schema.features[f], missing);
  const auto c_label = column(schema.label, missing);
  const auto c_lat = column(schema.latitude, missing);
  const auto c_lon = column(schema.longitude, missing);
  if (!missing.empty()) {
    std::string found;
    for (auto h : header) found += (found.empty() ? "" : ",") + std::string(trim(h));
    missing.push_back("dataset: header has columns " + found);
    throw ConfigError(missing);
  }

  std::vector<WeatherRecord> out;
  while (std::getline(in, line)) {
    const auto t = trim(line);
    if (t.empty() || t.front() == '#') continue;
    const auto fields = split_fields(line);
    if (fields.size() != header.size()) {
      ++dropped_malformed;
      continue;
    }
    WeatherRecord r;
    r.station = std::string(trim(fields[c_station]));
    bool has_missing = false;
    bool malformed = r.station.empty();
    if (!parse_date(trim(fields[c_date]), r.year, r.month, r.day)) malformed = true;
    for (std::size_t f = 0; f < kWeatherFeatures; ++f) {
      const auto v = trim(fields[c_feat[f]]);
      if (is_missing(v)) {
        has_missing = true;
      } else if (!parse_double(v, r.features[static_cast<Eigen::Index>(f)])) {
        malformed = true;
      }
    }
    const auto lab = trim(fields[c_label]);
    if (is_missing(lab)) {
      has_missing = true;
    } else if (lab == "1") {
      r.label = 1.0;
    } else if (lab == "0") {
      r.label = -1.0;
    } else {
      malformed = true;
    }
    if (!parse_double(trim(fields[c_lat]), r.latitude) || !parse_double(trim(fields[c_lon]), r.longitude) ||
        std::fabs(r.latitude) > 90.0 || std::fabs(r.longitude) > 180.0) {
      malformed = true;
    }
    if (malformed) {
      ++dropped_malformed;
    } else if (has_missing) {
      ++dropped_missing;
    } else {
      out.push_back(std::move(r));
    }
  }
  return out;
}

WeatherDataset build_weather_dataset(const std::vector<WeatherRecord>& records,
                                     const WeatherSplit& split) {
  WeatherDataset ds;
  ds.rows_read = records.size();
  std::map<std::string, std::vector<const WeatherRecord*>> by_station;
  for (const auto& r : records) by_station[r.station].push_back(&r);

  using Vec = Eigen::Matrix<double, kWeatherFeatures, 1>;
  for (auto& [id, rows] : by_station) {
    std::stable_sort(rows.begin(), rows.end(), [](const WeatherRecord* a, const WeatherRecord* b) {
      return std::tie(a->year, a->month, a->day) < std::tie(b->year, b->month, b->day);
    });
    std::vector<const WeatherRecord*> train, test;
    for (const auto* r : rows) {
      if (r->year >= split.train_first_year && r->year <= split.train_last_year) {
        train.push_back(r);
      } else if (r->year >= split.test_first_year && r->year <= split.test_last_year) {
        test.push_back(r);
      } else {
        ++ds.outside_split;
      }
    }
    if (train.empty()) {
      ds.warnings.push_back("station " + id + " excluded: no valid training days");
      continue;
    }
    if (test.empty()) {
      ds.warnings.push_back("station " + id + " excluded: no valid test days");
      continue;
    }
    Vec mean = Vec::Zero();
    for (const auto* r : train) mean += r->features;
    mean /= static_cast<double>(train.size());
    Vec sd = Vec::Zero();
    for (const auto* r : train) sd += (r->features - mean).cwiseAbs2();
    sd = (sd / static_cast<double>(train.size())).cwiseSqrt();
    for (Eigen::Index f = 0; f < sd.size(); ++f) {
      if (!(sd[f] > 0.0)) sd[f] = 1.0;
    }
    auto convert = [&](const std::vector<const WeatherRecord*>& src) {
      std::vector<Sample> out;
      out.reserve(src.size());
      for (const auto* r : src) {
        Sample s;
        s.x = ((r->features - mean).array() / sd.array()).matrix();
        s.y = r->label;
        out.push_back(std::move(s));
      }
      return out;
    };
    ds.stations.push_back(id);
    ds.coordinates.push_back({rows.front()->longitude, rows.front()->latitude});
    ds.train.push_back(convert(train));
    ds.test.push_back(convert(test));
  }
  return ds;
}

WeatherDataset ingest_weather(const std::string& path, const WeatherSplit& split,
                              const WeatherSchema& schema) {
  std::ifstream in(path);
  if (!in) {
    throw ConfigError({"dataset: cannot open '" + path + "'",
                       "dataset: expected a comma-separated file with a header naming the columns " +
                           schema.station + ", " + schema.date + " (YYYY-MM-DD), " +
                           schema.features[0] + ", " + schema.features[1] + ", " +
                           schema.features[2] + ", " + schema.features[3] + ", " +
                           schema.features[4] + ", " + schema.label + " (1 = rain or snow, 0 = none), " +
                           schema.latitude + ", " + schema.longitude});
  }
  std::size_t missing = 0, malformed = 0;
  auto records = parse_weather_records(in, schema, missing, malformed);
  auto ds = build_weather_dataset(records, split);
  ds.dropped_missing = missing;
  ds.dropped_malformed = malformed;
  return ds;
}

Network weather_network(const WeatherDataset& dataset, std::size_t k_neighbors) {
  if (dataset.coordinates.empty()) throw InvalidArgument("dataset has no stations");
  double mean_lat = 0.0;
  for (const auto& c : dataset.coordinates) mean_lat += c.y;
  mean_lat /= static_cast<double>(dataset.coordinates.size());
  const double scale = std::cos(mean_lat * std::numbers::pi / 180.0);
  std::vector<Point2> projected;
  for (const auto& c : dataset.coordinates) projected.push_back({c.x * scale, c.y});
  return knn_network(projected, k_neighbors);
}

WeatherTable weather_experiment(const WeatherDataset& dataset, const Network& network,
                                const std::vector<double>& eta_grid,
                                const std::vector<Regularizer>& regularizers,
                                const WeatherOptions& options, std::size_t workers) {
  if (network.size() != dataset.train.size()) {
    throw InvalidArgument("network and dataset disagree on the number of stations");
  }
  if (eta_grid.empty() || regularizers.empty()) throw InvalidArgument("empty eta grid or regularizer list");
  const auto horizon = dataset.max_train_days();

  WeatherTable table;
  table.eta_grid = eta_grid;
  table.regularizers = regularizers;
  table.errors.assign(regularizers.size(), std::vector<double>(eta_grid.size(), 0.0));

  struct Job {
    std::size_t reg;
    std::size_t eta;
  };
  std::vector<Job> jobs;
  std::size_t zero_job = static_cast<std::size_t>(-1);
  for (std::size_t e = 0; e < eta_grid.size(); ++e) {
    for (std::size_t r = 0; r < regularizers.size(); ++r) {
      if (eta_grid[e] == 0.0) {
        if (zero_job == static_cast<std::size_t>(-1)) {
          zero_job = jobs.size();
          jobs.push_back({r, e});
        }
        continue;
      }
      jobs.push_back({r, e});
    }
  }
  std::vector<double> results(jobs.size(), 0.0);
  parallel_for(jobs.size(), workers, [&](std::size_t j) {
    CyclicLogisticGradients grads(dataset.train, options.ridge);
    SolverConfig cfg;
    cfg.mu = options.mu;
    cfg.eta = eta_grid[jobs[j].eta];
    cfg.regularizer = regularizers[jobs[j].reg];
    cfg.iterations = horizon;
    cfg.init = Initialization::gaussian();
    TailAverager tail(horizon, options.tail_window);
    run_decentralized(network, grads, cfg, options.seed, 0,
                      [&](std::size_t i, std::span<const Eigen::VectorXd> w,
                          std::span<const Eigen::VectorXd> psi) { tail(i, w, psi); });
    const auto avg = tail.average();
    results[j] = prediction_error(avg, dataset.test);
  });
  for (std::size_t j = 0; j < jobs.size(); ++j) {
    if (j == zero_job) {
      for (std::size_t e = 0; e < eta_grid.size(); ++e) {
        if (eta_grid[e] != 0.0) continue;
        for (std::size_t r = 0; r < regularizers.size(); ++r) table.errors[r][e] = results[j];
      }
    } else {
      table.errors[jobs[j].reg][jobs[j].eta] = results[j];
    }
  }
  return table;
}

}  // namespace mtgraph
