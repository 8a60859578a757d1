#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <thread>

#include "CLI11.hpp"
#include "mtgraph/config.hpp"
#include "mtgraph/errors.hpp"
#include "mtgraph/experiments.hpp"
#include "mtgraph/io.hpp"
#include "mtgraph/weather.hpp"

using namespace mtgraph;
namespace fs = std::filesystem;

namespace {

// Exit codes: 1 runtime error, 2 bad config or dataset, 3 steady state not reached.
int print_config_error(const ConfigError& e) {
  std::cerr << "configuration error:\n";
  for (const auto& d : e.diagnostics()) std::cerr << "  " << d << '\n';
  return 2;
}

ExperimentConfig load(const std::string& path, std::optional<std::uint64_t> seed,
                      const std::string& out) {
  auto config = load_experiment_config(path);
  if (seed) config.seed = *seed;
  if (!out.empty()) config.output.directory = out;
  validate(config);
  return config;
}

int cmd_run(const std::string& path, std::optional<std::uint64_t> seed, const std::string& out,
            std::size_t workers, bool quiet) {
  const auto config = load(path, seed, out);
  RunContext ctx;
  ctx.workers = workers;
  ctx.log = quiet ? nullptr : &std::cerr;
  if (!quiet) {
    std::cerr << "running " << to_string(config.kind) << " (digest " << digest_hex(config.digest()) << ", "
              << workers << " workers) into " << config.output.directory << '\n';
  }
  try {
    const auto result = run_experiment(config, ctx);
    for (const auto& [k, v] : result.summary) std::cout << k << " = " << v << '\n';
  } catch (const ConvergenceFailure& e) {
    std::cerr << "error: " << e.what() << "\n(outputs were written; set metrics.require_convergence to false "
              << "or raise solver.iterations)\n";
    return 3;
  }
  return 0;
}

int cmd_validate(const std::string& path, std::optional<std::uint64_t> seed, const std::string& out) {
  const auto config = load(path, seed, out);
  const auto grid = config.kind == ExperimentKind::weather ? std::vector<GridPoint>{} : experiment_grid(config);
  std::size_t runs = 0;
  for (const auto& g : grid) runs += g.runs;
  std::cout << "kind = " << to_string(config.kind) << '\n'
            << "config_digest = " << digest_hex(config.digest()) << '\n'
            << "output = " << config.output.directory << '\n';
  if (config.kind == ExperimentKind::weather) {
    std::cout << "dataset = " << config.weather.path << '\n'
              << "eta_points = " << config.solver.eta.size() << '\n'
              << "regularizers = " << config.regularizers.size() << '\n';
  } else {
    std::cout << "grid_points = " << grid.size() << '\n' << "monte_carlo_runs = " << runs << '\n';
  }
  std::cout << "canonical = " << config.canonical() << '\n';
  return 0;
}

int cmd_ingest(const std::string& path, const std::string& out, std::size_t k_neighbors,
               const std::vector<int>& train_years, const std::vector<int>& test_years) {
  if (out.empty()) throw ConfigError({"ingest: --out is required"});
  WeatherSplit split;
  if (!train_years.empty()) {
    split.train_first_year = train_years[0];
    split.train_last_year = train_years[1];
  }
  if (!test_years.empty()) {
    split.test_first_year = test_years[0];
    split.test_last_year = test_years[1];
  }
  const auto ds = ingest_weather(path, split);
  for (const auto& w : ds.warnings) std::cerr << "warning: " << w << '\n';
  if (ds.stations.size() < 2) throw ConfigError({"dataset: fewer than two usable stations"});
  const auto net = weather_network(ds, std::min(k_neighbors, ds.stations.size() - 1));

  fs::create_directories(out);
  const auto digest = fnv1a64(path + "|" + std::to_string(split.train_first_year) + "-" +
                              std::to_string(split.train_last_year) + "|" + std::to_string(split.test_first_year) +
                              "-" + std::to_string(split.test_last_year) + "|k=" + std::to_string(k_neighbors));
  {
    std::ofstream f(fs::path(out) / "stations.csv");
    write_digest_header(f, digest);
    f << "agent,station,lon,lat,train_days,test_days\n";
    for (std::size_t k = 0; k < ds.stations.size(); ++k) {
      f << k << ',' << ds.stations[k] << ',' << format_number(ds.coordinates[k].x) << ','
        << format_number(ds.coordinates[k].y) << ',' << ds.train[k].size() << ',' << ds.test[k].size() << '\n';
    }
  }
  {
    std::ofstream f(fs::path(out) / "topology.txt");
    write_topology(f, net);
  }
  {
    std::ofstream f(fs::path(out) / "samples.csv");
    write_digest_header(f, digest);
    f << "agent,split,day,temp,dewp,visib,wdsp,mxspd,label\n";
    auto dump = [&](const std::vector<std::vector<Sample>>& part, const char* name) {
      for (std::size_t k = 0; k < part.size(); ++k) {
        for (std::size_t d = 0; d < part[k].size(); ++d) {
          f << k << ',' << name << ',' << d;
          for (Eigen::Index m = 0; m < part[k][d].x.size(); ++m) f << ',' << format_number(part[k][d].x[m]);
          f << ',' << part[k][d].y << '\n';
        }
      }
    };
    dump(ds.train, "train");
    dump(ds.test, "test");
  }
  {
    std::ofstream f(fs::path(out) / "summary.txt");
    write_summary(f,
                  {{"rows_parsed", std::to_string(ds.rows_read)},
                   {"dropped_missing", std::to_string(ds.dropped_missing)},
                   {"dropped_malformed", std::to_string(ds.dropped_malformed)},
                   {"outside_split", std::to_string(ds.outside_split)},
                   {"stations", std::to_string(ds.stations.size())},
                   {"excluded_stations", std::to_string(ds.warnings.size())},
                   {"max_train_days", std::to_string(ds.max_train_days())},
                   {"max_test_days", std::to_string(ds.max_test_days())},
                   {"links", std::to_string(net.edges().size())}},
                  digest);
  }
  std::cout << "stations = " << ds.stations.size() << "\nrows_parsed = " << ds.rows_read
            << "\ndropped = " << ds.dropped() << "\nlinks = " << net.edges().size() << '\n';
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Decentralized multitask learning over graphs"};
  app.require_subcommand(1);
  app.set_version_flag("--version", version());

  std::string config_path, dataset_path, out;
  std::optional<std::uint64_t> seed;
  std::size_t workers = std::max(1u, std::thread::hardware_concurrency());
  bool quiet = false;
  std::size_t k_neighbors = 4;
  std::vector<int> train_years, test_years;

  auto* run = app.add_subcommand("run", "run an experiment config and write its artifacts");
  run->add_option("config", config_path, "JSON experiment config")->required()->check(CLI::ExistingFile);
  run->add_option("--seed", seed, "override the master seed");
  run->add_option("--workers", workers, "worker threads")->check(CLI::PositiveNumber);
  run->add_option("--out", out, "override the output directory");
  run->add_flag("-q,--quiet", quiet, "no progress messages");

  auto* val = app.add_subcommand("validate", "check a config and print its resolved grid");
  val->add_option("config", config_path, "JSON experiment config")->required()->check(CLI::ExistingFile);
  val->add_option("--seed", seed, "override the master seed");
  val->add_option("--out", out, "override the output directory");

  auto* ing = app.add_subcommand("ingest", "parse a weather dataset into per-station streams and a graph");
  ing->add_option("dataset", dataset_path, "weather CSV")->required();
  ing->add_option("--out", out, "output directory")->required();
  ing->add_option("--k-neighbors", k_neighbors, "neighbors per station")->check(CLI::PositiveNumber);
  ing->add_option("--train-years", train_years, "first and last training year")->expected(2);
  ing->add_option("--test-years", test_years, "first and last test year")->expected(2);

  CLI11_PARSE(app, argc, argv);

  try {
    if (*run) return cmd_run(config_path, seed, out, workers, quiet);
    if (*val) return cmd_validate(config_path, seed, out);
    if (*ing) return cmd_ingest(dataset_path, out, k_neighbors, train_years, test_years);
  } catch (const ConfigError& e) {
    return print_config_error(e);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
