#include "mtgraph/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <ostream>

#include "mtgraph/errors.hpp"
#include "mtgraph/random.hpp"
#include "mtgraph/reference.hpp"
#include "mtgraph/solver.hpp"
#include "mtgraph/thread_pool.hpp"

namespace mtgraph {

namespace fs = std::filesystem;

namespace {

constexpr std::size_t kMaxTopologyDraws = 1000;

std::ofstream open_output(const fs::path& path) {
  fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path.string());
  return out;
}

std::string point_label(const GridPoint& p) {
  return "mu=" + format_number(p.mu) + " eta=" + format_number(p.eta) + " " + describe(p.regularizer);
}

// Grid points that produce identical iterates share one computation: every
// eta = 0 point of a given mu is the non-cooperative run.
struct UniquePoint {
  GridPoint point;
  std::vector<Eigen::VectorXd> reference;
  std::optional<double> residual;
};

std::uint64_t reference_key(const ExperimentConfig& config, const GridPoint& p) {
  std::string key = config.canonical();
  key += "|reference|eta=" + format_number(p.eta) + "|" + describe(p.regularizer);
  return fnv1a64(key);
}

std::vector<Eigen::VectorXd> regularized_reference(const ExperimentConfig& config,
                                                   const Network& network,
                                                   const ModelEnsemble& ensemble, const GridPoint& p,
                                                   double& residual, bool cache, std::ostream* log) {
  const std::uint64_t key = reference_key(config, p);
  const fs::path path = fs::path(config.output.directory) / "references" / (digest_hex(key) + ".bin");
  StoredReference stored;
  if (cache && load_reference(path.string(), key, stored)) {
    if (log) *log << "reference " << point_label(p) << ": cached\n";
    residual = stored.residual;
    return stored.blocks;
  }
  ReferenceOptions opts;
  opts.tolerance = config.metrics.reference_tolerance;
  const auto solution = solve_reference(network, ensemble, p.eta, p.regularizer, opts);
  if (log) {
    *log << "reference " << point_label(p) << ": residual " << solution.residual << " after "
         << solution.iterations << " iterations\n";
  }
  residual = solution.residual;
  if (!cache) return solution.blocks;
  stored.digest = key;
  stored.residual = solution.residual;
  stored.blocks = solution.blocks;
  save_reference(path.string(), stored);
  return solution.blocks;
}

void write_steady_state_table(std::ostream& out, const std::vector<PointResult>& points,
                              std::uint64_t digest) {
  write_digest_header(out, digest);
  out << "mu,eta,regularizer,msd_db,first_half_db,second_half_db,converged,n_runs\n";
  for (const auto& r : points) {
    out << format_number(r.point.mu) << ',' << format_number(r.point.eta) << ','
        << describe(r.point.regularizer) << ',' << format_number(r.steady.db) << ','
        << format_number(r.steady.first_half_db) << ',' << format_number(r.steady.second_half_db)
        << ',' << (r.steady.converged ? 1 : 0) << ',' << r.curve.n_runs << '\n';
  }
}

void add_sweep_summary(ExperimentResult& result, const ExperimentConfig& config) {
  auto& s = result.summary;
  for (double mu : config.solver.mu) {
    for (const auto& reg : config.regularizers) {
      const PointResult* best = nullptr;
      const PointResult* zero = nullptr;
      for (const auto& r : result.points) {
        if (r.point.mu != mu || describe(r.point.regularizer) != describe(reg)) continue;
        if (!best || r.steady.db < best->steady.db) best = &r;
        if (r.point.eta == 0.0 && !zero) zero = &r;
      }
      if (!best) continue;
      std::string tag = describe(reg);
      if (config.solver.mu.size() > 1) tag += " mu=" + format_number(mu);
      s.emplace_back("best_eta " + tag, format_number(best->point.eta));
      s.emplace_back("best_msd_db " + tag, format_number(best->steady.db));
      if (zero) {
        s.emplace_back("gain_over_noncooperative_db " + tag,
                       format_number(zero->steady.db - best->steady.db));
      }
    }
  }
}

void add_theorem_summary(ExperimentResult& result) {
  auto& s = result.summary;
  for (std::size_t i = 1; i < result.points.size(); ++i) {
    const auto& a = result.points[i - 1].point;
    const auto& b = result.points[i].point;
    if (describe(a.regularizer) != describe(b.regularizer)) continue;
    const double decades = std::log10(b.mu / a.mu);
    if (decades == 0.0) continue;
    const double slope = (result.points[i].steady.db - result.points[i - 1].steady.db) / (10.0 * decades);
    s.emplace_back("msd_slope_vs_mu " + format_number(a.mu) + "->" + format_number(b.mu),
                   format_number(slope));
  }
}

ExperimentResult run_synthetic(const ExperimentConfig& config, const RunContext& context) {
  ExperimentResult result;
  result.digest = config.digest();
  std::ostream* log = context.log;

  const Network network = build_topology(config.topology, config.seed);
  const ModelEnsemble ensemble = build_models(config.models, network, config.seed);
  const auto grid = experiment_grid(config);
  const fs::path out_dir(config.output.directory);

  // Map grid points onto unique computations.
  std::vector<UniquePoint> unique;
  std::vector<std::size_t> owner(grid.size());
  std::map<double, std::size_t> zero_owner;
  for (std::size_t g = 0; g < grid.size(); ++g) {
    if (grid[g].eta == 0.0) {
      auto it = zero_owner.find(grid[g].mu);
      if (it != zero_owner.end()) {
        owner[g] = it->second;
        continue;
      }
      zero_owner.emplace(grid[g].mu, unique.size());
      GridPoint p = grid[g];
      p.runs = config.runs;
      owner[g] = unique.size();
      unique.push_back({p, {}, std::nullopt});
      continue;
    }
    owner[g] = unique.size();
    unique.push_back({grid[g], {}, std::nullopt});
  }

  // References.
  if (config.metrics.reference == ReferenceKind::local_models) {
    const auto truth = ensemble.true_models();
    for (auto& u : unique) u.reference = truth;
  } else {
    parallel_for(unique.size(), context.workers, [&](std::size_t i) {
      double residual = 0.0;
      unique[i].reference = regularized_reference(config, network, ensemble, unique[i].point,
                                                  residual, context.write_files, nullptr);
      unique[i].residual = residual;
    });
    if (log) {
      for (const auto& u : unique) {
        *log << "reference " << point_label(u.point) << ": residual " << *u.residual << '\n';
      }
    }
  }

  // Monte-Carlo jobs over (unique point, run).
  struct Job {
    std::size_t point;
    std::size_t run;
  };
  std::vector<Job> jobs;
  for (std::size_t u = 0; u < unique.size(); ++u) {
    for (std::size_t r = 0; r < unique[u].point.runs; ++r) jobs.push_back({u, r});
  }
  std::vector<std::vector<double>> per_run(jobs.size());
  const bool dump = config.output.trajectories && context.write_files;

  parallel_for(jobs.size(), context.workers, [&](std::size_t j) {
    const auto& u = unique[jobs[j].point];
    const std::size_t run = jobs[j].run;
    SolverConfig sc;
    sc.mu = u.point.mu;
    sc.eta = u.point.eta;
    sc.regularizer = u.point.regularizer;
    sc.iterations = config.solver.iterations;
    sc.init.kind = config.solver.init;
    sc.gradient_mode = config.solver.gradients;

    std::unique_ptr<GradientSource> source;
    if (sc.gradient_mode == GradientMode::exact) {
      source = std::make_unique<ExactGradients>(ensemble);
    } else {
      source = std::make_unique<SampledGradients>(ensemble, config.seed, run);
    }
    MsdRecorder recorder(u.reference, sc.iterations);
    Trajectory traj;
    IterationObserver observer;
    if (dump) {
      traj.seed = config.seed;
      traj.run = run;
      traj.config_digest = result.digest;
      traj.estimates.reserve(sc.iterations + 1);
      observer = [&](std::size_t i, std::span<const Eigen::VectorXd> w,
                     std::span<const Eigen::VectorXd> psi) {
        recorder(i, w, psi);
        traj.estimates.emplace_back(w.begin(), w.end());
      };
    } else {
      observer = [&](std::size_t i, std::span<const Eigen::VectorXd> w,
                     std::span<const Eigen::VectorXd> psi) { recorder(i, w, psi); };
    }
    run_decentralized(network, *source, sc, config.seed, run, observer);
    per_run[j] = recorder.take();
    if (dump) {
      const std::string stem = "point" + std::to_string(jobs[j].point) + "_run" + std::to_string(run);
      auto csv = open_output(out_dir / "trajectories" / (stem + ".csv"));
      write_trajectory_csv(csv, traj);
      auto bin = open_output(out_dir / "trajectories" / (stem + ".bin"));
      write_trajectory_binary(bin, traj);
    }
  });

  // Reduce in run order.
  std::vector<LearningCurve> curves(unique.size());
  {
    std::size_t j = 0;
    for (std::size_t u = 0; u < unique.size(); ++u) {
      std::vector<std::vector<double>> runs;
      runs.reserve(unique[u].point.runs);
      for (std::size_t r = 0; r < unique[u].point.runs; ++r, ++j) runs.push_back(std::move(per_run[j]));
      curves[u] = average_runs(runs, config.metrics.reference);
    }
  }

  std::vector<std::string> unconverged;
  for (std::size_t g = 0; g < grid.size(); ++g) {
    const auto& u = unique[owner[g]];
    PointResult pr;
    pr.point = grid[g];
    pr.point.runs = u.point.runs;
    pr.curve = curves[owner[g]];
    pr.steady = check_steady_state(pr.curve.values, config.metrics.window,
                                   config.metrics.convergence_tolerance_db);
    pr.reference_residual = u.residual;
    if (!pr.steady.converged) unconverged.push_back(point_label(pr.point));
    result.points.push_back(std::move(pr));
  }

  auto& s = result.summary;
  s.emplace_back("kind", std::string(to_string(config.kind)));
  s.emplace_back("agents", std::to_string(network.size()));
  s.emplace_back("dimension", std::to_string(ensemble.dimension()));
  s.emplace_back("links", std::to_string(network.edges().size()));
  s.emplace_back("iterations", std::to_string(config.solver.iterations));
  s.emplace_back("steady_state_window", std::to_string(config.metrics.window));
  s.emplace_back("reference", config.metrics.reference == ReferenceKind::local_models
                                  ? "local_models"
                                  : "regularized_solution");
  for (std::size_t g = 0; g < result.points.size(); ++g) {
    const auto& r = result.points[g];
    std::string v = format_number(r.steady.db) + " dB (runs " + std::to_string(r.curve.n_runs) +
                    (r.steady.converged ? ", converged" : ", NOT converged");
    if (r.reference_residual) v += ", reference residual " + format_number(*r.reference_residual);
    v += ")";
    s.emplace_back("msd_db " + point_label(r.point), v);
  }
  if (config.metrics.reference == ReferenceKind::local_models) {
    add_sweep_summary(result, config);
  } else {
    add_theorem_summary(result);
  }
  s.emplace_back("unconverged_points", std::to_string(unconverged.size()));

  if (context.write_files) {
    // Curves, one file per grid point, plus an index.
    auto index = open_output(out_dir / "curves" / "index.csv");
    write_digest_header(index, result.digest);
    index << "file,mu,eta,regularizer,n_runs\n";
    for (std::size_t g = 0; g < result.points.size(); ++g) {
      const auto& r = result.points[g];
      const std::string name = "curve_" + std::to_string(g) + ".csv";
      auto out = open_output(out_dir / "curves" / name);
      write_curve_csv(out, r.curve, result.digest);
      index << name << ',' << format_number(r.point.mu) << ',' << format_number(r.point.eta) << ','
            << describe(r.point.regularizer) << ',' << r.curve.n_runs << '\n';
      result.files.push_back("curves/" + name);
    }
    result.files.push_back("curves/index.csv");

    auto table = open_output(out_dir / "steady_state.csv");
    write_steady_state_table(table, result.points, result.digest);
    result.files.push_back("steady_state.csv");

    if (config.metrics.reference == ReferenceKind::local_models) {
      for (std::size_t m = 0; m < config.solver.mu.size(); ++m) {
        std::vector<SweepRow> rows;
        for (const auto& r : result.points) {
          if (r.point.mu != config.solver.mu[m]) continue;
          rows.push_back({r.point.eta, describe(r.point.regularizer), r.steady.db, r.curve.n_runs});
        }
        const std::string name =
            config.solver.mu.size() == 1 ? "sweep.csv" : "sweep_mu" + std::to_string(m) + ".csv";
        auto out = open_output(out_dir / name);
        write_sweep_csv(out, rows, result.digest);
        result.files.push_back(name);
      }
    }
  }

  return result;
}

ExperimentResult run_weather(const ExperimentConfig& config, const RunContext& context) {
  ExperimentResult result;
  result.digest = config.digest();
  const auto& w = config.weather;
  WeatherSplit split{w.train_first_year, w.train_last_year, w.test_first_year, w.test_last_year};
  auto dataset = ingest_weather(w.path, split);
  if (dataset.stations.size() < 2) {
    throw ConfigError({"dataset: fewer than two stations have both training and test days"});
  }
  const Network network = weather_network(dataset, w.k_neighbors);
  WeatherOptions options{w.mu, w.ridge, w.tail_window, config.seed};
  if (context.log) {
    *context.log << "weather: " << dataset.stations.size() << " stations, "
                 << dataset.max_train_days() << " training days\n";
  }
  auto table = weather_experiment(dataset, network, config.solver.eta, config.regularizers, options,
                                  context.workers);

  auto& s = result.summary;
  s.emplace_back("kind", "weather");
  s.emplace_back("stations", std::to_string(dataset.stations.size()));
  s.emplace_back("links", std::to_string(network.edges().size()));
  s.emplace_back("rows_read", std::to_string(dataset.rows_read));
  s.emplace_back("dropped_missing", std::to_string(dataset.dropped_missing));
  s.emplace_back("dropped_malformed", std::to_string(dataset.dropped_malformed));
  s.emplace_back("outside_split", std::to_string(dataset.outside_split));
  s.emplace_back("max_train_days", std::to_string(dataset.max_train_days()));
  s.emplace_back("max_test_days", std::to_string(dataset.max_test_days()));
  for (const auto& warning : dataset.warnings) s.emplace_back("warning", warning);
  for (std::size_t r = 0; r < table.regularizers.size(); ++r) {
    const auto& errs = table.errors[r];
    const auto best = std::min_element(errs.begin(), errs.end()) - errs.begin();
    const std::string tag = describe(table.regularizers[r]);
    s.emplace_back("best_eta " + tag, format_number(table.eta_grid[best]));
    s.emplace_back("best_error " + tag, format_number(errs[best]));
  }
  for (std::size_t e = 0; e < table.eta_grid.size(); ++e) {
    if (table.eta_grid[e] == 0.0 && !table.errors.empty()) {
      s.emplace_back("noncooperative_error", format_number(table.errors[0][e]));
      break;
    }
  }

  if (context.write_files) {
    auto out = open_output(fs::path(config.output.directory) / "weather_table.csv");
    write_digest_header(out, result.digest);
    out << "regularizer,eta,prediction_error\n";
    for (std::size_t r = 0; r < table.regularizers.size(); ++r) {
      for (std::size_t e = 0; e < table.eta_grid.size(); ++e) {
        out << describe(table.regularizers[r]) << ',' << format_number(table.eta_grid[e]) << ','
            << format_number(table.errors[r][e]) << '\n';
      }
    }
    result.files.push_back("weather_table.csv");
  }
  result.weather = std::move(table);
  result.dataset = std::move(dataset);
  return result;
}

}  // namespace

const char* version() noexcept { return "0.1.0"; }

Network build_topology(const TopologySpec& spec, std::uint64_t seed) {
  switch (spec.type) {
    case TopologySpec::Type::ring:
      return ring_network(spec.agents);
    case TopologySpec::Type::file:
      return load_topology(spec.path);
    case TopologySpec::Type::points:
      return knn_network(spec.points, spec.k_neighbors);
    case TopologySpec::Type::random_knn:
      break;
  }
  std::vector<Point2> points(spec.agents);
  for (std::size_t draw = 0; draw < kMaxTopologyDraws; ++draw) {
    AgentStream stream(seed, draw, 0, StreamPurpose::topology);
    for (auto& p : points) {
      p.x = stream.uniform();
      p.y = stream.uniform();
    }
    try {
      return knn_network(points, spec.k_neighbors);
    } catch (const DisconnectedGraph&) {
      // redraw
    }
  }
  throw Error("no connected " + std::to_string(spec.k_neighbors) + "-NN graph over " +
              std::to_string(spec.agents) + " random points after " +
              std::to_string(kMaxTopologyDraws) + " draws");
}

ModelEnsemble build_models(const ModelSpec& spec, const Network& network, std::uint64_t seed) {
  ModelEnsemble ensemble =
      spec.type == ModelSpec::Type::sparse
          ? generate_sparse_models(network.size(), spec.dimension, seed, spec.variances)
          : generate_smooth_models(network, spec.dimension, spec.tau, seed, spec.variances);
  if (spec.family == ModelSpec::Family::logistic) ensemble = as_logistic(ensemble, spec.ridge);
  return ensemble;
}

std::vector<GridPoint> experiment_grid(const ExperimentConfig& config) {
  std::vector<GridPoint> grid;
  for (double mu : config.solver.mu) {
    for (const auto& reg : config.regularizers) {
      const std::size_t runs = reg.kind == Regularizer::Kind::l0 ? config.runs_l0 : config.runs;
      if (config.solver.eta_per_mu) {
        grid.push_back({mu, *config.solver.eta_per_mu * mu, reg, runs});
      } else {
        for (double eta : config.solver.eta) grid.push_back({mu, eta, reg, runs});
      }
    }
  }
  return grid;
}

ExperimentResult run_experiment(const ExperimentConfig& config, const RunContext& context) {
  validate(config);
  const fs::path out_dir(config.output.directory);
  if (context.write_files) fs::create_directories(out_dir);

  ExperimentResult result = config.kind == ExperimentKind::weather ? run_weather(config, context)
                                                                   : run_synthetic(config, context);
  result.summary.insert(result.summary.begin(), {"config_digest", digest_hex(result.digest)});

  if (context.write_files) {
    auto summary = open_output(out_dir / "summary.txt");
    write_summary(summary, result.summary, result.digest);
    result.files.push_back("summary.txt");

    auto prov = open_output(out_dir / "provenance.txt");
    write_digest_header(prov, result.digest);
    prov << "version = " << version() << '\n';
    prov << "seed = " << config.seed << '\n';
    prov << "sample_streams = mt19937_64 keyed by splitmix64(seed, run, agent, purpose)\n";
    prov << "config = " << config.canonical() << '\n';
    result.files.push_back("provenance.txt");
  }

  if (config.metrics.require_convergence) {
    const PointResult* worst = nullptr;
    double gap = 0.0;
    for (const auto& p : result.points) {
      const double g = std::abs(p.steady.first_half_db - p.steady.second_half_db);
      if (!p.steady.converged && g >= gap) {
        worst = &p;
        gap = g;
      }
    }
    if (worst) {
      throw ConvergenceFailure("steady state not reached at " + point_label(worst->point) +
                                   ": half windows differ by " + format_number(gap) + " dB",
                               gap);
    }
  }
  return result;
}

WeatherDataset synthetic_classification_dataset(const ModelEnsemble& ensemble,
                                                std::size_t train_days, std::size_t test_days,
                                                std::uint64_t seed) {
  WeatherDataset ds;
  const std::size_t k = ensemble.size();
  ds.train.resize(k);
  ds.test.resize(k);
  for (std::size_t a = 0; a < k; ++a) {
    ds.stations.push_back("agent" + std::to_string(a));
    AgentStream train_stream(seed, 0, a, StreamPurpose::samples);
    AgentStream test_stream(seed, 0, a, StreamPurpose::test_samples);
    ds.train[a].resize(train_days);
    ds.test[a].resize(test_days);
    for (auto& s : ds.train[a]) draw_sample(ensemble.agents[a], train_stream, s);
    for (auto& s : ds.test[a]) draw_sample(ensemble.agents[a], test_stream, s);
  }
  ds.rows_read = k * (train_days + test_days);
  return ds;
}

}  // namespace mtgraph
