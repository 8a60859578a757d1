#include "mtgraph/config.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <initializer_list>
#include <set>
#include <sstream>

#include "json.hpp"

#include "mtgraph/errors.hpp"
#include "mtgraph/io.hpp"

namespace mtgraph {

using nlohmann::json;

std::string_view to_string(ExperimentKind kind) {
  switch (kind) {
    case ExperimentKind::theorem_illustration: return "theorem_illustration";
    case ExperimentKind::eta_sweep_sparse: return "eta_sweep_sparse";
    case ExperimentKind::eta_sweep_smooth: return "eta_sweep_smooth";
    case ExperimentKind::weather: return "weather";
    case ExperimentKind::custom: return "custom";
  }
  return "custom";
}

namespace {

std::vector<double> linear_grid(double lo, double hi, std::size_t points) {
  std::vector<double> out;
  for (std::size_t i = 0; i < points; ++i) {
    const double x = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(points - 1);
    // 15 significant digits drop the rounding residue (0.030000000000000006 -> 0.03)
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.15g", x);
    out.push_back(std::strtod(buf, nullptr));
  }
  return out;
}

std::vector<Regularizer> all_regularizers(double beta, double lambda) {
  return {Regularizer::l1(), Regularizer::reweighted_l1(0.1), Regularizer::l0(lambda),
          Regularizer::elastic_net(beta), Regularizer::squared_l2()};
}

const char* topology_name(TopologySpec::Type t) {
  switch (t) {
    case TopologySpec::Type::random_knn: return "random_knn";
    case TopologySpec::Type::ring: return "ring";
    case TopologySpec::Type::file: return "file";
    case TopologySpec::Type::points: return "points";
  }
  return "random_knn";
}

const char* init_name(Initialization::Kind k) {
  switch (k) {
    case Initialization::Kind::zeros: return "zeros";
    case Initialization::Kind::gaussian: return "gaussian";
    case Initialization::Kind::explicit_vectors: return "explicit";
  }
  return "zeros";
}

json regularizer_json(const Regularizer& r) {
  json j;
  j["kind"] = std::string(to_string(r.kind));
  switch (r.kind) {
    case Regularizer::Kind::reweighted_l1: j["epsilon"] = r.epsilon; break;
    case Regularizer::Kind::l0: j["lambda"] = r.lambda; break;
    case Regularizer::Kind::elastic_net: j["beta"] = r.beta; break;
    default: break;
  }
  return j;
}

// Collects diagnostics while walking the document.
class Reader {
 public:
  std::vector<std::string> errors;

  void fail(const std::string& path, const std::string& msg) { errors.push_back(path + ": " + msg); }

  bool object(const json& j, const std::string& path) {
    if (!j.is_object()) {
      fail(path, "expected an object");
      return false;
    }
    return true;
  }

  void only_keys(const json& j, const std::string& path, std::initializer_list<const char*> allowed) {
    const std::set<std::string> ok(allowed.begin(), allowed.end());
    for (const auto& [key, value] : j.items()) {
      if (!ok.count(key)) fail(join(path, key), "unknown key");
    }
  }

  static std::string join(const std::string& path, const std::string& key) {
    return path.empty() ? key : path + "." + key;
  }

  void number(const json& j, const std::string& path, const char* key, double& out) {
    if (!j.contains(key)) return;
    const auto& v = j.at(key);
    if (!v.is_number() || !std::isfinite(v.get<double>())) {
      fail(join(path, key), "expected a finite number");
      return;
    }
    out = v.get<double>();
  }

  template <class Int>
  void integer(const json& j, const std::string& path, const char* key, Int& out) {
    if (!j.contains(key)) return;
    const auto& v = j.at(key);
    if (!v.is_number_integer() || (v.is_number_unsigned() == false && v.get<long long>() < 0 &&
                                   std::is_unsigned_v<Int>)) {
      fail(join(path, key), std::is_unsigned_v<Int> ? "expected a nonnegative integer"
                                                    : "expected an integer");
      return;
    }
    out = v.get<Int>();
  }

  void boolean(const json& j, const std::string& path, const char* key, bool& out) {
    if (!j.contains(key)) return;
    if (!j.at(key).is_boolean()) {
      fail(join(path, key), "expected true or false");
      return;
    }
    out = j.at(key).get<bool>();
  }

  void string(const json& j, const std::string& path, const char* key, std::string& out) {
    if (!j.contains(key)) return;
    if (!j.at(key).is_string()) {
      fail(join(path, key), "expected a string");
      return;
    }
    out = j.at(key).get<std::string>();
  }

  void numbers(const json& j, const std::string& path, const char* key, std::vector<double>& out) {
    if (!j.contains(key)) return;
    const auto& v = j.at(key);
    const auto where = join(path, key);
    if (v.is_number()) {
      out = {v.get<double>()};
      return;
    }
    if (v.is_object()) {
      // {"from": a, "to": b, "points": n}
      only_keys(v, where, {"from", "to", "points"});
      double lo = 0.0, hi = 0.0;
      std::size_t n = 0;
      if (!v.contains("from") || !v.contains("to") || !v.contains("points")) {
        fail(where, "a grid needs from, to and points");
        return;
      }
      number(v, where, "from", lo);
      number(v, where, "to", hi);
      integer(v, where, "points", n);
      if (n < 2) {
        fail(where + ".points", "must be at least 2");
        return;
      }
      out = linear_grid(lo, hi, n);
      return;
    }
    if (!v.is_array() || v.empty()) {
      fail(where, "expected a number, a nonempty array of numbers or a {from, to, points} grid");
      return;
    }
    std::vector<double> values;
    for (std::size_t i = 0; i < v.size(); ++i) {
      if (!v[i].is_number() || !std::isfinite(v[i].get<double>())) {
        fail(where + "[" + std::to_string(i) + "]", "expected a finite number");
        return;
      }
      values.push_back(v[i].get<double>());
    }
    out = std::move(values);
  }
};

void read_regularizers(Reader& r, const json& j, std::vector<Regularizer>& out) {
  const std::string path = "regularizers";
  if (!j.is_array() || j.empty()) {
    r.fail(path, "expected a nonempty array");
    return;
  }
  std::vector<Regularizer> regs;
  for (std::size_t i = 0; i < j.size(); ++i) {
    const auto where = path + "[" + std::to_string(i) + "]";
    const auto& item = j[i];
    std::string kind_name;
    if (item.is_string()) {
      kind_name = item.get<std::string>();
    } else if (item.is_object()) {
      r.only_keys(item, where, {"kind", "epsilon", "lambda", "beta"});
      if (!item.contains("kind")) {
        r.fail(where, "missing kind");
        continue;
      }
      r.string(item, where, "kind", kind_name);
    } else {
      r.fail(where, "expected a regularizer name or object");
      continue;
    }
    Regularizer reg;
    try {
      reg.kind = parse_regularizer_kind(kind_name);
    } catch (const InvalidArgument&) {
      r.fail(where + ".kind",
             "unknown regularizer '" + kind_name +
                 "' (expected l1, reweighted_l1, l0, elastic_net or squared_l2)");
      continue;
    }
    if (item.is_object()) {
      r.number(item, where, "epsilon", reg.epsilon);
      r.number(item, where, "lambda", reg.lambda);
      r.number(item, where, "beta", reg.beta);
      const bool eps = item.contains("epsilon"), lam = item.contains("lambda"),
                 beta = item.contains("beta");
      if (eps && reg.kind != Regularizer::Kind::reweighted_l1) {
        r.fail(where + ".epsilon", "only valid for reweighted_l1");
      }
      if (lam && reg.kind != Regularizer::Kind::l0) r.fail(where + ".lambda", "only valid for l0");
      if (beta && reg.kind != Regularizer::Kind::elastic_net) {
        r.fail(where + ".beta", "only valid for elastic_net");
      }
    }
    if (reg.kind == Regularizer::Kind::reweighted_l1 && !(reg.epsilon > 0.0)) {
      r.fail(where + ".epsilon", "must be positive");
    }
    if (reg.kind == Regularizer::Kind::l0 && !(reg.lambda > 0.0)) {
      r.fail(where + ".lambda", "must be positive");
    }
    if (reg.kind == Regularizer::Kind::elastic_net && !(reg.beta >= 0.0)) {
      r.fail(where + ".beta", "must be nonnegative");
    }
    regs.push_back(reg);
  }
  out = std::move(regs);
}

void read_topology(Reader& r, const json& j, TopologySpec& t) {
  const std::string path = "topology";
  if (!r.object(j, path)) return;
  r.only_keys(j, path, {"type", "agents", "k_neighbors", "path", "points"});
  if (j.contains("type")) {
    std::string name;
    r.string(j, path, "type", name);
    if (name == "random_knn") t.type = TopologySpec::Type::random_knn;
    else if (name == "ring") t.type = TopologySpec::Type::ring;
    else if (name == "file") t.type = TopologySpec::Type::file;
    else if (name == "points") t.type = TopologySpec::Type::points;
    else r.fail(path + ".type", "expected random_knn, ring, file or points");
  }
  r.integer(j, path, "agents", t.agents);
  r.integer(j, path, "k_neighbors", t.k_neighbors);
  r.string(j, path, "path", t.path);
  if (j.contains("points")) {
    const auto& pts = j.at("points");
    t.points.clear();
    if (!pts.is_array()) {
      r.fail(path + ".points", "expected an array of [x, y] pairs");
    } else {
      for (std::size_t i = 0; i < pts.size(); ++i) {
        const auto& p = pts[i];
        if (!p.is_array() || p.size() != 2 || !p[0].is_number() || !p[1].is_number()) {
          r.fail(path + ".points[" + std::to_string(i) + "]", "expected [x, y]");
          continue;
        }
        t.points.push_back({p[0].get<double>(), p[1].get<double>()});
      }
      t.agents = t.points.size();
    }
  }
}

void read_models(Reader& r, const json& j, ModelSpec& m) {
  const std::string path = "models";
  if (!r.object(j, path)) return;
  r.only_keys(j, path,
              {"type", "family", "dimension", "tau", "ridge", "feature_variance", "noise_variance"});
  if (j.contains("type")) {
    std::string name;
    r.string(j, path, "type", name);
    if (name == "sparse") m.type = ModelSpec::Type::sparse;
    else if (name == "smooth") m.type = ModelSpec::Type::smooth;
    else r.fail(path + ".type", "expected sparse or smooth");
  }
  if (j.contains("family")) {
    std::string name;
    r.string(j, path, "family", name);
    if (name == "mse") m.family = ModelSpec::Family::mse;
    else if (name == "logistic") m.family = ModelSpec::Family::logistic;
    else r.fail(path + ".family", "expected mse or logistic");
  }
  r.integer(j, path, "dimension", m.dimension);
  r.number(j, path, "tau", m.tau);
  r.number(j, path, "ridge", m.ridge);
  auto range = [&](const char* key, double& lo, double& hi) {
    if (!j.contains(key)) return;
    const auto& v = j.at(key);
    if (!v.is_array() || v.size() != 2 || !v[0].is_number() || !v[1].is_number()) {
      r.fail(path + "." + key, "expected [low, high]");
      return;
    }
    lo = v[0].get<double>();
    hi = v[1].get<double>();
  };
  range("feature_variance", m.variances.feature_lo, m.variances.feature_hi);
  range("noise_variance", m.variances.noise_lo, m.variances.noise_hi);
}

void read_solver(Reader& r, const json& j, SweepSpec& s) {
  const std::string path = "solver";
  if (!r.object(j, path)) return;
  r.only_keys(j, path, {"mu", "eta", "eta_per_mu", "iterations", "init", "gradients"});
  r.numbers(j, path, "mu", s.mu);
  if (j.contains("eta")) {
    r.numbers(j, path, "eta", s.eta);
    s.eta_per_mu.reset();
  }
  if (j.contains("eta_per_mu")) {
    double v = 0.0;
    r.number(j, path, "eta_per_mu", v);
    s.eta_per_mu = v;
  }
  if (j.contains("eta") && j.contains("eta_per_mu")) {
    r.fail(path, "eta and eta_per_mu are mutually exclusive");
  }
  r.integer(j, path, "iterations", s.iterations);
  if (j.contains("init")) {
    std::string name;
    r.string(j, path, "init", name);
    if (name == "zeros") s.init = Initialization::Kind::zeros;
    else if (name == "gaussian") s.init = Initialization::Kind::gaussian;
    else r.fail(path + ".init", "expected zeros or gaussian");
  }
  if (j.contains("gradients")) {
    std::string name;
    r.string(j, path, "gradients", name);
    if (name == "stochastic") s.gradients = GradientMode::stochastic;
    else if (name == "exact") s.gradients = GradientMode::exact;
    else r.fail(path + ".gradients", "expected stochastic or exact");
  }
}

void read_metrics(Reader& r, const json& j, MetricSpec& m) {
  const std::string path = "metrics";
  if (!r.object(j, path)) return;
  r.only_keys(j, path, {"reference", "window", "convergence_tolerance_db", "require_convergence",
                        "reference_tolerance"});
  if (j.contains("reference")) {
    std::string name;
    r.string(j, path, "reference", name);
    if (name == "regularized_solution") m.reference = ReferenceKind::regularized_solution;
    else if (name == "local_models") m.reference = ReferenceKind::local_models;
    else r.fail(path + ".reference", "expected regularized_solution or local_models");
  }
  r.integer(j, path, "window", m.window);
  r.number(j, path, "convergence_tolerance_db", m.convergence_tolerance_db);
  r.boolean(j, path, "require_convergence", m.require_convergence);
  r.number(j, path, "reference_tolerance", m.reference_tolerance);
}

void read_output(Reader& r, const json& j, OutputSpec& o) {
  const std::string path = "output";
  if (!r.object(j, path)) return;
  r.only_keys(j, path, {"directory", "trajectories"});
  r.string(j, path, "directory", o.directory);
  r.boolean(j, path, "trajectories", o.trajectories);
}

void read_weather(Reader& r, const json& j, WeatherSpec& w) {
  const std::string path = "dataset";
  if (!r.object(j, path)) return;
  r.only_keys(j, path, {"path", "k_neighbors", "train_years", "test_years", "mu", "ridge",
                        "tail_window"});
  r.string(j, path, "path", w.path);
  r.integer(j, path, "k_neighbors", w.k_neighbors);
  auto years = [&](const char* key, int& first, int& last) {
    if (!j.contains(key)) return;
    const auto& v = j.at(key);
    if (!v.is_array() || v.size() != 2 || !v[0].is_number_integer() || !v[1].is_number_integer()) {
      r.fail(path + "." + key, "expected [first_year, last_year]");
      return;
    }
    first = v[0].get<int>();
    last = v[1].get<int>();
  };
  years("train_years", w.train_first_year, w.train_last_year);
  years("test_years", w.test_first_year, w.test_last_year);
  r.number(j, path, "mu", w.mu);
  r.number(j, path, "ridge", w.ridge);
  r.integer(j, path, "tail_window", w.tail_window);
}

std::vector<std::string> check(const ExperimentConfig& c) {
  std::vector<std::string> e;
  if (c.runs == 0) e.push_back("runs: must be positive");
  if (c.runs_l0 == 0) e.push_back("runs_l0: must be positive");
  if (c.regularizers.empty()) e.push_back("regularizers: at least one is required");
  for (std::size_t i = 0; i < c.regularizers.size(); ++i) {
    try {
      c.regularizers[i].validate();
    } catch (const InvalidArgument& ex) {
      e.push_back("regularizers[" + std::to_string(i) + "]: " + ex.what());
    }
  }
  if (c.kind == ExperimentKind::weather) {
    if (c.weather.path.empty()) e.push_back("dataset.path: required for the weather experiment");
    if (c.weather.k_neighbors == 0) e.push_back("dataset.k_neighbors: must be positive");
    if (!(c.weather.mu > 0.0)) e.push_back("dataset.mu: must be positive");
    if (!(c.weather.ridge >= 0.0)) e.push_back("dataset.ridge: must be nonnegative");
    if (c.weather.train_first_year > c.weather.train_last_year) {
      e.push_back("dataset.train_years: first year after last year");
    }
    if (c.weather.test_first_year > c.weather.test_last_year) {
      e.push_back("dataset.test_years: first year after last year");
    }
    if (c.weather.tail_window == 0) e.push_back("dataset.tail_window: must be positive");
    if (c.solver.eta.empty()) e.push_back("solver.eta: at least one value is required");
  } else {
    const auto& t = c.topology;
    if (t.type == TopologySpec::Type::file && t.path.empty()) {
      e.push_back("topology.path: required for a file topology");
    }
    if (t.type == TopologySpec::Type::points && t.points.size() < 2) {
      e.push_back("topology.points: at least two points are required");
    }
    if ((t.type == TopologySpec::Type::random_knn || t.type == TopologySpec::Type::ring) &&
        t.agents == 0) {
      e.push_back("topology.agents: must be positive");
    }
    if ((t.type == TopologySpec::Type::random_knn || t.type == TopologySpec::Type::points) &&
        (t.k_neighbors == 0 || t.k_neighbors >= t.agents)) {
      e.push_back("topology.k_neighbors: must be in [1, agents - 1]");
    }
    if (c.models.dimension == 0) e.push_back("models.dimension: must be positive");
    if (c.models.type == ModelSpec::Type::smooth && !(c.models.tau > 0.0)) {
      e.push_back("models.tau: must be positive");
    }
    if (!(c.models.ridge >= 0.0)) e.push_back("models.ridge: must be nonnegative");
    const auto& v = c.models.variances;
    if (!(v.feature_lo > 0.0) || v.feature_hi < v.feature_lo) {
      e.push_back("models.feature_variance: need 0 < low <= high");
    }
    if (!(v.noise_lo >= 0.0) || v.noise_hi < v.noise_lo) {
      e.push_back("models.noise_variance: need 0 <= low <= high");
    }
    if (c.solver.mu.empty()) e.push_back("solver.mu: at least one value is required");
    for (std::size_t i = 0; i < c.solver.mu.size(); ++i) {
      if (!(c.solver.mu[i] > 0.0)) e.push_back("solver.mu[" + std::to_string(i) + "]: must be positive");
    }
    if (!c.solver.eta_per_mu && c.solver.eta.empty()) {
      e.push_back("solver.eta: at least one value is required");
    }
    if (c.solver.eta_per_mu && !(*c.solver.eta_per_mu >= 0.0)) {
      e.push_back("solver.eta_per_mu: must be nonnegative");
    }
    if (c.solver.iterations <= c.metrics.window) {
      e.push_back("solver.iterations: must exceed metrics.window (" +
                  std::to_string(c.metrics.window) + ")");
    }
    if (c.solver.gradients == GradientMode::exact && c.models.family == ModelSpec::Family::logistic) {
      e.push_back("solver.gradients: exact gradients are only available for mse models");
    }
    if (c.metrics.reference == ReferenceKind::regularized_solution) {
      for (std::size_t i = 0; i < c.regularizers.size(); ++i) {
        const auto k = c.regularizers[i].kind;
        if (k == Regularizer::Kind::l0 || k == Regularizer::Kind::reweighted_l1) {
          e.push_back("regularizers[" + std::to_string(i) +
                      "]: the regularized-solution reference needs l1, elastic_net or squared_l2");
        }
      }
    }
  }
  for (std::size_t i = 0; i < c.solver.eta.size(); ++i) {
    if (!(c.solver.eta[i] >= 0.0)) e.push_back("solver.eta[" + std::to_string(i) + "]: must be nonnegative");
  }
  if (c.metrics.window == 0) e.push_back("metrics.window: must be positive");
  if (!(c.metrics.reference_tolerance > 0.0)) e.push_back("metrics.reference_tolerance: must be positive");
  if (!(c.metrics.convergence_tolerance_db > 0.0)) {
    e.push_back("metrics.convergence_tolerance_db: must be positive");
  }
  return e;
}

}  // namespace

ExperimentConfig default_config(ExperimentKind kind) {
  ExperimentConfig c;
  c.kind = kind;
  switch (kind) {
    case ExperimentKind::theorem_illustration:
      c.runs = 50;
      c.solver.mu = {0.00125, 0.0025, 0.005};
      c.solver.eta_per_mu = 50.0;
      c.solver.iterations = 6000;
      c.regularizers = {Regularizer::l1()};
      c.metrics.reference = ReferenceKind::regularized_solution;
      break;
    case ExperimentKind::eta_sweep_sparse:
      c.runs = 30;
      c.runs_l0 = 400;
      c.solver.mu = {0.005};
      c.solver.eta = linear_grid(0.0, 0.1, 11);
      c.solver.iterations = 3000;
      c.regularizers = all_regularizers(0.01, 1.0);
      break;
    case ExperimentKind::eta_sweep_smooth:
      c.runs = 50;
      c.runs_l0 = 400;
      c.models.type = ModelSpec::Type::smooth;
      c.models.tau = 5.0;
      c.solver.mu = {0.005};
      c.solver.eta = linear_grid(0.0, 0.05, 11);
      c.solver.iterations = 3000;
      c.regularizers = all_regularizers(1.0, 1.0);
      break;
    case ExperimentKind::weather:
      c.runs = 1;
      c.solver.mu = {};
      c.solver.eta = {0.0, 1.0, 4.0, 100.0, 1000.0, 2000.0, 5000.0, 10000.0};
      c.solver.init = Initialization::Kind::gaussian;
      c.regularizers = {Regularizer::l1(), Regularizer::elastic_net(1.0),
                        Regularizer::reweighted_l1(0.1), Regularizer::squared_l2()};
      c.models.family = ModelSpec::Family::logistic;
      c.models.dimension = 5;
      break;
    case ExperimentKind::custom:
      c.runs = 10;
      c.solver.mu = {0.005};
      c.solver.eta = {0.0};
      c.solver.iterations = 2000;
      c.regularizers = {Regularizer::l1()};
      break;
  }
  return c;
}

std::string ExperimentConfig::canonical() const {
  json j;
  j["kind"] = std::string(to_string(kind));
  j["seed"] = seed;
  json regs = json::array();
  for (const auto& r : regularizers) regs.push_back(regularizer_json(r));
  j["regularizers"] = regs;
  j["solver"]["eta"] = solver.eta;
  if (kind == ExperimentKind::weather) {
    j["solver"]["init"] = init_name(solver.init);
    j["dataset"] = {{"path", weather.path},
                    {"k_neighbors", weather.k_neighbors},
                    {"train_years", {weather.train_first_year, weather.train_last_year}},
                    {"test_years", {weather.test_first_year, weather.test_last_year}},
                    {"mu", weather.mu},
                    {"ridge", weather.ridge},
                    {"tail_window", weather.tail_window}};
    return j.dump();
  }
  j["runs"] = runs;
  j["runs_l0"] = runs_l0;
  json topo = {{"type", topology_name(topology.type)}, {"agents", topology.agents},
               {"k_neighbors", topology.k_neighbors}};
  if (topology.type == TopologySpec::Type::file) topo["path"] = topology.path;
  if (topology.type == TopologySpec::Type::points) {
    json pts = json::array();
    for (const auto& p : topology.points) pts.push_back({p.x, p.y});
    topo["points"] = pts;
  }
  j["topology"] = topo;
  j["models"] = {{"type", models.type == ModelSpec::Type::sparse ? "sparse" : "smooth"},
                 {"family", models.family == ModelSpec::Family::mse ? "mse" : "logistic"},
                 {"dimension", models.dimension},
                 {"tau", models.tau},
                 {"ridge", models.ridge},
                 {"feature_variance", {models.variances.feature_lo, models.variances.feature_hi}},
                 {"noise_variance", {models.variances.noise_lo, models.variances.noise_hi}}};
  j["solver"]["mu"] = solver.mu;
  if (solver.eta_per_mu) {
    j["solver"]["eta_per_mu"] = *solver.eta_per_mu;
    j["solver"].erase("eta");
  }
  j["solver"]["iterations"] = solver.iterations;
  j["solver"]["init"] = init_name(solver.init);
  j["solver"]["gradients"] = solver.gradients == GradientMode::exact ? "exact" : "stochastic";
  j["metrics"] = {{"reference", metrics.reference == ReferenceKind::local_models
                                    ? "local_models"
                                    : "regularized_solution"},
                  {"window", metrics.window},
                  {"convergence_tolerance_db", metrics.convergence_tolerance_db},
                  {"require_convergence", metrics.require_convergence},
                  {"reference_tolerance", metrics.reference_tolerance}};
  return j.dump();
}

std::uint64_t ExperimentConfig::digest() const { return fnv1a64(canonical()); }

ExperimentConfig parse_experiment_config(std::string_view json_text) {
  json doc;
  try {
    doc = json::parse(json_text.begin(), json_text.end());
  } catch (const json::parse_error& e) {
    throw ConfigError({std::string("config: invalid JSON: ") + e.what()});
  }
  Reader r;
  if (!doc.is_object()) throw ConfigError({"config: expected a JSON object at the top level"});
  if (!doc.contains("kind") || !doc.at("kind").is_string()) {
    throw ConfigError({"kind: required, one of theorem_illustration, eta_sweep_sparse, "
                       "eta_sweep_smooth, weather, custom"});
  }
  const auto kind_name = doc.at("kind").get<std::string>();
  ExperimentKind kind;
  if (kind_name == "theorem_illustration") kind = ExperimentKind::theorem_illustration;
  else if (kind_name == "eta_sweep_sparse") kind = ExperimentKind::eta_sweep_sparse;
  else if (kind_name == "eta_sweep_smooth") kind = ExperimentKind::eta_sweep_smooth;
  else if (kind_name == "weather") kind = ExperimentKind::weather;
  else if (kind_name == "custom") kind = ExperimentKind::custom;
  else throw ConfigError({"kind: unknown experiment kind '" + kind_name + "'"});

  ExperimentConfig c = default_config(kind);
  r.only_keys(doc, "", {"kind", "seed", "runs", "runs_l0", "topology", "models", "solver",
                        "regularizers", "metrics", "output", "dataset"});
  r.integer(doc, "", "seed", c.seed);
  r.integer(doc, "", "runs", c.runs);
  r.integer(doc, "", "runs_l0", c.runs_l0);
  if (doc.contains("topology")) read_topology(r, doc.at("topology"), c.topology);
  if (doc.contains("models")) read_models(r, doc.at("models"), c.models);
  if (doc.contains("solver")) read_solver(r, doc.at("solver"), c.solver);
  if (doc.contains("regularizers")) read_regularizers(r, doc.at("regularizers"), c.regularizers);
  if (doc.contains("metrics")) read_metrics(r, doc.at("metrics"), c.metrics);
  if (doc.contains("output")) read_output(r, doc.at("output"), c.output);
  if (doc.contains("dataset")) read_weather(r, doc.at("dataset"), c.weather);
  auto errors = std::move(r.errors);
  for (auto& e : check(c)) errors.push_back(std::move(e));
  if (!errors.empty()) throw ConfigError(std::move(errors));
  return c;
}

ExperimentConfig load_experiment_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError({"config: cannot open " + path});
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_experiment_config(ss.str());
}

void validate(const ExperimentConfig& config) {
  auto errors = check(config);
  if (!errors.empty()) throw ConfigError(std::move(errors));
}

}  // namespace mtgraph
