#include <algorithm>
#include <string>

#include "doctest.h"
#include "mtgraph/config.hpp"
#include "mtgraph/errors.hpp"

using namespace mtgraph;

namespace {

std::vector<std::string> diagnostics(const std::string& text) {
  try {
    parse_experiment_config(text);
  } catch (const ConfigError& e) {
    return e.diagnostics();
  }
  return {};
}

bool mentions(const std::vector<std::string>& d, const std::string& needle) {
  return std::any_of(d.begin(), d.end(), [&](const std::string& s) { return s.find(needle) != std::string::npos; });
}

}  // namespace

TEST_CASE("defaults per kind") {
  const auto t = parse_experiment_config(R"({"kind": "theorem_illustration"})");
  CHECK(t.runs == 50);
  CHECK(t.solver.mu == std::vector<double>{0.00125, 0.0025, 0.005});
  REQUIRE(t.solver.eta_per_mu);
  CHECK(*t.solver.eta_per_mu == 50.0);
  CHECK(t.metrics.reference == ReferenceKind::regularized_solution);

  const auto s = parse_experiment_config(R"({"kind": "eta_sweep_sparse"})");
  CHECK(s.runs == 30);
  CHECK(s.runs_l0 == 400);
  CHECK(s.solver.eta.size() == 11);
  CHECK(s.solver.eta.back() == doctest::Approx(0.1));
  CHECK(s.regularizers.size() == 5);
  CHECK(s.topology.agents == 20);
  CHECK(s.topology.k_neighbors == 3);
  CHECK(s.models.dimension == 10);

  const auto m = parse_experiment_config(R"({"kind": "eta_sweep_smooth"})");
  CHECK(m.models.type == ModelSpec::Type::smooth);
  CHECK(m.solver.eta.back() == doctest::Approx(0.05));

  const auto w = default_config(ExperimentKind::weather);
  CHECK(w.solver.eta.front() == 0.0);
  CHECK(w.solver.eta.back() == 10000.0);
  CHECK(w.weather.mu == 5e-4);
  CHECK(w.weather.k_neighbors == 4);
}

TEST_CASE("overrides and grids") {
  const auto c = parse_experiment_config(R"({
    "kind": "custom", "seed": 9, "runs": 3,
    "topology": {"type": "ring", "agents": 6},
    "models": {"type": "smooth", "dimension": 4, "tau": 2.0},
    "solver": {"mu": [0.01, 0.02], "eta": {"from": 0, "to": 1, "points": 5}, "iterations": 400},
    "regularizers": ["l1", {"kind": "elastic_net", "beta": 0.3}, {"kind": "l0", "lambda": 2}],
    "metrics": {"window": 100}
  })");
  CHECK(c.seed == 9);
  CHECK(c.topology.type == TopologySpec::Type::ring);
  CHECK(c.solver.eta == std::vector<double>{0.0, 0.25, 0.5, 0.75, 1.0});
  REQUIRE(c.regularizers.size() == 3);
  CHECK(c.regularizers[1].beta == 0.3);
  CHECK(c.regularizers[2].lambda == 2.0);
  CHECK(c.solver.iterations == 400);
}

TEST_CASE("every bad field gets its own diagnostic") {
  const auto d = diagnostics(R"({
    "kind": "custom", "runs": -1, "colour": 1,
    "solver": {"mu": [0.1, -0.2], "eta": "x", "init": "ones"},
    "regularizers": ["l3", {"kind": "l1", "beta": 1}],
    "topology": {"type": "star"}
  })");
  CHECK(mentions(d, "runs: expected a nonnegative integer"));
  CHECK(mentions(d, "colour: unknown key"));
  CHECK(mentions(d, "solver.eta: expected"));
  CHECK(mentions(d, "solver.init: expected zeros or gaussian"));
  CHECK(mentions(d, "regularizers[0].kind: unknown regularizer 'l3'"));
  CHECK(mentions(d, "regularizers[1].beta: only valid for elastic_net"));
  CHECK(mentions(d, "topology.type"));
  CHECK(d.size() >= 7);

  CHECK(mentions(diagnostics(R"({"kind": "custom", "solver": {"mu": [0.1, -0.2]}})"), "solver.mu[1]: must be positive"));
  CHECK(mentions(diagnostics(R"({"kind": "custom", "solver": {"iterations": 100}})"), "must exceed metrics.window"));
  CHECK(mentions(diagnostics(R"({"kind": "nope"})"), "unknown experiment kind"));
  CHECK(mentions(diagnostics(R"({"runs": 1})"), "kind: required"));
  CHECK(mentions(diagnostics("{not json"), "invalid JSON"));
  CHECK(mentions(diagnostics(R"({"kind": "weather"})"), "dataset.path"));
  CHECK(mentions(diagnostics(R"({"kind": "custom", "regularizers": ["l0"],
                                  "metrics": {"reference": "regularized_solution"}})"),
                 "regularized-solution reference"));
  CHECK(mentions(diagnostics(R"({"kind": "custom", "topology": {"agents": 3, "k_neighbors": 3}})"),
                 "topology.k_neighbors"));
}

TEST_CASE("eta and eta_per_mu are exclusive") {
  CHECK(mentions(diagnostics(R"({"kind": "custom", "solver": {"eta": [0.1], "eta_per_mu": 2}})"),
                 "mutually exclusive"));
  // an explicit eta grid replaces the default eta/mu ratio
  const auto c = parse_experiment_config(R"({"kind": "theorem_illustration", "solver": {"eta": [0.1]}})");
  CHECK_FALSE(c.solver.eta_per_mu);
}

TEST_CASE("digest ignores output settings") {
  const auto a = parse_experiment_config(R"({"kind": "custom", "output": {"directory": "a"}})");
  const auto b = parse_experiment_config(R"({"kind": "custom", "output": {"directory": "b", "trajectories": true}})");
  const auto c = parse_experiment_config(R"({"kind": "custom", "seed": 2})");
  CHECK(a.digest() == b.digest());
  CHECK(a.digest() != c.digest());
  CHECK(a.canonical().find("\"output\"") == std::string::npos);
  // re-parsing the canonical form of the result-bearing fields yields the same digest
  const auto again = parse_experiment_config(a.canonical());
  CHECK(again.digest() == a.digest());
}

TEST_CASE("shipped configs parse") {
  for (const char* name : {"theorem", "sweep_sparse", "sweep_smooth", "weather", "quick"}) {
    CAPTURE(name);
    const auto c = load_experiment_config(std::string(MTGRAPH_CONFIG_DIR) + "/" + name + ".json");
    CHECK(c.output.directory.rfind("out/", 0) == 0);
  }
  // the sparse file spells out the defaults
  const auto file = load_experiment_config(std::string(MTGRAPH_CONFIG_DIR) + "/sweep_sparse.json");
  auto defaults = default_config(ExperimentKind::eta_sweep_sparse);
  CHECK(file.digest() == defaults.digest());
  const auto smooth = load_experiment_config(std::string(MTGRAPH_CONFIG_DIR) + "/sweep_smooth.json");
  CHECK(smooth.digest() == default_config(ExperimentKind::eta_sweep_smooth).digest());
}

TEST_CASE("syntax and range problems are reported together") {
  const auto d = diagnostics(R"({"kind": "custom", "bogus": 1, "solver": {"mu": -1}})");
  CHECK(mentions(d, "bogus: unknown key"));
  CHECK(mentions(d, "solver.mu[0]: must be positive"));
}

TEST_CASE("linear grids land on decimal points") {
  const auto c = parse_experiment_config(R"({"kind": "custom", "solver": {"eta": {"from": 0, "to": 0.05, "points": 11}}})");
  CHECK(c.solver.eta[3] == 0.015);
  CHECK(c.solver.eta[6] == 0.03);
  CHECK(c.solver.eta[10] == 0.05);
}
