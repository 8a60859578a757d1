#include <algorithm>
#include <numeric>
#include <random>
#include <sstream>

#include "doctest.h"
#include "mtgraph/errors.hpp"
#include "mtgraph/graph.hpp"

using namespace mtgraph;

namespace {

Adjacency empty_adjacency(std::size_t k) { return Adjacency(k, std::vector<bool>(k, false)); }

void link(Adjacency& a, std::size_t i, std::size_t j) { a[i][j] = a[j][i] = true; }

}  // namespace

TEST_CASE("two-agent line weights") {
  auto a = empty_adjacency(2);
  link(a, 0, 1);
  Eigen::MatrixXd rho = Eigen::MatrixXd::Zero(2, 2);
  rho(0, 1) = rho(1, 0) = 1.0;
  auto net = build_network(a, rho);
  CHECK(net.p(0, 1) == 1.0);
  CHECK(net.p(1, 0) == 1.0);

  rho(0, 1) = 0.2;
  rho(1, 0) = 0.6;
  net = build_network(a, rho);
  CHECK(net.p(0, 1) == doctest::Approx(0.4));
  CHECK(net.p(1, 0) == net.p(0, 1));
  CHECK(net.links(0)[0].rho == 0.2);
}

TEST_CASE("ring of 20 with degree weights has p = 1/2") {
  const auto net = ring_network(20);
  CHECK(net.edges().size() == 20);
  for (const auto& e : net.edges()) CHECK(e.p == 0.5);
  for (std::size_t k = 0; k < 20; ++k) CHECK(net.degree(k) == 2);
}

TEST_CASE("build_network rejects bad input") {
  auto a = empty_adjacency(4);
  link(a, 0, 1);
  link(a, 2, 3);
  try {
    build_network(a, uniform_degree_weights(a));
    FAIL("expected DisconnectedGraph");
  } catch (const DisconnectedGraph& e) {
    REQUIRE(e.components().size() == 2);
    CHECK(e.components()[0] == std::vector<std::size_t>{0, 1});
    CHECK(e.components()[1] == std::vector<std::size_t>{2, 3});
  }
  auto b = empty_adjacency(2);
  b[0][1] = true;
  CHECK_THROWS_AS(build_network(b, Eigen::MatrixXd::Ones(2, 2)), InvalidArgument);
  auto c = empty_adjacency(2);
  link(c, 0, 1);
  Eigen::MatrixXd rho = Eigen::MatrixXd::Zero(2, 2);
  rho(0, 1) = 1.0;
  CHECK_THROWS_AS(build_network(c, rho), InvalidArgument);
  c[0][0] = true;
  CHECK_THROWS_AS(build_network(c, Eigen::MatrixXd::Ones(2, 2)), InvalidArgument);
}

TEST_CASE("adjacency round trips") {
  std::mt19937_64 rng(4);
  std::bernoulli_distribution coin(0.3);
  for (int t = 0; t < 20; ++t) {
    auto a = empty_adjacency(9);
    for (std::size_t i = 0; i + 1 < 9; ++i) link(a, i, i + 1);
    for (std::size_t i = 0; i < 9; ++i)
      for (std::size_t j = i + 2; j < 9; ++j)
        if (coin(rng)) link(a, i, j);
    const auto net = build_network(a, uniform_degree_weights(a));
    CHECK(net.adjacency() == a);
    for (std::size_t k = 0; k < 9; ++k) {
      for (const auto& l : net.links(k)) {
        CHECK(net.p(k, l.neighbor) == net.p(l.neighbor, k));
        CHECK(l.rho == doctest::Approx(1.0 / double(net.degree(k))));
      }
    }
  }
}

TEST_CASE("knn examples") {
  const std::vector<Point2> line{{0, 0}, {1, 0}, {2, 0}};
  auto net = knn_network(line, 1);
  CHECK(net.linked(0, 1));
  CHECK(net.linked(1, 2));
  CHECK_FALSE(net.linked(0, 2));

  const std::vector<Point2> square{{0, 0}, {1, 0}, {1, 1}, {0, 1}};
  net = knn_network(square, 2);
  CHECK(net.edges().size() == 4);
  CHECK_FALSE(net.linked(0, 2));
  CHECK_FALSE(net.linked(1, 3));
}

TEST_CASE("knn rejects duplicates, small K and disconnection") {
  const std::vector<Point2> dup{{0, 0}, {0, 0}, {1, 1}};
  CHECK_THROWS_AS(knn_network(dup, 1), InvalidArgument);
  const std::vector<Point2> two{{0, 0}, {1, 1}};
  CHECK_THROWS_AS(knn_network(two, 2), InvalidArgument);
  const std::vector<Point2> clusters{{0, 0}, {0.1, 0}, {10, 0}, {10.1, 0}};
  CHECK_THROWS_AS(knn_network(clusters, 1), DisconnectedGraph);
}

TEST_CASE("knn is invariant under point permutation") {
  std::mt19937_64 rng(21);
  std::uniform_real_distribution<double> u(0, 1);
  for (int t = 0; t < 10; ++t) {
    std::vector<Point2> pts(25);
    for (auto& p : pts) p = {u(rng), u(rng)};
    Network base;
    try {
      base = knn_network(pts, 3);
    } catch (const DisconnectedGraph&) {
      continue;
    }
    std::vector<std::size_t> perm(pts.size());
    std::iota(perm.begin(), perm.end(), 0);
    std::shuffle(perm.begin(), perm.end(), rng);
    std::vector<Point2> shuffled(pts.size());
    for (std::size_t i = 0; i < pts.size(); ++i) shuffled[i] = pts[perm[i]];
    const auto net = knn_network(shuffled, 3);
    for (std::size_t i = 0; i < pts.size(); ++i)
      for (std::size_t j = 0; j < pts.size(); ++j)
        CHECK(net.linked(i, j) == base.linked(perm[i], perm[j]));
  }
}

TEST_CASE("laplacian and components") {
  const auto net = ring_network(5);
  const auto L = laplacian(net);
  CHECK(L.rowwise().sum().norm() == 0.0);
  CHECK(L(0, 0) == 2.0);
  CHECK(L(0, 1) == -1.0);
  CHECK(connected_components(net.adjacency()).size() == 1);
}

TEST_CASE("topology files") {
  std::istringstream knn("# grid\nknn 1\nagent id=0 x=0 y=0\nagent id=1 x=1 y=0\nagent id=2 x=2 y=0\n");
  auto net = parse_topology(knn);
  CHECK(net.edges().size() == 2);

  std::istringstream lists("agent id=0 neighbors=1,2\nagent id=1 neighbors=\nagent id=2 neighbors=3\nagent id=3 neighbors=\n");
  net = parse_topology(lists);
  CHECK(net.linked(0, 1));
  CHECK(net.linked(2, 3));
  CHECK(net.p(0, 1) == doctest::Approx(0.75));  // (1/2 + 1) / 2

  std::ostringstream out;
  write_topology(out, net);
  std::istringstream back(out.str());
  CHECK(parse_topology(back).adjacency() == net.adjacency());

  std::istringstream bad("agent id=0 colour=red\n");
  CHECK_THROWS_AS(parse_topology(bad), ConfigError);
  std::istringstream gap("agent id=0 neighbors=2\nagent id=2 neighbors=\n");
  CHECK_THROWS_AS(parse_topology(gap), ConfigError);
}
