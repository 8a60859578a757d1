#include <cmath>
#include <random>
#include <vector>

#include "doctest.h"
#include "mtgraph/errors.hpp"
#include "mtgraph/prox.hpp"
#include "mtgraph/prox_oracle.hpp"
#include "oracles.hpp"

using namespace mtgraph;

namespace {

ProxProblem fig2(double beta) {
  return ProxProblem::make({{-2.0, 0.1}, {1.0, 0.5}, {5.0, 0.4}}, 1.0, beta);
}

double scale_of(const ProxProblem& p) {
  double total = 0, weighted = 0, bmax = 1;
  for (const auto& a : p.anchors) {
    total += a.c;
    weighted += std::abs(a.c * a.b);
    bmax = std::max(bmax, std::abs(a.b));
  }
  return std::max({bmax * (1 + p.gamma * p.beta * total), p.gamma * total, p.gamma * p.beta * weighted});
}

}  // namespace

TEST_CASE("single anchor reduces to soft thresholding") {
  const auto p = ProxProblem::make({{0.0, 1.0}}, 1.0, 0.0);
  CHECK(prox_elastic_net_sum(3.0, p) == 2.0);
  CHECK(prox_elastic_net_sum(0.5, p) == 0.0);
  CHECK(prox_elastic_net_sum(-3.0, p) == -2.0);
  for (double v : {-7.5, -1.0, -0.25, 0.0, 0.999, 1.0, 1.001, 4.2}) {
    const double soft = std::copysign(std::max(std::abs(v) - 1.0, 0.0), v);
    CHECK(prox_l1_sum(v, p) == doctest::Approx(soft).epsilon(1e-15));
  }
}

TEST_CASE("figure 2 elastic-net example agrees with the oracles") {
  const auto p = fig2(0.5);
  const auto obj = elastic_net_sum_objective(p);
  for (double v : {-4.0, 1.0, 8.0}) {
    const double brute = brute_force_prox_oracle(v, obj, 1.0, oracle_interval(v, p), 1e-5, p.anchors);
    const double bisect = static_cast<double>(oracle::elastic_net_prox(v, p.anchors, 1.0L, 0.5L));
    const double closed = prox_elastic_net_sum(v, p);
    CHECK(std::abs(closed - brute) <= 1e-4);
    CHECK(std::abs(closed - bisect) < 1e-12);
  }
  // With the quadratic term the flat piece at b = 1 is left: the subgradient
  // at x = 1 is -0.45, so the minimizer moves right to 1 + 0.45 / 1.5.
  CHECK(prox_elastic_net_sum(1.0, p) == doctest::Approx(1.3).epsilon(1e-14));
  // Without it v = 1 stays on the anchor.
  CHECK(prox_elastic_net_sum(1.0, fig2(0.0)) == 1.0);
}

TEST_CASE("figure 2 l1 example: far right piece is v - sum c") {
  const auto p = fig2(0.0);
  for (double v : {6.01, 7.0, 50.0, 1e6}) {
    CHECK(prox_l1_sum(v, p) == doctest::Approx(v - 1.0).epsilon(1e-15));
  }
}

TEST_CASE("l1 prox equals elastic net with beta zero bit for bit") {
  std::mt19937_64 rng(11);
  for (int t = 0; t < 500; ++t) {
    auto r = oracle::random_problem(rng, 6);
    const auto p = ProxProblem::make(r.anchors, r.gamma, 0.0);
    auto q = p;
    q.beta = 1.7;
    CHECK(prox_l1_sum(r.v, q) == prox_elastic_net_sum(r.v, p));
  }
}

TEST_CASE("closed form matches the bisection oracle on random problems") {
  std::mt19937_64 rng(2024);
  for (int t = 0; t < 2000; ++t) {
    auto r = oracle::random_problem(rng, 6);
    const auto p = ProxProblem::make(r.anchors, r.gamma, r.beta);
    const long double want = oracle::elastic_net_prox(r.v, p.anchors, r.gamma, r.beta);
    REQUIRE(std::abs(prox_elastic_net_sum(r.v, p) - static_cast<double>(want)) < 1e-10);
  }
}

TEST_CASE("partition boundaries tile the line and match the piece formulas") {
  std::mt19937_64 rng(7);
  for (int t = 0; t < 2000; ++t) {
    auto r = oracle::random_problem(rng, 6);
    const auto p = ProxProblem::make(r.anchors, r.gamma, r.beta);
    const auto part = elastic_net_partition(p);
    const auto ref = oracle::elastic_net_boundaries(p.anchors, p.gamma, p.beta);
    const double scale = scale_of(p);
    REQUIRE(part.at_anchor.size() == p.anchors.size());
    CHECK(part.head_end == part.at_anchor[0].lo);
    for (std::size_t n = 0; n < p.anchors.size(); ++n) {
      const auto& at = part.at_anchor[n];
      const auto& after = part.after_anchor[n];
      CHECK(at.lo <= at.hi);
      CHECK(after.lo <= after.hi);
      CHECK(oracle::ulps(at.lo, ref.start[n], scale) <= 8);
      CHECK(oracle::ulps(at.lo, ref.affine_in[n], scale) <= 8);
      CHECK(oracle::ulps(at.hi, ref.stop[n], scale) <= 8);
      CHECK(oracle::ulps(after.lo, ref.affine_out[n], scale) <= 8);
      CHECK(at.hi == after.lo);
      if (n + 1 < p.anchors.size()) CHECK(after.hi == part.at_anchor[n + 1].lo);
    }
    CHECK(std::isinf(part.after_anchor.back().hi));
  }
}

TEST_CASE("boundary values take the left-closed piece") {
  const auto p = fig2(0.0);
  const auto part = elastic_net_partition(p);
  for (std::size_t n = 0; n < p.anchors.size(); ++n) {
    CHECK(prox_l1_sum(part.at_anchor[n].lo, p) == p.anchors[n].b);
    const double just_below = std::nextafter(part.at_anchor[n].lo, -1e300);
    CHECK(prox_l1_sum(just_below, p) <= p.anchors[n].b);
  }
}

TEST_CASE("convex prox is monotone, non-expansive and shift equivariant") {
  std::mt19937_64 rng(99);
  std::uniform_real_distribution<double> uv(-20, 20), us(-5, 5);
  for (int t = 0; t < 1000; ++t) {
    auto r = oracle::random_problem(rng, 6);
    const auto p = ProxProblem::make(r.anchors, r.gamma, r.beta);
    double v1 = uv(rng), v2 = uv(rng);
    if (v1 > v2) std::swap(v1, v2);
    const double x1 = prox_elastic_net_sum(v1, p), x2 = prox_elastic_net_sum(v2, p);
    CHECK(x1 <= x2);
    CHECK(x2 - x1 <= (v2 - v1) * (1 + 1e-12) + 1e-12);

    const double s = us(rng);
    auto shifted = r.anchors;
    for (auto& a : shifted) a.b += s;
    const auto ps = ProxProblem::make(shifted, r.gamma, r.beta);
    CHECK(prox_elastic_net_sum(v1 + s, ps) == doctest::Approx(x1 + s).epsilon(1e-12).scale(30));
  }
}

TEST_CASE("make merges duplicate anchors and validate rejects bad problems") {
  const auto p = ProxProblem::make({{1.0, 0.25}, {-1.0, 0.5}, {1.0, 0.5}}, 2.0);
  REQUIRE(p.anchors.size() == 2);
  CHECK(p.anchors[0].b == -1.0);
  CHECK(p.anchors[1].c == 0.75);
  CHECK_THROWS_AS(ProxProblem::make({{0.0, 0.0}}, 1.0), InvalidArgument);
  CHECK_THROWS_AS(ProxProblem::make({{0.0, 1.0}}, 0.0), InvalidArgument);
  CHECK_THROWS_AS(ProxProblem::make({{0.0, 1.0}}, 1.0, -0.1), InvalidArgument);
  ProxProblem unsorted;
  unsorted.anchors = {{1.0, 1.0}, {0.0, 1.0}};
  CHECK_THROWS_AS(prox_elastic_net_sum(0.0, unsorted), InvalidArgument);
}

TEST_CASE("l0 prox examples") {
  const auto p = ProxProblem::make({{0.0, 1.0}}, 1.0, 0.0, 1.0);
  auto r = prox_l0_sum(2.0, p);
  CHECK(r.values == std::vector<double>{2.0});
  r = prox_l0_sum(1.0, p);
  CHECK(r.values == std::vector<double>{0.0});
  r = prox_l0_sum(std::sqrt(2.0), p);
  REQUIRE(r.values.size() == 2);
  CHECK(r.values[0] == 0.0);
  CHECK(r.values[1] == std::sqrt(2.0));
  CHECK(r.selected == 0.0);

  // v on an anchor whose value is the lowest: stay.
  const auto q = ProxProblem::make({{-1.0, 0.2}, {0.5, 3.0}, {2.0, 0.1}}, 1.0, 0.0, 1.0);
  r = prox_l0_sum(0.5, q);
  CHECK(r.values == std::vector<double>{0.5});
  CHECK(r.selected == 0.5);
}

TEST_CASE("l0 prox returns exactly the exhaustive argmin set") {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> ul(0.1, 3);
  for (int t = 0; t < 2000; ++t) {
    auto r = oracle::random_problem(rng, 5);
    const double lambda = ul(rng);
    const auto p = ProxProblem::make(r.anchors, r.gamma, 0.0, lambda);
    const auto got = prox_l0_sum(r.v, p);
    const auto want = oracle::l0_argmin(r.v, p.anchors, r.gamma, lambda, 0.0L);
    REQUIRE(got.values == want);
    bool found = false;
    for (double x : got.values) found |= x == got.selected;
    CHECK(found);
  }
}

TEST_CASE("l0 shift equivariance holds on the candidate set") {
  const auto p = ProxProblem::make({{-1.0, 0.5}, {2.0, 0.25}}, 0.5, 0.0, 2.0);
  for (double v : {-3.0, -1.0, 0.0, 0.7, 2.0, 5.0}) {
    const auto base = prox_l0_sum(v, p);
    const auto shifted = prox_l0_sum(v + 4.0, ProxProblem::make({{3.0, 0.5}, {6.0, 0.25}}, 0.5, 0.0, 2.0));
    REQUIRE(base.values.size() == shifted.values.size());
    for (std::size_t i = 0; i < base.values.size(); ++i) CHECK(shifted.values[i] == base.values[i] + 4.0);
  }
}

TEST_CASE("reweight coefficients") {
  Eigen::VectorXd d = Eigen::VectorXd::Zero(3);
  CHECK(reweight_coefficients(d, 1.0, 0.1).isApprox(Eigen::VectorXd::Constant(3, 10.0)));
  d << 0.9, -0.9, 0.0;
  const auto w = reweight_coefficients(d, 1.0, 0.1);
  CHECK(w[0] == doctest::Approx(1.0));
  CHECK(w[1] == doctest::Approx(1.0));
  CHECK((reweight_coefficients(d, 3.0, 0.1) - 3.0 * w).norm() < 1e-12);
  CHECK_THROWS_AS(reweight_coefficients(d, 1.0, 0.0), InvalidArgument);
}

TEST_CASE("social step: single l1 neighbor soft-thresholds toward it") {
  Eigen::VectorXd psi(3), nb(3);
  psi << 1.0, -0.2, 5.0;
  nb << 0.0, 0.0, 0.0;
  const NeighborEstimate n[] = {{&nb, 0.5}};
  const auto out = prox_social_step(psi, n, 2.0, Regularizer::l1());
  CHECK(out[0] == 0.0);
  CHECK(out[1] == 0.0);
  CHECK(out[2] == doctest::Approx(4.0));
  CHECK(prox_social_step(psi, n, 0.0, Regularizer::l1()) == psi);
  CHECK(prox_social_step(psi, {}, 3.0, Regularizer::l1()) == psi);
}

TEST_CASE("social step: identical neighbors merge their weights") {
  std::mt19937_64 rng(3);
  std::normal_distribution<double> g;
  for (const auto& reg : {Regularizer::l1(), Regularizer::elastic_net(0.7), Regularizer::l0(0.4),
                          Regularizer::squared_l2(), Regularizer::reweighted_l1(0.1)}) {
    Eigen::VectorXd psi(4), nb(4);
    for (int m = 0; m < 4; ++m) {
      psi[m] = g(rng);
      nb[m] = g(rng);
    }
    const NeighborEstimate two[] = {{&nb, 0.3}, {&nb, 0.45}};
    const NeighborEstimate one[] = {{&nb, 0.75}};
    CHECK((prox_social_step(psi, two, 0.8, reg) - prox_social_step(psi, one, 0.8, reg)).norm() < 1e-14);
  }
}

TEST_CASE("social step: squared l2 is the weighted average map") {
  Eigen::VectorXd psi(2), a(2), b(2);
  psi << 1.0, 2.0;
  a << 0.0, -1.0;
  b << 3.0, 0.5;
  const NeighborEstimate n[] = {{&a, 0.25}, {&b, 0.5}};
  const double g = 0.4;
  const Eigen::VectorXd want = (psi + 2 * g * (0.25 * a + 0.5 * b)) / (1 + 2 * g * 0.75);
  CHECK((prox_social_step(psi, n, g, Regularizer::squared_l2()) - want).norm() < 1e-14);
}

TEST_CASE("social step: reweighted l1 uses frozen coefficients") {
  Eigen::VectorXd psi(2), nb(2);
  psi << 1.0, 0.05;
  nb << 0.0, 0.0;
  const NeighborEstimate n[] = {{&nb, 1.0}};
  const double g = 0.1, eps = 0.1;
  const auto out = prox_social_step(psi, n, g, Regularizer::reweighted_l1(eps));
  // coordinate 0: threshold g / (eps + 1) = 1/11; coordinate 1: g / 0.15 > 0.05
  CHECK(out[0] == doctest::Approx(1.0 - 0.1 / 1.1));
  CHECK(out[1] == 0.0);
}

TEST_CASE("social step: l1 subgradient stays inside sqrt(M) sum p") {
  std::mt19937_64 rng(8);
  std::normal_distribution<double> g(0, 3);
  std::uniform_real_distribution<double> up(0.05, 1.0), ug(0.01, 4.0);
  const int M = 6;
  for (int t = 0; t < 500; ++t) {
    Eigen::VectorXd psi(M);
    std::vector<Eigen::VectorXd> nb(3, Eigen::VectorXd(M));
    for (int m = 0; m < M; ++m) {
      psi[m] = g(rng);
      for (auto& x : nb) x[m] = g(rng);
    }
    std::vector<NeighborEstimate> n;
    double total = 0;
    for (auto& x : nb) {
      n.push_back({&x, up(rng)});
      total += n.back().p;
    }
    const double step = ug(rng);
    const auto out = prox_social_step(psi, n, step, Regularizer::l1());
    CHECK((psi - out).norm() / step <= std::sqrt(double(M)) * total * (1 + 1e-12));
  }
}

TEST_CASE("oracle plumbing") {
  const ScalarObjective zero = [](long double) { return 0.0L; };
  CHECK(brute_force_prox_oracle(1.25, zero, 1.0, {-5, 5}, 1e-6) == doctest::Approx(1.25).epsilon(1e-6));
  const auto p = ProxProblem::make({{0.0, 1.0}}, 1.0);
  const auto obj = elastic_net_sum_objective(p);
  CHECK(brute_force_prox_oracle(3.0, obj, 1.0, oracle_interval(3.0, p), 1e-6, p.anchors) ==
        doctest::Approx(2.0).epsilon(1e-6));
  CHECK_THROWS_AS(brute_force_prox_oracle(3.0, obj, 1.0, {-1.0, 1.0}, 1e-6, p.anchors), InvalidArgument);
}
