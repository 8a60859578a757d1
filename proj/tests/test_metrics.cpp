#include <cmath>
#include <vector>

#include "doctest.h"
#include "mtgraph/errors.hpp"
#include "mtgraph/metrics.hpp"

using namespace mtgraph;

TEST_CASE("msd recorder averages squared deviations over agents") {
  std::vector<Eigen::VectorXd> ref = {Eigen::Vector2d(1.0, 0.0), Eigen::Vector2d(0.0, 0.0)};
  MsdRecorder rec(ref, 2);
  std::vector<Eigen::VectorXd> w = {Eigen::Vector2d(1.0, 2.0), Eigen::Vector2d(3.0, 0.0)};
  rec(0, w, {});  // initialization is not recorded
  rec(1, w, {});
  w[1].setZero();
  rec(2, w, {});
  REQUIRE(rec.values().size() == 2);
  CHECK(rec.values()[0] == doctest::Approx((4.0 + 9.0) / 2));
  CHECK(rec.values()[1] == doctest::Approx(2.0));
  std::vector<Eigen::VectorXd> three(3, Eigen::Vector2d::Zero());
  CHECK_THROWS_AS(rec(3, three, {}), InvalidArgument);
}

TEST_CASE("steady-state decibels") {
  const std::vector<double> flat(500, 0.01);
  CHECK(steady_state_db(flat, 200) == doctest::Approx(-20.0));
  std::vector<double> halved = flat;
  for (auto& v : halved) v /= 2;
  CHECK(steady_state_db(flat, 200) - steady_state_db(halved, 200) == doctest::Approx(3.0103).epsilon(1e-4));

  std::vector<double> tail(300, 1.0);
  for (std::size_t i = 100; i < 300; ++i) tail[i] = i < 200 ? 1.0 : 3.0;
  CHECK(steady_state_db(tail, 200) == doctest::Approx(10 * std::log10(2.0)));
  CHECK_THROWS_AS(steady_state_db(std::vector<double>(200, 1.0), 200), InvalidArgument);
  CHECK_THROWS_AS(steady_state_db(flat, 0), InvalidArgument);
}

TEST_CASE("steady-state convergence check compares half windows") {
  const auto ok = check_steady_state(std::vector<double>(500, 0.01), 200, 0.2);
  CHECK(ok.converged);
  CHECK(ok.first_half_db == doctest::Approx(-20.0));
  std::vector<double> drifting(500);
  for (std::size_t i = 0; i < 500; ++i) drifting[i] = std::exp(-0.01 * static_cast<double>(i));
  const auto bad = check_steady_state(drifting, 200, 0.2);
  CHECK_FALSE(bad.converged);
  // a 10 log10 e * 0.01 * 100 = 4.34 dB gap between the halves
  CHECK(bad.first_half_db - bad.second_half_db == doctest::Approx(10 * std::log10(std::exp(1.0))).epsilon(1e-9));
}

TEST_CASE("average_runs keeps run order and rejects ragged input") {
  const auto c = average_runs({{1.0, 2.0}, {3.0, 6.0}}, ReferenceKind::local_models);
  CHECK(c.values == std::vector<double>{2.0, 4.0});
  CHECK(c.n_runs == 2);
  CHECK(c.reference_kind == ReferenceKind::local_models);
  CHECK_THROWS_AS(average_runs({{1.0}, {1.0, 2.0}}, ReferenceKind::local_models), InvalidArgument);
}

TEST_CASE("tail averager keeps the last window") {
  TailAverager tail(10, 3);
  for (std::size_t i = 0; i <= 10; ++i) {
    std::vector<Eigen::VectorXd> w = {Eigen::VectorXd::Constant(1, double(i))};
    tail(i, w, {});
  }
  CHECK(tail.average()[0][0] == doctest::Approx(9.0));
  TailAverager long_window(2, 5);
  std::vector<Eigen::VectorXd> w = {Eigen::VectorXd::Constant(1, 4.0)};
  long_window(0, w, {});
  CHECK_THROWS_AS(long_window.average(), InvalidArgument);
  long_window(1, w, {});
  CHECK(long_window.average()[0][0] == 4.0);
}

TEST_CASE("prediction error") {
  std::vector<std::vector<Sample>> test(2);
  test[0] = {{Eigen::Vector2d(1.0, 0.0), 1.0}, {Eigen::Vector2d(-1.0, 0.0), -1.0},
             {Eigen::Vector2d(0.0, 1.0), 1.0}, {Eigen::Vector2d(2.0, 0.0), -1.0}};
  test[1] = {{Eigen::Vector2d(1.0, 1.0), 1.0}, {Eigen::Vector2d(1.0, -1.0), 1.0}};
  std::vector<Eigen::VectorXd> w = {Eigen::Vector2d(1.0, 0.0), Eigen::Vector2d(0.0, 1.0)};
  // agent 0: third sample scores 0 (an error), fourth is wrong; agent 1: one of two wrong
  CHECK(prediction_error(w, test) == doctest::Approx((0.5 + 0.5) / 2));
  std::vector<Eigen::VectorXd> scaled = {7.0 * w[0], 0.01 * w[1]};
  CHECK(prediction_error(scaled, test) == prediction_error(w, test));
  std::vector<Eigen::VectorXd> zero(2, Eigen::Vector2d::Zero());
  CHECK(prediction_error(zero, test) == 1.0);

  // random labels against a fixed classifier land near one half
  std::vector<std::vector<Sample>> coin(1);
  std::uint64_t x = 88172645463325252ull;
  for (int i = 0; i < 20000; ++i) {
    x ^= x << 13;
    x ^= x >> 7;
    x ^= x << 17;
    coin[0].push_back({Eigen::Vector2d(1.0, 0.0), (x >> 11) & 1 ? 1.0 : -1.0});
  }
  std::vector<Eigen::VectorXd> one = {Eigen::Vector2d(1.0, 0.0)};
  CHECK(std::abs(prediction_error(one, coin) - 0.5) < 0.02);
  CHECK_THROWS_AS(prediction_error(one, test), InvalidArgument);
}

TEST_CASE("split_blocks") {
  Eigen::VectorXd s(6);
  s << 1, 2, 3, 4, 5, 6;
  const auto b = split_blocks(s, 3);
  CHECK(b[1] == Eigen::Vector2d(3, 4));
  CHECK_THROWS_AS(split_blocks(s, 4), InvalidArgument);
}
