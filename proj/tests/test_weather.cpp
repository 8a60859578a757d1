#include <cmath>
#include <sstream>

#include "doctest.h"
#include "mtgraph/errors.hpp"
#include "mtgraph/experiments.hpp"
#include "mtgraph/weather.hpp"

using namespace mtgraph;

namespace {

const std::string kFixture = std::string(MTGRAPH_TEST_DATA) + "/weather_mini.csv";

double z(double x, std::initializer_list<double> train) {
  double mean = 0;
  for (double v : train) mean += v;
  mean /= static_cast<double>(train.size());
  double var = 0;
  for (double v : train) var += (v - mean) * (v - mean);
  return (x - mean) / std::sqrt(var / static_cast<double>(train.size()));
}

}  // namespace

TEST_CASE("fixture ingests into three stations") {
  const auto ds = ingest_weather(kFixture);
  CHECK(ds.rows_read == 30);
  CHECK(ds.dropped() == 1);
  CHECK(ds.dropped_malformed == 1);
  REQUIRE(ds.stations == std::vector<std::string>{"S1", "S2", "S3"});
  for (std::size_t k = 0; k < 3; ++k) {
    CHECK(ds.train[k].size() == 5);
    CHECK(ds.test[k].size() == 5);
  }
  CHECK(ds.coordinates[0].x == -100.0);
  CHECK(ds.coordinates[0].y == 40.0);
  CHECK(ds.max_train_days() == 5);
  CHECK(ds.warnings.empty());

  // S1 temperature over its training days: 25.8, 36.7, 24.8, 34.8, 36.1
  const auto temps = {25.8, 36.7, 24.8, 34.8, 36.1};
  CHECK(ds.train[0][0].x[0] == doctest::Approx(z(25.8, temps)).epsilon(1e-12));
  CHECK(ds.train[0][3].x[0] == doctest::Approx(z(34.8, temps)).epsilon(1e-12));
  // test days reuse the training statistics
  CHECK(ds.test[0][0].x[0] == doctest::Approx(z(29.6, temps)).epsilon(1e-12));
  // S3 max wind over training days
  CHECK(ds.train[2][4].x[4] == doctest::Approx(z(18.1, {9.7, 8.0, 10.1, 15.2, 18.1})).epsilon(1e-12));

  const double labels[] = {-1, 1, -1, -1, 1};
  for (int i = 0; i < 5; ++i) CHECK(ds.train[0][i].y == labels[i]);
}

TEST_CASE("missing sentinels and malformed rows are dropped") {
  std::istringstream in(
      "# comment\n"
      "lat,lon,station,date,temp,dewp,visib,wdsp,mxspd,prcp,extra\n"
      "1,2,A,2012-01-01,1,2,3,4,5,0,x\n"
      "1,2,A,20120102,1,2,3,4,5,1,x\n"
      "1,2,A,2012-01-03,9999.9,2,3,4,5,0,x\n"
      "1,2,A,2012-01-04,1,2,999.9,4,5,0,x\n"
      "1,2,A,2012-01-05,1,NA,3,4,5,0,x\n"
      "1,2,A,2012-01-06,1,2,3,,5,0,x\n"
      "1,2,A,2012-01-07,1,2,3,4,5,,x\n"
      "1,2,A,2012-02-30,1,2,3,4,5,0,x\n"
      "1,2,A,2012-01-08,1,2,3,4,5,2,x\n"
      "1,2,A,2012-01-09,1,2,3,4\n"
      "1,200,A,2012-01-10,1,2,3,4,5,0,x\n"
      "\n");
  std::size_t missing = 0, malformed = 0;
  const auto rows = parse_weather_records(in, WeatherSchema{}, missing, malformed);
  REQUIRE(rows.size() == 2);
  CHECK(rows[1].day == 2);
  CHECK(rows[1].label == 1.0);
  CHECK(rows[0].label == -1.0);
  CHECK(rows[0].latitude == 1.0);
  CHECK(rows[0].longitude == 2.0);
  CHECK(missing == 5);
  CHECK(malformed == 4);
}

TEST_CASE("header problems raise config errors") {
  std::istringstream in("station,date,temp,dewp,visib,wdsp,prcp,lat\n");
  std::size_t a = 0, b = 0;
  try {
    parse_weather_records(in, WeatherSchema{}, a, b);
    FAIL("expected ConfigError");
  } catch (const ConfigError& e) {
    const auto& d = e.diagnostics();
    REQUIRE(d.size() == 3);
    CHECK(d[0].find("'mxspd'") != std::string::npos);
    CHECK(d[1].find("'lon'") != std::string::npos);
  }
  try {
    ingest_weather("/nonexistent/weather.csv");
    FAIL("expected ConfigError");
  } catch (const ConfigError& e) {
    CHECK(std::string(e.what()).find("prcp") != std::string::npos);
  }
}

TEST_CASE("stations without both splits are excluded with a warning") {
  std::vector<WeatherRecord> recs;
  auto add = [&](const std::string& s, int year, double t) {
    WeatherRecord r;
    r.station = s;
    r.year = year;
    r.month = 1;
    r.day = 1;
    r.features.setConstant(t);
    recs.push_back(r);
  };
  add("late", 2013, 1.0);
  add("early", 2010, 1.0);
  add("both", 2010, 1.0);
  add("both", 2011, 3.0);
  add("both", 2014, 2.0);
  add("both", 1990, 2.0);
  const auto ds = build_weather_dataset(recs, WeatherSplit{});
  REQUIRE(ds.stations == std::vector<std::string>{"both"});
  CHECK(ds.outside_split == 1);
  REQUIRE(ds.warnings.size() == 2);
  CHECK(ds.warnings[0].find("early") != std::string::npos);
  CHECK(ds.warnings[1].find("late") != std::string::npos);
  // mean 2, population sd 1
  CHECK(ds.train[0][0].x[0] == doctest::Approx(-1.0));
  CHECK(ds.test[0][0].x[0] == doctest::Approx(0.0));

  std::vector<WeatherRecord> flat(recs.begin() + 2, recs.begin() + 3);
  flat.push_back(recs[4]);
  const auto constant = build_weather_dataset(flat, WeatherSplit{});
  CHECK(constant.test[0][0].x[0] == doctest::Approx(1.0));  // zero spread leaves sd = 1
}

TEST_CASE("station graph from coordinates") {
  const auto ds = ingest_weather(kFixture);
  const auto net = weather_network(ds, 1);
  // S1 sits between S2 and S3, so both attach to it
  CHECK(net.size() == 3);
  CHECK(net.links(0).size() == 2);
  CHECK(net.links(1).size() == 1);
  CHECK(net.links(2).size() == 1);
  const auto full = weather_network(ds, 2);
  for (std::size_t k = 0; k < 3; ++k) CHECK(full.links(k).size() == 2);
}

TEST_CASE("weather experiment shares the eta = 0 column") {
  const auto net = ring_network(4);
  const auto ens = as_logistic(generate_smooth_models(net, 3, 5.0, 11), 1e-5);
  const auto ds = synthetic_classification_dataset(ens, 300, 200, 11);
  REQUIRE(ds.train.size() == 4);
  CHECK(ds.train[0].size() == 300);
  CHECK(ds.test[3].size() == 200);
  WeatherOptions opts;
  opts.mu = 0.05;
  opts.tail_window = 50;
  const std::vector<double> etas = {0.0, 1.0, 10.0};
  const std::vector<Regularizer> regs = {Regularizer::l1(), Regularizer::squared_l2()};
  const auto t = weather_experiment(ds, net, etas, regs, opts);
  CHECK(t.errors[0][0] == t.errors[1][0]);
  for (const auto& row : t.errors) {
    for (double e : row) {
      CHECK(e >= 0.0);
      CHECK(e <= 1.0);
    }
  }
  const auto solo = weather_experiment(ds, net, etas, {Regularizer::squared_l2()}, opts, 2);
  CHECK(solo.errors[0] == t.errors[1]);
  CHECK_THROWS_AS(weather_experiment(ds, ring_network(5), etas, regs, opts), InvalidArgument);
}
