#include <filesystem>
#include <sstream>

#include "doctest.h"
#include "mtgraph/errors.hpp"
#include "mtgraph/io.hpp"

using namespace mtgraph;

TEST_CASE("fnv1a digests") {
  CHECK(fnv1a64("") == 0xcbf29ce484222325ull);
  CHECK(fnv1a64("a") == 0xaf63dc4c8601ec8cull);
  CHECK(fnv1a64("foobar") == 0x85944171f73967e8ull);
  CHECK(digest_hex(0xabcull) == "0000000000000abc");
}

TEST_CASE("number formatting round-trips") {
  CHECK(format_number(0.5) == "0.5");
  CHECK(format_number(0.1) == "0.1");
  CHECK(format_number(1e-300) == "1e-300");
  for (double v : {1.0 / 3.0, 2.718281828459045, -1e-7, 123456789.123}) {
    CHECK(std::stod(format_number(v)) == v);
  }
}

TEST_CASE("text artifacts begin with the digest") {
  std::ostringstream curve, sweep, summary;
  LearningCurve c;
  c.values = {0.1, 0.01};
  write_curve_csv(curve, c, 0x1234);
  CHECK(curve.str() == "# config_digest=0000000000001234\niteration,msd,msd_db\n1,0.1,-10\n2,0.01,-20\n");
  write_sweep_csv(sweep, {{0.5, "l1", -12.5, 30}}, 1);
  CHECK(sweep.str() == "# config_digest=0000000000000001\neta,regularizer,msd_loc_db,n_runs\n0.5,l1,-12.5,30\n");
  write_summary(summary, {{"a", "1"}}, 2);
  CHECK(summary.str() == "# config_digest=0000000000000002\na = 1\n");
}

TEST_CASE("trajectory round trip") {
  Trajectory t;
  t.seed = 9;
  t.run = 3;
  t.config_digest = 77;
  for (int i = 0; i < 4; ++i) {
    t.estimates.push_back({Eigen::Vector3d(i, 0.1 * i, -1.0 / (i + 1)), Eigen::Vector3d(1, 2, 3)});
  }
  std::stringstream bin;
  write_trajectory_binary(bin, t);
  const auto back = read_trajectory_binary(bin);
  CHECK(back.seed == 9);
  CHECK(back.run == 3);
  CHECK(back.config_digest == 77);
  REQUIRE(back.iterations() == 3);
  REQUIRE(back.agents() == 2);
  for (std::size_t i = 0; i < 4; ++i) {
    for (std::size_t k = 0; k < 2; ++k) CHECK(back.estimates[i][k] == t.estimates[i][k]);
  }
  std::stringstream junk("not a trajectory");
  CHECK_THROWS(read_trajectory_binary(junk));

  std::ostringstream csv;
  write_trajectory_csv(csv, t);
  std::istringstream lines(csv.str());
  std::string line;
  std::getline(lines, line);
  CHECK(line == "# config_digest=000000000000004d");
  std::getline(lines, line);
  CHECK(line == "iteration,agent,coordinate,value");
  std::getline(lines, line);
  CHECK(line == "0,0,0,0");
}

TEST_CASE("reference cache") {
  const auto dir = std::filesystem::temp_directory_path() / "mtgraph_io_test";
  std::filesystem::remove_all(dir);
  const auto path = (dir / "sub" / "ref.bin").string();
  StoredReference r;
  r.digest = 42;
  r.residual = 3e-9;
  r.blocks = {Eigen::Vector2d(1.5, -2.0), Eigen::Vector2d(0.0, 1e-300)};
  StoredReference out;
  CHECK_FALSE(load_reference(path, 42, out));
  save_reference(path, r);
  REQUIRE(load_reference(path, 42, out));
  CHECK(out.residual == r.residual);
  CHECK(out.blocks[0] == r.blocks[0]);
  CHECK(out.blocks[1] == r.blocks[1]);
  CHECK_THROWS_AS(load_reference(path, 43, out), Error);
  std::filesystem::remove_all(dir);
}
