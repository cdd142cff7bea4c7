#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <sstream>

#include "conclab/io.hpp"
#include "conclab/rng.hpp"
#include "conclab/sde.hpp"
#include "conclab/skorokhod.hpp"

using namespace conclab;

namespace {

Ensemble tiny_ensemble() {
  SdeSystem sys;
  sys.drifts = {DriftSpec::constant(0.2), DriftSpec::zero()};
  sys.diffusions = {DiffusionSpec::constant(1.0), DiffusionSpec::constant(0.5)};
  sys.x0 = Eigen::Vector2d(1.0, -1.0);
  return euler_maruyama(sys, SimConfig{make_grid(1.0, 0.25), 3, 5, 0});
}

}  // namespace

TEST_CASE("wide ensemble csv layout") {
  const auto ens = tiny_ensemble();
  const std::string csv = ensemble_to_wide_csv(ens);
  std::istringstream in(csv);
  std::string header;
  std::getline(in, header);
  CHECK(header == "time,m0_x1,m0_x2,m1_x1,m1_x2,m2_x1,m2_x2");
  int rows = 0;
  for (std::string line; std::getline(in, line);) ++rows;
  CHECK(rows == ens.grid.size());
}

TEST_CASE("sp solution csv carries phi, eta, tv and per-face columns") {
  const auto grid = make_grid(1.0, 0.25);
  Path psi{grid, -grid.points};
  const auto sol = skorokhod_map_1d(psi);
  const std::string csv = sp_solution_to_csv(sol);
  std::istringstream in(csv);
  std::string header;
  std::getline(in, header);
  CHECK(header == "time,phi1,eta1,tv,ell1");
  std::string first_row;
  std::getline(in, first_row);
  CHECK(first_row == "0,0,0,0,0");
  int rows = 1;
  for (std::string line; std::getline(in, line);) ++rows;
  CHECK(rows == grid.size());
}

TEST_CASE("tail report csv has the r,tail,bound contract") {
  TailReport rep;
  rep.r_grid = Eigen::Vector2d(1.0, 2.0);
  rep.empirical_tail = Eigen::Vector2d(0.5, 0.25);
  rep.bound = Eigen::Vector2d(1.0, 0.5);
  const std::string csv = tail_report_to_csv(rep);
  CHECK(csv == "r,tail,bound\n1,0.5,1\n2,0.25,0.5\n");

  const Json j = tail_report_to_json(rep);
  CHECK(j["r"].size() == 2);
  CHECK(j["tail"][1] == 0.25);
}

TEST_CASE("config hash is stable and key-order independent") {
  const Json a{{"n", 3}, {"paths", 100}};
  const Json b{{"paths", 100}, {"n", 3}};
  CHECK(config_hash(a) == config_hash(b));  // nlohmann objects are key-sorted
  CHECK(config_hash(a) != config_hash(Json{{"n", 4}, {"paths", 100}}));
  CHECK(config_hash(a).rfind("fnv1a:", 0) == 0);
}

TEST_CASE("manifest names the command, config hash, seed, and outputs") {
  const Json cfg{{"n", 2}};
  const Json m = make_manifest("certify", cfg, 7, {"certificate.json"});
  CHECK(m["command"] == "certify");
  CHECK(m["master_seed"] == 7);
  CHECK(m["outputs"][0] == "certificate.json");
  CHECK(m["config_hash"] == config_hash(cfg));
  CHECK(m["schema_version"] == 1);
}

TEST_CASE("format_double round trips exactly through csv") {
  const CounterRng rng(60, RngStream::Sampling);
  for (int i = 0; i < 200; ++i) {
    const double v = rng.normal(static_cast<std::uint64_t>(i), 0, 0) * 1e3;
    CHECK(std::stod(format_double(v)) == v);
  }
  CHECK(format_double(0.5) == "0.5");
  CHECK(format_double(1.0) == "1");
}

TEST_CASE("matrix csv audit dump") {
  Eigen::MatrixXd m(2, 2);
  m << 1.0, 0.5, 0.25, 2.0;
  CHECK(matrix_to_csv(m) == "1,0.5\n0.25,2\n");
}
