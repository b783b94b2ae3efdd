#include <gtest/gtest.h>

#include "omnitopo/omnitopo.hpp"

using namespace omnitopo;

TEST(Hash, GitBlobIds) {
  // well-known git object ids
  EXPECT_EQ(git_blob_sha1(""), "e69de29bb2d1d6434b8b29ae775ad8c2e48c5391");
  EXPECT_EQ(git_blob_sha1("hello\n"), "ce013625030ba8dba906f756967f9e9ca394464a");
}

TEST(Hash, ChassisHashTracksContent) {
  const auto a = make_regular_polygon(8);
  auto b = a;
  EXPECT_EQ(chassis_hash(a), chassis_hash(b));
  b.vertices[3].z() += 1e-12;
  EXPECT_NE(chassis_hash(a), chassis_hash(b));
}

TEST(FmtDouble, ShortestRoundTrip) {
  EXPECT_EQ(fmt_double(0.5), "0.5");
  EXPECT_EQ(fmt_double(1e-9), "1e-09");
  for (double x : {kPi, 1.0 / 3.0, -2.5e-300, 123456.789}) EXPECT_EQ(std::stod(fmt_double(x)), x);
}

TEST(ChassisJson, RoundTripIsExact) {
  for (const char* id : {"CRPol9", "CDod20", "CQRPol7", "CTriCup9"}) {
    const auto c = make_library_chassis(id);
    const auto back = chassis_from_json(Json::parse(to_json(c).dump()));
    EXPECT_EQ(back.id, c.id);
    EXPECT_EQ(back.family, c.family);
    EXPECT_EQ(back.vertices, c.vertices);
    EXPECT_EQ(chassis_hash(back), chassis_hash(c));
  }
}

TEST(ChassisJson, KeyOrderIsStable) {
  const auto s = to_json(make_regular_polygon(6)).dump();
  EXPECT_EQ(s.rfind("{\"id\":\"CRPol6\",\"family\":\"regular_polygon\",\"vertices\":", 0), 0u);
}

TEST(ChassisJson, InvalidDocumentsRejected) {
  EXPECT_THROW(chassis_from_json(Json::parse("{}")), std::invalid_argument);
  EXPECT_THROW(chassis_from_json(Json::parse(R"({"vertices": [[1, 0]]})")), std::invalid_argument);
  EXPECT_THROW(chassis_from_json(Json::parse(R"({"vertices": [[1, 0, 0], [0, 1, 0]]})")), std::invalid_argument);
}

TEST(SolutionJson, RoundTrip) {
  const auto c = make_regular_polygon(7);
  const auto set = global_exhaust(c, 12, kDefaultPruneTolerance, 3);
  const auto loaded = solutions_from_json(Json::parse(to_json(set, c).dump()));
  EXPECT_EQ(loaded.chassis.vertices, c.vertices);
  ASSERT_EQ(loaded.set.size(), set.size());
  EXPECT_EQ(loaded.set.J_min, set.J_min);
  EXPECT_EQ(loaded.set.rng_seed, 3u);
  EXPECT_EQ(loaded.set.samples_requested, 12);
  for (std::size_t k = 0; k < set.size(); ++k) {
    EXPECT_EQ(loaded.set.solutions[k].cost, set.solutions[k].cost);
    EXPECT_EQ(loaded.set.solutions[k].dirs.dirs, set.solutions[k].dirs.dirs);
  }
}

TEST(SolutionJson, TamperingDetected) {
  const auto c = make_regular_polygon(6);
  const auto set = global_exhaust(c, 5, kDefaultPruneTolerance, 3);
  auto j = to_json(set, c);
  auto bad_hash = j;
  bad_hash["chassis"]["vertices"][0][0] = 0.999;
  EXPECT_THROW(solutions_from_json(bad_hash), std::invalid_argument);
  auto bad_cost = j;
  bad_cost["solutions"][0]["cost"] = set.J_min + 1.0;
  EXPECT_THROW(solutions_from_json(bad_cost), std::invalid_argument);
  auto bad_norm = j;
  bad_norm["solutions"][0]["dirs"][0] = Json::array({1.0, 1.0, 0.0});
  EXPECT_THROW(solutions_from_json(bad_norm), std::invalid_argument);
}

TEST(Csv, Headers) {
  const auto c = make_regular_polygon(6);
  const auto set = global_exhaust(c, 3, kDefaultPruneTolerance, 1);
  EXPECT_EQ(solutions_csv(set).rfind("solution_index,rotor,dx,dy,dz,cost\n", 0), 0u);
  EXPECT_EQ(disc_csv(set).rfind("solution_index,rotor,x,y\n", 0), 0u);
  EXPECT_EQ(sensitivity_csv({}), "ratio,kappa,sigma_min\n");
  EXPECT_EQ(scatter_csv(PhaseMatrix(0, 6), {}), "solution_index,theta_1,theta_i,rotor_i,branch\n");
  const auto pred = prediction_csv(star_polygon_predict(6));
  EXPECT_EQ(pred.rfind("N,q,vertex,offset_over_pi\n6,3,1,0\n6,3,2,0.5\n", 0), 0u);
}

TEST(Csv, DiscRowsPerRotor) {
  const auto c = make_regular_polygon(6);
  const auto set = global_exhaust(c, 3, kDefaultPruneTolerance, 1);
  const auto csv = disc_csv(set);
  EXPECT_EQ(static_cast<std::size_t>(std::count(csv.begin(), csv.end(), '\n')), 1 + 6 * set.size());
}

TEST(BranchJson, Fields) {
  BranchModel m;
  m.N = 6;
  Branch b;
  b.offsets = {0.0, kPi / 2, 0.0, kPi / 2, 0.0, kPi / 2};
  b.chirality = std::vector<int>(6, 1);
  b.rational_offsets = {{0, 6}, {3, 6}, {0, 6}, {3, 6}, {0, 6}, {3, 6}};
  b.q_match = 3;
  m.branches.push_back(b);
  const auto j = to_json(m);
  EXPECT_EQ(j["N"], 6);
  EXPECT_EQ(j["K"], 1);
  const auto& e = j["branches"][0];
  EXPECT_EQ(e["q_match"], 3);
  EXPECT_EQ(e["offsets_over_pi"][1], 0.5);
  EXPECT_EQ(e["rational_offsets"][1], "3/6");
  for (const char* k : {"chirality", "spread_deg", "max_fit_error_deg"}) EXPECT_TRUE(e.contains(k)) << k;
}

TEST(ConfigJson, RoundTripAndValidation) {
  SolverConfig c;
  c.objective = Objective::condition_number;
  c.max_iterations = 77;
  const auto back = solver_config_from_json(to_json(c));
  EXPECT_EQ(back.objective, Objective::condition_number);
  EXPECT_EQ(back.max_iterations, 77);
  EXPECT_THROW(solver_config_from_json(Json::parse(R"({"max_iterations": 0})")), std::invalid_argument);
}

TEST(MetricJson, InfiniteKappaAsString) {
  MetricReport m;
  m.condition_number = std::numeric_limits<double>::infinity();
  EXPECT_EQ(to_json(m)["condition_number"], "inf");
}
