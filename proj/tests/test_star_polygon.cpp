#include <gtest/gtest.h>

#include <map>
#include <numeric>

#include "omnitopo/omnitopo.hpp"
#include "oracles.hpp"

using namespace omnitopo;

TEST(StarPrediction, PublishedPolygonRows) {
  for (const auto& t : oracle::polygon_table()) {
    const auto p = star_polygon_predict(t.N);
    ASSERT_EQ(p.K(), static_cast<int>(t.rows.size())) << "N=" << t.N;
    for (std::size_t k = 0; k < t.rows.size(); ++k) {
      EXPECT_EQ(p.branches[k].offset_numerators, t.rows[k]) << "N=" << t.N << " k=" << k;
      EXPECT_EQ(p.branches[k].q, static_cast<int>(k) + 3);
    }
  }
}

TEST(StarPrediction, HexagonAndHeptagonExamples) {
  const auto six = star_polygon_predict(6);
  ASSERT_EQ(six.K(), 1);
  EXPECT_EQ(six.branches[0].q, 3);
  EXPECT_EQ(six.branches[0].offset_numerators, (std::vector<int>{0, 3, 0, 3, 0, 3}));
  const auto seven = star_polygon_predict(7);
  ASSERT_EQ(seven.K(), 2);
  EXPECT_EQ(seven.branches[0].offset_numerators, (std::vector<int>{0, 3, 6, 2, 5, 1, 4}));
  EXPECT_EQ(star_polygon_predict(10).K(), 5);
  EXPECT_EQ(star_polygon_predict(100).K(), 95);
}

TEST(StarPrediction, BelowSixIsEmptyWithNote) {
  for (int N = 1; N <= 5; ++N) {
    const auto p = star_polygon_predict(N);
    EXPECT_EQ(p.K(), 0);
    EXPECT_NE(p.note.find("Q_valid empty"), std::string::npos);
  }
  EXPECT_THROW(star_polygon_predict(0), std::invalid_argument);
}

TEST(StarPrediction, CardinalityLaw) {
  for (int N = 6; N <= 10000; N += (N < 200 ? 1 : 997)) EXPECT_EQ(static_cast<int>(valid_densities(N).size()), N - 5);
}

TEST(StarPrediction, OffsetMultisetFollowsGcd) {
  for (int N = 6; N <= 40; ++N) {
    for (const auto& b : star_polygon_predict(N).branches) {
      const int d = std::gcd(b.q, N);
      std::map<int, int> count;
      for (int r : b.offset_numerators) ++count[r];
      EXPECT_EQ(static_cast<int>(count.size()), N / d) << N << "/" << b.q;
      for (auto [r, n] : count) {
        EXPECT_EQ(n, d);
        EXPECT_EQ(r % d, 0);
      }
      for (std::size_t v = 0; v < b.offsets.size(); ++v)
        EXPECT_DOUBLE_EQ(b.offsets[v], kPi * b.offset_numerators[v] / N);
    }
  }
}

TEST(AlignedDistance, GlobalPhaseIsFree) {
  const std::vector<double> a = {0.0, 0.5, 1.0, 2.0};
  std::vector<double> b = a;
  for (auto& x : b) x = wrap_pi(x + 1.3);
  EXPECT_NEAR(aligned_offset_distance(a, b), 0.0, 1e-12);
  b[2] = wrap_pi(b[2] + 0.2);
  // the best shift splits the single outlier: max error 0.1
  EXPECT_NEAR(aligned_offset_distance(a, b), 0.1, 1e-12);
}

TEST(Matching, PredictionAgainstItself) {
  for (int N = 6; N <= 12; ++N) {
    const auto p = star_polygon_predict(N);
    const auto rep = match_branches(p, p, 0.0);
    EXPECT_TRUE(rep.complete());
    for (const auto& m : rep.matches) EXPECT_EQ(m.extracted, m.predicted);
  }
  EXPECT_THROW(match_branches(star_polygon_predict(7), star_polygon_predict(8), 1.0), std::invalid_argument);
}

TEST(Matching, OctagonPipelineMatchesPrediction) {
  const auto c = make_regular_polygon(8);
  const auto set = global_exhaust(c, 400, kDefaultPruneTolerance, 1);
  auto model = extract_branches(phase_table(c, set).theta).model;
  const auto pred = star_polygon_predict(8);
  const auto rep = match_branches(model, pred, 1.0);
  EXPECT_TRUE(rep.complete());
  annotate_q(model, pred, rep);
  for (const auto& b : model.branches) EXPECT_TRUE(b.q_match.has_value());
}

TEST(Matching, NonagonPipelineMatchesPrediction) {
  const auto c = make_regular_polygon(9);
  const auto set = global_exhaust(c, 800, kDefaultPruneTolerance, 1);
  const auto model = extract_branches(phase_table(c, set).theta).model;
  EXPECT_EQ(model.K(), 4);
  EXPECT_TRUE(match_branches(model, star_polygon_predict(9), 1.0).complete());
}

TEST(Matching, ReversedBranchCannotMatch) {
  BranchModel m;
  m.N = 6;
  Branch b;
  b.offsets = oracle::row_radians({0, 3, 0, 3, 0, 3}, 6);
  b.chirality = {1, 1, 1, -1, 1, 1};
  m.branches.push_back(b);
  const auto rep = match_branches(m, star_polygon_predict(6), 1.0);
  EXPECT_TRUE(rep.matches.empty());
  EXPECT_EQ(rep.unmatched_extracted.size(), 1u);
  m.N = 7;
  EXPECT_THROW(match_branches(m, star_polygon_predict(6), 1.0), std::invalid_argument);
}
