#include "amg/oracle.hpp"

#include <cmath>

#include <gtest/gtest.h>

#include "test_util.hpp"

namespace amg {
namespace {

using testing::code_of;

TEST(OraclePredict, SinglePointClosedForm) {
  const std::vector<WorldPoint> p = {{0, 0}};
  const std::vector<double> y = {1.0};
  const auto pr = oracle::predict(p, y, Hyperparameters{3.0, 1.0, 0.01, 0.0}, {0, 0});
  EXPECT_NEAR(pr.mean, 1.0 / 1.01, 1e-14);
  EXPECT_NEAR(pr.variance, 1.0 - 1.0 / 1.01, 1e-14);
}

TEST(OraclePredict, SingularGram) {
  const std::vector<WorldPoint> p = {{1, 1}, {1, 1}};
  const std::vector<double> y = {1.0, 0.0};
  EXPECT_EQ(code_of([&] { oracle::predict(p, y, Hyperparameters{3.0, 1.0, 0.0, 0.0}, {0, 0}); }),
            ErrorCode::SingularMatrix);
}

TEST(OraclePredict, SizeLimits) {
  const std::vector<WorldPoint> p(51, WorldPoint{});
  const std::vector<double> y(51, 0.0);
  EXPECT_EQ(code_of([&] { oracle::predict(p, y, {}, {0, 0}); }), ErrorCode::InvalidArgument);
  const std::vector<double> short_y(3, 0.0);
  EXPECT_EQ(code_of([&] { oracle::predict(std::span(p).first(2), short_y, {}, {0, 0}); }),
            ErrorCode::DimensionMismatch);
}

TEST(OraclePlan, UniformMapFourConnected) {
  const auto m = GridMap::filled({4, 4, 1.0, {}}, GridKind::cost, 0.0);
  PlannerConfig cfg;
  cfg.connectivity = Connectivity::four;
  const auto p = oracle::plan(m, {0, 0}, {3, 2}, cfg);
  EXPECT_EQ(p.total_cost, 5.0);
  EXPECT_EQ(p.cells.size(), 6u);
}

TEST(OraclePlan, WalledGoal) {
  const GridMap m({3, 3, 1.0, {}}, GridKind::cost, {0, 255, 0, 255, 255, 0, 0, 0, 0});
  // Goal (0,2) is reachable around the bottom-right; (0,0) is sealed off.
  EXPECT_EQ(code_of([&] { oracle::plan(m, {2, 2}, {0, 0}); }), ErrorCode::NoPath);
}

TEST(OraclePlan, RejectsLargeMaps) {
  const auto m = GridMap::filled({7, 6, 1.0, {}}, GridKind::cost, 0.0);
  EXPECT_EQ(code_of([&] { oracle::plan(m, {0, 0}, {1, 1}); }), ErrorCode::InvalidArgument);
}

}  // namespace
}  // namespace amg
