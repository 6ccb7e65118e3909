#include "amg/planner.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <random>

#include <gtest/gtest.h>

#include "amg/oracle.hpp"
#include "test_util.hpp"

namespace amg {
namespace {

using testing::code_of;
using testing::scratch_dir;

GridMap grid_of(int w, int h, std::vector<double> v) { return GridMap({w, h, 1.0, {}}, GridKind::cost, std::move(v)); }

GridMap zeros(int w, int h) { return GridMap::filled({w, h, 1.0, {}}, GridKind::cost, 0.0); }

void expect_valid(const GridMap& m, const Path& p, GridIndex s, GridIndex t, const PlannerConfig& cfg) {
  ASSERT_FALSE(p.cells.empty());
  EXPECT_EQ(p.cells.front(), s);
  EXPECT_EQ(p.cells.back(), t);
  double sum = 0.0;
  for (std::size_t i = 1; i < p.cells.size(); ++i) {
    const int dr = std::abs(p.cells[i].row - p.cells[i - 1].row);
    const int dc = std::abs(p.cells[i].col - p.cells[i - 1].col);
    ASSERT_LE(std::max(dr, dc), 1);
    ASSERT_GT(dr + dc, 0);
    if (cfg.connectivity == Connectivity::four) {
      ASSERT_EQ(dr + dc, 1);
    }
    ASSERT_LT(m[p.cells[i]], cfg.impassable_threshold);
    sum += edge_cost(dr + dc == 2 ? std::sqrt(2.0) : 1.0, m[p.cells[i - 1]], m[p.cells[i]], cfg.traversal_gamma);
  }
  EXPECT_NEAR(p.total_cost, sum, 1e-9);
}

TEST(Plan, StraightOnUniformMap) {
  PlannerConfig cfg;
  cfg.connectivity = Connectivity::four;
  const auto m = zeros(5, 5);
  const auto p = plan(m, {0, 0}, {0, 4}, cfg);
  EXPECT_EQ(p.cells.size(), 5u);
  EXPECT_EQ(p.total_cost, 4.0);
  EXPECT_EQ(p.length_m, 4.0);
  for (int c = 0; c < 5; ++c) EXPECT_EQ(p.cells[static_cast<std::size_t>(c)], (GridIndex{0, c}));
}

TEST(Plan, WallWithGapMatchesOracle) {
  std::vector<double> v(25, 0.0);
  for (int r = 0; r < 4; ++r) v[static_cast<std::size_t>(r * 5 + 2)] = 255;
  const auto m = grid_of(5, 5, v);
  for (const auto conn : {Connectivity::four, Connectivity::eight}) {
    PlannerConfig cfg;
    cfg.connectivity = conn;
    const auto p = plan(m, {0, 0}, {0, 4}, cfg);
    expect_valid(m, p, {0, 0}, {0, 4}, cfg);
    EXPECT_TRUE(std::any_of(p.cells.begin(), p.cells.end(), [](GridIndex i) { return i == GridIndex{4, 2}; }));
    EXPECT_EQ(p.total_cost, oracle::plan(m, {0, 0}, {0, 4}, cfg).total_cost);
  }
}

TEST(Plan, EnclosedGoal) {
  std::vector<double> v(25, 0.0);
  for (int r = 1; r <= 3; ++r) {
    for (int c = 1; c <= 3; ++c) {
      if (r != 2 || c != 2) v[static_cast<std::size_t>(r * 5 + c)] = 255;
    }
  }
  const auto m = grid_of(5, 5, v);
  EXPECT_EQ(code_of([&] { plan(m, {0, 0}, {2, 2}); }), ErrorCode::NoPath);
  EXPECT_EQ(code_of([&] { oracle::plan(m, {0, 0}, {2, 2}); }), ErrorCode::NoPath);
}

TEST(Plan, BlockedEndpointsAndBounds) {
  const auto m = grid_of(2, 1, {255, 0});
  EXPECT_EQ(code_of([&] { plan(m, {0, 0}, {0, 1}); }), ErrorCode::StartBlocked);
  EXPECT_EQ(code_of([&] { plan(m, {0, 1}, {0, 0}); }), ErrorCode::GoalBlocked);
  EXPECT_EQ(code_of([&] { plan(m, {0, 1}, {0, 2}); }), ErrorCode::OutOfBounds);
}

TEST(Plan, NoCornerCutting) {
  const auto m = grid_of(2, 2, {0, 255, 255, 0});
  EXPECT_EQ(code_of([&] { plan(m, {0, 0}, {1, 1}); }), ErrorCode::NoPath);
  const auto open = grid_of(2, 2, {0, 0, 255, 0});
  const auto p = plan(open, {0, 0}, {1, 1});
  EXPECT_EQ(p.cells.size(), 3u);
}

TEST(Plan, GammaSwitchesRoute) {
  // Row 0: short route with a 200 blob; row 1 wall; row 2: clean detour.
  const auto m = grid_of(6, 3, {0, 0, 200, 200, 0, 0,  //
                                0, 255, 255, 255, 255, 0,  //
                                0, 0, 0, 0, 0, 0});
  PlannerConfig avoid;
  PlannerConfig ignore;
  ignore.traversal_gamma = 0.0;
  const auto a = plan(m, {0, 0}, {0, 5}, avoid);
  const auto b = plan(m, {0, 0}, {0, 5}, ignore);
  EXPECT_TRUE(std::all_of(a.cells.begin(), a.cells.end(), [&](GridIndex i) { return m[i] < 200; }));
  EXPECT_TRUE(std::any_of(b.cells.begin(), b.cells.end(), [&](GridIndex i) { return m[i] == 200; }));
  EXPECT_EQ(a.total_cost, oracle::plan(m, {0, 0}, {0, 5}, avoid).total_cost);
  EXPECT_EQ(b.total_cost, oracle::plan(m, {0, 0}, {0, 5}, ignore).total_cost);
}

TEST(Plan, ConfigValidation) {
  PlannerConfig c;
  c.impassable_threshold = 0;
  EXPECT_EQ(code_of([&] { c.validate(); }), ErrorCode::InvalidArgument);
  c.impassable_threshold = 256;
  EXPECT_EQ(code_of([&] { c.validate(); }), ErrorCode::InvalidArgument);
  c = {};
  c.traversal_gamma = -1.0;
  EXPECT_EQ(code_of([&] { c.validate(); }), ErrorCode::InvalidArgument);
}

TEST(Plan, RandomMapsValidDeterministicSymmetric) {
  std::mt19937_64 rng(31);
  std::uniform_int_distribution<int> size(2, 24), pick(0, 3);
  const double levels[] = {0, 64, 128, 255};
  int planned = 0;
  for (int trial = 0; trial < 300; ++trial) {
    const int w = size(rng), h = size(rng);
    std::vector<double> v(static_cast<std::size_t>(w * h));
    for (auto& x : v) x = levels[pick(rng)];
    const auto m = grid_of(w, h, v);
    const GridIndex s{std::uniform_int_distribution<int>(0, h - 1)(rng), std::uniform_int_distribution<int>(0, w - 1)(rng)};
    const GridIndex t{std::uniform_int_distribution<int>(0, h - 1)(rng), std::uniform_int_distribution<int>(0, w - 1)(rng)};
    PlannerConfig cfg;
    cfg.connectivity = trial % 2 ? Connectivity::four : Connectivity::eight;
    try {
      const auto p = plan(m, s, t, cfg);
      expect_valid(m, p, s, t, cfg);
      const auto again = plan(m, s, t, cfg);
      ASSERT_EQ(again.cells, p.cells);
      EXPECT_NEAR(plan(m, t, s, cfg).total_cost, p.total_cost, 1e-9);
      ++planned;
    } catch (const Error& e) {
      ASSERT_TRUE(e.code() == ErrorCode::NoPath || e.code() == ErrorCode::StartBlocked ||
                  e.code() == ErrorCode::GoalBlocked);
    }
  }
  EXPECT_GT(planned, 100);
}

TEST(EvaluatePath, RecomputesAndRejectsJumps) {
  const auto m = zeros(3, 3);
  const auto p = evaluate_path(m, {{0, 0}, {1, 1}, {2, 2}}, {});
  EXPECT_NEAR(p.total_cost, 2 * std::sqrt(2.0), 1e-12);
  EXPECT_EQ(code_of([&] { evaluate_path(m, {{0, 0}, {2, 2}}, {}); }), ErrorCode::InvalidArgument);
}

TEST(PathFile, RoundTrip) {
  const auto dir = scratch_dir("path");
  const GridMap m({4, 4, 0.25, {1.0, -2.0}}, GridKind::cost, std::vector<double>(16, 10.0));
  const auto p = plan(m, {0, 0}, {3, 2});
  write_path(m, p, dir / "p.txt");
  const auto back = read_path(dir / "p.txt");
  EXPECT_EQ(back.cells, p.cells);
  EXPECT_EQ(back.total_cost, p.total_cost);
  EXPECT_EQ(back.length_m, p.length_m);
  const auto text = format_path(m, p);
  EXPECT_EQ(text.substr(0, text.find('\n')), "0,0,1.125,-1.875");
}

TEST(PathFile, PositionalErrors) {
  const auto dir = scratch_dir("path");
  std::ofstream(dir / "bad.txt") << "0,0,0.5,0.5\n0,x,1.5,0.5\ntotal_cost=1,length_m=1\n";
  try {
    read_path(dir / "bad.txt");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::ParseError);
    EXPECT_EQ(e.line(), 2u);
  }
}

}  // namespace
}  // namespace amg
