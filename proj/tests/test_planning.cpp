#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>
#include <queue>
#include <random>

#include "doctest.h"
#include "navstack/planning.hpp"

using namespace navstack;

namespace {

constexpr double kSqrt2 = 1.4142135623730951;

CostmapSnapshot snapshot_from(const std::vector<Cost>& cells, int n, double res) {
  CostmapSnapshot snap;
  snap.meta.resolution = res;
  snap.meta.width = n;
  snap.meta.height = n;
  snap.cells = cells;
  return snap;
}

// Dijkstra oracle over the identical cost model, with reopening so the
// floating-point fixed point is exact.
double dijkstra_cost(const CostmapSnapshot& snap, CellIndex start, CellIndex goal,
                     double cost_weight) {
  const GridMeta& meta = snap.meta;
  auto traversable = [&](int cx, int cy) {
    return snap.at_unchecked(cx, cy) < kCostInscribed;
  };
  if (!traversable(start.cx, start.cy) || !traversable(goal.cx, goal.cy)) {
    return -1.0;
  }
  std::vector<double> dist(meta.size(), std::numeric_limits<double>::infinity());
  using Entry = std::pair<double, std::size_t>;
  std::priority_queue<Entry, std::vector<Entry>, std::greater<Entry>> open;
  const std::size_t s = meta.index(start.cx, start.cy);
  dist[s] = 0.0;
  open.emplace(0.0, s);
  const int dxs[8] = {0, 1, 1, 1, 0, -1, -1, -1};
  const int dys[8] = {1, 1, 0, -1, -1, -1, 0, 1};
  while (!open.empty()) {
    const auto [d, idx] = open.top();
    open.pop();
    if (d > dist[idx]) continue;
    const int cx = static_cast<int>(idx % meta.width);
    const int cy = static_cast<int>(idx / meta.width);
    for (int k = 0; k < 8; ++k) {
      const int nx = cx + dxs[k];
      const int ny = cy + dys[k];
      if (!meta.contains(nx, ny) || !traversable(nx, ny)) continue;
      const double step = (dxs[k] != 0 && dys[k] != 0) ? kSqrt2 : 1.0;
      const double nd =
          d + step * (1.0 + cost_weight * snap.at_unchecked(nx, ny) / 252.0);
      const std::size_t ni = meta.index(nx, ny);
      if (nd < dist[ni]) {
        dist[ni] = nd;
        open.emplace(nd, ni);
      }
    }
  }
  const double out = dist[meta.index(goal.cx, goal.cy)];
  return std::isinf(out) ? -1.0 : out;
}

}  // namespace

TEST_CASE("free 5x5 grid: straight diagonal, cost 4*sqrt(2)") {
  auto snap = snapshot_from(std::vector<Cost>(25, kCostFree), 5, 1.0);
  const PlanResult res =
      astar_plan(snap, CellIndex{0, 0}, CellIndex{4, 4}, Pose2D(4.5, 4.5, 0.7), {0.0});
  REQUIRE(res.ok());
  CHECK(res.path.poses.size() == 5);
  CHECK(res.path.total_cost == doctest::Approx(4.0 * kSqrt2));
  CHECK(res.path.poses.front().x == doctest::Approx(0.5));
  CHECK(res.path.poses.front().y == doctest::Approx(0.5));
  CHECK(res.path.poses.back().x == doctest::Approx(4.5));
  CHECK(res.path.poses.back().theta == doctest::Approx(0.7));  // goal heading
  for (std::size_t i = 0; i + 1 < res.path.poses.size(); ++i) {
    const double d = std::hypot(res.path.poses[i + 1].x - res.path.poses[i].x,
                                res.path.poses[i + 1].y - res.path.poses[i].y);
    CHECK(d <= kSqrt2 * snap.meta.resolution + 1e-12);
    // Heading points at the successor.
    const double want = std::atan2(res.path.poses[i + 1].y - res.path.poses[i].y,
                                   res.path.poses[i + 1].x - res.path.poses[i].x);
    CHECK(res.path.poses[i].theta == doctest::Approx(want));
  }
}

TEST_CASE("occupied endpoints are rejected") {
  std::vector<Cost> cells(25, kCostFree);
  CostmapSnapshot snap = snapshot_from(cells, 5, 1.0);
  snap.cells[snap.meta.index(4, 4)] = kCostLethal;
  CHECK(astar_plan(snap, CellIndex{0, 0}, CellIndex{4, 4}, Pose2D(), {}).error ==
        PlanError::GoalOccupied);
  snap.cells[snap.meta.index(4, 4)] = kCostUnknown;  // unknown is untraversable too
  CHECK(astar_plan(snap, CellIndex{0, 0}, CellIndex{4, 4}, Pose2D(), {}).error ==
        PlanError::GoalOccupied);
  snap.cells[snap.meta.index(4, 4)] = kCostFree;
  snap.cells[snap.meta.index(0, 0)] = kCostInscribed;
  CHECK(astar_plan(snap, CellIndex{0, 0}, CellIndex{4, 4}, Pose2D(), {}).error ==
        PlanError::StartOccupied);
}

TEST_CASE("sealed goal yields NoPathFound") {
  std::vector<Cost> cells(49, kCostFree);
  CostmapSnapshot snap = snapshot_from(cells, 7, 1.0);
  // Wall off the right column region around the goal.
  for (int cy = 0; cy < 7; ++cy) snap.cells[snap.meta.index(5, cy)] = kCostLethal;
  CHECK(astar_plan(snap, CellIndex{0, 0}, CellIndex{6, 3}, Pose2D(), {}).error ==
        PlanError::NoPathFound);
}

TEST_CASE("A* equals the Dijkstra oracle exactly on random costmaps") {
  std::mt19937_64 rng(41);
  std::uniform_int_distribution<int> byte(0, 255);
  std::uniform_int_distribution<int> cellpick(0, 19);
  int solved = 0;
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<Cost> cells(400);
    for (auto& c : cells) {
      const int v = byte(rng);
      // Mix free, scaled, lethal and unknown cells.
      if (v < 40) {
        c = kCostFree;
      } else if (v < 220) {
        c = static_cast<Cost>(v - 40 > 252 ? 252 : v - 40);
      } else if (v < 240) {
        c = kCostLethal;
      } else {
        c = kCostUnknown;
      }
    }
    CostmapSnapshot snap = snapshot_from(cells, 20, 0.1);
    const CellIndex start{cellpick(rng), cellpick(rng)};
    const CellIndex goal{cellpick(rng), cellpick(rng)};
    const double w = 3.0;
    const PlanResult res = astar_plan(snap, start, goal, Pose2D(), {w});
    const double oracle = dijkstra_cost(snap, start, goal, w);
    if (!res.ok()) {
      CHECK(oracle < 0.0);
      continue;
    }
    ++solved;
    CHECK(res.path.total_cost == oracle);  // exact, tolerance 0
    // Every pose's cell is traversable.
    for (const Pose2D& p : res.path.poses) {
      const CellIndex c = world_to_cell(snap.meta, p.x, p.y);
      CHECK(snap.at_unchecked(c.cx, c.cy) < kCostInscribed);
    }
  }
  CHECK(solved > 20);  // the instances are not degenerate
}

TEST_CASE("identical request twice yields a byte-identical path") {
  std::mt19937_64 rng(43);
  std::uniform_int_distribution<int> byte(0, 252);
  std::vector<Cost> cells(400);
  for (auto& c : cells) c = static_cast<Cost>(byte(rng));
  CostmapSnapshot snap = snapshot_from(cells, 20, 0.05);
  const PlanResult a = astar_plan(snap, CellIndex{0, 0}, CellIndex{19, 7}, Pose2D(), {2.0});
  const PlanResult b = astar_plan(snap, CellIndex{0, 0}, CellIndex{19, 7}, Pose2D(), {2.0});
  REQUIRE(a.ok());
  REQUIRE(b.ok());
  REQUIRE(a.path.poses.size() == b.path.poses.size());
  for (std::size_t i = 0; i < a.path.poses.size(); ++i) {
    CHECK(a.path.poses[i].x == b.path.poses[i].x);
    CHECK(a.path.poses[i].y == b.path.poses[i].y);
    CHECK(a.path.poses[i].theta == b.path.poses[i].theta);
  }
  CHECK(a.path.total_cost == b.path.total_cost);
}

TEST_CASE("planner server: lifecycle gating, preemption, failure reporting") {
  auto map = std::make_shared<OccupancyGrid>(OccupancyGrid::make(
      GridMeta{1.0, Pose2D(), 10, 10}));
  CostmapParams params;
  params.inscribed_radius = 0.0;
  params.inflation_radius = 0.0;
  PlannerServer server("planner", map, params);
  server.register_plugin("astar", std::make_unique<AStarPlanner>(AStarParams{}));

  PlanRequest req;
  req.start = Pose2D(0.5, 0.5, 0);
  req.goal = Pose2D(8.5, 8.5, 0);

  SUBCASE("requests while not active fail with ServerUnavailable") {
    const auto h = server.submit(req, 0);
    CHECK(server.poll(h) == TaskStatus::Failed);
    CHECK(server.failure(h) == TaskFailure::ServerUnavailable);
  }

  SUBCASE("active server plans and reports success") {
    REQUIRE(server.request_transition(Transition::Configure) == TransitionResult::Ok);
    REQUIRE(server.request_transition(Transition::Activate) == TransitionResult::Ok);
    server.update_costmap(Pose2D(0.5, 0.5, 0), SensorBatch{}, 0);
    const auto h = server.submit(req, 0);
    CHECK(server.poll(h) == TaskStatus::Succeeded);
    CHECK_FALSE(server.path(h).empty());
    CHECK(server.plan_success_count() == 1);

    SUBCASE("a newer request preempts the pending one") {
      const auto h1 = server.submit(req, from_seconds(1.0));
      const auto h2 = server.submit(req, from_seconds(1.0));
      CHECK(server.poll(h1) == TaskStatus::Cancelled);
      CHECK(server.poll(h2) == TaskStatus::Succeeded);
    }

    SUBCASE("goal outside the map is rejected") {
      PlanRequest bad = req;
      bad.goal = Pose2D(99.0, 99.0, 0);
      const auto h3 = server.submit(bad, 0);
      CHECK(server.poll(h3) == TaskStatus::Failed);
      CHECK(server.failure(h3) == TaskFailure::RejectedGoal);
    }

    SUBCASE("explicit cancel sticks") {
      const auto h4 = server.submit(req, 0);
      server.cancel(h4);
      CHECK(server.poll(h4) == TaskStatus::Cancelled);
    }
  }
}
