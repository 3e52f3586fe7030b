#include "navstack/planning.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <queue>
#include <tuple>

namespace navstack {

const char* to_string(TaskFailure f) {
  switch (f) {
    case TaskFailure::None: return "none";
    case TaskFailure::ServerUnavailable: return "server_unavailable";
    case TaskFailure::RejectedGoal: return "rejected_goal";
    case TaskFailure::GoalOccupied: return "goal_occupied";
    case TaskFailure::StartOccupied: return "start_occupied";
    case TaskFailure::NoPathFound: return "no_path_found";
    case TaskFailure::UnknownPlanner: return "unknown_planner";
    case TaskFailure::NoPath: return "no_path";
    case TaskFailure::NoValidControl: return "no_valid_control";
    case TaskFailure::Throttled: return "throttled";
    case TaskFailure::BusyRejected: return "busy_rejected";
  }
  return "?";
}

namespace {

constexpr double kSqrt2 = 1.4142135623730951;

inline bool traversable(Cost c) { return c < kCostInscribed; }

inline double octile(int dx, int dy) {
  dx = std::abs(dx);
  dy = std::abs(dy);
  const int lo = std::min(dx, dy);
  return (dx + dy) + (kSqrt2 - 2.0) * lo;
}

// Neighbor expansion order fixes tie-breaking: N, NE, E, SE, S, SW, W, NW.
constexpr int kDx[8] = {0, 1, 1, 1, 0, -1, -1, -1};
constexpr int kDy[8] = {1, 1, 0, -1, -1, -1, 0, 1};

}  // namespace

PlanResult astar_plan(const CostmapSnapshot& snapshot, const CellIndex& start,
                      const CellIndex& goal, const Pose2D& goal_pose,
                      const AStarParams& params) {
  PlanResult result;
  const GridMeta& meta = snapshot.meta;
  if (!meta.contains(start) || !traversable(snapshot.at_unchecked(start.cx, start.cy))) {
    result.error = PlanError::StartOccupied;
    return result;
  }
  if (!meta.contains(goal) || !traversable(snapshot.at_unchecked(goal.cx, goal.cy))) {
    result.error = PlanError::GoalOccupied;
    return result;
  }

  const std::size_t n = meta.size();
  std::vector<double> g(n, std::numeric_limits<double>::infinity());
  std::vector<std::int32_t> parent(n, -1);

  // Min-heap keyed by (f, h, insertion sequence). The sequence makes equal
  // (f, h) entries pop in push order, which follows the neighbor order above.
  using Entry = std::tuple<double, double, std::uint64_t, std::int32_t>;
  std::priority_queue<Entry, std::vector<Entry>, std::greater<Entry>> open;
  std::uint64_t seq = 0;

  const std::size_t start_i = meta.index(start.cx, start.cy);
  const std::size_t goal_i = meta.index(goal.cx, goal.cy);
  g[start_i] = 0.0;
  open.emplace(octile(goal.cx - start.cx, goal.cy - start.cy),
               octile(goal.cx - start.cx, goal.cy - start.cy), seq++,
               static_cast<std::int32_t>(start_i));

  bool found = false;
  while (!open.empty()) {
    const auto [f, h, s, idx] = open.top();
    open.pop();
    const double gi = g[idx];
    if (f > gi + h) {
      continue;  // stale entry
    }
    if (static_cast<std::size_t>(idx) == goal_i) {
      found = true;
      break;
    }
    const int cx = idx % meta.width;
    const int cy = idx / meta.width;
    for (int k = 0; k < 8; ++k) {
      const int nx = cx + kDx[k];
      const int ny = cy + kDy[k];
      if (!meta.contains(nx, ny)) continue;
      const Cost c = snapshot.at_unchecked(nx, ny);
      if (!traversable(c)) continue;
      const double step = (kDx[k] != 0 && kDy[k] != 0) ? kSqrt2 : 1.0;
      const double move = step * (1.0 + params.cost_weight * c / 252.0);
      const double ng = gi + move;
      const std::size_t ni = meta.index(nx, ny);
      if (ng < g[ni]) {
        g[ni] = ng;
        parent[ni] = idx;
        const double nh = octile(goal.cx - nx, goal.cy - ny);
        open.emplace(ng + nh, nh, seq++, static_cast<std::int32_t>(ni));
      }
    }
  }

  if (!found) {
    result.error = PlanError::NoPathFound;
    return result;
  }

  std::vector<CellIndex> cells;
  for (std::int32_t i = static_cast<std::int32_t>(goal_i); i != -1; i = parent[i]) {
    cells.push_back(CellIndex{static_cast<int>(i % meta.width),
                              static_cast<int>(i / meta.width)});
  }
  std::reverse(cells.begin(), cells.end());

  Path path;
  path.total_cost = g[goal_i];
  path.poses.reserve(cells.size());
  for (std::size_t i = 0; i < cells.size(); ++i) {
    const auto [wx, wy] = cell_to_world(meta, cells[i]);
    double heading;
    if (i + 1 < cells.size()) {
      const auto [nx2, ny2] = cell_to_world(meta, cells[i + 1]);
      heading = std::atan2(ny2 - wy, nx2 - wx);
    } else {
      heading = goal_pose.theta;
    }
    path.poses.emplace_back(wx, wy, heading);
  }
  result.path = std::move(path);
  return result;
}

PlannerServer::PlannerServer(std::string name, std::shared_ptr<const OccupancyGrid> map,
                             const CostmapParams& costmap_params)
    : ManagedServer(std::move(name)),
      map_(std::move(map)),
      costmap_params_(costmap_params),
      costmap_(LayeredCostmap::make_global(map_, costmap_params_)) {}

void PlannerServer::register_plugin(const std::string& id,
                                    std::unique_ptr<PlannerPlugin> plugin) {
  plugins_[id] = std::move(plugin);
}

void PlannerServer::select_plugin(const std::string& id) { selected_ = id; }

bool PlannerServer::on_configure() {
  // The selected algorithm plugin must be resolvable at configure time.
  return plugins_.count(selected_) > 0;
}

bool PlannerServer::on_cleanup() {
  costmap_.clear_except_static();
  slots_.clear();
  return true;
}

bool PlannerServer::on_deactivate() {
  for (auto& slot : slots_) {
    if (slot.status == TaskStatus::Pending || slot.status == TaskStatus::Running) {
      slot.status = TaskStatus::Cancelled;
    }
  }
  return true;
}

SnapshotPtr PlannerServer::update_costmap(const Pose2D& robot, const SensorBatch& batch,
                                          SimTime now) {
  if (!is_active()) {
    return costmap_.latest();
  }
  return costmap_.update(robot, batch, now);
}

SnapshotPtr PlannerServer::snapshot() const { return costmap_.latest(); }

TemporalVoxelStore* PlannerServer::voxel_store() {
  auto* layer = costmap_.voxel_layer();
  return layer ? &layer->store() : nullptr;
}

std::uint64_t PlannerServer::submit(const PlanRequest& req, SimTime now) {
  // Preemption: a newer request cancels whatever is still unfinished.
  for (auto& slot : slots_) {
    if (slot.status == TaskStatus::Pending || slot.status == TaskStatus::Running) {
      slot.status = TaskStatus::Cancelled;
    }
  }
  Slot slot;
  slot.handle = next_handle_++;
  slot.request = req;
  slot.submitted = now;
  if (!is_active()) {
    slot.status = TaskStatus::Failed;
    slot.failure = TaskFailure::ServerUnavailable;
  }
  slots_.push_back(std::move(slot));
  if (slots_.size() > 8) {
    slots_.erase(slots_.begin(), slots_.begin() + (slots_.size() - 8));
  }
  return slots_.back().handle;
}

void PlannerServer::service(Slot& slot) {
  if (slot.status != TaskStatus::Pending) {
    return;
  }
  if (!is_active()) {
    slot.status = TaskStatus::Failed;
    slot.failure = TaskFailure::ServerUnavailable;
    last_failure_ = slot.failure;
    return;
  }
  auto it = plugins_.find(slot.request.planner_id.empty() ? selected_
                                                          : slot.request.planner_id);
  if (it == plugins_.end()) {
    slot.status = TaskStatus::Failed;
    slot.failure = TaskFailure::UnknownPlanner;
    last_failure_ = slot.failure;
    return;
  }
  SnapshotPtr snap = costmap_.latest();
  if (!snap) {
    slot.status = TaskStatus::Failed;
    slot.failure = TaskFailure::NoPathFound;
    last_failure_ = slot.failure;
    return;
  }
  CellIndex start, goal;
  try {
    start = world_to_cell(snap->meta, slot.request.start.x, slot.request.start.y);
    goal = world_to_cell(snap->meta, slot.request.goal.x, slot.request.goal.y);
  } catch (const NavError&) {
    slot.status = TaskStatus::Failed;
    slot.failure = TaskFailure::RejectedGoal;
    last_failure_ = slot.failure;
    return;
  }
  PlanResult res = it->second->plan(*snap, start, goal, slot.request.goal);
  if (!res.ok()) {
    slot.status = TaskStatus::Failed;
    switch (res.error) {
      case PlanError::GoalOccupied: slot.failure = TaskFailure::GoalOccupied; break;
      case PlanError::StartOccupied: slot.failure = TaskFailure::StartOccupied; break;
      default: slot.failure = TaskFailure::NoPathFound; break;
    }
    last_failure_ = slot.failure;
    return;
  }
  slot.path = std::move(res.path);
  slot.path.created = slot.submitted;
  slot.status = TaskStatus::Succeeded;
  last_failure_ = TaskFailure::None;
  ++plan_success_count_;
}

TaskStatus PlannerServer::poll(std::uint64_t handle) {
  for (auto& slot : slots_) {
    if (slot.handle == handle) {
      service(slot);
      return slot.status;
    }
  }
  return TaskStatus::Cancelled;  // forgotten handles count as preempted
}

void PlannerServer::cancel(std::uint64_t handle) {
  for (auto& slot : slots_) {
    if (slot.handle == handle &&
        (slot.status == TaskStatus::Pending || slot.status == TaskStatus::Running)) {
      slot.status = TaskStatus::Cancelled;
    }
  }
}

const Path& PlannerServer::path(std::uint64_t handle) const {
  for (const auto& slot : slots_) {
    if (slot.handle == handle) {
      return slot.path;
    }
  }
  static const Path empty;
  return empty;
}

TaskFailure PlannerServer::failure(std::uint64_t handle) const {
  for (const auto& slot : slots_) {
    if (slot.handle == handle) {
      return slot.failure;
    }
  }
  return TaskFailure::None;
}

}  // namespace navstack
