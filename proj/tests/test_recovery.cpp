#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>

#include "doctest.h"
#include "navstack/recovery.hpp"

using namespace navstack;

namespace {

struct FakeRig {
  std::vector<ClearScope> clears;
  Twist last_cmd;
  double yaw_accum = 0.0;

  RecoveryServer::Hooks hooks() {
    RecoveryServer::Hooks h;
    h.clear_costmaps = [this](ClearScope s) { clears.push_back(s); };
    h.command = [this](const Twist& t) { last_cmd = t; };
    h.accumulated_yaw = [this]() { return yaw_accum; };
    return h;
  }
};

RecoveryServer active_server(FakeRig& rig, RecoveryServer::Params params = {0.5, 0.0}) {
  RecoveryServer server("recovery", rig.hooks(), params);
  server.request_transition(Transition::Configure);
  server.request_transition(Transition::Activate);
  return server;
}

}  // namespace

TEST_CASE("clear runs the requested scopes and records every execution") {
  FakeRig rig;
  RecoveryServer server = active_server(rig);

  CHECK(server.execute_clear(ClearScope::Global, 0) == TaskStatus::Succeeded);
  REQUIRE(rig.clears.size() == 1);
  CHECK(rig.clears[0] == ClearScope::Global);

  CHECK(server.execute_clear(ClearScope::Both, from_seconds(1.0)) == TaskStatus::Succeeded);
  CHECK(rig.clears.back() == ClearScope::Both);

  REQUIRE(server.records().size() == 2);
  CHECK(server.records()[0].kind == RecoveryKind::ClearCostmap);
  CHECK(server.records()[0].scope == ClearScope::Global);
  CHECK(server.records()[1].scope == ClearScope::Both);

  SUBCASE("inactive server rejects") {
    FakeRig rig2;
    RecoveryServer idle("recovery", rig2.hooks(), {0.5, 0.0});
    CHECK(idle.execute_clear(ClearScope::Local, 0) == TaskStatus::Failed);
    CHECK(idle.last_failure() == TaskFailure::ServerUnavailable);
    CHECK(rig2.clears.empty());
  }
}

TEST_CASE("clear throttling rejects repeats within the window per covering scope") {
  FakeRig rig;
  RecoveryServer server = active_server(rig, {0.5, 10.0});

  CHECK(server.execute_clear(ClearScope::Both, 0) == TaskStatus::Succeeded);
  // Global and local are both covered by the recent Both.
  CHECK(server.execute_clear(ClearScope::Global, from_seconds(2.0)) == TaskStatus::Failed);
  CHECK(server.last_failure() == TaskFailure::Throttled);
  CHECK(server.execute_clear(ClearScope::Local, from_seconds(2.0)) == TaskStatus::Failed);
  // After the window expires the clear works again.
  CHECK(server.execute_clear(ClearScope::Global, from_seconds(10.0)) == TaskStatus::Succeeded);
  // A both-clear right after only a global clear still reaches the local half.
  CHECK(server.execute_clear(ClearScope::Both, from_seconds(10.5)) == TaskStatus::Succeeded);
  // Only successful executions are recorded.
  CHECK(server.records().size() == 3);
}

TEST_CASE("spin commands rotation until the accumulated yaw reaches the target") {
  FakeRig rig;
  RecoveryServer server = active_server(rig);
  const auto handle = server.submit_spin(1.57, 0);
  REQUIRE(handle != 0);

  double t = 0.0;
  int polls = 0;
  TaskStatus st = TaskStatus::Running;
  while (st == TaskStatus::Running && polls < 200) {
    st = server.poll(handle, from_seconds(t));
    if (st == TaskStatus::Running) {
      rig.yaw_accum += std::abs(rig.last_cmd.wz) * 0.1;  // plant integration
      t += 0.1;
      ++polls;
    }
  }
  CHECK(st == TaskStatus::Succeeded);
  // 1.57 rad at 0.5 rad/s is reached after ~3.1 s of commanded rotation.
  CHECK(t == doctest::Approx(3.2).epsilon(0.05));
  CHECK(rig.yaw_accum >= 1.57);
  CHECK(rig.last_cmd.wz == 0.0);  // stopped on completion
  REQUIRE(server.records().size() == 1);
  CHECK(server.records()[0].kind == RecoveryKind::Spin);
  CHECK(server.records()[0].outcome == RecoveryOutcome::Success);
  CHECK(server.records()[0].end >= server.records()[0].start);

  SUBCASE("cancel mid-spin stops the robot and records Cancelled") {
    const auto h2 = server.submit_spin(2.0, from_seconds(10.0));
    server.poll(h2, from_seconds(10.0));
    rig.yaw_accum += 1.0;  // halfway
    server.cancel(h2, from_seconds(12.0));
    CHECK(rig.last_cmd.wz == 0.0);
    CHECK(server.records().back().outcome == RecoveryOutcome::Cancelled);
    CHECK(server.poll(h2, from_seconds(12.1)) == TaskStatus::Cancelled);
  }

  SUBCASE("non-positive target is rejected") {
    CHECK_THROWS_AS(server.submit_spin(0.0, 0), NavError);
    CHECK_THROWS_AS(server.submit_spin(-1.0, 0), NavError);
  }
}

TEST_CASE("wait holds zero twist for exactly the duration") {
  FakeRig rig;
  rig.last_cmd = Twist{0.4, 0.2};
  RecoveryServer server = active_server(rig);
  const SimTime t0 = from_seconds(3.0);
  const auto handle = server.submit_wait(5.0, t0);
  REQUIRE(handle != 0);

  CHECK(server.poll(handle, t0) == TaskStatus::Running);
  CHECK(rig.last_cmd.vx == 0.0);
  CHECK(rig.last_cmd.wz == 0.0);
  CHECK(server.poll(handle, from_seconds(7.99)) == TaskStatus::Running);
  CHECK(server.poll(handle, from_seconds(8.0)) == TaskStatus::Succeeded);  // t0 + 5.0
  REQUIRE(server.records().size() == 1);
  CHECK(server.records()[0].kind == RecoveryKind::Wait);
  CHECK(server.records()[0].start == t0);
  CHECK(server.records()[0].end == from_seconds(8.0));

  SUBCASE("non-positive duration is rejected") {
    CHECK_THROWS_AS(server.submit_wait(-1.0, 0), NavError);
    CHECK_THROWS_AS(server.submit_wait(0.0, 0), NavError);
  }
}

TEST_CASE("one recovery at a time: overlap is busy-rejected") {
  FakeRig rig;
  RecoveryServer server = active_server(rig);
  const auto spin = server.submit_spin(1.0, 0);
  REQUIRE(spin != 0);
  CHECK(server.submit_wait(1.0, 0) == 0);
  CHECK(server.last_failure() == TaskFailure::BusyRejected);
  CHECK(server.submit_spin(1.0, 0) == 0);

  // Finishing the spin frees the server.
  rig.yaw_accum = 5.0;
  CHECK(server.poll(spin, from_seconds(1.0)) == TaskStatus::Succeeded);
  CHECK(server.submit_wait(1.0, from_seconds(1.0)) != 0);
}

TEST_CASE("every completed recovery leaves exactly one record") {
  FakeRig rig;
  RecoveryServer server = active_server(rig);
  server.execute_clear(ClearScope::Global, 0);
  const auto spin = server.submit_spin(0.5, 0);
  rig.yaw_accum = 1.0;
  server.poll(spin, from_seconds(0.5));
  const auto wait = server.submit_wait(0.5, from_seconds(1.0));
  server.poll(wait, from_seconds(1.5));
  CHECK(server.records().size() == 3);
  CHECK(server.records_since(1).size() == 2);
  CHECK(server.records_since(3).empty());
}
