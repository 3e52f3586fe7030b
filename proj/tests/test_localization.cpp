#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>
#include <random>

#include "doctest.h"
#include "navstack/mcl.hpp"
#include "navstack/simulator.hpp"

using namespace navstack;

namespace {

OccupancyGrid boxed_map(int n, double res) {
  GridMeta meta;
  meta.resolution = res;
  meta.width = n;
  meta.height = n;
  OccupancyGrid map = OccupancyGrid::make(meta);
  for (int i = 0; i < n; ++i) {
    map.set(i, 0, Occupancy::Occupied);
    map.set(i, n - 1, Occupancy::Occupied);
    map.set(0, i, Occupancy::Occupied);
    map.set(n - 1, i, Occupancy::Occupied);
  }
  return map;
}

}  // namespace

TEST_CASE("odometry delta decomposition reconstructs the increment") {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> pos(-5, 5);
  std::uniform_real_distribution<double> ang(-3, 3);
  for (int i = 0; i < 1000; ++i) {
    const Pose2D a(pos(rng), pos(rng), ang(rng));
    const Pose2D b(pos(rng), pos(rng), ang(rng));
    const OdomDelta d = decompose_delta(a, b);
    const Pose2D back = apply_delta(a, d);
    CHECK(back.x == doctest::Approx(b.x).epsilon(1e-9));
    CHECK(back.y == doctest::Approx(b.y).epsilon(1e-9));
    CHECK(std::abs(normalize_angle(back.theta - b.theta)) < 1e-9);
  }
}

TEST_CASE("motion update with zero noise is exact") {
  std::mt19937_64 rng(5);
  std::vector<Particle> ps;
  ps.push_back({Pose2D(0, 0, 0), 0.5});
  ps.push_back({Pose2D(1, 2, M_PI / 2), 0.5});

  SUBCASE("pure translation moves along each particle's heading") {
    motion_update(ps, OdomDelta{0, 1.0, 0}, NoiseParams{}, rng);
    CHECK(ps[0].pose.x == doctest::Approx(1.0));
    CHECK(ps[0].pose.y == doctest::Approx(0.0));
    CHECK(ps[1].pose.x == doctest::Approx(1.0));
    CHECK(ps[1].pose.y == doctest::Approx(3.0));
    CHECK(ps[0].weight == 0.5);  // weights untouched
  }
  SUBCASE("pure rotation advances headings") {
    motion_update(ps, OdomDelta{M_PI / 2, 0, 0}, NoiseParams{}, rng);
    CHECK(ps[0].pose.theta == doctest::Approx(M_PI / 2));
    CHECK(ps[1].pose.theta == doctest::Approx(M_PI));
  }
  SUBCASE("empty set is rejected") {
    std::vector<Particle> none;
    CHECK_THROWS_AS(motion_update(none, OdomDelta{}, NoiseParams{}, rng), NavError);
  }
}

TEST_CASE("translation noise variance follows a3*trans^2") {
  std::mt19937_64 rng(11);
  NoiseParams noise;
  noise.a3 = 0.01;
  const OdomDelta delta{0.0, 1.0, 0.0};
  double sum = 0.0, sum2 = 0.0;
  const int n = 100000;
  for (int i = 0; i < n; ++i) {
    const OdomDelta s = sample_motion_noise(delta, noise, rng);
    const double eps = s.trans - delta.trans;
    sum += eps;
    sum2 += eps * eps;
  }
  const double var = sum2 / n - (sum / n) * (sum / n);
  CHECK(var == doctest::Approx(0.01).epsilon(0.05));
}

TEST_CASE("likelihood field: zeros on occupied cells, exact distances, cap") {
  OccupancyGrid map = boxed_map(30, 0.1);
  map.set(15, 15, Occupancy::Occupied);
  const LikelihoodField field = build_likelihood_field(map, 0.2, 2.0);
  CHECK(field.dist[map.meta.index(15, 15)] == 0.0);
  CHECK(field.dist[map.meta.index(15, 16)] == doctest::Approx(0.1));
  CHECK(field.dist[map.meta.index(16, 16)] == doctest::Approx(0.1 * std::sqrt(2.0)));

  SUBCASE("matches the brute-force all-pairs scan on random maps") {
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> unit(0, 1);
    for (int trial = 0; trial < 20; ++trial) {
      OccupancyGrid m = OccupancyGrid::make(GridMeta{0.1, Pose2D(), 30, 30});
      std::vector<std::pair<int, int>> occ;
      for (int cy = 0; cy < 30; ++cy) {
        for (int cx = 0; cx < 30; ++cx) {
          if (unit(rng) < 0.03) {
            m.set(cx, cy, Occupancy::Occupied);
            occ.emplace_back(cx, cy);
          }
        }
      }
      if (occ.empty()) {
        m.set(4, 4, Occupancy::Occupied);
        occ.emplace_back(4, 4);
      }
      const LikelihoodField f = build_likelihood_field(m, 0.2, 3.0);
      for (int cy = 0; cy < 30; ++cy) {
        for (int cx = 0; cx < 30; ++cx) {
          double best = std::numeric_limits<double>::infinity();
          for (auto& [ox, oy] : occ) {
            const double dx = cx - ox, dy = cy - oy;
            best = std::min(best, dx * dx + dy * dy);
          }
          const double want = std::min(3.0, 0.1 * std::sqrt(best));
          CHECK(f.dist[m.meta.index(cx, cy)] == doctest::Approx(want).epsilon(1e-12));
        }
      }
    }
  }

  SUBCASE("map without occupied cells is rejected") {
    OccupancyGrid empty = OccupancyGrid::make(GridMeta{0.1, Pose2D(), 5, 5});
    CHECK_THROWS_AS(build_likelihood_field(empty, 0.2, 2.0), NavError);
  }
}

TEST_CASE("measurement update weights the true pose above a displaced one") {
  OccupancyGrid map = boxed_map(100, 0.1);  // 10 m box
  // Feature-rich interior: pillars.
  for (const auto& [px, py] : {std::pair{30, 30}, {70, 25}, {25, 70}, {60, 60}, {45, 80}}) {
    for (int dy = 0; dy < 3; ++dy) {
      for (int dx = 0; dx < 3; ++dx) map.set(px + dx, py + dy, Occupancy::Occupied);
    }
  }
  LidarSpec lidar;
  lidar.beams = 180;
  lidar.fov = 2 * M_PI * 0.75;
  lidar.max_range = 8.0;
  lidar.sigma = 0.0;
  const Pose2D truth(5.0, 4.0, 0.3);
  World world(map, truth, 0.2, VelocityLimits{}, lidar, NoiseParams{}, 1);
  const LaserScan scan = world.lidar();

  LikelihoodField field = build_likelihood_field(map, 0.2, 2.0);
  field.z_max = lidar.max_range;

  std::vector<Particle> ps;
  ps.push_back({truth, 0.5});
  ps.push_back({Pose2D(6.0, 4.0, 0.3), 0.5});
  const MeasurementStats stats = measurement_update(ps, scan, field, 30);
  CHECK_FALSE(stats.uniform_reset);
  CHECK(ps[0].weight + ps[1].weight == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(ps[0].weight > 0.5);

  SUBCASE("per-beam factor is maximal at distance zero and capped far away") {
    CHECK(field.beam_factor(0.0) ==
          doctest::Approx(field.z_hit + field.z_rand / field.z_max));
    const double far = field.beam_factor(field.max_dist);
    CHECK(far == doctest::Approx(field.z_hit * std::exp(-field.max_dist * field.max_dist /
                                                        (2 * field.sigma_hit * field.sigma_hit)) +
                                 field.z_rand / field.z_max));
    for (double d = 0.0; d <= 2.0; d += 0.05) {
      CHECK(field.beam_factor(d) <= field.beam_factor(0.0));
    }
  }

  SUBCASE("weight normalization holds across repeated updates") {
    for (int i = 0; i < 5; ++i) {
      measurement_update(ps, scan, field, 30);
      double sum = 0.0;
      for (const auto& p : ps) sum += p.weight;
      CHECK(sum == doctest::Approx(1.0).epsilon(1e-9));
    }
  }
}

TEST_CASE("systematic resampling") {
  std::mt19937_64 rng(13);

  SUBCASE("equal weights: every particle appears exactly once") {
    std::vector<Particle> ps;
    for (int i = 0; i < 8; ++i) ps.push_back({Pose2D(i, 0, 0), 1.0 / 8});
    resample(ps, rng);
    REQUIRE(ps.size() == 8);
    std::vector<int> seen(8, 0);
    for (const auto& p : ps) ++seen[static_cast<int>(p.pose.x)];
    for (int c : seen) CHECK(c == 1);
    for (const auto& p : ps) CHECK(p.weight == doctest::Approx(1.0 / 8));
  }

  SUBCASE("weight-1 particle fills the output") {
    std::vector<Particle> ps;
    ps.push_back({Pose2D(1, 1, 0), 0.0});
    ps.push_back({Pose2D(2, 2, 0), 1.0});
    resample(ps, rng, 6);
    REQUIRE(ps.size() == 6);
    for (const auto& p : ps) CHECK(p.pose.x == 2.0);
  }

  SUBCASE("weights (0.75, 0.25) with four offspring split {3,1} for every offset") {
    for (int trial = 0; trial < 200; ++trial) {
      std::vector<Particle> ps;
      ps.push_back({Pose2D(1, 0, 0), 0.75});
      ps.push_back({Pose2D(2, 0, 0), 0.25});
      resample(ps, rng, 4);
      int first = 0, second = 0;
      for (const auto& p : ps) (p.pose.x == 1.0 ? first : second)++;
      CHECK(first == 3);
      CHECK(second == 1);
    }
  }

  SUBCASE("resampling preserves the mean pose within the systematic bound") {
    std::mt19937_64 gen(17);
    std::uniform_real_distribution<double> unit(0, 1);
    int outliers = 0;
    const int trials = 1000;
    for (int t = 0; t < trials; ++t) {
      std::vector<Particle> ps;
      double wsum = 0.0;
      for (int i = 0; i < 50; ++i) {
        const double w = unit(gen) + 1e-3;
        ps.push_back({Pose2D(unit(gen) * 4, unit(gen) * 4, 0), w});
        wsum += w;
      }
      for (auto& p : ps) p.weight /= wsum;
      const auto [before, cov_b] = estimate(ps);
      resample(ps, gen);
      const auto [after, cov_a] = estimate(ps);
      // Systematic resampling jitters the mean by at most ~sigma/sqrt(n)
      // per axis; 3 sigma of that bound.
      const double bound = 3.0 * std::sqrt((cov_b[0] + cov_b[4]) / ps.size());
      if (std::hypot(after.x - before.x, after.y - before.y) > bound) ++outliers;
    }
    CHECK(outliers < trials / 100);
  }
}

TEST_CASE("estimate: means, circular mean, covariance") {
  SUBCASE("identical particles give the pose with zero covariance") {
    std::vector<Particle> ps(10, Particle{Pose2D(1.5, -2.0, 0.7), 0.1});
    const auto [mean, cov] = estimate(ps);
    CHECK(mean.x == doctest::Approx(1.5));
    CHECK(mean.y == doctest::Approx(-2.0));
    CHECK(mean.theta == doctest::Approx(0.7));
    for (double c : cov) CHECK(std::abs(c) < 1e-12);
  }

  SUBCASE("circular mean of +170 and -170 degrees is 180, not 0") {
    std::vector<Particle> ps;
    ps.push_back({Pose2D(0, 0, 170.0 * M_PI / 180.0), 0.5});
    ps.push_back({Pose2D(0, 0, -170.0 * M_PI / 180.0), 0.5});
    const auto [mean, cov] = estimate(ps);
    CHECK(std::abs(normalize_angle(mean.theta - M_PI)) < 1e-9);
  }

  SUBCASE("symmetric cloud is centered") {
    std::vector<Particle> ps;
    for (int i = 0; i < 8; ++i) {
      const double a = i * M_PI / 4;
      ps.push_back({Pose2D(1.0 + std::cos(a), 2.0 + std::sin(a), 0.0), 1.0 / 8});
    }
    const auto [mean, cov] = estimate(ps);
    CHECK(mean.x == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(mean.y == doctest::Approx(2.0).epsilon(1e-12));
  }
}

TEST_CASE("zero-noise filter tracks the true pose exactly") {
  OccupancyGrid map = boxed_map(60, 0.1);
  MclParams params;
  params.particle_count = 10;
  params.noise = NoiseParams{};  // zero odometry noise
  params.update_min_trans = 0.05;
  params.update_min_rot = 0.1;
  MclFilter filter(map, params, 7);
  filter.init_gaussian(Pose2D(3.0, 3.0, 0.0), 0.0, 0.0);

  LidarSpec lidar;
  lidar.beams = 90;
  lidar.sigma = 0.0;
  lidar.max_range = 8.0;
  World world(map, Pose2D(3.0, 3.0, 0.0), 0.2, VelocityLimits{}, lidar, NoiseParams{}, 3);

  Pose2D truth(3.0, 3.0, 0.0);
  std::vector<OdomDelta> moves;
  for (int i = 0; i < 20; ++i) moves.push_back(OdomDelta{0.05, 0.08, -0.02});
  for (const OdomDelta& d : moves) {
    truth = apply_delta(truth, d);
    filter.on_odometry(d);
    filter.maybe_update(world.lidar());
    CHECK(filter.pose().x == doctest::Approx(truth.x).epsilon(1e-9));
    CHECK(filter.pose().y == doctest::Approx(truth.y).epsilon(1e-9));
    CHECK(std::abs(normalize_angle(filter.pose().theta - truth.theta)) < 1e-9);
  }
}
