#pragma once

#include <array>
#include <random>
#include <vector>

#include "navstack/costmap.hpp"
#include "navstack/geometry.hpp"
#include "navstack/sensor.hpp"

namespace navstack {

struct Particle {
  Pose2D pose;
  double weight = 0.0;
};

/// Pose increment decomposed as initial rotation, translation, final
/// rotation. Reapplying (rot1, trans, rot2) reconstructs the increment.
struct OdomDelta {
  double rot1 = 0.0;
  double trans = 0.0;
  double rot2 = 0.0;
};

OdomDelta decompose_delta(const Pose2D& prev, const Pose2D& curr);
Pose2D apply_delta(const Pose2D& pose, const OdomDelta& delta);

/// Odometry noise mixing coefficients: a1 rot-from-rot, a2 rot-from-trans,
/// a3 trans-from-trans, a4 trans-from-rot. Values are variance weights.
struct NoiseParams {
  double a1 = 0.0, a2 = 0.0, a3 = 0.0, a4 = 0.0;
};

/// Samples the standard differential odometry motion model once.
OdomDelta sample_motion_noise(const OdomDelta& delta, const NoiseParams& noise,
                              std::mt19937_64& rng);

/// Advances every particle by a noisy draw of the delta; weights unchanged.
void motion_update(std::vector<Particle>& particles, const OdomDelta& delta,
                   const NoiseParams& noise, std::mt19937_64& rng);

/// Distance-to-nearest-occupied field with the beam mixture parameters.
struct LikelihoodField {
  GridMeta meta;
  std::vector<double> dist;  // meters, capped at max_dist
  double z_hit = 0.95;
  double z_rand = 0.05;
  double sigma_hit = 0.2;
  double max_dist = 2.0;
  double z_max = 8.0;  // sensor max range, the z_rand normalizer

  /// Field value at a world point; outside the grid reads as max_dist.
  double distance_at(double x, double y) const;
  /// Mixture factor for an endpoint at field distance d.
  double beam_factor(double d) const;
};

/// Exact distance transform of the occupied cells, capped at max_dist.
/// Throws NavError(InvalidInput) when the map has no occupied cell.
LikelihoodField build_likelihood_field(const OccupancyGrid& map, double sigma_hit,
                                       double max_dist);

struct MeasurementStats {
  bool uniform_reset = false;  // all weights underflowed to zero
  int beams_used = 0;
};

/// Likelihood-field measurement update over `subsample` evenly spaced beams
/// (no-return beams skipped); weights are renormalized to sum 1.
MeasurementStats measurement_update(std::vector<Particle>& particles,
                                    const LaserScan& scan, const LikelihoodField& field,
                                    int subsample);

/// Low-variance systematic resampling to `count` particles (0 keeps the
/// current count). Output weights are uniform.
void resample(std::vector<Particle>& particles, std::mt19937_64& rng,
              std::size_t count = 0);

using Covariance3 = std::array<double, 9>;  // row-major x, y, theta

/// Weighted mean pose (circular mean for heading) and covariance with
/// wrapped angular deviations.
std::pair<Pose2D, Covariance3> estimate(const std::vector<Particle>& particles);

struct MclParams {
  int particle_count = 500;
  NoiseParams noise{0.1, 0.1, 0.02, 0.02};
  double z_hit = 0.95;
  double z_rand = 0.05;
  double sigma_hit = 0.2;
  double max_dist = 2.0;
  int beam_subsample = 30;
  double update_min_trans = 0.1;  // meters
  double update_min_rot = 0.2;    // radians
};

/// Particle filter bound to one map: accumulates odometry and refreshes the
/// estimate whenever motion exceeds the update thresholds.
class MclFilter {
 public:
  MclFilter(const OccupancyGrid& map, const MclParams& params, std::uint64_t seed);

  void init_gaussian(const Pose2D& pose, double xy_spread, double yaw_spread);
  void init_uniform();

  /// Feeds one odometry increment (odometry frame).
  void on_odometry(const OdomDelta& delta);

  /// Runs motion + measurement + resample when thresholds are exceeded.
  /// Returns true when an update ran.
  bool maybe_update(const LaserScan& scan);
  /// Unconditional update cycle with whatever motion accumulated.
  void force_update(const LaserScan& scan);

  const Pose2D& pose() const { return pose_; }
  const Covariance3& covariance() const { return cov_; }
  const std::vector<Particle>& particles() const { return particles_; }
  bool had_uniform_reset() const { return uniform_resets_ > 0; }

 private:
  void refresh_estimate();

  LikelihoodField field_;
  MclParams params_;
  GridMeta map_meta_;
  std::mt19937_64 rng_;
  std::vector<Particle> particles_;
  Pose2D pose_;
  Covariance3 cov_{};
  double pending_trans_ = 0.0;
  double pending_rot_ = 0.0;
  Pose2D odom_accum_;  // accumulated increment since last filter update
  int uniform_resets_ = 0;
};

}  // namespace navstack
