#include "navstack/mcl.hpp"

#include <cmath>

#include "navstack/edt.hpp"

namespace navstack {

OdomDelta decompose_delta(const Pose2D& prev, const Pose2D& curr) {
  const double dx = curr.x - prev.x;
  const double dy = curr.y - prev.y;
  const double dtheta = normalize_angle(curr.theta - prev.theta);
  OdomDelta d;
  d.trans = std::hypot(dx, dy);
  // For a pure rotation the initial-rotation split is ill-defined; fold the
  // whole turn into rot2.
  if (d.trans < 1e-12) {
    d.rot1 = 0.0;
    d.rot2 = dtheta;
  } else {
    d.rot1 = normalize_angle(std::atan2(dy, dx) - prev.theta);
    d.rot2 = normalize_angle(dtheta - d.rot1);
  }
  return d;
}

Pose2D apply_delta(const Pose2D& pose, const OdomDelta& delta) {
  const double heading = pose.theta + delta.rot1;
  return Pose2D(pose.x + delta.trans * std::cos(heading),
                pose.y + delta.trans * std::sin(heading),
                pose.theta + delta.rot1 + delta.rot2);
}

OdomDelta sample_motion_noise(const OdomDelta& delta, const NoiseParams& noise,
                              std::mt19937_64& rng) {
  std::normal_distribution<double> gauss(0.0, 1.0);
  const double r1 = delta.rot1 * delta.rot1;
  const double r2 = delta.rot2 * delta.rot2;
  const double t2 = delta.trans * delta.trans;
  const double sd_rot1 = std::sqrt(noise.a1 * r1 + noise.a2 * t2);
  const double sd_trans = std::sqrt(noise.a3 * t2 + noise.a4 * (r1 + r2));
  const double sd_rot2 = std::sqrt(noise.a1 * r2 + noise.a2 * t2);
  OdomDelta out;
  out.rot1 = delta.rot1 + (sd_rot1 > 0.0 ? sd_rot1 * gauss(rng) : 0.0);
  out.trans = delta.trans + (sd_trans > 0.0 ? sd_trans * gauss(rng) : 0.0);
  out.rot2 = delta.rot2 + (sd_rot2 > 0.0 ? sd_rot2 * gauss(rng) : 0.0);
  return out;
}

void motion_update(std::vector<Particle>& particles, const OdomDelta& delta,
                   const NoiseParams& noise, std::mt19937_64& rng) {
  if (particles.empty()) {
    throw NavError(ErrorCode::InvalidInput, "empty particle set");
  }
  for (Particle& p : particles) {
    p.pose = apply_delta(p.pose, sample_motion_noise(delta, noise, rng));
  }
}

double LikelihoodField::distance_at(double x, double y) const {
  const int cx = static_cast<int>(std::floor((x - meta.origin.x) / meta.resolution));
  const int cy = static_cast<int>(std::floor((y - meta.origin.y) / meta.resolution));
  if (!meta.contains(cx, cy)) {
    return max_dist;
  }
  return dist[meta.index(cx, cy)];
}

double LikelihoodField::beam_factor(double d) const {
  return z_hit * std::exp(-(d * d) / (2.0 * sigma_hit * sigma_hit)) + z_rand / z_max;
}

LikelihoodField build_likelihood_field(const OccupancyGrid& map, double sigma_hit,
                                       double max_dist) {
  std::vector<std::uint8_t> occupied(map.cells.size(), 0);
  bool any = false;
  for (std::size_t i = 0; i < map.cells.size(); ++i) {
    if (map.cells[i] == Occupancy::Occupied) {
      occupied[i] = 1;
      any = true;
    }
  }
  if (!any) {
    throw NavError(ErrorCode::InvalidInput, "map has no occupied cell");
  }
  LikelihoodField field;
  field.meta = map.meta;
  field.sigma_hit = sigma_hit;
  field.max_dist = max_dist;
  field.dist.resize(occupied.size());
  const std::vector<double> d2 = squared_edt(occupied, map.meta.width, map.meta.height);
  for (std::size_t i = 0; i < d2.size(); ++i) {
    field.dist[i] = std::min(max_dist, map.meta.resolution * std::sqrt(d2[i]));
  }
  return field;
}

MeasurementStats measurement_update(std::vector<Particle>& particles,
                                    const LaserScan& scan, const LikelihoodField& field,
                                    int subsample) {
  if (particles.empty() || scan.ranges.empty()) {
    throw NavError(ErrorCode::InvalidInput, "empty particle set or scan");
  }
  MeasurementStats stats;
  const int n = scan.beam_count();
  const int m = std::min(subsample, n);
  const int stride = std::max(1, n / m);

  std::vector<int> beams;
  for (int i = 0; i < n && static_cast<int>(beams.size()) < m; i += stride) {
    if (!scan.no_return.empty() && scan.no_return[i]) continue;
    beams.push_back(i);
  }
  stats.beams_used = static_cast<int>(beams.size());

  double sum = 0.0;
  for (Particle& p : particles) {
    double w = p.weight;
    for (int i : beams) {
      const double a = p.pose.theta + scan.beam_angle(i);
      const double ex = p.pose.x + scan.ranges[i] * std::cos(a);
      const double ey = p.pose.y + scan.ranges[i] * std::sin(a);
      w *= field.beam_factor(field.distance_at(ex, ey));
    }
    p.weight = w;
    sum += w;
  }
  if (sum <= 0.0) {
    const double uniform = 1.0 / particles.size();
    for (Particle& p : particles) p.weight = uniform;
    stats.uniform_reset = true;
    return stats;
  }
  for (Particle& p : particles) p.weight /= sum;
  return stats;
}

void resample(std::vector<Particle>& particles, std::mt19937_64& rng, std::size_t count) {
  if (particles.empty()) {
    throw NavError(ErrorCode::InvalidInput, "empty particle set");
  }
  const std::size_t n = count == 0 ? particles.size() : count;
  std::uniform_real_distribution<double> unif(0.0, 1.0 / n);
  const double offset = unif(rng);

  std::vector<Particle> out;
  out.reserve(n);
  double cumulative = particles[0].weight;
  std::size_t i = 0;
  for (std::size_t k = 0; k < n; ++k) {
    const double u = offset + static_cast<double>(k) / n;
    while (u > cumulative && i + 1 < particles.size()) {
      ++i;
      cumulative += particles[i].weight;
    }
    out.push_back(Particle{particles[i].pose, 1.0 / n});
  }
  particles = std::move(out);
}

std::pair<Pose2D, Covariance3> estimate(const std::vector<Particle>& particles) {
  if (particles.empty()) {
    throw NavError(ErrorCode::InvalidInput, "empty particle set");
  }
  double mx = 0.0, my = 0.0, sin_sum = 0.0, cos_sum = 0.0;
  for (const Particle& p : particles) {
    mx += p.weight * p.pose.x;
    my += p.weight * p.pose.y;
    sin_sum += p.weight * std::sin(p.pose.theta);
    cos_sum += p.weight * std::cos(p.pose.theta);
  }
  const double mtheta = std::atan2(sin_sum, cos_sum);
  const Pose2D mean(mx, my, mtheta);

  Covariance3 cov{};
  for (const Particle& p : particles) {
    const double dx = p.pose.x - mx;
    const double dy = p.pose.y - my;
    const double dt = normalize_angle(p.pose.theta - mtheta);
    cov[0] += p.weight * dx * dx;
    cov[1] += p.weight * dx * dy;
    cov[2] += p.weight * dx * dt;
    cov[4] += p.weight * dy * dy;
    cov[5] += p.weight * dy * dt;
    cov[8] += p.weight * dt * dt;
  }
  cov[3] = cov[1];
  cov[6] = cov[2];
  cov[7] = cov[5];
  return {mean, cov};
}

MclFilter::MclFilter(const OccupancyGrid& map, const MclParams& params, std::uint64_t seed)
    : field_(build_likelihood_field(map, params.sigma_hit, params.max_dist)),
      params_(params),
      map_meta_(map.meta),
      rng_(seed) {
  field_.z_hit = params.z_hit;
  field_.z_rand = params.z_rand;
  if (field_.z_hit + field_.z_rand > 1.0 + 1e-12) {
    throw NavError(ErrorCode::InvalidInput, "z_hit + z_rand must not exceed 1");
  }
}

void MclFilter::init_gaussian(const Pose2D& pose, double xy_spread, double yaw_spread) {
  std::normal_distribution<double> gauss(0.0, 1.0);
  particles_.clear();
  particles_.reserve(params_.particle_count);
  const double w = 1.0 / params_.particle_count;
  for (int i = 0; i < params_.particle_count; ++i) {
    particles_.push_back(Particle{
        Pose2D(pose.x + xy_spread * gauss(rng_), pose.y + xy_spread * gauss(rng_),
               pose.theta + yaw_spread * gauss(rng_)),
        w});
  }
  refresh_estimate();
}

void MclFilter::init_uniform() {
  std::uniform_real_distribution<double> ux(map_meta_.origin.x,
                                            map_meta_.origin.x +
                                                map_meta_.width * map_meta_.resolution);
  std::uniform_real_distribution<double> uy(map_meta_.origin.y,
                                            map_meta_.origin.y +
                                                map_meta_.height * map_meta_.resolution);
  std::uniform_real_distribution<double> ut(-M_PI, M_PI);
  particles_.clear();
  particles_.reserve(params_.particle_count);
  const double w = 1.0 / params_.particle_count;
  for (int i = 0; i < params_.particle_count; ++i) {
    particles_.push_back(Particle{Pose2D(ux(rng_), uy(rng_), ut(rng_)), w});
  }
  refresh_estimate();
}

void MclFilter::on_odometry(const OdomDelta& delta) {
  pending_trans_ += std::abs(delta.trans);
  pending_rot_ += std::abs(normalize_angle(delta.rot1 + delta.rot2));
  odom_accum_ = apply_delta(odom_accum_, delta);
  // Dead-reckon the published pose between filter updates.
  pose_ = apply_delta(pose_, delta);
}

bool MclFilter::maybe_update(const LaserScan& scan) {
  if (pending_trans_ < params_.update_min_trans && pending_rot_ < params_.update_min_rot) {
    return false;
  }
  force_update(scan);
  return true;
}

void MclFilter::force_update(const LaserScan& scan) {
  const OdomDelta delta = decompose_delta(Pose2D(), odom_accum_);
  motion_update(particles_, delta, params_.noise, rng_);
  const MeasurementStats stats =
      measurement_update(particles_, scan, field_, params_.beam_subsample);
  if (stats.uniform_reset) {
    ++uniform_resets_;
  }
  resample(particles_, rng_);
  odom_accum_ = Pose2D();
  pending_trans_ = 0.0;
  pending_rot_ = 0.0;
  refresh_estimate();
}

void MclFilter::refresh_estimate() {
  auto [mean, cov] = estimate(particles_);
  pose_ = mean;
  cov_ = cov;
}

}  // namespace navstack
