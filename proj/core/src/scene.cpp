#include "hypercp/scene.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace hypercp {

double dot(Vec3 a, Vec3 b) { return a.x * b.x + a.y * b.y + a.z * b.z; }

double norm(Vec3 a) { return std::sqrt(dot(a, a)); }

Vec3 normalized(Vec3 a) {
  const double n = norm(a);
  if (n <= 0.0) {
    throw std::invalid_argument("normalized: zero vector");
  }
  return {a.x / n, a.y / n, a.z / n};
}

double SceneConfig::cone_half_angle_rad() const {
  return cone_opening_deg * 0.5 * std::numbers::pi / 180.0;
}

double SceneConfig::cone_solid_angle_sr() const {
  return 2.0 * std::numbers::pi * (1.0 - std::cos(cone_half_angle_rad()));
}

double SceneConfig::traversal_time_s() const {
  const Vec3 d{source_end_cm.x - source_start_cm.x,
               source_end_cm.y - source_start_cm.y,
               source_end_cm.z - source_start_cm.z};
  const double len = norm(d);
  if (len <= 0.0 || speed_cm_per_s <= 0.0) return 0.0;
  return len / speed_cm_per_s;
}

Vec3 source_position(double t_s, const SceneConfig& cfg) {
  const double total = cfg.traversal_time_s();
  double f = 0.0;
  if (total > 0.0) {
    f = t_s / total;
    if (f < 0.0) f = 0.0;
    if (f > 1.0) f = 1.0;
  }
  return {cfg.source_start_cm.x +
              f * (cfg.source_end_cm.x - cfg.source_start_cm.x),
          cfg.source_start_cm.y +
              f * (cfg.source_end_cm.y - cfg.source_start_cm.y),
          cfg.source_start_cm.z +
              f * (cfg.source_end_cm.z - cfg.source_start_cm.z)};
}

GroundTruth ground_truth(double t_s, const SceneConfig& cfg) {
  const Vec3 s = source_position(t_s, cfg);
  return GroundTruth{s.y, s.z, Vec3{-1.0, 0.0, 0.0}};
}

double impinging_power_mw(double node_y_cm, double node_z_cm, double t_s,
                          const SceneConfig& cfg, double cell_area_cm2) {
  const Vec3 s = source_position(t_s, cfg);
  const Vec3 r{0.0 - s.x, node_y_cm - s.y, node_z_cm - s.z};
  const double dist = norm(r);
  if (dist <= 0.0) {
    throw std::invalid_argument(
        "impinging_power: node coincides with the source");
  }
  // Angle between the ray and the cone axis (-x).
  const double cos_angle = -r.x / dist;
  const double angle = std::acos(std::clamp(cos_angle, -1.0, 1.0));
  if (angle > cfg.cone_half_angle_rad()) return 0.0;
  const double flux = cfg.tx_power_mw / (cfg.cone_solid_angle_sr() * dist * dist);
  return flux * cell_area_cm2;
}

std::pair<double, double> node_surface_position_cm(Coord c,
                                                   const GridTopology& topo,
                                                   const SceneConfig& cfg) {
  if (!topo.in_bounds(c)) {
    throw std::out_of_range("node_surface_position: cell " + to_string(c) +
                            " outside the grid");
  }
  const double y = (c.j + 0.5) * cfg.y_max_cm / topo.n_cols;
  const double z = (c.i + 0.5) * cfg.z_max_cm / topo.n_rows;
  return {y, z};
}

double cell_area_cm2(const GridTopology& topo, const SceneConfig& cfg) {
  return (cfg.y_max_cm / topo.n_cols) * (cfg.z_max_cm / topo.n_rows);
}

}  // namespace hypercp
