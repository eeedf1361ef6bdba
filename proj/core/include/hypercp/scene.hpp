#pragma once

#include <utility>

#include "hypercp/grid.hpp"

namespace hypercp {

struct Vec3 {
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;
};

double dot(Vec3 a, Vec3 b);
double norm(Vec3 a);
Vec3 normalized(Vec3 a);

/// Moving point source shining a uniform cone onto the surface plane x = 0.
/// The cone axis is perpendicular to the plane (direction -x); the source
/// travels the segment start->end at constant speed, then stays at the end.
struct SceneConfig {
  double y_max_cm = 500.0;
  double z_max_cm = 500.0;
  Vec3 source_start_cm{500.0, 0.0, 500.0};
  Vec3 source_end_cm{500.0, 500.0, 0.0};
  double speed_cm_per_s = 5.0;
  double cone_opening_deg = 10.0;  ///< full opening angle
  double tx_power_mw = 100.0;

  double cone_half_angle_rad() const;
  /// Solid angle of the emission cone: 2*pi*(1 - cos(half angle)).
  double cone_solid_angle_sr() const;
  /// Time to traverse the configured path; 0 for a static source.
  double traversal_time_s() const;
};

struct GroundTruth {
  double impact_y_cm = 0.0;
  double impact_z_cm = 0.0;
  Vec3 incident_direction{-1.0, 0.0, 0.0};
};

/// Source position at time t (clamped to the end point past arrival).
Vec3 source_position(double t_s, const SceneConfig& cfg);

/// True impact point and incident direction at time t. With the cone axis
/// normal to the surface, the impact point is the source's (y, z).
GroundTruth ground_truth(double t_s, const SceneConfig& cfg);

/// Power impinging on a node aperture of cell_area_cm2 centered at
/// (node_y, node_z): tx_power / (solid_angle * r^2) * cell_area inside the
/// cone, 0 outside. Throws std::invalid_argument when the node coincides
/// with the source.
double impinging_power_mw(double node_y_cm, double node_z_cm, double t_s,
                          const SceneConfig& cfg, double cell_area_cm2);

/// Cell-centered mapping of the grid onto the surface:
/// y = (j + 0.5) * y_max / n_cols, z = (i + 0.5) * z_max / n_rows.
std::pair<double, double> node_surface_position_cm(Coord c,
                                                   const GridTopology& topo,
                                                   const SceneConfig& cfg);

/// Area of one grid cell on the surface, cm^2.
double cell_area_cm2(const GridTopology& topo, const SceneConfig& cfg);

}  // namespace hypercp
