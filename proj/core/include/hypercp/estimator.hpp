#pragma once

#include <cstddef>
#include <optional>
#include <vector>

#include "hypercp/grid.hpp"
#include "hypercp/scene.hpp"

namespace hypercp {

/// One delivered sensor reading as seen by the external server.
struct Reading {
  Coord origin{};
  double y_cm = 0.0;
  double z_cm = 0.0;
  double power_mw = 0.0;
  double sensed_at_s = 0.0;
  double delivered_at_s = 0.0;
};

struct Estimate {
  double impact_y_cm = 0.0;
  double impact_z_cm = 0.0;
  Vec3 direction{-1.0, 0.0, 0.0};
  bool valid = false;
  bool from_section_fit = false;  ///< tilt came from a conic-section inversion
};

/// General-conic least-squares fit (unit coefficient norm) reduced to
/// ellipse geometry. Residual is the RMS algebraic residual on
/// centroid-centered, RMS-scaled coordinates.
struct ConicFit {
  bool is_ellipse = false;
  double center_y_cm = 0.0;
  double center_z_cm = 0.0;
  double semi_major_cm = 0.0;
  double semi_minor_cm = 0.0;
  double major_dir_y = 1.0;  ///< unit in-plane direction of the major axis
  double major_dir_z = 0.0;
  double rms_residual = 0.0;
  bool degenerate = false;
};

ConicFit fit_conic(const std::vector<Reading>& readings);

/// Minimum readings before any estimate is considered valid (conic DOF).
inline constexpr int kMinReadingsForEstimate = 6;
/// Section inversion needs enough points for the residual to be meaningful.
inline constexpr int kMinPointsForSection = 12;
/// Clouds that do not lie on a conic have residuals >= ~1e-1; exact
/// sections sit at float noise. Anywhere between separates the two.
inline constexpr double kSectionResidualGate = 1e-6;

/// Unweighted mean of the reading positions. Requires a non-empty window.
std::pair<double, double> estimate_impact_point(
    const std::vector<Reading>& readings);

/// Incident-direction estimate. When the window lies on a conic section
/// (gated by point count and fit residual) the cone axis is inverted from
/// the ellipse shape and the known opening angle; the lean sign along the
/// major axis comes from the power asymmetry (apex side is brighter).
/// Otherwise falls back to the surface normal through the window centroid.
Vec3 estimate_direction(const std::vector<Reading>& readings,
                        const SceneConfig& scene);

/// Angle between two unit vectors, degrees in [0, 180].
/// Throws std::invalid_argument on zero vectors.
double direction_error_deg(Vec3 estimated, Vec3 truth);

/// Euclidean distance |P - P'| on the surface plane, cm.
double offset_error_cm(double est_y, double est_z, double true_y,
                       double true_z);

/// Sliding window of the most recent readings: at most one entry per origin
/// node (newest sensed_at wins), capped to the window capacity by evicting
/// the oldest delivered_at.
class ServerEstimator {
 public:
  explicit ServerEstimator(SceneConfig scene, int window_capacity = 50);

  void add_reading(const Reading& r);
  /// Current estimate; recomputed lazily after window changes.
  const Estimate& estimate() const;
  int window_size() const { return static_cast<int>(window_.size()); }
  std::vector<Reading> window_snapshot() const;

 private:
  void recompute() const;

  SceneConfig scene_;
  int capacity_;
  std::vector<Reading> window_;  // unordered; one entry per origin
  mutable Estimate estimate_{};
  mutable bool dirty_ = false;
};

}  // namespace hypercp
