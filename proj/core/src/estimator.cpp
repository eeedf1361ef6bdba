#include "hypercp/estimator.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace hypercp {

namespace {
constexpr double kDegPerRad = 180.0 / std::numbers::pi;
}

ConicFit fit_conic(const std::vector<Reading>& readings) {
  ConicFit fit;
  const int n = static_cast<int>(readings.size());
  if (n < kMinReadingsForEstimate) {
    fit.degenerate = true;
    return fit;
  }

  double cy = 0.0, cz = 0.0;
  for (const Reading& r : readings) {
    cy += r.y_cm;
    cz += r.z_cm;
  }
  cy /= n;
  cz /= n;
  double ms = 0.0;
  for (const Reading& r : readings) {
    const double dy = r.y_cm - cy, dz = r.z_cm - cz;
    ms += dy * dy + dz * dz;
  }
  const double scale = std::sqrt(ms / n);
  if (scale < 1e-9) {
    fit.degenerate = true;
    return fit;
  }

  Eigen::MatrixXd design(n, 6);
  for (int k = 0; k < n; ++k) {
    const double y = (readings[k].y_cm - cy) / scale;
    const double z = (readings[k].z_cm - cz) / scale;
    design(k, 0) = y * y;
    design(k, 1) = y * z;
    design(k, 2) = z * z;
    design(k, 3) = y;
    design(k, 4) = z;
    design(k, 5) = 1.0;
  }
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(design, Eigen::ComputeFullV);
  const Eigen::VectorXd coef = svd.matrixV().col(5);
  fit.rms_residual = (design * coef).norm() / std::sqrt(double(n));

  const double a = coef(0), b = coef(1), c = coef(2);
  const double d = coef(3), e = coef(4), f = coef(5);
  const double disc = b * b - 4.0 * a * c;
  if (disc >= 0.0) return fit;  // hyperbola / parabola / degenerate

  const double det = 4.0 * a * c - b * b;  // = -disc > 0
  const double ecy = (b * e - 2.0 * c * d) / det;
  const double ecz = (b * d - 2.0 * a * e) / det;
  const double f_centered =
      a * ecy * ecy + b * ecy * ecz + c * ecz * ecz + d * ecy + e * ecz + f;

  // Principal axes from the quadratic part.
  Eigen::Matrix2d quad;
  quad << a, b / 2.0, b / 2.0, c;
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> eig(quad);
  const Eigen::Vector2d lam = eig.eigenvalues();
  const double ax0 = -f_centered / lam(0);
  const double ax1 = -f_centered / lam(1);
  if (ax0 <= 0.0 || ax1 <= 0.0) return fit;

  int major_idx = ax0 >= ax1 ? 0 : 1;
  fit.is_ellipse = true;
  fit.semi_major_cm = std::sqrt(std::max(ax0, ax1)) * scale;
  fit.semi_minor_cm = std::sqrt(std::min(ax0, ax1)) * scale;
  fit.center_y_cm = ecy * scale + cy;
  fit.center_z_cm = ecz * scale + cz;
  Eigen::Vector2d u = eig.eigenvectors().col(major_idx);
  // Canonical orientation for determinism.
  if (u(0) < 0.0 || (u(0) == 0.0 && u(1) < 0.0)) u = -u;
  fit.major_dir_y = u(0);
  fit.major_dir_z = u(1);
  return fit;
}

std::pair<double, double> estimate_impact_point(
    const std::vector<Reading>& readings) {
  if (readings.empty()) {
    throw std::invalid_argument("estimate_impact_point: empty window");
  }
  double cy = 0.0, cz = 0.0;
  for (const Reading& r : readings) {
    cy += r.y_cm;
    cz += r.z_cm;
  }
  const double n = static_cast<double>(readings.size());
  return {cy / n, cz / n};
}

namespace {

Vec3 direction_impl(const std::vector<Reading>& readings,
                    const SceneConfig& scene, bool* used_section) {
  const int n = static_cast<int>(readings.size());
  if (n < kMinReadingsForEstimate) {
    throw std::invalid_argument("estimate_direction: window under-determined");
  }
  if (used_section) *used_section = false;
  const Vec3 fallback{-1.0, 0.0, 0.0};

  // The section->axis inversion is meaningful only for points lying on a
  // conic; scattered clouds fall back to the surface normal.
  if (n < kMinPointsForSection) return fallback;
  const ConicFit fit = fit_conic(readings);
  if (fit.degenerate || !fit.is_ellipse ||
      fit.rms_residual > kSectionResidualGate) {
    return fallback;
  }

  const double ratio = fit.semi_minor_cm / fit.semi_major_cm;
  const double ecc = std::sqrt(std::max(0.0, 1.0 - ratio * ratio));
  // A plane tilted by phi from the axis-normal cuts a cone of half-angle
  // alpha in an ellipse of eccentricity sin(phi)/cos(alpha).
  const double sin_tilt = ecc * std::cos(scene.cone_half_angle_rad());
  if (sin_tilt >= 1.0) return fallback;
  const double tilt = std::asin(sin_tilt);

  // Lean sign along the major axis: the apex side of the section receives
  // the higher flux (1/r^2), and the axis leans away from the apex side.
  double corr = 0.0;
  double mean_power = 0.0;
  for (const Reading& r : readings) mean_power += r.power_mw;
  mean_power /= n;
  for (const Reading& r : readings) {
    const double proj = (r.y_cm - fit.center_y_cm) * fit.major_dir_y +
                        (r.z_cm - fit.center_z_cm) * fit.major_dir_z;
    corr += proj * (r.power_mw - mean_power);
  }
  double sign;
  if (corr > 0.0) {
    sign = -1.0;
  } else if (corr < 0.0) {
    sign = 1.0;
  } else {
    sign = (fit.major_dir_y > 0.0 ||
            (fit.major_dir_y == 0.0 && fit.major_dir_z > 0.0))
               ? 1.0
               : -1.0;
  }

  const Vec3 axis{-std::cos(tilt), sign * std::sin(tilt) * fit.major_dir_y,
                  sign * std::sin(tilt) * fit.major_dir_z};
  if (used_section) *used_section = true;
  return normalized(axis);
}

}  // namespace

Vec3 estimate_direction(const std::vector<Reading>& readings,
                        const SceneConfig& scene) {
  return direction_impl(readings, scene, nullptr);
}

double direction_error_deg(Vec3 estimated, Vec3 truth) {
  const double ne = norm(estimated);
  const double nt = norm(truth);
  if (ne <= 0.0 || nt <= 0.0) {
    throw std::invalid_argument("direction_error: zero vector");
  }
  const double c = std::clamp(dot(estimated, truth) / (ne * nt), -1.0, 1.0);
  return std::acos(c) * kDegPerRad;
}

double offset_error_cm(double est_y, double est_z, double true_y,
                       double true_z) {
  return std::hypot(est_y - true_y, est_z - true_z);
}

ServerEstimator::ServerEstimator(SceneConfig scene, int window_capacity)
    : scene_(scene), capacity_(window_capacity) {
  window_.reserve(window_capacity + 1);
}

void ServerEstimator::add_reading(const Reading& r) {
  if (r.power_mw <= 0.0) {
    throw std::invalid_argument("add_reading: zero-power readings never reach"
                                " the server");
  }
  dirty_ = true;
  for (Reading& held : window_) {
    if (held.origin == r.origin) {
      // Keep the freshest measurement per sensor; a late-arriving staler
      // reading never overwrites a newer one.
      if (r.sensed_at_s >= held.sensed_at_s) held = r;
      return;
    }
  }
  window_.push_back(r);
  if (static_cast<int>(window_.size()) > capacity_) {
    auto oldest = window_.begin();
    for (auto it = window_.begin(); it != window_.end(); ++it) {
      if (it->delivered_at_s < oldest->delivered_at_s ||
          (it->delivered_at_s == oldest->delivered_at_s &&
           it->origin < oldest->origin)) {
        oldest = it;
      }
    }
    window_.erase(oldest);
  }
}

const Estimate& ServerEstimator::estimate() const {
  if (dirty_) recompute();
  return estimate_;
}

std::vector<Reading> ServerEstimator::window_snapshot() const {
  return window_;
}

void ServerEstimator::recompute() const {
  dirty_ = false;
  estimate_ = Estimate{};
  if (static_cast<int>(window_.size()) < kMinReadingsForEstimate) return;
  estimate_.valid = true;
  const auto [py, pz] = estimate_impact_point(window_);
  estimate_.impact_y_cm = py;
  estimate_.impact_z_cm = pz;
  bool used_section = false;
  estimate_.direction = direction_impl(window_, scene_, &used_section);
  estimate_.from_section_fit = used_section;
}

}  // namespace hypercp
