#pragma once

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace curio {

class ContractViolation : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

// Noise settings of the constant-velocity model (dt = 1 frame).
struct FilterParams {
  double q = 1.0;    // process noise, Q = q * I
  double r = 2.0;    // measurement noise, R = r * I (px^2)
  double p0 = 100.0; // initial covariance, P0 = p0 * I
};

// State [x, y, vx, vy] in pixels and pixels/frame.
struct FilterState {
  Eigen::Vector4d mean = Eigen::Vector4d::Zero();
  Eigen::Matrix4d covariance = Eigen::Matrix4d::Identity();

  Eigen::Vector2d position() const { return mean.head<2>(); }
  Eigen::Vector2d velocity() const { return mean.tail<2>(); }
};

namespace kf {

inline Eigen::Matrix4d transition() {
  Eigen::Matrix4d f = Eigen::Matrix4d::Identity();
  f(0, 2) = 1.0;
  f(1, 3) = 1.0;
  return f;
}

inline Eigen::Matrix<double, 2, 4> observation() {
  Eigen::Matrix<double, 2, 4> h = Eigen::Matrix<double, 2, 4>::Zero();
  h(0, 0) = 1.0;
  h(1, 1) = 1.0;
  return h;
}

inline constexpr double kSymmetryTol = 1e-9;

}  // namespace kf

// Throws ContractViolation unless the covariance is symmetric (1e-9, scaled by
// magnitude), has a non-negative diagonal and no negative eigenvalue.
inline void check_covariance(const Eigen::Matrix4d& p) {
  if (!p.allFinite()) throw ContractViolation("covariance has non-finite entries");
  const double scale = std::max(1.0, p.cwiseAbs().maxCoeff());
  if ((p - p.transpose()).cwiseAbs().maxCoeff() > kf::kSymmetryTol * scale) {
    throw ContractViolation("covariance is not symmetric");
  }
  if ((p.diagonal().array() < 0.0).any()) throw ContractViolation("covariance has negative diagonal");
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix4d> eig(p, Eigen::EigenvaluesOnly);
  if (eig.eigenvalues().minCoeff() < -kf::kSymmetryTol * scale) {
    throw ContractViolation("covariance is not positive semi-definite");
  }
}

inline FilterState initial_state(const Eigen::Vector2d& position, const FilterParams& params) {
  FilterState s;
  s.mean << position.x(), position.y(), 0.0, 0.0;
  s.covariance = params.p0 * Eigen::Matrix4d::Identity();
  return s;
}

inline FilterState predict_step(const FilterState& s, const FilterParams& params) {
  check_covariance(s.covariance);
  const Eigen::Matrix4d f = kf::transition();
  FilterState out;
  out.mean = f * s.mean;
  out.covariance = f * s.covariance * f.transpose() + params.q * Eigen::Matrix4d::Identity();
  out.covariance = 0.5 * (out.covariance + out.covariance.transpose()).eval();
  return out;
}

// Joseph-form update; keeps the covariance symmetric PSD.
inline FilterState update_step(const FilterState& s, const Eigen::Vector2d& measurement,
                               const FilterParams& params) {
  check_covariance(s.covariance);
  const auto h = kf::observation();
  const Eigen::Matrix2d r = params.r * Eigen::Matrix2d::Identity();
  const Eigen::Vector2d innovation = measurement - h * s.mean;
  const Eigen::Matrix2d innov_cov = h * s.covariance * h.transpose() + r;
  const Eigen::Matrix<double, 4, 2> gain =
      s.covariance * h.transpose() * innov_cov.ldlt().solve(Eigen::Matrix2d::Identity());

  FilterState out;
  out.mean = s.mean + gain * innovation;
  const Eigen::Matrix4d ikh = Eigen::Matrix4d::Identity() - gain * h;
  out.covariance = ikh * s.covariance * ikh.transpose() + gain * r * gain.transpose();
  out.covariance = 0.5 * (out.covariance + out.covariance.transpose()).eval();
  return out;
}

}  // namespace curio
