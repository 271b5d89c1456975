#include "osteonav/geometry.hpp"

#include <cmath>

#include <Eigen/SVD>

#include "osteonav/errors.hpp"

namespace osteonav {

bool Rotation3::is_valid(const Mat3& m, double tol) {
  if (!m.allFinite()) return false;
  const Mat3 gram = m.transpose() * m;
  if ((gram - Mat3::Identity()).cwiseAbs().maxCoeff() > tol) return false;
  return std::abs(m.determinant() - 1.0) <= tol;
}

Rotation3 Rotation3::from_matrix(const Mat3& m) {
  if (!is_valid(m)) throw InvalidArgument("matrix is not a proper rotation");
  return Rotation3(m);
}

Rotation3 Rotation3::nearest(const Mat3& m) {
  if (!m.allFinite()) throw InvalidArgument("rotation matrix has non-finite entries");
  Eigen::JacobiSVD<Mat3> svd(m, Eigen::ComputeFullU | Eigen::ComputeFullV);
  const Mat3& u = svd.matrixU();
  const Mat3& v = svd.matrixV();
  Mat3 d = Mat3::Identity();
  d(2, 2) = (u * v.transpose()).determinant() < 0.0 ? -1.0 : 1.0;
  return Rotation3(u * d * v.transpose());
}

Rotation3 Rotation3::from_quaternion(double w, double x, double y, double z) {
  Eigen::Quaterniond q(w, x, y, z);
  const double n = q.norm();
  if (!std::isfinite(n) || n == 0.0) throw InvalidArgument("quaternion must be finite and non-zero");
  q.coeffs() /= n;
  return Rotation3(q.toRotationMatrix());
}

Rotation3 Rotation3::about_axis(const Vec3& axis, double angle) {
  const double n = axis.norm();
  if (!(n > 0.0) || !std::isfinite(angle)) throw InvalidArgument("rotation axis must be non-zero");
  return Rotation3(Eigen::AngleAxisd(angle, axis / n).toRotationMatrix());
}

Rotation3 Rotation3::from_rotation_vector(const Vec3& v) {
  const double theta = v.norm();
  if (!std::isfinite(theta)) throw InvalidArgument("rotation vector must be finite");
  if (theta == 0.0) return Rotation3();
  return Rotation3(Eigen::AngleAxisd(theta, v / theta).toRotationMatrix());
}

std::array<double, 9> Rotation3::row_major() const {
  std::array<double, 9> out{};
  for (int r = 0; r < 3; ++r)
    for (int c = 0; c < 3; ++c) out[static_cast<std::size_t>(3 * r + c)] = m_(r, c);
  return out;
}

double Rotation3::angle() const {
  const Vec3 s(m_(2, 1) - m_(1, 2), m_(0, 2) - m_(2, 0), m_(1, 0) - m_(0, 1));
  const double sin_theta = 0.5 * s.norm();
  const double cos_theta = 0.5 * (m_.trace() - 1.0);
  return std::atan2(sin_theta, cos_theta);
}

Vec3 Rotation3::rotation_vector() const {
  const Eigen::AngleAxisd aa(m_);
  const double theta = angle();
  if (theta == 0.0) return Vec3::Zero();
  return aa.axis().normalized() * theta;
}

std::array<double, 4> Rotation3::quaternion() const {
  Eigen::Quaterniond q(m_);
  q.normalize();
  if (q.w() < 0.0) q.coeffs() = -q.coeffs();
  return {q.w(), q.x(), q.y(), q.z()};
}

RigidTransform RigidTransform::from_matrix(const Mat4& m) {
  if (!m.allFinite()) throw InvalidArgument("homogeneous matrix has non-finite entries");
  if (m(3, 0) != 0.0 || m(3, 1) != 0.0 || m(3, 2) != 0.0 || m(3, 3) != 1.0)
    throw InvalidArgument("homogeneous matrix bottom row must be (0, 0, 0, 1)");
  return {Rotation3::from_matrix(m.topLeftCorner<3, 3>()), m.topRightCorner<3, 1>()};
}

Mat4 RigidTransform::matrix() const {
  Mat4 m = Mat4::Identity();
  m.topLeftCorner<3, 3>() = rotation_.matrix();
  m.topRightCorner<3, 1>() = translation_;
  return m;
}

RigidTransform compose(const RigidTransform& a, const RigidTransform& b) {
  return {a.rotation() * b.rotation(), a.rotation().apply(b.translation()) + a.translation()};
}

RigidTransform invert(const RigidTransform& t) {
  const Rotation3 r_inv = t.rotation().inverse();
  return {r_inv, -r_inv.apply(t.translation())};
}

Vec3 transform_point(const RigidTransform& t, const Vec3& p) {
  return t.rotation().apply(p) + t.translation();
}

double rotation_angle_between(const Rotation3& a, const Rotation3& b) {
  return (a.inverse() * b).angle();
}

Rotation3 best_fit_rotation(std::span<const VectorPair> pairs, RankPolicy policy) {
  if (pairs.empty()) throw DegenerateConfiguration("best_fit_rotation: no vector pairs");
  Mat3 h = Mat3::Zero();
  for (const auto& p : pairs) {
    if (!p.from.allFinite() || !p.to.allFinite())
      throw InvalidArgument("best_fit_rotation: non-finite vector");
    h += p.from * p.to.transpose();
  }
  Eigen::JacobiSVD<Mat3> svd(h, Eigen::ComputeFullU | Eigen::ComputeFullV);
  const Vec3 s = svd.singularValues();
  if (!(s(0) > 0.0)) throw DegenerateConfiguration("best_fit_rotation: all vectors are zero");
  if (policy == RankPolicy::RequireFull && s(1) <= 1e-9 * s(0))
    throw DegenerateConfiguration("best_fit_rotation: vector pairs are collinear");

  const Mat3& u = svd.matrixU();
  const Mat3& v = svd.matrixV();
  Mat3 d = Mat3::Identity();
  d(2, 2) = (v * u.transpose()).determinant() < 0.0 ? -1.0 : 1.0;
  return Rotation3::nearest(v * d * u.transpose());
}

std::string_view to_string(FrameId f) {
  switch (f) {
    case FrameId::S: return "S";
    case FrameId::EE: return "EE";
    case FrameId::Tool: return "Tool";
    case FrameId::Tip: return "Tip";
    case FrameId::OT: return "OT";
    case FrameId::Digitizer: return "Digitizer";
    case FrameId::Phantom: return "Phantom";
  }
  return "?";
}

std::optional<FrameId> parse_frame_id(std::string_view label) {
  for (FrameId f : {FrameId::S, FrameId::EE, FrameId::Tool, FrameId::Tip, FrameId::OT,
                    FrameId::Digitizer, FrameId::Phantom}) {
    if (to_string(f) == label) return f;
  }
  return std::nullopt;
}

}  // namespace osteonav
