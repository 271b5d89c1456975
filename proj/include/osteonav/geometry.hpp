#pragma once

// Rigid-body algebra shared by the calibration solvers and the metrics.
//
// Conventions (used everywhere in the library):
//   * Column vectors. A transform named `a_from_b` maps coordinates
//     expressed in frame b into frame a: p_a = R * p_b + t.
//   * compose(a_from_b, b_from_c) == a_from_c, i.e. the 4x4 homogeneous
//     product a_from_b * b_from_c. transform_point(compose(x, y), p) ==
//     transform_point(x, transform_point(y, p)).
//   * Millimetres, seconds and radians internally.

#include <array>
#include <optional>
#include <span>
#include <string>
#include <string_view>

#include <Eigen/Core>
#include <Eigen/Geometry>

namespace osteonav {

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;
using Mat4 = Eigen::Matrix4d;

inline constexpr double kPi = 3.14159265358979323846;
inline constexpr double deg_to_rad(double deg) { return deg * kPi / 180.0; }
inline constexpr double rad_to_deg(double rad) { return rad * 180.0 / kPi; }

/// Proper rotation stored as a direction-cosine matrix.
///
/// Instances only come from validated or projected input, so RᵀR = I and
/// det R = +1 hold to 1e-9. Products of valid rotations are not
/// re-orthonormalized.
class Rotation3 {
 public:
  static constexpr double kTolerance = 1e-9;

  Rotation3() : m_(Mat3::Identity()) {}

  static Rotation3 identity() { return {}; }
  /// Throws InvalidArgument unless `m` is already a proper rotation to kTolerance.
  static Rotation3 from_matrix(const Mat3& m);
  /// Nearest proper rotation in the Frobenius sense (SVD projection).
  static Rotation3 nearest(const Mat3& m);
  /// Throws InvalidArgument for a zero or non-finite quaternion; otherwise normalizes.
  static Rotation3 from_quaternion(double w, double x, double y, double z);
  static Rotation3 about_axis(const Vec3& axis, double angle);
  /// Exponential map: axis * angle.
  static Rotation3 from_rotation_vector(const Vec3& v);

  static bool is_valid(const Mat3& m, double tol = kTolerance);

  const Mat3& matrix() const { return m_; }
  double operator()(int row, int col) const { return m_(row, col); }
  std::array<double, 9> row_major() const;

  Rotation3 inverse() const { return Rotation3(m_.transpose()); }
  Vec3 apply(const Vec3& v) const { return m_ * v; }
  Rotation3 operator*(const Rotation3& rhs) const { return Rotation3(m_ * rhs.m_); }

  /// Rotation angle in [0, pi].
  double angle() const;
  /// Logarithm map, |v| = angle() in [0, pi].
  Vec3 rotation_vector() const;
  /// Unit quaternion (w, x, y, z) with w >= 0.
  std::array<double, 4> quaternion() const;

 private:
  explicit Rotation3(const Mat3& m) : m_(m) {}
  Mat3 m_;
};

/// Element of SE(3): rotation plus translation in millimetres.
class RigidTransform {
 public:
  RigidTransform() : translation_(Vec3::Zero()) {}
  RigidTransform(const Rotation3& r, const Vec3& t) : rotation_(r), translation_(t) {}

  static RigidTransform identity() { return {}; }
  static RigidTransform from_translation(const Vec3& t) { return {Rotation3{}, t}; }
  /// Validates the rotation block and the bottom row of a homogeneous matrix.
  static RigidTransform from_matrix(const Mat4& m);

  const Rotation3& rotation() const { return rotation_; }
  const Vec3& translation() const { return translation_; }
  Mat4 matrix() const;

 private:
  Rotation3 rotation_;
  Vec3 translation_;
};

RigidTransform compose(const RigidTransform& a, const RigidTransform& b);
RigidTransform invert(const RigidTransform& t);
Vec3 transform_point(const RigidTransform& t, const Vec3& p);

inline RigidTransform operator*(const RigidTransform& a, const RigidTransform& b) {
  return compose(a, b);
}

/// Geodesic distance on SO(3), in [0, pi].
double rotation_angle_between(const Rotation3& a, const Rotation3& b);

/// Correspondence for best_fit_rotation: find R with R * from ≈ to.
struct VectorPair {
  Vec3 from;
  Vec3 to;
};

enum class RankPolicy {
  /// Raise DegenerateConfiguration when the pairs span fewer than two directions.
  RequireFull,
  /// Return one member of the solution family for rank-one input.
  AllowDeficient,
};

/// Proper rotation minimizing sum |R * from_i - to_i|^2 (SVD / Kabsch).
Rotation3 best_fit_rotation(std::span<const VectorPair> pairs,
                            RankPolicy policy = RankPolicy::RequireFull);

// Frame labels used in pose logs.
enum class FrameId { S, EE, Tool, Tip, OT, Digitizer, Phantom };

std::string_view to_string(FrameId f);
/// Exact, case-sensitive match; nullopt for unknown labels.
std::optional<FrameId> parse_frame_id(std::string_view label);

}  // namespace osteonav
