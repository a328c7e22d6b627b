#pragma once

#include <Eigen/Dense>
#include <Eigen/Geometry>

namespace cvf {

using Vec3 = Eigen::Vector3d;
using Quat = Eigen::Quaterniond;
using Mat3 = Eigen::Matrix3d;

/// Rigid body pose: unit quaternion + translation.
struct Pose {
    Quat rotation{Quat::Identity()};
    Vec3 translation{Vec3::Zero()};

    Pose() = default;
    Pose(const Quat& q, const Vec3& t) : rotation(q.normalized()), translation(t) {}

    static Pose identity() { return {}; }

    static Pose from_translation(const Vec3& t) { return {Quat::Identity(), t}; }

    static Pose from_axis_angle(const Vec3& axis, double angle, const Vec3& t = Vec3::Zero()) {
        return {Quat(Eigen::AngleAxisd(angle, axis.normalized())), t};
    }

    Pose inverse() const {
        Quat qi = rotation.conjugate();
        return {qi, qi * (-translation)};
    }

    // Apply rhs then this.
    Pose operator*(const Pose& rhs) const {
        return {(rotation * rhs.rotation).normalized(), translation + rotation * rhs.translation};
    }

    Vec3 transform_point(const Vec3& p) const { return rotation * p + translation; }
    Vec3 rotate(const Vec3& v) const { return rotation * v; }

    Mat3 rotation_matrix() const { return rotation.toRotationMatrix(); }
};

inline Pose compose(const Pose& a, const Pose& b) { return a * b; }

/// Geodesic rotation distance in [0, pi].
inline double rotation_angle(const Quat& a, const Quat& b) {
    Quat rel = a.conjugate() * b;
    double w = std::abs(rel.w());
    double v = rel.vec().norm();
    return 2.0 * std::atan2(v, w);
}

inline double rotation_angle(const Pose& a, const Pose& b) {
    return rotation_angle(a.rotation, b.rotation);
}

inline double translation_distance(const Pose& a, const Pose& b) {
    return (a.translation - b.translation).norm();
}

inline bool approx_equal(const Pose& a, const Pose& b, double tol_p = 1e-9, double tol_r = 1e-9) {
    return translation_distance(a, b) <= tol_p && rotation_angle(a, b) <= tol_r;
}

}  // namespace cvf
