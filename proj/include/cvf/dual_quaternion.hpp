#pragma once

#include <cmath>
#include <stdexcept>

#include "cvf/pose.hpp"

namespace cvf {

/// Unit dual quaternion: real part encodes the rotation, dual part the
/// translation via qd = 0.5 * t ⊗ qr. Carrier for ScLERP.
struct UnitDualQuaternion {
    Quat real{Quat::Identity()};
    Quat dual{0.0, 0.0, 0.0, 0.0};

    static UnitDualQuaternion identity() { return {}; }

    UnitDualQuaternion operator*(const UnitDualQuaternion& rhs) const {
        UnitDualQuaternion out;
        out.real = real * rhs.real;
        Quat a = real * rhs.dual;
        Quat b = dual * rhs.real;
        out.dual = Quat(a.w() + b.w(), a.x() + b.x(), a.y() + b.y(), a.z() + b.z());
        return out;
    }

    UnitDualQuaternion conjugate() const {
        return {real.conjugate(), dual.conjugate()};
    }

    UnitDualQuaternion negated() const {
        return {Quat(-real.w(), -real.x(), -real.y(), -real.z()),
                Quat(-dual.w(), -dual.x(), -dual.y(), -dual.z())};
    }

    double real_norm() const { return real.norm(); }

    double real_dual_dot() const {
        return real.w() * dual.w() + real.vec().dot(dual.vec());
    }

    /// Re-impose unit norm and real/dual orthogonality.
    UnitDualQuaternion normalized() const {
        double n = real.norm();
        UnitDualQuaternion out;
        out.real = Quat(real.w() / n, real.x() / n, real.y() / n, real.z() / n);
        Quat d(dual.w() / n, dual.x() / n, dual.y() / n, dual.z() / n);
        double dot = out.real.w() * d.w() + out.real.vec().dot(d.vec());
        out.dual = Quat(d.w() - dot * out.real.w(), d.x() - dot * out.real.x(),
                        d.y() - dot * out.real.y(), d.z() - dot * out.real.z());
        return out;
    }

    /// Screw power Q^tau: scales the screw angle and translation while
    /// keeping axis and moment fixed.
    UnitDualQuaternion pow(double tau) const;
};

inline UnitDualQuaternion dq_from_pose(const Pose& p) {
    UnitDualQuaternion q;
    q.real = p.rotation.normalized();
    Quat t(0.0, p.translation.x(), p.translation.y(), p.translation.z());
    Quat d = t * q.real;
    q.dual = Quat(0.5 * d.w(), 0.5 * d.x(), 0.5 * d.y(), 0.5 * d.z());
    return q;
}

inline Pose pose_from_dq(const UnitDualQuaternion& q) {
    if (std::abs(q.real_norm() - 1.0) > 1e-6)
        throw std::invalid_argument("pose_from_dq: real part is not unit norm");
    Quat t2 = q.dual * q.real.conjugate();
    return Pose(q.real, 2.0 * t2.vec());
}

inline UnitDualQuaternion UnitDualQuaternion::pow(double tau) const {
    // Shortest-path branch: w >= 0.
    UnitDualQuaternion q = real.w() < 0.0 ? negated() : *this;

    double sin_half = q.real.vec().norm();
    double cos_half = q.real.w();
    double theta = 2.0 * std::atan2(sin_half, cos_half);

    if (sin_half < 1e-9) {
        // Pure translation (or identity): linear scaling of the translation.
        Pose p = pose_from_dq(q);
        return dq_from_pose(Pose(Quat::Identity(), tau * p.translation));
    }

    Vec3 axis = q.real.vec() / sin_half;
    double d = -2.0 * q.dual.w() / sin_half;
    Vec3 moment = (q.dual.vec() - 0.5 * d * cos_half * axis) / sin_half;

    double th2 = 0.5 * tau * theta;
    double d2 = tau * d;
    double s2 = std::sin(th2);
    double c2 = std::cos(th2);

    UnitDualQuaternion out;
    out.real = Quat(c2, s2 * axis.x(), s2 * axis.y(), s2 * axis.z());
    Vec3 dv = s2 * moment + 0.5 * d2 * c2 * axis;
    out.dual = Quat(-0.5 * d2 * s2, dv.x(), dv.y(), dv.z());
    return out;
}

/// Screw linear interpolation: the constant-screw geodesic from g1 to g2,
/// via dual quaternion power with shortest-path antipodal handling.
inline Pose sclerp(const Pose& g1, const Pose& g2, double tau) {
    UnitDualQuaternion q1 = dq_from_pose(g1);
    UnitDualQuaternion rel = q1.conjugate() * dq_from_pose(g2);
    return pose_from_dq(q1 * rel.pow(tau));
}

}  // namespace cvf
