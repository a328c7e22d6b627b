#pragma once

#include <cmath>
#include <limits>

#include "cvf/pose.hpp"

namespace cvf {

/// Finite screw displacement in Plücker form. The moment is taken about the
/// axis point nearest the origin, so moment ⟂ axis_direction always holds.
/// For a pure translation the magnitude is a length (meters) and the pitch is
/// infinite; otherwise the magnitude is the rotation angle in [0, pi].
struct ScrewDisplacement {
    enum class Kind { General, PureTranslation };

    Kind kind = Kind::General;
    Vec3 axis_direction = Vec3::UnitZ();
    Vec3 moment = Vec3::Zero();
    double pitch = 0.0;      // meters per radian; +inf for pure translation
    double magnitude = 0.0;  // radians (General) or meters (PureTranslation)
    bool degenerate = false;

    // Axis point nearest the origin.
    Vec3 axis_point() const { return axis_direction.cross(moment); }

    static constexpr double kRotationEps = 1e-8;   // rad, pure-translation gate
    static constexpr double kTranslationEps = 1e-9;  // m, degeneracy gate
};

/// Chasles decomposition of compose(inverse(g1), g2), expressed in the frame
/// of g1. The identity relative pose yields a degenerate screw with a
/// canonical axis.
inline ScrewDisplacement screw_from_poses(const Pose& g1, const Pose& g2) {
    Pose rel = g1.inverse() * g2;
    ScrewDisplacement s;

    Eigen::AngleAxisd aa(rel.rotation);
    double theta = aa.angle();  // in [0, pi]
    const Vec3& p = rel.translation;

    if (theta < ScrewDisplacement::kRotationEps) {
        double d = p.norm();
        if (d < ScrewDisplacement::kTranslationEps) {
            s.degenerate = true;
            return s;
        }
        s.kind = ScrewDisplacement::Kind::PureTranslation;
        s.axis_direction = p / d;
        s.moment = Vec3::Zero();
        s.pitch = std::numeric_limits<double>::infinity();
        s.magnitude = d;
        return s;
    }

    Vec3 omega = aa.axis();
    double d_along = p.dot(omega);
    Vec3 p_perp = p - d_along * omega;
    // Axis point nearest the origin: (I - R) r = p_perp with r ⟂ omega.
    Vec3 r = 0.5 * (p_perp + omega.cross(p_perp) / std::tan(theta / 2.0));

    s.kind = ScrewDisplacement::Kind::General;
    s.axis_direction = omega;
    s.moment = r.cross(omega);
    s.pitch = d_along / theta;
    s.magnitude = theta;
    return s;
}

/// Pose reached after traversing `fraction` of the screw's magnitude,
/// starting from g_start. The screw is interpreted in g_start's frame.
inline Pose apply_screw(const ScrewDisplacement& s, double fraction, const Pose& g_start) {
    if (s.degenerate) return g_start;

    Pose rel;
    if (s.kind == ScrewDisplacement::Kind::PureTranslation) {
        rel = Pose::from_translation(fraction * s.magnitude * s.axis_direction);
    } else {
        double th = fraction * s.magnitude;
        Mat3 R = Eigen::AngleAxisd(th, s.axis_direction).toRotationMatrix();
        Vec3 r = s.axis_point();
        rel.rotation = Quat(R);
        rel.translation = (Mat3::Identity() - R) * r + s.pitch * th * s.axis_direction;
    }
    return g_start * rel;
}

/// Re-express a screw in the frame displaced by g: direction rotates, the
/// axis point moves rigidly, pitch and magnitude are intrinsic.
inline ScrewDisplacement transform_screw(const ScrewDisplacement& s, const Pose& g) {
    if (s.degenerate) return s;
    ScrewDisplacement out = s;
    out.axis_direction = g.rotate(s.axis_direction);
    if (s.kind == ScrewDisplacement::Kind::General) {
        Vec3 r = g.transform_point(s.axis_point());
        out.moment = r.cross(out.axis_direction);
    }
    return out;
}

}  // namespace cvf
