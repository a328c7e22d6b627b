#pragma once

#include <string>
#include <vector>

#include <Eigen/Dense>

#include "cvf/pose.hpp"

namespace cvf {

using VecX = Eigen::VectorXd;
using Jacobian = Eigen::Matrix<double, 6, Eigen::Dynamic>;

/// Serial-chain description: joint screw axes at the zero configuration plus
/// the home pose of the end effector.
struct ManipulatorModel {
    struct Joint {
        enum class Type { Revolute, Prismatic };
        Type type = Type::Revolute;
        Vec3 axis = Vec3::UnitZ();   // unit direction
        Vec3 point = Vec3::Zero();   // a point on the axis (unused for prismatic)
        double min = -3.1, max = 3.1;  // radians or meters
    };

    std::vector<Joint> joints;
    Pose home;  // end-effector pose at the zero configuration
    std::string name;

    int dof() const { return static_cast<int>(joints.size()); }
    void validate() const;

    bool within_limits(const VecX& theta) const;
    VecX clamp_to_limits(const VecX& theta) const;
};

/// Product-of-exponentials forward kinematics.
Pose forward_kinematics(const ManipulatorModel& model, const VecX& theta);

/// Geometric Jacobian, spatial twist convention: rows 0..2 angular, rows
/// 3..5 linear; column j is the current screw axis of joint j.
Jacobian jacobian(const ManipulatorModel& model, const VecX& theta);

/// Bundled planar 2R arm (1 m links along +x) for oracle tests.
ManipulatorModel planar_2r();

/// Bundled 7-DOF arm with roughly 0.9 m reach in front of the base.
ManipulatorModel arm_7dof();

}  // namespace cvf
