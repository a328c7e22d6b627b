#include "cvf/manipulator.hpp"

#include <cmath>

#include "cvf/error.hpp"

namespace cvf {

void ManipulatorModel::validate() const {
    if (joints.empty()) throw StagedError("model", "manipulator needs at least one joint");
    for (std::size_t i = 0; i < joints.size(); ++i) {
        if (std::abs(joints[i].axis.norm() - 1.0) > 1e-9)
            throw StagedError("model", "joint " + std::to_string(i) + " axis is not unit");
        if (!(joints[i].min < joints[i].max))
            throw StagedError("model", "joint " + std::to_string(i) + " limits inverted");
    }
}

bool ManipulatorModel::within_limits(const VecX& theta) const {
    for (int i = 0; i < dof(); ++i)
        if (theta[i] < joints[i].min || theta[i] > joints[i].max) return false;
    return true;
}

VecX ManipulatorModel::clamp_to_limits(const VecX& theta) const {
    VecX out = theta;
    for (int i = 0; i < dof(); ++i) out[i] = std::clamp(out[i], joints[i].min, joints[i].max);
    return out;
}

namespace {

Pose joint_exp(const ManipulatorModel::Joint& j, double q) {
    if (j.type == ManipulatorModel::Joint::Type::Prismatic)
        return Pose::from_translation(q * j.axis);
    Mat3 R = Eigen::AngleAxisd(q, j.axis).toRotationMatrix();
    return Pose(Quat(R), (Mat3::Identity() - R) * j.point);
}

}  // namespace

Pose forward_kinematics(const ManipulatorModel& model, const VecX& theta) {
    if (theta.size() != model.dof())
        throw StagedError("fk", "configuration length does not match dof");
    Pose g = Pose::identity();
    for (int i = 0; i < model.dof(); ++i) g = g * joint_exp(model.joints[i], theta[i]);
    return g * model.home;
}

Jacobian jacobian(const ManipulatorModel& model, const VecX& theta) {
    if (theta.size() != model.dof())
        throw StagedError("jacobian", "configuration length does not match dof");
    Jacobian J(6, model.dof());
    Pose g = Pose::identity();  // product of the first j exponentials
    for (int j = 0; j < model.dof(); ++j) {
        const auto& joint = model.joints[j];
        Vec3 dir = g.rotate(joint.axis);
        if (joint.type == ManipulatorModel::Joint::Type::Prismatic) {
            J.col(j).head<3>().setZero();
            J.col(j).tail<3>() = dir;
        } else {
            Vec3 pt = g.transform_point(joint.point);
            J.col(j).head<3>() = dir;
            J.col(j).tail<3>() = pt.cross(dir);  // -dir x pt
        }
        g = g * joint_exp(joint, theta[j]);
    }
    return J;
}

ManipulatorModel planar_2r() {
    ManipulatorModel m;
    m.name = "planar_2r";
    ManipulatorModel::Joint j1, j2;
    j1.axis = Vec3::UnitZ();
    j1.point = Vec3::Zero();
    j1.min = -M_PI;
    j1.max = M_PI;
    j2.axis = Vec3::UnitZ();
    j2.point = Vec3(1.0, 0.0, 0.0);
    j2.min = -M_PI;
    j2.max = M_PI;
    m.joints = {j1, j2};
    m.home = Pose::from_translation(Vec3(2.0, 0.0, 0.0));
    return m;
}

ManipulatorModel arm_7dof() {
    ManipulatorModel m;
    m.name = "arm_7dof";
    const Vec3 shoulder(0.0, 0.0, 0.3);
    const Vec3 elbow(0.4, 0.0, 0.3);
    const Vec3 wrist(0.8, 0.0, 0.3);
    auto rev = [](const Vec3& axis, const Vec3& point, double lim) {
        ManipulatorModel::Joint j;
        j.axis = axis;
        j.point = point;
        j.min = -lim;
        j.max = lim;
        return j;
    };
    m.joints = {
        rev(Vec3::UnitZ(), Vec3::Zero(), 2.9),  // base pan
        rev(Vec3::UnitY(), shoulder, 2.2),      // shoulder pitch
        rev(Vec3::UnitX(), shoulder, 2.9),      // upper-arm roll
        rev(Vec3::UnitY(), elbow, 2.2),         // elbow
        rev(Vec3::UnitX(), elbow, 2.9),         // forearm roll
        rev(Vec3::UnitY(), wrist, 2.2),         // wrist pitch
        rev(Vec3::UnitX(), wrist, 2.9),         // wrist roll
    };
    // EE frame: z is the tool approach axis (+x of the arm at zero config).
    Mat3 R;
    R.col(0) = Vec3::UnitY();
    R.col(1) = Vec3::UnitZ();
    R.col(2) = Vec3::UnitX();
    m.home = Pose(Quat(R), Vec3(0.9, 0.0, 0.3));
    return m;
}

}  // namespace cvf
