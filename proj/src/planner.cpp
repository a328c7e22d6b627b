#include "cvf/planner.hpp"

#include <cmath>

#include "cvf/error.hpp"
#include "cvf/path_fit.hpp"

namespace cvf {

double JointPath::max_deviation_p() const {
    double m = 0.0;
    for (const auto& p : points) m = std::max(m, p.deviation_p);
    return m;
}

double JointPath::max_deviation_r() const {
    double m = 0.0;
    for (const auto& p : points) m = std::max(m, p.deviation_r);
    return m;
}

namespace {

// Error twist carrying `cur` to `target`, in the spatial frame (adjoint of
// the body-frame log).
Eigen::Matrix<double, 6, 1> error_twist(const Pose& cur, const Pose& target) {
    ScrewDisplacement s = screw_from_poses(cur, target);
    Vec3 w_b = Vec3::Zero(), v_b = Vec3::Zero();
    if (!s.degenerate) {
        if (s.kind == ScrewDisplacement::Kind::PureTranslation) {
            v_b = s.magnitude * s.axis_direction;
        } else {
            w_b = s.magnitude * s.axis_direction;
            v_b = s.magnitude * (s.moment + s.pitch * s.axis_direction);
        }
    }
    Vec3 w_s = cur.rotate(w_b);
    Vec3 v_s = cur.rotate(v_b) + cur.translation.cross(w_s);
    Eigen::Matrix<double, 6, 1> xi;
    xi << w_s, v_s;
    return xi;
}

struct Solver {
    const ManipulatorModel& model;
    const PlanOptions& opts;
    VecX theta;
    Pose current;

    Solver(const ManipulatorModel& m, const VecX& t0, const PlanOptions& o)
        : model(m), opts(o), theta(t0), current(forward_kinematics(m, t0)) {}

    void step_to(const Pose& target) {
        for (int it = 0; it < opts.max_iterations; ++it) {
            if (translation_distance(current, target) < opts.converge_p &&
                (opts.position_only || rotation_angle(current, target) < opts.converge_r))
                return;

            Jacobian Jfull = jacobian(model, theta);
            Eigen::MatrixXd J;
            Eigen::VectorXd xi;
            if (opts.position_only) {
                // End-effector point Jacobian: dp = v + w x p.
                J.resize(3, model.dof());
                for (int c = 0; c < model.dof(); ++c)
                    J.col(c) = Jfull.col(c).tail<3>() +
                               Jfull.col(c).head<3>().cross(current.translation);
                xi = target.translation - current.translation;
            } else {
                J = Jfull;
                xi = error_twist(current, target);
            }

            Eigen::JacobiSVD<Eigen::MatrixXd> svd(J);
            double sigma_min = svd.singularValues().tail<1>()(0);
            double lambda = opts.lambda;
            while (sigma_min < opts.sigma_min_gate && lambda < 1.0) lambda *= 10.0;
            if (lambda > 1.0) lambda = 1.0;

            Eigen::MatrixXd A = J * J.transpose();
            A.diagonal().array() += lambda * lambda;
            VecX dtheta = J.transpose() * A.ldlt().solve(xi);

            double mx = dtheta.cwiseAbs().maxCoeff();
            if (mx > opts.max_joint_step) dtheta *= opts.max_joint_step / mx;

            theta = model.clamp_to_limits(theta + dtheta);
            current = forward_kinematics(model, theta);
        }
        bool at_limit = false;
        for (int i = 0; i < model.dof(); ++i)
            at_limit |= theta[i] <= model.joints[i].min + 1e-9 ||
                        theta[i] >= model.joints[i].max - 1e-9;
        throw StagedError("plan", at_limit
                                      ? "joint limit reached without convergence"
                                      : "iteration cap exceeded (unreachable or singular)");
    }
};

}  // namespace

JointPath follow_screw_path(const ManipulatorModel& model, const VecX& theta0,
                            const std::vector<TransferredWaypoint>& waypoints,
                            const PlanOptions& opts) {
    model.validate();
    if (waypoints.empty()) throw StagedError("plan", "no waypoints");
    if (!model.within_limits(theta0)) throw StagedError("plan", "theta0 outside joint limits");

    Solver solver(model, theta0, opts);
    if (translation_distance(solver.current, waypoints[0].pose) > opts.start_tol_p ||
        rotation_angle(solver.current, waypoints[0].pose) > opts.start_tol_r)
        throw StagedError("plan", "start tolerance violated at the first waypoint");

    JointPath path;
    path.points.push_back({solver.theta, solver.current, 0.0, 0.0, waypoints[0].gripper});
    path.waypoint_indices.push_back(0);

    for (std::size_t k = 0; k + 1 < waypoints.size(); ++k) {
        const Pose& a = waypoints[k].pose;
        const Pose& b = waypoints[k + 1].pose;
        GripperState grip = waypoints[k].gripper;
        ScrewDisplacement s = screw_from_poses(a, b);
        double dp = translation_distance(a, b);
        double dr = rotation_angle(a, b);
        int steps = static_cast<int>(
            std::ceil(std::max(dp / opts.max_step_p, dr / opts.max_step_r) - 1e-9));
        if (steps < 1) steps = 1;
        for (int i = 1; i <= steps; ++i) {
            Pose target = apply_screw(s, static_cast<double>(i) / steps, a);
            solver.step_to(target);
            PathDeviation dev = deviation_from_screw(s, a, solver.current);
            if (dev.position > opts.path_tol_p ||
                (!opts.position_only && dev.rotation > opts.path_tol_r))
                throw StagedError("plan", "path deviation exceeds tolerance");
            path.points.push_back(
                {solver.theta, solver.current, dev.position, dev.rotation, grip});
        }
        path.points.back().gripper = waypoints[k + 1].gripper;
        path.waypoint_indices.push_back(path.points.size() - 1);
    }
    return path;
}

JointPath follow_screw_path(const ManipulatorModel& model, const VecX& theta0,
                            const std::vector<Pose>& waypoints, const PlanOptions& opts) {
    std::vector<TransferredWaypoint> wp;
    wp.reserve(waypoints.size());
    for (const auto& p : waypoints) wp.push_back({p, GripperState::Open});
    return follow_screw_path(model, theta0, wp, opts);
}

JointPath plan_task(const ManipulatorModel& model, const VecX& theta0,
                    const TransferredPath& path, const PlanOptions& opts) {
    if (path.waypoints.empty()) throw StagedError("plan", "empty transferred path");
    std::vector<TransferredWaypoint> wp;
    wp.reserve(path.waypoints.size() + 1);
    wp.push_back({forward_kinematics(model, theta0), path.waypoints.front().gripper});
    for (const auto& w : path.waypoints) wp.push_back(w);
    return follow_screw_path(model, theta0, wp, opts);
}

}  // namespace cvf
