#pragma once

#include <vector>

#include "cvf/demo.hpp"
#include "cvf/manipulator.hpp"
#include "cvf/transfer.hpp"

namespace cvf {

struct PlanOptions {
    double max_step_p = 0.001;                  // m per interpolation step
    double max_step_r = 0.5 * M_PI / 180.0;     // rad per interpolation step
    double converge_p = 0.0005;                 // m, per-target convergence
    double converge_r = 0.5 * M_PI / 180.0;     // rad
    double path_tol_p = 0.002;                  // m, recorded deviation bound
    double path_tol_r = 1.0 * M_PI / 180.0;     // rad
    double start_tol_p = 0.005;                 // m
    double start_tol_r = 0.05;                  // rad
    int max_iterations = 100;                   // per interpolation target
    double lambda = 0.01;                       // DLS damping
    double sigma_min_gate = 1e-4;               // singularity monitor
    double max_joint_step = 0.2;                // rad/m, per-iteration clamp
    // Track positions only (for arms that cannot hold orientation, e.g. the
    // planar 2R); rotation convergence and deviation checks are skipped.
    bool position_only = false;
};

struct JointPathPoint {
    VecX config;
    Pose achieved;
    double deviation_p = 0.0;  // m, distance to the owning screw path
    double deviation_r = 0.0;  // rad
    GripperState gripper = GripperState::Open;
};

struct JointPath {
    std::vector<JointPathPoint> points;
    // points index at which each input waypoint is reached.
    std::vector<std::size_t> waypoint_indices;

    double max_deviation_p() const;
    double max_deviation_r() const;
};

/// Resolved-rate following of the piecewise constant-screw path through the
/// waypoints: ScLERP targets bounded by the step options, damped
/// pseudo-inverse updates until each target converges.
JointPath follow_screw_path(const ManipulatorModel& model, const VecX& theta0,
                            const std::vector<Pose>& waypoints, const PlanOptions& opts = {});

/// Same, with gripper state carried along each waypoint segment.
JointPath follow_screw_path(const ManipulatorModel& model, const VecX& theta0,
                            const std::vector<TransferredWaypoint>& waypoints,
                            const PlanOptions& opts = {});

/// Free-space ScLERP approach from FK(theta0) to the first transferred
/// waypoint, then the transferred sequence (including its bridge segment).
JointPath plan_task(const ManipulatorModel& model, const VecX& theta0,
                    const TransferredPath& path, const PlanOptions& opts = {});

}  // namespace cvf
