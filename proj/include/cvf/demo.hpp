#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "cvf/path_fit.hpp"
#include "cvf/pose.hpp"
#include "cvf/screw.hpp"

namespace cvf {

enum class GripperState { Open, Closed };

/// A recorded end-effector demonstration: poses in the robot base frame with
/// timestamps and per-sample gripper state.
struct Demonstration {
    std::vector<Pose> poses;
    std::vector<double> timestamps;
    std::vector<GripperState> gripper;
    std::string id;

    std::size_t size() const { return poses.size(); }

    /// Throws StagedError("demo") on an invariant violation.
    void validate(double max_step_p = 0.1, double max_step_r = 0.5) const;
};

struct ScrewSegment {
    ScrewDisplacement screw;
    Pose start_pose;
    GripperState gripper;  // state held while traversing the segment
};

/// Breakpoint subsequence of a demonstration with per-segment constant
/// screws. Segment i spans breakpoint_indices[i] .. breakpoint_indices[i+1].
struct ScrewSegmentSequence {
    std::vector<std::size_t> breakpoint_indices;  // 0-based into the demo
    std::vector<Pose> breakpoint_poses;
    std::vector<GripperState> breakpoint_gripper;
    std::vector<ScrewSegment> segments;
    std::string source_demo_id;

    std::size_t segment_count() const { return segments.size(); }
};

struct SegmentationOptions {
    double eps_position = 0.005;               // meters
    double eps_rotation = 3.0 * M_PI / 180.0;  // radians
    bool force_gripper_breakpoints = true;
};

/// Greedy longest-feasible-segment sweep: extends each segment while every
/// intermediate recorded pose stays within (eps_p, eps_R) of the candidate
/// constant-screw path. Gripper transitions force breakpoints.
ScrewSegmentSequence segment_demo(const Demonstration& d, const SegmentationOptions& opts = {});

/// Insert ScLERP-interpolated samples so consecutive steps respect the given
/// bounds; original poses are preserved as a subset.
Demonstration resample_demo(const Demonstration& d, double max_step_p, double max_step_r);

struct FitError {
    double max_position = 0.0;  // meters
    double max_rotation = 0.0;  // radians
};

/// Maxima over all intermediate samples of their distance to the owning
/// segment's screw path.
FitError segment_fit_error(const ScrewSegmentSequence& seq, const Demonstration& d);

}  // namespace cvf
