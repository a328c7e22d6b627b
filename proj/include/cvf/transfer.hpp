#pragma once

#include <map>
#include <string>
#include <vector>

#include "cvf/demo.hpp"
#include "cvf/pose.hpp"

namespace cvf {

enum class TaskKind { Transplant, Harvest };

std::string to_string(TaskKind k);
TaskKind task_kind_from_string(const std::string& s);

/// Task-relevant object poses. Transplant: {pod, slot}; harvest: {slot, tray}.
struct TaskInstance {
    TaskKind kind = TaskKind::Transplant;
    std::map<std::string, Pose> object_poses;

    // Object names in traversal order for this kind.
    static const std::vector<std::string>& roles(TaskKind k);

    const Pose& pose_of(const std::string& name) const;
    void validate() const;
};

/// Demonstration constraints re-expressed relative to the task objects,
/// ready for transfer to a new instance.
struct TransferableConstraint {
    struct Entry {
        Pose relative;               // g_o^-1 g_k
        ScrewDisplacement screw;     // outgoing segment screw, object frame
        bool has_screw = false;      // last entry of a subsequence has none
        GripperState gripper = GripperState::Open;
        std::size_t source_index = 0;  // breakpoint index in the demo
    };

    TaskKind kind = TaskKind::Transplant;
    std::vector<std::vector<Entry>> per_object;  // indexed like roles(kind)
    double roi_radius = 0.0;
    std::string source_demo_id;
};

struct TransferredWaypoint {
    Pose pose;
    GripperState gripper = GripperState::Open;
};

struct TransferredPath {
    std::vector<TransferredWaypoint> waypoints;
    // Index of the first waypoint of each object subsequence after the first;
    // the segment entering it is the free-space ScLERP bridge.
    std::vector<std::size_t> bridge_starts;
};

/// Select the breakpoints whose translations fall within `radius` of each
/// task object and store them relative to that object's frame. Subsequences
/// must be nonempty, contiguous, disjoint, and ordered per the object roles.
TransferableConstraint extract_roi(const ScrewSegmentSequence& seq, const TaskInstance& inst,
                                   double radius);

/// Left-multiply each stored relative pose by the new instance's object pose
/// and concatenate the subsequences in role order.
TransferredPath transfer(const TransferableConstraint& tc, const TaskInstance& new_inst);

struct ConstraintReport {
    struct SegmentInfo {
        std::string object;
        std::size_t source_index;
        std::string kind;         // "general" | "pure-translation" | "degenerate"
        Vec3 axis_direction;
        Vec3 axis_point;
        double pitch;
        double magnitude;
    };
    TaskKind kind = TaskKind::Transplant;
    double roi_radius = 0.0;
    std::vector<SegmentInfo> segments;
};

/// Per-segment screw parameters relative to each object frame.
ConstraintReport constraint_report(const TransferableConstraint& tc);

}  // namespace cvf
