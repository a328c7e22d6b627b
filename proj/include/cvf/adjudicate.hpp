#pragma once

#include <map>
#include <string>
#include <vector>

#include "cvf/panel.hpp"
#include "cvf/perception.hpp"
#include "cvf/planner.hpp"

namespace cvf {

enum class FailureMode {
    None,
    PartialInsertion,
    GripperSlotCollision,
    NeighborPlantSnag,
    Unreachable,
    PerceptionFailure,
};

std::string to_string(FailureMode m);
FailureMode failure_mode_from_string(const std::string& s);

struct TrialOutcome {
    TaskKind kind = TaskKind::Transplant;
    bool success = false;
    FailureMode mode = FailureMode::None;
    double insertion_depth = 0.0;        // m, pod tip below the cup opening
    double min_lateral_clearance = 0.0;  // m, worst swept clearance in the cup
    std::string slot_id;
    std::string detail;

    static TrialOutcome ok(TaskKind k, const std::string& slot);
    static TrialOutcome fail(TaskKind k, const std::string& slot, FailureMode m,
                             const std::string& detail);
};

/// Transplant-time slot state: the pose estimate that defined the task, and
/// the pod pose actually reached at release, which later harvests must grasp.
struct RegistryEntry {
    SlotPoseEstimate estimate;
    double timestamp = 0.0;
    bool occupied = false;
    Pose pod_pose;  // pod (== tool) frame at release
};

struct SlotRegistry {
    std::map<std::string, RegistryEntry> entries;

    bool occupied(const std::string& slot_id) const;
    /// Throws StagedError("registry") when the slot is not occupied.
    const RegistryEntry& lookup(const std::string& slot_id) const;
};

/// Foliage proxy for a neighbouring plant: a sphere in front of its slot.
struct FoliageSphere {
    Vec3 center{Vec3::Zero()};
    double radius = 0.0;
    std::string slot_id;
};

struct AdjudicationOptions {
    double insertion_threshold = 0.03;         // m, minimum pod tip depth
    double grasp_tol_p = 0.008;                // m
    double grasp_tol_r = 10.0 * M_PI / 180.0;  // rad
    double finger_offset = 0.0175;             // m, fingertip from the tool axis
    double finger_length = 0.012;              // m, fingertip below the tool origin
    double gripper_radius = 0.03;              // m, closed-gripper capsule radius
    double engage_radius = 0.03;               // m, lateral gate for in-cup checks
};

/// Purely geometric adjudication of an executed transplant: insertion depth,
/// swept pod clearance inside the cup, and gripper-finger collision with the
/// tube around the opening. Throws StagedError("adjudicate") on unknown slot.
TrialOutcome check_transplant(const JointPath& path, const GrowPanel& panel,
                              const SaplingPod& pod, const std::string& slot_id,
                              const AdjudicationOptions& opts = {});

/// Harvest adjudication against the registered transplant: grasp accuracy vs
/// the true pod pose, extraction clearance along the slot axis, and snags on
/// neighbour foliage spheres. Throws StagedError("adjudicate"/"registry") on
/// unknown or unoccupied slots.
TrialOutcome check_harvest(const JointPath& path, const GrowPanel& panel, const SaplingPod& pod,
                           const SlotRegistry& registry, const std::string& slot_id,
                           const std::vector<FoliageSphere>& foliage,
                           const AdjudicationOptions& opts = {});

}  // namespace cvf
