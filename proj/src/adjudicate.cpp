#include "cvf/adjudicate.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>

#include "cvf/error.hpp"

namespace cvf {

std::string to_string(FailureMode m) {
    switch (m) {
        case FailureMode::None: return "none";
        case FailureMode::PartialInsertion: return "partial-insertion";
        case FailureMode::GripperSlotCollision: return "gripper-slot-collision";
        case FailureMode::NeighborPlantSnag: return "neighbor-plant-snag";
        case FailureMode::Unreachable: return "unreachable";
        case FailureMode::PerceptionFailure: return "perception-failure";
    }
    return "none";
}

FailureMode failure_mode_from_string(const std::string& s) {
    if (s == "none") return FailureMode::None;
    if (s == "partial-insertion") return FailureMode::PartialInsertion;
    if (s == "gripper-slot-collision") return FailureMode::GripperSlotCollision;
    if (s == "neighbor-plant-snag") return FailureMode::NeighborPlantSnag;
    if (s == "unreachable") return FailureMode::Unreachable;
    if (s == "perception-failure") return FailureMode::PerceptionFailure;
    throw StagedError("parse", "unknown failure mode: " + s);
}

TrialOutcome TrialOutcome::ok(TaskKind k, const std::string& slot) {
    TrialOutcome o;
    o.kind = k;
    o.success = true;
    o.mode = FailureMode::None;
    o.slot_id = slot;
    return o;
}

TrialOutcome TrialOutcome::fail(TaskKind k, const std::string& slot, FailureMode m,
                                const std::string& detail) {
    TrialOutcome o;
    o.kind = k;
    o.success = false;
    o.mode = m;
    o.slot_id = slot;
    o.detail = detail;
    return o;
}

bool SlotRegistry::occupied(const std::string& slot_id) const {
    auto it = entries.find(slot_id);
    return it != entries.end() && it->second.occupied;
}

const RegistryEntry& SlotRegistry::lookup(const std::string& slot_id) const {
    auto it = entries.find(slot_id);
    if (it == entries.end() || !it->second.occupied)
        throw StagedError("registry", "slot not occupied: " + slot_id);
    return it->second;
}

namespace {

// Axial coordinate above the cup opening (negative = inside) and lateral
// distance from the slot axis.
void slot_coords(const GrowPanel::Slot& slot, const Vec3& p, double& axial, double& lateral) {
    Vec3 z = slot.out_axis();
    Vec3 rel = p - slot.opening_center();
    axial = rel.dot(z);
    lateral = (rel - axial * z).norm();
}

bool in_any_drill(const GrowPanel& panel, const Vec3& p) {
    for (const auto& s : panel.slots) {
        Vec3 rel = p - s.center.translation;
        Vec3 z = s.out_axis();
        double axial = rel.dot(z);
        if (axial < -0.5 * s.depth) continue;
        if ((rel - axial * z).norm() < 0.5 * s.diameter) return true;
    }
    return false;
}

bool in_tube_solid(const GrowPanel& panel, const Vec3& p) {
    for (const auto& t : panel.tubes) {
        Vec3 axis = t.pose.rotation_matrix().col(2);
        Vec3 rel = p - t.pose.translation;
        double axial = rel.dot(axis);
        if (std::abs(axial) > 0.5 * t.length) continue;
        if ((rel - axial * axis).norm() < 0.5 * t.outer_diameter)
            return !in_any_drill(panel, p);
    }
    return false;
}

double point_segment_distance(const Vec3& p, const Vec3& a, const Vec3& b) {
    Vec3 ab = b - a;
    double t = ab.squaredNorm() < 1e-15 ? 0.0 : (p - a).dot(ab) / ab.squaredNorm();
    t = std::clamp(t, 0.0, 1.0);
    return (p - (a + t * ab)).norm();
}

Pose tool_to_pod(const SaplingPod& pod, const Pose& tool) {
    return tool * pod.grasp_frame.inverse();
}

// Points whose collision with the tube stock means the gripper hit the slot
// rim: the two fingertips.
std::array<Vec3, 2> fingertips(const Pose& tool, const AdjudicationOptions& opts) {
    return {tool.transform_point(Vec3(opts.finger_offset, 0, opts.finger_length)),
            tool.transform_point(Vec3(-opts.finger_offset, 0, opts.finger_length))};
}

std::size_t release_index(const JointPath& path) {
    for (std::size_t i = path.points.size(); i-- > 1;)
        if (path.points[i].gripper == GripperState::Open &&
            path.points[i - 1].gripper == GripperState::Closed)
            return i;
    return path.points.size() - 1;
}

}  // namespace

TrialOutcome check_transplant(const JointPath& path, const GrowPanel& panel,
                              const SaplingPod& pod, const std::string& slot_id,
                              const AdjudicationOptions& opts) {
    const GrowPanel::Slot& slot = panel.slot(slot_id);
    if (path.points.empty()) throw StagedError("adjudicate", "empty path");
    double slot_r = 0.5 * slot.diameter;
    double half_diag = pod.half_diagonal();

    double min_clear = std::numeric_limits<double>::infinity();
    TrialOutcome out = TrialOutcome::ok(TaskKind::Transplant, slot_id);

    for (const auto& pt : path.points) {
        const Pose& tool = pt.achieved;
        for (const Vec3& f : fingertips(tool, opts)) {
            if (in_tube_solid(panel, f)) {
                out = TrialOutcome::fail(TaskKind::Transplant, slot_id,
                                         FailureMode::GripperSlotCollision,
                                         "fingertip intersects the tube");
                break;
            }
        }
        if (!out.success) break;

        if (pt.gripper != GripperState::Closed) continue;
        Vec3 tip = tool_to_pod(pod, tool).transform_point(Vec3(0, 0, pod.height));
        double axial, lateral;
        slot_coords(slot, tip, axial, lateral);
        if (axial < 0.0 && lateral < opts.engage_radius) {
            double clear = slot_r - (lateral + half_diag);
            min_clear = std::min(min_clear, clear);
            if (clear < 0.0) {
                out = TrialOutcome::fail(TaskKind::Transplant, slot_id,
                                         FailureMode::PartialInsertion,
                                         "pod cross-section jammed in the cup");
                break;
            }
        }
    }

    const Pose& release = path.points[release_index(path)].achieved;
    Vec3 tip = tool_to_pod(pod, release).transform_point(Vec3(0, 0, pod.height));
    double axial, lateral;
    slot_coords(slot, tip, axial, lateral);
    double depth = std::max(-axial, 0.0);
    if (lateral > opts.engage_radius) depth = 0.0;  // released somewhere else

    out.insertion_depth = depth;
    out.min_lateral_clearance = std::isfinite(min_clear) ? min_clear : 0.0;
    if (out.success && depth < opts.insertion_threshold) {
        out = TrialOutcome::fail(TaskKind::Transplant, slot_id, FailureMode::PartialInsertion,
                                 "insertion depth below threshold");
        out.insertion_depth = depth;
        out.min_lateral_clearance = std::isfinite(min_clear) ? min_clear : 0.0;
    }
    return out;
}

TrialOutcome check_harvest(const JointPath& path, const GrowPanel& panel, const SaplingPod& pod,
                           const SlotRegistry& registry, const std::string& slot_id,
                           const std::vector<FoliageSphere>& foliage,
                           const AdjudicationOptions& opts) {
    const GrowPanel::Slot& slot = panel.slot(slot_id);
    const RegistryEntry& entry = registry.lookup(slot_id);
    if (path.points.empty()) throw StagedError("adjudicate", "empty path");

    std::size_t grasp = path.points.size();
    for (std::size_t i = 0; i < path.points.size(); ++i)
        if (path.points[i].gripper == GripperState::Closed) {
            grasp = i;
            break;
        }
    if (grasp == path.points.size()) throw StagedError("adjudicate", "path never grasps");

    // The tool frame at grasp must match the pod actually sitting in the
    // slot; the registered estimate defined both, so this catches drift.
    Pose true_tool = entry.pod_pose * pod.grasp_frame;
    const Pose& tool_g = path.points[grasp].achieved;
    TrialOutcome out = TrialOutcome::ok(TaskKind::Harvest, slot_id);
    if (translation_distance(tool_g, true_tool) > opts.grasp_tol_p ||
        rotation_angle(tool_g, true_tool) > opts.grasp_tol_r)
        out = TrialOutcome::fail(TaskKind::Harvest, slot_id, FailureMode::PerceptionFailure,
                                 "grasp pose misses the pod");

    double slot_r = 0.5 * slot.diameter;
    double half_diag = pod.half_diagonal();
    double min_clear = std::numeric_limits<double>::infinity();
    // From the grasp on, the pod rides rigidly where it actually sat, not
    // where the plan assumed it; extraction sweeps use that attachment.
    Pose attach = tool_g.inverse() * entry.pod_pose;
    {
        double axial, lateral;
        Vec3 tip = entry.pod_pose.transform_point(Vec3(0, 0, pod.height));
        slot_coords(slot, tip, axial, lateral);
        out.insertion_depth = std::max(-axial, 0.0);
    }

    for (std::size_t i = 0; out.success && i < path.points.size(); ++i) {
        const Pose& tool = path.points[i].achieved;
        for (const Vec3& f : fingertips(tool, opts))
            if (in_tube_solid(panel, f)) {
                out = TrialOutcome::fail(TaskKind::Harvest, slot_id,
                                         FailureMode::GripperSlotCollision,
                                         "fingertip intersects the tube");
                break;
            }
        if (!out.success || i < grasp) continue;

        Vec3 tip = (tool * attach).transform_point(Vec3(0, 0, pod.height));
        double axial, lateral;
        slot_coords(slot, tip, axial, lateral);
        if (axial < 0.0 && lateral < opts.engage_radius) {
            double clear = slot_r - (lateral + half_diag);
            min_clear = std::min(min_clear, clear);
            if (clear < 0.0) {
                out = TrialOutcome::fail(TaskKind::Harvest, slot_id,
                                         FailureMode::GripperSlotCollision,
                                         "pod jammed against the cup during extraction");
                break;
            }
        }
        if (axial < 0.05) {  // still extracting: check neighbour foliage
            for (const auto& fol : foliage) {
                if (point_segment_distance(fol.center, tool.translation, tip) <
                    fol.radius + opts.gripper_radius) {
                    out = TrialOutcome::fail(TaskKind::Harvest, slot_id,
                                             FailureMode::NeighborPlantSnag,
                                             "gripper sweep snags foliage at " + fol.slot_id);
                    break;
                }
            }
            if (!out.success) break;
        }
    }
    out.min_lateral_clearance = std::isfinite(min_clear) ? min_clear : 0.0;
    return out;
}

}  // namespace cvf
