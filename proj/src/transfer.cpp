#include "cvf/transfer.hpp"

#include <algorithm>

#include "cvf/error.hpp"

namespace cvf {

std::string to_string(TaskKind k) {
    return k == TaskKind::Transplant ? "transplant" : "harvest";
}

TaskKind task_kind_from_string(const std::string& s) {
    if (s == "transplant") return TaskKind::Transplant;
    if (s == "harvest") return TaskKind::Harvest;
    throw StagedError("instance", "unknown task kind '" + s + "'");
}

const std::vector<std::string>& TaskInstance::roles(TaskKind k) {
    static const std::vector<std::string> transplant{"pod", "slot"};
    static const std::vector<std::string> harvest{"slot", "tray"};
    return k == TaskKind::Transplant ? transplant : harvest;
}

const Pose& TaskInstance::pose_of(const std::string& name) const {
    auto it = object_poses.find(name);
    if (it == object_poses.end())
        throw StagedError("instance", "missing object pose '" + name + "'");
    return it->second;
}

void TaskInstance::validate() const {
    const auto& r = roles(kind);
    if (object_poses.size() != r.size())
        throw StagedError("instance", "expected exactly " + std::to_string(r.size()) +
                                          " object poses");
    for (const auto& name : r) pose_of(name);
}

TransferableConstraint extract_roi(const ScrewSegmentSequence& seq, const TaskInstance& inst,
                                   double radius) {
    if (!(radius > 0.0)) throw StagedError("roi", "radius must be positive");
    inst.validate();

    const auto& names = TaskInstance::roles(inst.kind);
    const std::size_t nb = seq.breakpoint_poses.size();

    TransferableConstraint tc;
    tc.kind = inst.kind;
    tc.roi_radius = radius;
    tc.source_demo_id = seq.source_demo_id;
    tc.per_object.resize(names.size());

    std::vector<std::vector<std::size_t>> member(names.size());
    for (std::size_t o = 0; o < names.size(); ++o) {
        const Vec3 center = inst.pose_of(names[o]).translation;
        for (std::size_t b = 0; b < nb; ++b)
            if ((seq.breakpoint_poses[b].translation - center).norm() <= radius)
                member[o].push_back(b);
        if (member[o].empty())
            throw StagedError("roi", "empty subsequence for object '" + names[o] +
                                         "' (ROI too small)");
        for (std::size_t i = 1; i < member[o].size(); ++i)
            if (member[o][i] != member[o][i - 1] + 1)
                throw StagedError("roi", "subsequence for object '" + names[o] +
                                             "' is not contiguous");
    }
    for (std::size_t o = 1; o < names.size(); ++o) {
        if (member[o - 1].back() >= member[o].front())
            throw StagedError("roi", "overlapping subsequences (ROI too large or objects too "
                                     "close)");
    }

    for (std::size_t o = 0; o < names.size(); ++o) {
        const Pose g_o_inv = inst.pose_of(names[o]).inverse();
        for (std::size_t b : member[o]) {
            TransferableConstraint::Entry e;
            e.relative = g_o_inv * seq.breakpoint_poses[b];
            e.gripper = seq.breakpoint_gripper[b];
            e.source_index = seq.breakpoint_indices[b];
            bool last_in_sub = (b == member[o].back());
            if (!last_in_sub && b + 1 < nb) {
                // Segment screw re-expressed in the object frame.
                e.screw = transform_screw(seq.segments[b].screw, e.relative);
                e.has_screw = true;
            }
            tc.per_object[o].push_back(e);
        }
    }
    return tc;
}

TransferredPath transfer(const TransferableConstraint& tc, const TaskInstance& new_inst) {
    if (new_inst.kind != tc.kind) throw StagedError("transfer", "task kind mismatch");
    new_inst.validate();

    const auto& names = TaskInstance::roles(tc.kind);
    TransferredPath path;
    for (std::size_t o = 0; o < names.size(); ++o) {
        if (o > 0) path.bridge_starts.push_back(path.waypoints.size());
        const Pose& g_new = new_inst.pose_of(names[o]);
        for (const auto& e : tc.per_object[o])
            path.waypoints.push_back({g_new * e.relative, e.gripper});
    }
    return path;
}

ConstraintReport constraint_report(const TransferableConstraint& tc) {
    const auto& names = TaskInstance::roles(tc.kind);
    ConstraintReport rep;
    rep.kind = tc.kind;
    rep.roi_radius = tc.roi_radius;
    for (std::size_t o = 0; o < tc.per_object.size(); ++o) {
        for (const auto& e : tc.per_object[o]) {
            if (!e.has_screw) continue;
            ConstraintReport::SegmentInfo info;
            info.object = names[o];
            info.source_index = e.source_index;
            if (e.screw.degenerate)
                info.kind = "degenerate";
            else if (e.screw.kind == ScrewDisplacement::Kind::PureTranslation)
                info.kind = "pure-translation";
            else
                info.kind = "general";
            info.axis_direction = e.screw.axis_direction;
            info.axis_point = e.screw.axis_point();
            info.pitch = e.screw.pitch;
            info.magnitude = e.screw.magnitude;
            rep.segments.push_back(info);
        }
    }
    return rep;
}

}  // namespace cvf
