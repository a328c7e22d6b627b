#pragma once

#include <string>
#include <vector>

#include "cvf/pose.hpp"

namespace cvf {

/// Right-handed frame with the given z-axis; y is pulled toward world +y so
/// the frame is canonical for near-horizontal axes (slot "out" directions).
Mat3 frame_from_axis(const Vec3& z_axis);

/// Grow panel: vertical growing tubes with cylindrical planting slots (cups)
/// drilled into the side facing the robot. A slot's frame sits at the cup
/// center (mid-depth), z pointing out of the cup toward the robot, tilted up
/// from the horizontal by axis_angle.
struct GrowPanel {
    struct Tube {
        Pose pose;              // tube axis = frame z, origin at mid-length
        double length = 0.0;    // m
        double outer_diameter = 0.0;  // m
    };

    struct Slot {
        Pose center;            // cup mid-depth frame, z = out direction
        double diameter = 0.0;  // cup bore, m
        double axis_angle = 0.0;  // slot axis vs horizontal, rad
        double depth = 0.0;     // cup depth along its axis, m
        int tube = 0;           // parent tube index
        std::string id;

        Vec3 out_axis() const { return center.rotation_matrix().col(2); }
        Vec3 opening_center() const {
            return center.translation + 0.5 * depth * out_axis();
        }
        Vec3 bottom_center() const {
            return center.translation - 0.5 * depth * out_axis();
        }
    };

    std::vector<Tube> tubes;
    std::vector<Slot> slots;
    double inter_slot_spacing = 0.0;  // along a tube, m
    double inter_tube_spacing = 0.0;  // between tube axes, m

    const Slot& slot(const std::string& id) const;
    int slot_index(const std::string& id) const;

    /// Throws StagedError("panel") on an invariant violation.
    void validate() const;
};

/// Sapling pod: square cross-section block held from the top. The pod frame
/// sits at the top center with z running toward the tip, and coincides with
/// the gripper tool frame when grasped (grasp_frame = identity by default).
struct SaplingPod {
    double side = 0.015;   // widest square cross-section, m
    double height = 0.06;  // top to tip, m
    Pose grasp_frame;      // tool frame relative to the pod frame

    double half_diagonal() const { return side * M_SQRT1_2; }
};

/// Bundled three-tube panel: distinct tube specs, three slots each, both
/// 30 mm and 35 mm slot bores, all cups facing the robot (-x side).
GrowPanel bundled_panel();

}  // namespace cvf
