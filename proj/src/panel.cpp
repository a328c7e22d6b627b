#include "cvf/panel.hpp"

#include <cmath>

#include "cvf/error.hpp"

namespace cvf {

Mat3 frame_from_axis(const Vec3& z_axis) {
    Vec3 z = z_axis.normalized();
    Vec3 y = Vec3::UnitY() - Vec3::UnitY().dot(z) * z;
    if (y.norm() < 1e-9) y = Vec3::UnitX() - Vec3::UnitX().dot(z) * z;  // z ~ +-y
    y.normalize();
    Vec3 x = y.cross(z);
    Mat3 R;
    R.col(0) = x;
    R.col(1) = y;
    R.col(2) = z;
    return R;
}

const GrowPanel::Slot& GrowPanel::slot(const std::string& id) const {
    int i = slot_index(id);
    if (i < 0) throw StagedError("panel", "unknown slot id: " + id);
    return slots[static_cast<std::size_t>(i)];
}

int GrowPanel::slot_index(const std::string& id) const {
    for (std::size_t i = 0; i < slots.size(); ++i)
        if (slots[i].id == id) return static_cast<int>(i);
    return -1;
}

void GrowPanel::validate() const {
    if (tubes.empty()) throw StagedError("panel", "no tubes");
    for (const auto& t : tubes)
        if (!(t.length > 0.0) || !(t.outer_diameter > 0.0))
            throw StagedError("panel", "tube dimensions must be positive");
    for (const auto& s : slots) {
        if (s.tube < 0 || s.tube >= static_cast<int>(tubes.size()))
            throw StagedError("panel", "slot " + s.id + " not attached to a tube");
        if (!(s.diameter > 0.0) || !(s.depth > 0.0))
            throw StagedError("panel", "slot " + s.id + " dimensions must be positive");
        if (inter_slot_spacing > 0.0 && !(inter_slot_spacing > s.diameter))
            throw StagedError("panel", "inter-slot spacing must exceed the slot diameter");
        // The whole cup must sit inside its tube.
        const Tube& t = tubes[static_cast<std::size_t>(s.tube)];
        Vec3 axis = t.pose.rotation_matrix().col(2);
        Vec3 rel = s.bottom_center() - t.pose.translation;
        double lateral = (rel - rel.dot(axis) * axis).norm();
        if (lateral + 0.5 * s.diameter > 0.5 * t.outer_diameter + 1e-9)
            throw StagedError("panel", "slot " + s.id + " cup exits its tube");
    }
}

GrowPanel bundled_panel() {
    GrowPanel p;
    p.inter_slot_spacing = 0.16;
    p.inter_tube_spacing = 0.20;

    // Three vertical tubes facing the robot, each with its own spec.
    struct TubeSpec {
        double x, y, diameter, slot_angle;
        double slot_diameters[3];
    };
    const TubeSpec specs[3] = {
        {0.62, -0.20, 0.090, 0.30, {0.030, 0.035, 0.030}},
        {0.64, 0.00, 0.100, 0.35, {0.035, 0.030, 0.035}},
        {0.66, 0.20, 0.095, 0.40, {0.030, 0.035, 0.030}},
    };

    for (int ti = 0; ti < 3; ++ti) {
        const TubeSpec& ts = specs[ti];
        GrowPanel::Tube tube;
        tube.pose = Pose(Quat::Identity(), Vec3(ts.x, ts.y, 0.30));
        tube.length = 0.50;
        tube.outer_diameter = ts.diameter;
        p.tubes.push_back(tube);

        for (int si = 0; si < 3; ++si) {
            GrowPanel::Slot s;
            s.diameter = ts.slot_diameters[si];
            s.axis_angle = ts.slot_angle;
            s.depth = 0.035;
            s.tube = ti;
            s.id = "t" + std::to_string(ti) + "s" + std::to_string(si);
            // Out direction: toward the robot (-x), tilted up by the angle.
            Vec3 out(-std::cos(ts.slot_angle), 0.0, std::sin(ts.slot_angle));
            double z = 0.14 + p.inter_slot_spacing * si;
            // Opening on the tube surface at the -x extreme.
            Vec3 open_center(ts.x - 0.5 * tube.outer_diameter, ts.y, z);
            Vec3 center = open_center - 0.5 * s.depth * out;
            s.center = Pose(Quat(frame_from_axis(out)), center);
            p.slots.push_back(s);
        }
    }
    p.validate();
    return p;
}

}  // namespace cvf
