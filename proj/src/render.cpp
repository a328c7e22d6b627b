#include "cvf/render.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "cvf/error.hpp"

namespace cvf {

namespace {

// Roots of |p + s*d - c|^2 = r^2 restricted to the plane normal to `axis`.
// Returns the number of real roots (0 or 2), smaller first.
int cylinder_roots(const Vec3& origin, const Vec3& dir, const Vec3& c, const Vec3& axis,
                   double r, double roots[2]) {
    Vec3 o = origin - c;
    Vec3 op = o - o.dot(axis) * axis;
    Vec3 dp = dir - dir.dot(axis) * axis;
    double a = dp.squaredNorm();
    double b = 2.0 * op.dot(dp);
    double cc = op.squaredNorm() - r * r;
    if (a < 1e-15) return 0;  // ray parallel to the axis
    double disc = b * b - 4.0 * a * cc;
    if (disc < 0.0) return 0;
    double sq = std::sqrt(disc);
    roots[0] = (-b - sq) / (2.0 * a);
    roots[1] = (-b + sq) / (2.0 * a);
    return 2;
}

// Is `p` inside the drill volume of a cup: within the bore radius, from the
// bottom plane outward (the drill continues through the tube wall).
bool in_drill(const GrowPanel::Slot& s, const Vec3& p) {
    Vec3 rel = p - s.center.translation;
    Vec3 z = s.out_axis();
    double axial = rel.dot(z);
    if (axial < -0.5 * s.depth - 1e-9) return false;
    double lateral = (rel - axial * z).norm();
    return lateral < 0.5 * s.diameter + 1e-9;
}

}  // namespace

std::optional<RayHit> raycast_panel(const GrowPanel& panel, const Vec3& origin, const Vec3& dir,
                                    double near_clip) {
    std::optional<RayHit> best;
    auto consider = [&](double s, int tube, int slot) {
        if (s <= near_clip) return;
        if (!best || s < best->depth) best = RayHit{s, tube, slot};
    };

    for (std::size_t ti = 0; ti < panel.tubes.size(); ++ti) {
        const auto& t = panel.tubes[ti];
        Vec3 axis = t.pose.rotation_matrix().col(2);
        double roots[2];
        int n = cylinder_roots(origin, dir, t.pose.translation, axis, 0.5 * t.outer_diameter,
                               roots);
        for (int i = 0; i < n; ++i) {
            double s = roots[i];
            if (s <= near_clip) continue;
            Vec3 p = origin + s * dir;
            if (std::abs((p - t.pose.translation).dot(axis)) > 0.5 * t.length) continue;
            bool holed = false;
            for (const auto& slot : panel.slots)
                if (slot.tube == static_cast<int>(ti) && in_drill(slot, p)) {
                    holed = true;
                    break;
                }
            if (!holed) consider(s, static_cast<int>(ti), -1);
        }
    }

    for (std::size_t si = 0; si < panel.slots.size(); ++si) {
        const auto& slot = panel.slots[si];
        Vec3 z = slot.out_axis();
        double roots[2];
        int n = cylinder_roots(origin, dir, slot.center.translation, z, 0.5 * slot.diameter,
                               roots);
        for (int i = 0; i < n; ++i) {  // cup lateral wall
            double s = roots[i];
            if (s <= near_clip) continue;
            Vec3 p = origin + s * dir;
            double axial = (p - slot.center.translation).dot(z);
            if (std::abs(axial) <= 0.5 * slot.depth) consider(s, -1, static_cast<int>(si));
        }
        double denom = dir.dot(z);  // cup bottom disc
        if (std::abs(denom) > 1e-12) {
            double s = (slot.bottom_center() - origin).dot(z) / denom;
            if (s > near_clip) {
                Vec3 p = origin + s * dir;
                if ((p - slot.bottom_center()).norm() <= 0.5 * slot.diameter)
                    consider(s, -1, static_cast<int>(si));
            }
        }
    }
    return best;
}

RenderResult render_depth(const GrowPanel& panel, const CameraModel& cam,
                          const RenderOptions& opts) {
    cam.validate();
    panel.validate();

    RenderResult out;
    out.depth.width = cam.width;
    out.depth.height = cam.height;
    out.depth.depth.assign(static_cast<std::size_t>(cam.width) * cam.height, 0.0);
    auto blank_mask = [&] {
        Mask m;
        m.width = cam.width;
        m.height = cam.height;
        m.data.assign(out.depth.depth.size(), 0);
        return m;
    };
    out.slot_masks.assign(panel.slots.size(), blank_mask());
    out.tube_masks.assign(panel.tubes.size(), blank_mask());

    Mat3 R = cam.extrinsics.rotation_matrix();
    Vec3 o = cam.extrinsics.translation;

    std::mt19937_64 rng(opts.seed);
    std::normal_distribution<double> gauss(0.0, 1.0);
    std::uniform_real_distribution<double> uni(0.0, 1.0);

    std::size_t hits = 0;
    for (int v = 0; v < cam.height; ++v) {
        for (int u = 0; u < cam.width; ++u) {
            // Unit-z camera ray through the pixel center: the ray parameter
            // is then exactly the optical-axis depth.
            Vec3 d = R * Vec3((u - cam.cx) / cam.fx, (v - cam.cy) / cam.fy, 1.0);
            auto hit = raycast_panel(panel, o, d, opts.near_clip);
            if (!hit) continue;
            ++hits;
            if (hit->slot >= 0) out.slot_masks[static_cast<std::size_t>(hit->slot)].set(u, v);
            int tube = hit->tube >= 0
                           ? hit->tube
                           : panel.slots[static_cast<std::size_t>(hit->slot)].tube;
            out.tube_masks[static_cast<std::size_t>(tube)].set(u, v);

            double z = hit->depth;
            if (opts.depth_sigma > 0.0) z += opts.depth_sigma * gauss(rng);
            if (opts.dropout > 0.0 && uni(rng) < opts.dropout) z = 0.0;
            out.depth.at(u, v) = std::max(z, 0.0);
        }
    }
    if (hits == 0) throw StagedError("render", "camera sees no part of the panel");
    return out;
}

double slot_surface_distance(const GrowPanel::Slot& slot, const Vec3& p) {
    Vec3 rel = p - slot.center.translation;
    Vec3 z = slot.out_axis();
    double axial = rel.dot(z);
    double lateral = (rel - axial * z).norm();
    double r = 0.5 * slot.diameter;
    double half = 0.5 * slot.depth;

    double beyond = std::max(std::abs(axial) - half, 0.0);
    double wall = std::hypot(beyond, lateral - r);
    double disc = std::hypot(axial + half, std::max(lateral - r, 0.0));
    return std::min(wall, disc);
}

Pose look_at(const Vec3& eye, const Vec3& target) {
    Vec3 z = (target - eye).normalized();
    Vec3 x = z.cross(Vec3::UnitZ());
    if (x.norm() < 1e-9) x = z.cross(Vec3::UnitY());
    x.normalize();
    Vec3 y = z.cross(x);
    Mat3 R;
    R.col(0) = x;
    R.col(1) = y;
    R.col(2) = z;
    return Pose(Quat(R), eye);
}

}  // namespace cvf
