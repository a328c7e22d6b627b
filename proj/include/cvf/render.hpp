#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "cvf/panel.hpp"
#include "cvf/perception.hpp"

namespace cvf {

struct RenderOptions {
    double depth_sigma = 0.002;  // m, Gaussian noise on valid depths
    double dropout = 0.01;       // fraction of valid pixels zeroed (speckle)
    std::uint64_t seed = 0;      // noise stream
    double near_clip = 0.05;     // m
};

struct RenderResult {
    DepthImage depth;
    // Ground truth from primitive ids: one mask per slot (cup surfaces) and
    // one per tube (tube surface plus its own cups), index-aligned.
    std::vector<Mask> slot_masks;
    std::vector<Mask> tube_masks;
};

struct RayHit {
    double depth = 0.0;  // ray parameter for a unit-z-scaled direction
    int tube = -1;       // hit tube index, or
    int slot = -1;       // hit slot index (cup wall or bottom)
};

/// First panel surface along origin + s*dir for s > near; cups are holes in
/// their tube surface. Returns nullopt on a miss.
std::optional<RayHit> raycast_panel(const GrowPanel& panel, const Vec3& origin, const Vec3& dir,
                                    double near_clip = 0.0);

/// Ray-cast depth image of the panel with per-primitive ground-truth masks.
/// Depth is measured along the optical axis; noise and dropout are applied
/// to the depth only, never to the masks. Throws StagedError("render") when
/// nothing is visible.
RenderResult render_depth(const GrowPanel& panel, const CameraModel& cam,
                          const RenderOptions& opts = {});

/// Distance from a point to the analytic cup surface (lateral wall + bottom
/// disc) of a slot; the oracle shared by the perception tests.
double slot_surface_distance(const GrowPanel::Slot& slot, const Vec3& p);

/// Camera pose looking at `target` from `eye` (optical axis = z toward the
/// target, image x pulled toward the world horizontal).
Pose look_at(const Vec3& eye, const Vec3& target);

}  // namespace cvf
