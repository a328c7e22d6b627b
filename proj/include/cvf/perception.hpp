#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "cvf/pose.hpp"

namespace cvf {

/// Pinhole camera: intrinsics in pixels, extrinsics as the camera pose in
/// the robot base frame. (u,v) address pixel centers.
struct CameraModel {
    double fx = 600.0, fy = 600.0;
    double cx = 320.0, cy = 240.0;
    int width = 640, height = 480;
    Pose extrinsics;  // camera in base frame

    void validate() const;
};

/// Depth in meters along the optical axis; 0 encodes invalid.
struct DepthImage {
    int width = 0, height = 0;
    std::vector<double> depth;

    double at(int u, int v) const { return depth[static_cast<std::size_t>(v) * width + u]; }
    double& at(int u, int v) { return depth[static_cast<std::size_t>(v) * width + u]; }
};

struct Mask {
    int width = 0, height = 0;
    std::vector<std::uint8_t> data;

    bool contains(int u, int v) const {
        return u >= 0 && v >= 0 && u < width && v < height &&
               data[static_cast<std::size_t>(v) * width + u] != 0;
    }
    void set(int u, int v) { data[static_cast<std::size_t>(v) * width + u] = 255; }
    std::size_t pixel_count() const;
};

struct PixelProjection {
    double u = 0.0, v = 0.0;
    double depth = 0.0;  // meters along the optical axis
    bool in_bounds = true;
};

/// Pinhole projection of a base-frame point. Throws StagedError("project")
/// for points at or behind the camera; out-of-bounds projections are
/// reported via the flag, not clamped.
PixelProjection project_point(const CameraModel& cam, const Vec3& point);

/// Back-project every masked pixel with valid depth into the base frame.
/// Throws StagedError("deproject") when nothing survives.
std::vector<Vec3> deproject_mask(const DepthImage& depth, const Mask& mask,
                                 const CameraModel& cam);

/// Among the masks containing the seed pixel, the one with the fewest
/// pixels (ties: lowest index). Throws StagedError("select_mask") if none.
const Mask& select_mask(const std::vector<Mask>& masks, double seed_u, double seed_v);

struct SlotPoseEstimate {
    Pose pose;            // bounding-box frame in the robot base frame
    Vec3 extents{Vec3::Zero()};  // full side lengths, box x/y/z order
    int point_count = 0;
    double residual = 0.0;  // RMS point-to-box-surface distance
    bool degenerate = false;
};

struct BoxFitOptions {
    int min_points = 50;
    double extent_floor = 0.001;  // meters
    bool reject_outliers = true;
    int knn = 8;
    double outlier_sigma = 2.0;
    // Box z-axis: principal direction most aligned with this prior, sign
    // matched; remaining axes by descending variance, right-handed.
    std::optional<Vec3> axis_prior;
};

/// PCA-oriented bounding box of the cloud with canonicalized axes.
SlotPoseEstimate fit_bounding_box(const std::vector<Vec3>& cloud, const BoxFitOptions& opts = {});

struct CupRefineOptions {
    double wall_band = 0.005;  // m, point-to-surface acceptance once converged
    int iterations = 12;
    int min_wall_points = 20;
    // Penalty weight pulling the fitted axis toward the prior (the slot angle
    // is a design constant); keeps the tilt observable-but-anchored when the
    // crescent view plus depth noise leaves it weakly constrained.
    double axis_prior_weight = 1.0;
};

/// Model-based refinement of a cup estimate: fit a cylinder of known bore
/// radius and depth to the deprojected points (Gauss-Newton over the axis
/// direction and lateral offset on wall points, axial position pinned by the
/// opening rim). A single view sees the full far wall but only a crescent of
/// the bottom, so the raw bounding box is laterally biased; the known radius
/// removes that bias. Throws StagedError("fit") when too few wall points
/// survive classification.
SlotPoseEstimate refine_cup_estimate(const std::vector<Vec3>& cloud, double bore_radius,
                                     double depth, const Vec3& axis_prior,
                                     const Vec3& center_seed, const CupRefineOptions& opts = {});

/// Goal-estimation pipeline: project the rough position, select the mask,
/// deproject, fit the box. Errors carry the failing stage.
SlotPoseEstimate estimate_slot_pose(const DepthImage& depth, const std::vector<Mask>& masks,
                                    const CameraModel& cam, const Vec3& rough_position,
                                    const BoxFitOptions& opts = {});

// 16-bit grayscale PGM in millimeters (depth) and 8-bit PGM (mask, nonzero
// = member), both binary variants.
void save_depth_pgm(const DepthImage& img, const std::string& path);
DepthImage load_depth_pgm(const std::string& path);
void save_mask_pgm(const Mask& mask, const std::string& path);
Mask load_mask_pgm(const std::string& path);

}  // namespace cvf
