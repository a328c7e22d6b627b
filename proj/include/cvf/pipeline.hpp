#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "cvf/adjudicate.hpp"
#include "cvf/demo.hpp"
#include "cvf/panel.hpp"
#include "cvf/perception.hpp"
#include "cvf/planner.hpp"
#include "cvf/render.hpp"
#include "cvf/transfer.hpp"

namespace cvf {

inline constexpr const char* kVersion = "0.1.0";

struct NoiseModel {
    double depth_sigma = 0.002;          // m
    double dropout = 0.01;               // fraction of valid pixels
    double rough_position_sigma = 0.006;  // m, rough slot prior / camera placement
    double pod_placement_sigma = 0.0025;  // m, pod seating tolerance in the feeder
    bool foliage = true;                  // neighbour-plant snag proxy
    double foliage_min = 0.05;            // m, sphere radius range
    double foliage_max = 0.12;
    double foliage_standoff = 2.0;        // sphere center, in radii outside the opening
};

struct ScenarioConfig {
    std::string name = "default";
    int transplant_trials = 15;
    int harvest_trials = 16;
    std::uint64_t seed = 1;
    NoiseModel noise;

    double roi_radius = 0.15;        // m, constraint extraction sphere
    double camera_standoff = 0.45;   // m, eye distance from the slot
    double camera_tilt = 0.45;       // rad, view direction off the slot axis
    double insert_depth = 0.033;     // m, planned pod tip depth below opening
    double approach_standoff = 0.08;  // m, pre-insert distance outside the cup

    Vec3 pod_feeder{0.50, -0.30, 0.12};  // known pod pickup position
    Vec3 tray{0.50, 0.30, 0.12};         // harvest drop-off position

    GrowPanel panel;
    SaplingPod pod;
    CameraModel camera;  // intrinsics; extrinsics are placed per trial
    SegmentationOptions segmentation;
    PlanOptions plan;
    AdjudicationOptions adjudication;
    BoxFitOptions box_fit;

    ScenarioConfig();  // fills in the bundled panel
};

/// Bundled scenarios: the default noisy run and its zero-noise variant
/// (no depth noise, no dropout, exact rough prior, foliage disabled).
ScenarioConfig default_scenario();
ScenarioConfig zero_noise_scenario();

struct TrialRecord {
    int index = 0;
    TaskKind kind = TaskKind::Transplant;
    std::string slot_id;
    TrialOutcome outcome;
    SlotPoseEstimate estimate;
    bool counted = true;  // bootstrap replants/harvests keep occupancy flowing
    std::string error;    // staged error text when a stage threw
};

struct RunSummary {
    int counted_trials = 0;
    int successes = 0;
    double success_rate = 0.0;
    std::map<std::string, int> failure_modes;        // mode name -> count
    std::map<std::string, int> successes_by_kind;    // task kind -> count
    std::map<std::string, int> trials_by_kind;
};

struct RunReport {
    std::string version = kVersion;
    std::string scenario;
    std::uint64_t seed = 0;
    std::vector<TrialRecord> trials;
    RunSummary summary;
    std::map<std::string, std::string> input_digests;   // filled by the CLI
    std::map<std::string, std::uint64_t> work;          // deterministic counters
};

RunSummary summarize(const std::vector<TrialRecord>& trials);

/// Tool pose for a pod whose tip sits `insert_depth` below the cup opening,
/// backed off by `extra_out` along the slot axis; the shared convention that
/// makes the transplant release and the harvest grasp coincide.
Pose insertion_tool_pose(const Pose& slot_pose, const SaplingPod& pod, double insert_depth,
                         double extra_out);

/// Synthetic one-shot demonstrations built from constant-screw legs against
/// a known task instance: pick at the pod, transit, axial insert, release
/// (transplant); axial grasp, extract, transit, drop (harvest).
Demonstration make_transplant_demo(const Pose& pod_pose, const Pose& slot_pose,
                                   const SaplingPod& pod, double insert_depth,
                                   double approach_standoff);
Demonstration make_harvest_demo(const Pose& slot_pose, const Pose& tray_pose,
                                const SaplingPod& pod, double insert_depth,
                                double approach_standoff);

/// Station pose for pickup/drop-off points: tool z tilted toward the arm so
/// plans stay inside the wrist pitch budget.
Pose station_pose(const Vec3& at);

/// The canonical demonstrations run_pipeline segments and transfers: built
/// against the feeder/tray stations and the center slot of the middle tube.
Demonstration bundled_transplant_demo(const ScenarioConfig& cfg);
Demonstration bundled_harvest_demo(const ScenarioConfig& cfg);

/// Rebuild an estimate's frame with the canonical roll about its z-axis so
/// slot frames agree between perception and panel ground truth.
Pose canonical_slot_frame(const Pose& estimate);

/// One perception trial as run inside the pipeline: perturb the rough slot
/// prior, place the camera off the slot axis, render, fit the box, and pin
/// the lateral center with the known bore radius (a single view sees the
/// full far wall but only a crescent of the cup bottom on the camera side).
SlotPoseEstimate perceive_slot(const ScenarioConfig& cfg, const GrowPanel::Slot& slot,
                               std::uint64_t trial_seed);

/// Full Monte Carlo reproduction run: per trial, render the panel, estimate
/// the slot, transfer the demonstrated constraints, plan, and adjudicate;
/// transplants feed the registry that defines later harvests. Deterministic
/// given the seed, for any jobs count.
RunReport run_pipeline(const ScenarioConfig& cfg, int jobs = 1);

}  // namespace cvf
