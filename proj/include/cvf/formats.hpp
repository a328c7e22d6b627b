#pragma once

#include <string>

#include "cvf/demo.hpp"
#include "cvf/manipulator.hpp"
#include "cvf/perception.hpp"
#include "cvf/pipeline.hpp"
#include "cvf/planner.hpp"
#include "cvf/transfer.hpp"

namespace cvf {

/// FNV-1a 64-bit digest of the file bytes, as 16 hex characters.
/// Throws StagedError("io") when the file cannot be read.
std::string file_digest(const std::string& path);

// All loaders throw StagedError("parse") with the offending path (and line
// number for line-delimited formats); writers throw StagedError("io").
// Every pair satisfies load(save(x)) == x and emits byte-stable output.

/// Trajectory: one record per line with {t, position, orientation [w,x,y,z],
/// gripper}. Timestamps must strictly increase; quaternions must be unit to
/// 1e-6 and are normalized on load with a warning to stderr.
void save_demo_jsonl(const Demonstration& demo, const std::string& path);
Demonstration load_demo_jsonl(const std::string& path);

void save_segments_json(const ScrewSegmentSequence& seq, const FitError& fit,
                        const std::string& path);
ScrewSegmentSequence load_segments_json(const std::string& path);

void save_instance_json(const TaskInstance& inst, const std::string& path);
TaskInstance load_instance_json(const std::string& path);

void save_waypoints_json(const TransferredPath& path_data, const std::string& path);
TransferredPath load_waypoints_json(const std::string& path);

void save_model_json(const ManipulatorModel& model, const std::string& path);
ManipulatorModel load_model_json(const std::string& path);

void save_joint_path_json(const JointPath& jp, const std::string& path);
JointPath load_joint_path_json(const std::string& path);

void save_camera_json(const CameraModel& cam, const std::string& path);
CameraModel load_camera_json(const std::string& path);

void save_scenario_json(const ScenarioConfig& cfg, const std::string& path);
ScenarioConfig load_scenario_json(const std::string& path);

void save_report_json(const RunReport& report, const std::string& path);
RunReport load_report_json(const std::string& path);

}  // namespace cvf
