#include "cvf/formats.hpp"

#include <cmath>
#include <cstdint>
#include <fstream>
#include <iostream>
#include <sstream>

#include <json.hpp>

#include "cvf/error.hpp"
#include "cvf/panel.hpp"

namespace cvf {

using json = nlohmann::ordered_json;

namespace {

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw StagedError("io", "cannot read " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_file(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw StagedError("io", "cannot write " + path);
    out << text;
}

json parse_json(const std::string& path) {
    try {
        return json::parse(read_file(path));
    } catch (const nlohmann::json::exception& e) {
        throw StagedError("parse", path + ": " + e.what());
    }
}

// --- pose / vector helpers -------------------------------------------------

json to_json(const Vec3& v) { return json::array({v.x(), v.y(), v.z()}); }

Vec3 vec3_from(const json& j) {
    if (!j.is_array() || j.size() != 3) throw nlohmann::json::other_error::create(501, "expected a 3-vector", nullptr);
    return Vec3(j[0].get<double>(), j[1].get<double>(), j[2].get<double>());
}

json to_json(const Pose& p) {
    return json{{"position", to_json(p.translation)},
                {"orientation", json::array({p.rotation.w(), p.rotation.x(), p.rotation.y(),
                                             p.rotation.z()})}};
}

Pose pose_from(const json& j) {
    Pose p;
    p.translation = vec3_from(j.at("position"));
    const json& q = j.at("orientation");
    if (!q.is_array() || q.size() != 4)
        throw nlohmann::json::other_error::create(501, "expected a quaternion [w,x,y,z]", nullptr);
    // Assign coefficients directly so an already-unit quaternion round-trips
    // bit-exactly.
    p.rotation = Quat(q[0].get<double>(), q[1].get<double>(), q[2].get<double>(),
                      q[3].get<double>());
    return p;
}

const char* to_string(GripperState g) { return g == GripperState::Open ? "open" : "closed"; }

GripperState gripper_from(const std::string& s) {
    if (s == "open") return GripperState::Open;
    if (s == "closed") return GripperState::Closed;
    throw nlohmann::json::other_error::create(501, "gripper must be \"open\" or \"closed\"", nullptr);
}

json to_json(const ScrewDisplacement& s) {
    json j;
    j["kind"] = s.kind == ScrewDisplacement::Kind::General ? "general" : "pure-translation";
    j["axis_direction"] = to_json(s.axis_direction);
    j["moment"] = to_json(s.moment);
    j["pitch"] = std::isinf(s.pitch) ? json("inf") : json(s.pitch);
    j["magnitude"] = s.magnitude;
    j["degenerate"] = s.degenerate;
    return j;
}

ScrewDisplacement screw_from(const json& j) {
    ScrewDisplacement s;
    s.kind = j.at("kind").get<std::string>() == "general" ? ScrewDisplacement::Kind::General
                                                         : ScrewDisplacement::Kind::PureTranslation;
    s.axis_direction = vec3_from(j.at("axis_direction"));
    s.moment = vec3_from(j.at("moment"));
    const json& p = j.at("pitch");
    s.pitch = p.is_string() ? std::numeric_limits<double>::infinity() : p.get<double>();
    s.magnitude = j.at("magnitude").get<double>();
    s.degenerate = j.at("degenerate").get<bool>();
    return s;
}

std::string dump(const json& j) { return j.dump(2) + "\n"; }

}  // namespace

std::string file_digest(const std::string& path) {
    std::string bytes = read_file(path);
    std::uint64_t h = 1469598103934665603ULL;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

// --- trajectory JSONL ------------------------------------------------------

void save_demo_jsonl(const Demonstration& demo, const std::string& path) {
    std::ostringstream out;
    for (std::size_t i = 0; i < demo.size(); ++i) {
        json rec;
        rec["t"] = demo.timestamps[i];
        rec["position"] = to_json(demo.poses[i].translation);
        const Quat& q = demo.poses[i].rotation;
        rec["orientation"] = json::array({q.w(), q.x(), q.y(), q.z()});
        rec["gripper"] = to_string(demo.gripper[i]);
        out << rec.dump() << "\n";
    }
    write_file(path, out.str());
}

Demonstration load_demo_jsonl(const std::string& path) {
    std::istringstream in(read_file(path));
    Demonstration demo;
    demo.id = path;
    std::string line;
    int lineno = 0;
    bool warned = false;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        std::string where = path + ":" + std::to_string(lineno);
        try {
            json rec = json::parse(line);
            double t = rec.at("t").get<double>();
            if (!demo.timestamps.empty() && t <= demo.timestamps.back())
                throw StagedError("parse", where + ": timestamps must strictly increase");
            Pose p;
            p.translation = vec3_from(rec.at("position"));
            const json& q = rec.at("orientation");
            if (!q.is_array() || q.size() != 4)
                throw StagedError("parse", where + ": orientation must be [w,x,y,z]");
            Quat quat(q[0].get<double>(), q[1].get<double>(), q[2].get<double>(),
                      q[3].get<double>());
            double norm = quat.norm();
            if (std::abs(norm - 1.0) > 1e-6)
                throw StagedError("parse", where + ": orientation is not a unit quaternion");
            if (std::abs(norm - 1.0) > 1e-12) {
                quat.normalize();
                if (!warned) {
                    std::cerr << where << ": normalizing near-unit quaternion(s)\n";
                    warned = true;
                }
            }
            p.rotation = quat;
            demo.poses.push_back(p);
            demo.timestamps.push_back(t);
            demo.gripper.push_back(gripper_from(rec.at("gripper").get<std::string>()));
        } catch (const nlohmann::json::exception& e) {
            throw StagedError("parse", where + ": " + e.what());
        }
    }
    return demo;
}

// --- segments --------------------------------------------------------------

void save_segments_json(const ScrewSegmentSequence& seq, const FitError& fit,
                        const std::string& path) {
    json j;
    j["source_demo_id"] = seq.source_demo_id;
    j["fit_error"] = {{"max_position", fit.max_position}, {"max_rotation", fit.max_rotation}};
    j["breakpoints"] = json::array();
    for (std::size_t i = 0; i < seq.breakpoint_indices.size(); ++i) {
        json b;
        b["index"] = seq.breakpoint_indices[i];
        b["pose"] = to_json(seq.breakpoint_poses[i]);
        b["gripper"] = to_string(seq.breakpoint_gripper[i]);
        j["breakpoints"].push_back(b);
    }
    j["segments"] = json::array();
    for (const auto& s : seq.segments) {
        json e;
        e["screw"] = to_json(s.screw);
        e["start_pose"] = to_json(s.start_pose);
        e["gripper"] = to_string(s.gripper);
        j["segments"].push_back(e);
    }
    write_file(path, dump(j));
}

ScrewSegmentSequence load_segments_json(const std::string& path) {
    json j = parse_json(path);
    try {
        ScrewSegmentSequence seq;
        seq.source_demo_id = j.at("source_demo_id").get<std::string>();
        for (const json& b : j.at("breakpoints")) {
            seq.breakpoint_indices.push_back(b.at("index").get<std::size_t>());
            seq.breakpoint_poses.push_back(pose_from(b.at("pose")));
            seq.breakpoint_gripper.push_back(gripper_from(b.at("gripper").get<std::string>()));
        }
        for (const json& e : j.at("segments")) {
            ScrewSegment s;
            s.screw = screw_from(e.at("screw"));
            s.start_pose = pose_from(e.at("start_pose"));
            s.gripper = gripper_from(e.at("gripper").get<std::string>());
            seq.segments.push_back(s);
        }
        return seq;
    } catch (const nlohmann::json::exception& e) {
        throw StagedError("parse", path + ": " + e.what());
    }
}

// --- task instance ---------------------------------------------------------

void save_instance_json(const TaskInstance& inst, const std::string& path) {
    json j;
    j["kind"] = to_string(inst.kind);
    j["objects"] = json::object();
    for (const auto& [name, pose] : inst.object_poses) j["objects"][name] = to_json(pose);
    write_file(path, dump(j));
}

TaskInstance load_instance_json(const std::string& path) {
    json j = parse_json(path);
    try {
        TaskInstance inst;
        inst.kind = task_kind_from_string(j.at("kind").get<std::string>());
        for (const auto& [name, pose] : j.at("objects").items())
            inst.object_poses[name] = pose_from(pose);
        return inst;
    } catch (const nlohmann::json::exception& e) {
        throw StagedError("parse", path + ": " + e.what());
    }
}

// --- waypoints -------------------------------------------------------------

void save_waypoints_json(const TransferredPath& path_data, const std::string& path) {
    json j;
    j["waypoints"] = json::array();
    for (const auto& w : path_data.waypoints) {
        json e = to_json(w.pose);
        e["gripper"] = to_string(w.gripper);
        j["waypoints"].push_back(e);
    }
    j["bridge_starts"] = path_data.bridge_starts;
    write_file(path, dump(j));
}

TransferredPath load_waypoints_json(const std::string& path) {
    json j = parse_json(path);
    try {
        TransferredPath p;
        for (const json& e : j.at("waypoints")) {
            TransferredWaypoint w;
            w.pose = pose_from(e);
            w.gripper = gripper_from(e.at("gripper").get<std::string>());
            p.waypoints.push_back(w);
        }
        p.bridge_starts = j.at("bridge_starts").get<std::vector<std::size_t>>();
        return p;
    } catch (const nlohmann::json::exception& e) {
        throw StagedError("parse", path + ": " + e.what());
    }
}

// --- manipulator model -----------------------------------------------------

void save_model_json(const ManipulatorModel& model, const std::string& path) {
    json j;
    j["name"] = model.name;
    j["joints"] = json::array();
    for (const auto& joint : model.joints) {
        json e;
        e["type"] = joint.type == ManipulatorModel::Joint::Type::Revolute ? "revolute" : "prismatic";
        e["axis"] = to_json(joint.axis);
        e["point"] = to_json(joint.point);
        e["min"] = joint.min;
        e["max"] = joint.max;
        j["joints"].push_back(e);
    }
    j["home"] = to_json(model.home);
    write_file(path, dump(j));
}

ManipulatorModel load_model_json(const std::string& path) {
    json j = parse_json(path);
    try {
        ManipulatorModel model;
        model.name = j.at("name").get<std::string>();
        for (const json& e : j.at("joints")) {
            ManipulatorModel::Joint joint;
            std::string type = e.at("type").get<std::string>();
            if (type == "revolute")
                joint.type = ManipulatorModel::Joint::Type::Revolute;
            else if (type == "prismatic")
                joint.type = ManipulatorModel::Joint::Type::Prismatic;
            else
                throw StagedError("parse", path + ": unknown joint type " + type);
            joint.axis = vec3_from(e.at("axis"));
            joint.point = vec3_from(e.at("point"));
            joint.min = e.at("min").get<double>();
            joint.max = e.at("max").get<double>();
            model.joints.push_back(joint);
        }
        model.home = pose_from(j.at("home"));
        model.validate();
        return model;
    } catch (const nlohmann::json::exception& e) {
        throw StagedError("parse", path + ": " + e.what());
    }
}

// --- joint path ------------------------------------------------------------

void save_joint_path_json(const JointPath& jp, const std::string& path) {
    json j;
    j["points"] = json::array();
    for (const auto& pt : jp.points) {
        json e;
        e["config"] = std::vector<double>(pt.config.data(), pt.config.data() + pt.config.size());
        e["achieved"] = to_json(pt.achieved);
        e["deviation_p"] = pt.deviation_p;
        e["deviation_r"] = pt.deviation_r;
        e["gripper"] = to_string(pt.gripper);
        j["points"].push_back(e);
    }
    j["waypoint_indices"] = jp.waypoint_indices;
    write_file(path, dump(j));
}

JointPath load_joint_path_json(const std::string& path) {
    json j = parse_json(path);
    try {
        JointPath jp;
        for (const json& e : j.at("points")) {
            JointPathPoint pt;
            auto cfg = e.at("config").get<std::vector<double>>();
            pt.config = Eigen::Map<const VecX>(cfg.data(), static_cast<Eigen::Index>(cfg.size()));
            pt.achieved = pose_from(e.at("achieved"));
            pt.deviation_p = e.at("deviation_p").get<double>();
            pt.deviation_r = e.at("deviation_r").get<double>();
            pt.gripper = gripper_from(e.at("gripper").get<std::string>());
            jp.points.push_back(pt);
        }
        jp.waypoint_indices = j.at("waypoint_indices").get<std::vector<std::size_t>>();
        return jp;
    } catch (const nlohmann::json::exception& e) {
        throw StagedError("parse", path + ": " + e.what());
    }
}

// --- camera ----------------------------------------------------------------

namespace {

json camera_to_json(const CameraModel& cam) {
    json j;
    j["fx"] = cam.fx;
    j["fy"] = cam.fy;
    j["cx"] = cam.cx;
    j["cy"] = cam.cy;
    j["width"] = cam.width;
    j["height"] = cam.height;
    j["extrinsics"] = to_json(cam.extrinsics);
    return j;
}

CameraModel camera_from_json(const json& j) {
    CameraModel cam;
    cam.fx = j.at("fx").get<double>();
    cam.fy = j.at("fy").get<double>();
    cam.cx = j.at("cx").get<double>();
    cam.cy = j.at("cy").get<double>();
    cam.width = j.at("width").get<int>();
    cam.height = j.at("height").get<int>();
    cam.extrinsics = pose_from(j.at("extrinsics"));
    return cam;
}

}  // namespace

void save_camera_json(const CameraModel& cam, const std::string& path) {
    write_file(path, dump(camera_to_json(cam)));
}

CameraModel load_camera_json(const std::string& path) {
    json j = parse_json(path);
    try {
        return camera_from_json(j);
    } catch (const nlohmann::json::exception& e) {
        throw StagedError("parse", path + ": " + e.what());
    }
}

// --- scenario --------------------------------------------------------------

void save_scenario_json(const ScenarioConfig& cfg, const std::string& path) {
    json j;
    j["name"] = cfg.name;
    j["transplant_trials"] = cfg.transplant_trials;
    j["harvest_trials"] = cfg.harvest_trials;
    j["seed"] = cfg.seed;
    j["noise"] = {{"depth_sigma", cfg.noise.depth_sigma},
                  {"dropout", cfg.noise.dropout},
                  {"rough_position_sigma", cfg.noise.rough_position_sigma},
                  {"pod_placement_sigma", cfg.noise.pod_placement_sigma},
                  {"foliage", cfg.noise.foliage},
                  {"foliage_min", cfg.noise.foliage_min},
                  {"foliage_max", cfg.noise.foliage_max},
                  {"foliage_standoff", cfg.noise.foliage_standoff}};
    j["roi_radius"] = cfg.roi_radius;
    j["camera_standoff"] = cfg.camera_standoff;
    j["camera_tilt"] = cfg.camera_tilt;
    j["insert_depth"] = cfg.insert_depth;
    j["approach_standoff"] = cfg.approach_standoff;
    j["pod_feeder"] = to_json(cfg.pod_feeder);
    j["tray"] = to_json(cfg.tray);

    json tubes = json::array();
    for (const auto& t : cfg.panel.tubes) {
        json e;
        e["pose"] = to_json(t.pose);
        e["length"] = t.length;
        e["outer_diameter"] = t.outer_diameter;
        tubes.push_back(e);
    }
    json slots = json::array();
    for (const auto& s : cfg.panel.slots) {
        json e;
        e["id"] = s.id;
        e["center"] = to_json(s.center);
        e["diameter"] = s.diameter;
        e["axis_angle"] = s.axis_angle;
        e["depth"] = s.depth;
        e["tube"] = s.tube;
        slots.push_back(e);
    }
    j["panel"] = {{"tubes", tubes},
                  {"slots", slots},
                  {"inter_slot_spacing", cfg.panel.inter_slot_spacing},
                  {"inter_tube_spacing", cfg.panel.inter_tube_spacing}};
    j["pod"] = {{"side", cfg.pod.side},
                {"height", cfg.pod.height},
                {"grasp_frame", to_json(cfg.pod.grasp_frame)}};
    j["camera"] = camera_to_json(cfg.camera);
    j["segmentation"] = {{"eps_position", cfg.segmentation.eps_position},
                         {"eps_rotation", cfg.segmentation.eps_rotation},
                         {"force_gripper_breakpoints", cfg.segmentation.force_gripper_breakpoints}};
    j["plan"] = {{"max_step_p", cfg.plan.max_step_p},
                 {"max_step_r", cfg.plan.max_step_r},
                 {"converge_p", cfg.plan.converge_p},
                 {"converge_r", cfg.plan.converge_r},
                 {"path_tol_p", cfg.plan.path_tol_p},
                 {"path_tol_r", cfg.plan.path_tol_r},
                 {"lambda", cfg.plan.lambda},
                 {"max_iterations", cfg.plan.max_iterations}};
    j["adjudication"] = {{"insertion_threshold", cfg.adjudication.insertion_threshold},
                         {"grasp_tol_p", cfg.adjudication.grasp_tol_p},
                         {"grasp_tol_r", cfg.adjudication.grasp_tol_r},
                         {"finger_offset", cfg.adjudication.finger_offset},
                         {"finger_length", cfg.adjudication.finger_length},
                         {"gripper_radius", cfg.adjudication.gripper_radius},
                         {"engage_radius", cfg.adjudication.engage_radius}};
    j["box_fit"] = {{"min_points", cfg.box_fit.min_points},
                    {"extent_floor", cfg.box_fit.extent_floor},
                    {"reject_outliers", cfg.box_fit.reject_outliers},
                    {"knn", cfg.box_fit.knn},
                    {"outlier_sigma", cfg.box_fit.outlier_sigma}};
    write_file(path, dump(j));
}

ScenarioConfig load_scenario_json(const std::string& path) {
    json j = parse_json(path);
    try {
        ScenarioConfig cfg;
        cfg.name = j.at("name").get<std::string>();
        cfg.transplant_trials = j.at("transplant_trials").get<int>();
        cfg.harvest_trials = j.at("harvest_trials").get<int>();
        cfg.seed = j.at("seed").get<std::uint64_t>();
        const json& n = j.at("noise");
        cfg.noise.depth_sigma = n.at("depth_sigma").get<double>();
        cfg.noise.dropout = n.at("dropout").get<double>();
        cfg.noise.rough_position_sigma = n.at("rough_position_sigma").get<double>();
        cfg.noise.pod_placement_sigma = n.at("pod_placement_sigma").get<double>();
        cfg.noise.foliage = n.at("foliage").get<bool>();
        cfg.noise.foliage_min = n.at("foliage_min").get<double>();
        cfg.noise.foliage_max = n.at("foliage_max").get<double>();
        cfg.noise.foliage_standoff = n.at("foliage_standoff").get<double>();
        cfg.roi_radius = j.at("roi_radius").get<double>();
        cfg.camera_standoff = j.at("camera_standoff").get<double>();
        cfg.camera_tilt = j.at("camera_tilt").get<double>();
        cfg.insert_depth = j.at("insert_depth").get<double>();
        cfg.approach_standoff = j.at("approach_standoff").get<double>();
        cfg.pod_feeder = vec3_from(j.at("pod_feeder"));
        cfg.tray = vec3_from(j.at("tray"));

        const json& panel = j.at("panel");
        cfg.panel.tubes.clear();
        cfg.panel.slots.clear();
        for (const json& e : panel.at("tubes")) {
            GrowPanel::Tube t;
            t.pose = pose_from(e.at("pose"));
            t.length = e.at("length").get<double>();
            t.outer_diameter = e.at("outer_diameter").get<double>();
            cfg.panel.tubes.push_back(t);
        }
        for (const json& e : panel.at("slots")) {
            GrowPanel::Slot s;
            s.id = e.at("id").get<std::string>();
            s.center = pose_from(e.at("center"));
            s.diameter = e.at("diameter").get<double>();
            s.axis_angle = e.at("axis_angle").get<double>();
            s.depth = e.at("depth").get<double>();
            s.tube = e.at("tube").get<int>();
            cfg.panel.slots.push_back(s);
        }
        cfg.panel.inter_slot_spacing = panel.at("inter_slot_spacing").get<double>();
        cfg.panel.inter_tube_spacing = panel.at("inter_tube_spacing").get<double>();
        cfg.panel.validate();

        const json& pod = j.at("pod");
        cfg.pod.side = pod.at("side").get<double>();
        cfg.pod.height = pod.at("height").get<double>();
        cfg.pod.grasp_frame = pose_from(pod.at("grasp_frame"));
        cfg.camera = camera_from_json(j.at("camera"));
        const json& seg = j.at("segmentation");
        cfg.segmentation.eps_position = seg.at("eps_position").get<double>();
        cfg.segmentation.eps_rotation = seg.at("eps_rotation").get<double>();
        cfg.segmentation.force_gripper_breakpoints =
            seg.at("force_gripper_breakpoints").get<bool>();
        const json& plan = j.at("plan");
        cfg.plan.max_step_p = plan.at("max_step_p").get<double>();
        cfg.plan.max_step_r = plan.at("max_step_r").get<double>();
        cfg.plan.converge_p = plan.at("converge_p").get<double>();
        cfg.plan.converge_r = plan.at("converge_r").get<double>();
        cfg.plan.path_tol_p = plan.at("path_tol_p").get<double>();
        cfg.plan.path_tol_r = plan.at("path_tol_r").get<double>();
        cfg.plan.lambda = plan.at("lambda").get<double>();
        cfg.plan.max_iterations = plan.at("max_iterations").get<int>();
        const json& adj = j.at("adjudication");
        cfg.adjudication.insertion_threshold = adj.at("insertion_threshold").get<double>();
        cfg.adjudication.grasp_tol_p = adj.at("grasp_tol_p").get<double>();
        cfg.adjudication.grasp_tol_r = adj.at("grasp_tol_r").get<double>();
        cfg.adjudication.finger_offset = adj.at("finger_offset").get<double>();
        cfg.adjudication.finger_length = adj.at("finger_length").get<double>();
        cfg.adjudication.gripper_radius = adj.at("gripper_radius").get<double>();
        cfg.adjudication.engage_radius = adj.at("engage_radius").get<double>();
        const json& bf = j.at("box_fit");
        cfg.box_fit.min_points = bf.at("min_points").get<int>();
        cfg.box_fit.extent_floor = bf.at("extent_floor").get<double>();
        cfg.box_fit.reject_outliers = bf.at("reject_outliers").get<bool>();
        cfg.box_fit.knn = bf.at("knn").get<int>();
        cfg.box_fit.outlier_sigma = bf.at("outlier_sigma").get<double>();
        return cfg;
    } catch (const nlohmann::json::exception& e) {
        throw StagedError("parse", path + ": " + e.what());
    }
}

// --- run report ------------------------------------------------------------

void save_report_json(const RunReport& report, const std::string& path) {
    json j;
    j["version"] = report.version;
    j["scenario"] = report.scenario;
    j["seed"] = report.seed;
    j["summary"] = {{"counted_trials", report.summary.counted_trials},
                    {"successes", report.summary.successes},
                    {"success_rate", report.summary.success_rate},
                    {"failure_modes", report.summary.failure_modes},
                    {"successes_by_kind", report.summary.successes_by_kind},
                    {"trials_by_kind", report.summary.trials_by_kind}};
    j["work"] = report.work;
    j["input_digests"] = report.input_digests;
    j["trials"] = json::array();
    for (const auto& t : report.trials) {
        json e;
        e["index"] = t.index;
        e["kind"] = to_string(t.kind);
        e["slot_id"] = t.slot_id;
        e["counted"] = t.counted;
        e["error"] = t.error;
        e["outcome"] = {{"success", t.outcome.success},
                        {"mode", to_string(t.outcome.mode)},
                        {"insertion_depth", t.outcome.insertion_depth},
                        {"min_lateral_clearance", t.outcome.min_lateral_clearance},
                        {"slot_id", t.outcome.slot_id},
                        {"detail", t.outcome.detail}};
        e["estimate"] = {{"pose", to_json(t.estimate.pose)},
                         {"extents", to_json(t.estimate.extents)},
                         {"point_count", t.estimate.point_count},
                         {"residual", t.estimate.residual},
                         {"degenerate", t.estimate.degenerate}};
        j["trials"].push_back(e);
    }
    write_file(path, dump(j));
}

RunReport load_report_json(const std::string& path) {
    json j = parse_json(path);
    try {
        RunReport r;
        r.version = j.at("version").get<std::string>();
        r.scenario = j.at("scenario").get<std::string>();
        r.seed = j.at("seed").get<std::uint64_t>();
        const json& s = j.at("summary");
        r.summary.counted_trials = s.at("counted_trials").get<int>();
        r.summary.successes = s.at("successes").get<int>();
        r.summary.success_rate = s.at("success_rate").get<double>();
        r.summary.failure_modes = s.at("failure_modes").get<std::map<std::string, int>>();
        r.summary.successes_by_kind = s.at("successes_by_kind").get<std::map<std::string, int>>();
        r.summary.trials_by_kind = s.at("trials_by_kind").get<std::map<std::string, int>>();
        r.work = j.at("work").get<std::map<std::string, std::uint64_t>>();
        r.input_digests = j.at("input_digests").get<std::map<std::string, std::string>>();
        for (const json& e : j.at("trials")) {
            TrialRecord t;
            t.index = e.at("index").get<int>();
            t.kind = task_kind_from_string(e.at("kind").get<std::string>());
            t.slot_id = e.at("slot_id").get<std::string>();
            t.counted = e.at("counted").get<bool>();
            t.error = e.at("error").get<std::string>();
            const json& o = e.at("outcome");
            t.outcome.kind = t.kind;
            t.outcome.success = o.at("success").get<bool>();
            t.outcome.mode = failure_mode_from_string(o.at("mode").get<std::string>());
            t.outcome.insertion_depth = o.at("insertion_depth").get<double>();
            t.outcome.min_lateral_clearance = o.at("min_lateral_clearance").get<double>();
            t.outcome.slot_id = o.at("slot_id").get<std::string>();
            t.outcome.detail = o.at("detail").get<std::string>();
            const json& est = e.at("estimate");
            t.estimate.pose = pose_from(est.at("pose"));
            t.estimate.extents = vec3_from(est.at("extents"));
            t.estimate.point_count = est.at("point_count").get<int>();
            t.estimate.residual = est.at("residual").get<double>();
            t.estimate.degenerate = est.at("degenerate").get<bool>();
            r.trials.push_back(t);
        }
        return r;
    } catch (const nlohmann::json::exception& e) {
        throw StagedError("parse", path + ": " + e.what());
    }
}

}  // namespace cvf
