// cvfarm: batch front end for the grow-panel manipulation pipeline.
//
// Subcommands: segment, transfer, plan, simulate, report. Every command is
// deterministic given its inputs, flags, and seed; results go to --out as
// structured text, human-readable summaries to stdout, wall-clock and
// warnings to stderr. Exit codes: 0 success, 2 usage error, 3 staged
// pipeline failure.

#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "cvf/adjudicate.hpp"
#include "cvf/demo.hpp"
#include "cvf/error.hpp"
#include "cvf/formats.hpp"
#include "cvf/manipulator.hpp"
#include "cvf/perception.hpp"
#include "cvf/pipeline.hpp"
#include "cvf/planner.hpp"
#include "cvf/transfer.hpp"

namespace {

struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

cvf::Vec3 parse_vec3(const std::vector<double>& v, const char* flag) {
    if (v.size() != 3) throw UsageError(std::string(flag) + " needs exactly three numbers");
    return cvf::Vec3(v[0], v[1], v[2]);
}

// --- segment ---------------------------------------------------------------

struct SegmentArgs {
    std::string demo_path;
    std::string out = "segments.json";
    double eps_pos = cvf::SegmentationOptions{}.eps_position;
    double eps_rot_deg = 3.0;
};

int cmd_segment(const SegmentArgs& a) {
    cvf::Demonstration demo = cvf::load_demo_jsonl(a.demo_path);
    if (demo.size() < 2) throw UsageError("demonstration needs at least two samples");
    demo.validate();

    cvf::SegmentationOptions opts;
    opts.eps_position = a.eps_pos;
    opts.eps_rotation = a.eps_rot_deg * M_PI / 180.0;
    cvf::ScrewSegmentSequence seq = cvf::segment_demo(demo, opts);
    cvf::FitError fit = cvf::segment_fit_error(seq, demo);
    cvf::save_segments_json(seq, fit, a.out);

    std::cout << "demo " << a.demo_path << " (" << demo.size() << " samples, digest "
              << cvf::file_digest(a.demo_path) << ")\n"
              << "segments " << seq.segment_count() << ", fit error " << fit.max_position
              << " m / " << fit.max_rotation * 180.0 / M_PI << " deg\n"
              << "wrote " << a.out << "\n";
    return 0;
}

// --- transfer --------------------------------------------------------------

struct TransferArgs {
    std::string segments_path;
    std::string instance_path;
    std::string out = "waypoints.json";
    double roi_radius = 0.15;
    // Perception inputs; when given, the estimated cup pose replaces the
    // instance's "slot" entry (same result as an instance file that already
    // holds the estimate).
    std::string depth_path;
    std::vector<std::string> mask_paths;
    std::string camera_path;
    std::vector<double> rough;
};

int cmd_transfer(const TransferArgs& a) {
    cvf::ScrewSegmentSequence seq = cvf::load_segments_json(a.segments_path);
    cvf::TaskInstance inst = cvf::load_instance_json(a.instance_path);

    bool any_perception = !a.depth_path.empty() || !a.mask_paths.empty() ||
                          !a.camera_path.empty() || !a.rough.empty();
    if (any_perception) {
        if (a.depth_path.empty() || a.mask_paths.empty() || a.camera_path.empty() ||
            a.rough.empty())
            throw UsageError("--depth, --mask, --camera, and --rough must be given together");
        cvf::Vec3 rough = parse_vec3(a.rough, "--rough");
        cvf::DepthImage depth = cvf::load_depth_pgm(a.depth_path);
        cvf::CameraModel cam = cvf::load_camera_json(a.camera_path);
        std::vector<cvf::Mask> masks;
        for (const auto& p : a.mask_paths) masks.push_back(cvf::load_mask_pgm(p));
        cvf::SlotPoseEstimate est = cvf::estimate_slot_pose(depth, masks, cam, rough);
        inst.object_poses["slot"] = est.pose;
        std::cout << "estimated slot at [" << est.pose.translation.transpose() << "] from "
                  << est.point_count << " points, residual " << est.residual << "\n";
    }
    inst.validate();

    cvf::TransferableConstraint tc = cvf::extract_roi(seq, inst, a.roi_radius);
    cvf::TransferredPath path = cvf::transfer(tc, inst);
    cvf::save_waypoints_json(path, a.out);

    cvf::ConstraintReport rep = cvf::constraint_report(tc);
    std::cout << "task " << cvf::to_string(rep.kind) << ", roi " << rep.roi_radius << " m, "
              << rep.segments.size() << " constrained segments, " << path.waypoints.size()
              << " waypoints\n"
              << "wrote " << a.out << "\n";
    return 0;
}

// --- plan ------------------------------------------------------------------

struct PlanArgs {
    std::string model_path;
    std::string waypoints_path;
    std::string out = "joint_path.json";
    std::vector<double> theta0;
    bool position_only = false;
};

int cmd_plan(const PlanArgs& a) {
    cvf::ManipulatorModel model = cvf::load_model_json(a.model_path);
    cvf::TransferredPath path = cvf::load_waypoints_json(a.waypoints_path);
    if (path.waypoints.empty()) throw UsageError("waypoints file holds no waypoints");

    cvf::VecX theta0 = cvf::VecX::Zero(model.dof());
    if (!a.theta0.empty()) {
        if (static_cast<int>(a.theta0.size()) != model.dof())
            throw UsageError("--theta0 needs " + std::to_string(model.dof()) + " values");
        theta0 = Eigen::Map<const cvf::VecX>(a.theta0.data(),
                                             static_cast<Eigen::Index>(a.theta0.size()));
    }

    cvf::PlanOptions opts;
    opts.position_only = a.position_only;
    cvf::JointPath jp = cvf::plan_task(model, theta0, path, opts);
    cvf::save_joint_path_json(jp, a.out);

    std::cout << "model " << model.name << ", " << jp.points.size() << " configurations, max "
              << "deviation " << jp.max_deviation_p() << " m / "
              << jp.max_deviation_r() * 180.0 / M_PI << " deg\n"
              << "wrote " << a.out << "\n";
    return 0;
}

// --- simulate --------------------------------------------------------------

struct SimulateArgs {
    std::string scenario_path;
    std::string out = "report.json";
    std::string trace_dir;
    std::uint64_t seed = 0;
    bool seed_set = false;
    int jobs = 1;
};

int cmd_simulate(const SimulateArgs& a) {
    cvf::ScenarioConfig cfg =
        a.scenario_path.empty() ? cvf::default_scenario() : cvf::load_scenario_json(a.scenario_path);
    if (a.seed_set) cfg.seed = a.seed;

    auto t0 = std::chrono::steady_clock::now();
    cvf::RunReport report = cvf::run_pipeline(cfg, a.jobs);
    auto dt = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    std::cerr << "simulated " << report.trials.size() << " trials in " << dt << " s\n";

    if (!a.scenario_path.empty())
        report.input_digests["scenario"] = cvf::file_digest(a.scenario_path);
    cvf::save_report_json(report, a.out);

    if (!a.trace_dir.empty()) {
        // Plot-ready traces: the canonical demos the run segmented and
        // transferred.
        std::filesystem::create_directories(a.trace_dir);
        cvf::save_demo_jsonl(cvf::bundled_transplant_demo(cfg),
                             a.trace_dir + "/transplant_demo.jsonl");
        cvf::save_demo_jsonl(cvf::bundled_harvest_demo(cfg),
                             a.trace_dir + "/harvest_demo.jsonl");
    }

    const cvf::RunSummary& s = report.summary;
    std::cout << "scenario " << report.scenario << ", seed " << report.seed << "\n"
              << "success " << s.successes << "/" << s.counted_trials << " ("
              << 100.0 * s.success_rate << "%)\n";
    for (const auto& [mode, count] : s.failure_modes)
        std::cout << "  " << mode << ": " << count << "\n";
    std::cout << "wrote " << a.out << "\n";
    return 0;
}

// --- report ----------------------------------------------------------------

int cmd_report(const std::string& path) {
    cvf::RunReport r = cvf::load_report_json(path);
    const cvf::RunSummary& s = r.summary;
    std::cout << "version " << r.version << ", scenario " << r.scenario << ", seed " << r.seed
              << "\n"
              << "success " << s.successes << "/" << s.counted_trials << " ("
              << 100.0 * s.success_rate << "%)\n";
    for (const auto& [kind, total] : s.trials_by_kind) {
        auto it = s.successes_by_kind.find(kind);
        int ok = it == s.successes_by_kind.end() ? 0 : it->second;
        std::cout << "  " << kind << ": " << ok << "/" << total << "\n";
    }
    if (!s.failure_modes.empty()) {
        std::cout << "failure modes:\n";
        for (const auto& [mode, count] : s.failure_modes)
            std::cout << "  " << mode << ": " << count << "\n";
    }
    for (const auto& [name, digest] : r.input_digests)
        std::cout << "input " << name << " digest " << digest << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Grow-panel manipulation pipeline"};
    app.require_subcommand(1);

    SegmentArgs seg;
    CLI::App* c_seg = app.add_subcommand("segment", "Split a demonstration into constant screws");
    c_seg->add_option("demo", seg.demo_path, "Demonstration trajectory (JSONL)")->required();
    c_seg->add_option("--eps-pos", seg.eps_pos, "Position tolerance, m")
        ->envname("CVFARM_EPS_POS")->capture_default_str();
    c_seg->add_option("--eps-rot", seg.eps_rot_deg, "Rotation tolerance, deg")
        ->envname("CVFARM_EPS_ROT")->capture_default_str();
    c_seg->add_option("--out", seg.out, "Output segments file")
        ->envname("CVFARM_OUT")->capture_default_str();

    TransferArgs tr;
    CLI::App* c_tr = app.add_subcommand("transfer", "Transfer constraints to a task instance");
    c_tr->add_option("segments", tr.segments_path, "Segments file")->required();
    c_tr->add_option("instance", tr.instance_path, "Task instance file")->required();
    c_tr->add_option("--roi-radius", tr.roi_radius, "Constraint region radius, m")
        ->envname("CVFARM_ROI_RADIUS")->capture_default_str();
    c_tr->add_option("--depth", tr.depth_path, "Depth image (16-bit PGM, mm)");
    c_tr->add_option("--mask", tr.mask_paths, "Candidate instance mask (PGM), repeatable");
    c_tr->add_option("--camera", tr.camera_path, "Camera model file");
    c_tr->add_option("--rough", tr.rough, "Rough slot position x y z, m")->expected(3);
    c_tr->add_option("--out", tr.out, "Output waypoints file")
        ->envname("CVFARM_OUT")->capture_default_str();

    PlanArgs pl;
    CLI::App* c_pl = app.add_subcommand("plan", "Plan a joint path through waypoints");
    c_pl->add_option("model", pl.model_path, "Manipulator model file")->required();
    c_pl->add_option("waypoints", pl.waypoints_path, "Waypoints file")->required();
    c_pl->add_option("--theta0", pl.theta0, "Start configuration (defaults to zeros)");
    c_pl->add_flag("--position-only", pl.position_only, "Track positions only");
    c_pl->add_option("--out", pl.out, "Output joint path file")
        ->envname("CVFARM_OUT")->capture_default_str();

    SimulateArgs si;
    CLI::App* c_si = app.add_subcommand("simulate", "Run the Monte Carlo pipeline");
    c_si->add_option("--scenario", si.scenario_path, "Scenario file (default: bundled scenario)");
    c_si->add_option("--seed", si.seed, "Run seed")->envname("CVFARM_SEED");
    c_si->add_option("--jobs", si.jobs, "Worker threads")
        ->envname("CVFARM_JOBS")->capture_default_str();
    c_si->add_option("--trace-dir", si.trace_dir, "Directory for plot-ready trace files");
    c_si->add_option("--out", si.out, "Output report file")
        ->envname("CVFARM_OUT")->capture_default_str();

    std::string report_path;
    CLI::App* c_re = app.add_subcommand("report", "Summarize a run report");
    c_re->add_option("report", report_path, "Report file")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        if (c_seg->parsed()) return cmd_segment(seg);
        if (c_tr->parsed()) return cmd_transfer(tr);
        if (c_pl->parsed()) {
            return cmd_plan(pl);
        }
        if (c_si->parsed()) {
            si.seed_set = c_si->count("--seed") > 0 || std::getenv("CVFARM_SEED") != nullptr;
            return cmd_simulate(si);
        }
        if (c_re->parsed()) return cmd_report(report_path);
    } catch (const UsageError& e) {
        std::cerr << "usage error: " << e.what() << "\n";
        return 2;
    } catch (const cvf::StagedError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    }
    return 2;
}
