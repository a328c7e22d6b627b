#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <string>
#include <sys/wait.h>

#include "cvf/error.hpp"
#include "cvf/formats.hpp"
#include "cvf/pipeline.hpp"
#include "cvf/render.hpp"
#include "test_util.hpp"

using namespace cvf;
using testutil::random_pose;

namespace {

namespace fs = std::filesystem;

fs::path tmp_dir() {
    fs::path dir = fs::temp_directory_path() / "cvf_formats_test";
    fs::create_directories(dir);
    return dir;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

int run_cmd(const std::string& cmd) {
    int rc = std::system((cmd + " >/dev/null 2>&1").c_str());
    return WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
}

bool pose_eq(const Pose& a, const Pose& b) {
    return a.translation == b.translation && a.rotation.coeffs() == b.rotation.coeffs();
}

Demonstration sample_demo() {
    std::mt19937_64 rng(11);
    Demonstration d;
    d.id = "sample";
    for (int i = 0; i < 20; ++i) {
        d.poses.push_back(random_pose(rng, 0.5));
        d.timestamps.push_back(0.1 * i);
        d.gripper.push_back(i < 10 ? GripperState::Open : GripperState::Closed);
    }
    return d;
}

}  // namespace

TEST_CASE("file digest is stable and content-sensitive") {
    fs::path p = tmp_dir() / "digest.txt";
    std::ofstream(p) << "hello";
    std::string d1 = file_digest(p.string());
    CHECK(d1.size() == 16);
    CHECK(d1 == file_digest(p.string()));
    std::ofstream(p) << "hello!";
    CHECK(d1 != file_digest(p.string()));
    CHECK_THROWS_AS(file_digest((tmp_dir() / "missing").string()), StagedError);
}

TEST_CASE("trajectory JSONL roundtrip and validation") {
    fs::path p = tmp_dir() / "demo.jsonl";
    Demonstration d = sample_demo();
    save_demo_jsonl(d, p.string());

    SUBCASE("load(save(x)) == x") {
        Demonstration r = load_demo_jsonl(p.string());
        REQUIRE(r.size() == d.size());
        for (std::size_t i = 0; i < d.size(); ++i) {
            CHECK(r.timestamps[i] == d.timestamps[i]);
            CHECK(r.gripper[i] == d.gripper[i]);
            CHECK(pose_eq(r.poses[i], d.poses[i]));
        }
    }

    SUBCASE("save is byte-stable") {
        std::string first = slurp(p);
        save_demo_jsonl(load_demo_jsonl(p.string()), p.string());
        CHECK(slurp(p) == first);
    }

    SUBCASE("non-increasing timestamps are a parse error with the line") {
        std::ofstream out(p);
        out << R"({"t":0,"position":[0,0,0],"orientation":[1,0,0,0],"gripper":"open"})" << "\n"
            << R"({"t":0,"position":[0,0,1],"orientation":[1,0,0,0],"gripper":"open"})" << "\n";
        out.close();
        try {
            load_demo_jsonl(p.string());
            FAIL("expected a parse error");
        } catch (const StagedError& e) {
            CHECK(e.stage() == "parse");
            CHECK(std::string(e.what()).find(":2") != std::string::npos);
        }
    }

    SUBCASE("non-unit quaternion beyond 1e-6 rejected, near-unit normalized") {
        std::ofstream out(p);
        out << R"({"t":0,"position":[0,0,0],"orientation":[1.1,0,0,0],"gripper":"open"})"
            << "\n";
        out.close();
        CHECK_THROWS_AS(load_demo_jsonl(p.string()), StagedError);

        std::ofstream out2(p);
        out2 << R"({"t":0,"position":[0,0,0],"orientation":[1.0000000001,0,0,0],"gripper":"open"})"
             << "\n";
        out2.close();
        Demonstration r = load_demo_jsonl(p.string());
        CHECK(r.poses[0].rotation.norm() == doctest::Approx(1.0).epsilon(1e-12));
    }
}

TEST_CASE("structured file roundtrips") {
    fs::path dir = tmp_dir();
    ScenarioConfig cfg = default_scenario();

    SUBCASE("segments") {
        ScrewSegmentSequence seq = segment_demo(bundled_transplant_demo(cfg));
        FitError fit;
        fs::path p = dir / "segments.json";
        save_segments_json(seq, fit, p.string());
        ScrewSegmentSequence r = load_segments_json(p.string());
        CHECK(r.source_demo_id == seq.source_demo_id);
        CHECK(r.breakpoint_indices == seq.breakpoint_indices);
        REQUIRE(r.segments.size() == seq.segments.size());
        for (std::size_t i = 0; i < seq.segments.size(); ++i) {
            CHECK(pose_eq(r.segments[i].start_pose, seq.segments[i].start_pose));
            CHECK(r.segments[i].screw.magnitude == seq.segments[i].screw.magnitude);
            CHECK(r.segments[i].screw.axis_direction == seq.segments[i].screw.axis_direction);
            CHECK(r.segments[i].gripper == seq.segments[i].gripper);
        }
        std::string bytes = slurp(p);
        save_segments_json(r, fit, p.string());
        CHECK(slurp(p) == bytes);
    }

    SUBCASE("instance, waypoints, model, camera") {
        std::mt19937_64 rng(3);
        TaskInstance inst;
        inst.kind = TaskKind::Harvest;
        inst.object_poses = {{"slot", random_pose(rng)}, {"tray", random_pose(rng)}};
        fs::path pi = dir / "instance.json";
        save_instance_json(inst, pi.string());
        TaskInstance ri = load_instance_json(pi.string());
        CHECK(ri.kind == inst.kind);
        CHECK(pose_eq(ri.object_poses["slot"], inst.object_poses["slot"]));
        CHECK(pose_eq(ri.object_poses["tray"], inst.object_poses["tray"]));

        TransferredPath tp;
        tp.waypoints = {{random_pose(rng), GripperState::Open},
                        {random_pose(rng), GripperState::Closed}};
        tp.bridge_starts = {1};
        fs::path pw = dir / "waypoints.json";
        save_waypoints_json(tp, pw.string());
        TransferredPath rw = load_waypoints_json(pw.string());
        REQUIRE(rw.waypoints.size() == 2);
        CHECK(pose_eq(rw.waypoints[1].pose, tp.waypoints[1].pose));
        CHECK(rw.waypoints[1].gripper == GripperState::Closed);
        CHECK(rw.bridge_starts == tp.bridge_starts);

        ManipulatorModel model = arm_7dof();
        fs::path pm = dir / "model.json";
        save_model_json(model, pm.string());
        ManipulatorModel rm = load_model_json(pm.string());
        CHECK(rm.name == model.name);
        REQUIRE(rm.dof() == model.dof());
        for (int i = 0; i < model.dof(); ++i) {
            CHECK(rm.joints[i].type == model.joints[i].type);
            CHECK(rm.joints[i].axis == model.joints[i].axis);
            CHECK(rm.joints[i].point == model.joints[i].point);
            CHECK(rm.joints[i].min == model.joints[i].min);
            CHECK(rm.joints[i].max == model.joints[i].max);
        }
        CHECK(pose_eq(rm.home, model.home));

        CameraModel cam = cfg.camera;
        cam.extrinsics = random_pose(rng);
        fs::path pc = dir / "camera.json";
        save_camera_json(cam, pc.string());
        CameraModel rc = load_camera_json(pc.string());
        CHECK(rc.fx == cam.fx);
        CHECK(rc.width == cam.width);
        CHECK(pose_eq(rc.extrinsics, cam.extrinsics));
    }

    SUBCASE("scenario") {
        fs::path p = dir / "scenario.json";
        save_scenario_json(cfg, p.string());
        ScenarioConfig r = load_scenario_json(p.string());
        CHECK(r.name == cfg.name);
        CHECK(r.seed == cfg.seed);
        CHECK(r.noise.depth_sigma == cfg.noise.depth_sigma);
        CHECK(r.noise.foliage == cfg.noise.foliage);
        CHECK(r.panel.slots.size() == cfg.panel.slots.size());
        CHECK(pose_eq(r.panel.slots[4].center, cfg.panel.slots[4].center));
        CHECK(r.plan.lambda == cfg.plan.lambda);
        CHECK(r.adjudication.insertion_threshold == cfg.adjudication.insertion_threshold);
        std::string bytes = slurp(p);
        save_scenario_json(r, p.string());
        CHECK(slurp(p) == bytes);
    }

    SUBCASE("run report") {
        ScenarioConfig small = zero_noise_scenario();
        small.transplant_trials = 2;
        small.harvest_trials = 2;
        RunReport rep = run_pipeline(small, 2);
        rep.input_digests["scenario"] = "0123456789abcdef";
        fs::path p = dir / "report.json";
        save_report_json(rep, p.string());
        RunReport r = load_report_json(p.string());
        CHECK(r.version == rep.version);
        CHECK(r.scenario == rep.scenario);
        CHECK(r.summary.successes == rep.summary.successes);
        CHECK(r.summary.failure_modes == rep.summary.failure_modes);
        CHECK(r.work == rep.work);
        CHECK(r.input_digests == rep.input_digests);
        REQUIRE(r.trials.size() == rep.trials.size());
        for (std::size_t i = 0; i < rep.trials.size(); ++i) {
            CHECK(r.trials[i].slot_id == rep.trials[i].slot_id);
            CHECK(r.trials[i].outcome.success == rep.trials[i].outcome.success);
            CHECK(r.trials[i].outcome.insertion_depth == rep.trials[i].outcome.insertion_depth);
            CHECK(pose_eq(r.trials[i].estimate.pose, rep.trials[i].estimate.pose));
        }
        std::string bytes = slurp(p);
        save_report_json(r, p.string());
        CHECK(slurp(p) == bytes);
    }

    SUBCASE("joint path") {
        JointPath jp;
        std::mt19937_64 rng(9);
        for (int i = 0; i < 3; ++i) {
            JointPathPoint pt;
            pt.config = VecX::LinSpaced(7, -1.0, 1.0 + i);
            pt.achieved = random_pose(rng);
            pt.deviation_p = 1e-4 * i;
            pt.deviation_r = 1e-3 * i;
            pt.gripper = GripperState::Closed;
            jp.points.push_back(pt);
        }
        jp.waypoint_indices = {0, 2};
        fs::path p = dir / "joint_path.json";
        save_joint_path_json(jp, p.string());
        JointPath r = load_joint_path_json(p.string());
        REQUIRE(r.points.size() == 3);
        CHECK(r.points[2].config == jp.points[2].config);
        CHECK(pose_eq(r.points[1].achieved, jp.points[1].achieved));
        CHECK(r.points[1].deviation_p == jp.points[1].deviation_p);
        CHECK(r.waypoint_indices == jp.waypoint_indices);
    }

    SUBCASE("malformed input names the file") {
        fs::path p = dir / "broken.json";
        std::ofstream(p) << "{ not json";
        try {
            load_scenario_json(p.string());
            FAIL("expected a parse error");
        } catch (const StagedError& e) {
            CHECK(e.stage() == "parse");
            CHECK(std::string(e.what()).find("broken.json") != std::string::npos);
        }
    }
}

TEST_CASE("cvfarm command-line interface") {
    const std::string bin = CVFARM_BIN;
    const std::string data = DATA_DIR;
    fs::path dir = tmp_dir();

    SUBCASE("segment/transfer/plan chain, deterministic bytes") {
        fs::path seg = dir / "seg.json";
        fs::path wp = dir / "wp.json";
        fs::path jp = dir / "jp.json";
        CHECK(run_cmd(bin + " segment " + data + "/demos/transplant.jsonl --out " +
                      seg.string()) == 0);
        std::string seg_bytes = slurp(seg);
        CHECK(run_cmd(bin + " segment " + data + "/demos/transplant.jsonl --out " +
                      seg.string()) == 0);
        CHECK(slurp(seg) == seg_bytes);

        CHECK(run_cmd(bin + " transfer " + seg.string() + " " + data +
                      "/demos/transplant_instance.json --out " + wp.string()) == 0);
        CHECK(run_cmd(bin + " plan " + data + "/models/arm_7dof.json " + wp.string() +
                      " --theta0 0 1.05 0 -2.1 0 1.05 0 --out " + jp.string()) == 0);
        JointPath path = load_joint_path_json(jp.string());
        CHECK(path.points.size() > 10);
        CHECK(path.max_deviation_p() <= 0.002);
    }

    SUBCASE("usage and staged-failure exit codes") {
        CHECK(run_cmd(bin) == 2);
        CHECK(run_cmd(bin + " segment") == 2);
        CHECK(run_cmd(bin + " segment " + (dir / "missing.jsonl").string()) == 3);

        fs::path one = dir / "one.jsonl";
        std::ofstream(one)
            << R"({"t":0,"position":[0,0,0],"orientation":[1,0,0,0],"gripper":"open"})" << "\n";
        CHECK(run_cmd(bin + " segment " + one.string() + " --out " +
                      (dir / "x.json").string()) == 2);
    }

    SUBCASE("simulate emits a reproducible report") {
        ScenarioConfig small = zero_noise_scenario();
        small.transplant_trials = 2;
        small.harvest_trials = 2;
        fs::path sc = dir / "small.json";
        save_scenario_json(small, sc.string());
        fs::path r1 = dir / "r1.json";
        fs::path r2 = dir / "r2.json";
        CHECK(run_cmd(bin + " simulate --scenario " + sc.string() + " --jobs 2 --out " +
                      r1.string()) == 0);
        CHECK(run_cmd(bin + " simulate --scenario " + sc.string() + " --jobs 1 --out " +
                      r2.string()) == 0);
        CHECK(slurp(r1) == slurp(r2));
        CHECK(run_cmd(bin + " report " + r1.string()) == 0);
        RunReport rep = load_report_json(r1.string());
        CHECK(rep.summary.successes == rep.summary.counted_trials);
        CHECK(rep.input_digests.count("scenario") == 1);
    }

    SUBCASE("perception inputs match a precomputed instance") {
        // Render a view of the canonical slot and save the raw sensor files.
        ScenarioConfig cfg = default_scenario();
        const auto& slot = cfg.panel.slots.at(4);
        Vec3 rough = slot.center.translation;
        Vec3 dir_view = std::cos(cfg.camera_tilt) * slot.out_axis() +
                        std::sin(cfg.camera_tilt) * slot.center.rotation_matrix().col(0);
        CameraModel cam = cfg.camera;
        cam.extrinsics = look_at(rough + cfg.camera_standoff * dir_view, rough);
        RenderOptions ro;
        ro.depth_sigma = 0.001;
        ro.seed = 17;
        RenderResult res = render_depth(cfg.panel, cam, ro);

        fs::path depth = dir / "depth.pgm";
        fs::path camf = dir / "cam.json";
        save_depth_pgm(res.depth, depth.string());
        save_camera_json(cam, camf.string());
        std::string mask_flags;
        for (std::size_t i = 0; i < res.slot_masks.size(); ++i) {
            fs::path m = dir / ("mask" + std::to_string(i) + ".pgm");
            save_mask_pgm(res.slot_masks[i], m.string());
            mask_flags += " --mask " + m.string();
        }

        fs::path seg = dir / "seg.json";
        REQUIRE(run_cmd(bin + " segment " + data + "/demos/transplant.jsonl --out " +
                        seg.string()) == 0);

        // Perception path: the estimate replaces the instance's slot pose.
        std::ostringstream rough_flag;
        rough_flag.precision(17);
        rough_flag << " --rough " << rough.x() << " " << rough.y() << " " << rough.z();
        fs::path wp_est = dir / "wp_est.json";
        REQUIRE(run_cmd(bin + " transfer " + seg.string() + " " + data +
                        "/demos/transplant_instance.json --depth " + depth.string() +
                        " --camera " + camf.string() + mask_flags + rough_flag.str() +
                        " --out " + wp_est.string()) == 0);

        // Reference path: an instance file that already holds the estimate
        // the library computes from the same sensor files.
        DepthImage di = load_depth_pgm(depth.string());
        std::vector<Mask> masks;
        for (std::size_t i = 0; i < res.slot_masks.size(); ++i)
            masks.push_back(load_mask_pgm((dir / ("mask" + std::to_string(i) + ".pgm")).string()));
        SlotPoseEstimate est = estimate_slot_pose(di, masks, load_camera_json(camf.string()),
                                                  rough);
        TaskInstance inst = load_instance_json((data + "/demos/transplant_instance.json"));
        inst.object_poses["slot"] = est.pose;
        fs::path inst_est = dir / "inst_est.json";
        save_instance_json(inst, inst_est.string());
        fs::path wp_ref = dir / "wp_ref.json";
        REQUIRE(run_cmd(bin + " transfer " + seg.string() + " " + inst_est.string() +
                        " --out " + wp_ref.string()) == 0);

        CHECK(slurp(wp_est) == slurp(wp_ref));
    }
}
