#include "cvf/pipeline.hpp"

#include <atomic>
#include <cmath>
#include <optional>
#include <random>
#include <thread>

#include "cvf/error.hpp"
#include "cvf/manipulator.hpp"

namespace cvf {

ScenarioConfig::ScenarioConfig() : panel(bundled_panel()) {}

ScenarioConfig default_scenario() { return {}; }

ScenarioConfig zero_noise_scenario() {
    ScenarioConfig cfg;
    cfg.name = "zero-noise";
    cfg.noise.depth_sigma = 0.0;
    cfg.noise.dropout = 0.0;
    cfg.noise.rough_position_sigma = 0.0;
    cfg.noise.pod_placement_sigma = 0.0;
    cfg.noise.foliage = false;
    return cfg;
}

RunSummary summarize(const std::vector<TrialRecord>& trials) {
    RunSummary s;
    for (const auto& t : trials) {
        if (!t.counted) continue;
        ++s.counted_trials;
        ++s.trials_by_kind[to_string(t.kind)];
        if (t.outcome.success) {
            ++s.successes;
            ++s.successes_by_kind[to_string(t.kind)];
        } else {
            ++s.failure_modes[to_string(t.outcome.mode)];
        }
    }
    s.success_rate = s.counted_trials ? static_cast<double>(s.successes) / s.counted_trials : 0.0;
    return s;
}

Pose insertion_tool_pose(const Pose& slot_pose, const SaplingPod& pod, double insert_depth,
                         double extra_out) {
    const double cup_depth = 0.035;  // bundled cup depth
    double offset = 0.5 * cup_depth + pod.height - insert_depth + extra_out;
    // Tool z into the cup; the roll about it is free, so pick the one that
    // keeps tool x on world +y, minimizing wrist travel from the arm's home.
    Quat flip(Eigen::AngleAxisd(M_PI, Vec3::UnitX()));
    Quat roll(Eigen::AngleAxisd(-M_PI_2, Vec3::UnitZ()));
    return slot_pose * Pose(flip * roll, Vec3(0, 0, offset));
}

Pose canonical_slot_frame(const Pose& estimate) {
    return Pose(Quat(frame_from_axis(estimate.rotation_matrix().col(2))), estimate.translation);
}

namespace {

struct Leg {
    Pose target;
    GripperState state;  // held while traversing the leg
};

Demonstration build_demo(const std::string& id, const Pose& start,
                         const std::vector<Leg>& legs) {
    Demonstration d;
    d.id = id;
    double t = 0.0;
    auto push = [&](const Pose& p, GripperState g) {
        d.poses.push_back(p);
        d.gripper.push_back(g);
        d.timestamps.push_back(t);
        t += 0.05;
    };
    push(start, legs.front().state);
    Pose cur = start;
    for (std::size_t li = 0; li < legs.size(); ++li) {
        const Leg& leg = legs[li];
        ScrewDisplacement s = screw_from_poses(cur, leg.target);
        double dp = translation_distance(cur, leg.target);
        double dr = rotation_angle(cur, leg.target);
        int n = std::max(6, static_cast<int>(std::ceil(std::max(dp / 0.02, dr / 0.15))));
        for (int i = 1; i < n; ++i)
            push(apply_screw(s, static_cast<double>(i) / n, cur), leg.state);
        // The knot itself carries the next leg's state so gripper events land
        // exactly on the demonstrated poses.
        GripperState knot = li + 1 < legs.size() ? legs[li + 1].state : leg.state;
        push(leg.target, knot);
        cur = leg.target;
    }
    d.validate();
    return d;
}

}  // namespace

Demonstration make_transplant_demo(const Pose& pod_pose, const Pose& slot_pose,
                                   const SaplingPod& pod, double insert_depth,
                                   double approach_standoff) {
    Pose grasp = pod_pose * pod.grasp_frame;
    Pose pre_grasp = grasp * Pose::from_translation(Vec3(0, 0, -0.08));
    Pose lift(grasp.rotation, grasp.translation + Vec3(0, 0, 0.10));
    Pose standoff = insertion_tool_pose(slot_pose, pod, insert_depth, approach_standoff);
    Pose insert = insertion_tool_pose(slot_pose, pod, insert_depth, 0.0);
    return build_demo("transplant-demo", pre_grasp,
                      {{grasp, GripperState::Open},
                       {lift, GripperState::Closed},
                       {standoff, GripperState::Closed},
                       {insert, GripperState::Closed},
                       {standoff, GripperState::Open}});
}

Demonstration make_harvest_demo(const Pose& slot_pose, const Pose& tray_pose,
                                const SaplingPod& pod, double insert_depth,
                                double approach_standoff) {
    Pose grasp = insertion_tool_pose(slot_pose, pod, insert_depth, 0.0);
    Pose standoff = insertion_tool_pose(slot_pose, pod, insert_depth, approach_standoff);
    Pose drop = tray_pose;
    Pose above(drop.rotation, drop.translation + Vec3(0, 0, 0.10));
    Pose retract(drop.rotation, drop.translation + Vec3(0, 0, 0.08));
    return build_demo("harvest-demo", standoff,
                      {{grasp, GripperState::Open},
                       {standoff, GripperState::Closed},
                       {above, GripperState::Closed},
                       {drop, GripperState::Closed},
                       {retract, GripperState::Open}});
}

Pose station_pose(const Vec3& at) {
    // Tool z tilted 0.6 rad from vertical toward the arm (a straight-down
    // grasp would exceed the wrist pitch budget), tool x on world +y.
    const double tilt = 0.6;
    Vec3 z(std::sin(tilt), 0.0, -std::cos(tilt));
    Mat3 R;
    R.col(0) = Vec3::UnitY();
    R.col(2) = z;
    R.col(1) = z.cross(Vec3::UnitY());
    return Pose(Quat(R), at);
}

Demonstration bundled_transplant_demo(const ScenarioConfig& cfg) {
    return make_transplant_demo(station_pose(cfg.pod_feeder), cfg.panel.slots.at(4).center,
                                cfg.pod, cfg.insert_depth, cfg.approach_standoff);
}

Demonstration bundled_harvest_demo(const ScenarioConfig& cfg) {
    return make_harvest_demo(cfg.panel.slots.at(4).center, station_pose(cfg.tray), cfg.pod,
                             cfg.insert_depth, cfg.approach_standoff);
}

namespace {

std::uint64_t mix(std::uint64_t a, std::uint64_t b) {
    a ^= b + 0x9e3779b97f4a7c15ULL + (a << 6) + (a >> 2);
    a *= 0xff51afd7ed558ccdULL;
    a ^= a >> 33;
    return a;
}

FailureMode mode_for_stage(const std::string& stage) {
    if (stage == "project" || stage == "select_mask" || stage == "deproject" ||
        stage == "fit" || stage == "render" || stage == "camera")
        return FailureMode::PerceptionFailure;
    return FailureMode::Unreachable;
}

// Everything fixed for the whole run: the segmented demonstrations and their
// ROI-extracted constraints against the canonical instance, plus the arm.
struct Assets {
    TransferableConstraint transplant;
    TransferableConstraint harvest;
    ManipulatorModel arm;
    VecX theta0;
    Pose pod_pose;   // pods always appear at the feeder
    Pose tray_pose;
};

Assets build_assets(const ScenarioConfig& cfg) {
    Assets a;
    a.pod_pose = station_pose(cfg.pod_feeder);
    a.tray_pose = station_pose(cfg.tray);
    const Pose& canon_slot = cfg.panel.slots.at(4).center;

    Demonstration demo_t = bundled_transplant_demo(cfg);
    TaskInstance inst_t;
    inst_t.kind = TaskKind::Transplant;
    inst_t.object_poses = {{"pod", a.pod_pose}, {"slot", canon_slot}};
    a.transplant = extract_roi(segment_demo(demo_t, cfg.segmentation), inst_t, cfg.roi_radius);

    Demonstration demo_h = bundled_harvest_demo(cfg);
    TaskInstance inst_h;
    inst_h.kind = TaskKind::Harvest;
    inst_h.object_poses = {{"slot", canon_slot}, {"tray", a.tray_pose}};
    a.harvest = extract_roi(segment_demo(demo_h, cfg.segmentation), inst_h, cfg.roi_radius);

    a.arm = arm_7dof();
    // Ready pose in front of the panel (EE near x = 0.53) so the approach
    // bridge never crosses the tubes.
    a.theta0 = VecX::Zero(7);
    a.theta0 << 0.0, 1.05, 0.0, -2.1, 0.0, 1.05, 0.0;
    return a;
}

struct JobResult {
    TrialRecord record;
    std::optional<RegistryEntry> new_entry;  // transplant success
    bool clear_occupancy = false;            // harvest attempted
};

}  // namespace

SlotPoseEstimate perceive_slot(const ScenarioConfig& cfg, const GrowPanel::Slot& slot,
                               std::uint64_t trial_seed) {
    std::mt19937_64 rng(trial_seed);
    std::normal_distribution<double> gauss(0.0, 1.0);
    Vec3 rough = slot.center.translation;
    for (int i = 0; i < 3; ++i) rough[i] += cfg.noise.rough_position_sigma * gauss(rng);

    Vec3 out = slot.out_axis();
    Vec3 side = slot.center.rotation_matrix().col(0);  // up-forward in the tilt plane
    Vec3 dir = std::cos(cfg.camera_tilt) * out + std::sin(cfg.camera_tilt) * side;
    Vec3 eye = rough + cfg.camera_standoff * dir;
    CameraModel cam = cfg.camera;
    cam.extrinsics = look_at(eye, rough);

    RenderOptions ropts;
    ropts.depth_sigma = cfg.noise.depth_sigma;
    ropts.dropout = cfg.noise.dropout;
    ropts.seed = mix(trial_seed, 0x7265ULL);
    RenderResult res = render_depth(cfg.panel, cam, ropts);

    BoxFitOptions bo = cfg.box_fit;
    bo.axis_prior = out;
    // Pick the cup mask whose deprojected centroid lies nearest the rough
    // prior; a single-pixel seed is brittle when the prior is off by more
    // than the crescent of the cup the camera actually sees.
    int best = -1;
    double best_d = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < res.slot_masks.size(); ++i) {
        if (res.slot_masks[i].pixel_count() < 20) continue;
        std::vector<Vec3> pts = deproject_mask(res.depth, res.slot_masks[i], cam);
        Vec3 centroid = Vec3::Zero();
        for (const Vec3& p : pts) centroid += p;
        centroid /= static_cast<double>(pts.size());
        double d = (centroid - rough).norm();
        if (d < best_d) {
            best_d = d;
            best = static_cast<int>(i);
        }
    }
    if (best < 0) throw StagedError("select_mask", "no cup mask near the rough prior");
    std::vector<Vec3> cloud = deproject_mask(res.depth, res.slot_masks[best], cam);

    // The raw bounding box seeds a fit of the cup model itself: bore radius
    // and depth are design constants, which pins down the lateral center a
    // single view cannot observe symmetrically.
    SlotPoseEstimate box = fit_bounding_box(cloud, bo);
    SlotPoseEstimate est = refine_cup_estimate(cloud, 0.5 * slot.diameter, slot.depth, out,
                                               box.pose.translation);
    est.pose = canonical_slot_frame(est.pose);
    return est;
}

namespace {

JobResult run_transplant_trial(const ScenarioConfig& cfg, const Assets& assets, int index,
                               const std::string& slot_id, bool counted) {
    JobResult job;
    job.record.index = index;
    job.record.kind = TaskKind::Transplant;
    job.record.slot_id = slot_id;
    job.record.counted = counted;
    std::mt19937_64 rng(mix(cfg.seed, 0x504fULL ^ static_cast<std::uint64_t>(index)));
    try {
        const GrowPanel::Slot& slot = cfg.panel.slot(slot_id);
        SlotPoseEstimate est =
            perceive_slot(cfg, slot, mix(cfg.seed, static_cast<std::uint64_t>(index)));
        job.record.estimate = est;

        // The pod seats in the feeder with a lateral tolerance, so the grasp
        // carries that offset through the whole insertion.
        SaplingPod pod = cfg.pod;
        if (cfg.noise.pod_placement_sigma > 0.0) {
            std::normal_distribution<double> g(0.0, cfg.noise.pod_placement_sigma);
            Pose seat = Pose::from_translation(Vec3(g(rng), g(rng), 0.0));
            pod.grasp_frame = seat.inverse() * cfg.pod.grasp_frame;
        }

        TaskInstance inst;
        inst.kind = TaskKind::Transplant;
        inst.object_poses = {{"pod", assets.pod_pose}, {"slot", est.pose}};
        TransferredPath path = transfer(assets.transplant, inst);
        JointPath jp = plan_task(assets.arm, assets.theta0, path, cfg.plan);
        job.record.outcome =
            check_transplant(jp, cfg.panel, pod, slot_id, cfg.adjudication);

        if (job.record.outcome.success) {
            RegistryEntry entry;
            entry.estimate = est;
            entry.timestamp = index;
            entry.occupied = true;
            // The pod stays where the gripper released it.
            entry.pod_pose = jp.points.back().achieved * pod.grasp_frame.inverse();
            for (std::size_t i = jp.points.size(); i-- > 1;)
                if (jp.points[i].gripper == GripperState::Open &&
                    jp.points[i - 1].gripper == GripperState::Closed) {
                    entry.pod_pose = jp.points[i].achieved * pod.grasp_frame.inverse();
                    break;
                }
            job.new_entry = entry;
        }
    } catch (const StagedError& e) {
        job.record.error = e.what();
        job.record.outcome = TrialOutcome::fail(TaskKind::Transplant, slot_id,
                                                mode_for_stage(e.stage()), e.what());
    }
    return job;
}

JobResult run_harvest_trial(const ScenarioConfig& cfg, const Assets& assets, int index,
                            const std::string& slot_id, const SlotRegistry& registry,
                            bool counted) {
    JobResult job;
    job.record.index = index;
    job.record.kind = TaskKind::Harvest;
    job.record.slot_id = slot_id;
    job.record.counted = counted;
    job.clear_occupancy = true;
    std::mt19937_64 rng(mix(cfg.seed, 0x4857ULL ^ static_cast<std::uint64_t>(index)));
    try {
        const RegistryEntry& entry = registry.lookup(slot_id);
        job.record.estimate = entry.estimate;

        TaskInstance inst;
        inst.kind = TaskKind::Harvest;
        inst.object_poses = {{"slot", entry.estimate.pose}, {"tray", assets.tray_pose}};
        TransferredPath path = transfer(assets.harvest, inst);
        JointPath jp = plan_task(assets.arm, assets.theta0, path, cfg.plan);

        std::vector<FoliageSphere> foliage;
        if (cfg.noise.foliage) {
            std::uniform_real_distribution<double> rad(cfg.noise.foliage_min,
                                                       cfg.noise.foliage_max);
            const GrowPanel::Slot& target = cfg.panel.slot(slot_id);
            for (const auto& s : cfg.panel.slots) {
                if (s.id == slot_id || !registry.occupied(s.id)) continue;
                if ((s.opening_center() - target.opening_center()).norm() >
                    1.2 * cfg.panel.inter_slot_spacing)
                    continue;
                FoliageSphere f;
                f.radius = rad(rng);
                f.center = s.opening_center() + cfg.noise.foliage_standoff * f.radius * s.out_axis();
                f.slot_id = s.id;
                foliage.push_back(f);
            }
        }
        job.record.outcome = check_harvest(jp, cfg.panel, cfg.pod, registry, slot_id, foliage,
                                           cfg.adjudication);
    } catch (const StagedError& e) {
        job.record.error = e.what();
        job.record.outcome = TrialOutcome::fail(TaskKind::Harvest, slot_id,
                                                mode_for_stage(e.stage()), e.what());
    }
    return job;
}

}  // namespace

RunReport run_pipeline(const ScenarioConfig& cfg, int jobs) {
    cfg.panel.validate();
    if (jobs < 1) jobs = 1;
    Assets assets = build_assets(cfg);

    RunReport report;
    report.scenario = cfg.name;
    report.seed = cfg.seed;

    SlotRegistry registry;
    int t_rem = cfg.transplant_trials;
    int h_rem = cfg.harvest_trials;
    int index = 0;
    int bootstrap_waves = 0;

    struct Planned {
        TaskKind kind;
        std::string slot_id;
        int index;
        bool counted;
    };

    while (t_rem > 0 || h_rem > 0) {
        std::vector<Planned> wave;
        auto free_slots = [&] {
            std::vector<std::string> v;
            for (const auto& s : cfg.panel.slots)
                if (!registry.occupied(s.id)) v.push_back(s.id);
            return v;
        };
        auto occupied_slots = [&] {
            std::vector<std::string> v;
            for (const auto& s : cfg.panel.slots)
                if (registry.occupied(s.id)) v.push_back(s.id);
            return v;
        };

        if (t_rem > 0 && !free_slots().empty()) {
            auto fs = free_slots();
            for (std::size_t i = 0; i < fs.size() && static_cast<int>(i) < t_rem; ++i)
                wave.push_back({TaskKind::Transplant, fs[i], index++, true});
            t_rem -= static_cast<int>(wave.size());
        } else if (h_rem > 0 && !occupied_slots().empty()) {
            auto os = occupied_slots();
            for (std::size_t i = 0; i < os.size() && static_cast<int>(i) < h_rem; ++i)
                wave.push_back({TaskKind::Harvest, os[i], index++, true});
            h_rem -= static_cast<int>(wave.size());
        } else if (h_rem > 0) {
            // No occupied slot left for the remaining harvests: replant off
            // the books so the harvest schedule can continue.
            if (++bootstrap_waves > 20) break;
            for (const auto& sid : free_slots()) {
                wave.push_back({TaskKind::Transplant, sid, index++, false});
                if (static_cast<int>(wave.size()) >= h_rem) break;
            }
            if (wave.empty()) break;
            ++report.work["bootstrap_waves"];
        } else if (t_rem > 0) {
            // Symmetric case: free slots by harvesting off the books.
            if (++bootstrap_waves > 20) break;
            for (const auto& sid : occupied_slots()) {
                wave.push_back({TaskKind::Harvest, sid, index++, false});
                if (static_cast<int>(wave.size()) >= t_rem) break;
            }
            if (wave.empty()) break;
            ++report.work["bootstrap_waves"];
        }

        // Trials in a wave touch distinct slots and only read the registry,
        // so they can run concurrently; results apply in wave order.
        std::vector<JobResult> results(wave.size());
        std::atomic<std::size_t> next{0};
        auto worker = [&] {
            for (;;) {
                std::size_t i = next.fetch_add(1);
                if (i >= wave.size()) return;
                const Planned& p = wave[i];
                results[i] = p.kind == TaskKind::Transplant
                                 ? run_transplant_trial(cfg, assets, p.index, p.slot_id,
                                                        p.counted)
                                 : run_harvest_trial(cfg, assets, p.index, p.slot_id,
                                                     registry, p.counted);
            }
        };
        int nthreads = std::min<int>(jobs, static_cast<int>(wave.size()));
        if (nthreads <= 1) {
            worker();
        } else {
            std::vector<std::thread> pool;
            for (int i = 0; i < nthreads; ++i) pool.emplace_back(worker);
            for (auto& th : pool) th.join();
        }

        for (auto& r : results) {
            if (r.new_entry) registry.entries[r.record.slot_id] = *r.new_entry;
            if (r.clear_occupancy) registry.entries[r.record.slot_id].occupied = false;
            ++report.work[r.record.kind == TaskKind::Transplant ? "transplants_run"
                                                                : "harvests_run"];
            report.trials.push_back(std::move(r.record));
        }
    }

    // Any harvest quota stranded by bootstrap failure is an honest failure.
    for (; h_rem > 0; --h_rem) {
        TrialRecord rec;
        rec.index = index++;
        rec.kind = TaskKind::Harvest;
        rec.outcome = TrialOutcome::fail(TaskKind::Harvest, "", FailureMode::Unreachable,
                                         "no occupied slot available");
        report.trials.push_back(rec);
    }

    report.summary = summarize(report.trials);
    return report;
}

}  // namespace cvf
