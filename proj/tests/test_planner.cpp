#include <doctest.h>

#include <cmath>
#include <random>

#include "cvf/error.hpp"
#include "cvf/planner.hpp"

using namespace cvf;

namespace {

// Closed-form planar 2R inverse kinematics (unit links); returns the two
// elbow branches.
std::vector<VecX> ik_2r(const Vec3& target) {
    std::vector<VecX> sols;
    double x = target.x(), y = target.y();
    double r2 = x * x + y * y;
    double c2 = (r2 - 2.0) / 2.0;
    if (std::abs(c2) > 1.0) return sols;
    for (double sign : {1.0, -1.0}) {
        double t2 = sign * std::acos(std::clamp(c2, -1.0, 1.0));
        double t1 = std::atan2(y, x) - std::atan2(std::sin(t2), 1.0 + std::cos(t2));
        VecX t(2);
        t << std::remainder(t1, 2 * M_PI), std::remainder(t2, 2 * M_PI);
        sols.push_back(t);
    }
    return sols;
}

}  // namespace

TEST_CASE("single-waypoint no-op plan") {
    ManipulatorModel m = planar_2r();
    VecX t0(2);
    t0 << 0.5, -0.7;
    auto path = follow_screw_path(m, t0, std::vector<Pose>{forward_kinematics(m, t0)});
    REQUIRE(path.points.size() == 1);
    CHECK((path.points[0].config - t0).norm() == doctest::Approx(0.0));
    CHECK(path.max_deviation_p() == doctest::Approx(0.0));
}

TEST_CASE("2R straight-line reach matches the closed-form IK oracle") {
    std::mt19937_64 rng(50);
    ManipulatorModel m = planar_2r();
    std::uniform_real_distribution<double> uni(-0.4, 0.4);
    for (int trial = 0; trial < 10; ++trial) {
        VecX t0(2);
        t0 << 0.4 + uni(rng), -0.9 + uni(rng);
        Pose start = forward_kinematics(m, t0);
        Vec3 offset(uni(rng) * 0.125, uni(rng) * 0.125, 0.0);
        Pose goal = start;
        goal.translation += offset;  // keep orientation: planar translation
        if (goal.translation.head<2>().norm() > 1.9) continue;

        PlanOptions opts;
        opts.position_only = true;  // 2R cannot hold orientation while translating
        auto path = follow_screw_path(m, t0, std::vector<Pose>{start, goal}, opts);
        const VecX& tf = path.points.back().config;
        CHECK((forward_kinematics(m, tf).translation - goal.translation).norm() < 1e-4);

        // Nearest oracle branch agrees.
        auto sols = ik_2r(goal.translation);
        REQUIRE(!sols.empty());
        double best = 1e9;
        for (const auto& s : sols) best = std::min(best, (s - tf).norm());
        CHECK(best < 1e-3);
    }
}

TEST_CASE("unreachable target raises the iteration-cap error") {
    ManipulatorModel m = planar_2r();
    VecX t0(2);
    t0 << 0.3, -0.5;
    Pose start = forward_kinematics(m, t0);
    Pose goal = Pose::from_translation(Vec3(3.0, 0.0, 0.0));
    PlanOptions opts;
    opts.max_step_p = 0.01;  // coarse steps keep this case fast
    opts.position_only = true;
    CHECK_THROWS_AS(follow_screw_path(m, t0, std::vector<Pose>{start, goal}, opts), StagedError);
}

TEST_CASE("start tolerance is enforced") {
    ManipulatorModel m = planar_2r();
    VecX t0(2);
    t0 << 0.3, -0.5;
    Pose far = forward_kinematics(m, t0);
    far.translation += Vec3(0.05, 0, 0);
    CHECK_THROWS_AS(follow_screw_path(m, t0, std::vector<Pose>{far}), StagedError);
}

TEST_CASE("7-DOF multi-waypoint plan stays on the screw paths") {
    ManipulatorModel m = arm_7dof();
    VecX t0 = VecX::Zero(7);
    t0 << 0.0, 0.4, 0.0, -0.8, 0.0, 0.4, 0.0;
    Pose start = forward_kinematics(m, t0);

    std::vector<Pose> wps{start,
                          start * Pose::from_translation(Vec3(0.0, 0.0, 0.05)),
                          start * Pose::from_axis_angle(Vec3::UnitZ(), 0.3,
                                                        Vec3(0.05, 0.03, 0.05))};
    auto path = follow_screw_path(m, t0, wps);
    PlanOptions opts;
    CHECK(path.max_deviation_p() <= opts.path_tol_p);
    CHECK(path.max_deviation_r() <= opts.path_tol_r);
    CHECK(path.waypoint_indices.size() == wps.size());

    // Soundness: recorded achieved poses reproduce under FK.
    for (const auto& pt : path.points) {
        Pose g = forward_kinematics(m, pt.config);
        CHECK(translation_distance(g, pt.achieved) == doctest::Approx(0.0));
        CHECK(m.within_limits(pt.config));
    }
}

TEST_CASE("planner determinism") {
    ManipulatorModel m = arm_7dof();
    VecX t0 = VecX::Zero(7);
    t0 << 0.1, 0.5, -0.1, -0.9, 0.2, 0.3, 0.0;
    Pose start = forward_kinematics(m, t0);
    std::vector<Pose> wps{start, start * Pose::from_translation(Vec3(0.02, -0.04, 0.06))};
    auto a = follow_screw_path(m, t0, wps);
    auto b = follow_screw_path(m, t0, wps);
    REQUIRE(a.points.size() == b.points.size());
    for (std::size_t i = 0; i < a.points.size(); ++i)
        CHECK((a.points[i].config - b.points[i].config).norm() == 0.0);
}

TEST_CASE("plan_task prepends the approach and carries gripper events") {
    ManipulatorModel m = arm_7dof();
    VecX t0 = VecX::Zero(7);
    t0 << 0.0, 0.4, 0.0, -0.8, 0.0, 0.4, 0.0;
    Pose start = forward_kinematics(m, t0);

    TransferredPath tp;
    tp.waypoints = {{start * Pose::from_translation(Vec3(0.0, 0.0, 0.02)), GripperState::Open},
                    {start * Pose::from_translation(Vec3(0.03, 0.0, 0.02)), GripperState::Closed},
                    {start * Pose::from_translation(Vec3(0.03, 0.04, 0.02)), GripperState::Closed}};
    auto path = plan_task(m, t0, tp);
    REQUIRE(path.waypoint_indices.size() == 4);  // approach start + 3 waypoints
    CHECK(path.points[path.waypoint_indices[1]].gripper == GripperState::Open);
    CHECK(path.points[path.waypoint_indices[2]].gripper == GripperState::Closed);
    CHECK(path.points.back().gripper == GripperState::Closed);
}
