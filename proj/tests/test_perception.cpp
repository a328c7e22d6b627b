#include <doctest.h>

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>

#include "cvf/error.hpp"
#include "cvf/perception.hpp"
#include "test_util.hpp"

using namespace cvf;
using testutil::random_pose;
using testutil::random_unit;

TEST_CASE("project_point pinhole model") {
    CameraModel cam;

    SUBCASE("optical axis maps to the principal point") {
        auto p = project_point(cam, Vec3(0, 0, 1));
        CHECK(p.u == doctest::Approx(cam.cx));
        CHECK(p.v == doctest::Approx(cam.cy));
        CHECK(p.depth == doctest::Approx(1.0));
        CHECK(p.in_bounds);
    }

    SUBCASE("wide point flagged out of bounds, not clamped") {
        auto p = project_point(cam, Vec3(1, 0, 1));
        CHECK(p.u == doctest::Approx(cam.cx + 600.0));
        CHECK(!p.in_bounds);
    }

    SUBCASE("point behind the camera") {
        CHECK_THROWS_AS(project_point(cam, Vec3(0, 0, -1)), StagedError);
    }
}

TEST_CASE("deproject single principal-point pixel") {
    CameraModel cam;
    DepthImage depth;
    depth.width = cam.width;
    depth.height = cam.height;
    depth.depth.assign(static_cast<std::size_t>(cam.width) * cam.height, 0.0);
    depth.at(320, 240) = 1.0;
    Mask mask;
    mask.width = cam.width;
    mask.height = cam.height;
    mask.data.assign(depth.depth.size(), 0);
    mask.set(320, 240);

    auto cloud = deproject_mask(depth, mask, cam);
    REQUIRE(cloud.size() == 1);
    CHECK((cloud[0] - Vec3(0, 0, 1)).norm() < 1e-9);

    SUBCASE("all-invalid depth is an error") {
        depth.at(320, 240) = 0.0;
        CHECK_THROWS_AS(deproject_mask(depth, mask, cam), StagedError);
    }
}

TEST_CASE("project/deproject are mutual inverses over random pixels") {
    std::mt19937_64 rng(60);
    CameraModel cam;
    cam.extrinsics = random_pose(rng);
    std::uniform_int_distribution<int> du(0, cam.width - 1), dv(0, cam.height - 1);
    std::uniform_real_distribution<double> dz(0.2, 3.0);

    DepthImage depth;
    depth.width = cam.width;
    depth.height = cam.height;
    depth.depth.assign(static_cast<std::size_t>(cam.width) * cam.height, 0.0);
    Mask mask;
    mask.width = cam.width;
    mask.height = cam.height;
    mask.data.assign(depth.depth.size(), 0);

    std::vector<std::pair<int, int>> pixels;
    for (int i = 0; i < 500; ++i) {
        int u = du(rng), v = dv(rng);
        depth.at(u, v) = dz(rng);
        mask.set(u, v);
    }
    for (int v = 0; v < cam.height; ++v)
        for (int u = 0; u < cam.width; ++u)
            if (mask.contains(u, v)) pixels.push_back({u, v});

    auto cloud = deproject_mask(depth, mask, cam);
    REQUIRE(cloud.size() == pixels.size());
    for (std::size_t i = 0; i < cloud.size(); ++i) {
        auto p = project_point(cam, cloud[i]);
        CHECK(std::abs(p.u - pixels[i].first) < 0.5);
        CHECK(std::abs(p.v - pixels[i].second) < 0.5);
        CHECK(std::abs(p.depth - depth.at(pixels[i].first, pixels[i].second)) < 1e-6);
    }
}

TEST_CASE("select_mask") {
    auto make = [](int count) {
        Mask m;
        m.width = 100;
        m.height = 100;
        m.data.assign(10000, 0);
        for (int i = 0; i < count; ++i) m.data[i] = 255;
        return m;
    };
    // Nested masks both containing pixel (0,0): 500 vs 5000 pixels.
    std::vector<Mask> masks{make(5000), make(500)};

    SUBCASE("smallest containing mask wins") {
        CHECK(select_mask(masks, 0, 0).pixel_count() == 500);
    }
    SUBCASE("seed inside exactly one mask") {
        CHECK(select_mask(masks, 30, 30).pixel_count() == 5000);  // pixel 3030
    }
    SUBCASE("seed outside all masks") {
        CHECK_THROWS_AS(select_mask(masks, 99, 99), StagedError);
    }
    SUBCASE("deterministic on ties") {
        std::vector<Mask> tied{make(500), make(500)};
        CHECK(&select_mask(tied, 0, 0) == &tied[0]);
    }
}

namespace {

std::vector<Vec3> box_corners(const Vec3& extents, const Pose& T = Pose::identity()) {
    std::vector<Vec3> pts;
    for (int i = 0; i < 8; ++i)
        pts.push_back(T.transform_point(Vec3((i & 1 ? 0.5 : -0.5) * extents.x(),
                                             (i & 2 ? 0.5 : -0.5) * extents.y(),
                                             (i & 4 ? 0.5 : -0.5) * extents.z())));
    return pts;
}

std::vector<Vec3> cube_corners(const Pose& T = Pose::identity()) {
    return box_corners(Vec3(1, 1, 1), T);
}

}  // namespace

TEST_CASE("fit_bounding_box on cube corners") {
    BoxFitOptions opts;
    opts.min_points = 8;
    opts.reject_outliers = false;

    SUBCASE("axis-aligned unit cube") {
        auto est = fit_bounding_box(cube_corners(), opts);
        CHECK((est.extents - Vec3(1, 1, 1)).norm() < 1e-9);
        CHECK(est.pose.translation.norm() < 1e-9);
        // Axes are signed permutations of the identity.
        Mat3 R = est.pose.rotation_matrix();
        CHECK((R.cwiseAbs() * Vec3(1, 1, 1) - Vec3(1, 1, 1)).norm() < 1e-9);
    }

    SUBCASE("known rotation recovered up to box symmetry") {
        // Distinct extents so the principal axes are well determined.
        std::mt19937_64 rng(61);
        Vec3 extents(1.0, 0.6, 0.3);
        for (int i = 0; i < 20; ++i) {
            Pose T = random_pose(rng);
            auto est = fit_bounding_box(box_corners(extents, T), opts);
            std::array<double, 3> got{est.extents[0], est.extents[1], est.extents[2]};
            std::sort(got.begin(), got.end(), std::greater<>());
            CHECK((Vec3(got[0], got[1], got[2]) - extents).norm() < 1e-9);
            CHECK((est.pose.translation - T.translation).norm() < 1e-9);
            // Each recovered axis matches a column of T's rotation up to sign.
            Mat3 A = est.pose.rotation_matrix();
            Mat3 B = T.rotation_matrix();
            Mat3 D = (B.transpose() * A).cwiseAbs();
            for (int c = 0; c < 3; ++c) {
                CHECK(D.col(c).maxCoeff() == doctest::Approx(1.0).epsilon(1e-9));
            }
        }
    }

    SUBCASE("collinear points are degenerate and clamped") {
        std::vector<Vec3> line;
        for (int i = 0; i < 20; ++i) line.push_back(Vec3(0.01 * i, 0, 0));
        BoxFitOptions lo = opts;
        lo.min_points = 10;
        auto est = fit_bounding_box(line, lo);
        CHECK(est.degenerate);
        CHECK(est.extents[1] == doctest::Approx(lo.extent_floor));
        CHECK(est.extents[2] == doctest::Approx(lo.extent_floor));
    }

    SUBCASE("too few points") {
        BoxFitOptions strict;
        strict.min_points = 50;
        CHECK_THROWS_AS(fit_bounding_box(cube_corners(), strict), StagedError);
    }
}

TEST_CASE("fit_bounding_box equivariance and bounding property") {
    std::mt19937_64 rng(62);
    std::normal_distribution<double> g(0.0, 1.0);
    std::vector<Vec3> cloud;
    for (int i = 0; i < 400; ++i)
        cloud.push_back(Vec3(0.08 * g(rng), 0.03 * g(rng), 0.01 * g(rng)));

    BoxFitOptions opts;
    opts.reject_outliers = false;
    auto base = fit_bounding_box(cloud, opts);

    SUBCASE("every point is inside the reported box") {
        Mat3 R = base.pose.rotation_matrix();
        for (const auto& p : cloud) {
            Vec3 q = R.transpose() * (p - base.pose.translation);
            for (int i = 0; i < 3; ++i) CHECK(std::abs(q[i]) <= 0.5 * base.extents[i] + 1e-9);
        }
    }

    SUBCASE("rigidly moved clouds give rigidly moved boxes") {
        for (int t = 0; t < 20; ++t) {
            Pose T = random_pose(rng);
            std::vector<Vec3> moved;
            for (const auto& p : cloud) moved.push_back(T.transform_point(p));
            auto est = fit_bounding_box(moved, opts);
            CHECK((est.extents - base.extents).norm() < 1e-9);
            CHECK((est.pose.translation - T.transform_point(base.pose.translation)).norm() <
                  1e-9);
            Mat3 A = est.pose.rotation_matrix();
            Mat3 B = T.rotation_matrix() * base.pose.rotation_matrix();
            Mat3 D = (B.transpose() * A).cwiseAbs();
            for (int c = 0; c < 3; ++c) CHECK(D.col(c).maxCoeff() > 1.0 - 1e-9);
        }
    }
}

TEST_CASE("axis prior pins the box z-axis") {
    std::mt19937_64 rng(63);
    std::normal_distribution<double> g(0.0, 1.0);
    // Elongated cloud along a known direction.
    Vec3 dir = Vec3(1, 2, 0.5).normalized();
    std::vector<Vec3> cloud;
    for (int i = 0; i < 300; ++i) {
        Vec3 perp1 = dir.cross(Vec3::UnitZ()).normalized();
        Vec3 perp2 = dir.cross(perp1);
        cloud.push_back(0.1 * g(rng) * dir + 0.01 * g(rng) * perp1 + 0.01 * g(rng) * perp2);
    }
    BoxFitOptions opts;
    opts.reject_outliers = false;
    opts.axis_prior = dir;
    auto est = fit_bounding_box(cloud, opts);
    Vec3 z = est.pose.rotation_matrix().col(2);
    CHECK(z.dot(dir) > 0.99);
}

TEST_CASE("PGM round trips") {
    std::mt19937_64 rng(64);
    DepthImage img;
    img.width = 32;
    img.height = 16;
    img.depth.resize(32 * 16);
    std::uniform_real_distribution<double> dz(0.0, 4.0);
    for (auto& d : img.depth) d = std::round(dz(rng) * 1000.0) / 1000.0;

    std::string dpath = "/tmp/cvf_test_depth.pgm";
    save_depth_pgm(img, dpath);
    DepthImage back = load_depth_pgm(dpath);
    REQUIRE(back.depth.size() == img.depth.size());
    for (std::size_t i = 0; i < img.depth.size(); ++i)
        CHECK(back.depth[i] == doctest::Approx(img.depth[i]).epsilon(1e-12));

    Mask mask;
    mask.width = 32;
    mask.height = 16;
    mask.data.assign(32 * 16, 0);
    for (int i = 0; i < 100; ++i) mask.data[(i * 37) % mask.data.size()] = 255;
    std::string mpath = "/tmp/cvf_test_mask.pgm";
    save_mask_pgm(mask, mpath);
    Mask mback = load_mask_pgm(mpath);
    CHECK(mback.pixel_count() == mask.pixel_count());

    std::remove(dpath.c_str());
    std::remove(mpath.c_str());
}

TEST_CASE("camera validation") {
    CameraModel cam;
    cam.fx = -1;
    CHECK_THROWS_AS(cam.validate(), StagedError);
}
