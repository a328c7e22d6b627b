#pragma once

#include <random>

#include "cvf/pose.hpp"

namespace cvf::testutil {

inline Pose random_pose(std::mt19937_64& rng, double t_scale = 1.0) {
    std::normal_distribution<double> gauss(0.0, 1.0);
    std::uniform_real_distribution<double> uni(-t_scale, t_scale);
    Quat q(gauss(rng), gauss(rng), gauss(rng), gauss(rng));
    q.normalize();
    return Pose(q, Vec3(uni(rng), uni(rng), uni(rng)));
}

inline Vec3 random_unit(std::mt19937_64& rng) {
    std::normal_distribution<double> gauss(0.0, 1.0);
    Vec3 v(gauss(rng), gauss(rng), gauss(rng));
    return v.normalized();
}

}  // namespace cvf::testutil
