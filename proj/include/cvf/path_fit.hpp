#pragma once

#include "cvf/screw.hpp"

namespace cvf {

struct PathDeviation {
    double position = 0.0;  // meters
    double rotation = 0.0;  // radians
    double tau = 0.0;       // path parameter of the nearest point
};

/// Nearest path parameter on the screw path from g_start, by golden-section
/// minimization of the position error over tau in [0, 1].
double nearest_path_parameter(const ScrewDisplacement& s, const Pose& g_start, const Vec3& query);

/// Position and rotation error of `query` against the constant-screw path,
/// both evaluated at the nearest path parameter.
PathDeviation deviation_from_screw(const ScrewDisplacement& s, const Pose& g_start,
                                   const Pose& query);

}  // namespace cvf
