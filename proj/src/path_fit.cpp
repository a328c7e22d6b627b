#include "cvf/path_fit.hpp"

#include <cmath>

namespace cvf {

double nearest_path_parameter(const ScrewDisplacement& s, const Pose& g_start, const Vec3& query) {
    if (s.degenerate) return 0.0;

    auto cost = [&](double tau) {
        return (apply_screw(s, tau, g_start).translation - query).squaredNorm();
    };

    const double phi = (std::sqrt(5.0) - 1.0) / 2.0;
    double a = 0.0, b = 1.0;
    double c = b - phi * (b - a);
    double d = a + phi * (b - a);
    double fc = cost(c), fd = cost(d);
    for (int it = 0; it < 60 && (b - a) > 1e-9; ++it) {
        if (fc < fd) {
            b = d;
            d = c;
            fd = fc;
            c = b - phi * (b - a);
            fc = cost(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + phi * (b - a);
            fd = cost(d);
        }
    }
    double tau = 0.5 * (a + b);
    // The endpoints can beat the interior bracket on monotone costs.
    if (cost(0.0) < cost(tau)) tau = 0.0;
    if (cost(1.0) < cost(tau)) tau = 1.0;
    return tau;
}

PathDeviation deviation_from_screw(const ScrewDisplacement& s, const Pose& g_start,
                                   const Pose& query) {
    PathDeviation dev;
    dev.tau = nearest_path_parameter(s, g_start, query.translation);
    Pose on_path = apply_screw(s, dev.tau, g_start);
    dev.position = (on_path.translation - query.translation).norm();
    dev.rotation = rotation_angle(on_path, query);
    return dev;
}

}  // namespace cvf
