#include "cvf/perception.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>

#include "cvf/error.hpp"
#include "cvf/panel.hpp"

namespace cvf {

void CameraModel::validate() const {
    if (!(fx > 0.0) || !(fy > 0.0)) throw StagedError("camera", "focal lengths must be positive");
    if (!(cx > 0.0 && cx < width) || !(cy > 0.0 && cy < height))
        throw StagedError("camera", "principal point outside the image");
}

std::size_t Mask::pixel_count() const {
    return static_cast<std::size_t>(
        std::count_if(data.begin(), data.end(), [](std::uint8_t p) { return p != 0; }));
}

PixelProjection project_point(const CameraModel& cam, const Vec3& point) {
    Vec3 pc = cam.extrinsics.inverse().transform_point(point);
    if (pc.z() <= 1e-9) throw StagedError("project", "point at or behind the camera");
    PixelProjection out;
    out.u = cam.fx * pc.x() / pc.z() + cam.cx;
    out.v = cam.fy * pc.y() / pc.z() + cam.cy;
    out.depth = pc.z();
    int ui = static_cast<int>(std::lround(out.u));
    int vi = static_cast<int>(std::lround(out.v));
    out.in_bounds = ui >= 0 && vi >= 0 && ui < cam.width && vi < cam.height;
    return out;
}

std::vector<Vec3> deproject_mask(const DepthImage& depth, const Mask& mask,
                                 const CameraModel& cam) {
    if (depth.width != cam.width || depth.height != cam.height || mask.width != depth.width ||
        mask.height != depth.height)
        throw StagedError("deproject", "image/mask/camera dimensions disagree");
    std::vector<Vec3> cloud;
    for (int v = 0; v < depth.height; ++v) {
        for (int u = 0; u < depth.width; ++u) {
            if (!mask.contains(u, v)) continue;
            double z = depth.at(u, v);
            if (z <= 0.0) continue;
            Vec3 pc((u - cam.cx) * z / cam.fx, (v - cam.cy) * z / cam.fy, z);
            cloud.push_back(cam.extrinsics.transform_point(pc));
        }
    }
    if (cloud.empty()) throw StagedError("deproject", "no masked pixel has valid depth");
    return cloud;
}

const Mask& select_mask(const std::vector<Mask>& masks, double seed_u, double seed_v) {
    if (masks.empty()) throw StagedError("select_mask", "no masks given");
    int u = static_cast<int>(std::lround(seed_u));
    int v = static_cast<int>(std::lround(seed_v));
    const Mask* best = nullptr;
    std::size_t best_count = 0;
    for (const auto& m : masks) {
        if (!m.contains(u, v)) continue;
        std::size_t c = m.pixel_count();
        if (!best || c < best_count) {
            best = &m;
            best_count = c;
        }
    }
    if (!best) throw StagedError("select_mask", "no mask contains the seed pixel");
    return *best;
}

namespace {

std::vector<Vec3> reject_outliers(const std::vector<Vec3>& cloud, int knn, double nsigma,
                                  std::size_t min_keep) {
    // Deterministic stride subsample bounds the O(N^2) neighbor search.
    const std::size_t cap = 4000;
    std::vector<Vec3> pts;
    if (cloud.size() > cap) {
        std::size_t stride = (cloud.size() + cap - 1) / cap;
        for (std::size_t i = 0; i < cloud.size(); i += stride) pts.push_back(cloud[i]);
    } else {
        pts = cloud;
    }

    const std::size_t n = pts.size();
    std::vector<double> mean_dist(n);
    std::vector<double> d2(n);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) d2[j] = (pts[i] - pts[j]).squaredNorm();
        std::size_t k = std::min<std::size_t>(knn + 1, n);
        std::nth_element(d2.begin(), d2.begin() + (k - 1), d2.end());
        double acc = 0.0;
        for (std::size_t j = 0; j < k; ++j) acc += std::sqrt(d2[j]);
        mean_dist[i] = acc / std::max<std::size_t>(k - 1, 1);
    }
    double mu = std::accumulate(mean_dist.begin(), mean_dist.end(), 0.0) / n;
    double var = 0.0;
    for (double d : mean_dist) var += (d - mu) * (d - mu);
    double sigma = std::sqrt(var / n);
    double cutoff = mu + nsigma * sigma;

    std::vector<Vec3> kept;
    for (std::size_t i = 0; i < n; ++i)
        if (mean_dist[i] <= cutoff) kept.push_back(pts[i]);
    if (kept.size() < min_keep) return pts;
    return kept;
}

Vec3 canonical_sign(const Vec3& v) {
    int imax = 0;
    for (int i = 1; i < 3; ++i)
        if (std::abs(v[i]) > std::abs(v[imax])) imax = i;
    return v[imax] < 0.0 ? Vec3(-v) : v;
}

}  // namespace

SlotPoseEstimate fit_bounding_box(const std::vector<Vec3>& cloud, const BoxFitOptions& opts) {
    if (static_cast<int>(cloud.size()) < opts.min_points)
        throw StagedError("fit", "too few points (" + std::to_string(cloud.size()) + " < " +
                                     std::to_string(opts.min_points) + ")");

    std::vector<Vec3> pts = opts.reject_outliers
                                ? reject_outliers(cloud, opts.knn, opts.outlier_sigma,
                                                  static_cast<std::size_t>(opts.min_points))
                                : cloud;

    Vec3 centroid = Vec3::Zero();
    for (const auto& p : pts) centroid += p;
    centroid /= static_cast<double>(pts.size());

    Mat3 cov = Mat3::Zero();
    for (const auto& p : pts) {
        Vec3 d = p - centroid;
        cov += d * d.transpose();
    }
    cov /= static_cast<double>(pts.size());

    Eigen::SelfAdjointEigenSolver<Mat3> eig(cov);  // eigenvalues ascending
    Vec3 evals = eig.eigenvalues();
    Mat3 evecs = eig.eigenvectors();

    Vec3 ax, ay, az;
    if (opts.axis_prior) {
        Vec3 prior = opts.axis_prior->normalized();
        int iz = 0;
        for (int i = 1; i < 3; ++i)
            if (std::abs(evecs.col(i).dot(prior)) > std::abs(evecs.col(iz).dot(prior))) iz = i;
        az = evecs.col(iz);
        if (az.dot(prior) < 0.0) az = -az;
        // Remaining two by descending variance.
        int rest[2], r = 0;
        for (int i = 2; i >= 0; --i)
            if (i != iz) rest[r++] = i;
        ax = canonical_sign(evecs.col(rest[0]));
        ay = az.cross(ax);
    } else {
        ax = canonical_sign(evecs.col(2));
        ay = canonical_sign(evecs.col(1));
        az = ax.cross(ay);
    }

    Mat3 R;
    R.col(0) = ax;
    R.col(1) = ay;
    R.col(2) = az;

    Vec3 lo = Vec3::Constant(std::numeric_limits<double>::infinity());
    Vec3 hi = -lo;
    for (const auto& p : pts) {
        Vec3 q = R.transpose() * (p - centroid);
        lo = lo.cwiseMin(q);
        hi = hi.cwiseMax(q);
    }

    SlotPoseEstimate est;
    est.extents = hi - lo;
    for (int i = 0; i < 3; ++i) {
        if (est.extents[i] < opts.extent_floor) {
            est.extents[i] = opts.extent_floor;
            est.degenerate = true;
        }
    }
    Vec3 center_local = 0.5 * (lo + hi);
    est.pose = Pose(Quat(R), centroid + R * center_local);
    est.point_count = static_cast<int>(pts.size());

    double acc = 0.0;
    Vec3 half = 0.5 * est.extents;
    for (const auto& p : pts) {
        Vec3 q = R.transpose() * (p - est.pose.translation);
        double dist = std::numeric_limits<double>::infinity();
        for (int i = 0; i < 3; ++i) dist = std::min(dist, half[i] - std::abs(q[i]));
        acc += dist * dist;
    }
    est.residual = std::sqrt(acc / pts.size());
    (void)evals;
    return est;
}

SlotPoseEstimate estimate_slot_pose(const DepthImage& depth, const std::vector<Mask>& masks,
                                    const CameraModel& cam, const Vec3& rough_position,
                                    const BoxFitOptions& opts) {
    cam.validate();
    PixelProjection seed = project_point(cam, rough_position);
    if (!seed.in_bounds) throw StagedError("project", "rough position projects outside the image");
    const Mask& mask = select_mask(masks, seed.u, seed.v);
    std::vector<Vec3> cloud = deproject_mask(depth, mask, cam);
    return fit_bounding_box(cloud, opts);
}

namespace {

// Unsigned distance from a point to the cup surface (bore wall plus bottom
// disc) for a cup centered at c, axis a, mid-depth origin.
double cup_surface_distance(const Vec3& p, const Vec3& c, const Vec3& a, double r, double depth) {
    Vec3 rel = p - c;
    double s = rel.dot(a);
    double l = (rel - s * a).norm();
    double half = 0.5 * depth;
    double beyond = std::max(std::abs(s) - half, 0.0);
    double wall = std::hypot(beyond, l - r);
    double bottom = std::hypot(s + half, std::max(l - r, 0.0));
    return std::min(wall, bottom);
}

}  // namespace

SlotPoseEstimate refine_cup_estimate(const std::vector<Vec3>& cloud, double bore_radius,
                                     double depth, const Vec3& axis_prior,
                                     const Vec3& center_seed, const CupRefineOptions& opts) {
    if (static_cast<int>(cloud.size()) < opts.min_wall_points)
        throw StagedError("fit", "too few points for the cup fit");
    Vec3 prior = axis_prior.normalized();
    Vec3 a = prior;
    Vec3 c = center_seed;

    // Gauss-Newton over center (3) and axis tilt (2) with numeric Jacobians;
    // points far off the model are treated as clutter and skipped.
    const double h = 1e-5;
    double rms = 0.0;
    for (int it = 0; it < opts.iterations; ++it) {
        Vec3 e0 = a.unitOrthogonal();
        Vec3 e1 = a.cross(e0);
        auto evaluate = [&](const Eigen::Matrix<double, 5, 1>& d, const Vec3& p) {
            Vec3 cc = c + d[0] * e0 + d[1] * e1 + d[2] * a;
            Vec3 aa = (a + d[3] * e0 + d[4] * e1).normalized();
            return cup_surface_distance(p, cc, aa, bore_radius, depth);
        };
        Eigen::Matrix<double, 5, 5> H = Eigen::Matrix<double, 5, 5>::Zero();
        Eigen::Matrix<double, 5, 1> g = Eigen::Matrix<double, 5, 1>::Zero();
        int used = 0;
        double acc = 0.0;
        for (const Vec3& p : cloud) {
            double rho = cup_surface_distance(p, c, a, bore_radius, depth);
            // Generous gate while the seed is coarse, then tighten.
            double gate = it < 4 ? 0.02 : opts.wall_band + 0.003;
            if (rho > gate) continue;
            Eigen::Matrix<double, 5, 1> J;
            for (int k = 0; k < 5; ++k) {
                Eigen::Matrix<double, 5, 1> d = Eigen::Matrix<double, 5, 1>::Zero();
                d[k] = h;
                J[k] = (evaluate(d, p) - rho) / h;
            }
            H += J * J.transpose();
            g += J * rho;
            acc += rho * rho;
            ++used;
        }
        if (used < opts.min_wall_points)
            throw StagedError("fit", "too few inlier points for the cup fit");
        rms = std::sqrt(acc / used);
        // Anchor the tilt to the prior axis; pull strength scales with the
        // data term so the prior stays soft on dense clouds.
        double w = opts.axis_prior_weight * used * 1e-4;
        Vec3 pull = prior - prior.dot(a) * a;
        H(3, 3) += w;
        H(4, 4) += w;
        g[3] -= w * pull.dot(e0);
        g[4] -= w * pull.dot(e1);
        H.diagonal().array() += 1e-8;
        Eigen::Matrix<double, 5, 1> step = H.ldlt().solve(-g);
        c += step[0] * e0 + step[1] * e1 + step[2] * a;
        a = (a + step[3] * e0 + step[4] * e1).normalized();
        if (a.dot(prior) < 0.0) a = -a;
        if (step.norm() < 1e-10) break;
    }

    SlotPoseEstimate est;
    est.pose = Pose(Quat(frame_from_axis(a)), c);
    est.extents = Vec3(2.0 * bore_radius, 2.0 * bore_radius, depth);
    est.point_count = static_cast<int>(cloud.size());
    est.residual = rms;
    return est;
}

// --- PGM I/O ---------------------------------------------------------------

namespace {

void read_pgm_header(std::ifstream& in, const std::string& path, int& w, int& h, int& maxval) {
    std::string magic;
    in >> magic;
    if (magic != "P5") throw StagedError("io", path + ": not a binary PGM (P5)");
    auto next_token = [&](int& out) {
        // Skip whitespace and '#' comment lines.
        for (;;) {
            int c = in.peek();
            if (c == '#') {
                std::string line;
                std::getline(in, line);
            } else if (std::isspace(c)) {
                in.get();
            } else {
                break;
            }
        }
        if (!(in >> out)) throw StagedError("io", path + ": malformed PGM header");
    };
    next_token(w);
    next_token(h);
    next_token(maxval);
    in.get();  // single whitespace before raster
}

}  // namespace

void save_depth_pgm(const DepthImage& img, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw StagedError("io", "cannot write " + path);
    out << "P5\n" << img.width << " " << img.height << "\n65535\n";
    for (double d : img.depth) {
        long mm = std::lround(d * 1000.0);
        mm = std::clamp(mm, 0L, 65535L);
        out.put(static_cast<char>((mm >> 8) & 0xff));
        out.put(static_cast<char>(mm & 0xff));
    }
}

DepthImage load_depth_pgm(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw StagedError("io", "cannot read " + path);
    int w, h, maxval;
    read_pgm_header(in, path, w, h, maxval);
    if (maxval != 65535) throw StagedError("io", path + ": depth PGM must be 16-bit");
    DepthImage img;
    img.width = w;
    img.height = h;
    img.depth.resize(static_cast<std::size_t>(w) * h);
    for (auto& d : img.depth) {
        int hi = in.get(), lo = in.get();
        if (hi < 0 || lo < 0) throw StagedError("io", path + ": truncated PGM raster");
        d = ((hi << 8) | lo) / 1000.0;
    }
    return img;
}

void save_mask_pgm(const Mask& mask, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw StagedError("io", "cannot write " + path);
    out << "P5\n" << mask.width << " " << mask.height << "\n255\n";
    out.write(reinterpret_cast<const char*>(mask.data.data()),
              static_cast<std::streamsize>(mask.data.size()));
}

Mask load_mask_pgm(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw StagedError("io", "cannot read " + path);
    int w, h, maxval;
    read_pgm_header(in, path, w, h, maxval);
    if (maxval != 255) throw StagedError("io", path + ": mask PGM must be 8-bit");
    Mask mask;
    mask.width = w;
    mask.height = h;
    mask.data.resize(static_cast<std::size_t>(w) * h);
    in.read(reinterpret_cast<char*>(mask.data.data()),
            static_cast<std::streamsize>(mask.data.size()));
    if (in.gcount() != static_cast<std::streamsize>(mask.data.size()))
        throw StagedError("io", path + ": truncated PGM raster");
    return mask;
}

}  // namespace cvf
