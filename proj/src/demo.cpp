#include "cvf/demo.hpp"

#include <cmath>

#include "cvf/dual_quaternion.hpp"
#include "cvf/error.hpp"

namespace cvf {

void Demonstration::validate(double max_step_p, double max_step_r) const {
    if (poses.size() < 2) throw StagedError("demo", "demonstration needs at least 2 poses");
    if (timestamps.size() != poses.size() || gripper.size() != poses.size())
        throw StagedError("demo", "timestamps/gripper length mismatch");
    for (std::size_t i = 0; i < poses.size(); ++i) {
        if (!poses[i].translation.allFinite() || !poses[i].rotation.coeffs().allFinite())
            throw StagedError("demo", "non-finite pose at sample " + std::to_string(i));
    }
    for (std::size_t i = 1; i < poses.size(); ++i) {
        if (!(timestamps[i] > timestamps[i - 1]))
            throw StagedError("demo", "timestamps not strictly increasing at sample " +
                                          std::to_string(i));
        if (translation_distance(poses[i - 1], poses[i]) >= max_step_p ||
            rotation_angle(poses[i - 1], poses[i]) >= max_step_r)
            throw StagedError("demo", "sampling-continuity gate violated at sample " +
                                          std::to_string(i));
    }
}

namespace {

bool segment_feasible(const Demonstration& d, std::size_t i, std::size_t j,
                      const SegmentationOptions& opts) {
    ScrewDisplacement s = screw_from_poses(d.poses[i], d.poses[j]);
    for (std::size_t t = i + 1; t < j; ++t) {
        PathDeviation dev = deviation_from_screw(s, d.poses[i], d.poses[t]);
        if (dev.position > opts.eps_position || dev.rotation > opts.eps_rotation) return false;
    }
    return true;
}

// Greedy sweep within [lo, hi]; appends interior+final breakpoints (lo is
// assumed already emitted by the caller).
void sweep_block(const Demonstration& d, std::size_t lo, std::size_t hi,
                 const SegmentationOptions& opts, std::vector<std::size_t>& out) {
    std::size_t i = lo;
    while (i < hi) {
        std::size_t j = i + 1;
        while (j < hi && segment_feasible(d, i, j + 1, opts)) ++j;
        out.push_back(j);
        i = j;
    }
}

}  // namespace

ScrewSegmentSequence segment_demo(const Demonstration& d, const SegmentationOptions& opts) {
    d.validate();
    if (!(opts.eps_position > 0.0) || !(opts.eps_rotation > 0.0))
        throw StagedError("segment", "tolerances must be positive");

    const std::size_t n = d.size();

    // Forced boundaries: demo ends plus gripper transitions (index of the
    // first sample holding the new state).
    std::vector<std::size_t> forced{0};
    if (opts.force_gripper_breakpoints) {
        for (std::size_t i = 1; i < n; ++i)
            if (d.gripper[i] != d.gripper[i - 1]) forced.push_back(i);
    }
    if (forced.back() != n - 1) forced.push_back(n - 1);

    std::vector<std::size_t> breakpoints{0};
    for (std::size_t b = 0; b + 1 < forced.size(); ++b)
        sweep_block(d, forced[b], forced[b + 1], opts, breakpoints);

    ScrewSegmentSequence seq;
    seq.source_demo_id = d.id;
    seq.breakpoint_indices = breakpoints;
    for (std::size_t k : breakpoints) {
        seq.breakpoint_poses.push_back(d.poses[k]);
        seq.breakpoint_gripper.push_back(d.gripper[k]);
    }
    for (std::size_t b = 0; b + 1 < breakpoints.size(); ++b) {
        ScrewSegment seg;
        seg.start_pose = d.poses[breakpoints[b]];
        seg.screw = screw_from_poses(d.poses[breakpoints[b]], d.poses[breakpoints[b + 1]]);
        seg.gripper = d.gripper[breakpoints[b]];
        seq.segments.push_back(seg);
    }
    return seq;
}

Demonstration resample_demo(const Demonstration& d, double max_step_p, double max_step_r) {
    d.validate();
    Demonstration out;
    out.id = d.id;
    for (std::size_t i = 0; i + 1 < d.size(); ++i) {
        double dp = translation_distance(d.poses[i], d.poses[i + 1]);
        double dr = rotation_angle(d.poses[i], d.poses[i + 1]);
        // Slack keeps steps exactly at the bound from re-splitting on reload.
        int steps =
            static_cast<int>(std::ceil(std::max(dp / max_step_p, dr / max_step_r) - 1e-9));
        if (steps < 1) steps = 1;
        for (int k = 0; k < steps; ++k) {
            double tau = static_cast<double>(k) / steps;
            out.poses.push_back(k == 0 ? d.poses[i] : sclerp(d.poses[i], d.poses[i + 1], tau));
            out.timestamps.push_back(d.timestamps[i] +
                                     tau * (d.timestamps[i + 1] - d.timestamps[i]));
            out.gripper.push_back(d.gripper[i]);
        }
    }
    out.poses.push_back(d.poses.back());
    out.timestamps.push_back(d.timestamps.back());
    out.gripper.push_back(d.gripper.back());
    return out;
}

FitError segment_fit_error(const ScrewSegmentSequence& seq, const Demonstration& d) {
    if (seq.breakpoint_indices.empty() || seq.breakpoint_indices.back() != d.size() - 1)
        throw StagedError("segment", "sequence does not reference this demonstration");
    FitError err;
    for (std::size_t b = 0; b + 1 < seq.breakpoint_indices.size(); ++b) {
        const ScrewSegment& seg = seq.segments[b];
        for (std::size_t t = seq.breakpoint_indices[b] + 1; t < seq.breakpoint_indices[b + 1];
             ++t) {
            PathDeviation dev = deviation_from_screw(seg.screw, seg.start_pose, d.poses[t]);
            err.max_position = std::max(err.max_position, dev.position);
            err.max_rotation = std::max(err.max_rotation, dev.rotation);
        }
    }
    return err;
}

}  // namespace cvf
