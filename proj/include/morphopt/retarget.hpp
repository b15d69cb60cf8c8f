#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "morphopt/kinematics.hpp"
#include "morphopt/motion_io.hpp"
#include "morphopt/screw_model.hpp"

namespace morphopt {

// Retargeting configuration: which human markers drive the robot, how to
// solve per-frame IK, and which alignment mode scores the result.
struct RetargetSpec {
    IkParams ik{1e-2, 60, 1e-5};
    // align one similarity transform over the whole trajectory by default;
    // per-frame alignment is available for sensitivity studies
    bool per_frame_alignment = false;
};

// A decoded design ready for evaluation. The DH path contributes optional
// tool-center points used as wrist-end markers.
struct Candidate {
    FullBodyStructure structure;
    std::optional<Vec3> tcp_right;
    std::optional<Vec3> tcp_left;
};

// Builds the JOI-marked kinematic chain for a candidate. Markers follow the
// human tag set (torso_root, neck, head, l/r shoulder, elbow, wrist); a tag
// whose group has no active joint falls back to the nearest active ancestor,
// ultimately the base origin.
KinematicChain build_joi_chain(const Candidate& c);

struct SimilarityTransform {
    double s = 1.0;
    Mat3 R = Mat3::identity();
    Vec3 t;

    Vec3 apply(const Vec3& p) const { return R * p * s + t; }
};

// Least-squares similarity alignment of point set B onto A (Umeyama).
// Throws DegenerateGeometry when B has no spread or the optimal scale
// collapses to zero.
SimilarityTransform procrustes_align(const std::vector<Vec3>& A, const std::vector<Vec3>& B);

struct PaResult {
    double scaled = 0.0;  // mean per-joint error after alignment, ×100
    double raw = 0.0;     // same, unscaled
    std::vector<double> per_frame;  // mean per-joint error per frame (raw)
    SimilarityTransform transform;  // trajectory-level alignment (identity in per-frame mode)
};

// Procrustes-aligned mean per-joint position error between clips with
// matching joint tags and frame counts. Reported ×100.
double pa_mpjpe(const MotionClip& src, const MotionClip& tar);
PaResult pa_mpjpe_detail(const MotionClip& src, const MotionClip& tar,
                         bool per_frame_alignment = false);

// Retargets the source motion onto the candidate: per frame, robot JOI
// targets are built by walking the human JOI tree with each segment's human
// direction scaled by the robot's home segment length, then solved by
// damped-least-squares IK warm-started from the previous frame.
MotionClip retarget(const Candidate& candidate, const MotionClip& src,
                    const RetargetSpec& spec = {});

// Active joints in the mirrored full upper body: central joints count once,
// arm joints twice.
int count_active_joints(const FullBodyStructure& s);

struct ObjectiveParams {
    double lambda_joint = 3.5;
    RetargetSpec spec;
};

struct ObjectiveReport {
    double pa_mpjpe = 0.0;      // sum of per-motion PA-MPJPE terms (×100 scale)
    double pa_mpjpe_raw = 0.0;  // unscaled counterpart
    int n_tot = 0;
    double total = 0.0;  // pa_mpjpe + lambda_joint * n_tot, exactly
    std::vector<double> per_motion;
    std::vector<std::vector<double>> per_frame;  // raw per-frame residuals per motion

    std::string to_json() const;
};

// The black-box loss: sum of retargeting terms over the motions plus one
// joint-count penalty. Never throws on degenerate candidates; a collapsed
// marker cloud scores as the limiting alignment error.
ObjectiveReport total_objective(const Candidate& candidate,
                                const std::vector<MotionClip>& motions,
                                const ObjectiveParams& params = {});

}  // namespace morphopt
