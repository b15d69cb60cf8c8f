#pragma once

#include <string>
#include <unordered_map>
#include <vector>

#include "morphopt/geometry.hpp"
#include "morphopt/screw_model.hpp"

namespace morphopt {

// Zero-pitch screw twist (omega, v) with v = -omega × q for revolute joints;
// omega = 0 gives a pure translation.
struct Twist {
    Vec3 omega;
    Vec3 v;

    static Twist revolute(const Vec3& omega, const Vec3& q) {
        return {omega, -omega.cross(q)};
    }
};

// exp([S] theta): Rodrigues rotation plus the standard closed-form
// translation block.
Transform screw_exp(const Twist& t, double theta);

// A point rigidly attached to a joint's outboard link (joint = -1 attaches
// to the fixed base).
struct Marker {
    std::string tag;
    int joint = -1;
    Vec3 home;
};

struct KinematicChain {
    struct JointNode {
        Twist twist;      // at the A-pose home configuration
        Vec3 home_axis;   // unit
        Vec3 home_anchor;
        int parent = -1;  // index of parent joint, -1 = base
    };

    std::vector<JointNode> joints;
    std::vector<Marker> markers;

    static KinematicChain from_structure(const FullBodyStructure& s);

    int marker_index(const std::string& tag) const;
    void add_marker(const std::string& tag, int joint, const Vec3& home);
    // true when `anc` is an ancestor of `joint` or equal to it
    bool influences(int anc, int joint) const;
};

struct JointConfig {
    std::vector<double> angles;
    std::vector<double> lo;  // per-joint lower limit
    std::vector<double> hi;

    // all angles zero, symmetric limits (default ±π)
    static JointConfig home(std::size_t n, double limit = 3.14159265358979323846);
    void clamp();
};

struct FkResult {
    std::vector<Transform> joint_transforms;  // cumulative, including own joint
    std::vector<Vec3> joint_anchors;          // world anchor positions
    std::vector<Vec3> joint_axes;             // world axis directions
    std::vector<Vec3> marker_positions;
};

FkResult forward_kinematics(const KinematicChain& chain, const JointConfig& cfg);

struct IkParams {
    double damping = 1e-2;
    int max_iters = 200;
    double tol = 1e-5;
    double max_step = 0.5;  // per-joint step cap (radians) per iteration
};

struct MarkerTarget {
    int marker = 0;
    Vec3 position;
};

struct IkResult {
    JointConfig config;
    double residual = 0.0;  // Euclidean norm of the stacked position error
    int iterations = 0;
};

// Damped-least-squares IK on stacked marker position residuals. Angles are
// clamped to limits after every step; returns the best configuration seen.
// Non-convergence is reported through the residual, never as an error.
IkResult solve_ik(const KinematicChain& chain, const std::vector<MarkerTarget>& targets,
                  const JointConfig& cfg0, const IkParams& params = {});
IkResult solve_ik(const KinematicChain& chain,
                  const std::unordered_map<std::string, Vec3>& targets, const JointConfig& cfg0,
                  const IkParams& params = {});

}  // namespace morphopt
