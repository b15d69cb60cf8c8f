#pragma once

#include <map>
#include <string>
#include <vector>

#include "morphopt/geometry.hpp"

namespace morphopt {

// One node of a BVH hierarchy; end sites become pseudo-joints named
// "<parent>_end" with no channels.
struct BvhJoint {
    std::string name;
    Vec3 offset;
    std::vector<std::string> channels;  // declared order
    int parent = -1;
    bool is_end_site = false;
};

struct BvhSkeleton {
    std::vector<BvhJoint> joints;  // depth-first declaration order
    int total_channels = 0;

    int find(const std::string& name) const;
};

struct BvhData {
    BvhSkeleton skeleton;
    double frame_time = 1.0 / 120.0;
    // rotation channels stored in radians, positions as-is
    std::vector<std::vector<double>> frames;
};

// Parses the HIERARCHY/MOTION grammar. Throws ParseError with a line number
// on malformed input and ChannelMismatch when a frame row's width differs
// from the declared channel total.
BvhData parse_bvh(const std::string& text);

// Inverse of parse_bvh up to float formatting.
std::string write_bvh(const BvhData& data);

// World positions of every joint (including end sites) for one frame row.
std::vector<Vec3> skeleton_fk(const BvhSkeleton& skel, const std::vector<double>& frame);

// Time-indexed world-frame trajectories of the joints of interest.
struct MotionClip {
    double frame_time = 0.0;
    std::vector<std::string> joints;       // JOI tags
    std::vector<std::vector<Vec3>> frames;  // frames × joints

    std::size_t frame_count() const { return frames.size(); }
    int joint_index(const std::string& tag) const;
};

// Maps JOI tags to candidate skeleton joint names (first match wins) and
// carries the BVH-to-world axis rotation.
struct JoiNameMap {
    std::map<std::string, std::vector<std::string>> aliases;
    Mat3 axis_map = Mat3::identity();

    // CMU-style names; rotates the y-up BVH frame into the z-up world frame
    // (x forward, y left).
    static JoiNameMap cmu_default();
};

// Extracts the mapped joints, removes the root translation, and scales by the
// rest-pose shoulder-to-root distance. The map must resolve torso_root,
// l_shoulder and r_shoulder (they anchor the normalization); every mapped tag
// must resolve or MissingJoi is thrown.
MotionClip extract_upper_body(const BvhData& data, const JoiNameMap& name_map, int stride = 1);

// (frame, joint, x, y, z) rows.
std::string clip_to_csv(const MotionClip& clip);

// Procedurally animated BVH text for demo/test motions. Kinds: "wave"
// (right-arm wave, quiet torso), "twist" (torso yaw with moving arms),
// "swim" (torso yaw+pitch with alternating arms).
std::string synthetic_motion_bvh(const std::string& kind, int n_frames, double frame_time = 1.0 / 60.0);

}  // namespace morphopt
