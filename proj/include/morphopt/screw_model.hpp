#pragma once

#include <array>
#include <optional>
#include <string>
#include <vector>

#include "morphopt/geometry.hpp"

namespace morphopt {

// Anatomical joint groups. Torso and Neck are central (no side); the arm
// groups come in left/right pairs. Tcp exists only for the DH layout.
enum class GroupKind {
    Torso,
    Neck,
    ShoulderGirdle,
    Shoulder,
    UpperArm,
    Elbow,
    Forearm,
    Wrist,
    Tcp,
};

enum class Side { None, Left, Right };

const char* group_name(GroupKind g);
std::optional<GroupKind> group_from_name(const std::string& name);
bool group_is_central(GroupKind g);

// One joint's screw line: unit axis direction and a world-frame point on the
// axis. omega = 0 marks an orientationless placeholder.
struct ScrewJoint {
    Vec3 omega;
    Vec3 q;
};

struct SlotSpec {
    GroupKind group;
    int capacity;
};

// Right-half slot layout: torso 6, neck 4, shoulder girdle 1, shoulder 3,
// upper arm 1, elbow 1, forearm 1, wrist 3 — 20 slots, 120 features.
class SlotLayout {
public:
    static const SlotLayout& screw();

    int slot_count() const { return slot_count_; }
    int feature_count() const { return slot_count_ * 6; }
    const std::vector<SlotSpec>& groups() const { return groups_; }
    // first slot index and capacity of a group
    int group_offset(GroupKind g) const;
    int group_capacity(GroupKind g) const;
    GroupKind slot_group(int slot) const { return slot_groups_[slot]; }
    // index of the slot within its group, base to distal
    int slot_rank(int slot) const { return slot_ranks_[slot]; }
    bool slot_is_central(int slot) const { return group_is_central(slot_group(slot)); }
    std::string slot_name(int slot) const;

    explicit SlotLayout(std::vector<SlotSpec> groups);

private:
    std::vector<SlotSpec> groups_;
    std::vector<GroupKind> slot_groups_;
    std::vector<int> slot_ranks_;
    int slot_count_ = 0;
};

// The 20-slot right-half structure plus presence flags distinguishing
// originally-present joints from padded placeholders.
struct UpperBodyStructure {
    std::array<ScrewJoint, 20> slots;
    std::array<bool, 20> presence{};
};

// An active joint of a reconstructed full-body structure.
struct ActiveJoint {
    Vec3 omega;  // unit
    Vec3 q;
    GroupKind group;
    Side side;
    int slot;    // originating right-half slot
    int parent;  // index into FullBodyStructure::joints, -1 = base
};

// Mirrored full upper body: central chain plus both arms, wired as a tree
// rooted at the base frame.
struct FullBodyStructure {
    std::vector<ActiveJoint> joints;
    std::size_t central_count = 0;
    std::size_t arm_count = 0;  // per side

    std::size_t active_total() const { return joints.size(); }
};

// A joint presented for curation (already classified and normalized).
struct GroupedJoint {
    GroupKind group;
    Side side;
    Vec3 omega;
    Vec3 q;
};

// Centers positions on the base, scales by the shoulder-to-base distance and
// pads into the right-half layout. Left-side joints are discarded. Joints
// whose axis norm falls below axis_threshold are treated as missing.
UpperBodyStructure normalize_structure(const std::vector<GroupedJoint>& raw,
                                       const Vec3& base_position,
                                       const Vec3& left_shoulder,
                                       const Vec3& right_shoulder,
                                       double axis_threshold = 1e-2);

// Fills missing slots: omega = 0, q = group mean of present joints, or the
// nearest present ancestor group's mean when the group is empty, or the base
// origin when nothing is present at all. Input joints must already be
// normalized, right-half only, with valid (unit) axes.
UpperBodyStructure pad_structure(const std::vector<GroupedJoint>& present);

// Sagittal mirror: negates the y components of axis and anchor.
ScrewJoint mirror_joint(const ScrewJoint& j);
std::vector<ScrewJoint> mirror_right_to_left(const std::vector<ScrewJoint>& right);

// Slot i occupies components [6i, 6i+6) as (wx, wy, wz, qx, qy, qz).
std::vector<double> flatten(const UpperBodyStructure& s);
UpperBodyStructure unflatten(const std::vector<double>& v);

// Applies the activation rule to a decoded 120-vector: slots with
// ||omega|| < epsilon are dropped, surviving axes are renormalized, the right
// arm is mirrored to the left, and active joints are wired into a tree
// (arm and neck chains root at the last active torso joint).
FullBodyStructure activate_decoded(const std::vector<double>& v, double epsilon);

}  // namespace morphopt
