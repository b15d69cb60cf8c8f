#pragma once

#include <array>
#include <vector>

#include "morphopt/geometry.hpp"
#include "morphopt/screw_model.hpp"

namespace morphopt {

// Classical DH parameters augmented with tau, the anchor offset along the
// joint's own rotation axis.
struct DhJoint {
    double theta = 0.0;
    double d = 0.0;
    double a = 0.0;
    double alpha = 0.0;
    double tau = 0.0;
};

// Right-half DH layout: the screw layout's 20 slots plus one TCP slot after
// the wrist — 21 slots, 105 features.
class DhLayout {
public:
    static const DhLayout& standard();
    int slot_count() const { return 21; }
    int feature_count() const { return 105; }
    GroupKind slot_group(int slot) const;
    int slot_rank(int slot) const;
    bool slot_is_central(int slot) const { return slot < 10; }
    std::string slot_name(int slot) const;
};

struct DhChainHalf {
    std::array<DhJoint, 21> slots;
    std::array<bool, 21> presence{};
};

// Frame update of one slot: Rz(theta)·Tz(d)·Tx(a)·Rx(alpha), then Tz(tau)
// along the frame's own (new) z-axis.
Transform dh_transform(const DhJoint& j);

// Sagittal mirror in DH space: theta and alpha flip sign.
DhChainHalf dh_mirror(const DhChainHalf& half);
DhJoint dh_mirror_joint(const DhJoint& j);

// Near-zero link clamping: |d| <= threshold and |a| <= threshold are set to
// zero (boundary inclusive).
DhChainHalf dh_clamp(const DhChainHalf& half, double threshold = 0.01);

// Scales d, a, tau by 1/ref_height; the first torso slot's d is additionally
// rebased by the base link's world-z offset. Angles are untouched.
DhChainHalf dh_normalize(const DhChainHalf& half, double ref_height, double base_z_offset = 0.0);

std::vector<double> dh_flatten(const DhChainHalf& half);
DhChainHalf dh_unflatten(const std::vector<double>& v);

// World-frame joint line emitted by the DH chain reconstruction.
struct DhWorldJoint {
    Vec3 axis;
    Vec3 anchor;
    GroupKind group;
    int slot;
    bool is_tcp;  // TCP slots carry a position but no rotation axis
};

// Composes dh_transform along the right-half wiring (torso chain; neck and
// arm branch from the last present torso frame) and emits every present
// slot's world anchor and axis. `active` defaults to the presence flags.
std::vector<DhWorldJoint> dh_world_anchors(const DhChainHalf& half);
std::vector<DhWorldJoint> dh_world_anchors(const DhChainHalf& half,
                                           const std::array<bool, 21>& active);

// Numeric DH+tau extraction from a padded screw structure: consecutive
// joint-axis pairs along the same wiring define each slot's parameters.
// Present flags mirror the input's presence.
DhChainHalf dh_extract(const UpperBodyStructure& screw);

// Builds the mirrored full-body structure for a decoded DH candidate: all 20
// joint slots are taken as active, the TCP contributes a wrist-end marker
// position. Returns the structure plus the TCP world positions (right, left).
struct DhDecoded {
    FullBodyStructure structure;
    Vec3 tcp_right;
    Vec3 tcp_left;
    bool has_tcp = false;
};
DhDecoded dh_activate_decoded(const std::vector<double>& v, double clamp_threshold = 0.01);

}  // namespace morphopt
