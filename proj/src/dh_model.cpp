#include "morphopt/dh_model.hpp"

#include <cmath>

#include "morphopt/errors.hpp"

namespace morphopt {

namespace {

// slot ranges of the 21-slot right-half DH wiring
constexpr int kTorsoBegin = 0, kTorsoEnd = 6;
constexpr int kNeckBegin = 6, kNeckEnd = 10;
constexpr int kArmBegin = 10, kArmEnd = 20;
constexpr int kTcpSlot = 20;

}  // namespace

const DhLayout& DhLayout::standard() {
    static const DhLayout layout;
    return layout;
}

GroupKind DhLayout::slot_group(int slot) const {
    if (slot < kTorsoEnd) return GroupKind::Torso;
    if (slot < kNeckEnd) return GroupKind::Neck;
    if (slot == 10) return GroupKind::ShoulderGirdle;
    if (slot <= 13) return GroupKind::Shoulder;
    if (slot == 14) return GroupKind::UpperArm;
    if (slot == 15) return GroupKind::Elbow;
    if (slot == 16) return GroupKind::Forearm;
    if (slot <= 19) return GroupKind::Wrist;
    return GroupKind::Tcp;
}

int DhLayout::slot_rank(int slot) const {
    if (slot < kTorsoEnd) return slot;
    if (slot < kNeckEnd) return slot - kNeckBegin;
    if (slot >= 11 && slot <= 13) return slot - 11;
    if (slot >= 17 && slot <= 19) return slot - 17;
    return 0;
}

std::string DhLayout::slot_name(int slot) const {
    return std::string(group_name(slot_group(slot))) + std::to_string(slot_rank(slot));
}

Transform dh_transform(const DhJoint& j) {
    const double ct = std::cos(j.theta), st = std::sin(j.theta);
    const double ca = std::cos(j.alpha), sa = std::sin(j.alpha);
    // Rz(theta)·Tz(d)·Tx(a)·Rx(alpha)
    Transform t;
    t.R.a = {ct, -st * ca, st * sa,
             st, ct * ca,  -ct * sa,
             0.0, sa,      ca};
    t.p = {j.a * ct, j.a * st, j.d};
    // tau along the new frame's own z-axis
    t.p += t.R * Vec3{0.0, 0.0, j.tau};
    return t;
}

DhJoint dh_mirror_joint(const DhJoint& j) {
    return {-j.theta, j.d, j.a, -j.alpha, j.tau};
}

DhChainHalf dh_mirror(const DhChainHalf& half) {
    DhChainHalf out = half;
    for (auto& j : out.slots) j = dh_mirror_joint(j);
    return out;
}

DhChainHalf dh_clamp(const DhChainHalf& half, double threshold) {
    DhChainHalf out = half;
    for (auto& j : out.slots) {
        if (std::abs(j.d) <= threshold) j.d = 0.0;
        if (std::abs(j.a) <= threshold) j.a = 0.0;
    }
    return out;
}

DhChainHalf dh_normalize(const DhChainHalf& half, double ref_height, double base_z_offset) {
    if (ref_height <= 1e-9) {
        throw DegenerateScale("reference height is " + std::to_string(ref_height));
    }
    DhChainHalf out = half;
    for (auto& j : out.slots) {
        j.d /= ref_height;
        j.a /= ref_height;
        j.tau /= ref_height;
    }
    out.slots[0].d -= base_z_offset / ref_height;
    return out;
}

std::vector<double> dh_flatten(const DhChainHalf& half) {
    std::vector<double> v(105);
    for (int i = 0; i < 21; ++i) {
        v[5 * i + 0] = half.slots[i].theta;
        v[5 * i + 1] = half.slots[i].d;
        v[5 * i + 2] = half.slots[i].a;
        v[5 * i + 3] = half.slots[i].alpha;
        v[5 * i + 4] = half.slots[i].tau;
    }
    return v;
}

DhChainHalf dh_unflatten(const std::vector<double>& v) {
    if (v.size() != 105) throw DimensionMismatch("expected 105 features, got " + std::to_string(v.size()));
    DhChainHalf half;
    for (int i = 0; i < 21; ++i) {
        half.slots[i] = {v[5 * i + 0], v[5 * i + 1], v[5 * i + 2], v[5 * i + 3], v[5 * i + 4]};
        half.presence[i] = true;
    }
    return half;
}

std::vector<DhWorldJoint> dh_world_anchors(const DhChainHalf& half) {
    return dh_world_anchors(half, half.presence);
}

std::vector<DhWorldJoint> dh_world_anchors(const DhChainHalf& half,
                                           const std::array<bool, 21>& active) {
    const DhLayout& layout = DhLayout::standard();
    std::vector<DhWorldJoint> out;

    auto walk = [&](Transform frame, int begin, int end) {
        for (int slot = begin; slot < end; ++slot) {
            if (!active[slot]) continue;
            frame = frame * dh_transform(half.slots[slot]);
            DhWorldJoint wj;
            wj.axis = frame.R.col(2);
            wj.anchor = frame.p;
            wj.group = layout.slot_group(slot);
            wj.slot = slot;
            wj.is_tcp = (slot == kTcpSlot);
            out.push_back(wj);
        }
        return frame;
    };

    const Transform torso_end = walk(Transform::identity(), kTorsoBegin, kTorsoEnd);
    walk(torso_end, kNeckBegin, kNeckEnd);
    walk(torso_end, kArmBegin, kArmEnd + 1);
    return out;
}

namespace {

// Extracts (theta, d, a, alpha, tau) moving `frame` onto the child joint
// line. The child axis and anchor are given in world coordinates.
DhJoint extract_step(Transform& frame, const Vec3& child_axis_world,
                     const Vec3& child_anchor_world, bool position_only) {
    const Mat3 Rt = frame.R.transposed();
    Vec3 v = Rt * child_axis_world;             // child axis, local
    const Vec3 p = Rt * (child_anchor_world - frame.p);  // child anchor, local

    DhJoint j;
    if (position_only) v = {0.0, 0.0, 1.0};  // TCP: keep the previous axis direction

    const Vec3 u{0.0, 0.0, 1.0};
    const double c = u.dot(v);
    const double sin2 = std::max(0.0, 1.0 - c * c);

    if (sin2 < 1e-16) {
        // parallel axes: common normal through the child anchor
        j.d = p.z;
        const double axy = std::hypot(p.x, p.y);
        j.a = axy;
        j.theta = axy > 1e-12 ? std::atan2(p.y, p.x) : 0.0;
        j.alpha = c >= 0.0 ? 0.0 : 3.14159265358979323846;
        // frame origin lands on the anchor's normal foot, so tau is the
        // remaining offset along the child axis (zero here by construction)
        j.tau = 0.0;
    } else {
        // closest points between the two axis lines
        const double s = (u.dot(p) - c * v.dot(p)) / sin2;
        const double t = (c * u.dot(p) - v.dot(p)) / sin2;
        const Vec3 f1{0.0, 0.0, s};
        const Vec3 f2 = p + v * t;
        const Vec3 delta = f2 - f1;
        const double a = delta.norm();
        Vec3 n = a > 1e-12 ? delta / a : u.cross(v).normalized();
        j.d = s;
        j.a = a;
        j.theta = std::atan2(n.y, n.x);
        j.alpha = std::atan2(u.cross(v).dot(n), c);
        const Vec3 origin{a * std::cos(j.theta), a * std::sin(j.theta), s};
        j.tau = (p - origin).dot(v);
    }
    frame = frame * dh_transform(j);
    return j;
}

}  // namespace

DhChainHalf dh_extract(const UpperBodyStructure& screw) {
    DhChainHalf out;

    Transform torso_end = Transform::identity();
    {
        Transform frame = Transform::identity();
        for (int slot = 0; slot < 6; ++slot) {
            if (!screw.presence[slot]) continue;
            out.slots[slot] = extract_step(frame, screw.slots[slot].omega, screw.slots[slot].q, false);
            out.presence[slot] = true;
            torso_end = frame;
        }
    }
    {
        Transform frame = torso_end;
        for (int slot = 6; slot < 10; ++slot) {
            if (!screw.presence[slot]) continue;
            out.slots[slot] = extract_step(frame, screw.slots[slot].omega, screw.slots[slot].q, false);
            out.presence[slot] = true;
        }
    }
    {
        Transform frame = torso_end;
        int last_arm_slot = -1;
        for (int slot = 10; slot < 20; ++slot) {
            if (!screw.presence[slot]) continue;
            out.slots[slot] = extract_step(frame, screw.slots[slot].omega, screw.slots[slot].q, false);
            out.presence[slot] = true;
            last_arm_slot = slot;
        }
        if (last_arm_slot >= 0) {
            // TCP: virtual end point at the most distal arm joint's anchor
            out.slots[kTcpSlot] =
                extract_step(frame, Vec3{}, screw.slots[last_arm_slot].q, true);
            out.presence[kTcpSlot] = true;
        }
    }
    return out;
}

DhDecoded dh_activate_decoded(const std::vector<double>& v, double clamp_threshold) {
    const DhChainHalf half = dh_clamp(dh_unflatten(v), clamp_threshold);
    std::array<bool, 21> active;
    active.fill(true);
    const std::vector<DhWorldJoint> world = dh_world_anchors(half, active);

    DhDecoded out;
    FullBodyStructure& fb = out.structure;

    // central joints chain exactly as emitted (torso then neck)
    int last_torso = -1;
    int prev_neck = -1;
    for (const auto& wj : world) {
        if (wj.group != GroupKind::Torso && wj.group != GroupKind::Neck) continue;
        const int parent = (wj.group == GroupKind::Torso) ? last_torso
                           : (prev_neck >= 0 ? prev_neck : last_torso);
        fb.joints.push_back({wj.axis, wj.anchor, wj.group, Side::None, wj.slot, parent});
        const int idx = static_cast<int>(fb.joints.size()) - 1;
        if (wj.group == GroupKind::Torso) last_torso = idx;
        else prev_neck = idx;
    }
    fb.central_count = fb.joints.size();

    std::vector<ActiveJoint> right;
    int prev_arm = last_torso;
    for (const auto& wj : world) {
        if (group_is_central(wj.group)) continue;
        if (wj.is_tcp) {
            out.tcp_right = wj.anchor;
            out.tcp_left = {wj.anchor.x, -wj.anchor.y, wj.anchor.z};
            out.has_tcp = true;
            continue;
        }
        right.push_back({wj.axis, wj.anchor, wj.group, Side::Right, wj.slot, prev_arm});
        prev_arm = static_cast<int>(fb.joints.size() + right.size()) - 1;
    }
    fb.arm_count = right.size();
    for (const auto& aj : right) fb.joints.push_back(aj);

    const std::size_t left_base = fb.joints.size();
    const int first_right = static_cast<int>(fb.central_count);
    for (std::size_t i = 0; i < right.size(); ++i) {
        ActiveJoint l = right[i];
        const ScrewJoint m = mirror_joint({l.omega, l.q});
        l.omega = m.omega;
        l.q = m.q;
        l.side = Side::Left;
        l.parent = (l.parent >= first_right) ? static_cast<int>(left_base) + (l.parent - first_right)
                                             : l.parent;
        fb.joints.push_back(l);
    }
    return out;
}

}  // namespace morphopt
