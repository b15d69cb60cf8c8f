#include "morphopt/screw_model.hpp"

#include <algorithm>
#include <cmath>

#include "morphopt/errors.hpp"

namespace morphopt {

const char* group_name(GroupKind g) {
    switch (g) {
        case GroupKind::Torso: return "torso";
        case GroupKind::Neck: return "neck";
        case GroupKind::ShoulderGirdle: return "shoulder_girdle";
        case GroupKind::Shoulder: return "shoulder";
        case GroupKind::UpperArm: return "upper_arm";
        case GroupKind::Elbow: return "elbow";
        case GroupKind::Forearm: return "forearm";
        case GroupKind::Wrist: return "wrist";
        case GroupKind::Tcp: return "tcp";
    }
    return "?";
}

std::optional<GroupKind> group_from_name(const std::string& name) {
    for (GroupKind g : {GroupKind::Torso, GroupKind::Neck, GroupKind::ShoulderGirdle,
                        GroupKind::Shoulder, GroupKind::UpperArm, GroupKind::Elbow,
                        GroupKind::Forearm, GroupKind::Wrist, GroupKind::Tcp}) {
        if (name == group_name(g)) return g;
    }
    return std::nullopt;
}

bool group_is_central(GroupKind g) {
    return g == GroupKind::Torso || g == GroupKind::Neck;
}

SlotLayout::SlotLayout(std::vector<SlotSpec> groups) : groups_(std::move(groups)) {
    for (const auto& gs : groups_) {
        for (int r = 0; r < gs.capacity; ++r) {
            slot_groups_.push_back(gs.group);
            slot_ranks_.push_back(r);
        }
    }
    slot_count_ = static_cast<int>(slot_groups_.size());
}

const SlotLayout& SlotLayout::screw() {
    static const SlotLayout layout({{GroupKind::Torso, 6},
                                    {GroupKind::Neck, 4},
                                    {GroupKind::ShoulderGirdle, 1},
                                    {GroupKind::Shoulder, 3},
                                    {GroupKind::UpperArm, 1},
                                    {GroupKind::Elbow, 1},
                                    {GroupKind::Forearm, 1},
                                    {GroupKind::Wrist, 3}});
    return layout;
}

int SlotLayout::group_offset(GroupKind g) const {
    int off = 0;
    for (const auto& gs : groups_) {
        if (gs.group == g) return off;
        off += gs.capacity;
    }
    return -1;
}

int SlotLayout::group_capacity(GroupKind g) const {
    for (const auto& gs : groups_) {
        if (gs.group == g) return gs.capacity;
    }
    return 0;
}

std::string SlotLayout::slot_name(int slot) const {
    return std::string(group_name(slot_group(slot))) + std::to_string(slot_rank(slot));
}

namespace {

// Ancestor fallback order for each arm/central group, most specific first.
std::vector<GroupKind> ancestor_chain(GroupKind g) {
    switch (g) {
        case GroupKind::Wrist:
            return {GroupKind::Forearm, GroupKind::Elbow, GroupKind::UpperArm,
                    GroupKind::Shoulder, GroupKind::ShoulderGirdle, GroupKind::Torso};
        case GroupKind::Forearm:
            return {GroupKind::Elbow, GroupKind::UpperArm, GroupKind::Shoulder,
                    GroupKind::ShoulderGirdle, GroupKind::Torso};
        case GroupKind::Elbow:
            return {GroupKind::UpperArm, GroupKind::Shoulder, GroupKind::ShoulderGirdle,
                    GroupKind::Torso};
        case GroupKind::UpperArm:
            return {GroupKind::Shoulder, GroupKind::ShoulderGirdle, GroupKind::Torso};
        case GroupKind::Shoulder:
            return {GroupKind::ShoulderGirdle, GroupKind::Torso};
        case GroupKind::ShoulderGirdle:
            return {GroupKind::Torso};
        case GroupKind::Neck:
            return {GroupKind::Torso};
        default:
            return {};
    }
}

}  // namespace

UpperBodyStructure pad_structure(const std::vector<GroupedJoint>& present) {
    const SlotLayout& layout = SlotLayout::screw();

    // bucket by group, keeping input (chain) order
    std::vector<std::vector<GroupedJoint>> buckets(layout.groups().size());
    auto bucket_of = [&](GroupKind g) -> std::vector<GroupedJoint>& {
        for (std::size_t i = 0; i < layout.groups().size(); ++i) {
            if (layout.groups()[i].group == g) return buckets[i];
        }
        throw SchemaError(std::string("group not in right-half layout: ") + group_name(g));
    };
    for (const auto& j : present) bucket_of(j.group).push_back(j);

    for (std::size_t i = 0; i < layout.groups().size(); ++i) {
        const auto& gs = layout.groups()[i];
        if (static_cast<int>(buckets[i].size()) > gs.capacity) {
            throw CapacityExceeded(std::string(group_name(gs.group)) + " has " +
                                   std::to_string(buckets[i].size()) + " joints, capacity " +
                                   std::to_string(gs.capacity));
        }
    }

    auto group_mean = [&](GroupKind g) -> std::optional<Vec3> {
        const auto& b = bucket_of(g);
        if (b.empty()) return std::nullopt;
        Vec3 m;
        for (const auto& j : b) m += j.q;
        return m / static_cast<double>(b.size());
    };

    auto fallback_q = [&](GroupKind g) -> Vec3 {
        for (GroupKind anc : ancestor_chain(g)) {
            if (auto m = group_mean(anc)) return *m;
        }
        return Vec3{};  // base origin
    };

    UpperBodyStructure out;
    int slot = 0;
    for (std::size_t i = 0; i < layout.groups().size(); ++i) {
        const auto& gs = layout.groups()[i];
        const auto& b = buckets[i];
        const std::optional<Vec3> mean = group_mean(gs.group);
        for (int r = 0; r < gs.capacity; ++r, ++slot) {
            if (r < static_cast<int>(b.size())) {
                out.slots[slot] = {b[r].omega, b[r].q};
                out.presence[slot] = true;
            } else {
                out.slots[slot].omega = Vec3{};
                out.slots[slot].q = mean ? *mean : fallback_q(gs.group);
                out.presence[slot] = false;
            }
        }
    }
    return out;
}

UpperBodyStructure normalize_structure(const std::vector<GroupedJoint>& raw,
                                       const Vec3& base_position, const Vec3& left_shoulder,
                                       const Vec3& right_shoulder, double axis_threshold) {
    const Vec3 mean_shoulder = (left_shoulder + right_shoulder) * 0.5;
    const double scale = (mean_shoulder - base_position).norm();
    if (scale <= 1e-9) {
        throw DegenerateScale("shoulder-to-base distance is " + std::to_string(scale));
    }

    std::vector<GroupedJoint> kept;
    for (const auto& j : raw) {
        if (j.side == Side::Left) continue;
        if (j.omega.norm() < axis_threshold) continue;  // extraction treats it as missing
        GroupedJoint n = j;
        n.omega = j.omega.normalized();
        n.q = (j.q - base_position) / scale;
        kept.push_back(n);
    }
    return pad_structure(kept);
}

ScrewJoint mirror_joint(const ScrewJoint& j) {
    return {{j.omega.x, -j.omega.y, j.omega.z}, {j.q.x, -j.q.y, j.q.z}};
}

std::vector<ScrewJoint> mirror_right_to_left(const std::vector<ScrewJoint>& right) {
    std::vector<ScrewJoint> out;
    out.reserve(right.size());
    for (const auto& j : right) out.push_back(mirror_joint(j));
    return out;
}

std::vector<double> flatten(const UpperBodyStructure& s) {
    std::vector<double> v(120);
    for (int i = 0; i < 20; ++i) {
        v[6 * i + 0] = s.slots[i].omega.x;
        v[6 * i + 1] = s.slots[i].omega.y;
        v[6 * i + 2] = s.slots[i].omega.z;
        v[6 * i + 3] = s.slots[i].q.x;
        v[6 * i + 4] = s.slots[i].q.y;
        v[6 * i + 5] = s.slots[i].q.z;
    }
    return v;
}

UpperBodyStructure unflatten(const std::vector<double>& v) {
    if (v.size() != 120) throw DimensionMismatch("expected 120 features, got " + std::to_string(v.size()));
    UpperBodyStructure s;
    for (int i = 0; i < 20; ++i) {
        s.slots[i].omega = {v[6 * i + 0], v[6 * i + 1], v[6 * i + 2]};
        s.slots[i].q = {v[6 * i + 3], v[6 * i + 4], v[6 * i + 5]};
        s.presence[i] = s.slots[i].omega.norm() > 0.0;
    }
    return s;
}

FullBodyStructure activate_decoded(const std::vector<double>& v, double epsilon) {
    const SlotLayout& layout = SlotLayout::screw();
    const UpperBodyStructure s = unflatten(v);

    FullBodyStructure out;
    // torso joints chain off each other; the neck chain restarts at the last
    // active torso joint (base when no torso joint is active)
    int last_torso = -1;
    int prev_neck = -1;
    for (int slot = 0; slot < layout.slot_count(); ++slot) {
        if (!layout.slot_is_central(slot)) continue;
        const ScrewJoint& j = s.slots[slot];
        if (j.omega.norm() < epsilon) continue;
        const GroupKind g = layout.slot_group(slot);
        const int parent = (g == GroupKind::Torso) ? last_torso
                           : (prev_neck >= 0 ? prev_neck : last_torso);
        ActiveJoint aj{j.omega.normalized(), j.q, g, Side::None, slot, parent};
        out.joints.push_back(aj);
        const int idx = static_cast<int>(out.joints.size()) - 1;
        if (g == GroupKind::Torso) last_torso = idx;
        else prev_neck = idx;
    }
    out.central_count = out.joints.size();

    // right arm chain roots at the last active torso joint
    std::vector<ActiveJoint> right;
    int prev_arm = last_torso;
    for (int slot = 0; slot < layout.slot_count(); ++slot) {
        if (layout.slot_is_central(slot)) continue;
        const ScrewJoint& j = s.slots[slot];
        if (j.omega.norm() < epsilon) continue;
        ActiveJoint aj{j.omega.normalized(), j.q, layout.slot_group(slot), Side::Right, slot,
                       prev_arm};
        right.push_back(aj);
        prev_arm = static_cast<int>(out.joints.size() + right.size()) - 1;
    }
    out.arm_count = right.size();
    for (const auto& aj : right) out.joints.push_back(aj);

    // left arm: mirrored copy with the same intra-chain wiring
    const std::size_t left_base = out.joints.size();
    for (std::size_t i = 0; i < right.size(); ++i) {
        const ActiveJoint& r = right[i];
        ActiveJoint l = r;
        const ScrewJoint m = mirror_joint({r.omega, r.q});
        l.omega = m.omega;
        l.q = m.q;
        l.side = Side::Left;
        const int first_right = static_cast<int>(out.central_count);
        l.parent = (r.parent >= first_right)
                       ? static_cast<int>(left_base) + (r.parent - first_right)
                       : r.parent;
        out.joints.push_back(l);
    }
    return out;
}

}  // namespace morphopt
