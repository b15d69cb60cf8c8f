#include "morphopt/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "json.hpp"
#include "morphopt/errors.hpp"
#include "morphopt/io_util.hpp"
#include "morphopt/rng.hpp"

namespace morphopt {

namespace {

const char* side_name(Side s) {
    switch (s) {
        case Side::None: return "none";
        case Side::Left: return "left";
        case Side::Right: return "right";
    }
    return "?";
}

Side side_from_name(const std::string& name) {
    if (name == "none") return Side::None;
    if (name == "left") return Side::Left;
    if (name == "right") return Side::Right;
    throw SchemaError("unknown side: " + name);
}

Vec3 vec3_from_json(const nlohmann::json& j, const std::string& record, const std::string& field) {
    if (!j.is_array() || j.size() != 3) {
        throw SchemaError(record + ": field '" + field + "' must be a 3-array");
    }
    return {j[0].get<double>(), j[1].get<double>(), j[2].get<double>()};
}

nlohmann::json vec3_to_json(const Vec3& v) { return nlohmann::json::array({v.x, v.y, v.z}); }

}  // namespace

RobotRecord record_from_json(const std::string& text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw SchemaError(std::string("record parse failure: ") + e.what());
    }
    RobotRecord rec;
    rec.name = j.value("name", std::string("<unnamed>"));
    try {
        rec.type = j.at("type").get<std::string>();
        rec.base_position = vec3_from_json(j.at("base_position"), rec.name, "base_position");
        const auto& sh = j.at("shoulder_positions");
        rec.shoulder_left = vec3_from_json(sh.at("left"), rec.name, "shoulder_positions.left");
        rec.shoulder_right = vec3_from_json(sh.at("right"), rec.name, "shoulder_positions.right");
        for (const auto& joint : j.at("joints")) {
            RecordJoint rj;
            const std::string group = joint.at("group").get<std::string>();
            const auto kind = group_from_name(group);
            if (!kind || *kind == GroupKind::Tcp) {
                throw SchemaError(rec.name + ": unknown joint group '" + group + "'");
            }
            rj.group = *kind;
            rj.side = side_from_name(joint.value("side", std::string("none")));
            if (group_is_central(rj.group) != (rj.side == Side::None)) {
                throw SchemaError(rec.name + ": group '" + group + "' has inconsistent side");
            }
            rj.axis_world = vec3_from_json(joint.at("axis_world"), rec.name, "axis_world");
            rj.anchor_world = vec3_from_json(joint.at("anchor_world"), rec.name, "anchor_world");
            rj.parent = joint.value("parent", -1);
            if (!rj.axis_world.finite() || !rj.anchor_world.finite()) {
                throw SchemaError(rec.name + ": non-finite joint data");
            }
            rec.joints.push_back(rj);
        }
    } catch (const nlohmann::json::exception& e) {
        throw SchemaError(rec.name + ": " + e.what());
    }
    return rec;
}

std::string record_to_json(const RobotRecord& rec) {
    nlohmann::json j;
    j["name"] = rec.name;
    j["type"] = rec.type;
    j["base_position"] = vec3_to_json(rec.base_position);
    j["shoulder_positions"] = {{"left", vec3_to_json(rec.shoulder_left)},
                               {"right", vec3_to_json(rec.shoulder_right)}};
    j["joints"] = nlohmann::json::array();
    for (const auto& joint : rec.joints) {
        j["joints"].push_back({{"group", group_name(joint.group)},
                               {"side", side_name(joint.side)},
                               {"axis_world", vec3_to_json(joint.axis_world)},
                               {"anchor_world", vec3_to_json(joint.anchor_world)},
                               {"parent", joint.parent}});
    }
    return j.dump(2);
}

namespace {

std::vector<GroupedJoint> to_grouped(const RobotRecord& rec) {
    std::vector<GroupedJoint> out;
    out.reserve(rec.joints.size());
    for (const auto& j : rec.joints) {
        out.push_back({j.group, j.side, j.axis_world, j.anchor_world});
    }
    return out;
}

// left/right mismatch beyond 5% of the reference height is worth a note:
// the right side is canonical and the left is discarded
void asymmetry_notes(const RobotRecord& rec, double scale, CurationEntry& entry) {
    for (GroupKind g : {GroupKind::ShoulderGirdle, GroupKind::Shoulder, GroupKind::UpperArm,
                        GroupKind::Elbow, GroupKind::Forearm, GroupKind::Wrist}) {
        std::vector<const RecordJoint*> left, right;
        for (const auto& j : rec.joints) {
            if (j.group != g) continue;
            if (j.side == Side::Left) left.push_back(&j);
            if (j.side == Side::Right) right.push_back(&j);
        }
        if (left.size() != right.size()) {
            entry.notes.push_back(std::string(group_name(g)) + ": left/right joint counts differ (" +
                                  std::to_string(left.size()) + " vs " +
                                  std::to_string(right.size()) + ")");
            continue;
        }
        for (std::size_t i = 0; i < right.size(); ++i) {
            const Vec3 mirrored = {right[i]->anchor_world.x, -right[i]->anchor_world.y,
                                   right[i]->anchor_world.z};
            const Vec3 left_rel = left[i]->anchor_world - rec.base_position;
            const Vec3 mir_rel = mirrored - rec.base_position;
            if ((left_rel - mir_rel).norm() / scale > 0.05) {
                entry.notes.push_back(std::string(group_name(g)) + "[" + std::to_string(i) +
                                      "]: left side deviates from mirrored right by more than 5%");
            }
        }
    }
}

CurationEntry make_entry(const RobotRecord& rec, const UpperBodyStructure& s) {
    CurationEntry entry;
    entry.name = rec.name;
    const SlotLayout& layout = SlotLayout::screw();
    bool wrist_present = false;
    for (int slot = 0; slot < layout.slot_count(); ++slot) {
        if (!s.presence[static_cast<std::size_t>(slot)]) entry.padded_slots.push_back(slot);
        if (layout.slot_group(slot) == GroupKind::Wrist && s.presence[static_cast<std::size_t>(slot)]) {
            wrist_present = true;
        }
    }
    if (!wrist_present) {
        entry.notes.push_back("virtual wrist: no wrist joint present, placeholder inserted");
    }
    const Vec3 mean_shoulder = (rec.shoulder_left + rec.shoulder_right) * 0.5;
    const double scale = (mean_shoulder - rec.base_position).norm();
    asymmetry_notes(rec, scale, entry);
    return entry;
}

}  // namespace

CuratedSet curate(const std::vector<RobotRecord>& records) {
    CuratedSet set;
    for (const auto& rec : records) {
        const UpperBodyStructure s =
            normalize_structure(to_grouped(rec), rec.base_position, rec.shoulder_left,
                                rec.shoulder_right);
        set.names.push_back(rec.name);
        set.features.push_back(flatten(s));
        set.report.push_back(make_entry(rec, s));
    }
    return set;
}

CuratedSet curate_dh(const std::vector<RobotRecord>& records) {
    CuratedSet set;
    for (const auto& rec : records) {
        const UpperBodyStructure s =
            normalize_structure(to_grouped(rec), rec.base_position, rec.shoulder_left,
                                rec.shoulder_right);
        const DhChainHalf half = dh_extract(s);
        set.names.push_back(rec.name);
        set.features.push_back(dh_flatten(half));
        set.report.push_back(make_entry(rec, s));
    }
    return set;
}

std::string curation_report_text(const CuratedSet& set) {
    const SlotLayout& layout = SlotLayout::screw();
    std::ostringstream out;
    for (const auto& entry : set.report) {
        out << entry.name << "\n";
        if (entry.padded_slots.empty()) {
            out << "  padded slots: none\n";
        } else {
            out << "  padded slots (" << entry.padded_slots.size() << "):";
            for (int slot : entry.padded_slots) out << ' ' << layout.slot_name(slot);
            out << "\n";
        }
        for (const auto& note : entry.notes) out << "  note: " << note << "\n";
    }
    return out.str();
}

std::string features_to_csv(const CuratedSet& set, const std::string& kind) {
    CsvWriter csv;
    std::vector<std::string> header;
    if (kind == "dh") {
        const DhLayout& layout = DhLayout::standard();
        static const char* comp[] = {"theta", "d", "a", "alpha", "tau"};
        for (int slot = 0; slot < layout.slot_count(); ++slot) {
            for (const char* c : comp) header.push_back(layout.slot_name(slot) + "_" + c);
        }
    } else {
        const SlotLayout& layout = SlotLayout::screw();
        static const char* comp[] = {"wx", "wy", "wz", "qx", "qy", "qz"};
        for (int slot = 0; slot < layout.slot_count(); ++slot) {
            for (const char* c : comp) header.push_back(layout.slot_name(slot) + "_" + c);
        }
    }
    csv.row(header);
    for (const auto& row : set.features) {
        std::vector<std::string> fields;
        fields.reserve(row.size());
        for (double v : row) fields.push_back(format_double(v));
        csv.row(fields);
    }
    return csv.str();
}

std::vector<Vec> features_from_csv(const std::string& text) {
    const auto rows = read_csv(text);
    std::vector<Vec> out;
    for (std::size_t r = 1; r < rows.size(); ++r) {  // skip header
        Vec v;
        v.reserve(rows[r].size());
        for (const auto& field : rows[r]) v.push_back(std::strtod(field.c_str(), nullptr));
        out.push_back(std::move(v));
    }
    return out;
}

namespace {

struct ProtoJoint {
    GroupKind group;
    Vec3 axis;
    Vec3 anchor;
    bool optional = false;  // may be dropped under jitter
};

// Archetype right-half prototypes in meters, base at the origin,
// z up, x forward, right side at negative y.
std::vector<ProtoJoint> archetype_joints(int which, double& shoulder_y, double& shoulder_z) {
    std::vector<ProtoJoint> js;
    auto add = [&](GroupKind g, Vec3 axis, Vec3 anchor, bool opt = false) {
        js.push_back({g, axis, anchor, opt});
    };
    if (which == 0) {
        // tall humanoid: articulated spine, two-joint neck, full arm
        shoulder_y = -0.22;
        shoulder_z = 0.55;
        add(GroupKind::Torso, {0, 0, 1}, {0, 0, 0.12});
        add(GroupKind::Torso, {0, 1, 0}, {0, 0, 0.26});
        add(GroupKind::Torso, {1, 0, 0}, {0, 0, 0.40});
        add(GroupKind::Neck, {0, 0, 1}, {0, 0, 0.60});
        add(GroupKind::Neck, {0, 1, 0}, {0, 0, 0.66}, true);
        add(GroupKind::ShoulderGirdle, {0, 0, 1}, {0, -0.10, 0.55}, true);
        add(GroupKind::Shoulder, {1, 0, 0}, {0, -0.22, 0.55});
        add(GroupKind::Shoulder, {0, 1, 0}, {0, -0.22, 0.55});
        add(GroupKind::Shoulder, {0, 0, 1}, {0, -0.22, 0.55});
        add(GroupKind::UpperArm, {0, 0, 1}, {0, -0.24, 0.42}, true);
        add(GroupKind::Elbow, {0, 1, 0}, {0, -0.26, 0.28});
        add(GroupKind::Forearm, {0, 0, 1}, {0, -0.27, 0.18}, true);
        add(GroupKind::Wrist, {0, 1, 0}, {0, -0.28, 0.05});
        add(GroupKind::Wrist, {1, 0, 0}, {0, -0.28, 0.03}, true);
    } else if (which == 1) {
        // pedestal dual-arm platform: single torso yaw, wide shoulders
        shoulder_y = -0.30;
        shoulder_z = 0.35;
        add(GroupKind::Torso, {0, 0, 1}, {0, 0, 0.10});
        add(GroupKind::Neck, {0, 1, 0}, {0, 0, 0.45});
        add(GroupKind::Shoulder, {1, 0, 0}, {0, -0.30, 0.35});
        add(GroupKind::Shoulder, {0, 1, 0}, {0, -0.30, 0.35});
        add(GroupKind::Elbow, {0, 1, 0}, {0, -0.34, 0.05});
        add(GroupKind::Forearm, {0, 0, 1}, {0, -0.35, -0.05});
        add(GroupKind::Wrist, {0, 1, 0}, {0, -0.36, -0.18});
        add(GroupKind::Wrist, {1, 0, 0}, {0, -0.36, -0.20}, true);
        add(GroupKind::Wrist, {0, 0, 1}, {0, -0.36, -0.22}, true);
    } else {
        // compact humanoid: short trunk, simple arm
        shoulder_y = -0.12;
        shoulder_z = 0.28;
        add(GroupKind::Torso, {0, 0, 1}, {0, 0, 0.06});
        add(GroupKind::Torso, {0, 1, 0}, {0, 0, 0.14}, true);
        add(GroupKind::Neck, {0, 1, 0}, {0, 0, 0.32});
        add(GroupKind::Shoulder, {1, 0, 0}, {0, -0.12, 0.28});
        add(GroupKind::Shoulder, {0, 1, 0}, {0, -0.12, 0.28});
        add(GroupKind::Elbow, {0, 1, 0}, {0, -0.14, 0.13});
        add(GroupKind::Wrist, {0, 1, 0}, {0, -0.15, 0.02}, true);  // some lack wrists entirely
    }
    return js;
}

Vec3 jitter_axis(const Vec3& axis, double amount, Rng& rng) {
    if (amount <= 0.0) return axis;
    const Vec3 noise{rng.gaussian(), rng.gaussian(), rng.gaussian()};
    return (axis + noise * amount).normalized();
}

}  // namespace

std::vector<RobotRecord> synthesize_robots(int n, std::uint64_t seed, double jitter) {
    std::vector<RobotRecord> out;
    out.reserve(static_cast<std::size_t>(n));
    static const char* family[] = {"tall", "pedestal", "compact"};

    for (int i = 0; i < n; ++i) {
        Rng rng(seed + static_cast<std::uint64_t>(i));
        const int which = i % 3;

        double shoulder_y = 0.0, shoulder_z = 0.0;
        std::vector<ProtoJoint> proto = archetype_joints(which, shoulder_y, shoulder_z);

        const double len_scale = jitter > 0.0 ? 1.0 + 0.15 * jitter * rng.gaussian() : 1.0;
        const double width_scale = jitter > 0.0 ? 1.0 + 0.12 * jitter * rng.gaussian() : 1.0;
        const double axis_amount = 0.18 * jitter;

        RobotRecord rec;
        rec.name = std::string(family[which]) + "_" + std::to_string(i);
        rec.type = which == 1 ? "non-bipedal" : "humanoid";
        rec.base_position = Vec3{0, 0, 0};

        auto place = [&](const Vec3& p) {
            Vec3 q{p.x * width_scale, p.y * width_scale, p.z * len_scale};
            if (jitter > 0.0) {
                q += Vec3{rng.gaussian(), rng.gaussian(), rng.gaussian()} * (0.01 * jitter);
            }
            return q;
        };

        int last_central = -1;
        std::vector<std::pair<RecordJoint, int>> right_arm;  // joint, parent-in-right-arm

        for (const auto& pj : proto) {
            if (pj.optional && jitter > 0.0 && rng.uniform() < 0.35) continue;
            RecordJoint j;
            j.group = pj.group;
            j.axis_world = jitter_axis(pj.axis, axis_amount, rng);
            j.anchor_world = place(pj.anchor);
            if (group_is_central(pj.group)) {
                j.side = Side::None;
                j.parent = last_central;
                rec.joints.push_back(j);
                last_central = static_cast<int>(rec.joints.size()) - 1;
            } else {
                j.side = Side::Right;
                right_arm.push_back({j, -1});
            }
        }
        // wire the right arm as a chain, then mirror to the left
        int prev = last_central;
        std::vector<int> right_indices;
        for (auto& [j, parent] : right_arm) {
            (void)parent;
            j.parent = prev;
            rec.joints.push_back(j);
            prev = static_cast<int>(rec.joints.size()) - 1;
            right_indices.push_back(prev);
        }
        int prev_left = last_central;
        for (int idx : right_indices) {
            const RecordJoint& r = rec.joints[static_cast<std::size_t>(idx)];
            RecordJoint l = r;
            l.side = Side::Left;
            l.axis_world = {r.axis_world.x, -r.axis_world.y, r.axis_world.z};
            l.anchor_world = {r.anchor_world.x, -r.anchor_world.y, r.anchor_world.z};
            l.parent = prev_left;
            rec.joints.push_back(l);
            prev_left = static_cast<int>(rec.joints.size()) - 1;
        }

        rec.shoulder_right = {0, shoulder_y * width_scale, shoulder_z * len_scale};
        rec.shoulder_left = {rec.shoulder_right.x, -rec.shoulder_right.y, rec.shoulder_right.z};
        out.push_back(std::move(rec));
    }
    return out;
}

}  // namespace morphopt
