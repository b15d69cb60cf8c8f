#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "morphopt/dh_model.hpp"
#include "morphopt/linalg.hpp"
#include "morphopt/screw_model.hpp"

namespace morphopt {

struct RecordJoint {
    GroupKind group = GroupKind::Torso;
    Side side = Side::None;
    Vec3 axis_world;
    Vec3 anchor_world;
    int parent = -1;
};

// One curated robot document: world-frame joint lines in an A-pose plus the
// anchors needed for normalization.
struct RobotRecord {
    std::string name;
    std::string type;  // "humanoid" | "non-bipedal"
    Vec3 base_position;
    Vec3 shoulder_left;
    Vec3 shoulder_right;
    std::vector<RecordJoint> joints;
};

RobotRecord record_from_json(const std::string& text);
std::string record_to_json(const RobotRecord& rec);

struct CurationEntry {
    std::string name;
    std::vector<int> padded_slots;
    std::vector<std::string> notes;
};

struct CuratedSet {
    std::vector<std::string> names;
    std::vector<Vec> features;  // 120 per robot (screw) or 105 (DH)
    std::vector<CurationEntry> report;
};

// Screw-path curation: center on the base, scale by the shoulder-to-base
// distance, keep central + right-side joints, pad, flatten. Notes flag
// left/right asymmetry beyond 5% of the reference height and virtual wrists.
CuratedSet curate(const std::vector<RobotRecord>& records);

// DH-path curation: the same normalized right half encoded as DH+tau chains
// (105 features, TCP slot included).
CuratedSet curate_dh(const std::vector<RobotRecord>& records);

std::string curation_report_text(const CuratedSet& set);

// Feature matrix CSV: one row per robot, header naming slot/component.
// kind: "screw" (120 columns) or "dh" (105 columns).
std::string features_to_csv(const CuratedSet& set, const std::string& kind);
std::vector<Vec> features_from_csv(const std::string& text);

// Plausible upper-body families (tall humanoid, pedestal dual-arm, compact
// humanoid) jittered in segment lengths, axis directions and joint counts.
// jitter = 0 reproduces the archetypes exactly.
std::vector<RobotRecord> synthesize_robots(int n, std::uint64_t seed, double jitter = 1.0);

}  // namespace morphopt
