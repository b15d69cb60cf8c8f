#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <algorithm>
#include <cmath>

#include "morphopt/dataset.hpp"
#include "morphopt/errors.hpp"
#include "morphopt/io_util.hpp"
#include "morphopt/retarget.hpp"
#include "morphopt/rng.hpp"
#include "morphopt/screw_model.hpp"

using namespace morphopt;

namespace {

RobotRecord full_right_half_record() {
    RobotRecord rec;
    rec.name = "full20";
    rec.type = "humanoid";
    rec.base_position = {0, 0, 0};
    rec.shoulder_left = {0, 0.3, 1.0};
    rec.shoulder_right = {0, -0.3, 1.0};
    const SlotLayout& layout = SlotLayout::screw();
    int prev = -1;
    for (int slot = 0; slot < layout.slot_count(); ++slot) {
        RecordJoint j;
        j.group = layout.slot_group(slot);
        j.side = group_is_central(j.group) ? Side::None : Side::Right;
        j.axis_world = {0, 0, 1};
        j.anchor_world = {0.01 * slot, j.side == Side::Right ? -0.2 : 0.0, 0.05 * slot};
        j.parent = prev;
        rec.joints.push_back(j);
        prev = slot;
    }
    return rec;
}

}  // namespace

TEST_CASE("record json round trip and schema errors") {
    const auto records = synthesize_robots(3, 5);
    for (const auto& rec : records) {
        const RobotRecord back = record_from_json(record_to_json(rec));
        CHECK(back.name == rec.name);
        CHECK(back.type == rec.type);
        REQUIRE(back.joints.size() == rec.joints.size());
        for (std::size_t i = 0; i < rec.joints.size(); ++i) {
            CHECK(back.joints[i].group == rec.joints[i].group);
            CHECK(back.joints[i].side == rec.joints[i].side);
            CHECK((back.joints[i].axis_world - rec.joints[i].axis_world).norm() == 0.0);
            CHECK((back.joints[i].anchor_world - rec.joints[i].anchor_world).norm() == 0.0);
        }
    }

    CHECK_THROWS_AS(record_from_json("{"), SchemaError);
    CHECK_THROWS_AS(record_from_json(R"({"name":"x","type":"humanoid"})"), SchemaError);
    CHECK_THROWS_AS(record_from_json(R"({
        "name":"x","type":"humanoid","base_position":[0,0,0],
        "shoulder_positions":{"left":[0,1,1],"right":[0,-1,1]},
        "joints":[{"group":"flipper","side":"left","axis_world":[0,0,1],"anchor_world":[0,0,0]}]
    })"),
                    SchemaError);
    CHECK_THROWS_AS(record_from_json(R"({
        "name":"x","type":"humanoid","base_position":[0,0,0],
        "shoulder_positions":{"left":[0,1,1],"right":[0,-1,1]},
        "joints":[{"group":"torso","side":"left","axis_world":[0,0,1],"anchor_world":[0,0,0]}]
    })"),
                    SchemaError);
}

TEST_CASE("synthesize_robots") {
    SUBCASE("deterministic and curate-able") {
        const auto a = synthesize_robots(30, 7);
        const auto b = synthesize_robots(30, 7);
        REQUIRE(a.size() == 30);
        for (std::size_t i = 0; i < a.size(); ++i) {
            CHECK(a[i].name == b[i].name);
            REQUIRE(a[i].joints.size() == b[i].joints.size());
            for (std::size_t j = 0; j < a[i].joints.size(); ++j) {
                CHECK((a[i].joints[j].anchor_world - b[i].joints[j].anchor_world).norm() == 0.0);
            }
        }
        const CuratedSet set = curate(a);
        CHECK(set.features.size() == 30);
        for (const auto& f : set.features) CHECK(f.size() == 120);
    }
    SUBCASE("zero jitter reproduces the archetypes") {
        const auto a = synthesize_robots(3, 1, 0.0);
        const auto b = synthesize_robots(3, 999, 0.0);
        for (std::size_t i = 0; i < a.size(); ++i) {
            REQUIRE(a[i].joints.size() == b[i].joints.size());
            for (std::size_t j = 0; j < a[i].joints.size(); ++j) {
                CHECK((a[i].joints[j].anchor_world - b[i].joints[j].anchor_world).norm() == 0.0);
                CHECK((a[i].joints[j].axis_world - b[i].joints[j].axis_world).norm() == 0.0);
            }
        }
        // tall archetype: 3 torso + 2 neck + girdle + 3 shoulder + upper arm +
        // elbow + forearm + 2 wrist = 14 right-half joints, mirrored arm
        std::size_t right = 0, left = 0, central = 0;
        for (const auto& j : a[0].joints) {
            central += j.side == Side::None;
            right += j.side == Side::Right;
            left += j.side == Side::Left;
        }
        CHECK(central == 5);
        CHECK(right == 9);
        CHECK(left == right);
    }
    SUBCASE("axis norms are unit or zero") {
        for (const auto& rec : synthesize_robots(30, 11)) {
            for (const auto& j : rec.joints) {
                const double n = j.axis_world.norm();
                CHECK((n == 0.0 || std::abs(n - 1.0) < 1e-9));
            }
        }
    }
}

TEST_CASE("curate") {
    SUBCASE("a full 20-slot right half pads nothing") {
        const CuratedSet set = curate({full_right_half_record()});
        REQUIRE(set.report.size() == 1);
        CHECK(set.report[0].padded_slots.empty());
    }
    SUBCASE("a missing neck group falls back to the torso mean") {
        RobotRecord rec = full_right_half_record();
        rec.joints.erase(std::remove_if(rec.joints.begin(), rec.joints.end(),
                                        [](const RecordJoint& j) { return j.group == GroupKind::Neck; }),
                         rec.joints.end());
        const CuratedSet set = curate({rec});
        const SlotLayout& layout = SlotLayout::screw();
        const int neck0 = layout.group_offset(GroupKind::Neck);
        CHECK(set.report[0].padded_slots.size() == 4);

        // torso mean (normalized) from the surviving torso joints
        Vec3 mean;
        const double scale = (Vec3{0, 0, 1.0} - rec.base_position).norm();
        int count = 0;
        for (const auto& j : rec.joints) {
            if (j.group != GroupKind::Torso) continue;
            mean += (j.anchor_world - rec.base_position) / scale;
            ++count;
        }
        mean = mean / count;
        const auto& f = set.features[0];
        for (int slot = neck0; slot < neck0 + 4; ++slot) {
            CHECK(f[static_cast<std::size_t>(6 * slot + 3)] == doctest::Approx(mean.x).epsilon(1e-12));
            CHECK(f[static_cast<std::size_t>(6 * slot + 4)] == doctest::Approx(mean.y).epsilon(1e-12));
            CHECK(f[static_cast<std::size_t>(6 * slot + 5)] == doctest::Approx(mean.z).epsilon(1e-12));
            CHECK(f[static_cast<std::size_t>(6 * slot)] == 0.0);
        }
    }
    SUBCASE("overfull groups raise CapacityExceeded") {
        RobotRecord rec = full_right_half_record();
        RecordJoint extra = rec.joints[11];
        extra.group = GroupKind::Shoulder;
        rec.joints.push_back(extra);  // fourth shoulder joint
        CHECK_THROWS_AS(curate({rec}), CapacityExceeded);
    }
    SUBCASE("order independent") {
        auto records = synthesize_robots(8, 13);
        const CuratedSet forward = curate(records);
        std::reverse(records.begin(), records.end());
        const CuratedSet reversed = curate(records);
        for (std::size_t i = 0; i < records.size(); ++i) {
            const auto it = std::find(forward.names.begin(), forward.names.end(), reversed.names[i]);
            REQUIRE(it != forward.names.end());
            const std::size_t j = static_cast<std::size_t>(it - forward.names.begin());
            CHECK(forward.features[j] == reversed.features[i]);
        }
    }
    SUBCASE("asymmetric records get a note") {
        RobotRecord rec = full_right_half_record();
        // add a distorted left arm
        for (const auto& j : full_right_half_record().joints) {
            if (j.side != Side::Right) continue;
            RecordJoint l = j;
            l.side = Side::Left;
            l.anchor_world = {j.anchor_world.x + 0.3, -j.anchor_world.y, j.anchor_world.z};
            rec.joints.push_back(l);
        }
        const CuratedSet set = curate({rec});
        bool found = false;
        for (const auto& note : set.report[0].notes) {
            found |= note.find("deviates") != std::string::npos;
        }
        CHECK(found);
    }
    SUBCASE("decoded active count equals the original joint count") {
        for (const auto& rec : synthesize_robots(12, 17)) {
            const CuratedSet set = curate({rec});
            const FullBodyStructure fb = activate_decoded(set.features[0], 0.5);
            CHECK(fb.active_total() == rec.joints.size());
        }
    }
    SUBCASE("virtual wrist note fires when no wrist joint exists") {
        RobotRecord rec = full_right_half_record();
        rec.joints.erase(std::remove_if(rec.joints.begin(), rec.joints.end(),
                                        [](const RecordJoint& j) { return j.group == GroupKind::Wrist; }),
                         rec.joints.end());
        const CuratedSet set = curate({rec});
        bool found = false;
        for (const auto& note : set.report[0].notes) {
            found |= note.find("virtual wrist") != std::string::npos;
        }
        CHECK(found);
    }
}

TEST_CASE("feature csv export and reload") {
    const CuratedSet set = curate(synthesize_robots(5, 19));
    const std::string csv = features_to_csv(set, "screw");
    const auto rows = read_csv(csv);
    REQUIRE(rows.size() == 6);
    CHECK(rows[0].size() == 120);
    CHECK(rows[0][0] == "torso0_wx");
    CHECK(rows[0][119] == "wrist2_qz");

    const std::vector<Vec> reloaded = features_from_csv(csv);
    REQUIRE(reloaded.size() == 5);
    for (std::size_t i = 0; i < 5; ++i) CHECK(reloaded[i] == set.features[i]);

    const CuratedSet dh = curate_dh(synthesize_robots(5, 19));
    const std::string dh_csv = features_to_csv(dh, "dh");
    const auto dh_rows = read_csv(dh_csv);
    CHECK(dh_rows[0].size() == 105);
    CHECK(dh_rows[0][0] == "torso0_theta");
    CHECK(dh_rows[0][104] == "tcp0_tau");
}

TEST_CASE("curation report text lists padded slots") {
    const CuratedSet set = curate(synthesize_robots(6, 23));
    const std::string text = curation_report_text(set);
    for (const auto& name : set.names) CHECK(text.find(name) != std::string::npos);
    CHECK(text.find("padded slots") != std::string::npos);
}
