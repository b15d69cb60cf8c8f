#include "morphopt/retarget.hpp"

#include <algorithm>
#include <cmath>

#include "json.hpp"
#include "morphopt/errors.hpp"
#include "morphopt/io_util.hpp"
#include "morphopt/linalg.hpp"

namespace morphopt {

namespace {

// nearest-active-ancestor search order per JOI tag, most specific first
const std::vector<GroupKind>& joi_fallback(const std::string& tag) {
    static const std::vector<GroupKind> neck = {GroupKind::Neck, GroupKind::Torso};
    static const std::vector<GroupKind> shoulder = {GroupKind::Shoulder, GroupKind::ShoulderGirdle,
                                                    GroupKind::Torso};
    static const std::vector<GroupKind> elbow = {GroupKind::Elbow, GroupKind::UpperArm,
                                                 GroupKind::Shoulder, GroupKind::ShoulderGirdle,
                                                 GroupKind::Torso};
    static const std::vector<GroupKind> wrist = {GroupKind::Wrist, GroupKind::Forearm,
                                                 GroupKind::Elbow, GroupKind::UpperArm,
                                                 GroupKind::Shoulder, GroupKind::ShoulderGirdle,
                                                 GroupKind::Torso};
    if (tag == "neck" || tag == "head") return neck;
    if (tag == "l_shoulder" || tag == "r_shoulder") return shoulder;
    if (tag == "l_elbow" || tag == "r_elbow") return elbow;
    return wrist;
}

// index of the first (or last) active joint of `group` on `side`, -1 if none
int find_joint(const FullBodyStructure& s, GroupKind group, Side side, bool last) {
    int found = -1;
    for (std::size_t i = 0; i < s.joints.size(); ++i) {
        const auto& j = s.joints[i];
        if (j.group != group) continue;
        if (group_is_central(group) ? false : j.side != side) continue;
        found = static_cast<int>(i);
        if (!last) return found;
    }
    return found;
}

struct JoiAnchor {
    int joint = -1;  // -1 = base
    Vec3 home;
};

JoiAnchor resolve_joi(const Candidate& c, const std::string& tag) {
    const FullBodyStructure& s = c.structure;
    if (tag == "torso_root") return {-1, Vec3{}};

    const Side side = tag[0] == 'l' ? Side::Left : (tag[0] == 'r' ? Side::Right : Side::None);
    const bool last = (tag == "head" || tag == "l_wrist" || tag == "r_wrist");

    // DH candidates carry an explicit wrist-end point
    if (tag == "l_wrist" && c.tcp_left) {
        const int j = find_joint(s, GroupKind::Wrist, Side::Left, true);
        if (j >= 0) return {j, *c.tcp_left};
    }
    if (tag == "r_wrist" && c.tcp_right) {
        const int j = find_joint(s, GroupKind::Wrist, Side::Right, true);
        if (j >= 0) return {j, *c.tcp_right};
    }

    bool first_group = true;
    for (GroupKind g : joi_fallback(tag)) {
        const Side gs = group_is_central(g) ? Side::None : side;
        // the tag's own group honors first/last; fallbacks take the most distal
        const int j = find_joint(s, g, gs, first_group ? last : true);
        first_group = false;
        if (j >= 0) return {j, s.joints[static_cast<std::size_t>(j)].q};
    }
    return {-1, Vec3{}};
}

const std::vector<std::string>& joi_tags() {
    static const std::vector<std::string> tags = {"torso_root", "neck",    "head",
                                                  "l_shoulder", "l_elbow", "l_wrist",
                                                  "r_shoulder", "r_elbow", "r_wrist"};
    return tags;
}

// human JOI tree: parent candidates per tag, nearest first
std::vector<std::string> joi_parents(const std::string& tag) {
    if (tag == "neck") return {"torso_root"};
    if (tag == "head") return {"neck", "torso_root"};
    if (tag == "l_shoulder" || tag == "r_shoulder") return {"neck", "torso_root"};
    if (tag == "l_elbow") return {"l_shoulder", "neck", "torso_root"};
    if (tag == "r_elbow") return {"r_shoulder", "neck", "torso_root"};
    if (tag == "l_wrist") return {"l_elbow", "l_shoulder", "neck", "torso_root"};
    if (tag == "r_wrist") return {"r_elbow", "r_shoulder", "neck", "torso_root"};
    return {};
}

}  // namespace

KinematicChain build_joi_chain(const Candidate& c) {
    KinematicChain chain = KinematicChain::from_structure(c.structure);
    for (const auto& tag : joi_tags()) {
        const JoiAnchor a = resolve_joi(c, tag);
        chain.add_marker(tag, a.joint, a.home);
    }
    return chain;
}

SimilarityTransform procrustes_align(const std::vector<Vec3>& A, const std::vector<Vec3>& B) {
    if (A.size() != B.size() || A.empty()) {
        throw DimensionMismatch("point sets differ in size or are empty");
    }
    const double n = static_cast<double>(A.size());
    Vec3 mu_a, mu_b;
    for (const auto& p : A) mu_a += p;
    for (const auto& p : B) mu_b += p;
    mu_a = mu_a / n;
    mu_b = mu_b / n;

    double var_b = 0.0;
    Mat3 cov = Mat3::zero();
    for (std::size_t i = 0; i < A.size(); ++i) {
        const Vec3 a = A[i] - mu_a;
        const Vec3 b = B[i] - mu_b;
        var_b += b.norm2();
        for (int r = 0; r < 3; ++r)
            for (int col = 0; col < 3; ++col) cov(r, col) += a[r] * b[col];
    }
    var_b /= n;
    for (int i = 0; i < 9; ++i) cov.a[i] /= n;

    if (var_b < 1e-18) throw DegenerateGeometry("target point cloud has no spread");

    const linalg::Svd3 svd = linalg::svd3(cov);
    Vec3 signs{1.0, 1.0, 1.0};
    if (svd.U.det() * svd.V.det() < 0.0) signs.z = -1.0;

    Mat3 S = Mat3::zero();
    S(0, 0) = signs.x;
    S(1, 1) = signs.y;
    S(2, 2) = signs.z;
    const Mat3 R = svd.U * S * svd.V.transposed();
    const double trace_ds = svd.sigma.x * signs.x + svd.sigma.y * signs.y + svd.sigma.z * signs.z;
    const double s = trace_ds / var_b;
    if (!(s > 1e-12)) throw DegenerateGeometry("optimal similarity scale collapsed to zero");

    SimilarityTransform out;
    out.s = s;
    out.R = R;
    out.t = mu_a - R * mu_b * s;
    return out;
}

namespace {

void check_clip_match(const MotionClip& src, const MotionClip& tar) {
    if (src.frame_count() != tar.frame_count()) {
        throw DimensionMismatch("clip frame counts differ: " + std::to_string(src.frame_count()) +
                                " vs " + std::to_string(tar.frame_count()));
    }
    if (src.joints.size() != tar.joints.size()) {
        throw DimensionMismatch("clip joint sets differ in size");
    }
}

}  // namespace

PaResult pa_mpjpe_detail(const MotionClip& src, const MotionClip& tar, bool per_frame_alignment) {
    check_clip_match(src, tar);
    // pair tar joints to src order by tag (falls back to positional order)
    std::vector<std::size_t> tar_of_src(src.joints.size());
    for (std::size_t j = 0; j < src.joints.size(); ++j) {
        const int k = tar.joint_index(src.joints[j]);
        tar_of_src[j] = k >= 0 ? static_cast<std::size_t>(k) : j;
    }

    PaResult res;
    const std::size_t J = src.joints.size();
    const std::size_t F = src.frame_count();

    if (per_frame_alignment) {
        double sum = 0.0;
        for (std::size_t f = 0; f < F; ++f) {
            std::vector<Vec3> A, B;
            A.reserve(J);
            B.reserve(J);
            for (std::size_t j = 0; j < J; ++j) {
                A.push_back(src.frames[f][j]);
                B.push_back(tar.frames[f][tar_of_src[j]]);
            }
            const SimilarityTransform T = procrustes_align(A, B);
            double frame_sum = 0.0;
            for (std::size_t j = 0; j < J; ++j) frame_sum += (A[j] - T.apply(B[j])).norm();
            res.per_frame.push_back(frame_sum / static_cast<double>(J));
            sum += frame_sum;
        }
        res.raw = sum / static_cast<double>(F * J);
        res.scaled = res.raw * 100.0;
        return res;
    }

    std::vector<Vec3> A, B;
    A.reserve(F * J);
    B.reserve(F * J);
    for (std::size_t f = 0; f < F; ++f) {
        for (std::size_t j = 0; j < J; ++j) {
            A.push_back(src.frames[f][j]);
            B.push_back(tar.frames[f][tar_of_src[j]]);
        }
    }
    res.transform = procrustes_align(A, B);
    double sum = 0.0;
    for (std::size_t f = 0; f < F; ++f) {
        double frame_sum = 0.0;
        for (std::size_t j = 0; j < J; ++j) {
            frame_sum += (A[f * J + j] - res.transform.apply(B[f * J + j])).norm();
        }
        res.per_frame.push_back(frame_sum / static_cast<double>(J));
        sum += frame_sum;
    }
    res.raw = sum / static_cast<double>(F * J);
    res.scaled = res.raw * 100.0;
    return res;
}

double pa_mpjpe(const MotionClip& src, const MotionClip& tar) {
    return pa_mpjpe_detail(src, tar).scaled;
}

MotionClip retarget(const Candidate& candidate, const MotionClip& src, const RetargetSpec& spec) {
    if (src.frame_count() == 0) throw DimensionMismatch("source clip is empty");

    KinematicChain chain = build_joi_chain(candidate);

    // robot JOI home positions and segment lengths along the human JOI tree
    const JointConfig home_cfg = JointConfig::home(chain.joints.size());
    const FkResult home_fk = forward_kinematics(chain, home_cfg);

    struct Edge {
        int child_tag;   // index into src.joints
        int parent_tag;  // index into src.joints, -1 for the root itself
        double robot_len;
        int marker;  // chain marker for the child tag
    };
    std::vector<Edge> edges;

    auto src_index = [&](const std::string& tag) { return src.joint_index(tag); };
    auto marker_home = [&](const std::string& tag) {
        const int m = chain.marker_index(tag);
        return home_fk.marker_positions[static_cast<std::size_t>(m)];
    };

    for (const auto& tag : joi_tags()) {
        const int child = src_index(tag);
        if (child < 0 || tag == "torso_root") continue;
        int parent = -1;
        std::string parent_tag;
        for (const auto& pt : joi_parents(tag)) {
            parent = src_index(pt);
            if (parent >= 0) {
                parent_tag = pt;
                break;
            }
        }
        if (parent < 0) continue;  // isolated tag: left untargeted
        Edge e;
        e.child_tag = child;
        e.parent_tag = parent;
        e.robot_len = (marker_home(tag) - marker_home(parent_tag)).norm();
        e.marker = chain.marker_index(tag);
        edges.push_back(e);
    }

    const int root_marker = chain.marker_index("torso_root");
    const Vec3 robot_root = home_fk.marker_positions[static_cast<std::size_t>(root_marker)];

    MotionClip out;
    out.frame_time = src.frame_time;
    out.joints = src.joints;

    JointConfig cfg = home_cfg;  // warm start carrier
    std::vector<Vec3> last_dir(src.joints.size());

    for (std::size_t f = 0; f < src.frame_count(); ++f) {
        // build targets by walking the human tree with robot segment lengths
        std::vector<Vec3> target(src.joints.size());
        const int root_idx = src_index("torso_root");
        if (root_idx >= 0) target[static_cast<std::size_t>(root_idx)] = robot_root;
        for (const auto& e : edges) {
            const Vec3 human_seg = src.frames[f][static_cast<std::size_t>(e.child_tag)] -
                                   src.frames[f][static_cast<std::size_t>(e.parent_tag)];
            Vec3 dir = human_seg;
            const double len = dir.norm();
            if (len > 1e-12) {
                dir = dir / len;
                last_dir[static_cast<std::size_t>(e.child_tag)] = dir;
            } else {
                dir = last_dir[static_cast<std::size_t>(e.child_tag)];
            }
            target[static_cast<std::size_t>(e.child_tag)] =
                target[static_cast<std::size_t>(e.parent_tag)] + dir * e.robot_len;
        }

        std::vector<MarkerTarget> ik_targets;
        ik_targets.reserve(edges.size());
        for (const auto& e : edges) {
            ik_targets.push_back({e.marker, target[static_cast<std::size_t>(e.child_tag)]});
        }

        const IkResult ik = solve_ik(chain, ik_targets, cfg, spec.ik);
        cfg = ik.config;

        const FkResult fk = forward_kinematics(chain, cfg);
        std::vector<Vec3> row(src.joints.size());
        for (std::size_t j = 0; j < src.joints.size(); ++j) {
            const int m = chain.marker_index(src.joints[j]);
            row[j] = m >= 0 ? fk.marker_positions[static_cast<std::size_t>(m)] : Vec3{};
        }
        out.frames.push_back(std::move(row));
    }
    return out;
}

int count_active_joints(const FullBodyStructure& s) {
    return static_cast<int>(s.central_count + 2 * s.arm_count);
}

ObjectiveReport total_objective(const Candidate& candidate,
                                const std::vector<MotionClip>& motions,
                                const ObjectiveParams& params) {
    ObjectiveReport rep;
    rep.n_tot = count_active_joints(candidate.structure);
    for (const auto& motion : motions) {
        const MotionClip robot = retarget(candidate, motion, params.spec);
        double term = 0.0;
        double raw = 0.0;
        std::vector<double> per_frame;
        try {
            const PaResult pa = pa_mpjpe_detail(motion, robot, params.spec.per_frame_alignment);
            term = pa.scaled;
            raw = pa.raw;
            per_frame = pa.per_frame;
        } catch (const DegenerateGeometry&) {
            // collapsed robot cloud: limiting alignment puts every robot
            // marker at the source centroid
            Vec3 mu;
            std::size_t count = 0;
            for (const auto& frame : motion.frames) {
                for (const auto& p : frame) {
                    mu += p;
                    ++count;
                }
            }
            mu = mu / static_cast<double>(count);
            double sum = 0.0;
            for (const auto& frame : motion.frames) {
                double fs = 0.0;
                for (const auto& p : frame) fs += (p - mu).norm();
                per_frame.push_back(fs / static_cast<double>(frame.size()));
                sum += fs;
            }
            raw = sum / static_cast<double>(count);
            term = raw * 100.0;
        }
        rep.per_motion.push_back(term);
        rep.per_frame.push_back(std::move(per_frame));
        rep.pa_mpjpe += term;
        rep.pa_mpjpe_raw += raw;
    }
    rep.total = rep.pa_mpjpe + params.lambda_joint * rep.n_tot;
    return rep;
}

std::string ObjectiveReport::to_json() const {
    nlohmann::json j;
    j["pa_mpjpe"] = pa_mpjpe;
    j["pa_mpjpe_raw"] = pa_mpjpe_raw;
    j["n_tot"] = n_tot;
    j["total"] = total;
    j["per_motion"] = per_motion;
    j["per_frame"] = per_frame;
    return j.dump(2);
}

}  // namespace morphopt
