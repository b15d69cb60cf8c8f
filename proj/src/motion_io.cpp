#include "morphopt/motion_io.hpp"

#include <cctype>
#include <cmath>
#include <sstream>

#include "morphopt/errors.hpp"
#include "morphopt/io_util.hpp"

namespace morphopt {

namespace {

constexpr double kPi = 3.14159265358979323846;
constexpr double kDegToRad = kPi / 180.0;

bool is_rotation_channel(const std::string& ch) {
    return ch == "Xrotation" || ch == "Yrotation" || ch == "Zrotation";
}

bool is_channel_name(const std::string& ch) {
    return is_rotation_channel(ch) || ch == "Xposition" || ch == "Yposition" ||
           ch == "Zposition";
}

struct Lexer {
    std::vector<std::pair<std::string, int>> tokens;  // token, line
    std::size_t pos = 0;

    explicit Lexer(const std::string& text) {
        int line = 1;
        std::string cur;
        int cur_line = 1;
        auto flush = [&] {
            if (!cur.empty()) {
                tokens.emplace_back(cur, cur_line);
                cur.clear();
            }
        };
        for (char c : text) {
            if (c == '\n') {
                flush();
                ++line;
            } else if (std::isspace(static_cast<unsigned char>(c))) {
                flush();
            } else {
                if (cur.empty()) cur_line = line;
                cur.push_back(c);
            }
        }
        flush();
    }

    bool done() const { return pos >= tokens.size(); }
    int line() const { return done() ? (tokens.empty() ? 1 : tokens.back().second) : tokens[pos].second; }
    const std::string& peek() const {
        if (done()) throw ParseError("unexpected end of file", line());
        return tokens[pos].first;
    }
    std::string next() {
        if (done()) throw ParseError("unexpected end of file", line());
        return tokens[pos++].first;
    }
    void expect(const std::string& tok) {
        const int ln = line();
        const std::string got = next();
        if (got != tok) throw ParseError("expected '" + tok + "', got '" + got + "'", ln);
    }
    double number() {
        const int ln = line();
        const std::string tok = next();
        char* end = nullptr;
        const double v = std::strtod(tok.c_str(), &end);
        if (end == tok.c_str() || *end != '\0' || !std::isfinite(v)) {
            throw ParseError("expected a number, got '" + tok + "'", ln);
        }
        return v;
    }
    int integer() {
        const double v = number();
        return static_cast<int>(v);
    }
};

void parse_joint(Lexer& lx, BvhSkeleton& skel, int parent, const std::string& name,
                 bool end_site) {
    const int index = static_cast<int>(skel.joints.size());
    skel.joints.push_back({name, Vec3{}, {}, parent, end_site});
    lx.expect("{");
    lx.expect("OFFSET");
    skel.joints[index].offset = {lx.number(), lx.number(), lx.number()};
    if (!end_site) {
        lx.expect("CHANNELS");
        const int ln = lx.line();
        const int n = lx.integer();
        for (int i = 0; i < n; ++i) {
            const std::string ch = lx.next();
            if (!is_channel_name(ch)) throw ParseError("unknown channel '" + ch + "'", ln);
            skel.joints[index].channels.push_back(ch);
        }
        skel.total_channels += n;
    }
    while (lx.peek() != "}") {
        const int ln = lx.line();
        const std::string tok = lx.next();
        if (tok == "JOINT") {
            parse_joint(lx, skel, index, lx.next(), false);
        } else if (tok == "End") {
            lx.expect("Site");
            parse_joint(lx, skel, index, name + "_end", true);
        } else {
            throw ParseError("expected JOINT, End Site or '}', got '" + tok + "'", ln);
        }
    }
    lx.expect("}");
}

}  // namespace

int BvhSkeleton::find(const std::string& name) const {
    for (std::size_t i = 0; i < joints.size(); ++i) {
        if (joints[i].name == name) return static_cast<int>(i);
    }
    return -1;
}

int MotionClip::joint_index(const std::string& tag) const {
    for (std::size_t i = 0; i < joints.size(); ++i) {
        if (joints[i] == tag) return static_cast<int>(i);
    }
    return -1;
}

BvhData parse_bvh(const std::string& text) {
    Lexer lx(text);
    BvhData data;
    lx.expect("HIERARCHY");
    lx.expect("ROOT");
    parse_joint(lx, data.skeleton, -1, lx.next(), false);
    if (!lx.done() && lx.peek() == "ROOT") {
        throw ParseError("multiple ROOT joints", lx.line());
    }
    lx.expect("MOTION");
    lx.expect("Frames:");
    const int n_frames = lx.integer();
    lx.expect("Frame");
    lx.expect("Time:");
    data.frame_time = lx.number();

    // channel kinds in global order, for the degree-to-radian conversion
    std::vector<bool> is_rot;
    for (const auto& j : data.skeleton.joints) {
        for (const auto& ch : j.channels) is_rot.push_back(is_rotation_channel(ch));
    }

    data.frames.reserve(static_cast<std::size_t>(std::max(n_frames, 0)));
    for (int f = 0; f < n_frames; ++f) {
        std::vector<double> row(static_cast<std::size_t>(data.skeleton.total_channels));
        for (int c = 0; c < data.skeleton.total_channels; ++c) {
            if (lx.done()) {
                throw ChannelMismatch("frame " + std::to_string(f) + " ends after " +
                                      std::to_string(c) + " of " +
                                      std::to_string(data.skeleton.total_channels) + " channels");
            }
            row[static_cast<std::size_t>(c)] = lx.number();
            if (is_rot[static_cast<std::size_t>(c)]) row[static_cast<std::size_t>(c)] *= kDegToRad;
        }
        data.frames.push_back(std::move(row));
    }
    if (!lx.done()) {
        throw ChannelMismatch("trailing values after the declared " + std::to_string(n_frames) +
                              " frames");
    }
    return data;
}

namespace {

void write_joint(std::ostringstream& out, const BvhData& data, int index, int depth) {
    const BvhJoint& j = data.skeleton.joints[index];
    const std::string ind(static_cast<std::size_t>(depth) * 2, ' ');
    if (j.parent < 0) {
        out << "ROOT " << j.name << "\n";
    } else if (j.is_end_site) {
        out << ind << "End Site\n";
    } else {
        out << ind << "JOINT " << j.name << "\n";
    }
    out << ind << "{\n";
    out << ind << "  OFFSET " << format_double(j.offset.x) << ' ' << format_double(j.offset.y)
        << ' ' << format_double(j.offset.z) << "\n";
    if (!j.is_end_site) {
        out << ind << "  CHANNELS " << j.channels.size();
        for (const auto& ch : j.channels) out << ' ' << ch;
        out << "\n";
    }
    for (std::size_t k = 0; k < data.skeleton.joints.size(); ++k) {
        if (data.skeleton.joints[k].parent == index) {
            write_joint(out, data, static_cast<int>(k), depth + 1);
        }
    }
    out << ind << "}\n";
}

}  // namespace

std::string write_bvh(const BvhData& data) {
    std::ostringstream out;
    out << "HIERARCHY\n";
    write_joint(out, data, 0, 0);
    out << "MOTION\n";
    out << "Frames: " << data.frames.size() << "\n";
    out << "Frame Time: " << format_double(data.frame_time) << "\n";
    std::vector<bool> is_rot;
    for (const auto& j : data.skeleton.joints) {
        for (const auto& ch : j.channels) is_rot.push_back(is_rotation_channel(ch));
    }
    for (const auto& row : data.frames) {
        for (std::size_t c = 0; c < row.size(); ++c) {
            if (c) out << ' ';
            out << format_double(is_rot[c] ? row[c] / kDegToRad : row[c]);
        }
        out << "\n";
    }
    return out.str();
}

std::vector<Vec3> skeleton_fk(const BvhSkeleton& skel, const std::vector<double>& frame) {
    if (static_cast<int>(frame.size()) != skel.total_channels) {
        throw ChannelMismatch("frame has " + std::to_string(frame.size()) + " channels, skeleton " +
                              std::to_string(skel.total_channels));
    }
    std::vector<Transform> world(skel.joints.size());
    std::vector<Vec3> positions(skel.joints.size());
    std::size_t c = 0;
    for (std::size_t i = 0; i < skel.joints.size(); ++i) {
        const BvhJoint& j = skel.joints[i];
        Transform local = Transform::translation(j.offset);
        for (const auto& ch : j.channels) {
            const double v = frame[c++];
            if (ch == "Xposition") local = local * Transform::translation({v, 0, 0});
            else if (ch == "Yposition") local = local * Transform::translation({0, v, 0});
            else if (ch == "Zposition") local = local * Transform::translation({0, 0, v});
            else if (ch == "Xrotation") local = local * Transform::rotation(rodrigues({1, 0, 0}, v));
            else if (ch == "Yrotation") local = local * Transform::rotation(rodrigues({0, 1, 0}, v));
            else local = local * Transform::rotation(rodrigues({0, 0, 1}, v));
        }
        world[i] = j.parent >= 0 ? world[static_cast<std::size_t>(j.parent)] * local : local;
        positions[i] = world[i].p;
    }
    return positions;
}

JoiNameMap JoiNameMap::cmu_default() {
    JoiNameMap m;
    m.aliases = {
        {"torso_root", {"Hips", "hip", "Hip", "pelvis", "root"}},
        {"neck", {"Neck", "Neck1", "neck"}},
        {"head", {"Head_end", "Head", "head"}},
        {"l_shoulder", {"LeftArm", "LeftUpArm", "lShldr", "LeftShoulder"}},
        {"r_shoulder", {"RightArm", "RightUpArm", "rShldr", "RightShoulder"}},
        {"l_elbow", {"LeftForeArm", "LeftLowArm", "lForeArm", "LeftElbow"}},
        {"r_elbow", {"RightForeArm", "RightLowArm", "rForeArm", "RightElbow"}},
        {"l_wrist", {"LeftHand", "lHand", "LeftWrist", "LeftHand_end"}},
        {"r_wrist", {"RightHand", "rHand", "RightWrist", "RightHand_end"}},
    };
    // BVH convention: y up, character facing +z. World: z up, x forward, y left.
    Mat3 R = Mat3::zero();
    R(0, 2) = 1.0;  // world x <- bvh z
    R(1, 0) = 1.0;  // world y <- bvh x
    R(2, 1) = 1.0;  // world z <- bvh y
    m.axis_map = R;
    return m;
}

MotionClip extract_upper_body(const BvhData& data, const JoiNameMap& name_map, int stride) {
    if (stride < 1) stride = 1;
    const BvhSkeleton& skel = data.skeleton;

    std::vector<std::string> tags;
    std::vector<int> joint_of_tag;
    std::string missing;
    for (const auto& [tag, names] : name_map.aliases) {
        int found = -1;
        for (const auto& n : names) {
            found = skel.find(n);
            if (found >= 0) break;
        }
        if (found < 0) {
            if (!missing.empty()) missing += ", ";
            missing += tag;
        } else {
            tags.push_back(tag);
            joint_of_tag.push_back(found);
        }
    }
    if (!missing.empty()) throw MissingJoi("unresolved joints of interest: " + missing);

    auto tag_pos = [&](const std::vector<Vec3>& fk, const std::string& tag) -> Vec3 {
        for (std::size_t i = 0; i < tags.size(); ++i) {
            if (tags[i] == tag) return fk[static_cast<std::size_t>(joint_of_tag[i])];
        }
        throw MissingJoi("name map must resolve " + tag);
    };

    // normalization scale from the rest pose (all channels zero)
    const std::vector<double> zero(static_cast<std::size_t>(skel.total_channels), 0.0);
    const std::vector<Vec3> rest = skeleton_fk(skel, zero);
    const Vec3 rest_root = tag_pos(rest, "torso_root");
    const Vec3 rest_mid = (tag_pos(rest, "l_shoulder") + tag_pos(rest, "r_shoulder")) * 0.5;
    const double scale = (rest_mid - rest_root).norm();
    if (scale <= 1e-9) throw DegenerateScale("shoulder-to-root rest distance is zero");

    MotionClip clip;
    clip.frame_time = data.frame_time * stride;
    clip.joints = tags;
    for (std::size_t f = 0; f < data.frames.size(); f += static_cast<std::size_t>(stride)) {
        const std::vector<Vec3> fk = skeleton_fk(skel, data.frames[f]);
        const Vec3 root = tag_pos(fk, "torso_root");
        std::vector<Vec3> row;
        row.reserve(tags.size());
        for (std::size_t i = 0; i < tags.size(); ++i) {
            const Vec3 p = (fk[static_cast<std::size_t>(joint_of_tag[i])] - root) / scale;
            const Vec3 w = name_map.axis_map * p;
            if (!w.finite()) throw ParseError("non-finite joint position in frame " + std::to_string(f));
            row.push_back(w);
        }
        clip.frames.push_back(std::move(row));
    }
    return clip;
}

std::string clip_to_csv(const MotionClip& clip) {
    CsvWriter csv;
    csv.row({"frame", "joint", "x", "y", "z"});
    for (std::size_t f = 0; f < clip.frames.size(); ++f) {
        for (std::size_t j = 0; j < clip.joints.size(); ++j) {
            const Vec3& p = clip.frames[f][j];
            csv.row({std::to_string(f), clip.joints[j], format_double(p.x), format_double(p.y),
                     format_double(p.z)});
        }
    }
    return csv.str();
}

std::string synthetic_motion_bvh(const std::string& kind, int n_frames, double frame_time) {
    // A small CMU-named skeleton: y up, facing +z, arm segments 0.28/0.25/0.1.
    static const char* hierarchy = R"(HIERARCHY
ROOT Hips
{
  OFFSET 0 0 0
  CHANNELS 6 Xposition Yposition Zposition Zrotation Xrotation Yrotation
  JOINT Spine
  {
    OFFSET 0 0.2 0
    CHANNELS 3 Zrotation Xrotation Yrotation
    JOINT Neck
    {
      OFFSET 0 0.3 0
      CHANNELS 3 Zrotation Xrotation Yrotation
      JOINT Head
      {
        OFFSET 0 0.1 0
        CHANNELS 3 Zrotation Xrotation Yrotation
        End Site
        {
          OFFSET 0 0.12 0
        }
      }
    }
    JOINT LeftArm
    {
      OFFSET 0.2 0.25 0
      CHANNELS 3 Zrotation Xrotation Yrotation
      JOINT LeftForeArm
      {
        OFFSET 0.28 0 0
        CHANNELS 3 Zrotation Xrotation Yrotation
        JOINT LeftHand
        {
          OFFSET 0.25 0 0
          CHANNELS 3 Zrotation Xrotation Yrotation
          End Site
          {
            OFFSET 0.1 0 0
          }
        }
      }
    }
    JOINT RightArm
    {
      OFFSET -0.2 0.25 0
      CHANNELS 3 Zrotation Xrotation Yrotation
      JOINT RightForeArm
      {
        OFFSET -0.28 0 0
        CHANNELS 3 Zrotation Xrotation Yrotation
        JOINT RightHand
        {
          OFFSET -0.25 0 0
          CHANNELS 3 Zrotation Xrotation Yrotation
          End Site
          {
            OFFSET -0.1 0 0
          }
        }
      }
    }
  }
}
MOTION
)";

    std::ostringstream out;
    out << hierarchy;
    out << "Frames: " << n_frames << "\n";
    out << "Frame Time: " << format_double(frame_time) << "\n";

    // channel layout: Hips 6, Spine 3, Neck 3, Head 3, LeftArm 3,
    // LeftForeArm 3, LeftHand 3, RightArm 3, RightForeArm 3, RightHand 3
    for (int f = 0; f < n_frames; ++f) {
        const double t = static_cast<double>(f) / 60.0;
        std::vector<double> ch(33, 0.0);
        if (kind == "wave") {
            // right arm raised, forearm waving; quiet torso
            ch[6] = 2.0 * std::sin(2.0 * kPi * 0.25 * t);           // Spine Z sway
            ch[24] = 70.0 + 10.0 * std::sin(2.0 * kPi * 0.5 * t);   // RightArm Z (raise)
            ch[27] = 40.0 - 35.0 * std::sin(2.0 * kPi * 1.2 * t);   // RightForeArm Z (wave)
            ch[15] = -10.0;                                         // LeftArm Z rest
        } else if (kind == "twist") {
            ch[8] = 35.0 * std::sin(2.0 * kPi * 0.4 * t);   // Spine Y yaw
            ch[15] = -20.0;
            ch[24] = 20.0;
            ch[16] = 25.0 * std::sin(2.0 * kPi * 0.8 * t);   // LeftArm X
            ch[25] = -25.0 * std::sin(2.0 * kPi * 0.8 * t);  // RightArm X
        } else {  // "swim"
            ch[8] = 25.0 * std::sin(2.0 * kPi * 0.5 * t);   // Spine Y yaw
            ch[7] = 12.0 * std::sin(2.0 * kPi * 0.25 * t);  // Spine X pitch
            ch[16] = 80.0 * std::sin(2.0 * kPi * 0.5 * t);
            ch[25] = 80.0 * std::sin(2.0 * kPi * 0.5 * t + kPi);
            ch[28] = 30.0 + 20.0 * std::sin(2.0 * kPi * 0.5 * t);
            ch[19] = 30.0 + 20.0 * std::sin(2.0 * kPi * 0.5 * t + kPi);
        }
        for (std::size_t c = 0; c < ch.size(); ++c) {
            if (c) out << ' ';
            out << format_double(ch[c]);
        }
        out << "\n";
    }
    return out.str();
}

}  // namespace morphopt
