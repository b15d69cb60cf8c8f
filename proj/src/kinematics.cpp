#include "morphopt/kinematics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "morphopt/errors.hpp"
#include "morphopt/linalg.hpp"

namespace morphopt {

Transform screw_exp(const Twist& t, double theta) {
    const double w2 = t.omega.norm2();
    if (w2 < 1e-18) {
        return Transform::translation(t.v * theta);
    }
    const Mat3 K = skew(t.omega);
    const Mat3 K2 = K * K;
    const double s = std::sin(theta);
    const double c = std::cos(theta);
    Transform out;
    out.R = Mat3::identity() + K * s + K2 * (1.0 - c);
    // G(theta) v with G = I*theta + (1-cos)[w] + (theta-sin)[w]^2
    const Mat3 G = Mat3::identity() * theta + K * (1.0 - c) + K2 * (theta - s);
    out.p = G * t.v;
    return out;
}

KinematicChain KinematicChain::from_structure(const FullBodyStructure& s) {
    KinematicChain chain;
    chain.joints.reserve(s.joints.size());
    for (const auto& aj : s.joints) {
        JointNode n;
        n.twist = Twist::revolute(aj.omega, aj.q);
        n.home_axis = aj.omega;
        n.home_anchor = aj.q;
        n.parent = aj.parent;
        chain.joints.push_back(n);
    }
    return chain;
}

int KinematicChain::marker_index(const std::string& tag) const {
    for (std::size_t i = 0; i < markers.size(); ++i) {
        if (markers[i].tag == tag) return static_cast<int>(i);
    }
    return -1;
}

void KinematicChain::add_marker(const std::string& tag, int joint, const Vec3& home) {
    markers.push_back({tag, joint, home});
}

bool KinematicChain::influences(int anc, int joint) const {
    for (int j = joint; j >= 0; j = joints[j].parent) {
        if (j == anc) return true;
    }
    return false;
}

JointConfig JointConfig::home(std::size_t n, double limit) {
    JointConfig c;
    c.angles.assign(n, 0.0);
    c.lo.assign(n, -limit);
    c.hi.assign(n, limit);
    return c;
}

void JointConfig::clamp() {
    for (std::size_t i = 0; i < angles.size(); ++i) {
        angles[i] = std::min(std::max(angles[i], lo[i]), hi[i]);
    }
}

FkResult forward_kinematics(const KinematicChain& chain, const JointConfig& cfg) {
    if (cfg.angles.size() != chain.joints.size()) {
        throw ConfigMismatch("got " + std::to_string(cfg.angles.size()) + " angles for " +
                             std::to_string(chain.joints.size()) + " joints");
    }
    FkResult r;
    const std::size_t n = chain.joints.size();
    r.joint_transforms.resize(n);
    r.joint_anchors.resize(n);
    r.joint_axes.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        const auto& node = chain.joints[i];
        const Transform local = screw_exp(node.twist, cfg.angles[i]);
        r.joint_transforms[i] =
            node.parent >= 0 ? r.joint_transforms[node.parent] * local : local;
        r.joint_anchors[i] = r.joint_transforms[i].apply(node.home_anchor);
        r.joint_axes[i] = r.joint_transforms[i].rotate(node.home_axis);
    }
    r.marker_positions.reserve(chain.markers.size());
    for (const auto& m : chain.markers) {
        r.marker_positions.push_back(m.joint >= 0 ? r.joint_transforms[m.joint].apply(m.home)
                                                  : m.home);
    }
    return r;
}

namespace {

// Positional geometric Jacobian: column j of marker m is
// axis_j × (p_m − anchor_j) when joint j moves the marker, else zero.
void fill_jacobian(const KinematicChain& chain, const FkResult& fk,
                   const std::vector<MarkerTarget>& targets, Mat& J) {
    const int n = static_cast<int>(chain.joints.size());
    J.fill(0.0);
    for (std::size_t t = 0; t < targets.size(); ++t) {
        const Marker& m = chain.markers[targets[t].marker];
        if (m.joint < 0) continue;  // base-fixed marker: zero rows
        const Vec3 p = fk.marker_positions[targets[t].marker];
        for (int j = 0; j < n; ++j) {
            if (!chain.influences(j, m.joint)) continue;
            const Vec3 col = fk.joint_axes[j].cross(p - fk.joint_anchors[j]);
            J(static_cast<int>(3 * t) + 0, j) = col.x;
            J(static_cast<int>(3 * t) + 1, j) = col.y;
            J(static_cast<int>(3 * t) + 2, j) = col.z;
        }
    }
}

}  // namespace

IkResult solve_ik(const KinematicChain& chain, const std::vector<MarkerTarget>& targets,
                  const JointConfig& cfg0, const IkParams& params) {
    const int n = static_cast<int>(chain.joints.size());
    const int rows = static_cast<int>(3 * targets.size());

    JointConfig cfg = cfg0;
    cfg.clamp();

    IkResult best;
    best.config = cfg;
    best.residual = std::numeric_limits<double>::infinity();

    Mat J(rows, n);
    Vec residual(rows);
    Vec grad(n), step(n);

    auto eval_residual = [&](const JointConfig& c) {
        const FkResult fk = forward_kinematics(chain, c);
        double sum = 0.0;
        for (const auto& t : targets) {
            sum += (t.position - fk.marker_positions[static_cast<std::size_t>(t.marker)]).norm2();
        }
        return std::sqrt(sum);
    };

    for (int iter = 0; iter <= params.max_iters; ++iter) {
        const FkResult fk = forward_kinematics(chain, cfg);
        for (std::size_t t = 0; t < targets.size(); ++t) {
            const Vec3 d = targets[t].position - fk.marker_positions[targets[t].marker];
            residual[3 * t + 0] = d.x;
            residual[3 * t + 1] = d.y;
            residual[3 * t + 2] = d.z;
        }
        const double res = std::sqrt(linalg::sumsq(residual.data(), residual.size()));
        if (res < best.residual) {
            best.config = cfg;
            best.residual = res;
            best.iterations = iter;
        }
        if (res < params.tol || iter == params.max_iters || n == 0) break;

        fill_jacobian(chain, fk, targets, J);
        // (JᵀJ + damping² I) step = Jᵀ residual
        Mat A(n, n);
        for (int i = 0; i < n; ++i) {
            for (int j = i; j < n; ++j) {
                double s = 0.0;
                for (int r = 0; r < rows; ++r) s += J(r, i) * J(r, j);
                A(i, j) = s;
                A(j, i) = s;
            }
            A(i, i) += params.damping * params.damping;
        }
        std::fill(grad.begin(), grad.end(), 0.0);
        linalg::gemv_t_add(J, residual.data(), grad.data());
        if (!linalg::cholesky_solve(A, grad.data(), step.data())) break;

        // cap the per-joint step so near-singular configurations cannot fling
        // the chain across its limits
        double maxstep = 0.0;
        for (int i = 0; i < n; ++i) maxstep = std::max(maxstep, std::abs(step[i]));
        if (maxstep < 1e-12) break;
        double scale = maxstep > params.max_step ? params.max_step / maxstep : 1.0;

        // halve the step until the residual decreases
        bool accepted = false;
        for (int bt = 0; bt < 8; ++bt) {
            JointConfig trial = cfg;
            for (int i = 0; i < n; ++i) trial.angles[i] += scale * step[i];
            trial.clamp();
            if (eval_residual(trial) < res) {
                cfg = std::move(trial);
                accepted = true;
                break;
            }
            scale *= 0.5;
        }
        if (!accepted) break;  // no descent along this direction
    }
    return best;
}

IkResult solve_ik(const KinematicChain& chain,
                  const std::unordered_map<std::string, Vec3>& targets, const JointConfig& cfg0,
                  const IkParams& params) {
    std::vector<MarkerTarget> list;
    list.reserve(targets.size());
    for (std::size_t i = 0; i < chain.markers.size(); ++i) {
        const auto it = targets.find(chain.markers[i].tag);
        if (it != targets.end()) list.push_back({static_cast<int>(i), it->second});
    }
    if (list.size() != targets.size()) {
        for (const auto& [tag, pos] : targets) {
            (void)pos;
            if (chain.marker_index(tag) < 0) throw ConfigMismatch("unknown marker: " + tag);
        }
    }
    return solve_ik(chain, list, cfg0, params);
}

}  // namespace morphopt
