#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>

#include "morphopt/errors.hpp"
#include "morphopt/kinematics.hpp"
#include "morphopt/rng.hpp"

using namespace morphopt;

namespace {

constexpr double kPi = 3.14159265358979323846;

double max_abs_diff(const Mat3& a, const Mat3& b) {
    double d = 0.0;
    for (int i = 0; i < 9; ++i) d = std::max(d, std::abs(a.a[i] - b.a[i]));
    return d;
}

// planar 2-link: revolute z joints at (0,0,0) and (1,0,0), end effector home
// at (2,0,0)
KinematicChain planar_two_link() {
    KinematicChain chain;
    chain.joints.push_back({Twist::revolute({0, 0, 1}, {0, 0, 0}), {0, 0, 1}, {0, 0, 0}, -1});
    chain.joints.push_back({Twist::revolute({0, 0, 1}, {1, 0, 0}), {0, 0, 1}, {1, 0, 0}, 0});
    chain.add_marker("ee", 1, {2, 0, 0});
    return chain;
}

Twist random_twist(Rng& rng) {
    const Vec3 axis = Vec3{rng.uniform(-1, 1), rng.uniform(-1, 1), rng.uniform(-1, 1)}.normalized();
    const Vec3 q{rng.uniform(-2, 2), rng.uniform(-2, 2), rng.uniform(-2, 2)};
    return Twist::revolute(axis, q);
}

}  // namespace

TEST_CASE("screw_exp basics") {
    SUBCASE("pure rotation about z through the origin") {
        const Transform t = screw_exp(Twist::revolute({0, 0, 1}, {0, 0, 0}), kPi / 2);
        CHECK((t.apply({1, 0, 0}) - Vec3{0, 1, 0}).norm() < 1e-15);
        CHECK(t.p.norm() < 1e-15);
    }
    SUBCASE("zero angle is the identity") {
        Rng rng(1);
        for (int i = 0; i < 10; ++i) {
            const Transform t = screw_exp(random_twist(rng), 0.0);
            CHECK(max_abs_diff(t.R, Mat3::identity()) < 1e-15);
            CHECK(t.p.norm() < 1e-15);
        }
    }
    SUBCASE("off-axis rotation matches the conjugation oracle") {
        // rotation about the z line through q = (1,0,0): Trans(q)·Rz(θ)·Trans(−q)
        const Vec3 q{1, 0, 0};
        const Transform t = screw_exp(Twist::revolute({0, 0, 1}, q), kPi);
        const Transform oracle = Transform::translation(q) *
                                 Transform::rotation(rodrigues({0, 0, 1}, kPi)) *
                                 Transform::translation(-q);
        CHECK(max_abs_diff(t.R, oracle.R) < 1e-12);
        CHECK((t.p - oracle.p).norm() < 1e-12);
        CHECK((t.apply({0, 0, 0}) - Vec3{2, 0, 0}).norm() < 1e-12);
    }
    SUBCASE("zero axis yields pure translation") {
        Twist t{{0, 0, 0}, {0.5, -1, 2}};
        const Transform tr = screw_exp(t, 2.0);
        CHECK(max_abs_diff(tr.R, Mat3::identity()) == 0.0);
        CHECK((tr.p - Vec3{1, -2, 4}).norm() < 1e-15);
    }
}

TEST_CASE("screw_exp one-parameter subgroup and orthonormality on 1000 random twists") {
    Rng rng(42);
    for (int trial = 0; trial < 1000; ++trial) {
        const Twist t = random_twist(rng);
        CHECK(std::abs(t.omega.dot(t.v)) < 1e-9);  // zero pitch
        const double t1 = rng.uniform(-kPi, kPi), t2 = rng.uniform(-kPi, kPi);
        const Transform a = screw_exp(t, t1) * screw_exp(t, t2);
        const Transform b = screw_exp(t, t1 + t2);
        CHECK(max_abs_diff(a.R, b.R) < 1e-9);
        CHECK((a.p - b.p).norm() < 1e-9);

        CHECK(max_abs_diff(a.R * a.R.transposed(), Mat3::identity()) < 1e-9);
        CHECK(a.R.det() == doctest::Approx(1.0).epsilon(1e-9));
    }
}

TEST_CASE("forward kinematics on the planar two-link fixture") {
    const KinematicChain chain = planar_two_link();
    JointConfig cfg = JointConfig::home(2);

    SUBCASE("zero configuration reproduces home positions exactly") {
        const FkResult fk = forward_kinematics(chain, cfg);
        CHECK((fk.marker_positions[0] - Vec3{2, 0, 0}).norm() == 0.0);
        CHECK((fk.joint_anchors[0] - Vec3{0, 0, 0}).norm() == 0.0);
        CHECK((fk.joint_anchors[1] - Vec3{1, 0, 0}).norm() == 0.0);
    }
    SUBCASE("theta = (pi/2, pi/2) puts the effector at (-1, 1, 0)") {
        cfg.angles = {kPi / 2, kPi / 2};
        const FkResult fk = forward_kinematics(chain, cfg);
        CHECK((fk.marker_positions[0] - Vec3{-1, 1, 0}).norm() < 1e-9);
    }
    SUBCASE("theta = (pi/2, 0) puts the effector at (0, 2, 0)") {
        cfg.angles = {kPi / 2, 0};
        const FkResult fk = forward_kinematics(chain, cfg);
        CHECK((fk.marker_positions[0] - Vec3{0, 2, 0}).norm() < 1e-9);
    }
    SUBCASE("angle count mismatch throws") {
        cfg.angles = {0.0};
        cfg.lo = {-kPi};
        cfg.hi = {kPi};
        CHECK_THROWS_AS(forward_kinematics(chain, cfg), ConfigMismatch);
    }
}

TEST_CASE("FK Jacobian columns match central finite differences") {
    Rng rng(77);
    // a random 4-joint serial chain with two markers
    KinematicChain chain;
    for (int i = 0; i < 4; ++i) {
        const Vec3 axis = Vec3{rng.uniform(-1, 1), rng.uniform(-1, 1), rng.uniform(-1, 1)}.normalized();
        const Vec3 q{rng.uniform(-1, 1), rng.uniform(-1, 1), rng.uniform(-1, 1)};
        chain.joints.push_back({Twist::revolute(axis, q), axis, q, i - 1});
    }
    chain.add_marker("m0", 3, {0.5, 0.2, -0.3});
    chain.add_marker("m1", 1, {-0.2, 0.4, 0.1});

    for (int trial = 0; trial < 20; ++trial) {
        JointConfig cfg = JointConfig::home(4);
        for (auto& a : cfg.angles) a = rng.uniform(-1.5, 1.5);

        const FkResult fk = forward_kinematics(chain, cfg);
        const double h = 1e-6;
        for (int j = 0; j < 4; ++j) {
            JointConfig plus = cfg, minus = cfg;
            plus.angles[static_cast<std::size_t>(j)] += h;
            minus.angles[static_cast<std::size_t>(j)] -= h;
            const FkResult fp = forward_kinematics(chain, plus);
            const FkResult fm = forward_kinematics(chain, minus);
            for (std::size_t m = 0; m < chain.markers.size(); ++m) {
                const Vec3 fd = (fp.marker_positions[m] - fm.marker_positions[m]) / (2.0 * h);
                const Marker& marker = chain.markers[m];
                Vec3 analytic{};
                if (chain.influences(j, marker.joint)) {
                    analytic = fk.joint_axes[static_cast<std::size_t>(j)].cross(
                        fk.marker_positions[m] - fk.joint_anchors[static_cast<std::size_t>(j)]);
                }
                const double denom = std::max(1.0, fd.norm());
                CHECK((fd - analytic).norm() / denom < 1e-5);
            }
        }
    }
}

TEST_CASE("solve_ik") {
    const KinematicChain chain = planar_two_link();
    const JointConfig home = JointConfig::home(2);

    SUBCASE("a target at the current pose is a fixed point") {
        const FkResult fk = forward_kinematics(chain, home);
        const IkResult r = solve_ik(chain, std::vector<MarkerTarget>{{0, fk.marker_positions[0]}}, home);
        CHECK(r.residual < 1e-12);
        CHECK(r.config.angles[0] == 0.0);
        CHECK(r.config.angles[1] == 0.0);
    }
    SUBCASE("reachable targets converge within 100 iterations") {
        Rng rng(5);
        IkParams params;
        params.max_iters = 100;
        params.tol = 1e-5;
        for (int trial = 0; trial < 25; ++trial) {
            const double r = rng.uniform(0.3, 1.9);
            const double phi = rng.uniform(-2.5, 2.5);
            const Vec3 target{r * std::cos(phi), r * std::sin(phi), 0.0};
            const IkResult res = solve_ik(chain, std::vector<MarkerTarget>{{0, target}}, home, params);
            CHECK(res.residual < 1e-4);
            CHECK(res.config.angles[0] >= home.lo[0]);
            CHECK(res.config.angles[0] <= home.hi[0]);
        }
    }
    SUBCASE("unreachable targets stop at the workspace boundary") {
        // brute-force workspace radius oracle
        double reach = 0.0;
        for (int i = 0; i <= 200; ++i) {
            for (int j = 0; j <= 200; ++j) {
                JointConfig cfg = home;
                cfg.angles[0] = -kPi + 2 * kPi * i / 200.0;
                cfg.angles[1] = -kPi + 2 * kPi * j / 200.0;
                reach = std::max(reach, forward_kinematics(chain, cfg).marker_positions[0].norm());
            }
        }
        CHECK(reach == doctest::Approx(2.0).epsilon(1e-3));

        const Vec3 target{3.0, 0.5, 0.0};
        IkParams params;
        params.max_iters = 300;
        const IkResult res = solve_ik(chain, std::vector<MarkerTarget>{{0, target}}, home, params);
        const double expected = target.norm() - reach;
        CHECK(res.residual == doctest::Approx(expected).epsilon(0.05));
    }
    SUBCASE("limits are never violated") {
        JointConfig tight = home;
        tight.lo = {-0.5, -0.5};
        tight.hi = {0.5, 0.5};
        const IkResult res = solve_ik(chain, std::vector<MarkerTarget>{{0, Vec3{-2, 0, 0}}}, tight);
        CHECK(res.config.angles[0] >= -0.5);
        CHECK(res.config.angles[0] <= 0.5);
        CHECK(res.config.angles[1] >= -0.5);
        CHECK(res.config.angles[1] <= 0.5);
    }
    SUBCASE("marker map interface resolves tags") {
        const FkResult fk = forward_kinematics(chain, home);
        const IkResult r = solve_ik(chain, std::unordered_map<std::string, Vec3>{{"ee", fk.marker_positions[0]}}, home);
        CHECK(r.residual < 1e-12);
        CHECK_THROWS_AS(
            solve_ik(chain, std::unordered_map<std::string, Vec3>{{"nope", Vec3{}}}, home),
            ConfigMismatch);
    }
}

TEST_CASE("ik is deterministic") {
    const KinematicChain chain = planar_two_link();
    const JointConfig home = JointConfig::home(2);
    const Vec3 target{0.7, 1.1, 0.0};
    const IkResult a = solve_ik(chain, std::vector<MarkerTarget>{{0, target}}, home);
    const IkResult b = solve_ik(chain, std::vector<MarkerTarget>{{0, target}}, home);
    CHECK(a.residual == b.residual);
    CHECK(a.config.angles == b.config.angles);
}
