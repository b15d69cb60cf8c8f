// Acceptance suite: one pass/fail line per criterion. Usage:
//   acceptance <fixtures_dir> [cli_binary] [--regen]
// --regen rewrites the committed fixtures from the current implementation.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <iostream>
#include <string>
#include <vector>

#include "morphopt/dataset.hpp"
#include "morphopt/io_util.hpp"
#include "morphopt/kinematics.hpp"
#include "morphopt/latent_tools.hpp"
#include "morphopt/linalg.hpp"
#include "morphopt/manifold.hpp"
#include "morphopt/motion_io.hpp"
#include "morphopt/retarget.hpp"
#include "morphopt/rng.hpp"
#include "morphopt/screw_model.hpp"
#include "morphopt/voo.hpp"

namespace fs = std::filesystem;
using namespace morphopt;

namespace {

constexpr double kPi = 3.14159265358979323846;

struct Harness {
    int failures = 0;

    void run(int index, const std::string& label, const std::function<bool(std::string&)>& body) {
        const auto start = std::chrono::steady_clock::now();
        std::string detail;
        bool ok = false;
        try {
            ok = body(detail);
        } catch (const std::exception& e) {
            detail = std::string("exception: ") + e.what();
        }
        const double secs =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        std::cout << (ok ? "[PASS]" : "[FAIL]") << " criterion " << index << ": " << label;
        if (!detail.empty()) std::cout << " — " << detail;
        std::cout << " (" << secs << " s)\n";
        if (!ok) ++failures;
    }
};

double median(std::vector<double> v) {
    std::sort(v.begin(), v.end());
    const std::size_t n = v.size();
    return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

double max_abs_diff(const Mat3& a, const Mat3& b) {
    double d = 0.0;
    for (int i = 0; i < 9; ++i) d = std::max(d, std::abs(a.a[i] - b.a[i]));
    return d;
}

// shared fixture protocol: 30 synthetic robots, screw curation, z = 2 models
struct Protocol {
    std::vector<Vec> features;
    MotionClip wave;
    TrainResult iso_model;

    static TrainConfig train_config(double iso_weight) {
        TrainConfig cfg;
        cfg.lr = 1e-3;
        cfg.epochs = 1000;
        cfg.batch = 10;
        cfg.iso_weight = iso_weight;
        cfg.mix_lo = -0.2;
        cfg.mix_hi = 1.2;
        cfg.seed = 0;
        cfg.latent_dim = 2;
        cfg.hidden = {64, 32};
        return cfg;
    }

    static Protocol build() {
        Protocol p;
        p.features = curate(synthesize_robots(30, 7)).features;
        p.wave = extract_upper_body(parse_bvh(synthetic_motion_bvh("wave", 72)),
                                    JoiNameMap::cmu_default(), 2);
        p.iso_model = train(p.features, train_config(1e-7));
        return p;
    }
};

ObjectiveFn latent_objective(const AeModel& model, const MotionClip& clip, double epsilon,
                             double lambda) {
    return [&model, &clip, epsilon, lambda](const std::vector<double>& z) {
        ObjectiveParams params;
        params.lambda_joint = lambda;
        const Candidate cand{activate_decoded(decode(model, z), epsilon), {}, {}};
        return total_objective(cand, {clip}, params).total;
    };
}

ObjectiveFn raw_objective(const MotionClip& clip, double epsilon, double lambda) {
    return [&clip, epsilon, lambda](const std::vector<double>& v) {
        ObjectiveParams params;
        params.lambda_joint = lambda;
        const Candidate cand{activate_decoded(v, epsilon), {}, {}};
        return total_objective(cand, {clip}, params).total;
    };
}

std::vector<double> run_seeds(const VooConfig& base, const ObjectiveFn& objective, int n_seeds) {
    std::vector<double> best;
    for (int s = 0; s < n_seeds; ++s) {
        VooConfig cfg = base;
        cfg.seed = 123456789ull + static_cast<std::uint64_t>(s);
        best.push_back(voo_run(cfg, objective).best_value);
    }
    return best;
}

}  // namespace

int main(int argc, char** argv) {
    const fs::path fixtures = argc > 1 ? fs::path(argv[1]) : fs::path("tests/fixtures");
    const std::string cli = argc > 2 && std::string(argv[2]) != "--regen" ? argv[2] : "";
    bool regen = false;
    for (int i = 1; i < argc; ++i) regen |= std::string(argv[i]) == "--regen";

    Harness h;
    Rng rng(2024);

    h.run(1, "screw exponential algebra and planar FK oracle", [&](std::string& detail) {
        for (int trial = 0; trial < 1000; ++trial) {
            const Vec3 axis =
                Vec3{rng.uniform(-1, 1), rng.uniform(-1, 1), rng.uniform(-1, 1)}.normalized();
            const Vec3 q{rng.uniform(-2, 2), rng.uniform(-2, 2), rng.uniform(-2, 2)};
            const Twist t = Twist::revolute(axis, q);
            const double a = rng.uniform(-kPi, kPi), b = rng.uniform(-kPi, kPi);
            const Transform lhs = screw_exp(t, a) * screw_exp(t, b);
            const Transform rhs = screw_exp(t, a + b);
            if (max_abs_diff(lhs.R, rhs.R) > 1e-9 || (lhs.p - rhs.p).norm() > 1e-9) {
                detail = "one-parameter subgroup violated";
                return false;
            }
            if (max_abs_diff(lhs.R * lhs.R.transposed(), Mat3::identity()) > 1e-9 ||
                std::abs(lhs.R.det() - 1.0) > 1e-9) {
                detail = "rotation not orthonormal";
                return false;
            }
        }
        KinematicChain chain;
        chain.joints.push_back({Twist::revolute({0, 0, 1}, {0, 0, 0}), {0, 0, 1}, {0, 0, 0}, -1});
        chain.joints.push_back({Twist::revolute({0, 0, 1}, {1, 0, 0}), {0, 0, 1}, {1, 0, 0}, 0});
        chain.add_marker("ee", 1, {2, 0, 0});
        JointConfig cfg = JointConfig::home(2);
        cfg.angles = {kPi / 2, kPi / 2};
        const Vec3 ee = forward_kinematics(chain, cfg).marker_positions[0];
        if ((ee - Vec3{-1, 1, 0}).norm() > 1e-9) {
            detail = "planar 2-link FK mismatch";
            return false;
        }
        return true;
    });

    h.run(2, "decoder Jacobian vs central finite differences", [&](std::string& detail) {
        for (int pair = 0; pair < 100; ++pair) {
            const int zd = 2 + static_cast<int>(rng.uniform_index(2));
            Rng mr(rng.next_u64());
            const AeModel m = AeModel::init(120, zd, {64, 32}, mr);
            Vec z(static_cast<std::size_t>(zd));
            for (auto& v : z) v = rng.uniform(-2, 2);
            const Mat J = decoder_jacobian(m, z);
            const double step = 1e-5;
            for (int k = 0; k < zd; ++k) {
                Vec zp = z, zm = z;
                zp[static_cast<std::size_t>(k)] += step;
                zm[static_cast<std::size_t>(k)] -= step;
                const Vec yp = decode(m, zp), ym = decode(m, zm);
                for (int r = 0; r < 120; ++r) {
                    const double fd =
                        (yp[static_cast<std::size_t>(r)] - ym[static_cast<std::size_t>(r)]) /
                        (2 * step);
                    if (std::abs(J(r, k) - fd) / std::max(1.0, std::abs(fd)) > 1e-5) {
                        detail = "pair " + std::to_string(pair);
                        return false;
                    }
                }
            }
        }
        return true;
    });

    h.run(3, "isometric loss analytics and lower bound", [&](std::string& detail) {
        auto embedding = [](const Vec& diag, double scale) {
            Rng r0(0);
            AeModel m = AeModel::init(12, static_cast<int>(diag.size()), {8, 10}, r0);
            for (auto& l : m.dec) {
                l.W.fill(0.0);
                std::fill(l.b.begin(), l.b.end(), 0.0);
            }
            for (std::size_t li = 0; li < m.dec.size(); ++li) {
                Mat& W = m.dec[li].W;
                const int n = std::min(W.rows, W.cols);
                for (int i = 0; i < n; ++i) W(i, i) = li + 1 == m.dec.size() ? scale : 1.0;
            }
            for (std::size_t i = 0; i < diag.size(); ++i) {
                m.dec[0].W(static_cast<int>(i), static_cast<int>(i)) = diag[i];
            }
            return m;
        };
        const Vec origin{0.0, 0.0};
        if (std::abs(iso_loss(embedding({1, 1}, 1.0), {origin}) - 0.5) > 1e-9) {
            detail = "orthonormal case";
            return false;
        }
        if (std::abs(iso_loss(embedding({1, 1}, 3.0), {origin}) - 0.5) > 1e-9) {
            detail = "scaled orthonormal case";
            return false;
        }
        if (std::abs(iso_loss(embedding({1, 2}, 1.0), {origin}) - 0.68) > 1e-9) {
            detail = "diag(1,4) case";
            return false;
        }
        for (int trial = 0; trial < 1000; ++trial) {
            const int zd = 2 + static_cast<int>(rng.uniform_index(2));
            Rng mr(rng.next_u64());
            const AeModel m = AeModel::init(10, zd, {7, 6}, mr);
            std::vector<Vec> batch(2, Vec(static_cast<std::size_t>(zd)));
            for (auto& z : batch) {
                for (auto& v : z) v = rng.uniform(-2, 2);
            }
            if (iso_loss(m, batch) < 1.0 / zd - 1e-12) {
                detail = "bound violated";
                return false;
            }
        }
        return true;
    });

    h.run(4, "PA-MPJPE of similarity-transformed copies is zero", [&](std::string& detail) {
        for (int trial = 0; trial < 100; ++trial) {
            MotionClip src;
            src.frame_time = 0.01;
            const int joints = 4 + static_cast<int>(rng.uniform_index(6));
            for (int j = 0; j < joints; ++j) src.joints.push_back("j" + std::to_string(j));
            const int frames = 2 + static_cast<int>(rng.uniform_index(8));
            for (int f = 0; f < frames; ++f) {
                std::vector<Vec3> row;
                for (int j = 0; j < joints; ++j) {
                    row.push_back({rng.uniform(-1, 1), rng.uniform(-1, 1), rng.uniform(-1, 1)});
                }
                src.frames.push_back(row);
            }
            const Vec3 axis =
                Vec3{rng.uniform(-1, 1), rng.uniform(-1, 1), rng.uniform(-1, 1)}.normalized();
            const Mat3 R = rodrigues(axis, rng.uniform(-kPi, kPi));
            const double s = rng.uniform(0.25, 4.0);
            const Vec3 t{rng.uniform(-3, 3), rng.uniform(-3, 3), rng.uniform(-3, 3)};
            MotionClip tar = src;
            for (auto& frame : tar.frames) {
                for (auto& p : frame) p = R * p * s + t;
            }
            if (pa_mpjpe(src, tar) > 1e-9) {
                detail = "trial " + std::to_string(trial);
                return false;
            }
        }
        return true;
    });

    h.run(5, "mirror involution, flatten round trip, padding, N_tot arithmetic",
          [&](std::string& detail) {
        for (int trial = 0; trial < 200; ++trial) {
            // mirror involution + flatten round trip on a random structure
            UpperBodyStructure s{};
            for (int i = 0; i < 20; ++i) {
                s.slots[i].omega =
                    Vec3{rng.uniform(-1, 1), rng.uniform(-1, 1), rng.uniform(-1, 1)}.normalized();
                s.slots[i].q = {rng.uniform(-1, 1), rng.uniform(-1, 1), rng.uniform(-1, 1)};
            }
            for (int i = 0; i < 20; ++i) {
                const ScrewJoint m2 = mirror_joint(mirror_joint(s.slots[i]));
                if (m2.omega.x != s.slots[i].omega.x || m2.omega.y != s.slots[i].omega.y ||
                    m2.q.y != s.slots[i].q.y) {
                    detail = "mirror involution";
                    return false;
                }
            }
            const UpperBodyStructure rt = unflatten(flatten(s));
            for (int i = 0; i < 20; ++i) {
                if (rt.slots[i].q.x != s.slots[i].q.x || rt.slots[i].omega.z != s.slots[i].omega.z) {
                    detail = "flatten round trip";
                    return false;
                }
            }
        }
        // padding fallback: empty elbow inherits the upper-arm anchor
        const auto padded =
            pad_structure({{GroupKind::UpperArm, Side::Right, {0, 0, 1}, {0.1, 0.3, 0.9}}});
        const int elbow = SlotLayout::screw().group_offset(GroupKind::Elbow);
        if ((padded.slots[elbow].q - Vec3{0.1, 0.3, 0.9}).norm() != 0.0 ||
            padded.slots[elbow].omega.norm() != 0.0) {
            detail = "padding fallback";
            return false;
        }
        // N_tot: 2 torso + 4 right-arm joints -> 10
        std::vector<double> v(120, 0.0);
        v[2] = 1.0;
        v[8] = 1.0;
        for (int slot : {11, 15, 16, 17}) v[6 * slot + 2] = 1.0;
        if (count_active_joints(activate_decoded(v, 0.5)) != 10) {
            detail = "N_tot arithmetic";
            return false;
        }
        return true;
    });

    h.run(6, "VOO beats uniform search on the 2-d sphere within 46 evaluations",
          [&](std::string& detail) {
        auto sphere = [](const std::vector<double>& z) {
            const double dx = z[0] - 3.0, dy = z[1] + 4.0;
            return dx * dx + dy * dy;
        };
        VooConfig base;  // defaults: 16 + 30 evaluations in [-15, 15]^2
        const std::vector<double> voo_best = run_seeds(base, sphere, 10);
        VooConfig uni = base;
        uni.p_global = 1.0;
        const std::vector<double> uni_best = run_seeds(uni, sphere, 10);
        const double mv = median(voo_best), mu = median(uni_best);
        detail = "median voo " + format_double(mv) + " vs uniform " + format_double(mu);
        return mv < 1.0 && mv < mu;
    });

    // criteria 7-9 share the synthetic fixture protocol
    Protocol protocol;
    bool protocol_ready = false;
    try {
        protocol = Protocol::build();
        protocol_ready = true;
    } catch (const std::exception& e) {
        std::cout << "[FAIL] fixture protocol: " << e.what() << "\n";
        h.failures++;
    }

    h.run(7, "fixed-seed training reproduces the committed loss history bitwise",
          [&](std::string& detail) {
        if (!protocol_ready) {
            detail = "fixture protocol unavailable";
            return false;
        }
        const std::string history = history_to_csv(protocol.iso_model.history);
        const fs::path fixture = fixtures / "loss_history_z2.csv";
        if (regen) {
            write_file(fixture, history);
            detail = "fixture regenerated";
        }
        if (!fs::exists(fixture)) {
            detail = "missing fixture " + fixture.string();
            return false;
        }
        if (read_file(fixture) != history) {
            detail = "history differs from fixture";
            return false;
        }
        const double mse = eval_mse(protocol.iso_model.model, protocol.features);
        detail += (detail.empty() ? "" : "; ");
        detail += "full-data mse " + format_double(mse);
        return mse < 0.05;
    });

    VooConfig latent_cfg;
    latent_cfg.dim = 2;
    VooConfig raw_cfg;
    raw_cfg.dim = 120;

    h.run(8, "2-d latent search beats direct 120-d search (paired seeds)",
          [&](std::string& detail) {
        if (!protocol_ready) {
            detail = "fixture protocol unavailable";
            return false;
        }
        const auto latent_best = run_seeds(
            latent_cfg, latent_objective(protocol.iso_model.model, protocol.wave, 0.5, 3.5), 10);
        const auto raw_best = run_seeds(raw_cfg, raw_objective(protocol.wave, 0.5, 3.5), 10);
        const double ml = median(latent_best), mr = median(raw_best);
        detail = "median latent " + format_double(ml) + " vs raw " + format_double(mr);
        return ml < mr;
    });

    h.run(9, "isometric regularization does not hurt the final best-so-far",
          [&](std::string& detail) {
        if (!protocol_ready) {
            detail = "fixture protocol unavailable";
            return false;
        }
        const TrainResult plain = train(protocol.features, Protocol::train_config(0.0));
        const auto iso_best = run_seeds(
            latent_cfg, latent_objective(protocol.iso_model.model, protocol.wave, 0.5, 3.5), 10);
        const auto plain_best =
            run_seeds(latent_cfg, latent_objective(plain.model, protocol.wave, 0.5, 3.5), 10);
        const double mi = median(iso_best), mp = median(plain_best);
        detail = "median iso " + format_double(mi) + " vs plain " + format_double(mp);
        return mi <= mp;
    });

    h.run(10, "cmd_optimize is bitwise deterministic", [&](std::string& detail) {
        if (cli.empty()) {
            detail = "no CLI binary path given";
            return false;
        }
        if (!protocol_ready) {
            detail = "fixture protocol unavailable";
            return false;
        }
        const fs::path work = fs::temp_directory_path() / "morphopt_acceptance10";
        fs::remove_all(work);
        fs::create_directories(work);
        write_file(work / "wave.bvh", synthetic_motion_bvh("wave", 48));
        write_file(work / "checkpoint.json",
                   model_to_json(protocol.iso_model.model, Protocol::train_config(1e-7)));
        const std::string common = "\"" + cli + "\" optimize --checkpoint \"" +
                                   (work / "checkpoint.json").string() + "\" --motions \"" +
                                   (work / "wave.bvh").string() +
                                   "\" --runs 2 --n-init 6 --iters 6 --stride 2 --out \"";
        const std::string cmd_a = common + (work / "a").string() + "\" > /dev/null";
        const std::string cmd_b = common + (work / "b").string() + "\" > /dev/null";
        if (std::system(cmd_a.c_str()) != 0 || std::system(cmd_b.c_str()) != 0) {
            detail = "CLI invocation failed";
            return false;
        }
        for (const char* name : {"run_0.csv", "run_1.csv", "summary.csv"}) {
            if (read_file(work / "a" / name) != read_file(work / "b" / name)) {
                detail = std::string(name) + " differs between invocations";
                return false;
            }
        }
        return true;
    });

    std::cout << (h.failures == 0 ? "all criteria passed\n"
                                  : std::to_string(h.failures) + " criteria failed\n");
    return h.failures == 0 ? 0 : 1;
}
