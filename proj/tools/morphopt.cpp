// Pipeline driver: dataset synthesis, curation, manifold training, latent
// optimization, evaluation and latent-space analysis.

#include <chrono>
#include <cmath>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "morphopt/dataset.hpp"
#include "morphopt/dh_model.hpp"
#include "morphopt/errors.hpp"
#include "morphopt/io_util.hpp"
#include "morphopt/kernels.hpp"
#include "morphopt/latent_tools.hpp"
#include "morphopt/manifold.hpp"
#include "morphopt/motion_io.hpp"
#include "morphopt/retarget.hpp"
#include "morphopt/screw_model.hpp"
#include "morphopt/voo.hpp"

namespace fs = std::filesystem;
using namespace morphopt;

namespace {

std::string timestamp_dir(const std::string& stage) {
    const auto now = std::chrono::system_clock::now();
    const std::time_t t = std::chrono::system_clock::to_time_t(now);
    char buf[32];
    std::strftime(buf, sizeof(buf), "%Y%m%d-%H%M%S", std::localtime(&t));
    return std::string("runs/") + buf + "-" + stage;
}

std::vector<RobotRecord> load_records(const std::string& dir) {
    std::vector<fs::path> paths;
    for (const auto& entry : fs::directory_iterator(dir)) {
        if (entry.path().extension() == ".json") paths.push_back(entry.path());
    }
    std::sort(paths.begin(), paths.end());
    if (paths.empty()) throw IoError("no records (*.json) in " + dir);
    std::vector<RobotRecord> records;
    for (const auto& p : paths) records.push_back(record_from_json(read_file(p)));
    return records;
}

std::vector<MotionClip> load_motions(const std::vector<std::string>& paths, int stride) {
    if (paths.empty()) throw IoError("no motion files given");
    std::vector<MotionClip> clips;
    for (const auto& p : paths) {
        const BvhData bvh = parse_bvh(read_file(p));
        clips.push_back(extract_upper_body(bvh, JoiNameMap::cmu_default(), stride));
    }
    return clips;
}

std::vector<std::string> load_names(const std::string& path) {
    std::vector<std::string> names;
    for (const auto& line : split(read_file(path), '\n')) {
        if (!line.empty()) names.push_back(line);
    }
    return names;
}

struct DecodeSetup {
    int dim = 0;
    std::function<Candidate(const std::vector<double>&)> decode;
    // search point -> flat feature vector (identity in raw space)
    std::function<std::vector<double>(const std::vector<double>&)> to_features;
    std::string rep;
    double epsilon = 0.5;
    double clamp = 0.01;
};

DecodeSetup make_decoder(const std::string& rep, bool raw_space, const std::string& checkpoint,
                         double epsilon, double clamp) {
    DecodeSetup setup;
    setup.rep = rep;
    setup.epsilon = epsilon;
    setup.clamp = clamp;
    if (raw_space) {
        setup.dim = rep == "dh" ? 105 : 120;
        setup.to_features = [](const std::vector<double>& v) { return v; };
        if (rep == "dh") {
            setup.decode = [clamp](const std::vector<double>& v) {
                const DhDecoded d = dh_activate_decoded(v, clamp);
                Candidate c{d.structure, {}, {}};
                if (d.has_tcp) {
                    c.tcp_right = d.tcp_right;
                    c.tcp_left = d.tcp_left;
                }
                return c;
            };
        } else {
            setup.decode = [epsilon](const std::vector<double>& v) {
                return Candidate{activate_decoded(v, epsilon), {}, {}};
            };
        }
        return setup;
    }
    if (checkpoint.empty()) throw IoError("a checkpoint is required unless --raw-space is set");
    auto model = std::make_shared<AeModel>(model_from_json(read_file(checkpoint)));
    setup.dim = model->latent_dim;
    setup.to_features = [model](const std::vector<double>& z) { return decode(*model, z); };
    if (rep == "dh") {
        if (model->input_dim != 105) {
            throw SchemaError("checkpoint input dimension " + std::to_string(model->input_dim) +
                              " does not match the DH representation");
        }
        setup.decode = [model, clamp](const std::vector<double>& z) {
            const DhDecoded d = dh_activate_decoded(decode(*model, z), clamp);
            Candidate c{d.structure, {}, {}};
            if (d.has_tcp) {
                c.tcp_right = d.tcp_right;
                c.tcp_left = d.tcp_left;
            }
            return c;
        };
    } else {
        if (model->input_dim != 120) {
            throw SchemaError("checkpoint input dimension " + std::to_string(model->input_dim) +
                              " does not match the screw representation");
        }
        setup.decode = [model, epsilon](const std::vector<double>& z) {
            return Candidate{activate_decoded(decode(*model, z), epsilon), {}, {}};
        };
    }
    return setup;
}

nlohmann::json structure_json(const DecodeSetup& setup, const std::vector<double>& point,
                              double value, std::uint64_t seed) {
    nlohmann::json j;
    j["rep"] = setup.rep;
    j["epsilon"] = setup.epsilon;
    j["clamp"] = setup.clamp;
    const std::vector<double> features = setup.to_features(point);
    j["vector"] = features;
    if (features.size() != point.size()) j["latent"] = point;
    j["value"] = value;
    j["seed"] = seed;
    return j;
}

void write_manifest(const fs::path& out_dir, const nlohmann::json& manifest) {
    write_file(out_dir / "manifest.json", manifest.dump(2));
}

int cmd_synth(const std::string& out_dir, int robots, std::uint64_t seed, double jitter,
              const std::vector<std::string>& motions, int frames) {
    fs::create_directories(out_dir);
    const fs::path records_dir = fs::path(out_dir) / "records";
    const auto recs = synthesize_robots(robots, seed, jitter);
    for (const auto& rec : recs) {
        write_file(records_dir / (rec.name + ".json"), record_to_json(rec));
    }
    for (const auto& kind : motions) {
        write_file(fs::path(out_dir) / (kind + ".bvh"), synthetic_motion_bvh(kind, frames));
    }
    write_manifest(out_dir, {{"robots", robots},
                             {"seed", seed},
                             {"jitter", jitter},
                             {"motions", motions},
                             {"frames", frames}});
    std::cout << "wrote " << recs.size() << " records to " << records_dir.string();
    if (!motions.empty()) std::cout << " and " << motions.size() << " motions to " << out_dir;
    std::cout << "\n";
    return 0;
}

int cmd_curate(const std::string& records_dir, const std::string& rep,
               const std::string& out_dir) {
    const auto records = load_records(records_dir);
    const CuratedSet set = rep == "dh" ? curate_dh(records) : curate(records);
    fs::create_directories(out_dir);
    write_file(fs::path(out_dir) / "features.csv", features_to_csv(set, rep));
    std::string names;
    for (const auto& n : set.names) names += n + "\n";
    write_file(fs::path(out_dir) / "names.txt", names);
    write_file(fs::path(out_dir) / "report.txt", curation_report_text(set));
    write_manifest(out_dir, {{"records", records_dir}, {"rep", rep}});
    std::cout << "curated " << set.names.size() << " robots (" << rep << ") into " << out_dir
              << "\n";
    return 0;
}

int cmd_train(const std::string& features_path, const TrainConfig& cfg,
              const std::string& out_dir) {
    const std::vector<Vec> data = features_from_csv(read_file(features_path));
    if (data.empty()) throw IoError("no feature rows in " + features_path);
    const TrainResult result = train(data, cfg);
    fs::create_directories(out_dir);
    write_file(fs::path(out_dir) / "checkpoint.json", model_to_json(result.model, cfg));
    write_file(fs::path(out_dir) / "history.csv", history_to_csv(result.history));
    write_manifest(out_dir, {{"features", features_path},
                             {"latent_dim", cfg.latent_dim},
                             {"iso_weight", cfg.iso_weight},
                             {"epochs", cfg.epochs},
                             {"batch", cfg.batch},
                             {"lr", cfg.lr},
                             {"seed", cfg.seed},
                             {"kernel_backend", kernels::backend_name()}});
    std::cout << "trained " << cfg.epochs << " epochs; final mse "
              << format_double(result.history.back().mse) << ", full-data mse "
              << format_double(eval_mse(result.model, data)) << "\n";
    return 0;
}

int cmd_optimize(const DecodeSetup& setup, const std::vector<MotionClip>& motions, int runs,
                 std::uint64_t master_seed, double lambda, double box, int n_init, int iters,
                 const std::string& out_dir, const nlohmann::json& manifest_extra) {
    fs::create_directories(out_dir);

    ObjectiveParams params;
    params.lambda_joint = lambda;

    VooConfig cfg;
    cfg.dim = setup.dim;
    cfg.box_min = -box;
    cfg.box_max = box;
    cfg.n_init = n_init;
    cfg.iterations = iters;

    std::vector<double> best_values;
    double global_best = std::numeric_limits<double>::infinity();
    nlohmann::json global_best_json;

    CsvWriter summary;
    summary.row({"run", "seed", "best_value"});

    for (int r = 0; r < runs; ++r) {
        cfg.seed = master_seed + static_cast<std::uint64_t>(r);
        const ObjectiveFn objective = [&](const std::vector<double>& z) {
            return total_objective(setup.decode(z), motions, params).total;
        };
        const VooRun run = voo_run(cfg, objective);
        write_file(fs::path(out_dir) / ("run_" + std::to_string(r) + ".csv"), run_to_csv(run));
        const nlohmann::json sj = structure_json(setup, run.best_point, run.best_value, cfg.seed);
        write_file(fs::path(out_dir) / ("run_" + std::to_string(r) + "_best.json"), sj.dump(2));
        best_values.push_back(run.best_value);
        summary.row({std::to_string(r), std::to_string(cfg.seed), format_double(run.best_value)});
        if (run.best_value < global_best) {
            global_best = run.best_value;
            global_best_json = sj;
        }
    }

    double mean = 0.0;
    for (double v : best_values) mean += v;
    mean /= static_cast<double>(best_values.size());
    double var = 0.0;
    for (double v : best_values) var += (v - mean) * (v - mean);
    const double stddev =
        best_values.size() > 1 ? std::sqrt(var / static_cast<double>(best_values.size() - 1)) : 0.0;
    summary.row({"mean", "", format_double(mean)});
    summary.row({"std", "", format_double(stddev)});
    write_file(fs::path(out_dir) / "summary.csv", summary.str());
    write_file(fs::path(out_dir) / "best.json", global_best_json.dump(2));

    nlohmann::json manifest = manifest_extra;
    manifest["runs"] = runs;
    manifest["master_seed"] = master_seed;
    manifest["lambda_joint"] = lambda;
    manifest["box"] = box;
    manifest["n_init"] = n_init;
    manifest["iterations"] = iters;
    manifest["dim"] = setup.dim;
    manifest["rep"] = setup.rep;
    manifest["kernel_backend"] = kernels::backend_name();
    write_file(fs::path(out_dir) / "manifest.json", manifest.dump(2));

    std::cout << "best-within-budget over " << runs << " runs: mean " << format_double(mean)
              << " std " << format_double(stddev) << " (logs in " << out_dir << ")\n";
    return 0;
}

int cmd_eval(const std::string& structure_path, const std::vector<MotionClip>& motions,
             double lambda, const std::string& out_path) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(read_file(structure_path));
    } catch (const nlohmann::json::exception& e) {
        throw SchemaError(std::string("structure parse failure: ") + e.what());
    }
    const std::string rep = j.value("rep", std::string("screw"));
    const double epsilon = j.value("epsilon", 0.5);
    const double clamp = j.value("clamp", 0.01);
    const std::vector<double> vec = j.at("vector").get<std::vector<double>>();

    Candidate c;
    if (rep == "dh") {
        const DhDecoded d = dh_activate_decoded(vec, clamp);
        c.structure = d.structure;
        if (d.has_tcp) {
            c.tcp_right = d.tcp_right;
            c.tcp_left = d.tcp_left;
        }
    } else {
        c.structure = activate_decoded(vec, epsilon);
    }

    ObjectiveParams params;
    params.lambda_joint = lambda;
    const ObjectiveReport rep_out = total_objective(c, motions, params);
    const std::string text = rep_out.to_json();
    std::cout << text << "\n";
    if (!out_path.empty()) write_file(out_path, text);
    return 0;
}

int cmd_latent_map(const std::string& checkpoint, const std::string& features_path,
                   const std::string& names_path, int k, std::uint64_t seed,
                   const std::string& out_dir) {
    const AeModel model = model_from_json(read_file(checkpoint));
    const std::vector<Vec> features = features_from_csv(read_file(features_path));
    std::vector<std::string> names = load_names(names_path);
    if (names.size() != features.size()) {
        throw SchemaError("names/features row mismatch: " + std::to_string(names.size()) + " vs " +
                          std::to_string(features.size()));
    }
    const LatentMap map = build_latent_map(model, features, names, k, seed);
    fs::create_directories(out_dir);
    write_file(fs::path(out_dir) / "latent_map.csv", latent_map_to_csv(map));
    if (model.latent_dim == 2) {
        write_file(fs::path(out_dir) / "latent_map.svg", latent_map_to_svg(map));
    }
    write_manifest(out_dir,
                   {{"checkpoint", checkpoint}, {"features", features_path}, {"k", k}, {"seed", seed}});
    std::cout << "latent map for " << names.size() << " robots written to " << out_dir << "\n";
    return 0;
}

int cmd_interp(const std::string& checkpoint, const std::string& features_path,
               const std::string& names_path, const std::string& from, const std::string& to,
               int steps, double epsilon, const std::string& out_dir) {
    const AeModel model = model_from_json(read_file(checkpoint));
    const std::vector<Vec> features = features_from_csv(read_file(features_path));
    const std::vector<std::string> names = load_names(names_path);
    auto find = [&](const std::string& name) -> const Vec& {
        for (std::size_t i = 0; i < names.size(); ++i) {
            if (names[i] == name) return features[i];
        }
        throw IoError("unknown robot name: " + name);
    };
    const Vec z_a = encode(model, find(from));
    const Vec z_b = encode(model, find(to));
    const auto strip = interpolate_strip(model, z_a, z_b, steps, epsilon);
    fs::create_directories(out_dir);
    write_file(fs::path(out_dir) / "strip.csv", strip_to_csv(strip));
    nlohmann::json dump = nlohmann::json::array();
    for (const auto& p : strip) {
        dump.push_back({{"z", p.z}, {"vector", p.decoded}, {"active_mask", p.active_mask}});
    }
    write_file(fs::path(out_dir) / "strip.json", dump.dump(2));
    write_manifest(out_dir, {{"checkpoint", checkpoint},
                             {"from", from},
                             {"to", to},
                             {"steps", steps},
                             {"epsilon", epsilon}});
    std::cout << "interpolated " << steps << " points from '" << from << "' to '" << to
              << "' into " << out_dir << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Humanoid upper-body structure optimization from human motion"};
    app.set_config("--config", "", "Configuration file (ini/toml sections per subcommand)");
    app.require_subcommand(1);

    std::string kernel_backend;
    app.add_option("--kernels", kernel_backend, "Force kernel backend: scalar or avx2")
        ->check(CLI::IsMember({"scalar", "avx2"}));

    // synth
    auto* synth = app.add_subcommand("synth", "Generate synthetic robot records and motions");
    std::string synth_out = timestamp_dir("synth");
    int synth_robots = 30;
    std::uint64_t synth_seed = 7;
    double synth_jitter = 1.0;
    std::vector<std::string> synth_motions = {"wave", "twist", "swim"};
    int synth_frames = 96;
    synth->add_option("--out", synth_out, "Output directory");
    synth->add_option("--robots", synth_robots, "Number of robot records");
    synth->add_option("--seed", synth_seed, "Generator seed");
    synth->add_option("--jitter", synth_jitter, "Jitter amount (0 = pure archetypes)");
    synth->add_option("--motions", synth_motions, "Motion kinds to generate")->delimiter(',');
    synth->add_option("--frames", synth_frames, "Frames per motion");

    // curate
    auto* curate_cmd = app.add_subcommand("curate", "Curate robot records into feature vectors");
    std::string curate_records, curate_rep = "screw", curate_out = timestamp_dir("curate");
    curate_cmd->add_option("--records", curate_records, "Directory of record JSON files")
        ->required();
    curate_cmd->add_option("--rep", curate_rep, "Representation: screw or dh")
        ->check(CLI::IsMember({"screw", "dh"}));
    curate_cmd->add_option("--out", curate_out, "Output directory");

    // train
    auto* train_cmd = app.add_subcommand("train", "Train the latent design-space autoencoder");
    std::string train_features, train_out = timestamp_dir("train");
    TrainConfig tcfg;
    train_cmd->add_option("--features", train_features, "Curated feature CSV")->required();
    train_cmd->add_option("--latent-dim", tcfg.latent_dim, "Latent dimension")
        ->check(CLI::IsMember({2, 3}));
    train_cmd->add_option("--iso-weight", tcfg.iso_weight, "Isometric regularization weight");
    train_cmd->add_option("--epochs", tcfg.epochs, "Training epochs");
    train_cmd->add_option("--batch", tcfg.batch, "Minibatch size");
    train_cmd->add_option("--lr", tcfg.lr, "Learning rate");
    train_cmd->add_option("--seed", tcfg.seed, "Training seed");
    train_cmd->add_option("--out", train_out, "Output directory");

    // optimize
    auto* opt = app.add_subcommand("optimize", "Search the design space against motions");
    std::string opt_checkpoint, opt_rep = "screw", opt_out = timestamp_dir("optimize");
    std::vector<std::string> opt_motions;
    bool opt_raw = false;
    int opt_runs = 10, opt_stride = 1, opt_n_init = 16, opt_iters = 30;
    std::uint64_t opt_master_seed = 123456789;
    double opt_lambda = 3.5, opt_epsilon = 0.5, opt_clamp = 0.01, opt_box = 15.0;
    opt->add_option("--checkpoint", opt_checkpoint, "Trained model checkpoint");
    opt->add_option("--motions", opt_motions, "BVH motion files")->delimiter(',')->required();
    opt->add_option("--rep", opt_rep, "Representation: screw or dh")
        ->check(CLI::IsMember({"screw", "dh"}));
    opt->add_flag("--raw-space", opt_raw, "Optimize the raw feature space (no manifold)");
    opt->add_option("--runs", opt_runs, "Independent seeded runs");
    opt->add_option("--master-seed", opt_master_seed, "Master seed (run r uses master + r)");
    opt->add_option("--lambda", opt_lambda, "Joint-count penalty weight");
    opt->add_option("--epsilon", opt_epsilon, "Activation threshold on decoded axis norms");
    opt->add_option("--clamp", opt_clamp, "DH near-zero link clamp threshold");
    opt->add_option("--box", opt_box, "Search box half-width");
    opt->add_option("--n-init", opt_n_init, "Initial uniform samples");
    opt->add_option("--iters", opt_iters, "VOO iterations after initialization");
    opt->add_option("--stride", opt_stride, "Motion frame stride");
    opt->add_option("--out", opt_out, "Output directory");

    // eval
    auto* eval_cmd = app.add_subcommand("eval", "Evaluate a structure file against motions");
    std::string eval_structure, eval_out;
    std::vector<std::string> eval_motions;
    double eval_lambda = 3.5;
    int eval_stride = 1;
    eval_cmd->add_option("--structure", eval_structure, "Structure JSON file")->required();
    eval_cmd->add_option("--motions", eval_motions, "BVH motion files")->delimiter(',')->required();
    eval_cmd->add_option("--lambda", eval_lambda, "Joint-count penalty weight");
    eval_cmd->add_option("--stride", eval_stride, "Motion frame stride");
    eval_cmd->add_option("--out", eval_out, "Optional report output path");

    // latent-map
    auto* map_cmd = app.add_subcommand("latent-map", "Cluster and export the latent design map");
    std::string map_checkpoint, map_features, map_names, map_out = timestamp_dir("latent-map");
    int map_k = 5;
    std::uint64_t map_seed = 0;
    map_cmd->add_option("--checkpoint", map_checkpoint, "Trained model checkpoint")->required();
    map_cmd->add_option("--features", map_features, "Curated feature CSV")->required();
    map_cmd->add_option("--names", map_names, "Robot names file (one per line)")->required();
    map_cmd->add_option("--k", map_k, "Number of k-means clusters");
    map_cmd->add_option("--seed", map_seed, "Clustering seed");
    map_cmd->add_option("--out", map_out, "Output directory");

    // interp
    auto* interp_cmd = app.add_subcommand("interp", "Interpolate between two robots' latents");
    std::string in_checkpoint, in_features, in_names, in_from, in_to,
        in_out = timestamp_dir("interp");
    int in_steps = 8;
    double in_epsilon = 0.5;
    interp_cmd->add_option("--checkpoint", in_checkpoint, "Trained model checkpoint")->required();
    interp_cmd->add_option("--features", in_features, "Curated feature CSV")->required();
    interp_cmd->add_option("--names", in_names, "Robot names file")->required();
    interp_cmd->add_option("--from", in_from, "Start robot name")->required();
    interp_cmd->add_option("--to", in_to, "End robot name")->required();
    interp_cmd->add_option("--steps", in_steps, "Number of interpolation points");
    interp_cmd->add_option("--epsilon", in_epsilon, "Activation threshold");
    interp_cmd->add_option("--out", in_out, "Output directory");

    CLI11_PARSE(app, argc, argv);

    try {
        if (!kernel_backend.empty()) {
            kernels::set_backend(kernel_backend == "avx2" ? kernels::Backend::avx2
                                                          : kernels::Backend::scalar);
        }
        if (*synth) {
            return cmd_synth(synth_out, synth_robots, synth_seed, synth_jitter, synth_motions,
                             synth_frames);
        }
        if (*curate_cmd) return cmd_curate(curate_records, curate_rep, curate_out);
        if (*train_cmd) return cmd_train(train_features, tcfg, train_out);
        if (*opt) {
            const DecodeSetup setup =
                make_decoder(opt_rep, opt_raw, opt_checkpoint, opt_epsilon, opt_clamp);
            const auto motions = load_motions(opt_motions, opt_stride);
            nlohmann::json extra;
            extra["motions"] = opt_motions;
            extra["stride"] = opt_stride;
            extra["epsilon"] = opt_epsilon;
            extra["clamp"] = opt_clamp;
            extra["raw_space"] = opt_raw;
            extra["checkpoint"] = opt_checkpoint;
            return cmd_optimize(setup, motions, opt_runs, opt_master_seed, opt_lambda, opt_box,
                                opt_n_init, opt_iters, opt_out, extra);
        }
        if (*eval_cmd) {
            const auto motions = load_motions(eval_motions, eval_stride);
            return cmd_eval(eval_structure, motions, eval_lambda, eval_out);
        }
        if (*map_cmd) {
            return cmd_latent_map(map_checkpoint, map_features, map_names, map_k, map_seed,
                                  map_out);
        }
        if (*interp_cmd) {
            return cmd_interp(in_checkpoint, in_features, in_names, in_from, in_to, in_steps,
                              in_epsilon, in_out);
        }
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "unexpected error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
