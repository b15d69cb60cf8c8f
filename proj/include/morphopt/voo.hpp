#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "morphopt/rng.hpp"

namespace morphopt {

// Voronoi Optimistic Optimization over an axis-aligned box.
struct VooConfig {
    int dim = 2;
    double box_min = -15.0;
    double box_max = 15.0;
    double p_global = 0.55;
    double sigma_c = 0.6;
    int n_switch = 20;     // uniform trials before switching to Gaussian
    int max_inner = 500;   // total candidate draws before the global fallback
    int n_init = 16;
    int iterations = 30;   // T
    std::uint64_t seed = 123456789;
};

enum class SampleKind { init, global, local_uniform, local_gaussian, fallback };
const char* sample_kind_name(SampleKind k);

struct VooEval {
    std::vector<double> point;
    double value = 0.0;
    SampleKind kind = SampleKind::init;
};

struct VooState {
    std::vector<VooEval> archive;
    std::size_t best = 0;  // minimal value, ties broken by earliest evaluation
    Rng rng{0};

    const VooEval& best_eval() const { return archive[best]; }
};

using ObjectiveFn = std::function<double(const std::vector<double>&)>;

// Evaluates n_init uniform samples and seeds the archive.
VooState voo_init(const VooConfig& cfg, const ObjectiveFn& objective);

// One VOO step: global uniform sample with probability p_global, otherwise a
// sample accepted inside the best point's Voronoi cell (strictly closer to
// the best than to any other evaluated point). Candidates are drawn uniformly
// for n_switch trials, then from a Gaussian centered on the best with
// sigma = sigma_c * sqrt(r / d) where r is the best point's squared
// nearest-neighbor distance, with one uniform fallback after max_inner draws.
void voo_step(VooState& state, const VooConfig& cfg, const ObjectiveFn& objective);

struct VooRun {
    std::vector<double> best_point;
    double best_value = 0.0;
    std::vector<double> best_trace;  // best-so-far after every evaluation
    std::vector<VooEval> evals;
};

// n_init + T evaluations exactly.
VooRun voo_run(const VooConfig& cfg, const ObjectiveFn& objective);

// (eval_index, point components, value, best_so_far, sample_kind) rows.
std::string run_to_csv(const VooRun& run);

}  // namespace morphopt
