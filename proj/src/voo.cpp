#include "morphopt/voo.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "morphopt/io_util.hpp"
#include "morphopt/linalg.hpp"

namespace morphopt {

const char* sample_kind_name(SampleKind k) {
    switch (k) {
        case SampleKind::init: return "init";
        case SampleKind::global: return "global";
        case SampleKind::local_uniform: return "local_uniform";
        case SampleKind::local_gaussian: return "local_gaussian";
        case SampleKind::fallback: return "fallback";
    }
    return "?";
}

namespace {

std::vector<double> uniform_point(const VooConfig& cfg, Rng& rng) {
    std::vector<double> p(static_cast<std::size_t>(cfg.dim));
    for (auto& x : p) x = rng.uniform(cfg.box_min, cfg.box_max);
    return p;
}

void record(VooState& state, std::vector<double> point, double value, SampleKind kind) {
    state.archive.push_back({std::move(point), value, kind});
    if (value < state.archive[state.best].value) {
        state.best = state.archive.size() - 1;
    }
}

}  // namespace

VooState voo_init(const VooConfig& cfg, const ObjectiveFn& objective) {
    VooState state;
    state.rng = Rng(cfg.seed);
    state.archive.reserve(static_cast<std::size_t>(cfg.n_init + cfg.iterations));
    for (int i = 0; i < cfg.n_init; ++i) {
        std::vector<double> p = uniform_point(cfg, state.rng);
        const double v = objective(p);
        record(state, std::move(p), v, SampleKind::init);
    }
    return state;
}

void voo_step(VooState& state, const VooConfig& cfg, const ObjectiveFn& objective) {
    Rng& rng = state.rng;
    const double decision = rng.uniform();
    const bool forced_global = state.archive.size() < 2;

    if (forced_global || decision < cfg.p_global) {
        std::vector<double> p = uniform_point(cfg, rng);
        const double v = objective(p);
        record(state, std::move(p), v, SampleKind::global);
        return;
    }

    const std::vector<double>& best = state.best_eval().point;
    const std::size_t n = best.size();

    // Voronoi radius: squared distance from the best point to its nearest
    // other evaluated point; sets the Gaussian scale
    double radius = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < state.archive.size(); ++i) {
        if (i == state.best) continue;
        const double d2 = linalg::sumsq_diff(best.data(), state.archive[i].point.data(), n);
        radius = std::min(radius, d2);
    }

    // a candidate is accepted when its squared distance to the best point is
    // below its squared distance to every other evaluated point, i.e. it lies
    // in the best point's Voronoi cell
    auto in_best_cell = [&](const std::vector<double>& cand) {
        const double to_best = linalg::sumsq_diff(cand.data(), best.data(), n);
        for (std::size_t i = 0; i < state.archive.size(); ++i) {
            if (i == state.best) continue;
            if (to_best >= linalg::sumsq_diff(cand.data(), state.archive[i].point.data(), n)) {
                return false;
            }
        }
        return true;
    };

    const double sigma = cfg.sigma_c * std::sqrt(radius / static_cast<double>(cfg.dim));
    std::vector<double> cand(n);
    for (int draw = 0; draw < cfg.max_inner; ++draw) {
        SampleKind kind;
        if (draw < cfg.n_switch) {
            kind = SampleKind::local_uniform;
            for (auto& x : cand) x = rng.uniform(cfg.box_min, cfg.box_max);
        } else {
            kind = SampleKind::local_gaussian;
            for (std::size_t d = 0; d < n; ++d) {
                const double x = best[d] + sigma * rng.gaussian();
                cand[d] = std::min(std::max(x, cfg.box_min), cfg.box_max);
            }
        }
        if (in_best_cell(cand)) {
            const double v = objective(cand);
            record(state, cand, v, kind);
            return;
        }
    }

    // inner loop exhausted: one uniform global sample
    std::vector<double> p = uniform_point(cfg, rng);
    const double v = objective(p);
    record(state, std::move(p), v, SampleKind::fallback);
}

VooRun voo_run(const VooConfig& cfg, const ObjectiveFn& objective) {
    VooState state = voo_init(cfg, objective);
    for (int t = 0; t < cfg.iterations; ++t) voo_step(state, cfg, objective);

    VooRun run;
    run.evals = state.archive;
    double best = std::numeric_limits<double>::infinity();
    for (const auto& e : state.archive) {
        best = std::min(best, e.value);
        run.best_trace.push_back(best);
    }
    run.best_point = state.best_eval().point;
    run.best_value = state.best_eval().value;
    return run;
}

std::string run_to_csv(const VooRun& run) {
    CsvWriter csv;
    std::vector<std::string> header = {"eval_index"};
    const std::size_t dim = run.evals.empty() ? 0 : run.evals[0].point.size();
    for (std::size_t d = 0; d < dim; ++d) header.push_back("p" + std::to_string(d));
    header.push_back("value");
    header.push_back("best_so_far");
    header.push_back("sample_kind");
    csv.row(header);
    for (std::size_t i = 0; i < run.evals.size(); ++i) {
        std::vector<std::string> row = {std::to_string(i)};
        for (double x : run.evals[i].point) row.push_back(format_double(x));
        row.push_back(format_double(run.evals[i].value));
        row.push_back(format_double(run.best_trace[i]));
        row.push_back(sample_kind_name(run.evals[i].kind));
        csv.row(row);
    }
    return csv.str();
}

}  // namespace morphopt
