#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "morphopt/manifold.hpp"
#include "morphopt/screw_model.hpp"

namespace morphopt {

struct KmeansResult {
    std::vector<int> labels;
    std::vector<Vec> centroids;
    double inertia = 0.0;
};

// Lloyd iterations from farthest-point seeding; deterministic given the seed.
KmeansResult kmeans(const std::vector<Vec>& points, int k, std::uint64_t seed,
                    int max_iters = 100);

// Per-robot latent coordinates with k-means cluster labels.
struct LatentMap {
    std::vector<std::string> names;
    std::vector<Vec> coords;
    std::vector<int> labels;
    std::vector<Vec> centroids;
};

LatentMap build_latent_map(const AeModel& model, const std::vector<Vec>& features,
                           const std::vector<std::string>& names, int k, std::uint64_t seed);

// (name, z1, z2, ..., cluster) rows.
std::string latent_map_to_csv(const LatentMap& map);

// Self-contained SVG scatter with cluster colors and name labels. Requires a
// 2-d latent space.
std::string latent_map_to_svg(const LatentMap& map);

struct StripPoint {
    Vec z;
    Vec decoded;
    FullBodyStructure structure;
    std::vector<bool> active_mask;  // per slot
};

// Decodes n evenly spaced points from z_a to z_b inclusive and applies the
// activation rule, so joint births and deaths are diffable between steps.
std::vector<StripPoint> interpolate_strip(const AeModel& model, const Vec& z_a, const Vec& z_b,
                                          int n, double epsilon);

// (step, slot..., active flags) rows.
std::string strip_to_csv(const std::vector<StripPoint>& strip);

}  // namespace morphopt
