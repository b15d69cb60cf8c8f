#include "morphopt/latent_tools.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "morphopt/errors.hpp"
#include "morphopt/io_util.hpp"
#include "morphopt/linalg.hpp"
#include "morphopt/rng.hpp"

namespace morphopt {

KmeansResult kmeans(const std::vector<Vec>& points, int k, std::uint64_t seed, int max_iters) {
    if (k <= 0 || k > static_cast<int>(points.size())) {
        throw KTooLarge("k = " + std::to_string(k) + " with " + std::to_string(points.size()) +
                        " points");
    }
    const std::size_t n = points.size();
    const std::size_t dim = points[0].size();
    Rng rng(seed);

    // farthest-point seeding from a random start
    std::vector<Vec> centroids;
    centroids.push_back(points[rng.uniform_index(n)]);
    std::vector<double> dist2(n, std::numeric_limits<double>::infinity());
    while (static_cast<int>(centroids.size()) < k) {
        std::size_t far = 0;
        double far_d = -1.0;
        for (std::size_t i = 0; i < n; ++i) {
            const double d = linalg::sumsq_diff(points[i].data(), centroids.back().data(), dim);
            dist2[i] = std::min(dist2[i], d);
            if (dist2[i] > far_d) {
                far_d = dist2[i];
                far = i;
            }
        }
        centroids.push_back(points[far]);
    }

    std::vector<int> labels(n, -1);
    for (int iter = 0; iter < max_iters; ++iter) {
        bool changed = false;
        for (std::size_t i = 0; i < n; ++i) {
            int bestc = 0;
            double bestd = std::numeric_limits<double>::infinity();
            for (int c = 0; c < k; ++c) {
                const double d =
                    linalg::sumsq_diff(points[i].data(), centroids[static_cast<std::size_t>(c)].data(), dim);
                if (d < bestd) {
                    bestd = d;
                    bestc = c;
                }
            }
            if (labels[i] != bestc) {
                labels[i] = bestc;
                changed = true;
            }
        }
        if (!changed) break;
        for (int c = 0; c < k; ++c) {
            Vec mean(dim, 0.0);
            int count = 0;
            for (std::size_t i = 0; i < n; ++i) {
                if (labels[i] != c) continue;
                linalg::axpy(1.0, points[i].data(), mean.data(), dim);
                ++count;
            }
            if (count > 0) {
                for (auto& v : mean) v /= count;
                centroids[static_cast<std::size_t>(c)] = std::move(mean);
            }
            // an emptied cluster keeps its previous centroid
        }
    }

    KmeansResult res;
    res.labels = std::move(labels);
    res.centroids = std::move(centroids);
    for (std::size_t i = 0; i < n; ++i) {
        res.inertia += linalg::sumsq_diff(
            points[i].data(), res.centroids[static_cast<std::size_t>(res.labels[i])].data(), dim);
    }
    return res;
}

LatentMap build_latent_map(const AeModel& model, const std::vector<Vec>& features,
                           const std::vector<std::string>& names, int k, std::uint64_t seed) {
    LatentMap map;
    map.names = names;
    for (const auto& x : features) map.coords.push_back(encode(model, x));
    const KmeansResult km = kmeans(map.coords, k, seed);
    map.labels = km.labels;
    map.centroids = km.centroids;
    return map;
}

std::string latent_map_to_csv(const LatentMap& map) {
    CsvWriter csv;
    std::vector<std::string> header = {"name"};
    const std::size_t dim = map.coords.empty() ? 2 : map.coords[0].size();
    for (std::size_t d = 0; d < dim; ++d) header.push_back("z" + std::to_string(d + 1));
    header.push_back("cluster");
    csv.row(header);
    for (std::size_t i = 0; i < map.names.size(); ++i) {
        std::vector<std::string> row = {map.names[i]};
        for (double v : map.coords[i]) row.push_back(format_double(v));
        row.push_back(std::to_string(map.labels[i]));
        csv.row(row);
    }
    return csv.str();
}

std::string latent_map_to_svg(const LatentMap& map) {
    if (!map.coords.empty() && map.coords[0].size() != 2) {
        throw DimensionMismatch("SVG export requires a 2-d latent space");
    }
    static const char* palette[] = {"#4C72B0", "#DD8452", "#55A868", "#C44E52",
                                    "#8172B3", "#937860", "#DA8BC3", "#8C8C8C"};
    constexpr int kPaletteSize = 8;
    constexpr double W = 640.0, H = 640.0, margin = 60.0;

    double lo_x = -1.0, hi_x = 1.0, lo_y = -1.0, hi_y = 1.0;
    if (!map.coords.empty()) {
        lo_x = hi_x = map.coords[0][0];
        lo_y = hi_y = map.coords[0][1];
        for (const auto& z : map.coords) {
            lo_x = std::min(lo_x, z[0]);
            hi_x = std::max(hi_x, z[0]);
            lo_y = std::min(lo_y, z[1]);
            hi_y = std::max(hi_y, z[1]);
        }
        const double pad_x = 0.05 * std::max(hi_x - lo_x, 1e-9);
        const double pad_y = 0.05 * std::max(hi_y - lo_y, 1e-9);
        lo_x -= pad_x;
        hi_x += pad_x;
        lo_y -= pad_y;
        hi_y += pad_y;
    }
    auto sx = [&](double x) { return margin + (x - lo_x) / (hi_x - lo_x) * (W - 2 * margin); };
    auto sy = [&](double y) { return H - margin - (y - lo_y) / (hi_y - lo_y) * (H - 2 * margin); };

    std::ostringstream svg;
    svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H
        << "\" viewBox=\"0 0 " << W << ' ' << H << "\">\n";
    svg << "  <rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    svg << "  <g stroke=\"#cccccc\" stroke-width=\"1\">\n";
    svg << "    <line x1=\"" << margin << "\" y1=\"" << H - margin << "\" x2=\"" << W - margin
        << "\" y2=\"" << H - margin << "\"/>\n";
    svg << "    <line x1=\"" << margin << "\" y1=\"" << margin << "\" x2=\"" << margin
        << "\" y2=\"" << H - margin << "\"/>\n";
    svg << "  </g>\n";
    for (std::size_t i = 0; i < map.coords.size(); ++i) {
        const char* color = palette[map.labels[i] % kPaletteSize];
        const double x = sx(map.coords[i][0]);
        const double y = sy(map.coords[i][1]);
        svg << "  <circle cx=\"" << x << "\" cy=\"" << y << "\" r=\"5\" fill=\"" << color
            << "\"/>\n";
        svg << "  <text x=\"" << x + 7 << "\" y=\"" << y - 5
            << "\" font-family=\"sans-serif\" font-size=\"10\">" << map.names[i] << "</text>\n";
    }
    for (std::size_t c = 0; c < map.centroids.size(); ++c) {
        svg << "  <circle cx=\"" << sx(map.centroids[c][0]) << "\" cy=\""
            << sy(map.centroids[c][1]) << "\" r=\"9\" fill=\"none\" stroke=\""
            << palette[c % kPaletteSize] << "\" stroke-width=\"2\"/>\n";
    }
    svg << "</svg>\n";
    return svg.str();
}

std::vector<StripPoint> interpolate_strip(const AeModel& model, const Vec& z_a, const Vec& z_b,
                                          int n, double epsilon) {
    if (n < 2) throw DimensionMismatch("strip needs at least two points");
    std::vector<StripPoint> strip;
    strip.reserve(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
        const double alpha = static_cast<double>(i) / static_cast<double>(n - 1);
        StripPoint p;
        p.z.resize(z_a.size());
        for (std::size_t d = 0; d < z_a.size(); ++d) {
            p.z[d] = (1.0 - alpha) * z_a[d] + alpha * z_b[d];
        }
        p.decoded = decode(model, p.z);
        p.structure = activate_decoded(p.decoded, epsilon);
        p.active_mask.assign(20, false);
        const UpperBodyStructure s = unflatten(p.decoded);
        for (int slot = 0; slot < 20; ++slot) {
            p.active_mask[static_cast<std::size_t>(slot)] = s.slots[slot].omega.norm() >= epsilon;
        }
        strip.push_back(std::move(p));
    }
    return strip;
}

std::string strip_to_csv(const std::vector<StripPoint>& strip) {
    const SlotLayout& layout = SlotLayout::screw();
    CsvWriter csv;
    std::vector<std::string> header = {"step"};
    const std::size_t zdim = strip.empty() ? 0 : strip[0].z.size();
    for (std::size_t d = 0; d < zdim; ++d) header.push_back("z" + std::to_string(d + 1));
    header.push_back("n_active");
    for (int slot = 0; slot < 20; ++slot) header.push_back(layout.slot_name(slot));
    csv.row(header);
    for (std::size_t i = 0; i < strip.size(); ++i) {
        std::vector<std::string> row = {std::to_string(i)};
        for (double v : strip[i].z) row.push_back(format_double(v));
        int n_active = 0;
        for (bool b : strip[i].active_mask) n_active += b ? 1 : 0;
        row.push_back(std::to_string(n_active));
        for (bool b : strip[i].active_mask) row.push_back(b ? "1" : "0");
        csv.row(row);
    }
    return csv.str();
}

}  // namespace morphopt
