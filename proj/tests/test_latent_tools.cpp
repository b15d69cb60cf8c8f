#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <cstdlib>
#include <set>

#include "morphopt/errors.hpp"
#include "morphopt/io_util.hpp"
#include "morphopt/latent_tools.hpp"
#include "morphopt/rng.hpp"

using namespace morphopt;

TEST_CASE("kmeans") {
    SUBCASE("k = 1 converges to the mean") {
        const std::vector<Vec> pts = {{0, 0}, {2, 0}, {0, 2}, {2, 2}};
        const KmeansResult r = kmeans(pts, 1, 0);
        CHECK(r.centroids.size() == 1);
        CHECK(r.centroids[0][0] == doctest::Approx(1.0));
        CHECK(r.centroids[0][1] == doctest::Approx(1.0));
    }
    SUBCASE("k = n gives zero inertia") {
        const std::vector<Vec> pts = {{0, 0}, {5, 0}, {0, 5}, {7, 7}};
        const KmeansResult r = kmeans(pts, 4, 1);
        CHECK(r.inertia == doctest::Approx(0.0));
        std::set<int> labels(r.labels.begin(), r.labels.end());
        CHECK(labels.size() == 4);
    }
    SUBCASE("two separated blobs are recovered with the oracle inertia") {
        Rng rng(3);
        std::vector<Vec> pts;
        for (int i = 0; i < 10; ++i) pts.push_back({rng.uniform(-0.5, 0.5), rng.uniform(-0.5, 0.5)});
        for (int i = 0; i < 10; ++i) pts.push_back({10 + rng.uniform(-0.5, 0.5), rng.uniform(-0.5, 0.5)});
        const KmeansResult r = kmeans(pts, 2, 7);
        for (int i = 1; i < 10; ++i) CHECK(r.labels[static_cast<std::size_t>(i)] == r.labels[0]);
        for (int i = 11; i < 20; ++i) CHECK(r.labels[static_cast<std::size_t>(i)] == r.labels[10]);
        CHECK(r.labels[0] != r.labels[10]);

        // brute-force within-blob inertia
        double oracle = 0.0;
        for (int blob = 0; blob < 2; ++blob) {
            Vec mean(2, 0.0);
            for (int i = 0; i < 10; ++i) {
                mean[0] += pts[static_cast<std::size_t>(blob * 10 + i)][0];
                mean[1] += pts[static_cast<std::size_t>(blob * 10 + i)][1];
            }
            mean[0] /= 10;
            mean[1] /= 10;
            for (int i = 0; i < 10; ++i) {
                const auto& p = pts[static_cast<std::size_t>(blob * 10 + i)];
                oracle += (p[0] - mean[0]) * (p[0] - mean[0]) + (p[1] - mean[1]) * (p[1] - mean[1]);
            }
        }
        CHECK(r.inertia == doctest::Approx(oracle).epsilon(1e-12));
    }
    SUBCASE("k larger than the point count is an error") {
        CHECK_THROWS_AS(kmeans({{0.0, 0.0}}, 2, 0), KTooLarge);
    }
    SUBCASE("deterministic for a fixed seed") {
        Rng rng(5);
        std::vector<Vec> pts;
        for (int i = 0; i < 30; ++i) pts.push_back({rng.uniform(-5, 5), rng.uniform(-5, 5)});
        const KmeansResult a = kmeans(pts, 5, 11);
        const KmeansResult b = kmeans(pts, 5, 11);
        CHECK(a.labels == b.labels);
        CHECK(a.inertia == b.inertia);
    }
}

TEST_CASE("interpolate_strip") {
    Rng rng(9);
    const AeModel model = AeModel::init(120, 2, {16, 8}, rng);

    SUBCASE("identical endpoints give identical structures") {
        const Vec z{0.3, -0.7};
        const auto strip = interpolate_strip(model, z, z, 5, 0.5);
        REQUIRE(strip.size() == 5);
        for (const auto& p : strip) {
            CHECK(p.decoded == strip[0].decoded);
            CHECK(p.active_mask == strip[0].active_mask);
        }
    }
    SUBCASE("endpoints reproduce direct decodes exactly") {
        const Vec za{1.0, 2.0}, zb{-2.0, 0.5};
        const auto strip = interpolate_strip(model, za, zb, 8, 0.5);
        REQUIRE(strip.size() == 8);
        CHECK(strip.front().decoded == decode(model, za));
        CHECK(strip.back().decoded == decode(model, zb));
    }
    SUBCASE("needs at least two points") {
        CHECK_THROWS_AS(interpolate_strip(model, {0, 0}, {1, 1}, 1, 0.5), DimensionMismatch);
    }
    SUBCASE("csv lists one row per step with mask columns") {
        const auto strip = interpolate_strip(model, {0, 0}, {3, 3}, 4, 0.5);
        const std::string csv = strip_to_csv(strip);
        std::size_t lines = 0;
        for (char c : csv) lines += c == '\n' ? 1 : 0;
        CHECK(lines == 5);
        CHECK(csv.find("torso0") != std::string::npos);
        CHECK(csv.find("wrist2") != std::string::npos);
    }
}

TEST_CASE("latent map export") {
    SUBCASE("empty map still produces a header") {
        const LatentMap empty;
        const std::string csv = latent_map_to_csv(empty);
        CHECK(csv == "name,z1,z2,cluster\n");
    }
    SUBCASE("csv round trips coordinates bitwise") {
        Rng rng(11);
        LatentMap map;
        for (int i = 0; i < 30; ++i) {
            map.names.push_back("robot_" + std::to_string(i));
            map.coords.push_back({rng.uniform(-8, 8), rng.uniform(-8, 8)});
            map.labels.push_back(i % 5);
        }
        const std::string csv = latent_map_to_csv(map);
        const auto rows = read_csv(csv);
        REQUIRE(rows.size() == 31);
        for (int i = 0; i < 30; ++i) {
            const auto& row = rows[static_cast<std::size_t>(i + 1)];
            CHECK(row[0] == map.names[static_cast<std::size_t>(i)]);
            CHECK(std::strtod(row[1].c_str(), nullptr) == map.coords[static_cast<std::size_t>(i)][0]);
            CHECK(std::strtod(row[2].c_str(), nullptr) == map.coords[static_cast<std::size_t>(i)][1]);
            CHECK(std::atoi(row[3].c_str()) == map.labels[static_cast<std::size_t>(i)]);
        }
    }
    SUBCASE("svg scatter contains every point and cluster color") {
        Rng rng(13);
        LatentMap map;
        for (int i = 0; i < 30; ++i) {
            map.names.push_back("r" + std::to_string(i));
            map.coords.push_back({rng.uniform(-8, 8), rng.uniform(-8, 8)});
            map.labels.push_back(i % 5);
        }
        for (int c = 0; c < 5; ++c) map.centroids.push_back({0.0, 0.0});
        const std::string svg = latent_map_to_svg(map);
        CHECK(svg.find("<svg") == 0);
        std::size_t circles = 0, from = 0;
        while ((from = svg.find("<circle", from)) != std::string::npos) {
            ++circles;
            from += 7;
        }
        CHECK(circles == 35);  // 30 points + 5 centroid rings
        std::set<std::string> colors;
        for (int label = 0; label < 5; ++label) {
            static const char* palette[] = {"#4C72B0", "#DD8452", "#55A868", "#C44E52", "#8172B3"};
            CHECK(svg.find(palette[label]) != std::string::npos);
        }
    }
    SUBCASE("svg export requires 2-d coordinates") {
        LatentMap map;
        map.names = {"a"};
        map.coords = {{1.0, 2.0, 3.0}};
        map.labels = {0};
        CHECK_THROWS_AS(latent_map_to_svg(map), DimensionMismatch);
    }
}
