#include <array>
#include <cmath>
#include <stdexcept>
#include <unordered_map>
#include <vector>

#include "wavemc/mesh.hpp"

namespace wavemc {

namespace {

struct PairHash {
    std::size_t operator()(const std::pair<long long, long long>& p) const {
        return std::hash<long long>()(p.first * 0x9e3779b97f4a7c15LL ^ p.second);
    }
};

int layer_macro_count(int dim) {
    switch (dim) {
        case 1: return 2;
        case 2: return 6;
        case 3: return 28;
        default: throw std::invalid_argument("graded mesh: dim must be 1, 2 or 3");
    }
}

}  // namespace

std::vector<GradedLayer> graded_layer_table(const GradedMeshParams& params) {
    if (params.layers < 2) throw std::invalid_argument("graded mesh: need m >= 2");
    if (params.grading < 1.0) throw std::invalid_argument("graded mesh: need s >= 1");
    const int m = params.layers;
    const double s = params.grading;
    const int macro = layer_macro_count(params.dim);
    std::vector<GradedLayer> table(m);
    const double scale = 2.0 * std::pow(static_cast<double>(m), s);
    for (int k = 1; k <= m; ++k) {
        table[k - 1].index = k;
        table[k - 1].width = (std::pow(k, s) - std::pow(k - 1.0, s)) / scale;
        table[k - 1].element_count =
            macro * (static_cast<long>(std::llround(std::pow(k, params.dim))) -
                     static_cast<long>(std::llround(std::pow(k - 1.0, params.dim))));
    }
    return table;
}

TriMesh build_graded_lshape(const GradedMeshParams& params) {
    if (params.layers < 2) throw std::invalid_argument("graded mesh: need m >= 2");
    if (params.grading < 1.0) throw std::invalid_argument("graded mesh: need s >= 1");
    const int m = params.layers;
    const double s = params.grading;

    // three quadrants of the unit square, fanned into six macro triangles
    // around the reentrant corner
    const std::array<double, 2> center{0.5, 0.5};
    const std::array<std::array<double, 2>, 7> ring{{{1.0, 0.5},
                                                     {1.0, 0.0},
                                                     {0.5, 0.0},
                                                     {0.0, 0.0},
                                                     {0.0, 0.5},
                                                     {0.0, 1.0},
                                                     {0.5, 1.0}}};

    TriMesh mesh;
    std::unordered_map<std::pair<long long, long long>, int, PairHash> index;
    auto vertex = [&](double x, double y) {
        const std::pair<long long, long long> key{std::llround(x * 1e12), std::llround(y * 1e12)};
        const auto it = index.find(key);
        if (it != index.end()) return it->second;
        const int id = static_cast<int>(mesh.vertices.size());
        mesh.vertices.push_back({x, y});
        index.emplace(key, id);
        return id;
    };
    auto triangle = [&](int a, int b, int c) {
        const auto& pa = mesh.vertices[a];
        const auto& pb = mesh.vertices[b];
        const auto& pc = mesh.vertices[c];
        if ((pb[0] - pa[0]) * (pc[1] - pa[1]) - (pc[0] - pa[0]) * (pb[1] - pa[1]) < 0.0)
            std::swap(b, c);
        mesh.triangles.push_back({a, b, c});
    };

    for (int macro = 0; macro < 6; ++macro) {
        const auto& v1 = ring[macro];
        const auto& v2 = ring[macro + 1];
        // row k holds k+1 points on the chord between the two macro edges at
        // radial parameter (k/m)^s
        std::vector<int> prev_row{vertex(center[0], center[1])};
        for (int k = 1; k <= m; ++k) {
            const double t = std::pow(static_cast<double>(k) / m, s);
            std::vector<int> row(k + 1);
            for (int i = 0; i <= k; ++i) {
                const double a = static_cast<double>(i) / k;
                const double x = center[0] + t * ((1.0 - a) * (v1[0] - center[0]) + a * (v2[0] - center[0]));
                const double y = center[1] + t * ((1.0 - a) * (v1[1] - center[1]) + a * (v2[1] - center[1]));
                row[i] = vertex(x, y);
            }
            for (int i = 0; i < k; ++i) triangle(row[i], row[i + 1], prev_row[i]);
            for (int i = 0; i + 1 < k; ++i) triangle(row[i + 1], prev_row[i + 1], prev_row[i]);
            prev_row = std::move(row);
        }
    }

    mesh.fine_flags.assign(mesh.triangles.size(), 0);
    mesh.boundary_vertex.assign(mesh.vertices.size(), 0);
    const auto table = graded_layer_table({m, s, 2});
    mesh.fine_h = table.front().width;
    mesh.coarse_h = table.back().width;
    return mesh;
}

}  // namespace wavemc
