#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <unordered_map>
#include <vector>

#include "wavemc/errors.hpp"
#include "wavemc/mesh.hpp"
#include "wavemc/rng.hpp"

namespace wavemc {

double TriMesh::total_area() const {
    double a = 0.0;
    for (int t = 0; t < n_triangles(); ++t) a += signed_area(t);
    return a;
}

double TriMesh::fine_area_fraction() const {
    double fine = 0.0, total = 0.0;
    for (int t = 0; t < n_triangles(); ++t) {
        const double a = signed_area(t);
        total += a;
        if (fine_flags[t]) fine += a;
    }
    return total > 0.0 ? fine / total : 0.0;
}

double TriMesh::longest_edge(int t) const {
    double best = 0.0;
    for (int e = 0; e < 3; ++e) {
        const auto& a = vertices[triangles[t][e]];
        const auto& b = vertices[triangles[t][(e + 1) % 3]];
        best = std::max(best, std::hypot(b[0] - a[0], b[1] - a[1]));
    }
    return best;
}

namespace {

struct PairHash {
    std::size_t operator()(const std::pair<long long, long long>& p) const {
        return std::hash<long long>()(p.first * 0x9e3779b97f4a7c15LL ^ p.second);
    }
};

class MeshBuilder {
public:
    int vertex(double x, double y) {
        const std::pair<long long, long long> key{std::llround(x * 1e12), std::llround(y * 1e12)};
        const auto it = index_.find(key);
        if (it != index_.end()) return it->second;
        const int id = static_cast<int>(mesh_.vertices.size());
        mesh_.vertices.push_back({x, y});
        index_.emplace(key, id);
        return id;
    }

    void triangle(int a, int b, int c) {
        const auto& pa = mesh_.vertices[a];
        const auto& pb = mesh_.vertices[b];
        const auto& pc = mesh_.vertices[c];
        const double area2 = (pb[0] - pa[0]) * (pc[1] - pa[1]) - (pc[0] - pa[0]) * (pb[1] - pa[1]);
        if (std::abs(area2) < 1e-16)
            throw GeometryError("build_channel_mesh: degenerate triangle");
        if (area2 < 0.0) std::swap(b, c);
        mesh_.triangles.push_back({a, b, c});
    }

    TriMesh take() { return std::move(mesh_); }

private:
    TriMesh mesh_;
    std::unordered_map<std::pair<long long, long long>, int, PairHash> index_;
};

using MapFn = std::array<double, 2> (*)(double, double, double);

struct LocalFrame {
    double wall_x;   // +0.05 or -0.05
    double sign;     // +1 right rectangle, -1 left
    std::array<double, 2> to_global(double u, double y) const { return {wall_x + sign * u, y}; }
};

void quad(MeshBuilder& b, const LocalFrame& f, double u0, double y0, double u1, double y1) {
    const int a = b.vertex(f.to_global(u0, y0)[0], y0);
    const int c = b.vertex(f.to_global(u1, y0)[0], y0);
    const int d = b.vertex(f.to_global(u1, y1)[0], y1);
    const int e = b.vertex(f.to_global(u0, y1)[0], y1);
    b.triangle(a, c, d);
    b.triangle(a, d, e);
}

// 2:1 transition cell, midpoint um on the bottom edge
void quad_split_bottom(MeshBuilder& b, const LocalFrame& f, double u0, double y0, double u1,
                       double y1, double um) {
    const int a = b.vertex(f.to_global(u0, y0)[0], y0);
    const int m = b.vertex(f.to_global(um, y0)[0], y0);
    const int c = b.vertex(f.to_global(u1, y0)[0], y0);
    const int d = b.vertex(f.to_global(u1, y1)[0], y1);
    const int e = b.vertex(f.to_global(u0, y1)[0], y1);
    b.triangle(a, m, e);
    b.triangle(m, d, e);
    b.triangle(m, c, d);
}

void quad_split_top(MeshBuilder& b, const LocalFrame& f, double u0, double y0, double u1,
                    double y1, double um) {
    const int a = b.vertex(f.to_global(u0, y0)[0], y0);
    const int c = b.vertex(f.to_global(u1, y0)[0], y0);
    const int d = b.vertex(f.to_global(u1, y1)[0], y1);
    const int m = b.vertex(f.to_global(um, y1)[0], y1);
    const int e = b.vertex(f.to_global(u0, y1)[0], y1);
    b.triangle(a, c, m);
    b.triangle(c, d, m);
    b.triangle(a, m, e);
}

void quad_split_left(MeshBuilder& b, const LocalFrame& f, double u0, double y0, double u1,
                     double y1, double ym) {
    const int a = b.vertex(f.to_global(u0, y0)[0], y0);
    const int c = b.vertex(f.to_global(u1, y0)[0], y0);
    const int d = b.vertex(f.to_global(u1, y1)[0], y1);
    const int e = b.vertex(f.to_global(u0, y1)[0], y1);
    const int m = b.vertex(f.to_global(u0, ym)[0], ym);
    b.triangle(a, c, m);
    b.triangle(c, d, m);
    b.triangle(m, d, e);
}

std::vector<double> arclength_params(const std::vector<std::array<double, 2>>& pts) {
    std::vector<double> t(pts.size(), 0.0);
    for (std::size_t i = 1; i < pts.size(); ++i)
        t[i] = t[i - 1] + std::hypot(pts[i][0] - pts[i - 1][0], pts[i][1] - pts[i - 1][1]);
    const double total = t.back();
    for (double& v : t) v /= total;
    return t;
}

// Triangulate the strip between two polylines whose endpoints lie on the wall.
void zip_strip(MeshBuilder& b, const std::vector<std::array<double, 2>>& inner,
               const std::vector<std::array<double, 2>>& outer) {
    const auto ti = arclength_params(inner);
    const auto to = arclength_params(outer);
    std::size_t i = 0, j = 0;
    while (i + 1 < inner.size() || j + 1 < outer.size()) {
        bool advance_inner;
        if (i + 1 >= inner.size()) advance_inner = false;
        else if (j + 1 >= outer.size()) advance_inner = true;
        else advance_inner = ti[i + 1] <= to[j + 1];
        if (advance_inner) {
            b.triangle(b.vertex(inner[i][0], inner[i][1]), b.vertex(inner[i + 1][0], inner[i + 1][1]),
                       b.vertex(outer[j][0], outer[j][1]));
            ++i;
        } else {
            b.triangle(b.vertex(inner[i][0], inner[i][1]), b.vertex(outer[j + 1][0], outer[j + 1][1]),
                       b.vertex(outer[j][0], outer[j][1]));
            ++j;
        }
    }
}

struct FramePlan {
    int n_frames = 0;       // dyadic frames past the inner box
    long inner_n = 0;       // inner box cells per quadrant side
    long extent_units = 0;  // half-size of the outermost box, in cy units
    long last_unit = 1;     // cell size of the outermost ring, in cy units
};

FramePlan plan_frames(double cy, double min_h, int ny_mouth, double max_extent) {
    FramePlan plan;
    const double ratio = min_h / cy;
    if (ratio < 8.0) return plan;
    int frames = static_cast<int>(std::floor(std::log2(ratio)));
    long n0 = std::max<long>(4, ny_mouth / 2 + 2);
    if (n0 % 2) ++n0;
    while (frames > 0) {
        long n = n0, extent = n0, unit = 1;
        for (int f = 1; f <= frames; ++f) {
            unit = 1L << f;
            const long w = ((n / 2) % 2 == 1) ? 1 : 2;
            extent = (n / 2 + w) * unit;
            n = n / 2 + w;
        }
        if (static_cast<double>(extent) * cy <= max_extent) {
            plan.n_frames = frames;
            plan.inner_n = n0;
            plan.extent_units = extent;
            plan.last_unit = unit;
            return plan;
        }
        --frames;
    }
    return plan;  // no frames fit; fall back to the direct zipper
}

// One rectangle in local coordinates (u into the rectangle, y as global).
void build_rectangle(MeshBuilder& b, const LocalFrame& f, double hx, long nx, double hy,
                     long ny_half, double cy, int ny_mouth) {
    const double min_h = std::min(hx, hy);
    const FramePlan plan = plan_frames(cy, min_h, ny_mouth, 0.8 * std::min(hx * nx, hy * ny_half));
    auto U = [&](long k) { return static_cast<double>(k) * cy; };

    std::vector<std::array<double, 2>> inner;  // polyline in local coords, wall-bottom to wall-top
    if (plan.n_frames > 0) {
        const long n0 = plan.inner_n;
        for (long i = 0; i < n0; ++i)
            for (long j = -n0; j < n0; ++j) quad(b, f, U(i), U(j), U(i + 1), U(j + 1));

        long n_prev = n0;
        long extent_prev = n0;  // in cy units
        for (int fr = 1; fr <= plan.n_frames; ++fr) {
            const long unit = 1L << fr;
            const long w = ((n_prev / 2) % 2 == 1) ? 1 : 2;
            const long n_cur = n_prev / 2 + w;
            const long jlim = extent_prev / unit;  // inner box half-size in current cells
            // top and bottom slabs
            for (long i = 0; i < n_cur; ++i) {
                for (long r = 0; r < w; ++r) {
                    const double u0 = U(i * unit), u1 = U((i + 1) * unit);
                    const double yt0 = U(extent_prev + r * unit), yt1 = U(extent_prev + (r + 1) * unit);
                    const bool transition = (r == 0) && (i < jlim);
                    const double um = U(i * unit + unit / 2);
                    if (transition) quad_split_bottom(b, f, u0, yt0, u1, yt1, um);
                    else quad(b, f, u0, yt0, u1, yt1);
                    const double yb0 = U(-(extent_prev + (r + 1) * unit));
                    const double yb1 = U(-(extent_prev + r * unit));
                    if (transition) quad_split_top(b, f, u0, yb0, u1, yb1, um);
                    else quad(b, f, u0, yb0, u1, yb1);
                }
            }
            // right slab
            for (long c = 0; c < w; ++c) {
                for (long j = -jlim; j < jlim; ++j) {
                    const double u0 = U(extent_prev + c * unit), u1 = U(extent_prev + (c + 1) * unit);
                    const double y0 = U(j * unit), y1 = U((j + 1) * unit);
                    if (c == 0) quad_split_left(b, f, u0, y0, u1, y1, U(j * unit + unit / 2));
                    else quad(b, f, u0, y0, u1, y1);
                }
            }
            extent_prev += w * unit;
            n_prev = n_cur;
        }

        const long unit = plan.last_unit;
        const long n_last = plan.extent_units / unit;
        const double ext = U(plan.extent_units);
        for (long k = 0; k <= n_last; ++k) inner.push_back({f.to_global(U(k * unit), 0)[0], -ext});
        for (long j = -n_last + 1; j <= n_last; ++j)
            inner.push_back({f.to_global(ext, 0)[0], U(j * unit)});
        for (long k = n_last - 1; k >= 0; --k) inner.push_back({f.to_global(U(k * unit), 0)[0], ext});
    } else {
        for (long k = -ny_mouth / 2; k <= ny_mouth / 2; ++k)
            inner.push_back({f.to_global(0.0, 0)[0], U(k)});
    }

    // surrounding box aligned to the coarse grid
    const double ext_u = plan.n_frames > 0 ? U(plan.extent_units) : 0.0;
    const double ext_y = plan.n_frames > 0 ? U(plan.extent_units) : 0.5 * ny_mouth * cy;
    const long box_u = std::min<long>(nx, static_cast<long>(std::ceil(ext_u / hx - 1e-12)) + 1);
    const long box_y = std::min<long>(ny_half, static_cast<long>(std::ceil(ext_y / hy - 1e-12)) + 1);

    std::vector<std::array<double, 2>> outer;
    for (long i = 0; i <= box_u; ++i)
        outer.push_back({f.to_global(i * hx, 0)[0], -static_cast<double>(box_y) * hy});
    for (long j = -box_y + 1; j <= box_y; ++j)
        outer.push_back({f.to_global(box_u * hx, 0)[0], static_cast<double>(j) * hy});
    for (long i = box_u - 1; i >= 0; --i)
        outer.push_back({f.to_global(i * hx, 0)[0], static_cast<double>(box_y) * hy});

    zip_strip(b, inner, outer);

    // uniform cells outside the box
    for (long i = 0; i < nx; ++i) {
        for (long j = -ny_half; j < ny_half; ++j) {
            if (i < box_u && j >= -box_y && j < box_y) continue;
            const double u0 = i * hx, u1 = (i + 1) * hx;
            const double y0 = static_cast<double>(j) * hy, y1 = static_cast<double>(j + 1) * hy;
            quad(b, f, u0, y0, u1, y1);
        }
    }
}

void compute_flags_and_boundary(TriMesh& mesh, double coarse_size) {
    const int nt = mesh.n_triangles();
    const double threshold = 0.7 * coarse_size;
    std::vector<std::uint8_t> small(nt, 0);
    std::vector<std::uint8_t> touched(mesh.n_vertices(), 0);
    for (int t = 0; t < nt; ++t) {
        if (mesh.longest_edge(t) < threshold) {
            small[t] = 1;
            for (int v : mesh.triangles[t]) touched[v] = 1;
        }
    }
    mesh.fine_flags.assign(nt, 0);
    for (int t = 0; t < nt; ++t) {
        if (small[t]) { mesh.fine_flags[t] = 1; continue; }
        for (int v : mesh.triangles[t])
            if (touched[v]) { mesh.fine_flags[t] = 1; break; }
    }

    std::unordered_map<std::pair<long long, long long>, int, PairHash> edge_count;
    for (const auto& tri : mesh.triangles)
        for (int e = 0; e < 3; ++e) {
            const long long a = tri[e], c = tri[(e + 1) % 3];
            edge_count[{std::min(a, c), std::max(a, c)}]++;
        }
    mesh.boundary_vertex.assign(mesh.n_vertices(), 0);
    for (const auto& [edge, count] : edge_count)
        if (count == 1) {
            mesh.boundary_vertex[static_cast<int>(edge.first)] = 1;
            mesh.boundary_vertex[static_cast<int>(edge.second)] = 1;
        }
}

}  // namespace

TriMesh build_channel_mesh(double coarse_h, double fine_h) {
    if (fine_h <= 0.0 || coarse_h < fine_h)
        throw std::invalid_argument("build_channel_mesh: need 0 < fine_h <= coarse_h");

    const double bbar = kChannelReferenceWidth;
    const int ny_mouth = 2 * std::max(1, static_cast<int>(std::ceil(bbar / (2.0 * fine_h) - 1e-9)));
    const double cy = bbar / ny_mouth;
    const long nx_ch = std::max<long>(2, static_cast<long>(std::ceil(2.0 * kChannelHalfLength / fine_h - 1e-9)));

    const long nx = std::max<long>(1, std::llround(kRectWidth / coarse_h));
    const double hx = kRectWidth / static_cast<double>(nx);
    const long ny_half = std::max<long>(1, std::llround(kRectHalfHeight / coarse_h));
    const double hy = kRectHalfHeight / static_cast<double>(ny_half);

    MeshBuilder b;

    // channel strip
    auto channel_x = [&](long i) {
        if (i == 0) return -kChannelHalfLength;
        if (i == nx_ch) return kChannelHalfLength;
        return -kChannelHalfLength + 2.0 * kChannelHalfLength * static_cast<double>(i) / static_cast<double>(nx_ch);
    };
    for (long i = 0; i < nx_ch; ++i) {
        for (long k = -ny_mouth / 2; k < ny_mouth / 2; ++k) {
            const double x0 = channel_x(i), x1 = channel_x(i + 1);
            const double y0 = static_cast<double>(k) * cy, y1 = static_cast<double>(k + 1) * cy;
            const int va = b.vertex(x0, y0), vb = b.vertex(x1, y0), vc = b.vertex(x1, y1), vd = b.vertex(x0, y1);
            b.triangle(va, vb, vc);
            b.triangle(va, vc, vd);
        }
    }

    build_rectangle(b, {kChannelHalfLength, +1.0}, hx, nx, hy, ny_half, cy, ny_mouth);
    build_rectangle(b, {-kChannelHalfLength, -1.0}, hx, nx, hy, ny_half, cy, ny_mouth);

    TriMesh mesh = b.take();
    mesh.coarse_h = std::max(hx, hy);
    mesh.fine_h = std::min(cy, 2.0 * kChannelHalfLength / static_cast<double>(nx_ch));
    compute_flags_and_boundary(mesh, std::min(hx, hy));
    return mesh;
}

double ChannelGeometry::blend(double x) const {
    const double a = std::abs(x);
    if (a <= kChannelHalfLength) return 1.0;
    if (a >= kBlendOuter) return 0.0;
    return 0.5 * (1.0 + std::cos(std::numbers::pi * (a - kChannelHalfLength) /
                                 (kBlendOuter - kChannelHalfLength)));
}

double ChannelGeometry::profile(double y) const {
    const double half_ref = 0.5 * kChannelReferenceWidth;
    const double peak = 0.5 * (width - kChannelReferenceWidth);
    const double a = std::abs(y);
    double value;
    if (a <= half_ref) value = peak * (a / half_ref);
    else value = peak * (kRectHalfHeight - a) / (kRectHalfHeight - half_ref);
    return y < 0.0 ? -value : value;
}

std::array<double, 2> ChannelGeometry::map(double x, double y) const {
    return {x, y + blend(x) * profile(y)};
}

double ChannelGeometry::det_jacobian(double x, double y) const {
    const double half_ref = 0.5 * kChannelReferenceWidth;
    const double peak = 0.5 * (width - kChannelReferenceWidth);
    const double dpsi = std::abs(y) <= half_ref ? peak / half_ref
                                                : -peak / (kRectHalfHeight - half_ref);
    return 1.0 + blend(x) * dpsi;
}

TransformedMesh apply_channel_transform(const TriMesh& reference, const ChannelGeometry& geom) {
    if (geom.width < kChannelWidthLo - 1e-12 || geom.width > kChannelWidthHi + 1e-12)
        throw GeometryError("apply_channel_transform: width outside [0.001, 0.007]");

    TransformedMesh out;
    out.mesh = reference;
    if (geom.width != kChannelReferenceWidth) {
        for (auto& v : out.mesh.vertices) {
            const auto p = geom.map(v[0], v[1]);
            v[0] = p[0];
            v[1] = p[1];
        }
    }
    out.det_j.resize(reference.n_triangles());
    for (int t = 0; t < reference.n_triangles(); ++t) {
        const double ref_area = reference.signed_area(t);
        const double new_area = out.mesh.signed_area(t);
        out.det_j[t] = new_area / ref_area;
        if (!(out.det_j[t] > 0.0))
            throw GeometryError("apply_channel_transform: non-positive Jacobian determinant");
    }
    return out;
}

MeshReport check_mesh(const TriMesh& mesh) {
    MeshReport report;
    report.positive_areas = true;
    report.min_area = std::numeric_limits<double>::infinity();
    for (int t = 0; t < mesh.n_triangles(); ++t) {
        const double a = mesh.signed_area(t);
        report.total_area += a;
        report.min_area = std::min(report.min_area, a);
        if (a <= 0.0) report.positive_areas = false;
    }

    std::unordered_map<std::pair<long long, long long>, int, PairHash> edge_count;
    for (const auto& tri : mesh.triangles)
        for (int e = 0; e < 3; ++e) {
            const long long a = tri[e], c = tri[(e + 1) % 3];
            edge_count[{std::min(a, c), std::max(a, c)}]++;
        }
    report.conforming = true;
    double boundary_area2 = 0.0;
    for (const auto& [edge, count] : edge_count) {
        if (count > 2) report.conforming = false;
    }
    // boundary loop area via the oriented once-edges
    for (const auto& tri : mesh.triangles)
        for (int e = 0; e < 3; ++e) {
            const int a = tri[e], c = tri[(e + 1) % 3];
            const auto key = std::make_pair<long long, long long>(std::min(a, c), std::max(a, c));
            if (edge_count[key] == 1) {
                const auto& pa = mesh.vertices[a];
                const auto& pc = mesh.vertices[c];
                boundary_area2 += pa[0] * pc[1] - pc[0] * pa[1];
            }
        }
    report.boundary_area = 0.5 * boundary_area2;
    report.euler_characteristic = mesh.n_vertices() - static_cast<int>(edge_count.size()) +
                                  mesh.n_triangles();
    return report;
}

}  // namespace wavemc
