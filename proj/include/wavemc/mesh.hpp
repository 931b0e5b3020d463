/// Locally refined interval hierarchies, the two-rectangles-plus-channel
/// triangulation with its random geometric transform, and graded meshes for
/// the reentrant-corner domain.
#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace wavemc {

struct Interval {
    double lo = 0.0;
    double hi = 0.0;
    double length() const { return hi - lo; }
};

struct Mesh1D {
    std::vector<double> vertices;           // sorted, size n+1
    std::vector<std::uint8_t> fine_flags;   // per element, size n
    double coarse_h = 0.0;                  // target size in the coarse part
    double fine_h = 0.0;                    // fine size (0 when uniform)

    int n_elements() const { return static_cast<int>(vertices.size()) - 1; }
    int n_vertices() const { return static_cast<int>(vertices.size()); }
    double element_size(int e) const { return vertices[e + 1] - vertices[e]; }
    double midpoint(int e) const { return 0.5 * (vertices[e] + vertices[e + 1]); }
    double length() const { return vertices.back() - vertices.front(); }
};

/// Partition [domain] with target size coarse_h outside fine_region and
/// uniform size fine_h inside it. Flags cover the fine region plus one
/// adjacent element on each side.
Mesh1D build_refined_interval(Interval domain, double coarse_h,
                              std::optional<Interval> fine_region, double fine_h);

struct MeshHierarchy {
    std::vector<Mesh1D> levels;
    double h0 = 0.0;
    std::vector<int> ratios;  // p_l = ceil(H_l / fine_h), 1 when uniform

    int n_levels() const { return static_cast<int>(levels.size()); }
};

/// Nested hierarchy: coarse part halved per level (bisection of the parent
/// mesh), fine part unchanged until the coarse size reaches fine_h; beyond
/// that, levels refine uniformly (with a warning to stderr).
MeshHierarchy build_hierarchy(Interval domain, double h0,
                              std::optional<Interval> fine_region, double fine_h,
                              int num_levels);

struct TriMesh {
    std::vector<std::array<double, 2>> vertices;
    std::vector<std::array<int, 3>> triangles;       // CCW
    std::vector<std::uint8_t> fine_flags;            // per triangle
    std::vector<std::uint8_t> boundary_vertex;       // per vertex
    double coarse_h = 0.0;
    double fine_h = 0.0;

    int n_vertices() const { return static_cast<int>(vertices.size()); }
    int n_triangles() const { return static_cast<int>(triangles.size()); }
    double signed_area(int t) const {
        const auto& a = vertices[triangles[t][0]];
        const auto& b = vertices[triangles[t][1]];
        const auto& c = vertices[triangles[t][2]];
        return 0.5 * ((b[0] - a[0]) * (c[1] - a[1]) - (c[0] - a[0]) * (b[1] - a[1]));
    }
    double total_area() const;
    double fine_area_fraction() const;
    std::array<double, 2> centroid(int t) const {
        const auto& a = vertices[triangles[t][0]];
        const auto& b = vertices[triangles[t][1]];
        const auto& c = vertices[triangles[t][2]];
        return {(a[0] + b[0] + c[0]) / 3.0, (a[1] + b[1] + c[1]) / 3.0};
    }
    double longest_edge(int t) const;
};

inline constexpr double kChannelReferenceWidth = 0.004;  // bbar
inline constexpr double kChannelHalfLength = 0.05;       // |x| <= 0.05 inside the channel
inline constexpr double kBlendOuter = 0.1;               // identity for |x| >= 0.1
inline constexpr double kRectWidth = 0.95;
inline constexpr double kRectHalfHeight = 0.5;

/// Vertical stretching map Psi(x,y) = (x, y + blend(x) * profile(y)) taking the
/// reference channel of width bbar to a channel of the sampled width.
struct ChannelGeometry {
    double width = kChannelReferenceWidth;  // sampled b

    /// C^1 cutoff in x: 1 on |x|<=0.05, 0 on |x|>=0.1, cosine in between.
    double blend(double x) const;
    /// Piecewise linear in y with knots {-0.5, -bbar/2, 0, bbar/2, 0.5}.
    double profile(double y) const;
    std::array<double, 2> map(double x, double y) const;
    /// det J = 1 + blend(x) * profile'(y) (analytic).
    double det_jacobian(double x, double y) const;
};

/// Reference-domain triangulation: two 0.95 x 1 rectangles joined by the
/// 0.1 x bbar channel, with a dyadically graded belt around each channel
/// mouth. coarse_h is the target size away from the channel, fine_h the size
/// inside it (must resolve bbar with at least two elements across).
TriMesh build_channel_mesh(double coarse_h, double fine_h);

struct TransformedMesh {
    TriMesh mesh;                     // vertices moved by Psi
    std::vector<double> det_j;        // per-triangle determinant of the affine map
};

/// Moves the mesh vertices by Psi and reports per-triangle Jacobian
/// determinants of the induced affine map. Throws GeometryError if any
/// determinant is <= 0.
TransformedMesh apply_channel_transform(const TriMesh& reference, const ChannelGeometry& geom);

struct GradedMeshParams {
    int layers = 2;      // m
    double grading = 1;  // s >= 1
    int dim = 2;         // d
};

/// L-shaped domain (three quadrants of the unit square, reentrant corner at
/// (0.5, 0.5)) meshed in m layers clustering toward the corner.
TriMesh build_graded_lshape(const GradedMeshParams& params);

struct GradedLayer {
    int index = 0;          // k = 1..m
    double width = 0.0;     // h_k = (k^s - (k-1)^s) / (2 m^s)
    long element_count = 0; // elements in layer k (scales like k^{d-1})
};

/// Layer widths and element counts for any dimension d = 1, 2, 3.
std::vector<GradedLayer> graded_layer_table(const GradedMeshParams& params);

struct MeshReport {
    bool conforming = false;        // every non-boundary edge shared by exactly 2 triangles
    bool positive_areas = false;
    double total_area = 0.0;
    double boundary_area = 0.0;     // shoelace area of the boundary loop(s)
    double min_area = 0.0;
    int euler_characteristic = 0;   // V - E + T
};

MeshReport check_mesh(const TriMesh& mesh);

// plain-text fixtures; format documented in the writer
void dump_mesh(const Mesh1D& mesh, std::ostream& out);
void dump_mesh(const TriMesh& mesh, std::ostream& out);
Mesh1D load_mesh1d(std::istream& in);
TriMesh load_trimesh(std::istream& in);

}  // namespace wavemc
