// Plain-text mesh fixtures.
//
//   wavemc-mesh-1d <n_vertices> <n_elements> <coarse_h> <fine_h>
//   <vertex x>                      (n_vertices lines)
//   <element flag>                  (n_elements lines)
//
//   wavemc-mesh-2d <n_vertices> <n_triangles> <coarse_h> <fine_h>
//   v <x> <y>                       (n_vertices lines)
//   t <a> <b> <c> <flag>            (n_triangles lines)

#include <iomanip>
#include <istream>
#include <ostream>
#include <string>

#include "wavemc/errors.hpp"
#include "wavemc/mesh.hpp"

namespace wavemc {

void dump_mesh(const Mesh1D& mesh, std::ostream& out) {
    out << std::setprecision(17);
    out << "wavemc-mesh-1d " << mesh.n_vertices() << ' ' << mesh.n_elements() << ' '
        << mesh.coarse_h << ' ' << mesh.fine_h << '\n';
    for (double v : mesh.vertices) out << v << '\n';
    for (auto f : mesh.fine_flags) out << int(f) << '\n';
}

Mesh1D load_mesh1d(std::istream& in) {
    std::string tag;
    int nv = 0, ne = 0;
    Mesh1D mesh;
    in >> tag >> nv >> ne >> mesh.coarse_h >> mesh.fine_h;
    if (tag != "wavemc-mesh-1d" || nv != ne + 1) throw ConfigError("load_mesh1d: bad header");
    mesh.vertices.resize(nv);
    for (double& v : mesh.vertices) in >> v;
    mesh.fine_flags.resize(ne);
    for (auto& f : mesh.fine_flags) {
        int x;
        in >> x;
        f = static_cast<std::uint8_t>(x);
    }
    if (!in) throw ConfigError("load_mesh1d: truncated file");
    return mesh;
}

void dump_mesh(const TriMesh& mesh, std::ostream& out) {
    out << std::setprecision(17);
    out << "wavemc-mesh-2d " << mesh.n_vertices() << ' ' << mesh.n_triangles() << ' '
        << mesh.coarse_h << ' ' << mesh.fine_h << '\n';
    for (const auto& v : mesh.vertices) out << "v " << v[0] << ' ' << v[1] << '\n';
    for (int t = 0; t < mesh.n_triangles(); ++t)
        out << "t " << mesh.triangles[t][0] << ' ' << mesh.triangles[t][1] << ' '
            << mesh.triangles[t][2] << ' ' << int(mesh.fine_flags[t]) << '\n';
}

TriMesh load_trimesh(std::istream& in) {
    std::string tag;
    int nv = 0, nt = 0;
    TriMesh mesh;
    in >> tag >> nv >> nt >> mesh.coarse_h >> mesh.fine_h;
    if (tag != "wavemc-mesh-2d") throw ConfigError("load_trimesh: bad header");
    mesh.vertices.resize(nv);
    for (auto& v : mesh.vertices) {
        in >> tag >> v[0] >> v[1];
        if (tag != "v") throw ConfigError("load_trimesh: expected vertex line");
    }
    mesh.triangles.resize(nt);
    mesh.fine_flags.resize(nt);
    for (int t = 0; t < nt; ++t) {
        int flag;
        in >> tag >> mesh.triangles[t][0] >> mesh.triangles[t][1] >> mesh.triangles[t][2] >> flag;
        if (tag != "t") throw ConfigError("load_trimesh: expected triangle line");
        mesh.fine_flags[t] = static_cast<std::uint8_t>(flag);
    }
    if (!in) throw ConfigError("load_trimesh: truncated file");
    mesh.boundary_vertex.assign(nv, 0);
    return mesh;
}

}  // namespace wavemc
