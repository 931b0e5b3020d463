#include <algorithm>
#include <cmath>
#include <iostream>
#include <stdexcept>

#include "wavemc/errors.hpp"
#include "wavemc/mesh.hpp"

namespace wavemc {

namespace {

// Append n equal elements spanning [lo, hi]; hi is written exactly.
void append_uniform(std::vector<double>& vertices, double lo, double hi, int n) {
    for (int i = 1; i < n; ++i) vertices.push_back(lo + (hi - lo) * i / n);
    vertices.push_back(hi);
}

int round_count(double length, double h) {
    return std::max(1, static_cast<int>(std::llround(length / h)));
}

void flag_fine_region(Mesh1D& mesh, Interval fine) {
    const int n = mesh.n_elements();
    mesh.fine_flags.assign(n, 0);
    int first = -1, last = -1;
    for (int e = 0; e < n; ++e) {
        const double m = mesh.midpoint(e);
        if (m > fine.lo && m < fine.hi) {
            if (first < 0) first = e;
            last = e;
        }
    }
    if (first < 0) return;
    // the fine region plus one adjacent element on each side
    first = std::max(0, first - 1);
    last = std::min(n - 1, last + 1);
    for (int e = first; e <= last; ++e) mesh.fine_flags[e] = 1;
}

}  // namespace

Mesh1D build_refined_interval(Interval domain, double coarse_h,
                              std::optional<Interval> fine_region, double fine_h) {
    if (domain.length() <= 0.0) throw std::invalid_argument("build_refined_interval: empty domain");
    if (coarse_h <= 0.0) throw std::invalid_argument("build_refined_interval: coarse_h <= 0");

    Mesh1D mesh;
    mesh.coarse_h = coarse_h;
    mesh.vertices.push_back(domain.lo);

    if (!fine_region) {
        append_uniform(mesh.vertices, domain.lo, domain.hi, round_count(domain.length(), coarse_h));
        mesh.fine_flags.assign(mesh.vertices.size() - 1, 0);
        return mesh;
    }

    const Interval fine = *fine_region;
    if (fine.lo < domain.lo || fine.hi > domain.hi || fine.length() <= 0.0)
        throw std::invalid_argument("build_refined_interval: fine region not inside domain");
    if (fine_h <= 0.0 || fine_h > coarse_h)
        throw std::invalid_argument("build_refined_interval: need 0 < fine_h <= coarse_h");

    if (fine.lo > domain.lo)
        append_uniform(mesh.vertices, domain.lo, fine.lo, round_count(fine.lo - domain.lo, coarse_h));
    const int n_fine = round_count(fine.length(), fine_h);
    append_uniform(mesh.vertices, fine.lo, fine.hi, n_fine);
    if (fine.hi < domain.hi)
        append_uniform(mesh.vertices, fine.hi, domain.hi, round_count(domain.hi - fine.hi, coarse_h));

    mesh.fine_h = fine.length() / n_fine;
    flag_fine_region(mesh, fine);
    return mesh;
}

MeshHierarchy build_hierarchy(Interval domain, double h0,
                              std::optional<Interval> fine_region, double fine_h,
                              int num_levels) {
    if (num_levels < 0) throw std::invalid_argument("build_hierarchy: num_levels < 0");

    MeshHierarchy hierarchy;
    hierarchy.h0 = h0;
    hierarchy.levels.push_back(build_refined_interval(domain, h0, fine_region, fine_h));

    const double hf = fine_region ? hierarchy.levels[0].fine_h : 0.0;
    auto ratio = [&](double coarse) {
        if (!fine_region) return 1;
        return std::max(1, static_cast<int>(std::ceil(coarse / hf - 1e-9)));
    };
    hierarchy.ratios.push_back(ratio(h0));

    bool warned = false;
    for (int level = 1; level <= num_levels; ++level) {
        const Mesh1D& parent = hierarchy.levels.back();
        const double coarse = h0 / std::pow(2.0, level);
        const bool beyond_fine = fine_region && coarse < hf * (1.0 - 1e-9);
        if (beyond_fine && !warned) {
            std::cerr << "build_hierarchy: level " << level
                      << " coarser size fell below the fine size; refining uniformly\n";
            warned = true;
        }

        Mesh1D child;
        child.coarse_h = coarse;
        child.vertices.push_back(parent.vertices.front());
        for (int e = 0; e < parent.n_elements(); ++e) {
            const double lo = parent.vertices[e];
            const double hi = parent.vertices[e + 1];
            // bisect elements still coarser than the fine size (or all, once
            // the hierarchy is past the uniform point)
            const bool split = beyond_fine || !fine_region || (hi - lo) > hf * (1.0 + 1e-9);
            if (split) child.vertices.push_back(0.5 * (lo + hi));
            child.vertices.push_back(hi);
        }

        const int p = beyond_fine ? 1 : ratio(coarse);
        child.fine_h = (fine_region && p > 1) ? hf : 0.0;
        child.fine_flags.assign(child.vertices.size() - 1, 0);
        if (fine_region && p > 1) flag_fine_region(child, *fine_region);

        hierarchy.ratios.push_back(p);
        hierarchy.levels.push_back(std::move(child));
    }
    return hierarchy;
}

}  // namespace wavemc
