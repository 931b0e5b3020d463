#include <algorithm>
#include <array>
#include <cmath>
#include <iomanip>
#include <numeric>
#include <ostream>
#include <stdexcept>

#include "wavemc/errors.hpp"
#include "wavemc/fem.hpp"
#include "wavemc/rng.hpp"

namespace wavemc {

double QoIVector::norm() const {
    double acc = 0.0;
    for (int i = 0; i < grid.n; ++i) acc += grid.weight(i) * values[i] * values[i];
    return std::sqrt(acc);
}

QoIVector& QoIVector::operator+=(const QoIVector& other) {
    if (!(grid == other.grid)) throw std::invalid_argument("QoIVector: grid mismatch");
    for (std::size_t i = 0; i < values.size(); ++i) values[i] += other.values[i];
    return *this;
}

QoIVector& QoIVector::operator-=(const QoIVector& other) {
    if (!(grid == other.grid)) throw std::invalid_argument("QoIVector: grid mismatch");
    for (std::size_t i = 0; i < values.size(); ++i) values[i] -= other.values[i];
    return *this;
}

QoIVector& QoIVector::operator*=(double factor) {
    for (double& v : values) v *= factor;
    return *this;
}

QoIVector operator-(QoIVector a, const QoIVector& b) { return a -= b; }
QoIVector operator+(QoIVector a, const QoIVector& b) { return a += b; }
QoIVector operator*(QoIVector a, double factor) { return a *= factor; }

DiscreteOperator make_operator(std::vector<double> mass_diag, CsrMatrix stiffness,
                               std::vector<std::uint8_t> selector) {
    DiscreteOperator op;
    op.mass_diag = std::move(mass_diag);
    op.stiffness = std::move(stiffness);
    op.selector = std::move(selector);
    if (op.selector.empty()) op.selector.assign(op.mass_diag.size(), 0);
    op.normalized = normalize(op.mass_diag, op.stiffness);
    op.a_fine = op.normalized.masked_columns(op.selector);
    std::vector<std::uint8_t> inverse(op.selector.size());
    for (std::size_t i = 0; i < inverse.size(); ++i) inverse[i] = op.selector[i] ? 0 : 1;
    op.a_coarse = op.normalized.masked_columns(inverse);
    op.n_fine = std::count(op.selector.begin(), op.selector.end(), std::uint8_t{1});
    op.n_coarse = static_cast<long>(op.selector.size()) - op.n_fine;
    return op;
}

CsrMatrix normalize(const std::vector<double>& mass_diag, const CsrMatrix& stiffness) {
    return stiffness.scaled([&](int r, int c, double v) {
        return v / std::sqrt(mass_diag[r] * mass_diag[c]);
    });
}

DiscreteOperator assemble(const Mesh1D& mesh, const std::function<double(double)>& speed2) {
    const int nv = mesh.n_vertices();
    std::vector<double> mass(nv, 0.0);
    std::vector<std::tuple<int, int, double>> triplets;
    triplets.reserve(4 * mesh.n_elements());
    for (int e = 0; e < mesh.n_elements(); ++e) {
        const double h = mesh.element_size(e);
        const double c2 = speed2(mesh.midpoint(e));
        if (!(c2 > 0.0)) throw NumericalError("assemble: nonpositive squared speed");
        const double k = c2 / h;
        triplets.emplace_back(e, e, k);
        triplets.emplace_back(e + 1, e + 1, k);
        triplets.emplace_back(e, e + 1, -k);
        triplets.emplace_back(e + 1, e, -k);
        mass[e] += 0.5 * h;
        mass[e + 1] += 0.5 * h;
    }

    std::vector<std::uint8_t> selector(nv, 0);
    for (int e = 0; e < mesh.n_elements(); ++e)
        if (mesh.fine_flags[e]) selector[e] = selector[e + 1] = 1;

    return make_operator(std::move(mass), CsrMatrix::from_triplets(nv, nv, std::move(triplets)),
                         std::move(selector));
}

DiscreteOperator assemble(const TriMesh& mesh, const std::function<double(double, double)>& speed2) {
    const int nv = mesh.n_vertices();
    std::vector<double> mass(nv, 0.0);
    std::vector<std::tuple<int, int, double>> triplets;
    triplets.reserve(9 * mesh.n_triangles());
    for (int t = 0; t < mesh.n_triangles(); ++t) {
        const auto& tri = mesh.triangles[t];
        const auto& p0 = mesh.vertices[tri[0]];
        const auto& p1 = mesh.vertices[tri[1]];
        const auto& p2 = mesh.vertices[tri[2]];
        const double area = mesh.signed_area(t);
        if (!(area > 0.0)) throw NumericalError("assemble: nonpositive triangle area");
        const auto c = mesh.centroid(t);
        const double c2 = speed2(c[0], c[1]);
        if (!(c2 > 0.0)) throw NumericalError("assemble: nonpositive squared speed");

        // gradients of the barycentric basis
        const double gx[3] = {(p1[1] - p2[1]) / (2.0 * area), (p2[1] - p0[1]) / (2.0 * area),
                              (p0[1] - p1[1]) / (2.0 * area)};
        const double gy[3] = {(p2[0] - p1[0]) / (2.0 * area), (p0[0] - p2[0]) / (2.0 * area),
                              (p1[0] - p0[0]) / (2.0 * area)};
        for (int i = 0; i < 3; ++i) {
            mass[tri[i]] += area / 3.0;
            for (int j = 0; j < 3; ++j)
                triplets.emplace_back(tri[i], tri[j], c2 * area * (gx[i] * gx[j] + gy[i] * gy[j]));
        }
    }

    std::vector<std::uint8_t> selector(nv, 0);
    for (int t = 0; t < mesh.n_triangles(); ++t)
        if (mesh.fine_flags[t])
            for (int v : mesh.triangles[t]) selector[v] = 1;

    return make_operator(std::move(mass), CsrMatrix::from_triplets(nv, nv, std::move(triplets)),
                         std::move(selector));
}

DiscreteOperator assemble(const TriMesh& mesh, double uniform_speed2) {
    return assemble(mesh, [uniform_speed2](double, double) { return uniform_speed2; });
}

PowerIterationResult max_eigenvalue(const ApplyFn& apply, int n, double tol, int max_iter,
                                    const std::vector<double>* warm_start) {
    std::vector<double> v(n), av(n);
    if (warm_start && static_cast<int>(warm_start->size()) == n) {
        v = *warm_start;
    } else {
        for (int i = 0; i < n; ++i)
            v[i] = static_cast<double>(mix64(static_cast<std::uint64_t>(i) + 1) >> 11) * 0x1.0p-53 - 0.5;
    }
    double norm = std::sqrt(std::inner_product(v.begin(), v.end(), v.begin(), 0.0));
    if (norm == 0.0) { v[0] = 1.0; norm = 1.0; }
    for (double& x : v) x /= norm;

    PowerIterationResult result;
    double lambda_prev = 0.0;
    int settled = 0;
    for (int it = 1; it <= max_iter; ++it) {
        apply(v, av);
        const double rayleigh = std::inner_product(v.begin(), v.end(), av.begin(), 0.0);
        const double av_norm = std::sqrt(std::inner_product(av.begin(), av.end(), av.begin(), 0.0));
        result.iterations = it;
        if (av_norm == 0.0) {  // zero operator
            result.lambda = 0.0;
            result.eigenvector = v;
            return result;
        }
        for (std::size_t i = 0; i < v.size(); ++i) v[i] = av[i] / av_norm;
        if (std::abs(rayleigh - lambda_prev) <= tol * std::abs(rayleigh)) {
            if (++settled >= 3) {
                result.lambda = rayleigh;
                result.eigenvector = v;
                return result;
            }
        } else {
            settled = 0;
        }
        lambda_prev = rayleigh;
    }
    throw NumericalError("max_eigenvalue: power iteration did not converge");
}

PowerIterationResult max_eigenvalue(const CsrMatrix& a, double tol, int max_iter,
                                    const std::vector<double>* warm_start) {
    return max_eigenvalue([&a](std::span<const double> x, std::span<double> y) { a.multiply(x, y); },
                          a.rows(), tol, max_iter, warm_start);
}

PowerIterationResult coarse_max_eigenvalue(const DiscreteOperator& op, double tol, int max_iter,
                                           const std::vector<double>* warm_start) {
    std::vector<double> masked(op.size());
    auto apply = [&](std::span<const double> x, std::span<double> y) {
        for (int i = 0; i < op.size(); ++i) masked[i] = op.selector[i] ? 0.0 : x[i];
        op.a_coarse.multiply(masked, y);
        for (int i = 0; i < op.size(); ++i)
            if (op.selector[i]) y[i] = 0.0;
    };
    return max_eigenvalue(apply, op.size(), tol, max_iter, warm_start);
}

double cfl_dt(double lambda_max, double safety) {
    if (safety <= 0.0 || safety > 1.0) throw std::invalid_argument("cfl_dt: safety in (0,1]");
    if (lambda_max <= 0.0) throw std::invalid_argument("cfl_dt: lambda_max must be positive");
    return safety * 2.0 / std::sqrt(lambda_max);
}

namespace {

// two-point Gauss nodes on [lo, hi]
std::array<double, 2> gauss2(double lo, double hi) {
    const double mid = 0.5 * (lo + hi);
    const double off = 0.5 * (hi - lo) / std::sqrt(3.0);
    return {mid - off, mid + off};
}

std::vector<double> project_coefficients_1d(const Mesh1D& mesh,
                                            const std::function<double(double)>& f,
                                            const std::vector<double>& mass) {
    std::vector<double> load(mesh.n_vertices(), 0.0);
    for (int e = 0; e < mesh.n_elements(); ++e) {
        const double lo = mesh.vertices[e], hi = mesh.vertices[e + 1];
        const double h = hi - lo;
        for (double x : gauss2(lo, hi)) {
            const double phi_right = (x - lo) / h;
            load[e] += 0.5 * h * f(x) * (1.0 - phi_right);
            load[e + 1] += 0.5 * h * f(x) * phi_right;
        }
    }
    for (int i = 0; i < mesh.n_vertices(); ++i) load[i] /= mass[i];
    return load;
}

std::vector<double> project_coefficients_2d(const TriMesh& mesh,
                                            const std::function<double(double, double)>& f,
                                            const std::vector<double>& mass) {
    std::vector<double> load(mesh.n_vertices(), 0.0);
    for (int t = 0; t < mesh.n_triangles(); ++t) {
        const auto& tri = mesh.triangles[t];
        const double area = mesh.signed_area(t);
        // edge-midpoint rule, exact for quadratics
        for (int e = 0; e < 3; ++e) {
            const auto& a = mesh.vertices[tri[e]];
            const auto& b = mesh.vertices[tri[(e + 1) % 3]];
            const double value = f(0.5 * (a[0] + b[0]), 0.5 * (a[1] + b[1]));
            load[tri[e]] += area / 3.0 * value * 0.5;
            load[tri[(e + 1) % 3]] += area / 3.0 * value * 0.5;
        }
    }
    for (int i = 0; i < mesh.n_vertices(); ++i) load[i] /= mass[i];
    return load;
}

InitialData lift_to_state(const std::vector<double>& u_coeff, const std::vector<double>& v_coeff,
                          const DiscreteOperator& op) {
    InitialData data;
    data.z0.resize(op.size());
    data.mhalf_v0.resize(op.size());
    for (int i = 0; i < op.size(); ++i) {
        const double root = std::sqrt(op.mass_diag[i]);
        data.z0[i] = root * u_coeff[i];
        data.mhalf_v0[i] = root * v_coeff[i];
    }
    return data;
}

}  // namespace

InitialData project_initial(const Mesh1D& mesh, const std::function<double(double)>& u0,
                            const std::function<double(double)>& v0, const DiscreteOperator& op) {
    return lift_to_state(project_coefficients_1d(mesh, u0, op.mass_diag),
                         project_coefficients_1d(mesh, v0, op.mass_diag), op);
}

InitialData project_initial(const TriMesh& mesh, const std::function<double(double, double)>& u0,
                            const std::function<double(double, double)>& v0,
                            const DiscreteOperator& op) {
    return lift_to_state(project_coefficients_2d(mesh, u0, op.mass_diag),
                         project_coefficients_2d(mesh, v0, op.mass_diag), op);
}

std::vector<double> nodal_values(const DiscreteOperator& op, std::span<const double> z) {
    std::vector<double> u(z.size());
    for (std::size_t i = 0; i < z.size(); ++i) u[i] = z[i] / std::sqrt(op.mass_diag[i]);
    return u;
}

QoIVector restrict_to_grid(const Mesh1D& mesh, std::span<const double> nodal,
                           const OutputGrid& grid) {
    QoIVector qoi{grid, std::vector<double>(grid.n, 0.0)};
    const double lo = mesh.vertices.front(), hi = mesh.vertices.back();
    for (int i = 0; i < grid.n; ++i) {
        double x = grid.point(i);
        if (x < lo - 1e-9 || x > hi + 1e-9)
            throw NumericalError("restrict_to_grid: point outside mesh");
        x = std::clamp(x, lo, hi);
        const auto it = std::upper_bound(mesh.vertices.begin(), mesh.vertices.end(), x);
        int e = static_cast<int>(it - mesh.vertices.begin()) - 1;
        e = std::clamp(e, 0, mesh.n_elements() - 1);
        const double t = (x - mesh.vertices[e]) / mesh.element_size(e);
        qoi.values[i] = (1.0 - t) * nodal[e] + t * nodal[e + 1];
    }
    return qoi;
}

QoIVector extract_line_qoi(const TriMesh& mesh, std::span<const double> nodal, double line_x,
                           const OutputGrid& grid) {
    // candidate triangles whose bounding box crosses the line
    std::vector<int> candidates;
    for (int t = 0; t < mesh.n_triangles(); ++t) {
        double xmin = 1e30, xmax = -1e30;
        for (int v : mesh.triangles[t]) {
            xmin = std::min(xmin, mesh.vertices[v][0]);
            xmax = std::max(xmax, mesh.vertices[v][0]);
        }
        if (xmin - 1e-12 <= line_x && line_x <= xmax + 1e-12) candidates.push_back(t);
    }

    QoIVector qoi{grid, std::vector<double>(grid.n, 0.0)};
    for (int i = 0; i < grid.n; ++i) {
        const double y = grid.point(i);
        bool found = false;
        double best_miss = 1e30;
        double best_value = 0.0;
        for (int t : candidates) {
            const auto& tri = mesh.triangles[t];
            const auto& p0 = mesh.vertices[tri[0]];
            const auto& p1 = mesh.vertices[tri[1]];
            const auto& p2 = mesh.vertices[tri[2]];
            const double area2 = (p1[0] - p0[0]) * (p2[1] - p0[1]) - (p2[0] - p0[0]) * (p1[1] - p0[1]);
            const double l0 = ((p1[0] - line_x) * (p2[1] - y) - (p2[0] - line_x) * (p1[1] - y)) / area2;
            const double l1 = ((p2[0] - line_x) * (p0[1] - y) - (p0[0] - line_x) * (p2[1] - y)) / area2;
            const double l2 = 1.0 - l0 - l1;
            const double miss = -std::min({l0, l1, l2});
            if (miss < best_miss) {
                best_miss = miss;
                best_value = l0 * nodal[tri[0]] + l1 * nodal[tri[1]] + l2 * nodal[tri[2]];
            }
            if (miss <= 1e-9) {
                qoi.values[i] = best_value;
                found = true;
                break;
            }
        }
        if (!found) {
            if (best_miss > 1e-6) throw NumericalError("extract_line_qoi: point outside mesh");
            qoi.values[i] = best_value;  // on an edge up to roundoff
        }
    }
    return qoi;
}

void dump_operator(const DiscreteOperator& op, std::ostream& out) {
    out << std::setprecision(17);
    out << "wavemc-operator " << op.size() << ' ' << op.stiffness.nnz() << '\n';
    for (int i = 0; i < op.size(); ++i) out << "m " << i << ' ' << op.mass_diag[i] << '\n';
    for (int i = 0; i < op.size(); ++i) out << "p " << i << ' ' << int(op.selector[i]) << '\n';
    const auto& rp = op.stiffness.row_ptr();
    const auto& ci = op.stiffness.col_idx();
    const auto& vals = op.stiffness.values();
    for (int r = 0; r < op.size(); ++r)
        for (int k = rp[r]; k < rp[r + 1]; ++k)
            out << "k " << r << ' ' << ci[k] << ' ' << vals[k] << '\n';
}

}  // namespace wavemc
