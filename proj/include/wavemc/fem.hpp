/// P1 finite elements with mass lumping on interval meshes and triangulations,
/// operator normalization, CFL estimation, initial-data projection and
/// quantity-of-interest extraction.
#pragma once

#include <functional>
#include <iosfwd>
#include <span>
#include <vector>

#include "wavemc/mesh.hpp"
#include "wavemc/sparse.hpp"

namespace wavemc {

/// Fixed uniform output grid shared by all levels of one experiment.
struct OutputGrid {
    double lo = 0.0;
    double hi = 1.0;
    int n = 2;

    double spacing() const { return (hi - lo) / (n - 1); }
    double point(int i) const { return i == n - 1 ? hi : lo + spacing() * i; }
    /// trapezoid weights for the discrete L2 norm
    double weight(int i) const { return (i == 0 || i == n - 1) ? 0.5 * spacing() : spacing(); }
    bool operator==(const OutputGrid&) const = default;
};

struct QoIVector {
    OutputGrid grid;
    std::vector<double> values;

    double norm() const;
    QoIVector& operator+=(const QoIVector& other);
    QoIVector& operator-=(const QoIVector& other);
    QoIVector& operator*=(double factor);
};

QoIVector operator-(QoIVector a, const QoIVector& b);
QoIVector operator+(QoIVector a, const QoIVector& b);
QoIVector operator*(QoIVector a, double factor);

/// Lumped mass M, stiffness K, normalized A = M^{-1/2} K M^{-1/2} and the
/// 0/1 selector P marking DOFs of fine-flagged elements. a_fine and a_coarse
/// hold the column-masked products A P and A (I - P).
struct DiscreteOperator {
    std::vector<double> mass_diag;
    CsrMatrix stiffness;
    CsrMatrix normalized;
    std::vector<std::uint8_t> selector;
    CsrMatrix a_fine;
    CsrMatrix a_coarse;
    long n_fine = 0;
    long n_coarse = 0;

    int size() const { return static_cast<int>(mass_diag.size()); }
};

/// Assemble from explicit pieces (used by tests and synthetic problems).
DiscreteOperator make_operator(std::vector<double> mass_diag, CsrMatrix stiffness,
                               std::vector<std::uint8_t> selector);

DiscreteOperator assemble(const Mesh1D& mesh, const std::function<double(double)>& speed2);
DiscreteOperator assemble(const TriMesh& mesh, const std::function<double(double, double)>& speed2);
DiscreteOperator assemble(const TriMesh& mesh, double uniform_speed2 = 1.0);

/// A_ij = K_ij / sqrt(M_ii M_jj)
CsrMatrix normalize(const std::vector<double>& mass_diag, const CsrMatrix& stiffness);

struct PowerIterationResult {
    double lambda = 0.0;
    std::vector<double> eigenvector;
    int iterations = 0;
};

using ApplyFn = std::function<void(std::span<const double>, std::span<double>)>;

/// Largest eigenvalue of a symmetric positive semidefinite operator by power
/// iteration. Throws NumericalError if the relative increment has not settled
/// below tol within max_iter iterations.
PowerIterationResult max_eigenvalue(const ApplyFn& apply, int n, double tol = 1e-6,
                                    int max_iter = 20000,
                                    const std::vector<double>* warm_start = nullptr);
PowerIterationResult max_eigenvalue(const CsrMatrix& a, double tol = 1e-6, int max_iter = 20000,
                                    const std::vector<double>* warm_start = nullptr);
/// Largest eigenvalue of (I-P) A (I-P), the part advanced with the global step.
PowerIterationResult coarse_max_eigenvalue(const DiscreteOperator& op, double tol = 1e-6,
                                           int max_iter = 20000,
                                           const std::vector<double>* warm_start = nullptr);

/// Leapfrog stability bound dt = safety * 2 / sqrt(lambda_max).
double cfl_dt(double lambda_max, double safety);

struct InitialData {
    std::vector<double> z0;        // M^{1/2} u0 coefficients
    std::vector<double> mhalf_v0;  // M^{1/2} v0 coefficients
};

InitialData project_initial(const Mesh1D& mesh, const std::function<double(double)>& u0,
                            const std::function<double(double)>& v0, const DiscreteOperator& op);
InitialData project_initial(const TriMesh& mesh,
                            const std::function<double(double, double)>& u0,
                            const std::function<double(double, double)>& v0,
                            const DiscreteOperator& op);

/// u = M^{-1/2} z
std::vector<double> nodal_values(const DiscreteOperator& op, std::span<const double> z);

/// P1 interpolation of nodal values at the output-grid points.
QoIVector restrict_to_grid(const Mesh1D& mesh, std::span<const double> nodal, const OutputGrid& grid);

/// P1 interpolation along the vertical line x = line_x.
QoIVector extract_line_qoi(const TriMesh& mesh, std::span<const double> nodal, double line_x,
                           const OutputGrid& grid);

/// Sparse triplet text dump for debugging:
///   wavemc-operator <n> <nnz>
///   m <i> <M_ii>       (n lines)
///   p <i> <0|1>        (n lines)
///   k <i> <j> <K_ij>   (nnz lines)
void dump_operator(const DiscreteOperator& op, std::ostream& out);

}  // namespace wavemc
