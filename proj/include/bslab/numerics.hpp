#pragma once

#include <complex>
#include <functional>
#include <span>
#include <vector>

#include <Eigen/Dense>

namespace bslab {

using cplx = std::complex<double>;
using CMatrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;
using RVector = Eigen::VectorXd;

// sqrt(-z) on the principal branch (Re >= 0). Every kernel goes through this.
cplx principal_sqrt_minus(cplx z);

// distance from z to the half-line [start, +inf)
double dist_to_cut(cplx z, double start = 0.0);

bool is_finite(const CMatrix& m);
bool is_hermitian(const CMatrix& m, double rel_tol = 1e-12);

struct HermitianEig {
    RVector values; // ascending
    CMatrix vectors;
};

// Throws UsageError on non-Hermitian input.
HermitianEig hermitian_eig(const CMatrix& m);

struct GeneralEig {
    CVector values;
    CMatrix right;    // columns, unit norm
    RVector residual; // ||M x - lambda x|| for each column
};

// Certified: each residual <= 1e-8 ||M|| (SVD fallback per eigenvalue),
// otherwise NumericalFailure.
CVector general_eig(const CMatrix& m);
GeneralEig general_eig_vectors(const CMatrix& m);

// Eigenvalues only, no certificate. Used by coarse scans.
CVector eigenvalues_fast(const CMatrix& m);

double operator_norm(const CMatrix& m);
double smallest_singular_value(const CMatrix& m);

// Spectral calculus on a Hermitian PSD matrix.
CMatrix psd_power(const CMatrix& m, double p);

// Eigenvalue of M closest to `shift`, with right and left vectors,
// by inverse iteration on one LU factorisation.
struct NearestEig {
    cplx value;
    CVector right;
    CVector left;
    double residual; // ||M x - mu x|| with ||x|| = 1
    bool converged;
};
NearestEig nearest_eigenvalue(const CMatrix& m, cplx shift, int max_iter = 60);

// Eigenvalues of the complex-symmetric tridiagonal matrix with diagonal d
// and off-diagonal e (size n-1). Implicit QL, O(n^2).
std::vector<cplx> tridiag_symmetric_eigenvalues(std::vector<cplx> d, std::vector<cplx> e);

// ---- quadrature --------------------------------------------------------

struct Interval {
    double a = 0.0;
    double b = 0.0;
    double length() const { return b - a; }
};

// Gauss–Legendre rule of the given order on [-1, 1].
void gauss_legendre_rule(int order, std::vector<double>& x, std::vector<double>& w);

struct QuadratureGrid {
    Interval domain;
    std::vector<double> nodes;
    std::vector<double> weights;
    std::vector<double> edges; // panel boundaries, size panels + 1
    int order = 0;             // nodes per panel

    std::size_t size() const { return nodes.size(); }
    int panels() const { return static_cast<int>(edges.size()) - 1; }
    int panel_of(std::size_t node) const { return static_cast<int>(node) / order; }
};

// Composite rule with N nodes over uniform panels. Panel order is the
// largest divisor of N in [2, 8]; with none, one panel of order N.
QuadratureGrid gauss_legendre(Interval domain, int n);

// Same, with panel edges forced onto `breaks` (interior points of the
// domain). Panels are shared out between the pieces by length.
QuadratureGrid gauss_legendre(Interval domain, int n, std::span<const double> breaks);

// Panels given explicitly.
QuadratureGrid gauss_legendre_panels(std::span<const double> edges, int order);

// ---- Nyström -----------------------------------------------------------

using Kernel = std::function<cplx(double x, double y)>;

enum class NystromRule {
    point,   // K_ij = k(x_i, x_j) w_j
    product, // kernel integrated against the panel interpolant near the diagonal
};

// Symmetrically weighted matrix sqrt(w_i) left_i k(x_i,x_j) right_j sqrt(w_j)
// restricted to the listed nodes. `decay` is a rough inverse length scale of
// the kernel, used to refine the product sub-rules.
CMatrix nystrom_matrix(const QuadratureGrid& grid, std::span<const int> nodes,
                       std::span<const cplx> left, std::span<const cplx> right, const Kernel& k,
                       NystromRule rule, double decay = 1.0);

} // namespace bslab
