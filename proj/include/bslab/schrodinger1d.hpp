#pragma once

#include "bslab/certificate.hpp"
#include "bslab/hunt.hpp"
#include "bslab/numerics.hpp"
#include "bslab/potential1d.hpp"

namespace bslab {

// e^{-sqrt(-z)|x-y|} / (2 sqrt(-z)); DomainError on [0, inf)
cplx green1d(cplx z, double x, double y);

struct Grid1D {
    double L = 40.0;
    int n = 1600;
    NystromRule rule = NystromRule::product;
};

// Composite Gauss–Legendre on [-L, L] with panel edges on the jumps of V.
QuadratureGrid make_grid(const Potential1D& v, const Grid1D& g);

// Throws DomainError when the tail of |V| beyond L exceeds 1e-10 ||V||_1.
void check_truncation(const Potential1D& v, double L);

// sqrt(w_i) A(x_i) G_z(x_i, x_j) conj(B)(x_j) sqrt(w_j), N x N
CMatrix assemble_k(const Potential1D& v, const Grid1D& g, cplx z);

struct HsCheck {
    double hs = 0.0;
    double bound = 0.0;
    bool ok = false;
};

// Frobenius norm of the point-rule matrix against ||V||_1 / (2 sqrt|z|).
HsCheck hs_bound_check(const Potential1D& v, cplx z, const Grid1D& g);

// radius ||V||_1^2 / 4; verdict filled by davies_containment
EnclosureCertificate davies_disk(const Potential1D& v);
// computed = max |lambda|, threshold = radius (1 + 1e-3)
EnclosureCertificate davies_containment(const Potential1D& v, const std::vector<EigenEntry>& eigs);

SpectralReport find_eigenvalues_bs(const Potential1D& v, const Grid1D& g, const Rect& search,
                                   HuntOptions opt = {});

struct FdOptions {
    double h_tol = 1e-4;    // |lambda_N - lambda_2N|
    double l_factor = 1.5;  // second box size
    double l_tol = 1e-4;    // |lambda(L) - lambda(l_factor L)| at equal h
    double cut_margin = 1e-3;
    double norm_margin = -1.0; // accept |lambda| <= ||V||_inf + margin; < 0 picks 0.1 ||V||_inf + 0.1
};

// Central differences with Dirichlet walls on [-L, L], N_fd intervals.
// Reported value is the Richardson combination (4 lambda_2N - lambda_N) / 3.
SpectralReport fd_oracle(const Potential1D& v, double L, int n_fd, const FdOptions& opt = {});

// Raw eigenvalues of the FD matrix; exposed for tests.
std::vector<cplx> fd_eigenvalues(const Potential1D& v, double L, int n_fd);

} // namespace bslab
