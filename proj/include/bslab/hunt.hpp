#pragma once

#include <cmath>
#include <functional>

#include "bslab/certificate.hpp"
#include "bslab/numerics.hpp"

namespace bslab {

struct Rect {
    double re_min = -1.0, re_max = 1.0;
    double im_min = -1.0, im_max = 1.0;
    bool contains(cplx z) const
    {
        return z.real() >= re_min && z.real() <= re_max && z.imag() >= im_min && z.imag() <= im_max;
    }
};

// K(z) at three resolutions: 0 coarse scan, 1 working grid N, 2 check grid 2N.
using KFamily = std::function<CMatrix(cplx z, int level)>;

struct HuntOptions {
    int scan_nx = 32;
    int scan_ny = 32;
    double cut_start = 0.0;   // continuous spectrum [cut_start, inf)
    double cut_margin = 1e-3; // excluded band around it
    double tol = 1e-6;        // |mu + 1| acceptance
    double verify_tol = 1e-4; // N vs 2N agreement
    int max_newton = 40;
};

struct HuntResult {
    std::vector<EigenEntry> roots;
    std::vector<Candidate> rejected;
};

// Points where -1 is an eigenvalue of K, by coarse scan of min |mu + 1| and
// Newton on the eigenvalue of K nearest -1.
HuntResult hunt_roots(const KFamily& family, const Rect& search, const HuntOptions& opt);

// Finite-difference eigenvalues for box size `extent` and `n` intervals.
using FdSolver = std::function<std::vector<cplx>(double extent, int n)>;

struct FdFilter {
    double h_tol = 1e-4;      // |lambda_N - lambda_2N|
    double l_factor = 1.5;    // second box size
    double l_tol = 1e-4;      // |lambda(L) - lambda(l_factor L)| at equal h
    double cut_start = 0.0;
    double cut_margin = 1e-3;
    double radius = INFINITY; // keep |lambda - cut_start| <= radius
};

// Keeps eigenvalues stable under h -> h/2 and L -> l_factor L; reports the
// Richardson value (4 lambda_2N - lambda_N) / 3.
HuntResult fd_filter(const FdSolver& solve, double extent, int n, const FdFilter& f);

} // namespace bslab
