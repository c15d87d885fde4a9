#pragma once

#include <array>
#include <string>
#include <vector>

#include "bslab/numerics.hpp"

namespace bslab {

struct PolarDecomposition {
    CMatrix U;    // partial isometry, zero on ker |V|
    CMatrix absV; // (V^* V)^{1/2}
};

// V = U |V| from the SVD of V; singular values below 16 n eps ||V|| count as zero.
PolarDecomposition matrix_polar(const CMatrix& V);

struct MatrixPotentialSample {
    std::array<double, 3> site{}; // (r, 0, 0) for radial samples
    bool radial = false;
    CMatrix V;
    CMatrix U;
    CMatrix absV;
    double v = 0.0; // ||V||
};

MatrixPotentialSample make_sample(std::array<double, 3> site, const CMatrix& V, bool radial = false);

// Rows: r + 32 reals, or x y z + 32 reals; entries row-major as (re, im).
std::vector<MatrixPotentialSample> read_matrix_samples(const std::string& path);

struct ProfileNorms {
    double l3 = 0.0;
    double l32 = 0.0;
};

// ||v||_{L^p(R^3)} of a radial profile, trapezoid in r with weight 4 pi r^2.
ProfileNorms radial_profile_norms(const std::vector<MatrixPotentialSample>& samples);

struct DiracConstants {
    double C1;
    double C2;
};

// C1 = (pi/2)^{1/3} sqrt(1 + e^{-1} + 2 e^{-2}), C2 = 2^{17/6} / (3 pi^{2/3})
DiracConstants dirac_constants();

struct EnclosureRegion {
    double norm3 = 0.0;
    double norm32 = 0.0;
    double C1 = 0.0;
    double C2 = 0.0;
    // lambda with |Re lambda| < half_width has no eigenvalue
    double half_width = 0.0;
    bool all_plane = false; // v = 0
    bool empty = false;     // C1 ||v||_3 >= 1
    bool excludes(cplx lambda) const
    {
        return all_plane || (!empty && std::abs(lambda.real()) < half_width);
    }
};

EnclosureRegion enclosure_region(double norm3, double norm32);

constexpr double kato_l3_threshold() { return 2.702567690063490189; } // (2 pi^2)^{1/3}
bool kato_sufficiency_check(double norm3_v1);

} // namespace bslab
