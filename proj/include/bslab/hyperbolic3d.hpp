#pragma once

#include <string>
#include <vector>

#include "bslab/certificate.hpp"
#include "bslab/hunt.hpp"
#include "bslab/numerics.hpp"

namespace bslab {

// Potential on H^3 depending on the geodesic distance rho to a base point.
class HyperbolicPotential {
public:
    enum class Family { zero, inverse_square, sech2, bump, tabulated };

    static HyperbolicPotential zero();
    // (c0 / 4) rho^{-2} on [rho0, rho1]
    static HyperbolicPotential inverse_square(double c0, double rho0, double rho1);
    // gamma sech^2(rho / scale); needs scale < 1 for a finite tail
    static HyperbolicPotential sech2(cplx gamma, double scale = 0.5);
    // amplitude exp(1 - 1/(1 - (rho/R)^2)) on [0, R)
    static HyperbolicPotential bump(cplx amplitude, double radius = 2.0);
    // linear interpolation of (rho, V) samples, zero outside
    static HyperbolicPotential tabulated(std::vector<double> rho, std::vector<cplx> v);
    static HyperbolicPotential from_csv(const std::string& path);

    Family family() const { return family_; }
    std::string name() const;
    cplx amplitude() const { return c_; }
    HyperbolicPotential scaled(cplx factor) const;

    cplx operator()(double rho) const;
    double abs(double rho) const { return std::abs((*this)(rho)); }
    double linf_norm() const { return linf_; }
    Interval support() const { return support_; }
    bool log_spaced() const { return family_ == Family::inverse_square; }
    // int |V| sinh^2(rho) d rho over [0, inf) and over [R, inf)
    double weighted_l1() const { return wl1_; }
    double weighted_tail(double R) const;

private:
    Family family_ = Family::zero;
    cplx c_{0.0};
    double p_ = 1.0, q_ = 1.0;
    std::vector<double> tx_;
    std::vector<cplx> tv_;
    double linf_ = 0.0, wl1_ = 0.0;
    Interval support_{0.0, 0.0};
    void finish();
};

// e^{-sqrt(-(z-1)) rho} / (4 pi sinh rho); DomainError on (1, inf)
cplx green_h3(cplx z, double rho);

struct HGrid {
    int order = 8;
    double panel_len = 0.25;
    double ratio = 1.25; // geometric panels for singular profiles
    double R = 0.0;      // 0: from the potential
};

QuadratureGrid make_h3_grid(const HyperbolicPotential& v, const HGrid& g);

// sqrt(w_i) |V_i|^{1/2} g_z(rho_i, rho_j) sgn V_j |V_j|^{1/2} sqrt(w_j) with
// g_z = sinh(k rho<) e^{-k rho>} / k, k = sqrt(1 - z).
CMatrix assemble_k_h3(const HyperbolicPotential& v, const HGrid& g, cplx z);

struct SubordinationCertificate {
    EnclosureCertificate spectral;  // largest eigenvalue at z = 1 - eps^2
    EnclosureCertificate pointwise; // sup 4 rho^2 |V(rho)|
};

constexpr double h3_edge_eps = 1e-4;

SubordinationCertificate subordination_certificate(const HyperbolicPotential& v, const HGrid& g = {});

// amplitude rescaled so the spectral constant equals target
HyperbolicPotential scale_to_subordination(const HyperbolicPotential& v, double target, const HGrid& g = {});

struct H3ZGrid {
    double lambda_max = 10.0; // rectangle around [1, lambda_max]
    int n_re = 40;
    std::vector<double> heights{1e-3, 1e-2, 0.1, 0.5, 1.0, 2.0};
    int n_rays = 24;
    int ray_points = 20;
    double ray_max = 1e2;
    double ring_radius = 1e3;
    int ring_points = 64;
};

std::vector<cplx> h3_zgrid_points(const H3ZGrid& g);

struct H3StabilityReport {
    double c = 0.0;          // spectral subordination constant
    double edge_norm = 0.0;  // ||K(1 - eps^2)||
    double sup_norm = 0.0;
    cplx argmax;
    std::size_t samples = 0;
    std::vector<cplx> z;       // sampled points, edge point first
    std::vector<double> norms; // ||K(z)|| at each
    double dominance_gap = 0.0; // max(||K(z)|| - edge_norm)
    std::vector<cplx> exceedances; // ||K(z)|| > c + 1e-3
    bool refinement_needed = false;
    bool ok = false;
    std::string note;
};

H3StabilityReport stability_scan_h3(const HyperbolicPotential& v, const H3ZGrid& z, const HGrid& g = {});

SpectralReport eigenvalue_hunt_h3(const HyperbolicPotential& v, const HGrid& g, const Rect& search,
                                  HuntOptions opt = {});

// -u'' + u + V u on (0, R) with Dirichlet ends, n intervals
std::vector<cplx> fd_eigenvalues_h3(const HyperbolicPotential& v, double R, int n);
SpectralReport fd_oracle_h3(const HyperbolicPotential& v, double R, int n, FdFilter f = {});

} // namespace bslab
