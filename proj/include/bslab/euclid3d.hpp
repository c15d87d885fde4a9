#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "bslab/certificate.hpp"
#include "bslab/numerics.hpp"

namespace bslab {

// Radial potential on R^3.
class RadialPotential {
public:
    enum class Family { zero, exponential, gaussian, inverse_square, step };

    static RadialPotential zero();
    // gamma e^{-r / scale}
    static RadialPotential exponential(cplx gamma, double scale = 1.0);
    // gamma e^{-r^2 / width^2}
    static RadialPotential gaussian(cplx gamma, double width = 1.0);
    // (c0 / 4) r^{-2} on [r0, r1], zero elsewhere
    static RadialPotential inverse_square(double c0, double r0, double r1 = 1.0);
    // gamma on [0, radius)
    static RadialPotential step(cplx gamma, double radius = 1.0);

    Family family() const { return family_; }
    std::string name() const;
    cplx amplitude() const { return c_; }

    cplx operator()(double r) const;
    double abs(double r) const { return std::abs((*this)(r)); }
    RadialPotential scaled(double factor) const;

    // [lo, hi] outside of which |V| r^2 is below 1e-16 of its size
    Interval support() const;
    // panels spaced geometrically (singular profiles)
    bool log_spaced() const { return family_ == Family::inverse_square; }

    // (int |V|^p d^3x)^{1/p}
    double lp_norm(double p) const;
    double l32_norm() const { return l32_; }
    double l3_norm() const { return l3_; }
    // int |V| r^2 dr
    double l1_r2() const { return l1r2_; }

private:
    Family family_ = Family::zero;
    cplx c_{0.0};
    double p_ = 1.0, q_ = 1.0;
    double l32_ = 0.0, l3_ = 0.0, l1r2_ = 0.0;
    void finish();
};

// s-wave kernel sinh(k r<) e^{-k r>} / k, k = sqrt(-z); z = 0 gives min(r, r')
cplx green3d(cplx z, double r, double rp);
// e^{-k d} / (4 pi d)
cplx green3d_full(cplx z, double d);

struct RadialGrid {
    int order = 8;
    double panel_len = 1.0; // uniform panels
    double ratio = 1.25;    // geometric panels
    double r_max = 0.0;     // 0: from the potential
};

QuadratureGrid make_radial_grid(const RadialPotential& v, const RadialGrid& g);

// Symmetrised Nystrom matrix of |V|^{1/2} min(r, r') |V|^{1/2} on L^2(dr).
CMatrix radial_l_matrix(const RadialPotential& v, const RadialGrid& g);

EnclosureCertificate kato_L_norm(const RadialPotential& v, const RadialGrid& g = {});
EnclosureCertificate fkv_subordination(const RadialPotential& v, const RadialGrid& g = {});
// sqrt of 8 pi^2 int int |V||V'| r r' ln|(r+r')/(r-r')| dr dr', threshold 4 pi
EnclosureCertificate rollnik_norm(const RadialPotential& v);

constexpr double frank_threshold() { return 12.820992204969127; } // 3^{3/2} pi^2 / 4
EnclosureCertificate frank_condition(const RadialPotential& v);

struct ImplicationReport {
    EnclosureCertificate frank, rollnik, fkv, kato;
    std::vector<std::string> violations;
    bool ok() const { return violations.empty(); }
};

// frank => rollnik => fkv <=> kato on the verdicts
ImplicationReport implication_chain(const RadialPotential& v, const RadialGrid& g = {});

struct GammaSweep {
    std::vector<double> gammas;
    std::vector<ImplicationReport> rows;
    // verdict boundaries: threshold / value at unit amplitude
    double gamma_frank = 0.0, gamma_rollnik = 0.0, gamma_fkv = 0.0, gamma_kato = 0.0;
    bool boundaries_ordered = false; // frank <= rollnik <= fkv = kato
    std::vector<std::string> violations;
};

GammaSweep gamma_sweep(const RadialPotential& unit, const std::vector<double>& gammas,
                       const RadialGrid& g = {});

struct MonteCarloEstimate {
    double value = 0.0;     // Rollnik norm
    double std_error = 0.0; // of the norm
    std::uint64_t samples = 0;
    std::uint64_t seed = 0;
};

// 6D Monte-Carlo of the Rollnik double integral: x from |V|, y - x from
// the density 1/(4 pi |w|^2 (1+|w|)^2).
MonteCarloEstimate rollnik_monte_carlo(const RadialPotential& v, std::uint64_t samples,
                                       std::uint64_t seed);

struct HardyExtrapolation {
    double c0 = 0.0;
    std::vector<double> cutoffs;
    std::vector<double> values; // fkv constant per cutoff
    double limit = 0.0;         // c_inf of c_inf / (1 + a / (T + b)^2), T = ln(r1 / r0)
    double a = 0.0, b = 0.0;
};

HardyExtrapolation hardy_extrapolation(double c0, const std::vector<double>& cutoffs = {1e-2, 1e-3, 1e-4},
                                       const RadialGrid& g = {});

} // namespace bslab
