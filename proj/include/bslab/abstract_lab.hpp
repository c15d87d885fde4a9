#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "bslab/numerics.hpp"

namespace bslab {

// H0 (n x n, Hermitian), A and B (m x n). V = B^* A.
struct FactorizedSystem {
    CMatrix H0, A, B;
    CMatrix G0; // |H0| + 1
    CMatrix V;
    CMatrix HV;
    RVector h;  // eigenvalues of H0
    CMatrix U;  // eigenvectors of H0
    std::uint64_t seed = 0;

    Eigen::Index n() const { return H0.rows(); }
    Eigen::Index m() const { return A.rows(); }
};

// Validates shapes and hermiticity, fills the caches. HV comes from the
// pseudo-Friedrichs formula.
FactorizedSystem make_system(CMatrix H0, CMatrix A, CMatrix B, std::uint64_t seed = 0);

// H0 diagonal with entries uniform in [-spread, spread]; A, B complex
// Gaussian times scale / sqrt(n).
FactorizedSystem random_system(int n, int m, std::uint64_t seed, double scale = 1.0,
                               double spread = 4.0);

// G_delta = |H0| + 1 + delta. Any delta > -1 gives the same operator.
CMatrix bs_operator(const FactorizedSystem& sys, cplx lambda, double delta = 0.0);
CMatrix adjoint_bs(const FactorizedSystem& sys, cplx lambda);

// lambda_0 = i eta used to certify -1 not in sigma(K(lambda_0)).
double assumption_eta(const FactorizedSystem& sys);
CMatrix pseudo_friedrichs(const FactorizedSystem& sys);

enum class ResolventForm { generalised, kato };
double second_resolvent_residual(const FactorizedSystem& sys, cplx z,
                                 ResolventForm form = ResolventForm::generalised);

struct PrincipleCheckReport {
    enum class Direction { forward, backward };
    cplx lambda;
    Direction direction;
    double residual;
    CVector psi;
    CVector g;
};

PrincipleCheckReport principle_forward(const FactorizedSystem& sys, cplx lambda, const CVector& psi);
PrincipleCheckReport principle_backward(const FactorizedSystem& sys, cplx lambda, const CVector& g);

struct CorrespondenceReport {
    std::vector<cplx> eigenvalues; // of HV, away from sigma(H0)
    std::vector<cplx> roots;       // of det(I + K), from the scan
    std::vector<cplx> unmatched_eigenvalues;
    std::vector<cplx> unmatched_roots;
    double worst_forward_gap = 0.0; // max over eigenvalues of min |mu + 1|
    std::vector<std::string> multiplicity_log;
    bool ok = true;
};

struct CorrespondenceOptions {
    int grid = 48;
    double pad = 0.2;
    double match_tol = 1e-6;
    double embed_tol = 1e-6;
};

CorrespondenceReport spectrum_correspondence(const FactorizedSystem& sys,
                                             const CorrespondenceOptions& opt = {});

// min over sigma(K(lambda)) of |mu + 1|
double distance_to_minus_one(const CMatrix& k);

struct LemmaReport {
    // (i)
    bool i_holds = false;
    double i_eta = 0.0;
    double i_norm = 0.0;
    std::vector<std::pair<double, double>> i_sweep; // (eta, ||K(i eta)||)
    // (ii)
    bool ii_holds = false;
    double ii_delta = 0.0;
    double ii_norm = 0.0;
    // (iii): same number through the adjoint product
    bool iii_holds = false;
    double iii_norm = 0.0;
    // (iv)
    bool iv_holds = false;
    double iv_a = 0.0;
    double iv_b = 0.0;
    // (iv) => (ii) at delta = b / a, (ii) => -1 not in sigma(K(i eta))
    bool iv_implies_ii = true;
    bool ii_implies_assumption = true;
    bool assumption_certified = false;
};

LemmaReport lemma1_conditions(const FactorizedSystem& sys);

// Does max(||A psi||^2, ||B psi||^2) <= a || |H0|^{1/2} psi ||^2 + b ||psi||^2 hold?
bool lemma_iv_holds(const FactorizedSystem& sys, double a, double b);

// sup over samples of |Im z| ||A (H0 - z)^{-1}||^2
double kato_smoothness_sup(const FactorizedSystem& sys, std::span<const cplx> z_samples);

struct ZGrid {
    double re_min = -1.0, re_max = 1.0;
    double im_min = -1.0, im_max = 1.0;
    int nx = 40, ny = 40;
    std::vector<double> ring_radii;
    int ring_points = 64;
};

std::vector<cplx> zgrid_points(const ZGrid& g);

enum class StabilityClass { stable, bounded, unbounded };
std::string to_string(StabilityClass c);

struct StabilityReport {
    double sup_norm = 0.0;
    cplx argmax;
    bool refinement_needed = false;
    StabilityClass verdict = StabilityClass::unbounded;
    double hausdorff = 0.0;      // between sigma(H0) and sigma(HV)
    double inclusion_gap = 0.0;  // max over sigma(H0) of dist to sigma(HV)
    bool spectra_equal = false;  // checked when stable
    bool inclusion_ok = false;   // checked when bounded
    std::size_t samples = 0;
};

StabilityReport stability_scan(const FactorizedSystem& sys, const ZGrid& grid);

// Per-system run of every identity above; used by the batch runner.
struct SystemCheck {
    std::uint64_t seed = 0;
    int n = 0, m = 0;
    bool correspondence_ok = true;
    double worst_forward = 0.0;
    double worst_backward = 0.0;
    double worst_round_trip = 0.0;
    double friedrichs_rel = 0.0;
    double resolvent_scaled = 0.0; // residual / allowed scale, both forms
    double kato_form_gap = 0.0;
    double delta_shift = 0.0;
    double min_k_norm_at_eigs = 1e300;
    double adjoint_gap = 0.0;
    bool residual_probe_ok = true;
    std::vector<std::string> failures;
    bool ok() const { return failures.empty(); }
};

SystemCheck check_system(const FactorizedSystem& sys);

} // namespace bslab
