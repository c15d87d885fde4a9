#include "bslab/abstract_lab.hpp"

#include <algorithm>
#include <cmath>
#include <optional>
#include <sstream>

#include "bslab/errors.hpp"
#include "bslab/rng.hpp"

namespace bslab {

namespace {

double h0_norm(const FactorizedSystem& s)
{
    return s.h.size() ? s.h.cwiseAbs().maxCoeff() : 0.0;
}

double dist_to_h0(const FactorizedSystem& s, cplx z)
{
    double d = std::numeric_limits<double>::infinity();
    for (Eigen::Index i = 0; i < s.h.size(); ++i) d = std::min(d, std::abs(cplx(s.h(i), 0.0) - z));
    return d;
}

void require_resolvent(const FactorizedSystem& s, cplx z)
{
    const double tol = 1e-10 * std::max(h0_norm(s), 1e-300);
    if (!(dist_to_h0(s, z) > tol)) throw DomainError("point too close to the spectrum of H0");
}

// f(H0) for a diagonal function given on the eigenvalues
template <class F>
CMatrix h0_function(const FactorizedSystem& s, F f)
{
    CVector d(s.h.size());
    for (Eigen::Index i = 0; i < d.size(); ++i) d(i) = f(s.h(i));
    return s.U * d.asDiagonal() * s.U.adjoint();
}

CMatrix g_power(const FactorizedSystem& s, double shift, double p)
{
    return h0_function(s, [&](double x) { return cplx(std::pow(std::abs(x) + shift, p), 0.0); });
}

double spread_norm(const CMatrix& m)
{
    return m.size() ? m.cwiseAbs().maxCoeff() : 0.0;
}

} // namespace

FactorizedSystem make_system(CMatrix H0, CMatrix A, CMatrix B, std::uint64_t seed)
{
    if (H0.rows() != H0.cols() || H0.rows() == 0) throw UsageError("H0 must be square and nonempty");
    if (A.cols() != H0.rows() || B.cols() != H0.rows() || A.rows() != B.rows())
        throw UsageError("A and B must both be m x n");
    if (!is_finite(H0) || !is_finite(A) || !is_finite(B)) throw UsageError("non-finite entries");
    if (!is_hermitian(H0)) throw UsageError("H0 is not Hermitian");
    FactorizedSystem s;
    s.H0 = std::move(H0);
    s.A = std::move(A);
    s.B = std::move(B);
    s.seed = seed;
    const HermitianEig e = hermitian_eig(s.H0);
    s.h = e.values;
    s.U = e.vectors;
    s.G0 = g_power(s, 1.0, 1.0);
    s.V = s.B.adjoint() * s.A;
    s.HV = pseudo_friedrichs(s);
    return s;
}

FactorizedSystem random_system(int n, int m, std::uint64_t seed, double scale, double spread)
{
    if (n < 1 || m < 1) throw UsageError("random_system: dimensions must be positive");
    Rng rng(seed);
    CMatrix H0 = CMatrix::Zero(n, n);
    for (int i = 0; i < n; ++i) H0(i, i) = rng.uniform(-spread, spread);
    const double f = scale / std::sqrt(static_cast<double>(n));
    CMatrix A(m, n), B(m, n);
    for (int j = 0; j < n; ++j)
        for (int i = 0; i < m; ++i) A(i, j) = f * rng.cnormal() / std::sqrt(2.0);
    for (int j = 0; j < n; ++j)
        for (int i = 0; i < m; ++i) B(i, j) = f * rng.cnormal() / std::sqrt(2.0);
    return make_system(std::move(H0), std::move(A), std::move(B), seed);
}

CMatrix bs_operator(const FactorizedSystem& s, cplx lambda, double delta)
{
    require_resolvent(s, lambda);
    if (!(delta > -1.0)) throw UsageError("bs_operator: delta must exceed -1");
    const double c = 1.0 + delta;
    const CMatrix gm = g_power(s, c, -0.5);
    const CMatrix left = s.A * gm;
    const CMatrix mid = h0_function(s, [&](double x) { return (std::abs(x) + c) / (cplx(x, 0.0) - lambda); });
    const CMatrix right = (s.B * gm).adjoint();
    return left * mid * right;
}

CMatrix adjoint_bs(const FactorizedSystem& s, cplx lambda)
{
    const cplx lb = std::conj(lambda);
    require_resolvent(s, lb);
    const CMatrix gm = g_power(s, 1.0, -0.5);
    const CMatrix left = s.B * gm;
    const CMatrix mid = h0_function(s, [&](double x) { return (std::abs(x) + 1.0) / (cplx(x, 0.0) - lb); });
    const CMatrix right = (s.A * gm).adjoint();
    return left * mid * right;
}

double distance_to_minus_one(const CMatrix& k)
{
    if (k.size() == 0) return 1.0;
    const CVector mu = eigenvalues_fast(k);
    double d = std::numeric_limits<double>::infinity();
    for (Eigen::Index i = 0; i < mu.size(); ++i) d = std::min(d, std::abs(mu(i) + 1.0));
    return d;
}

double assumption_eta(const FactorizedSystem& s)
{
    return 10.0 * (h0_norm(s) + operator_norm(s.B.adjoint() * s.A) + 1.0);
}

CMatrix pseudo_friedrichs(const FactorizedSystem& s)
{
    const double eta = assumption_eta(s);
    if (distance_to_minus_one(bs_operator(s, cplx(0.0, eta))) <= 1e-8)
        throw AssumptionViolated("-1 lies in the spectrum of K(i eta)");
    const CMatrix gh = g_power(s, 1.0, 0.5);
    const CMatrix gmh = g_power(s, 1.0, -0.5);
    const CMatrix ginv = g_power(s, 1.0, -1.0);
    const CMatrix inner = s.H0 * ginv + (s.B * gmh).adjoint() * (s.A * gmh);
    return gh * inner * gh;
}

double second_resolvent_residual(const FactorizedSystem& s, cplx z, ResolventForm form)
{
    require_resolvent(s, z);
    const Eigen::Index n = s.n();
    const CVector hv_eigs = eigenvalues_fast(s.HV);
    const double scale = std::max(operator_norm(s.HV), 1e-300);
    for (Eigen::Index i = 0; i < hv_eigs.size(); ++i)
        if (std::abs(hv_eigs(i) - z) <= 1e-10 * scale)
            throw DomainError("point too close to the spectrum of H_V");
    const CMatrix r0 = h0_function(s, [&](double x) { return 1.0 / (cplx(x, 0.0) - z); });
    const CMatrix rv = (s.HV - z * CMatrix::Identity(n, n)).partialPivLu().inverse();
    CMatrix lead;
    if (form == ResolventForm::generalised) {
        const CMatrix r0bar = h0_function(s, [&](double x) { return 1.0 / (cplx(x, 0.0) - std::conj(z)); });
        lead = (s.B * r0bar).adjoint();
    } else {
        lead = r0 * s.B.adjoint();
    }
    const CMatrix res = rv - r0 + lead * s.A * rv;
    return operator_norm(res);
}

PrincipleCheckReport principle_forward(const FactorizedSystem& s, cplx lambda, const CVector& psi)
{
    require_resolvent(s, lambda);
    if (psi.size() != s.n()) throw UsageError("principle_forward: vector size");
    const double pn = psi.norm();
    if (!(pn > 0.0)) throw UsageError("principle_forward: zero vector");
    const double hvn = operator_norm(s.HV);
    if ((s.HV * psi - lambda * psi).norm() > 1e-8 * pn * std::max(hvn, 1e-300))
        throw UsageError("principle_forward: psi is not an eigenvector of H_V");
    PrincipleCheckReport r;
    r.lambda = lambda;
    r.direction = PrincipleCheckReport::Direction::forward;
    r.psi = psi;
    r.g = s.A * psi;
    const double gn = r.g.norm();
    if (!(gn > 1e-12 * pn * std::max(operator_norm(s.A), 1e-300)))
        throw TheoremViolation("principle_forward: A psi vanishes");
    const CMatrix k = bs_operator(s, lambda);
    r.residual = (k * r.g + r.g).norm() / gn;
    return r;
}

PrincipleCheckReport principle_backward(const FactorizedSystem& s, cplx lambda, const CVector& g)
{
    require_resolvent(s, lambda);
    if (g.size() != s.m()) throw UsageError("principle_backward: vector size");
    const double gn = g.norm();
    if (!(gn > 0.0)) throw UsageError("principle_backward: zero vector");
    const CMatrix k = bs_operator(s, lambda);
    if ((k * g + g).norm() > 1e-8 * gn) throw UsageError("principle_backward: g is not a -1 eigenvector of K");
    PrincipleCheckReport r;
    r.lambda = lambda;
    r.direction = PrincipleCheckReport::Direction::backward;
    r.g = g;
    const CMatrix gh = g_power(s, 1.0, 0.5);
    const CMatrix gmh = g_power(s, 1.0, -0.5);
    const CMatrix res = h0_function(s, [&](double x) { return 1.0 / (cplx(x, 0.0) - lambda); });
    r.psi = gh * res * (s.B * gmh).adjoint() * g;
    const double pn = r.psi.norm();
    if (!(pn > 1e-14 * gn)) throw TheoremViolation("principle_backward: psi vanishes");
    r.residual = (s.HV * r.psi - lambda * r.psi).norm() / pn;
    return r;
}

// ---- correspondence ----------------------------------------------------

namespace {

struct FastK {
    CMatrix AU; // m x n
    CMatrix UB; // n x m, U^* B^*
    RVector h;

    CMatrix at(cplx z, int power = 1) const
    {
        CVector d(h.size());
        for (Eigen::Index i = 0; i < d.size(); ++i) d(i) = std::pow(1.0 / (cplx(h(i), 0.0) - z), power);
        return AU * d.asDiagonal() * UB;
    }
};

bool near_any(const std::vector<cplx>& v, cplx z, double tol)
{
    for (const cplx& w : v)
        if (std::abs(w - z) <= tol) return true;
    return false;
}

} // namespace

CorrespondenceReport spectrum_correspondence(const FactorizedSystem& s, const CorrespondenceOptions& opt)
{
    CorrespondenceReport rep;
    const Eigen::Index m = s.m();
    const GeneralEig hv = general_eig_vectors(s.HV);
    std::vector<cplx> all_eigs;
    for (Eigen::Index i = 0; i < hv.values.size(); ++i) {
        all_eigs.push_back(hv.values(i));
        if (dist_to_h0(s, hv.values(i)) > opt.embed_tol) rep.eigenvalues.push_back(hv.values(i));
    }
    // forward: each eigenvalue makes -1 an eigenvalue of K
    for (const cplx& l : rep.eigenvalues) {
        const double d = distance_to_minus_one(bs_operator(s, l));
        rep.worst_forward_gap = std::max(rep.worst_forward_gap, d);
    }
    for (std::size_t i = 0; i < rep.eigenvalues.size(); ++i)
        for (std::size_t j = i + 1; j < rep.eigenvalues.size(); ++j)
            if (std::abs(rep.eigenvalues[i] - rep.eigenvalues[j]) <= opt.match_tol) {
                std::ostringstream os;
                os << "eigenvalue (" << rep.eigenvalues[i].real() << ", " << rep.eigenvalues[i].imag()
                   << ") is not simple";
                rep.multiplicity_log.push_back(os.str());
            }

    // converse: scan det(I + K) over a rectangle covering sigma(HV) and sigma(H0)
    double re0 = 1e300, re1 = -1e300, im0 = 1e300, im1 = -1e300;
    for (const cplx& z : all_eigs) {
        re0 = std::min(re0, z.real());
        re1 = std::max(re1, z.real());
        im0 = std::min(im0, z.imag());
        im1 = std::max(im1, z.imag());
    }
    for (Eigen::Index i = 0; i < s.h.size(); ++i) {
        re0 = std::min(re0, s.h(i));
        re1 = std::max(re1, s.h(i));
    }
    const double ext = std::max({re1 - re0, im1 - im0, 1e-3});
    const double pad = opt.pad * ext;
    re0 -= pad;
    re1 += pad;
    im0 -= pad;
    im1 += pad;

    FastK fk;
    fk.AU = s.A * s.U;
    fk.UB = s.U.adjoint() * s.B.adjoint();
    fk.h = s.h;
    const CMatrix id = CMatrix::Identity(m, m);
    const double pole_tol = 1e-12 * std::max(h0_norm(s), 1.0);

    const int nx = opt.grid, ny = opt.grid;
    std::vector<double> dgrid(nx * ny, 1e300);
    auto pt = [&](int i, int j) {
        return cplx(re0 + (re1 - re0) * i / (nx - 1), im0 + (im1 - im0) * j / (ny - 1));
    };
    for (int i = 0; i < nx; ++i)
        for (int j = 0; j < ny; ++j) {
            const cplx z = pt(i, j);
            if (dist_to_h0(s, z) <= pole_tol) continue;
            const CVector mu = eigenvalues_fast(fk.at(z));
            double d = 1e300;
            for (Eigen::Index k = 0; k < mu.size(); ++k) d = std::min(d, std::abs(mu(k) + 1.0));
            dgrid[i * ny + j] = d;
        }

    std::vector<cplx> seeds;
    for (int i = 0; i < nx; ++i)
        for (int j = 0; j < ny; ++j) {
            const double d = dgrid[i * ny + j];
            bool is_min = d < 1e300;
            for (int di = -1; di <= 1 && is_min; ++di)
                for (int dj = -1; dj <= 1; ++dj) {
                    const int a = i + di, b = j + dj;
                    if ((di || dj) && a >= 0 && a < nx && b >= 0 && b < ny && dgrid[a * ny + b] < d) {
                        is_min = false;
                        break;
                    }
                }
            if (is_min) seeds.push_back(pt(i, j));
        }

    // coarse lattice as fallback seeds
    for (int i = 0; i < 8; ++i)
        for (int j = 0; j < 8; ++j)
            seeds.emplace_back(re0 + (re1 - re0) * (i + 0.5) / 8, im0 + (im1 - im0) * (j + 0.5) / 8);

    const double step_scale = std::max(ext, 1.0);
    // Newton on log of det(I + K(z)) prod_i (h_i - z), a polynomial of degree n
    // whose roots are those of det(I + K) plus cancelled poles; roots
    // already found are divided out.
    auto newton = [&](cplx z, const std::vector<cplx>& found) -> std::optional<cplx> {
        for (int it = 0; it < 200; ++it) {
            if (dist_to_h0(s, z) <= pole_tol) z += cplx(0.0, 1e3 * pole_tol);
            const CMatrix k = fk.at(z);
            const CMatrix kp = fk.at(z, 2); // dK/dz
            Eigen::PartialPivLU<CMatrix> lu(id + k);
            cplx phi = lu.solve(kp).trace();
            for (Eigen::Index i = 0; i < s.h.size(); ++i) phi += 1.0 / (z - s.h(i));
            for (const cplx& r : found) phi -= 1.0 / (z - r);
            if (!std::isfinite(phi.real()) || !std::isfinite(phi.imag()) || phi == cplx(0.0, 0.0))
                return std::nullopt;
            cplx step = 1.0 / phi;
            if (std::abs(step) > 0.5 * step_scale) step *= 0.5 * step_scale / std::abs(step);
            z -= step;
            if (std::abs(z.real() - 0.5 * (re0 + re1)) > 4.0 * (re1 - re0) ||
                std::abs(z.imag() - 0.5 * (im0 + im1)) > 4.0 * (im1 - im0))
                return std::nullopt;
            if (std::abs(step) <= 1e-15 * step_scale) break;
        }
        return z;
    };

    const std::size_t degree = static_cast<std::size_t>(s.n());
    std::vector<cplx> found;
    for (const cplx& seed : seeds) {
        if (found.size() >= degree) break;
        for (int attempt = 0; attempt < 4 && found.size() < degree; ++attempt) {
            const auto r = newton(seed, found);
            if (!r) break;
            found.push_back(*r);
        }
    }
    // keep roots off sigma(H0) where -1 is an eigenvalue of K
    for (const cplx& r : found) {
        if (dist_to_h0(s, r) <= opt.embed_tol) continue;
        if (near_any(rep.roots, r, opt.match_tol)) continue;
        if (distance_to_minus_one(fk.at(r)) > opt.match_tol) continue;
        rep.roots.push_back(r);
    }

    for (const cplx& l : rep.eigenvalues)
        if (!near_any(rep.roots, l, opt.match_tol)) rep.unmatched_eigenvalues.push_back(l);
    for (const cplx& r : rep.roots)
        if (!near_any(rep.eigenvalues, r, opt.match_tol)) rep.unmatched_roots.push_back(r);
    rep.ok = rep.unmatched_eigenvalues.empty() && rep.unmatched_roots.empty() &&
             rep.worst_forward_gap <= opt.match_tol;
    return rep;
}

// ---- Lemma conditions --------------------------------------------------

namespace {

double product_norm(const FactorizedSystem& s, double delta, bool adjoint_side)
{
    const CMatrix gm = g_power(s, delta, -0.5);
    const CMatrix a = s.A * gm, b = s.B * gm;
    return adjoint_side ? operator_norm(a.adjoint() * b) : operator_norm(b.adjoint() * a);
}

double lemma_iv_b(const FactorizedSystem& s, double a)
{
    const CMatrix absh = h0_function(s, [](double x) { return cplx(std::abs(x), 0.0); });
    const CMatrix qa = s.A.adjoint() * s.A - a * absh;
    const CMatrix qb = s.B.adjoint() * s.B - a * absh;
    const double la = hermitian_eig(0.5 * (qa + qa.adjoint())).values.maxCoeff();
    const double lb = hermitian_eig(0.5 * (qb + qb.adjoint())).values.maxCoeff();
    return std::max({la, lb, 1e-12});
}

} // namespace

bool lemma_iv_holds(const FactorizedSystem& s, double a, double b)
{
    return lemma_iv_b(s, a) <= b * (1.0 + 1e-12) + 1e-14;
}

LemmaReport lemma1_conditions(const FactorizedSystem& s)
{
    LemmaReport r;
    const double base = h0_norm(s) + operator_norm(s.V) + 1.0;
    // (i) eta sweep, geometric from base/100 to 100 base
    for (int k = 0; k <= 40; ++k) {
        const double eta = base * std::pow(10.0, -2.0 + k * 0.1);
        const double nk = operator_norm(bs_operator(s, cplx(0.0, eta)));
        r.i_sweep.emplace_back(eta, nk);
        if (!r.i_holds && nk < 1.0) {
            r.i_holds = true;
            r.i_eta = eta;
            r.i_norm = nk;
        }
    }
    // (ii) / (iii): delta in {0.5, 1, 2, 4, ...}
    double best = 1e300;
    for (int k = -1; k <= 30; ++k) {
        const double delta = std::ldexp(1.0, k);
        const double nrm = product_norm(s, delta, false);
        if (nrm < best) {
            best = nrm;
            r.ii_delta = delta;
        }
    }
    r.ii_norm = best;
    r.ii_holds = best < 1.0;
    r.iii_norm = product_norm(s, r.ii_delta, true);
    r.iii_holds = r.iii_norm < 1.0;

    // (iv): smallest a on a grid in (0, 1) with its b(a)
    bool first = true;
    for (int k = 0; k <= 60; ++k) {
        const double a = 1e-6 * std::pow(0.99 / 1e-6, k / 60.0);
        const double b = lemma_iv_b(s, a);
        if (!std::isfinite(b)) continue;
        if (first) {
            r.iv_holds = true;
            r.iv_a = a;
            r.iv_b = b;
            first = false;
        }
        // (iv) => (ii) at delta = b / a, with the same a
        const double nrm = product_norm(s, b / a, false);
        if (nrm > a * (1.0 + 1e-9) + 1e-15) r.iv_implies_ii = false;
    }

    // (ii) => assumption: pick eta with ||(|H0| + delta)(H0 - i eta)^{-1}|| <= 1 / a
    if (r.ii_holds) {
        const double a = std::max(r.ii_norm, 1e-300);
        double eta = 1.0;
        auto ratio = [&](double e) {
            double worst = 0.0;
            for (Eigen::Index i = 0; i < s.h.size(); ++i)
                worst = std::max(worst, (std::abs(s.h(i)) + r.ii_delta) / std::hypot(s.h(i), e));
            return worst;
        };
        for (int k = 0; k < 200 && ratio(eta) > 1.0 / a; ++k) eta *= 2.0;
        const double d = distance_to_minus_one(bs_operator(s, cplx(0.0, eta)));
        r.ii_implies_assumption = d > 1e-8;
    }
    const double eta0 = assumption_eta(s);
    r.assumption_certified = distance_to_minus_one(bs_operator(s, cplx(0.0, eta0))) > 1e-8;
    return r;
}

double kato_smoothness_sup(const FactorizedSystem& s, std::span<const cplx> z_samples)
{
    if (z_samples.empty()) throw UsageError("kato_smoothness_sup: no samples");
    double sup = 0.0;
    for (const cplx& z : z_samples) {
        if (z.imag() == 0.0) throw UsageError("kato_smoothness_sup: samples must be off the real axis");
        const CMatrix r0 = h0_function(s, [&](double x) { return 1.0 / (cplx(x, 0.0) - z); });
        const double nrm = operator_norm(s.A * r0);
        sup = std::max(sup, std::abs(z.imag()) * nrm * nrm);
    }
    return sup;
}

// ---- stability scan ----------------------------------------------------

std::vector<cplx> zgrid_points(const ZGrid& g)
{
    if (g.nx < 2 || g.ny < 2) throw UsageError("z-grid needs at least 2 x 2 points");
    std::vector<cplx> pts;
    for (int i = 0; i < g.nx; ++i)
        for (int j = 0; j < g.ny; ++j)
            pts.emplace_back(g.re_min + (g.re_max - g.re_min) * i / (g.nx - 1),
                             g.im_min + (g.im_max - g.im_min) * j / (g.ny - 1));
    const double cre = 0.5 * (g.re_min + g.re_max), cim = 0.5 * (g.im_min + g.im_max);
    for (double r : g.ring_radii)
        for (int k = 0; k < g.ring_points; ++k) {
            const double t = 2.0 * 3.14159265358979323846 * (k + 0.5) / g.ring_points;
            pts.emplace_back(cre + r * std::cos(t), cim + r * std::sin(t));
        }
    return pts;
}

std::string to_string(StabilityClass c)
{
    switch (c) {
    case StabilityClass::stable: return "stable";
    case StabilityClass::bounded: return "bounded";
    case StabilityClass::unbounded: return "unbounded";
    }
    return "unknown";
}

StabilityReport stability_scan(const FactorizedSystem& s, const ZGrid& g)
{
    const std::vector<cplx> pts = zgrid_points(g);
    StabilityReport r;
    r.samples = pts.size();
    std::vector<double> norms(pts.size());
    const double tol = 1e-10 * std::max(h0_norm(s), 1e-300);
    for (std::size_t k = 0; k < pts.size(); ++k) {
        if (dist_to_h0(s, pts[k]) <= tol) {
            norms[k] = std::numeric_limits<double>::infinity();
        } else {
            norms[k] = operator_norm(bs_operator(s, pts[k]));
        }
        if (norms[k] > r.sup_norm || k == 0) {
            r.sup_norm = norms[k];
            r.argmax = pts[k];
        }
    }
    auto varies = [](double a, double b) {
        const double hi = std::max(a, b);
        if (!std::isfinite(hi)) return true;
        if (hi < 1e-12) return false;
        return std::abs(a - b) > 0.1 * hi;
    };
    for (int i = 0; i < g.nx; ++i)
        for (int j = 0; j < g.ny; ++j) {
            const double v = norms[i * g.ny + j];
            if (i + 1 < g.nx && varies(v, norms[(i + 1) * g.ny + j])) r.refinement_needed = true;
            if (j + 1 < g.ny && varies(v, norms[i * g.ny + j + 1])) r.refinement_needed = true;
        }

    const CVector hv = eigenvalues_fast(s.HV);
    double gap_h0 = 0.0, gap_hv = 0.0;
    for (Eigen::Index i = 0; i < s.h.size(); ++i) {
        double d = 1e300;
        for (Eigen::Index k = 0; k < hv.size(); ++k) d = std::min(d, std::abs(hv(k) - s.h(i)));
        gap_h0 = std::max(gap_h0, d);
    }
    for (Eigen::Index k = 0; k < hv.size(); ++k) gap_hv = std::max(gap_hv, dist_to_h0(s, hv(k)));
    r.inclusion_gap = gap_h0;
    r.hausdorff = std::max(gap_h0, gap_hv);
    const double stol = 1e-6 * std::max(h0_norm(s), 1.0);

    if (r.refinement_needed || !std::isfinite(r.sup_norm)) {
        r.verdict = StabilityClass::unbounded;
    } else if (r.sup_norm < 1.0) {
        r.verdict = StabilityClass::stable;
        r.spectra_equal = r.hausdorff <= stol;
        r.inclusion_ok = r.inclusion_gap <= stol;
    } else {
        r.verdict = StabilityClass::bounded;
        r.inclusion_ok = r.inclusion_gap <= stol;
    }
    return r;
}

// ---- per-system batch check ---------------------------------------------

SystemCheck check_system(const FactorizedSystem& s)
{
    SystemCheck c;
    c.seed = s.seed;
    c.n = static_cast<int>(s.n());
    c.m = static_cast<int>(s.m());
    auto fail = [&](const std::string& what) { c.failures.push_back(what); };
    const double embed = 1e-6;

    const CorrespondenceReport corr = spectrum_correspondence(s);
    c.correspondence_ok = corr.ok;
    if (!corr.ok) fail("spectrum correspondence");

    const GeneralEig hv = general_eig_vectors(s.HV);
    for (Eigen::Index k = 0; k < hv.values.size(); ++k) {
        const cplx l = hv.values(k);
        if (dist_to_h0(s, l) <= embed) continue;
        const CVector psi = hv.right.col(k);
        const PrincipleCheckReport f = principle_forward(s, l, psi);
        c.worst_forward = std::max(c.worst_forward, f.residual);

        const CMatrix kl = bs_operator(s, l);
        c.min_k_norm_at_eigs = std::min(c.min_k_norm_at_eigs, operator_norm(kl));
        const NearestEig ge = nearest_eigenvalue(kl, -1.0);
        const PrincipleCheckReport b = principle_backward(s, l, ge.right);
        c.worst_backward = std::max(c.worst_backward, b.residual);

        bool simple = true;
        for (Eigen::Index j = 0; j < hv.values.size(); ++j)
            if (j != k && std::abs(hv.values(j) - l) <= 1e-4) simple = false;
        if (simple) {
            const PrincipleCheckReport rt = principle_backward(s, l, f.g);
            c.worst_round_trip = std::max(c.worst_round_trip, (rt.psi + psi).norm() / psi.norm());
        }
    }
    if (c.worst_forward > 1e-7) fail("forward residual");
    if (c.worst_backward > 1e-7) fail("backward residual");
    if (c.worst_round_trip > 1e-8) fail("round trip");
    if (c.min_k_norm_at_eigs < 1.0 - 1e-6) fail("norm lower bound at eigenvalues");

    const double vnorm = operator_norm(s.V);
    c.friedrichs_rel = operator_norm(s.HV - (s.H0 + s.V)) / std::max(h0_norm(s) + vnorm, 1e-300);
    if (c.friedrichs_rel > 1e-10) fail("pseudo-Friedrichs collapse");

    Rng rng(s.seed, 0x5eed);
    const double lo = s.h.minCoeff() - 1.0, hi = s.h.maxCoeff() + 1.0;
    const double an = operator_norm(s.A), bn = operator_norm(s.B);
    int tried = 0;
    for (int k = 0; k < 200 && tried < 20; ++k) {
        const double sign = (k % 2) ? 1.0 : -1.0;
        const cplx z(rng.uniform(lo, hi), sign * rng.uniform(0.1, 3.0));
        double r1, r2;
        try {
            r1 = second_resolvent_residual(s, z, ResolventForm::generalised);
            r2 = second_resolvent_residual(s, z, ResolventForm::kato);
        } catch (const DomainError&) {
            continue;
        }
        ++tried;
        const Eigen::Index n = s.n();
        const double r0n = 1.0 / dist_to_h0(s, z);
        const double rvn = operator_norm((s.HV - z * CMatrix::Identity(n, n)).inverse());
        const double allowed = 1e-10 * std::max(1.0, r0n * rvn * an * bn);
        c.resolvent_scaled = std::max(c.resolvent_scaled, std::max(r1, r2) / allowed);
        c.kato_form_gap = std::max(c.kato_form_gap, std::abs(r1 - r2) / allowed);
    }
    if (c.resolvent_scaled > 1.0) fail("second resolvent identity");

    // delta-shift and adjoint identities at a few off-axis points
    for (int k = 0; k < 3; ++k) {
        const cplx z(rng.uniform(lo, hi), rng.uniform(0.2, 2.0));
        const CMatrix k0 = bs_operator(s, z);
        const double kmax = std::max(1.0, spread_norm(k0));
        for (double d : {1.0, 10.0})
            c.delta_shift = std::max(c.delta_shift, spread_norm(bs_operator(s, z, d) - k0) / kmax);
        const CMatrix ka = adjoint_bs(s, z);
        c.adjoint_gap = std::max(c.adjoint_gap, spread_norm(ka - k0.adjoint()) / kmax);
        c.adjoint_gap = std::max(c.adjoint_gap, std::abs(operator_norm(ka) - operator_norm(k0)) / kmax);
    }
    if (c.delta_shift > 1e-10) fail("delta-shift invariance");
    if (c.adjoint_gap > 1e-10) fail("adjoint identity");

    // residual spectrum: sigma(HV^*) = sigma(H0 + A^* B) vs adjoint_bs at conj(mu)
    const CVector adj = eigenvalues_fast(s.H0 + s.A.adjoint() * s.B);
    for (Eigen::Index k = 0; k < adj.size(); ++k) {
        if (dist_to_h0(s, adj(k)) <= embed) continue;
        if (distance_to_minus_one(adjoint_bs(s, std::conj(adj(k)))) > 1e-6) c.residual_probe_ok = false;
    }
    if (!c.residual_probe_ok) fail("residual spectrum probe");
    return c;
}

} // namespace bslab
