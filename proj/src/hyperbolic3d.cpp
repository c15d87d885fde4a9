#include "bslab/hyperbolic3d.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "bslab/errors.hpp"
#include "bslab/euclid3d.hpp"

namespace bslab {

namespace {

using boost::math::quadrature::gauss_kronrod;

// |V(rho)| sinh^2(rho), written to avoid overflow for the sech^2 family
double weighted_abs(const HyperbolicPotential& v, double rho, double scale)
{
    if (v.family() == HyperbolicPotential::Family::sech2) {
        const double ratio = std::exp(rho - rho / scale) * (-std::expm1(-2.0 * rho)) /
                             (1.0 + std::exp(-2.0 * rho / scale));
        return std::abs(v.amplitude()) * ratio * ratio;
    }
    const double s = std::sinh(rho);
    return v.abs(rho) * s * s;
}

} // namespace

HyperbolicPotential HyperbolicPotential::zero()
{
    HyperbolicPotential v;
    v.finish();
    return v;
}

HyperbolicPotential HyperbolicPotential::inverse_square(double c0, double rho0, double rho1)
{
    if (!(rho0 > 0.0) || !(rho1 > rho0)) throw UsageError("inverse_square: need 0 < rho0 < rho1");
    HyperbolicPotential v;
    v.family_ = Family::inverse_square;
    v.c_ = c0 / 4.0;
    v.p_ = rho0;
    v.q_ = rho1;
    v.finish();
    return v;
}

HyperbolicPotential HyperbolicPotential::sech2(cplx gamma, double scale)
{
    if (!(scale > 0.0)) throw UsageError("sech2: scale must be positive");
    if (scale >= 1.0) throw DomainError("sech2: |V| sinh^2 is not integrable for scale >= 1");
    HyperbolicPotential v;
    v.family_ = Family::sech2;
    v.c_ = gamma;
    v.p_ = scale;
    v.finish();
    return v;
}

HyperbolicPotential HyperbolicPotential::bump(cplx amplitude, double radius)
{
    if (!(radius > 0.0)) throw UsageError("bump: radius must be positive");
    HyperbolicPotential v;
    v.family_ = Family::bump;
    v.c_ = amplitude;
    v.p_ = radius;
    v.finish();
    return v;
}

HyperbolicPotential HyperbolicPotential::tabulated(std::vector<double> rho, std::vector<cplx> val)
{
    if (rho.size() != val.size() || rho.size() < 2) throw UsageError("tabulated: need >= 2 samples");
    if (rho.front() < 0.0) throw UsageError("tabulated: rho must be non-negative");
    for (std::size_t i = 0; i + 1 < rho.size(); ++i)
        if (!(rho[i + 1] > rho[i])) throw UsageError("tabulated: rho must increase strictly");
    HyperbolicPotential v;
    v.family_ = Family::tabulated;
    v.tx_ = std::move(rho);
    v.tv_ = std::move(val);
    v.finish();
    return v;
}

HyperbolicPotential HyperbolicPotential::from_csv(const std::string& path)
{
    std::ifstream in(path);
    if (!in) throw UsageError("cannot open potential file " + path);
    std::vector<double> x;
    std::vector<cplx> v;
    std::string line;
    while (std::getline(in, line)) {
        std::replace(line.begin(), line.end(), ',', ' ');
        std::istringstream ss(line);
        double a, re, im;
        if (ss >> a >> re >> im) {
            x.push_back(a);
            v.emplace_back(re, im);
        }
    }
    return tabulated(std::move(x), std::move(v));
}

std::string HyperbolicPotential::name() const
{
    switch (family_) {
    case Family::zero: return "zero";
    case Family::inverse_square: return "inverse_square";
    case Family::sech2: return "sech2";
    case Family::bump: return "bump";
    case Family::tabulated: return "tabulated";
    }
    return "?";
}

HyperbolicPotential HyperbolicPotential::scaled(cplx factor) const
{
    HyperbolicPotential v = *this;
    v.c_ *= factor;
    for (auto& t : v.tv_) t *= factor;
    v.finish();
    return v;
}

cplx HyperbolicPotential::operator()(double rho) const
{
    switch (family_) {
    case Family::zero: return 0.0;
    case Family::inverse_square: return (rho >= p_ && rho <= q_) ? c_ / (rho * rho) : cplx(0.0);
    case Family::sech2: {
        const double s = 1.0 / std::cosh(rho / p_);
        return c_ * s * s;
    }
    case Family::bump: {
        const double t = rho / p_;
        if (t >= 1.0) return 0.0;
        return c_ * std::exp(1.0 - 1.0 / (1.0 - t * t));
    }
    case Family::tabulated: {
        if (rho < tx_.front() || rho > tx_.back()) return 0.0;
        auto it = std::upper_bound(tx_.begin(), tx_.end(), rho);
        if (it == tx_.end()) return tv_.back();
        const std::size_t i = static_cast<std::size_t>(it - tx_.begin()) - 1;
        const double s = (rho - tx_[i]) / (tx_[i + 1] - tx_[i]);
        return tv_[i] * (1.0 - s) + tv_[i + 1] * s;
    }
    }
    return 0.0;
}

double HyperbolicPotential::weighted_tail(double R) const
{
    if (family_ == Family::zero) return 0.0;
    auto f = [this](double r) { return weighted_abs(*this, r, p_); };
    if (family_ == Family::sech2)
        return gauss_kronrod<double, 61>::integrate(f, std::max(R, 0.0), INFINITY, 15, 1e-14);
    const double a = std::max(R, support_.a), b = support_.b;
    if (!(b > a)) return 0.0;
    return gauss_kronrod<double, 61>::integrate(f, a, b, 15, 1e-14);
}

void HyperbolicPotential::finish()
{
    switch (family_) {
    case Family::zero: support_ = {0.0, 0.0}; break;
    case Family::inverse_square: support_ = {p_, q_}; break;
    case Family::bump: support_ = {0.0, p_}; break;
    case Family::tabulated: support_ = {tx_.front(), tx_.back()}; break;
    case Family::sech2: support_ = {0.0, 0.0}; break;
    }
    linf_ = 0.0;
    switch (family_) {
    case Family::zero: break;
    case Family::inverse_square: linf_ = std::abs(c_) / (p_ * p_); break;
    case Family::sech2:
    case Family::bump: linf_ = std::abs(c_); break;
    case Family::tabulated:
        for (auto& t : tv_) linf_ = std::max(linf_, std::abs(t));
        break;
    }
    wl1_ = weighted_tail(0.0);
    if (family_ == Family::sech2) {
        double R = 4.0 * p_;
        while (weighted_tail(R) > 1e-11 * wl1_ && R < 1e3) R *= 1.25;
        support_ = {0.0, R};
    }
}

cplx green_h3(cplx z, double rho)
{
    if (z.imag() == 0.0 && z.real() > 1.0) throw DomainError("green_h3: z on (1, inf)");
    if (!(rho > 0.0)) throw DomainError("green_h3: rho must be positive");
    return std::exp(-principal_sqrt_minus(z - 1.0) * rho) / (4.0 * M_PI * std::sinh(rho));
}

QuadratureGrid make_h3_grid(const HyperbolicPotential& v, const HGrid& g)
{
    Interval s = v.support();
    if (!(s.b > s.a)) throw UsageError("h3 grid: empty support");
    if (g.R > 0.0 && g.R < s.b) {
        if (!(g.R > s.a) || v.weighted_tail(g.R) > 1e-10 * v.weighted_l1())
            throw DomainError("truncation: tail of |V| sinh^2 beyond R too large");
        s.b = g.R;
    }
    std::vector<double> edges;
    if (v.log_spaced() && s.a > 0.0) {
        const int n = std::max(1, static_cast<int>(std::ceil(std::log(s.b / s.a) / std::log(g.ratio))));
        for (int k = 0; k <= n; ++k) edges.push_back(s.a * std::pow(s.b / s.a, static_cast<double>(k) / n));
    } else {
        const int n = std::max(1, static_cast<int>(std::ceil((s.b - s.a) / g.panel_len)));
        for (int k = 0; k <= n; ++k) edges.push_back(s.a + (s.b - s.a) * k / n);
    }
    edges.front() = s.a;
    edges.back() = s.b;
    return gauss_legendre_panels(edges, g.order);
}

namespace {

struct Level {
    QuadratureGrid grid;
    std::vector<int> active;
    std::vector<cplx> left, right, absroot;
};

Level make_level(const HyperbolicPotential& v, const HGrid& g)
{
    Level lv;
    lv.grid = make_h3_grid(v, g);
    const double floor = 1e-15 * v.linf_norm();
    for (std::size_t i = 0; i < lv.grid.size(); ++i) {
        const cplx val = v(lv.grid.nodes[i]);
        const double a = std::abs(val);
        if (a <= floor) continue;
        lv.active.push_back(static_cast<int>(i));
        lv.left.emplace_back(std::sqrt(a));
        lv.right.push_back(val / std::sqrt(a));
        lv.absroot.emplace_back(std::sqrt(a));
    }
    return lv;
}

CMatrix level_k(const Level& lv, cplx z, bool absolute = false)
{
    if (z.imag() == 0.0 && z.real() > 1.0) throw DomainError("K(z): z on (1, inf)");
    const cplx zs = z - 1.0;
    const Kernel ker = [zs](double r, double rp) { return green3d(zs, r, rp); };
    const double decay = std::abs(principal_sqrt_minus(zs));
    return nystrom_matrix(lv.grid, lv.active, lv.left, absolute ? lv.absroot : lv.right, ker,
                          NystromRule::product, decay);
}

HGrid refined(HGrid g)
{
    g.panel_len /= 2.0;
    g.ratio = std::sqrt(g.ratio);
    return g;
}

} // namespace

CMatrix assemble_k_h3(const HyperbolicPotential& v, const HGrid& g, cplx z)
{
    if (z.imag() == 0.0 && z.real() > 1.0) throw DomainError("assemble_k_h3: z on (1, inf)");
    if (v.family() == HyperbolicPotential::Family::zero || v.linf_norm() == 0.0) {
        const int n = std::max(1, static_cast<int>(std::ceil(1.0 / g.panel_len))) * g.order;
        return CMatrix::Zero(n, n);
    }
    const Level lv = make_level(v, g);
    const Eigen::Index n = static_cast<Eigen::Index>(lv.grid.size());
    CMatrix out = CMatrix::Zero(n, n);
    if (lv.active.empty()) return out;
    const CMatrix k = level_k(lv, z);
    for (std::size_t a = 0; a < lv.active.size(); ++a)
        for (std::size_t b = 0; b < lv.active.size(); ++b) out(lv.active[a], lv.active[b]) = k(a, b);
    return out;
}

SubordinationCertificate subordination_certificate(const HyperbolicPotential& v, const HGrid& g)
{
    SubordinationCertificate s;
    if (v.linf_norm() == 0.0) {
        s.spectral = EnclosureCertificate::make("h3_subordination", 0.0, 1.0, "zero potential");
        s.pointwise = EnclosureCertificate::make("h3_hardy_pointwise", 0.0, 1.0, "zero potential");
        return s;
    }
    const Level lv = make_level(v, g);
    const CMatrix m = level_k(lv, cplx(1.0 - h3_edge_eps * h3_edge_eps, 0.0), true);
    const HermitianEig e = hermitian_eig(0.5 * (m + m.adjoint()));
    s.spectral = EnclosureCertificate::make("h3_subordination", std::max(0.0, e.values.maxCoeff()), 1.0,
                                            "largest eigenvalue at z = 1 - 1e-8");

    // sup 4 rho^2 |V| on a dense grid
    const Interval sp = v.support();
    double c = 0.0;
    const int n = 20000;
    for (int i = 0; i <= n; ++i) {
        double rho;
        if (v.log_spaced())
            rho = sp.a * std::pow(sp.b / sp.a, static_cast<double>(i) / n);
        else
            rho = sp.a + (sp.b - sp.a) * i / n;
        c = std::max(c, 4.0 * rho * rho * v.abs(rho));
    }
    if (!std::isfinite(c)) c = INFINITY;
    s.pointwise = EnclosureCertificate::make("h3_hardy_pointwise", c, 1.0, "sup 4 rho^2 |V(rho)|");
    return s;
}

HyperbolicPotential scale_to_subordination(const HyperbolicPotential& v, double target, const HGrid& g)
{
    const double c = subordination_certificate(v, g).spectral.computed;
    if (!(c > 0.0)) throw UsageError("scale_to_subordination: zero potential");
    return v.scaled(target / c);
}

std::vector<cplx> h3_zgrid_points(const H3ZGrid& g)
{
    std::vector<cplx> z;
    for (int i = 0; i < g.n_re; ++i) {
        const double re = -1.0 + (g.lambda_max + 1.0) * i / (g.n_re - 1);
        for (double h : g.heights) {
            z.emplace_back(re, h);
            z.emplace_back(re, -h);
        }
        // real axis below the edge
        z.emplace_back(1.0 - 1e-3 - 10.0 * i / (g.n_re - 1), 0.0);
    }
    for (int k = 0; k < g.n_rays; ++k) {
        const double th = 2.0 * M_PI * (k + 0.5) / g.n_rays;
        for (int j = 0; j < g.ray_points; ++j) {
            const double r = 1e-3 * std::pow(g.ray_max / 1e-3, static_cast<double>(j) / (g.ray_points - 1));
            z.push_back(1.0 + std::polar(r, th));
        }
    }
    for (int k = 0; k < g.ring_points; ++k)
        z.push_back(1.0 + std::polar(g.ring_radius, 2.0 * M_PI * (k + 0.5) / g.ring_points));
    return z;
}

H3StabilityReport stability_scan_h3(const HyperbolicPotential& v, const H3ZGrid& zg, const HGrid& g)
{
    H3StabilityReport r;
    r.note = "continuous spectrum is not certified; only the uniform bound and the absence of "
             "eigenvalues in the searched region are checked";
    const std::vector<cplx> zs = h3_zgrid_points(zg);
    r.samples = zs.size();
    if (v.linf_norm() == 0.0) {
        r.ok = true;
        return r;
    }
    r.c = subordination_certificate(v, g).spectral.computed;
    const Level lv = make_level(v, g);
    // the edge point z = 1 - eps^2 is a sample too
    const cplx edge(1.0 - h3_edge_eps * h3_edge_eps, 0.0);
    r.edge_norm = operator_norm(level_k(lv, edge));
    r.sup_norm = r.edge_norm;
    r.argmax = edge;
    r.samples += 1;
    r.z.push_back(edge);
    r.norms.push_back(r.edge_norm);
    for (cplx z : zs) {
        const double n = operator_norm(level_k(lv, z));
        r.z.push_back(z);
        r.norms.push_back(n);
        if (n > r.sup_norm) {
            r.sup_norm = n;
            r.argmax = z;
        }
        r.dominance_gap = std::max(r.dominance_gap, n - r.edge_norm);
        if (n > r.c + 1e-3) r.exceedances.push_back(z);
    }
    if (r.edge_norm > r.c + 1e-3) r.exceedances.push_back(edge);
    // look between the samples around the maximiser
    double spacing = INFINITY;
    for (cplx z : zs)
        if (z != r.argmax) spacing = std::min(spacing, std::abs(z - r.argmax));
    for (int k = 0; k < 8; ++k) {
        const cplx z = r.argmax + std::polar(0.5 * spacing, 2.0 * M_PI * k / 8);
        if (z.imag() == 0.0 && z.real() > 1.0) continue;
        if (operator_norm(level_k(lv, z)) > r.sup_norm * (1.0 + 1e-3)) r.refinement_needed = true;
    }
    r.ok = r.c < 1.0 && r.exceedances.empty() && !r.refinement_needed;
    if (r.c >= 1.0) r.note += "; subordination constant >= 1, stability not expected";
    return r;
}

SpectralReport eigenvalue_hunt_h3(const HyperbolicPotential& v, const HGrid& g, const Rect& search,
                                  HuntOptions opt)
{
    SpectralReport rep;
    rep.method = "bs_root";
    rep.tolerance = opt.tol;
    opt.cut_start = 1.0;
    if (v.linf_norm() == 0.0) return rep;
    const Level l1 = make_level(v, g);
    const Level l2 = make_level(v, refined(g));
    rep.grid_n = static_cast<int>(l1.grid.size());
    rep.extent = l1.grid.domain.b;
    const std::vector<const Level*> levels{&l1, &l1, &l2};
    KFamily family = [&](cplx z, int level) { return level_k(*levels[level], z); };
    HuntResult h = hunt_roots(family, search, opt);
    for (auto& e : h.roots) {
        e.grid_n = rep.grid_n;
        e.extent = rep.extent;
    }
    rep.eigenvalues = std::move(h.roots);
    rep.rejected = std::move(h.rejected);
    const SubordinationCertificate s = subordination_certificate(v, g);
    rep.certificates = {s.spectral, s.pointwise};
    return rep;
}

std::vector<cplx> fd_eigenvalues_h3(const HyperbolicPotential& v, double R, int n)
{
    if (n < 3) throw UsageError("fd oracle: need at least 3 intervals");
    const double h = R / n;
    std::vector<cplx> d(n - 1), e(n - 2, cplx(-1.0 / (h * h)));
    for (int k = 0; k < n - 1; ++k) d[k] = 2.0 / (h * h) + 1.0 + v((k + 1) * h);
    return tridiag_symmetric_eigenvalues(std::move(d), std::move(e));
}

SpectralReport fd_oracle_h3(const HyperbolicPotential& v, double R, int n, FdFilter f)
{
    SpectralReport rep;
    rep.method = "fd_oracle";
    rep.grid_n = n;
    rep.extent = R;
    rep.tolerance = f.h_tol;
    if (v.linf_norm() == 0.0) return rep;
    if (v.weighted_tail(R) > 1e-10 * v.weighted_l1()) throw DomainError("truncation: box too small for V");
    f.cut_start = 1.0;
    if (!std::isfinite(f.radius)) f.radius = 1.1 * v.linf_norm() + 0.1;
    HuntResult h = fd_filter([&](double ext, int m) { return fd_eigenvalues_h3(v, ext, m); }, R, n, f);
    rep.eigenvalues = std::move(h.roots);
    rep.rejected = std::move(h.rejected);
    return rep;
}

} // namespace bslab
