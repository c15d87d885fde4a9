#include "bslab/schrodinger1d.hpp"

#include <algorithm>
#include <cmath>

#include "bslab/errors.hpp"

namespace bslab {

cplx green1d(cplx z, double x, double y)
{
    if (z.imag() == 0.0 && z.real() >= 0.0) throw DomainError("green1d: z on [0, inf)");
    const cplx k = principal_sqrt_minus(z);
    return std::exp(-k * std::abs(x - y)) / (2.0 * k);
}

void check_truncation(const Potential1D& v, double L)
{
    if (!(L > 0.0)) throw UsageError("box half-width must be positive");
    if (v.tail_l1(L) > 1e-10 * v.l1_norm())
        throw DomainError("truncation: tail of |V| beyond L = " + std::to_string(L) + " too large");
}

QuadratureGrid make_grid(const Potential1D& v, const Grid1D& g)
{
    if (g.n < 2) throw UsageError("grid needs at least 2 nodes");
    std::vector<double> breaks;
    for (double b : v.breakpoints())
        if (b > -g.L && b < g.L) breaks.push_back(b);
    return gauss_legendre(Interval{-g.L, g.L}, g.n, breaks);
}

namespace {

// nodes where V is not negligible, with the factors there
struct Level {
    QuadratureGrid grid;
    std::vector<int> active;
    std::vector<cplx> left, right;
};

Level make_level(const Potential1D& v, const Grid1D& g)
{
    Level lv;
    lv.grid = make_grid(v, g);
    const double floor = 1e-15 * v.linf_norm();
    for (std::size_t i = 0; i < lv.grid.size(); ++i) {
        const double x = lv.grid.nodes[i];
        if (std::abs(v(x)) <= floor) continue;
        lv.active.push_back(static_cast<int>(i));
        lv.left.emplace_back(v.a_factor(x));
        lv.right.push_back(v.b_conj_factor(x));
    }
    return lv;
}

CMatrix level_k(const Level& lv, cplx z, NystromRule rule)
{
    if (z.imag() == 0.0 && z.real() >= 0.0) throw DomainError("K(z): z on [0, inf)");
    const cplx k = principal_sqrt_minus(z);
    const Kernel ker = [k](double x, double y) { return std::exp(-k * std::abs(x - y)) / (2.0 * k); };
    return nystrom_matrix(lv.grid, lv.active, lv.left, lv.right, ker, rule, std::abs(k));
}

} // namespace

CMatrix assemble_k(const Potential1D& v, const Grid1D& g, cplx z)
{
    if (z.imag() == 0.0 && z.real() >= 0.0) throw DomainError("assemble_k: z on [0, inf)");
    if (v.l1_norm() > 0.0) check_truncation(v, g.L);
    const Level lv = make_level(v, g);
    const Eigen::Index n = static_cast<Eigen::Index>(lv.grid.size());
    CMatrix out = CMatrix::Zero(n, n);
    if (lv.active.empty()) return out;
    const CMatrix k = level_k(lv, z, g.rule);
    for (std::size_t a = 0; a < lv.active.size(); ++a)
        for (std::size_t b = 0; b < lv.active.size(); ++b) out(lv.active[a], lv.active[b]) = k(a, b);
    return out;
}

HsCheck hs_bound_check(const Potential1D& v, cplx z, const Grid1D& g)
{
    Grid1D pg = g;
    pg.rule = NystromRule::point;
    HsCheck c;
    c.hs = assemble_k(v, pg, z).norm();
    c.bound = v.l1_norm() / (2.0 * std::sqrt(std::abs(z)));
    c.ok = c.hs <= c.bound + 1e-4 * c.bound;
    return c;
}

EnclosureCertificate davies_disk(const Potential1D& v)
{
    EnclosureCertificate c;
    c.kind = "davies_disk";
    c.threshold = 0.25 * v.l1_norm() * v.l1_norm();
    c.computed = 0.0;
    c.verdict = true;
    c.margin = c.threshold;
    c.note = "radius ||V||_1^2/4; no eigenvalues checked";
    return c;
}

EnclosureCertificate davies_containment(const Potential1D& v, const std::vector<EigenEntry>& eigs)
{
    EnclosureCertificate c = davies_disk(v);
    c.threshold *= 1.0 + 1e-3;
    c.computed = 0.0;
    for (auto& e : eigs) c.computed = std::max(c.computed, std::abs(e.lambda));
    c.verdict = c.computed <= c.threshold;
    c.margin = c.threshold - c.computed;
    c.note = "max |lambda| against the radius inflated by 1e-3";
    return c;
}

SpectralReport find_eigenvalues_bs(const Potential1D& v, const Grid1D& g, const Rect& search,
                                   HuntOptions opt)
{
    SpectralReport rep;
    rep.method = "bs_root";
    rep.grid_n = g.n;
    rep.extent = g.L;
    rep.tolerance = opt.tol;
    opt.cut_start = 0.0;
    if (v.l1_norm() == 0.0) {
        rep.certificates.push_back(davies_containment(v, {}));
        return rep;
    }
    check_truncation(v, g.L);

    Grid1D g2 = g;
    g2.n = 2 * g.n;
    // coarse scan grid: halve while too many active nodes
    Grid1D g0 = g;
    Level l0 = make_level(v, g0);
    while (l0.active.size() > 160 && g0.n / 2 >= 64) {
        g0.n /= 2;
        l0 = make_level(v, g0);
    }
    const Level l1 = make_level(v, g);
    const Level l2 = make_level(v, g2);
    const std::vector<const Level*> levels{&l0, &l1, &l2};
    const NystromRule rule = g.rule;
    KFamily family = [&](cplx z, int level) { return level_k(*levels[level], z, rule); };

    HuntResult h = hunt_roots(family, search, opt);
    for (auto& e : h.roots) {
        e.grid_n = g.n;
        e.extent = g.L;
    }
    rep.eigenvalues = std::move(h.roots);
    rep.rejected = std::move(h.rejected);
    rep.certificates.push_back(davies_containment(v, rep.eigenvalues));
    return rep;
}

std::vector<cplx> fd_eigenvalues(const Potential1D& v, double L, int n_fd)
{
    if (n_fd < 3) throw UsageError("fd_oracle: need at least 3 intervals");
    const double h = 2.0 * L / n_fd;
    const int m = n_fd - 1;
    std::vector<cplx> d(m), e(m > 0 ? m - 1 : 0, cplx(-1.0 / (h * h)));
    for (int k = 0; k < m; ++k) d[k] = 2.0 / (h * h) + v.average(-L + (k + 1) * h);
    return tridiag_symmetric_eigenvalues(std::move(d), std::move(e));
}

SpectralReport fd_oracle(const Potential1D& v, double L, int n_fd, const FdOptions& opt)
{
    SpectralReport rep;
    rep.method = "fd_oracle";
    rep.grid_n = n_fd;
    rep.extent = L;
    rep.tolerance = opt.h_tol;
    if (v.l1_norm() > 0.0) check_truncation(v, L);

    FdFilter f;
    f.h_tol = opt.h_tol;
    f.l_factor = opt.l_factor;
    f.l_tol = opt.l_tol;
    f.cut_margin = opt.cut_margin;
    const double margin = opt.norm_margin >= 0.0 ? opt.norm_margin : 0.1 * v.linf_norm() + 0.1;
    f.radius = v.linf_norm() + margin;
    HuntResult h = fd_filter([&](double ext, int n) { return fd_eigenvalues(v, ext, n); }, L, n_fd, f);
    rep.eigenvalues = std::move(h.roots);
    rep.rejected = std::move(h.rejected);
    rep.certificates.push_back(davies_containment(v, rep.eigenvalues));
    return rep;
}

} // namespace bslab
