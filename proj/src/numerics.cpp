#include "bslab/numerics.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include <lapacke.h>

#include "bslab/errors.hpp"

namespace bslab {

cplx principal_sqrt_minus(cplx z)
{
    if (z == cplx(0.0, 0.0)) return {0.0, 0.0};
    // std::sqrt has its cut on the negative real axis of the argument,
    // i.e. on z in [0, inf), and returns Re >= 0.
    return std::sqrt(-z);
}

double dist_to_cut(cplx z, double start)
{
    if (z.real() >= start) return std::abs(z.imag());
    return std::abs(z - cplx(start, 0.0));
}

bool is_finite(const CMatrix& m)
{
    for (Eigen::Index j = 0; j < m.cols(); ++j)
        for (Eigen::Index i = 0; i < m.rows(); ++i)
            if (!std::isfinite(m(i, j).real()) || !std::isfinite(m(i, j).imag())) return false;
    return true;
}

bool is_hermitian(const CMatrix& m, double rel_tol)
{
    if (m.rows() != m.cols()) return false;
    const double scale = m.cwiseAbs().maxCoeff();
    if (scale == 0.0) return true;
    return (m - m.adjoint()).cwiseAbs().maxCoeff() <= rel_tol * scale;
}

HermitianEig hermitian_eig(const CMatrix& m)
{
    if (!is_finite(m)) throw UsageError("hermitian_eig: non-finite entries");
    if (!is_hermitian(m)) throw UsageError("hermitian_eig: matrix is not Hermitian");
    Eigen::SelfAdjointEigenSolver<CMatrix> es(m);
    if (es.info() != Eigen::Success) throw NumericalFailure("hermitian_eig: no convergence");
    return {es.eigenvalues(), es.eigenvectors()};
}

namespace {

void zgeev(CMatrix a, char jobvr, CVector& w, CMatrix* vr)
{
    const lapack_int n = static_cast<lapack_int>(a.rows());
    w.resize(n);
    lapack_complex_double* vrp = nullptr;
    lapack_int ldvr = 1;
    if (jobvr == 'V') {
        vr->resize(n, n);
        vrp = reinterpret_cast<lapack_complex_double*>(vr->data());
        ldvr = n;
    }
    const lapack_int info = LAPACKE_zgeev(
        LAPACK_COL_MAJOR, 'N', jobvr, n, reinterpret_cast<lapack_complex_double*>(a.data()), n,
        reinterpret_cast<lapack_complex_double*>(w.data()), nullptr, 1, vrp, ldvr);
    if (info != 0) throw NumericalFailure("zgeev failed, info = " + std::to_string(info));
}

} // namespace

CVector eigenvalues_fast(const CMatrix& m)
{
    if (m.rows() != m.cols()) throw UsageError("eigenvalues: matrix not square");
    if (m.rows() == 0) return {};
    if (!is_finite(m)) throw NumericalFailure("eigenvalues: non-finite entries");
    CVector w;
    zgeev(m, 'N', w, nullptr);
    return w;
}

GeneralEig general_eig_vectors(const CMatrix& m)
{
    if (m.rows() != m.cols()) throw UsageError("general_eig: matrix not square");
    GeneralEig out;
    const Eigen::Index n = m.rows();
    if (n == 0) return out;
    if (!is_finite(m)) throw NumericalFailure("general_eig: non-finite entries");
    zgeev(m, 'V', out.values, &out.right);
    const double mnorm = operator_norm(m);
    const double tol = 1e-8 * std::max(mnorm, std::numeric_limits<double>::min());
    const CMatrix mx = m * out.right;
    out.residual.resize(n);
    for (Eigen::Index k = 0; k < n; ++k) {
        const double nx = out.right.col(k).norm();
        out.right.col(k) /= nx;
        double r = (mx.col(k) / nx - out.values(k) * out.right.col(k)).norm();
        if (r > tol) {
            // eigenvector may be poor for a defective eigenvalue; the
            // eigenvalue itself is still fine if M - lambda I is nearly singular
            const CMatrix shifted = m - out.values(k) * CMatrix::Identity(n, n);
            r = std::min(r, smallest_singular_value(shifted));
        }
        if (!(r <= tol))
            throw NumericalFailure("general_eig: backward-error certificate failed");
        out.residual(k) = r;
    }
    return out;
}

CVector general_eig(const CMatrix& m)
{
    return general_eig_vectors(m).values;
}

double operator_norm(const CMatrix& m)
{
    if (m.size() == 0) return 0.0;
    Eigen::BDCSVD<CMatrix> svd(m);
    return svd.singularValues()(0);
}

double smallest_singular_value(const CMatrix& m)
{
    if (m.size() == 0) return 0.0;
    Eigen::BDCSVD<CMatrix> svd(m);
    const auto& s = svd.singularValues();
    return s(s.size() - 1);
}

CMatrix psd_power(const CMatrix& m, double p)
{
    const HermitianEig e = hermitian_eig(m);
    const double scale = std::max(std::abs(e.values(0)), std::abs(e.values(e.values.size() - 1)));
    RVector f(e.values.size());
    for (Eigen::Index i = 0; i < f.size(); ++i) {
        double v = e.values(i);
        if (v < -1e-10 * scale) throw UsageError("psd_power: matrix has a negative eigenvalue");
        v = std::max(v, 0.0);
        if (v == 0.0 && p < 0) throw UsageError("psd_power: negative power of a singular matrix");
        f(i) = (v == 0.0) ? (p == 0.0 ? 1.0 : 0.0) : std::pow(v, p);
    }
    return e.vectors * f.asDiagonal() * e.vectors.adjoint();
}

NearestEig nearest_eigenvalue(const CMatrix& m, cplx shift, int max_iter)
{
    const Eigen::Index n = m.rows();
    if (n == 0 || m.cols() != n) throw UsageError("nearest_eigenvalue: bad matrix");
    const double scale = std::max(m.norm(), 1e-300);
    const CMatrix id = CMatrix::Identity(n, n);

    CVector x(n), y(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        x(i) = cplx(1.0 + 0.37 * std::sin(1.3 * i), 0.21 * std::cos(0.7 * i));
        y(i) = std::conj(x(i));
    }
    x.normalize();
    y.normalize();

    NearestEig out{};
    out.residual = std::numeric_limits<double>::infinity();
    cplx sigma = shift;
    Eigen::PartialPivLU<CMatrix> lu(m - sigma * id);
    // fixed shift first so the iteration locks onto the nearest eigenvalue,
    // then a few two-sided Rayleigh updates of the shift
    const int fixed = std::min(max_iter, 12);
    int refactor = 0;
    for (int it = 0; it < max_iter; ++it) {
        CVector xn = lu.solve(x);
        CVector yn = lu.adjoint().solve(y);
        if (!xn.allFinite() || !yn.allFinite() || xn.norm() == 0.0 || yn.norm() == 0.0) {
            // shift sits on an eigenvalue to working precision
            sigma += cplx(1e-13 * scale, 1e-13 * scale);
            lu.compute(m - sigma * id);
            continue;
        }
        x = xn / xn.norm();
        y = yn / yn.norm();
        const CVector mx = m * x;
        const cplx yx = y.dot(x);
        cplx mu = x.dot(mx);
        if (std::abs(yx) > 1e-12) mu = y.dot(mx) / yx;
        const double res = (mx - mu * x).norm();
        out.value = mu;
        out.residual = res;
        if (res <= 1e-13 * scale) {
            out.converged = true;
            break;
        }
        if (it + 1 >= fixed && refactor < 4) {
            sigma = mu;
            lu.compute(m - sigma * id);
            ++refactor;
        }
    }
    if (!out.converged) out.converged = out.residual <= 1e-10 * scale;
    out.right = x;
    out.left = y;
    return out;
}

// principal square root without the overflow care of std::sqrt; the
// arguments here are sums of squares of matrix entries
static cplx fast_sqrt(cplx z)
{
    const double x = z.real(), y = z.imag();
    const double m = std::sqrt(x * x + y * y);
    if (m == 0.0) return 0.0;
    if (x >= 0.0) {
        const double t = std::sqrt(0.5 * (m + x));
        return {t, y / (2.0 * t)};
    }
    const double t = std::sqrt(0.5 * (m - x));
    return {std::abs(y) / (2.0 * t), std::copysign(t, y)};
}

std::vector<cplx> tridiag_symmetric_eigenvalues(std::vector<cplx> d, std::vector<cplx> e_in)
{
    const int n = static_cast<int>(d.size());
    if (n == 0) return {};
    if (static_cast<int>(e_in.size()) != n - 1) throw UsageError("tridiag: off-diagonal size");
    std::vector<cplx> e(n, 0.0);
    std::copy(e_in.begin(), e_in.end(), e.begin());
    const double eps = std::numeric_limits<double>::epsilon();
    // |re| + |im|: within sqrt 2 of the modulus and much cheaper than hypot
    auto abs1 = [](cplx z) { return std::abs(z.real()) + std::abs(z.imag()); };

    for (int l = 0; l < n; ++l) {
        int iter = 0;
        int m;
        do {
            for (m = l; m < n - 1; ++m) {
                const double dd = abs1(d[m]) + abs1(d[m + 1]);
                if (abs1(e[m]) <= eps * dd) break;
            }
            if (m != l) {
                if (++iter > 60) throw NumericalFailure("tridiag QL: no convergence");
                cplx g = (d[l + 1] - d[l]) / (2.0 * e[l]);
                cplx r = std::sqrt(g * g + 1.0);
                if (std::abs(g - r) > std::abs(g + r)) r = -r;
                g = d[m] - d[l] + e[l] / (g + r);
                cplx s = 1.0, c = 1.0, p = 0.0;
                int i;
                bool deflated = false;
                for (i = m - 1; i >= l; --i) {
                    const cplx f = s * e[i];
                    const cplx b = c * e[i];
                    r = fast_sqrt(f * f + g * g);
                    e[i + 1] = r;
                    const double ar = abs1(r);
                    if (ar <= 1e-300) {
                        d[i + 1] -= p;
                        e[m] = 0.0;
                        deflated = true;
                        break;
                    }
                    if (ar < 1e-8 * (abs1(f) + abs1(g)))
                        throw NumericalFailure("tridiag QL: complex rotation breakdown");
                    const cplx inv = std::conj(r) / std::norm(r);
                    s = f * inv;
                    c = g * inv;
                    g = d[i + 1] - p;
                    r = (d[i] - g) * s + 2.0 * c * b;
                    p = s * r;
                    d[i + 1] = g + p;
                    g = c * r - b;
                }
                if (deflated && i >= l) continue;
                d[l] -= p;
                e[l] = g;
                e[m] = 0.0;
            }
        } while (m != l);
    }
    for (const cplx& v : d)
        if (!std::isfinite(v.real()) || !std::isfinite(v.imag()))
            throw NumericalFailure("tridiag QL: non-finite eigenvalue");
    return d;
}

// ---- quadrature --------------------------------------------------------

void gauss_legendre_rule(int order, std::vector<double>& x, std::vector<double>& w)
{
    if (order < 1) throw UsageError("gauss_legendre_rule: order < 1");
    x.assign(order, 0.0);
    w.assign(order, 0.0);
    // P_n(t) and P_n'(t) by the three-term recurrence
    auto legendre = [order](double t, double& dp) {
        double p1 = 1.0, p2 = 0.0;
        for (int k = 1; k <= order; ++k) {
            const double p3 = p2;
            p2 = p1;
            p1 = ((2.0 * k - 1.0) * t * p2 - (k - 1.0) * p3) / k;
        }
        dp = order * (t * p1 - p2) / (t * t - 1.0);
        return p1;
    };
    for (int i = 0; i < (order + 1) / 2; ++i) {
        double t = std::cos(std::numbers::pi * (i + 0.75) / (order + 0.5));
        double dp = 0.0;
        for (int it = 0; it < 100; ++it) {
            const double dt = legendre(t, dp) / dp;
            t -= dt;
            if (std::abs(dt) < 1e-16) break;
        }
        legendre(t, dp);
        x[i] = -t;
        x[order - 1 - i] = t;
        w[i] = w[order - 1 - i] = 2.0 / ((1.0 - t * t) * dp * dp);
    }
    if (order % 2 == 1) x[order / 2] = 0.0;
}

namespace {

int panel_order(int n)
{
    for (int q = 8; q >= 2; --q)
        if (n % q == 0) return q;
    return n;
}

void check_domain(Interval d)
{
    if (!std::isfinite(d.a) || !std::isfinite(d.b) || !(d.b > d.a))
        throw UsageError("gauss_legendre: invalid domain");
}

} // namespace

QuadratureGrid gauss_legendre_panels(std::span<const double> edges, int order)
{
    if (edges.size() < 2) throw UsageError("gauss_legendre: need at least one panel");
    if (order < 1) throw UsageError("gauss_legendre: order < 1");
    QuadratureGrid g;
    g.domain = {edges.front(), edges.back()};
    check_domain(g.domain);
    g.order = order;
    g.edges.assign(edges.begin(), edges.end());
    std::vector<double> x, w;
    gauss_legendre_rule(order, x, w);
    for (std::size_t p = 0; p + 1 < edges.size(); ++p) {
        const double a = edges[p], b = edges[p + 1];
        if (!(b > a)) throw UsageError("gauss_legendre: panel edges not increasing");
        const double half = 0.5 * (b - a), mid = 0.5 * (a + b);
        for (int k = 0; k < order; ++k) {
            g.nodes.push_back(mid + half * x[k]);
            g.weights.push_back(half * w[k]);
        }
    }
    return g;
}

QuadratureGrid gauss_legendre(Interval domain, int n)
{
    return gauss_legendre(domain, n, {});
}

QuadratureGrid gauss_legendre(Interval domain, int n, std::span<const double> breaks)
{
    check_domain(domain);
    if (n < 2) throw UsageError("gauss_legendre: N must be at least 2");
    std::vector<double> cuts{domain.a};
    {
        std::vector<double> b(breaks.begin(), breaks.end());
        std::sort(b.begin(), b.end());
        for (double v : b)
            if (v > domain.a && v < domain.b && v > cuts.back()) cuts.push_back(v);
        cuts.push_back(domain.b);
    }
    const int pieces = static_cast<int>(cuts.size()) - 1;
    int order = panel_order(n);
    int total = n / order;
    if (total < pieces) {
        // not enough panels for every piece; fall back to the smallest order
        order = 0;
        for (int q = 2; q <= 8; ++q)
            if (n % q == 0 && n / q >= pieces) {
                order = q;
                break;
            }
        if (order == 0) throw UsageError("gauss_legendre: too few nodes for the breakpoints");
        total = n / order;
    }
    const double len = domain.length();
    std::vector<int> alloc(pieces);
    std::vector<double> ideal(pieces);
    int used = 0;
    for (int p = 0; p < pieces; ++p) {
        ideal[p] = total * (cuts[p + 1] - cuts[p]) / len;
        alloc[p] = std::max(1, static_cast<int>(std::floor(ideal[p])));
        used += alloc[p];
    }
    while (used < total) {
        int best = 0;
        for (int p = 1; p < pieces; ++p)
            if (ideal[p] - alloc[p] > ideal[best] - alloc[best]) best = p;
        ++alloc[best];
        ++used;
    }
    while (used > total) {
        int best = -1;
        for (int p = 0; p < pieces; ++p)
            if (alloc[p] > 1 && (best < 0 || ideal[p] - alloc[p] < ideal[best] - alloc[best])) best = p;
        --alloc[best];
        --used;
    }
    std::vector<double> edges{domain.a};
    for (int p = 0; p < pieces; ++p) {
        const double h = (cuts[p + 1] - cuts[p]) / alloc[p];
        for (int k = 1; k < alloc[p]; ++k) edges.push_back(cuts[p] + k * h);
        edges.push_back(cuts[p + 1]);
    }
    QuadratureGrid g = gauss_legendre_panels(edges, order);
    g.domain = domain;
    return g;
}

// ---- Nyström -----------------------------------------------------------

namespace {

struct PanelBasis {
    std::vector<double> t;    // panel nodes
    std::vector<double> bary; // barycentric weights
};

PanelBasis panel_basis(const QuadratureGrid& g, int p)
{
    PanelBasis b;
    const int q = g.order;
    b.t.assign(g.nodes.begin() + p * q, g.nodes.begin() + (p + 1) * q);
    b.bary.assign(q, 1.0);
    for (int j = 0; j < q; ++j)
        for (int k = 0; k < q; ++k)
            if (k != j) b.bary[j] /= (b.t[j] - b.t[k]);
    return b;
}

// l_j(y) for all j
void lagrange_values(const PanelBasis& b, double y, std::vector<double>& out)
{
    const int q = static_cast<int>(b.t.size());
    out.assign(q, 0.0);
    double denom = 0.0;
    for (int j = 0; j < q; ++j) {
        const double d = y - b.t[j];
        if (d == 0.0) {
            out.assign(q, 0.0);
            out[j] = 1.0;
            return;
        }
        out[j] = b.bary[j] / d;
        denom += out[j];
    }
    for (int j = 0; j < q; ++j) out[j] /= denom;
}

} // namespace

CMatrix nystrom_matrix(const QuadratureGrid& grid, std::span<const int> nodes,
                       std::span<const cplx> left, std::span<const cplx> right, const Kernel& k,
                       NystromRule rule, double decay)
{
    const Eigen::Index n = static_cast<Eigen::Index>(nodes.size());
    if (left.size() != nodes.size() || right.size() != nodes.size())
        throw UsageError("nystrom_matrix: factor size mismatch");
    CMatrix out(n, n);
    std::vector<double> sw(n);
    for (Eigen::Index a = 0; a < n; ++a) sw[a] = std::sqrt(grid.weights[nodes[a]]);

    for (Eigen::Index b = 0; b < n; ++b) {
        const double y = grid.nodes[nodes[b]];
        for (Eigen::Index a = 0; a < n; ++a)
            out(a, b) = left[a] * k(grid.nodes[nodes[a]], y) * right[b] * sw[a] * sw[b];
    }
    if (rule == NystromRule::point) return out;

    // local column of each global node
    std::vector<int> pos(grid.size(), -1);
    for (Eigen::Index a = 0; a < n; ++a) pos[nodes[a]] = static_cast<int>(a);

    const int sub_order = 20;
    std::vector<double> sx, sw_rule;
    gauss_legendre_rule(sub_order, sx, sw_rule);
    const int panels = grid.panels();
    std::vector<PanelBasis> bases(panels);
    std::vector<bool> have(panels, false);
    std::vector<double> lv;
    std::vector<cplx> acc;

    for (Eigen::Index a = 0; a < n; ++a) {
        const int gi = nodes[a];
        const double x = grid.nodes[gi];
        const int pi = grid.panel_of(gi);
        for (int p = std::max(0, pi - 1); p <= std::min(panels - 1, pi + 1); ++p) {
            // skip panels with no active node
            bool any = false;
            for (int j = p * grid.order; j < (p + 1) * grid.order; ++j) any = any || pos[j] >= 0;
            if (!any) continue;
            if (!have[p]) {
                bases[p] = panel_basis(grid, p);
                have[p] = true;
            }
            const PanelBasis& pb = bases[p];
            const double lo = grid.edges[p], hi = grid.edges[p + 1];
            std::vector<double> cuts{lo};
            if (x > lo && x < hi) cuts.push_back(x);
            cuts.push_back(hi);
            acc.assign(grid.order, 0.0);
            for (std::size_t c = 0; c + 1 < cuts.size(); ++c) {
                const double len = cuts[c + 1] - cuts[c];
                const int subs = std::max(1, static_cast<int>(std::ceil(decay * len / 2.0)));
                const double h = len / subs;
                for (int s = 0; s < subs; ++s) {
                    const double s0 = cuts[c] + s * h;
                    for (int r = 0; r < sub_order; ++r) {
                        const double yy = s0 + 0.5 * h * (sx[r] + 1.0);
                        const double ww = 0.5 * h * sw_rule[r];
                        const cplx kv = k(x, yy) * ww;
                        lagrange_values(pb, yy, lv);
                        for (int j = 0; j < grid.order; ++j) acc[j] += kv * lv[j];
                    }
                }
            }
            for (int j = 0; j < grid.order; ++j) {
                const int gj = p * grid.order + j;
                const int b = pos[gj];
                if (b < 0) continue;
                out(a, b) = left[a] * acc[j] * right[b] * sw[a] / sw[b];
            }
        }
    }
    return out;
}

} // namespace bslab
