#include "bslab/hunt.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "bslab/errors.hpp"

namespace bslab {

std::string to_string(Method m) { return m == Method::bs_root ? "bs_root" : "fd_oracle"; }

namespace {

struct NewtonResult {
    cplx z;
    double f = 1e300;
    int iterations = 0;
    bool ok = false;
    std::string reason;
};

// eigenvalue of K(z) nearest -1, with d mu / dz from a centred difference of K
struct MuEval {
    cplx mu;
    cplx dmu;
};

MuEval mu_and_derivative(const KFamily& family, cplx z, int level)
{
    const CMatrix k = family(z, level);
    if (k.size() == 0) return {0.0, 0.0};
    const NearestEig ne = nearest_eigenvalue(k, -1.0);
    const double h = 1e-5 * std::max(1.0, std::abs(z));
    const CMatrix dk = (family(z + h, level) - family(z - h, level)) / (2.0 * h);
    const cplx num = ne.left.dot(dk * ne.right); // left^H K' right
    const cplx den = ne.left.dot(ne.right);
    return {ne.value, std::abs(den) > 0.0 ? num / den : cplx(0.0)};
}

NewtonResult newton(const KFamily& family, cplx z0, int level, const Rect& box,
                    const HuntOptions& opt)
{
    NewtonResult r;
    cplx z = z0;
    MuEval e = mu_and_derivative(family, z, level);
    double f = std::abs(e.mu + 1.0);
    const double scale = std::max(box.re_max - box.re_min, box.im_max - box.im_min);
    for (int it = 0; it < opt.max_newton; ++it) {
        r.iterations = it + 1;
        if (f <= 1e-13) break;
        if (std::abs(e.dmu) == 0.0) {
            r.reason = "zero derivative";
            break;
        }
        cplx dz = -(e.mu + 1.0) / e.dmu;
        if (std::abs(dz) > 0.5 * scale) dz *= 0.5 * scale / std::abs(dz);
        // backtrack while the residual grows
        cplx zn;
        MuEval en;
        double fn = 1e300;
        for (int half = 0; half < 6; ++half) {
            zn = z + dz;
            if (dist_to_cut(zn, opt.cut_start) < opt.cut_margin) {
                dz *= 0.5;
                continue;
            }
            en = mu_and_derivative(family, zn, level);
            fn = std::abs(en.mu + 1.0);
            if (fn < f) break;
            dz *= 0.5;
        }
        if (fn >= f && fn >= 1e300) {
            r.reason = "iterate entered the cut band";
            r.z = z;
            r.f = f;
            return r;
        }
        const double step = std::abs(zn - z);
        z = zn;
        e = en;
        f = fn;
        if (!(z.real() >= box.re_min - 0.25 * scale && z.real() <= box.re_max + 0.25 * scale &&
              z.imag() >= box.im_min - 0.25 * scale && z.imag() <= box.im_max + 0.25 * scale)) {
            r.reason = "left the search rectangle";
            r.z = z;
            r.f = f;
            return r;
        }
        if (step <= 1e-14 * std::max(1.0, std::abs(z))) break;
    }
    r.z = z;
    r.f = f;
    r.ok = f <= opt.tol;
    if (!r.ok && r.reason.empty()) r.reason = "no convergence";
    return r;
}

} // namespace

HuntResult hunt_roots(const KFamily& family, const Rect& search, const HuntOptions& opt)
{
    if (!(search.re_max > search.re_min) || !(search.im_max >= search.im_min))
        throw UsageError("hunt: empty search rectangle");
    if (opt.scan_nx < 2 || opt.scan_ny < 1) throw UsageError("hunt: scan grid too small");

    const int nx = opt.scan_nx;
    const int ny = search.im_max > search.im_min ? opt.scan_ny : 1;
    std::vector<double> d(static_cast<std::size_t>(nx) * ny, -1.0);
    std::vector<cplx> zs(d.size());
    for (int j = 0; j < ny; ++j)
        for (int i = 0; i < nx; ++i) {
            const double re = search.re_min + (search.re_max - search.re_min) * i / (nx - 1);
            const double im = ny > 1 ? search.im_min + (search.im_max - search.im_min) * j / (ny - 1)
                                     : search.im_min;
            const cplx z(re, im);
            zs[j * nx + i] = z;
            if (dist_to_cut(z, opt.cut_start) < opt.cut_margin) continue;
            const CMatrix k = family(z, 0);
            if (k.size() == 0) {
                d[j * nx + i] = 1.0;
                continue;
            }
            const CVector mu = eigenvalues_fast(k);
            double best = 1e300;
            for (Eigen::Index t = 0; t < mu.size(); ++t) best = std::min(best, std::abs(mu(t) + 1.0));
            d[j * nx + i] = best;
        }

    struct Seed {
        cplx z;
        double d;
    };
    std::vector<Seed> seeds;
    for (int j = 0; j < ny; ++j)
        for (int i = 0; i < nx; ++i) {
            const double v = d[j * nx + i];
            if (v < 0.0 || v > 0.9) continue;
            bool minimum = true;
            for (int dj = -1; dj <= 1 && minimum; ++dj)
                for (int di = -1; di <= 1; ++di) {
                    const int a = i + di, b = j + dj;
                    if ((di == 0 && dj == 0) || a < 0 || b < 0 || a >= nx || b >= ny) continue;
                    const double w = d[b * nx + a];
                    if (w >= 0.0 && w < v) {
                        minimum = false;
                        break;
                    }
                }
            if (minimum) seeds.push_back({zs[j * nx + i], v});
        }
    std::sort(seeds.begin(), seeds.end(), [](const Seed& a, const Seed& b) { return a.d < b.d; });

    HuntResult out;
    auto known = [&](cplx z) {
        for (auto& r : out.roots)
            if (std::abs(r.lambda_coarse - z) <= 1e-7 * std::max(1.0, std::abs(z))) return true;
        return false;
    };
    for (const Seed& s : seeds) {
        NewtonResult n1 = newton(family, s.z, 1, search, opt);
        if (!n1.ok) {
            out.rejected.push_back({n1.z, n1.reason});
            continue;
        }
        if (!search.contains(n1.z) || dist_to_cut(n1.z, opt.cut_start) < opt.cut_margin) {
            out.rejected.push_back({n1.z, "converged outside the search region"});
            continue;
        }
        if (known(n1.z)) continue;
        NewtonResult n2 = newton(family, n1.z, 2, search, opt);
        if (!n2.ok) {
            out.rejected.push_back({n1.z, "no convergence on the doubled grid: " + n2.reason});
            continue;
        }
        if (std::abs(n2.z - n1.z) > opt.verify_tol) {
            std::ostringstream msg;
            msg << "grid drift " << std::abs(n2.z - n1.z);
            out.rejected.push_back({n1.z, msg.str()});
            continue;
        }
        EigenEntry e;
        e.lambda = n2.z;
        e.lambda_coarse = n1.z;
        e.residual = n2.f;
        e.method = Method::bs_root;
        e.k_norm = operator_norm(family(n2.z, 2));
        out.roots.push_back(e);
    }
    std::sort(out.roots.begin(), out.roots.end(), [](const EigenEntry& a, const EigenEntry& b) {
        if (a.lambda.real() != b.lambda.real()) return a.lambda.real() < b.lambda.real();
        return a.lambda.imag() < b.lambda.imag();
    });
    return out;
}

HuntResult fd_filter(const FdSolver& solve, double extent, int n, const FdFilter& f)
{
    if (n % 2 != 0) throw UsageError("fd oracle: number of intervals must be even");
    HuntResult out;
    auto admissible = [&](cplx z) {
        return std::abs(z - f.cut_start) <= f.radius && dist_to_cut(z, f.cut_start) >= f.cut_margin;
    };
    std::vector<cplx> cand;
    for (cplx z : solve(extent, n))
        if (admissible(z)) cand.push_back(z);
    if (cand.empty()) return out;
    const std::vector<cplx> fine = solve(extent, 2 * n);
    const int n_wide = static_cast<int>(std::lround(n * f.l_factor));
    const std::vector<cplx> wide = solve(extent * n_wide / n, n_wide);

    auto nearest = [](const std::vector<cplx>& s, cplx z) {
        cplx best(INFINITY, 0.0);
        for (cplx w : s)
            if (std::abs(w - z) < std::abs(best - z)) best = w;
        return best;
    };
    for (cplx z : cand) {
        const cplx zf = nearest(fine, z);
        if (std::abs(zf - z) > f.h_tol) {
            out.rejected.push_back({z, "unstable under h -> h/2"});
            continue;
        }
        if (std::abs(nearest(wide, z) - z) > f.l_tol) {
            out.rejected.push_back({z, "unstable under box enlargement"});
            continue;
        }
        EigenEntry e;
        e.lambda = (4.0 * zf - z) / 3.0;
        e.lambda_coarse = z;
        e.residual = std::abs(zf - z);
        e.method = Method::fd_oracle;
        e.grid_n = n;
        e.extent = extent;
        out.roots.push_back(e);
    }
    std::sort(out.roots.begin(), out.roots.end(), [](const EigenEntry& a, const EigenEntry& b) {
        if (a.lambda.real() != b.lambda.real()) return a.lambda.real() < b.lambda.real();
        return a.lambda.imag() < b.lambda.imag();
    });
    return out;
}

} // namespace bslab
