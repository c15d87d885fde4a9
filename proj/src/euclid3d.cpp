#include "bslab/euclid3d.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>
#include <boost/math/tools/roots.hpp>

#include "bslab/errors.hpp"
#include "bslab/rng.hpp"

namespace bslab {

namespace {

using boost::math::quadrature::gauss_kronrod;

// int_lo^hi f(r) dr, in t = ln r when the profile is singular
template <class F>
double radial_integral(const RadialPotential& v, F f, double lo, double hi)
{
    if (!(hi > lo)) return 0.0;
    if (v.log_spaced()) {
        auto g = [&](double t) {
            const double r = std::exp(t);
            return f(r) * r;
        };
        return gauss_kronrod<double, 61>::integrate(g, std::log(lo), std::log(hi), 15, 1e-14);
    }
    return gauss_kronrod<double, 61>::integrate(f, lo, hi, 15, 1e-14);
}

} // namespace

RadialPotential RadialPotential::zero()
{
    RadialPotential v;
    v.finish();
    return v;
}

RadialPotential RadialPotential::exponential(cplx gamma, double scale)
{
    if (!(scale > 0.0)) throw UsageError("exponential: scale must be positive");
    RadialPotential v;
    v.family_ = Family::exponential;
    v.c_ = gamma;
    v.p_ = scale;
    v.finish();
    return v;
}

RadialPotential RadialPotential::gaussian(cplx gamma, double width)
{
    if (!(width > 0.0)) throw UsageError("gaussian: width must be positive");
    RadialPotential v;
    v.family_ = Family::gaussian;
    v.c_ = gamma;
    v.p_ = width;
    v.finish();
    return v;
}

RadialPotential RadialPotential::inverse_square(double c0, double r0, double r1)
{
    if (!(r0 > 0.0) || !(r1 > r0)) throw UsageError("inverse_square: need 0 < r0 < r1");
    RadialPotential v;
    v.family_ = Family::inverse_square;
    v.c_ = c0 / 4.0;
    v.p_ = r0;
    v.q_ = r1;
    v.finish();
    return v;
}

RadialPotential RadialPotential::step(cplx gamma, double radius)
{
    if (!(radius > 0.0)) throw UsageError("step: radius must be positive");
    RadialPotential v;
    v.family_ = Family::step;
    v.c_ = gamma;
    v.p_ = radius;
    v.finish();
    return v;
}

std::string RadialPotential::name() const
{
    switch (family_) {
    case Family::zero: return "zero";
    case Family::exponential: return "exponential";
    case Family::gaussian: return "gaussian";
    case Family::inverse_square: return "inverse_square";
    case Family::step: return "step";
    }
    return "?";
}

cplx RadialPotential::operator()(double r) const
{
    switch (family_) {
    case Family::zero: return 0.0;
    case Family::exponential: return c_ * std::exp(-r / p_);
    case Family::gaussian: return c_ * std::exp(-(r * r) / (p_ * p_));
    case Family::inverse_square: return (r >= p_ && r <= q_) ? c_ / (r * r) : cplx(0.0);
    case Family::step: return r < p_ ? c_ : cplx(0.0);
    }
    return 0.0;
}

RadialPotential RadialPotential::scaled(double factor) const
{
    RadialPotential v = *this;
    v.c_ *= factor;
    v.finish();
    return v;
}

Interval RadialPotential::support() const
{
    switch (family_) {
    case Family::zero: return {0.0, 0.0};
    case Family::exponential: return {0.0, 45.0 * p_};
    case Family::gaussian: return {0.0, 6.5 * p_};
    case Family::inverse_square: return {p_, q_};
    case Family::step: return {0.0, p_};
    }
    return {0.0, 0.0};
}

double RadialPotential::lp_norm(double p) const
{
    if (family_ == Family::zero || c_ == cplx(0.0)) return 0.0;
    const Interval s = support();
    const double I = radial_integral(*this, [&](double r) { return std::pow(abs(r), p) * r * r; }, s.a, s.b);
    return std::pow(4.0 * M_PI * I, 1.0 / p);
}

void RadialPotential::finish()
{
    l32_ = lp_norm(1.5);
    l3_ = lp_norm(3.0);
    if (family_ == Family::zero || c_ == cplx(0.0)) {
        l1r2_ = 0.0;
        return;
    }
    const Interval s = support();
    l1r2_ = radial_integral(*this, [&](double r) { return abs(r) * r * r; }, s.a, s.b);
}

cplx green3d(cplx z, double r, double rp)
{
    if (z.imag() == 0.0 && z.real() > 0.0) throw DomainError("green3d: z on (0, inf)");
    if (r < 0.0 || rp < 0.0) throw UsageError("green3d: radii must be non-negative");
    const double lo = std::min(r, rp), hi = std::max(r, rp);
    const cplx k = principal_sqrt_minus(z);
    const cplx x = 2.0 * k * lo;
    // lo (1 - e^{-x}) / x
    cplx frac;
    if (std::abs(x) < 1e-4)
        frac = 1.0 - x / 2.0 + x * x / 6.0 - x * x * x / 24.0;
    else
        frac = (1.0 - std::exp(-x)) / x;
    return std::exp(-k * (hi - lo)) * lo * frac;
}

cplx green3d_full(cplx z, double d)
{
    if (z.imag() == 0.0 && z.real() > 0.0) throw DomainError("green3d: z on (0, inf)");
    if (!(d > 0.0)) throw DomainError("green3d: coincident points");
    return std::exp(-principal_sqrt_minus(z) * d) / (4.0 * M_PI * d);
}

QuadratureGrid make_radial_grid(const RadialPotential& v, const RadialGrid& g)
{
    Interval s = v.support();
    if (!(s.b > s.a)) throw UsageError("radial grid: empty support");
    if (g.r_max > 0.0 && g.r_max < s.b) {
        if (!(g.r_max > s.a)) throw DomainError("truncation: r_max below the support");
        const double tail = radial_integral(v, [&](double r) { return v.abs(r) * r * r; }, g.r_max, s.b);
        if (tail > 1e-10 * v.l1_r2())
            throw DomainError("truncation: tail of |V| r^2 beyond r_max too large");
        s.b = g.r_max;
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

CMatrix radial_l_matrix(const RadialPotential& v, const RadialGrid& g)
{
    if (v.l1_r2() == 0.0) return CMatrix::Zero(1, 1);
    const QuadratureGrid grid = make_radial_grid(v, g);
    std::vector<int> nodes;
    std::vector<cplx> f;
    for (std::size_t i = 0; i < grid.size(); ++i) {
        nodes.push_back(static_cast<int>(i));
        f.emplace_back(std::sqrt(v.abs(grid.nodes[i])));
    }
    const Kernel k = [](double r, double rp) { return cplx(std::min(r, rp)); };
    const CMatrix m = nystrom_matrix(grid, nodes, f, f, k, NystromRule::product, 0.0);
    return 0.5 * (m + m.transpose());
}

EnclosureCertificate kato_L_norm(const RadialPotential& v, const RadialGrid& g)
{
    const double n = operator_norm(radial_l_matrix(v, g));
    return EnclosureCertificate::make("kato_L", n, 1.0, "s-wave norm of L at z = 0");
}

EnclosureCertificate fkv_subordination(const RadialPotential& v, const RadialGrid& g)
{
    const HermitianEig e = hermitian_eig(radial_l_matrix(v, g));
    const double c = std::max(0.0, e.values.maxCoeff());
    return EnclosureCertificate::make("fkv_subordination", c, 1.0, "largest eigenvalue of TT^*");
}

namespace {

double rollnik_integral(const RadialPotential& v, double lo, double hi)
{
    boost::math::quadrature::tanh_sinh<double> ts;
    const bool logs = v.log_spaced();
    // inner(r) = int |V(r')| r' ln|(r+r')/(r-r')| dr', split at r. The two
    // argument form hands over the distance to the nearer endpoint, which
    // gives |r - r'| without cancellation.
    auto inner = [&](double r) {
        const double rv = logs ? std::log(r) : r;
        auto piece = [&](double a, double b, bool sing_at_b) {
            if (!(b > a)) return 0.0;
            auto f = [&](double x, double xc) {
                double dv; // |x - rv| in the integration variable
                if (sing_at_b && xc > 0.0)
                    dv = xc;
                else if (!sing_at_b && xc < 0.0)
                    dv = -xc;
                else
                    dv = std::abs(x - rv);
                const double rp = logs ? std::exp(x) : x;
                double d = dv;
                if (logs) d = sing_at_b ? -r * std::expm1(-dv) : r * std::expm1(dv);
                if (d <= 0.0) return 0.0;
                return v.abs(rp) * rp * std::log((r + rp) / d) * (logs ? rp : 1.0);
            };
            return ts.integrate(f, a, b, 1e-12);
        };
        const double lo_v = logs ? std::log(lo) : lo, hi_v = logs ? std::log(hi) : hi;
        return piece(lo_v, rv, true) + piece(rv, hi_v, false);
    };
    auto outer = [&](double r) { return v.abs(r) * r * inner(r); };
    return 8.0 * M_PI * M_PI * radial_integral(v, outer, lo, hi);
}

} // namespace

EnclosureCertificate rollnik_norm(const RadialPotential& v)
{
    if (v.l1_r2() == 0.0) return EnclosureCertificate::make("rollnik", 0.0, 4.0 * M_PI);
    const Interval s = v.support();
    double I = rollnik_integral(v, s.a, s.b);
    std::string note = "radial reduction";
    const bool unbounded_support =
        v.family() == RadialPotential::Family::exponential || v.family() == RadialPotential::Family::gaussian;
    if (unbounded_support) {
        const double wider = rollnik_integral(v, s.a, 1.5 * s.b);
        if (!std::isfinite(wider) || std::abs(wider - I) > 1e-8 * std::abs(I)) {
            I = INFINITY;
            note = "tail growth: integral diverges";
        }
    }
    if (!std::isfinite(I)) return EnclosureCertificate::make("rollnik", INFINITY, 4.0 * M_PI, note);
    return EnclosureCertificate::make("rollnik", std::sqrt(I), 4.0 * M_PI, note);
}

EnclosureCertificate frank_condition(const RadialPotential& v)
{
    return EnclosureCertificate::make("frank_L32", v.l32_norm(), frank_threshold(), "||V||_{3/2}");
}

ImplicationReport implication_chain(const RadialPotential& v, const RadialGrid& g)
{
    ImplicationReport r;
    r.frank = frank_condition(v);
    r.rollnik = rollnik_norm(v);
    r.fkv = fkv_subordination(v, g);
    r.kato = kato_L_norm(v, g);
    auto fmt = [](const EnclosureCertificate& c) {
        std::ostringstream s;
        s << c.kind << " = " << c.computed << " vs " << c.threshold;
        return s.str();
    };
    if (r.frank.verdict && !r.rollnik.verdict)
        r.violations.push_back("frank passes but rollnik fails: " + fmt(r.frank) + ", " + fmt(r.rollnik));
    if (r.rollnik.verdict && !r.fkv.verdict)
        r.violations.push_back("rollnik passes but fkv fails: " + fmt(r.rollnik) + ", " + fmt(r.fkv));
    if (r.fkv.verdict != r.kato.verdict)
        r.violations.push_back("fkv and kato disagree: " + fmt(r.fkv) + ", " + fmt(r.kato));
    return r;
}

GammaSweep gamma_sweep(const RadialPotential& unit, const std::vector<double>& gammas, const RadialGrid& g)
{
    GammaSweep s;
    s.gammas = gammas;
    const ImplicationReport base = implication_chain(unit, g);
    auto boundary = [](const EnclosureCertificate& c) {
        return c.computed > 0.0 ? c.threshold / c.computed : INFINITY;
    };
    s.gamma_frank = boundary(base.frank);
    s.gamma_rollnik = boundary(base.rollnik);
    s.gamma_fkv = boundary(base.fkv);
    s.gamma_kato = boundary(base.kato);
    const double tol = 1e-6;
    s.boundaries_ordered = s.gamma_frank <= s.gamma_rollnik * (1 + tol) &&
                           s.gamma_rollnik <= s.gamma_fkv * (1 + tol) &&
                           std::abs(s.gamma_fkv - s.gamma_kato) <= tol * s.gamma_fkv;
    for (double gamma : gammas) {
        s.rows.push_back(implication_chain(unit.scaled(gamma), g));
        for (auto& msg : s.rows.back().violations) {
            std::ostringstream o;
            o << "gamma = " << gamma << ": " << msg;
            s.violations.push_back(o.str());
        }
    }
    return s;
}

MonteCarloEstimate rollnik_monte_carlo(const RadialPotential& v, std::uint64_t samples, std::uint64_t seed)
{
    MonteCarloEstimate est;
    est.samples = samples;
    est.seed = seed;
    if (v.l1_r2() == 0.0 || samples == 0) return est;

    // inverse-CDF table for r with density |V(r)| r^2 (in t = ln r when log spaced)
    const Interval s = v.support();
    const bool logs = v.log_spaced();
    const int nt = 1 << 14;
    const double u0 = logs ? std::log(s.a) : s.a, u1 = logs ? std::log(s.b) : s.b;
    std::vector<double> u(nt + 1), cdf(nt + 1, 0.0);
    auto dens = [&](double uu) {
        const double r = logs ? std::exp(uu) : uu;
        return v.abs(r) * r * r * (logs ? r : 1.0);
    };
    double prev = dens(u0);
    u[0] = u0;
    for (int i = 1; i <= nt; ++i) {
        u[i] = u0 + (u1 - u0) * i / nt;
        // midpoint value avoids the jump at the end of a step
        const double mid = dens(0.5 * (u[i - 1] + u[i]));
        const double cur = dens(u[i]);
        cdf[i] = cdf[i - 1] + (u[i] - u[i - 1]) * (prev + 4.0 * mid + cur) / 6.0;
        prev = cur;
    }
    const double total = cdf.back();
    const double l1 = 4.0 * M_PI * v.l1_r2();

    const std::uint64_t chunk = 100000;
    double sum = 0.0, sum2 = 0.0;
    for (std::uint64_t c = 0, done = 0; done < samples; ++c) {
        const std::uint64_t n = std::min(chunk, samples - done);
        Rng rng(seed, c);
        for (std::uint64_t i = 0; i < n; ++i) {
            const double target = rng.uniform() * total;
            const auto it = std::upper_bound(cdf.begin(), cdf.end(), target);
            const std::size_t j = std::clamp<std::size_t>(static_cast<std::size_t>(it - cdf.begin()), 1, nt);
            const double frac = (target - cdf[j - 1]) / std::max(cdf[j] - cdf[j - 1], 1e-300);
            const double uu = u[j - 1] + frac * (u[j] - u[j - 1]);
            const double r = logs ? std::exp(uu) : uu;

            auto direction = [&rng](double out[3]) {
                const double ct = rng.uniform(-1.0, 1.0), ph = rng.uniform(0.0, 2.0 * M_PI);
                const double st = std::sqrt(std::max(0.0, 1.0 - ct * ct));
                out[0] = st * std::cos(ph);
                out[1] = st * std::sin(ph);
                out[2] = ct;
            };
            double dx[3], dw[3];
            direction(dx);
            direction(dw);
            const double q = rng.uniform();
            const double w = q / (1.0 - q);
            double y2 = 0.0;
            for (int k = 0; k < 3; ++k) {
                const double yk = r * dx[k] + w * dw[k];
                y2 += yk * yk;
            }
            const double val = l1 * v.abs(std::sqrt(y2)) * 4.0 * M_PI * (1.0 + w) * (1.0 + w);
            sum += val;
            sum2 += val * val;
        }
        done += n;
    }
    const double mean = sum / static_cast<double>(samples);
    const double var = std::max(0.0, sum2 / static_cast<double>(samples) - mean * mean);
    const double se = std::sqrt(var / static_cast<double>(samples));
    est.value = std::sqrt(mean);
    est.std_error = mean > 0.0 ? se / (2.0 * est.value) : 0.0;
    return est;
}

HardyExtrapolation hardy_extrapolation(double c0, const std::vector<double>& cutoffs, const RadialGrid& g)
{
    if (cutoffs.size() != 3) throw UsageError("hardy_extrapolation: need exactly three cutoffs");
    HardyExtrapolation h;
    h.c0 = c0;
    h.cutoffs = cutoffs;
    const double r1 = 1.0;
    std::vector<double> T, y;
    for (double r0 : cutoffs) {
        const double c = fkv_subordination(RadialPotential::inverse_square(c0, r0, r1), g).computed;
        h.values.push_back(c);
        T.push_back(std::log(r1 / r0));
        y.push_back(1.0 / c);
    }
    // 1/c = p + q / (T + b)^2 through the three points
    auto inv2 = [](double t) { return 1.0 / (t * t); };
    auto f = [&](double b) {
        return (y[0] - y[1]) * (inv2(T[1] + b) - inv2(T[2] + b)) - (y[1] - y[2]) * (inv2(T[0] + b) - inv2(T[1] + b));
    };
    const double tmin = *std::min_element(T.begin(), T.end());
    double lo = -tmin + 1e-6, hi = lo;
    double flo = f(lo), fhi = flo;
    bool bracket = false;
    for (int k = 0; k < 400; ++k) {
        hi = -tmin + 1e-6 + 0.05 * (k + 1) * (1 + k / 20.0);
        fhi = f(hi);
        if ((flo < 0) != (fhi < 0)) {
            bracket = true;
            break;
        }
        lo = hi;
        flo = fhi;
    }
    if (!bracket) throw NumericalFailure("hardy_extrapolation: no fit through the three cutoffs");
    boost::math::tools::eps_tolerance<double> tol(50);
    std::uintmax_t it = 200;
    auto r = boost::math::tools::toms748_solve(f, lo, hi, flo, fhi, tol, it);
    const double b = 0.5 * (r.first + r.second);
    const double q = (y[0] - y[1]) / (inv2(T[0] + b) - inv2(T[1] + b));
    const double p = y[0] - q * inv2(T[0] + b);
    h.b = b;
    h.limit = 1.0 / p;
    h.a = q / p;
    return h;
}

} // namespace bslab
