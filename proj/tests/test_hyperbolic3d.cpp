#include <doctest.h>

#include <cmath>

#include <boost/math/quadrature/exp_sinh.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>

#include "bslab/errors.hpp"
#include "bslab/euclid3d.hpp"
#include "bslab/hyperbolic3d.hpp"
#include "bslab/rng.hpp"

using namespace bslab;

namespace {

// int G_z(d(x, y)) h(|y|) dvol(y) at |x| = rho, with
// cosh d = cosh rho cosh r - sinh rho sinh r mu and dvol = 2 pi sinh^2 r dr dmu.
template <class H>
cplx full_kernel_action(cplx z, double rho, H h, double r_max)
{
    using boost::math::quadrature::gauss_kronrod;
    boost::math::quadrature::tanh_sinh<double> ts;
    // h may be complex; the angular integral is complex too, so expand the product
    auto part = [&](bool im_kernel, bool im_h) {
        auto f = [&](double r) {
            auto g = [&](double mu) {
                const double ch = std::cosh(rho) * std::cosh(r) - std::sinh(rho) * std::sinh(r) * mu;
                const double d = std::acosh(std::max(1.0, ch));
                if (d < 1e-300) return 0.0;
                const cplx v = green_h3(z, d) * 2.0 * M_PI;
                return im_kernel ? v.imag() : v.real();
            };
            const cplx hv = h(r);
            const double s = std::sinh(r);
            return ts.integrate(g, -1.0, 1.0, 1e-12) * (im_h ? hv.imag() : hv.real()) * s * s;
        };
        return gauss_kronrod<double, 31>::integrate(f, 0.0, rho, 8, 1e-11) +
               gauss_kronrod<double, 31>::integrate(f, rho, r_max, 8, 1e-11);
    };
    const double rr = part(false, false), ii = part(true, true), ri = part(false, true), ir = part(true, false);
    return {rr - ii, ri + ir};
}

} // namespace

TEST_SUITE("hyperbolic3d") {

TEST_CASE("green_h3 values")
{
    CHECK(std::abs(green_h3(0.0, 1.0) - std::exp(-1.0) / (4 * M_PI * std::sinh(1.0))) < 1e-16);
    CHECK(std::abs(green_h3(1.0, 0.7) - 1.0 / (4 * M_PI * std::sinh(0.7))) < 1e-16);
    CHECK_THROWS_AS(green_h3(2.0, 1.0), DomainError);
    CHECK_NOTHROW(green_h3(cplx(2.0, 1e-9), 1.0));
}

TEST_CASE("pointwise dominance by G_1")
{
    Rng rng(77, 1);
    int violations = 0;
    for (int i = 0; i < 10000; ++i) {
        const cplx z(rng.uniform(-30, 30), rng.uniform(-30, 30));
        const double rho = rng.uniform(1e-3, 8.0);
        if (std::abs(green_h3(z, rho)) > green_h3(1.0, rho).real() * (1 + 1e-15)) ++violations;
    }
    CHECK(violations == 0);
}

TEST_CASE("heat kernel Laplace transform")
{
    boost::math::quadrature::exp_sinh<double> es;
    const double z = -1.0;
    for (double rho : {0.5, 1.0, 2.0}) {
        auto p = [&](double t) {
            return std::exp(z * t) * std::pow(4 * M_PI * t, -1.5) * (rho / std::sinh(rho)) *
                   std::exp(-t - rho * rho / (4 * t));
        };
        const double lt = es.integrate(p, 1e-13);
        CHECK(std::abs(lt - green_h3(z, rho).real()) <= 1e-6 * green_h3(z, rho).real());
    }
}

TEST_CASE("radial kernel against the full kernel")
{
    using boost::math::quadrature::gauss_kronrod;
    auto f = [](double r) { return cplx(std::exp(-r * r), 0.0); };
    for (cplx z : {cplx(0.0, 0.0), cplx(2.0, 0.5)}) {
        for (double rho : {0.4, 1.3}) {
            // (1/sinh rho) int g(rho, r) sinh r f(r) dr, g = green3d(z - 1)
            auto re = [&](double r) { return (green3d(z - 1.0, rho, r) * std::sinh(r) * f(r)).real(); };
            auto im = [&](double r) { return (green3d(z - 1.0, rho, r) * std::sinh(r) * f(r)).imag(); };
            const cplx radial(gauss_kronrod<double, 61>::integrate(re, 0, rho, 10, 1e-13) +
                                  gauss_kronrod<double, 61>::integrate(re, rho, 8, 10, 1e-13),
                              gauss_kronrod<double, 61>::integrate(im, 0, rho, 10, 1e-13) +
                                  gauss_kronrod<double, 61>::integrate(im, rho, 8, 10, 1e-13));
            const cplx direct = full_kernel_action(z, rho, f, 8.0);
            CHECK(std::abs(radial / std::sinh(rho) - direct) < 1e-6);
        }
    }
}

TEST_CASE("assembled matrix acts like the full kernel")
{
    const HyperbolicPotential v = HyperbolicPotential::bump(std::polar(0.8, 0.6), 2.0);
    const HGrid g;
    const cplx z(0.3, 0.4);
    const CMatrix k = assemble_k_h3(v, g, z);
    const QuadratureGrid grid = make_h3_grid(v, g);
    auto f = [](double r) { return std::exp(-r); };
    CVector phi(grid.size());
    for (std::size_t j = 0; j < grid.size(); ++j)
        phi(j) = std::sqrt(grid.weights[j]) * std::sinh(grid.nodes[j]) * f(grid.nodes[j]);
    const CVector out = k * phi;
    // h = sgn V |V|^{1/2} f
    auto h = [&](double r) {
        const cplx val = v(r);
        const double a = std::abs(val);
        return a > 0 ? val / std::sqrt(a) * f(r) : cplx(0.0);
    };
    for (std::size_t i : {std::size_t(5), std::size_t(30), std::size_t(50)}) {
        const double rho = grid.nodes[i];
        const cplx lhs = out(i) / (std::sqrt(grid.weights[i]) * std::sqrt(v.abs(rho)));
        const cplx rhs = std::sinh(rho) * full_kernel_action(z, rho, h, 2.0);
        CHECK(std::abs(lhs - rhs) < 1e-6);
    }
}

TEST_CASE("assemble_k_h3")
{
    const CMatrix z0 = assemble_k_h3(HyperbolicPotential::zero(), HGrid{}, 0.0);
    CHECK(z0.cwiseAbs().maxCoeff() == 0.0);
    const HyperbolicPotential b = HyperbolicPotential::bump(cplx(0.5, 0.5), 2.0);
    CHECK_THROWS_AS(assemble_k_h3(b, HGrid{}, 3.0), DomainError);
    HGrid fine;
    fine.panel_len = 0.125;
    for (cplx z : {cplx(0.0, 0.0), cplx(1.0, 0.5), cplx(4.0, -1.0), cplx(-3.0, 0.0)}) {
        const double n1 = operator_norm(assemble_k_h3(b, HGrid{}, z));
        const double n2 = operator_norm(assemble_k_h3(b, fine, z));
        CHECK(std::abs(n1 - n2) <= 1e-6);
    }
    HGrid short_box;
    short_box.R = 2.0;
    CHECK_THROWS_AS(assemble_k_h3(HyperbolicPotential::sech2(1.0, 0.5), short_box, 0.0), DomainError);
    CHECK_THROWS_AS(HyperbolicPotential::sech2(1.0, 1.0), DomainError);
}

TEST_CASE("subordination certificate")
{
    const SubordinationCertificate z = subordination_certificate(HyperbolicPotential::zero());
    CHECK(z.spectral.computed == 0.0);
    CHECK(z.spectral.verdict);

    const SubordinationCertificate h = subordination_certificate(HyperbolicPotential::inverse_square(0.8, 1e-3, 3.0));
    CHECK(h.pointwise.computed == doctest::Approx(0.8).epsilon(1e-12));
    CHECK(h.pointwise.verdict);
    // Hardy: the form constant never exceeds the pointwise one
    CHECK(h.spectral.computed <= 0.8);

    const HyperbolicPotential b = scale_to_subordination(HyperbolicPotential::bump(std::polar(1.0, M_PI / 4)), 0.5);
    const SubordinationCertificate c = subordination_certificate(b);
    CHECK(std::abs(c.spectral.computed - 0.5) <= 1e-3);
    CHECK(c.spectral.verdict);
    // limit of ||K(z)|| at the edge
    CHECK(operator_norm(assemble_k_h3(b, HGrid{}, 1.0 - 1e-8)) == doctest::Approx(0.5).epsilon(1e-6));
}

TEST_CASE("stability scan")
{
    const H3StabilityReport z = stability_scan_h3(HyperbolicPotential::zero(), H3ZGrid{});
    CHECK(z.sup_norm == 0.0);

    const HyperbolicPotential b = scale_to_subordination(HyperbolicPotential::bump(std::polar(1.0, M_PI / 4)), 0.5);
    const H3StabilityReport r = stability_scan_h3(b, H3ZGrid{});
    CHECK(r.samples >= 1000);
    CHECK(r.sup_norm <= 0.501);
    CHECK(r.exceedances.empty());
    CHECK(r.dominance_gap <= 1e-6);
    CHECK_FALSE(r.refinement_needed);
    CHECK(r.ok);
}

TEST_CASE("eigenvalue hunt")
{
    const Rect box{-2.0, 3.0, -2.0, 2.0};
    CHECK(eigenvalue_hunt_h3(HyperbolicPotential::zero(), HGrid{}, box).eigenvalues.empty());

    const HyperbolicPotential b = scale_to_subordination(HyperbolicPotential::bump(std::polar(1.0, M_PI / 4)), 0.5);
    CHECK(eigenvalue_hunt_h3(b, HGrid{}, box).eigenvalues.empty());

    const HyperbolicPotential strong = scale_to_subordination(HyperbolicPotential::bump(-1.0), 4.0);
    const SpectralReport bs = eigenvalue_hunt_h3(strong, HGrid{}, box);
    const SpectralReport fd = fd_oracle_h3(strong, 20.0, 4000);
    REQUIRE(!bs.eigenvalues.empty());
    REQUIRE(bs.eigenvalues.size() == fd.eigenvalues.size());
    for (std::size_t i = 0; i < bs.eigenvalues.size(); ++i) {
        CHECK(bs.eigenvalues[i].lambda.real() < 1.0);
        CHECK(std::abs(bs.eigenvalues[i].lambda - fd.eigenvalues[i].lambda) <= 1e-3);
        CHECK(bs.eigenvalues[i].k_norm >= 1.0 - 1e-3);
    }
}

TEST_CASE("half-line fd matrix")
{
    const HyperbolicPotential v = HyperbolicPotential::bump(cplx(-2.0, 1.0), 1.5);
    const std::vector<cplx> raw = fd_eigenvalues_h3(v, 3.0, 30);
    const double h = 0.1;
    CMatrix m = CMatrix::Zero(29, 29);
    for (int k = 0; k < 29; ++k) {
        m(k, k) = 2.0 / (h * h) + 1.0 + v((k + 1) * h);
        if (k + 1 < 29) m(k, k + 1) = m(k + 1, k) = -1.0 / (h * h);
    }
    const CVector dense = general_eig(m);
    REQUIRE(raw.size() == 29);
    for (cplx r : raw) {
        double best = 1e300;
        for (Eigen::Index i = 0; i < dense.size(); ++i) best = std::min(best, std::abs(dense(i) - r));
        CHECK(best < 1e-9 * 400);
    }
}

} // TEST_SUITE
