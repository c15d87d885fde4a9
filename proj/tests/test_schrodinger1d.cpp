#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/tools/roots.hpp>

#include "bslab/errors.hpp"
#include "bslab/schrodinger1d.hpp"

using namespace bslab;

namespace {

// Even ground state of the well -gamma on [-1, 1]: k tan k = kappa, k^2 + kappa^2 = gamma.
double square_well_ground(double gamma)
{
    auto f = [gamma](double kappa) {
        const double k = std::sqrt(gamma - kappa * kappa);
        return k * std::tan(k) - kappa;
    };
    boost::math::tools::eps_tolerance<double> tol(50);
    std::uintmax_t it = 200;
    const double top = std::min(std::sqrt(gamma), M_PI / 2) * (1.0 - 1e-14);
    auto r = boost::math::tools::toms748_solve(f, 1e-14, top, tol, it);
    const double kappa = 0.5 * (r.first + r.second);
    return -kappa * kappa;
}

// Matching condition for V = gamma on [0, 1]:
// (mu^2 + kappa^2) sinh mu + 2 kappa mu cosh mu = 0, mu^2 = gamma + kappa^2, lambda = -kappa^2.
cplx step_matching(cplx gamma, cplx lambda)
{
    const cplx kappa = std::sqrt(-lambda);
    const cplx mu = std::sqrt(gamma + kappa * kappa);
    return (mu * mu + kappa * kappa) * std::sinh(mu) / mu + 2.0 * kappa * std::cosh(mu);
}

cplx step_root(cplx gamma, cplx seed)
{
    cplx z0 = seed, z1 = seed * (1.0 + 1e-6);
    cplx f0 = step_matching(gamma, z0), f1 = step_matching(gamma, z1);
    for (int i = 0; i < 100 && std::abs(z1 - z0) > 1e-15 * std::abs(z1); ++i) {
        const cplx z2 = z1 - f1 * (z1 - z0) / (f1 - f0);
        z0 = z1;
        f0 = f1;
        z1 = z2;
        f1 = step_matching(gamma, z1);
    }
    return z1;
}

} // namespace

TEST_SUITE("schrodinger1d") {

TEST_CASE("green1d values and bound")
{
    CHECK(std::abs(green1d(-1.0, 0.3, 0.3) - 0.5) < 1e-15);
    CHECK(std::abs(green1d(-4.0, 0.0, 1.0) - std::exp(-2.0) / 4.0) < 1e-15);
    CHECK_THROWS_AS(green1d(2.0, 0.0, 1.0), DomainError);
    CHECK_THROWS_AS(green1d(0.0, 0.0, 1.0), DomainError);

    for (cplx z : {cplx(-1, 0), cplx(3, 0.2), cplx(0.1, -2), cplx(-5, 5)})
        for (double d : {0.0, 0.1, 1.0, 7.0})
            CHECK(std::abs(green1d(z, 0.0, d)) <= 1.0 / (2.0 * std::sqrt(std::abs(z))) * (1 + 1e-15));
}

TEST_CASE("green1d solves the resolvent equation off the diagonal")
{
    // fourth-order difference for -u''
    const double h = 1e-2;
    for (cplx z : {cplx(-1, 0), cplx(2, 1), cplx(-0.5, -3)}) {
        for (double x : {-1.3, 0.4, 2.2}) {
            const double y = 0.0;
            auto g = [&](double t) { return green1d(z, t, y); };
            const cplx d2 = (-g(x + 2 * h) + 16.0 * g(x + h) - 30.0 * g(x) + 16.0 * g(x - h) - g(x - 2 * h)) /
                            (12.0 * h * h);
            const cplx r = -d2 - z * g(x);
            CHECK(std::abs(r) < 1e-7 * std::max(1.0, std::abs(z)));
        }
    }
}

TEST_CASE("potential factors and norms")
{
    const std::vector<Potential1D> vs{Potential1D::complex_step({0.3, -2.0}, 0.0, 1.0),
                                      Potential1D::poschl_teller(1.0),
                                      Potential1D::gaussian({-1.0, 0.5}, 0.7)};
    for (const auto& v : vs) {
        for (double x : {-3.0, -0.2, 0.0, 0.5, 0.99, 2.0}) {
            const cplx prod = v.b_conj_factor(x) * v.a_factor(x);
            CHECK(std::abs(prod - v(x)) <= 1e-15 * std::max(1.0, std::abs(v(x))));
        }
        // L1 norm against adaptive quadrature over a wide box
        using boost::math::quadrature::gauss_kronrod;
        double q = 0.0;
        std::vector<double> cuts{-60.0};
        for (double b : v.breakpoints()) cuts.push_back(b);
        cuts.push_back(60.0);
        for (std::size_t i = 0; i + 1 < cuts.size(); ++i)
            q += gauss_kronrod<double, 61>::integrate([&](double x) { return std::abs(v(x)); }, cuts[i],
                                                      cuts[i + 1], 15, 1e-14);
        CHECK(std::abs(q - v.l1_norm()) < 1e-10 * v.l1_norm());
    }
    CHECK(Potential1D::zero().l1_norm() == 0.0);
    CHECK(Potential1D::zero().b_conj_factor(1.0) == cplx(0.0));
}

TEST_CASE("tabulated potential from csv")
{
    const auto path = std::filesystem::temp_directory_path() / "bslab_tab_test.csv";
    {
        std::ofstream out(path);
        out << "x,re,im\n-1,0,0\n0,-2,1\n1,0,0\n";
    }
    const Potential1D v = Potential1D::from_csv(path.string());
    std::filesystem::remove(path);
    CHECK(std::abs(v(0.0) - cplx(-2, 1)) < 1e-15);
    CHECK(std::abs(v(0.5) - cplx(-1, 0.5)) < 1e-15);
    CHECK(v(1.5) == cplx(0.0));
    // triangle of height sqrt 5, base 2
    CHECK(std::abs(v.l1_norm() - std::sqrt(5.0)) < 1e-12);
    CHECK(v.tail_l1(0.5) == doctest::Approx(std::sqrt(5.0) / 4).epsilon(1e-10));
}

TEST_CASE("assemble_k")
{
    const Potential1D zero = Potential1D::zero();
    const CMatrix k0 = assemble_k(zero, Grid1D{40.0, 64}, -1.0);
    CHECK(k0.rows() == 64);
    CHECK(k0.cwiseAbs().maxCoeff() == 0.0);

    const Potential1D step = Potential1D::complex_step({0.0, 2.0}, 0.0, 1.0);
    CHECK_THROWS_AS(assemble_k(step, Grid1D{40.0, 400}, 0.5), DomainError);
    CHECK_THROWS_AS(assemble_k(Potential1D::gaussian(1.0, 3.0), Grid1D{5.0, 400}, -1.0), DomainError);
    const CMatrix k = assemble_k(step, Grid1D{40.0, 400}, -1.0);
    CHECK(k.norm() <= 2.0 / 2.0 + 1e-4);

    // grid refinement for a smooth potential
    const Potential1D g = Potential1D::gaussian({0.5, 1.0}, 1.0);
    for (cplx z : {cplx(-1, 0), cplx(0.5, 0.5), cplx(2, -1)}) {
        const double n1 = operator_norm(assemble_k(g, Grid1D{10.0, 320}, z));
        const double n2 = operator_norm(assemble_k(g, Grid1D{10.0, 640}, z));
        CHECK(std::abs(n1 - n2) <= 1e-6);
    }
}

TEST_CASE("hs bound")
{
    const Grid1D grid{40.0, 800};
    const HsCheck c0 = hs_bound_check(Potential1D::zero(), -1.0, grid);
    CHECK(c0.hs == 0.0);
    CHECK(c0.bound == 0.0);
    CHECK(c0.ok);

    const Potential1D step = Potential1D::complex_step({0.0, 2.0}, 0.0, 1.0);
    const HsCheck c1 = hs_bound_check(step, -1.0, grid);
    CHECK(c1.bound == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(c1.hs <= 1.0001);
    CHECK(c1.ok);
    const HsCheck c2 = hs_bound_check(step, -100.0, grid);
    CHECK(c2.bound == doctest::Approx(0.1).epsilon(1e-15));
    CHECK(c2.hs <= 0.1001);

    const Potential1D pt = Potential1D::poschl_teller(1.0);
    for (int k = -8; k <= 16; ++k) {
        const double r = std::pow(10.0, k / 4.0);
        for (double arg : {0.3, 1.5, 3.0, -2.0})
            CHECK(hs_bound_check(pt, std::polar(r, arg), Grid1D{20.0, 400}).ok);
    }
}

TEST_CASE("davies disk")
{
    for (double g : {1.0, 2.0, 4.0})
        CHECK(davies_disk(Potential1D::complex_step({0.0, g}, 0.0, 1.0)).threshold ==
              doctest::Approx(g * g / 4).epsilon(1e-15));
    CHECK(davies_disk(Potential1D::zero()).threshold == 0.0);
    CHECK(davies_containment(Potential1D::zero(), {}).verdict);

    const Potential1D pt = Potential1D::poschl_teller(1.0);
    CHECK(davies_disk(pt).threshold == doctest::Approx(4.0).epsilon(1e-15));
    const SpectralReport fd = fd_oracle(pt, 20.0, 4000);
    REQUIRE(fd.eigenvalues.size() == 1);
    CHECK(std::abs(fd.eigenvalues[0].lambda) <= 4.0);
    CHECK(fd.certificates.back().verdict);
}

TEST_CASE("bs roots: Poschl-Teller against the fd oracle")
{
    const Potential1D pt = Potential1D::poschl_teller(1.0);
    const SpectralReport fd = fd_oracle(pt, 20.0, 4000);
    const SpectralReport bs = find_eigenvalues_bs(pt, Grid1D{20.0, 400}, Rect{-2.0, 1.0, -1.0, 1.0});
    REQUIRE(fd.eigenvalues.size() == 1);
    REQUIRE(bs.eigenvalues.size() == 1);
    CHECK(std::abs(bs.eigenvalues[0].lambda - fd.eigenvalues[0].lambda) <= 1e-4);
    // -(s - n)^2 for the reflectionless well
    CHECK(std::abs(bs.eigenvalues[0].lambda - cplx(-1.0)) <= 1e-4);
    CHECK(bs.eigenvalues[0].residual <= 1e-6);
    CHECK(bs.eigenvalues[0].k_norm >= 1.0 - 1e-3);
}

TEST_CASE("bs roots: square well against the transcendental root")
{
    const Potential1D w = Potential1D::complex_step(-0.5, -1.0, 1.0);
    const SpectralReport bs = find_eigenvalues_bs(w, Grid1D{40.0, 1600}, Rect{-1.0, 1.0, -1.0, 1.0});
    REQUIRE(!bs.eigenvalues.empty());
    const double oracle = square_well_ground(0.5);
    CHECK(std::abs(bs.eigenvalues.front().lambda - oracle) <= 1e-5);
    for (auto& e : bs.eigenvalues) CHECK(e.k_norm >= 1.0 - 1e-3);
}

TEST_CASE("bs roots: complex step")
{
    const Grid1D grid{40.0, 1600};
    for (double g : {1.0, 2.0, 4.0}) {
        const Potential1D v = Potential1D::complex_step({0.0, g}, 0.0, 1.0);
        const double r = g * g / 4 + 0.5;
        const SpectralReport bs = find_eigenvalues_bs(v, grid, Rect{-r, r, -r, r});
        REQUIRE(!bs.eigenvalues.empty());
        for (auto& e : bs.eigenvalues) {
            CHECK(std::abs(e.lambda) <= g * g / 4 + 1e-3);
            CHECK(e.k_norm >= 1.0 - 1e-3);
            CHECK(std::abs(e.lambda - e.lambda_coarse) <= 1e-4);
            const cplx oracle = step_root({0.0, g}, e.lambda);
            CHECK(std::abs(step_matching({0.0, g}, oracle)) < 1e-12);
            CHECK(std::abs(e.lambda - oracle) <= 1e-8);
        }
        CHECK(bs.certificates.back().verdict);
    }
}

TEST_CASE("fd oracle")
{
    const SpectralReport z = fd_oracle(Potential1D::zero(), 40.0, 2000);
    CHECK(z.eigenvalues.empty());

    const Potential1D v = Potential1D::complex_step({0.0, 4.0}, 0.0, 1.0);
    const SpectralReport fd = fd_oracle(v, 20.0, 4000);
    const SpectralReport bs = find_eigenvalues_bs(v, Grid1D{40.0, 1600}, Rect{-4.5, 4.5, -4.5, 4.5});
    REQUIRE(fd.eigenvalues.size() == bs.eigenvalues.size());
    for (std::size_t i = 0; i < fd.eigenvalues.size(); ++i)
        CHECK(std::abs(fd.eigenvalues[i].lambda - bs.eigenvalues[i].lambda) <= 1e-3);

    // raw eigenvalues match a dense solve on a small box
    const std::vector<cplx> raw = fd_eigenvalues(v, 2.0, 40);
    const double h = 4.0 / 40;
    CMatrix m = CMatrix::Zero(39, 39);
    for (int k = 0; k < 39; ++k) {
        m(k, k) = 2.0 / (h * h) + v.average(-2.0 + (k + 1) * h);
        if (k + 1 < 39) m(k, k + 1) = m(k + 1, k) = -1.0 / (h * h);
    }
    const CVector dense = general_eig(m);
    REQUIRE(raw.size() == 39);
    for (cplx r : raw) {
        double best = 1e300;
        for (Eigen::Index i = 0; i < dense.size(); ++i) best = std::min(best, std::abs(dense(i) - r));
        CHECK(best < 1e-9 * 400);
    }
}

} // TEST_SUITE
