#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "bslab/errors.hpp"
#include "bslab/numerics.hpp"
#include "test_util.hpp"

using namespace bslab;

TEST_SUITE("numerics") {

TEST_CASE("principal_sqrt_minus branch")
{
    CHECK(std::abs(principal_sqrt_minus(-1.0) - 1.0) < 1e-15);
    CHECK(std::abs(principal_sqrt_minus(-4.0) - 2.0) < 1e-15);
    CHECK(principal_sqrt_minus(0.0) == cplx(0.0, 0.0));

    const cplx r = principal_sqrt_minus(cplx(0.0, 1.0));
    CHECK(r.real() > 0.0);
    CHECK(std::abs(r * r - cplx(0.0, -1.0)) < 1e-15);

    std::mt19937_64 gen(1);
    std::uniform_real_distribution<double> u(-10.0, 10.0);
    for (int k = 0; k < 1000; ++k) {
        const cplx z(u(gen), u(gen));
        const cplx a = principal_sqrt_minus(z);
        CHECK(a.real() >= 0.0);
        CHECK(std::abs(a * a + z) < 1e-13 * (1.0 + std::abs(z)));
        CHECK(std::abs(principal_sqrt_minus(std::conj(z)) - std::conj(a)) < 1e-14 * (1.0 + std::abs(a)));
    }
}

TEST_CASE("hermitian_eig")
{
    {
        const auto e = hermitian_eig(CMatrix::Identity(2, 2));
        CHECK(e.values(0) == doctest::Approx(1.0));
        CHECK(e.values(1) == doctest::Approx(1.0));
    }
    {
        CMatrix m = CMatrix::Zero(2, 2);
        m(0, 0) = 5.0;
        m(1, 1) = -3.0;
        const auto e = hermitian_eig(m);
        CHECK(e.values(0) == doctest::Approx(-3.0));
        CHECK(e.values(1) == doctest::Approx(5.0));
        CHECK(std::abs(e.vectors(1, 0)) == doctest::Approx(1.0));
        CHECK(std::abs(e.vectors(0, 1)) == doctest::Approx(1.0));
    }
    {
        const CMatrix m = test::random_hermitian(8, 42);
        const auto e = hermitian_eig(m);
        const double norm = operator_norm(m);
        CHECK((m * e.vectors - e.vectors * e.values.asDiagonal()).norm() <= 1e-10 * norm);
        CHECK((e.vectors.adjoint() * e.vectors - CMatrix::Identity(8, 8)).norm() <= 1e-10);
    }
    CMatrix bad = CMatrix::Zero(2, 2);
    bad(0, 1) = 1.0;
    CHECK_THROWS_AS(hermitian_eig(bad), UsageError);
}

TEST_CASE("general_eig")
{
    CMatrix nil = CMatrix::Zero(2, 2);
    nil(0, 1) = 1.0;
    CVector e = general_eig(nil);
    CHECK(std::abs(e(0)) < 1e-7);
    CHECK(std::abs(e(1)) < 1e-7);

    CMatrix rot = CMatrix::Zero(2, 2);
    rot(0, 1) = -1.0;
    rot(1, 0) = 1.0;
    e = general_eig(rot);
    CHECK(test::multiset_distance(e, {cplx(0, 1), cplx(0, -1)}) < 1e-14);

    // companion of (x - 2)(x + 3i) = x^2 + (3i - 2) x - 6i
    CMatrix comp = CMatrix::Zero(2, 2);
    comp(0, 0) = -(cplx(-2.0, 3.0));
    comp(0, 1) = cplx(0.0, 6.0);
    comp(1, 0) = 1.0;
    e = general_eig(comp);
    CHECK(test::multiset_distance(e, {cplx(2, 0), cplx(0, -3)}) < 1e-13);

    // spectral radius below the norm
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        const CMatrix m = test::random_complex(7, 7, seed);
        const double nrm = operator_norm(m);
        const auto ge = general_eig_vectors(m);
        for (Eigen::Index k = 0; k < ge.values.size(); ++k) {
            CHECK(std::abs(ge.values(k)) <= nrm * (1 + 1e-8));
            CHECK(smallest_singular_value(m - ge.values(k) * CMatrix::Identity(7, 7)) <= 1e-8 * nrm);
        }
    }
}

TEST_CASE("operator_norm")
{
    CHECK(operator_norm(CMatrix::Zero(3, 3)) == 0.0);
    CMatrix d = CMatrix::Zero(2, 2);
    d(0, 0) = 3.0;
    d(1, 1) = cplx(0.0, -4.0);
    CHECK(operator_norm(d) == doctest::Approx(4.0).epsilon(1e-12));
    const CMatrix m = test::random_complex(6, 6, 7);
    CHECK(std::abs(operator_norm(m) - operator_norm(m.adjoint())) <= 1e-10);
}

TEST_CASE("psd_power")
{
    const CMatrix id = CMatrix::Identity(3, 3);
    CHECK((psd_power(id, -0.5) - id).norm() < 1e-14);
    CMatrix d = CMatrix::Zero(2, 2);
    d(0, 0) = 4.0;
    d(1, 1) = 9.0;
    CMatrix r = psd_power(d, 0.5);
    CHECK(std::abs(r(0, 0) - 2.0) < 1e-14);
    CHECK(std::abs(r(1, 1) - 3.0) < 1e-14);
    CHECK(std::abs(r(0, 1)) < 1e-14);

    const CMatrix x = test::random_complex(6, 6, 3);
    const CMatrix m = x.adjoint() * x;
    const CMatrix h = psd_power(m, 0.5);
    CHECK((h * h - m).norm() <= 1e-9 * m.norm());

    for (double a : {0.3, -0.7, 1.5})
        for (double b : {0.2, -0.4, 2.0}) {
            const CMatrix lhs = psd_power(m, a) * psd_power(m, b);
            const CMatrix rhs = psd_power(m, a + b);
            CHECK((lhs - rhs).norm() <= 1e-9 * rhs.norm());
        }

    CMatrix neg = CMatrix::Identity(2, 2);
    neg(1, 1) = -1.0;
    CHECK_THROWS_AS(psd_power(neg, 0.5), UsageError);
}

TEST_CASE("nearest_eigenvalue")
{
    const CMatrix m = test::random_complex(30, 30, 5);
    const CVector all = general_eig(m);
    const cplx shift(0.3, -0.2);
    Eigen::Index best = 0;
    for (Eigen::Index k = 1; k < all.size(); ++k)
        if (std::abs(all(k) - shift) < std::abs(all(best) - shift)) best = k;
    const NearestEig ne = nearest_eigenvalue(m, shift);
    CHECK(ne.converged);
    CHECK(std::abs(ne.value - all(best)) < 1e-10);
    // left vector
    CHECK((ne.left.adjoint() * m - ne.value * ne.left.adjoint()).norm() < 1e-8);
}

TEST_CASE("tridiagonal QL against dense solver")
{
    for (int n : {5, 40, 200}) {
        std::mt19937_64 gen(n);
        std::normal_distribution<double> g;
        std::vector<cplx> d(n), e(n - 1);
        CMatrix t = CMatrix::Zero(n, n);
        for (int i = 0; i < n; ++i) {
            d[i] = cplx(2.0 + g(gen), g(gen));
            t(i, i) = d[i];
        }
        for (int i = 0; i + 1 < n; ++i) {
            e[i] = -1.0;
            t(i, i + 1) = t(i + 1, i) = e[i];
        }
        const auto ql = tridiag_symmetric_eigenvalues(d, e);
        CVector qv(n);
        for (int i = 0; i < n; ++i) qv(i) = ql[i];
        CHECK(test::multiset_distance(qv, general_eig(t)) < 1e-10);
    }
}

TEST_CASE("gauss_legendre")
{
    QuadratureGrid g = gauss_legendre({-1.0, 1.0}, 2);
    CHECK(g.nodes[0] == doctest::Approx(-1.0 / std::sqrt(3.0)).epsilon(1e-15));
    CHECK(g.nodes[1] == doctest::Approx(1.0 / std::sqrt(3.0)).epsilon(1e-15));
    CHECK(g.weights[0] == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(g.weights[1] == doctest::Approx(1.0).epsilon(1e-15));

    g = gauss_legendre({0.0, 1.0}, 4);
    double s = 0.0;
    for (std::size_t i = 0; i < g.size(); ++i) s += g.weights[i] * std::pow(g.nodes[i], 3);
    CHECK(std::abs(s - 0.25) < 1e-14);

    g = gauss_legendre({-40.0, 40.0}, 800);
    s = 0.0;
    double wsum = 0.0;
    for (std::size_t i = 0; i < g.size(); ++i) {
        s += g.weights[i] * std::exp(-std::abs(g.nodes[i]));
        wsum += g.weights[i];
    }
    CHECK(std::abs(s - 2.0) < 1e-12);
    CHECK(std::abs(wsum - 80.0) < 1e-10 * 80.0);
    for (std::size_t i = 0; i + 1 < g.size(); ++i) CHECK(g.nodes[i] < g.nodes[i + 1]);
    CHECK(g.nodes.front() > -40.0);
    CHECK(g.nodes.back() < 40.0);

    const double br[] = {0.0, 1.0};
    g = gauss_legendre({-40.0, 40.0}, 1600, br);
    CHECK(std::find(g.edges.begin(), g.edges.end(), 0.0) != g.edges.end());
    CHECK(std::find(g.edges.begin(), g.edges.end(), 1.0) != g.edges.end());
    CHECK(g.size() == 1600);

    CHECK_THROWS_AS(gauss_legendre({1.0, 1.0}, 4), UsageError);
    CHECK_THROWS_AS(gauss_legendre({0.0, 1.0}, 1), UsageError);
}

TEST_CASE("product Nystrom resolves the diagonal kink")
{
    // integral of e^{-|x-y|}/2 against 1 on [-1, 1], at y = nodes
    const QuadratureGrid g = gauss_legendre({-1.0, 1.0}, 32);
    std::vector<int> idx(g.size());
    std::vector<cplx> one(g.size(), 1.0);
    for (std::size_t i = 0; i < g.size(); ++i) idx[i] = static_cast<int>(i);
    const Kernel k = [](double x, double y) { return cplx(0.5 * std::exp(-std::abs(x - y)), 0.0); };
    for (NystromRule rule : {NystromRule::point, NystromRule::product}) {
        const CMatrix m = nystrom_matrix(g, idx, one, one, k, rule);
        double err = 0.0;
        for (std::size_t i = 0; i < g.size(); ++i) {
            cplx acc = 0.0;
            for (std::size_t j = 0; j < g.size(); ++j)
                acc += m(i, j) * std::sqrt(g.weights[j]) / std::sqrt(g.weights[i]);
            const double x = g.nodes[i];
            const double exact = 1.0 - 0.5 * (std::exp(-(1.0 + x)) + std::exp(-(1.0 - x)));
            err = std::max(err, std::abs(acc - exact));
        }
        if (rule == NystromRule::product)
            CHECK(err < 1e-12);
        else
            CHECK(err > 1e-6);
    }
}

}
