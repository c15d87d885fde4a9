// One PASS/FAIL line per acceptance criterion. Exit status 1 if any fails.

#include <cstdarg>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include <boost/math/constants/constants.hpp>
#include <boost/multiprecision/cpp_bin_float.hpp>

#include "bslab/dirac.hpp"
#include "bslab/errors.hpp"
#include "bslab/euclid3d.hpp"
#include "bslab/hyperbolic3d.hpp"
#include "bslab/report.hpp"
#include "bslab/rng.hpp"
#include "bslab/schrodinger1d.hpp"

using namespace bslab;

namespace {

struct Outcome {
    bool pass = false;
    std::string detail;
};

std::string fmt(const char* f, ...) __attribute__((format(printf, 1, 2)));
std::string fmt(const char* f, ...)
{
    char buf[1024];
    va_list ap;
    va_start(ap, f);
    std::vsnprintf(buf, sizeof buf, f, ap);
    va_end(ap);
    return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t0)
{
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

// ||K(lambda)|| at every eigenvalue found, fed to criterion 3
struct NormLog {
    double min = INFINITY;
    int count = 0;
    std::string where;
    void add(double k, const std::string& tag)
    {
        ++count;
        if (k < min) {
            min = k;
            where = tag;
        }
    }
};
NormLog norms;

double gap(const std::vector<EigenEntry>& a, const std::vector<EigenEntry>& b)
{
    double worst = 0.0;
    for (const auto& x : a) {
        double best = INFINITY;
        for (const auto& y : b) best = std::min(best, std::abs(x.lambda - y.lambda));
        worst = std::max(worst, best);
    }
    return worst;
}

std::vector<EigenEntry> in_rect(const std::vector<EigenEntry>& e, const Rect& r)
{
    std::vector<EigenEntry> out;
    for (const auto& x : e)
        if (r.contains(x.lambda)) out.push_back(x);
    return out;
}

const CheckOutcome& find_check(const Report& r, const std::string& name)
{
    for (const auto& c : r.checks)
        if (c.name == name) return c;
    throw NumericalFailure("missing check " + name);
}

Report lab_report;
double lab_seconds = 0.0;

Outcome criterion1()
{
    const auto t0 = std::chrono::steady_clock::now();
    lab_report = run_lab(200, 12, 42);
    lab_seconds = seconds_since(t0);
    const auto& corr = find_check(lab_report, "spectrum_correspondence");
    const auto& fwd = find_check(lab_report, "forward_residual");
    const auto& bwd = find_check(lab_report, "backward_residual");
    const auto& rt = find_check(lab_report, "round_trip");
    const bool ok = corr.pass && fwd.pass && bwd.pass && rt.pass && lab_seconds < 60.0;
    const auto& k = find_check(lab_report, "k_norm_at_eigenvalues");
    norms.add(k.value, "random systems");
    return {ok, fmt("200 systems, mismatched sets %g, forward %.2e, backward %.2e, round trip %.2e, %.1f s",
                    corr.value, fwd.value, bwd.value, rt.value, lab_seconds)};
}

Outcome criterion2()
{
    const auto& fr = find_check(lab_report, "pseudo_friedrichs");
    const auto& res = find_check(lab_report, "second_resolvent_scaled");
    return {fr.pass && res.pass,
            fmt("collapse %.2e (limit 1e-10 scaled), resolvent residual %.2e of the 1e-10 allowance",
                fr.value, res.value)};
}

Outcome criterion4()
{
    const auto t0 = std::chrono::steady_clock::now();
    // finite-difference boxes: the slowest-decaying eigenfunction (gamma = 1)
    // needs the widest box
    const std::map<int, std::pair<double, int>> fd_box{{1, {80.0, 6400}}, {2, {40.0, 4000}}, {4, {20.0, 4000}}};
    bool ok = true;
    std::string detail;
    double worst_hs = -INFINITY;
    for (int gamma : {1, 2, 4}) {
        const Potential1D v = Potential1D::complex_step(cplx(0.0, gamma), 0.0, 1.0);
        const Grid1D g{40.0, 1600, NystromRule::product};
        const double radius = gamma * gamma / 4.0; // ||V||_1 = gamma
        const EnclosureCertificate disk = davies_disk(v);
        if (std::abs(disk.threshold - radius) > 1e-12 * radius) ok = false;
        const double s = 1.1 * radius + 0.1;
        const Rect search{-s, s, -s, s};
        const SpectralReport bs = find_eigenvalues_bs(v, g, search);
        const auto [fl, fn] = fd_box.at(gamma);
        const SpectralReport fd = fd_oracle(v, fl, fn);
        const std::vector<EigenEntry> fdin = in_rect(fd.eigenvalues, search);
        const double agree = std::max(gap(bs.eigenvalues, fdin), gap(fdin, bs.eigenvalues));
        double rmax = 0.0;
        for (const auto* set : {&bs.eigenvalues, &fd.eigenvalues})
            for (const auto& e : *set) rmax = std::max(rmax, std::abs(e.lambda));
        for (const auto& e : bs.eigenvalues) norms.add(e.k_norm, fmt("step gamma=%d bs", gamma));
        for (const auto& e : fd.eigenvalues)
            norms.add(operator_norm(assemble_k(v, g, e.lambda)), fmt("step gamma=%d fd", gamma));
        const bool found = !bs.eigenvalues.empty();
        const bool inside = rmax <= radius * (1.0 + 1e-3);
        if (!found || agree > 1e-3 || !inside) ok = false;
        for (int k = 0; k <= 24; ++k) {
            const double a = std::pow(10.0, -2.0 + 0.25 * k);
            for (double th : {0.5, 0.75, 1.0, -0.75, -0.5, 0.05}) {
                const HsCheck h = hs_bound_check(v, std::polar(a, th * M_PI), g);
                worst_hs = std::max(worst_hs, h.hs / h.bound - 1.0);
                if (!h.ok) ok = false;
            }
        }
        detail += fmt("gamma=%d: %zu bs / %zu fd, agree %.1e, max|l| %.4f <= %.2f; ", gamma, bs.eigenvalues.size(),
                      fdin.size(), agree, rmax, radius);
    }
    const double t = seconds_since(t0);
    if (t >= 120.0) ok = false;
    return {ok, detail + fmt("HS worst ratio-1 %.2e; %.1f s", worst_hs, t)};
}

Outcome criterion5()
{
    const Potential1D v = Potential1D::poschl_teller(1.0); // -2 sech^2 x
    const Grid1D g{20.0, 400, NystromRule::product};
    const Rect search{-4.5, 4.5, -4.5, 4.5};
    const SpectralReport bs = find_eigenvalues_bs(v, g, search);
    const SpectralReport fd = fd_oracle(v, 20.0, 4000);
    const std::vector<EigenEntry> fdin = in_rect(fd.eigenvalues, search);
    for (const auto& e : bs.eigenvalues) norms.add(e.k_norm, "Poschl-Teller bs");
    for (const auto& e : fd.eigenvalues) norms.add(operator_norm(assemble_k(v, g, e.lambda)), "Poschl-Teller fd");
    if (bs.eigenvalues.size() != 1 || fdin.size() != 1)
        return {false, fmt("%zu bs and %zu fd eigenvalues", bs.eigenvalues.size(), fdin.size())};
    const cplx a = bs.eigenvalues[0].lambda, b = fdin[0].lambda;
    const double d = std::abs(a - b);
    // known bound state -1 of the reflectionless well
    const double exact = std::max(std::abs(a + 1.0), std::abs(b + 1.0));
    return {d <= 1e-4 && exact <= 1e-4,
            fmt("bs %.10f%+.1ei, fd %.10f%+.1ei, |bs-fd| %.1e, distance to -1 %.1e", a.real(), a.imag(), b.real(),
                b.imag(), d, exact)};
}

Outcome criterion6()
{
    const std::vector<std::pair<std::string, RadialPotential>> unit{
        {"exponential", RadialPotential::exponential(1.0)},
        {"gaussian", RadialPotential::gaussian(1.0)},
        {"step", RadialPotential::step(1.0)},
        {"inverse_square", RadialPotential::inverse_square(1.0, 1e-2, 1.0)},
    };
    const std::vector<double> gammas{0.25, 0.5, 1.0, 1.5, 2.0, 3.0};
    double fk = 0.0, mc = 0.0;
    int violations = 0;
    std::string first, bounds;
    for (const auto& [name, v] : unit) {
        fk = std::max(fk, std::abs(fkv_subordination(v).computed - kato_L_norm(v).computed));
        const double exact = rollnik_norm(v).computed;
        const MonteCarloEstimate m = rollnik_monte_carlo(v, 1000000, 2024);
        mc = std::max(mc, std::abs(m.value - exact) / exact);
        const GammaSweep s = gamma_sweep(v, gammas);
        violations += static_cast<int>(s.violations.size());
        if (first.empty() && !s.violations.empty()) first = name + ": " + s.violations.front();
        bounds += fmt("%s %.4g/%.4g/%.4g/%.4g; ", name.c_str(), s.gamma_frank, s.gamma_rollnik, s.gamma_fkv,
                      s.gamma_kato);
    }
    const bool ok = fk <= 1e-10 && mc <= 0.02 && violations == 0;
    std::string d = fmt("fkv-kato %.1e, rollnik vs Monte-Carlo %.2f%%, %d implication violations",
                        fk, 100.0 * mc, violations);
    if (!first.empty()) d += " (first: " + first + ")";
    return {ok, d + "; boundaries frank/rollnik/fkv/kato: " + bounds};
}

Outcome criterion7()
{
    const auto t0 = std::chrono::steady_clock::now();
    const HyperbolicPotential b = scale_to_subordination(HyperbolicPotential::bump(std::polar(1.0, M_PI / 4)), 0.5);
    const H3StabilityReport st = stability_scan_h3(b, H3ZGrid{});
    const Rect search{-2.0, 3.0, -2.0, 2.0};
    const SpectralReport weak = eigenvalue_hunt_h3(b, HGrid{}, search);
    bool ok = st.samples >= 1000 && st.sup_norm <= 0.501 && weak.eigenvalues.empty();
    std::string d = fmt("c=%.6f: sup %.6f over %zu samples, %zu eigenvalues; ", st.c, st.sup_norm, st.samples,
                        weak.eigenvalues.size());

    const HyperbolicPotential strong = scale_to_subordination(HyperbolicPotential::bump(-1.0), 4.0);
    const Rect wide{1.0 - strong.linf_norm() - 0.5, 3.0, -2.0, 2.0};
    const SpectralReport hit = eigenvalue_hunt_h3(strong, HGrid{}, wide);
    const SpectralReport fd = fd_oracle_h3(strong, 20.0, 4000);
    int below = 0;
    double worst = 0.0;
    for (const auto& e : hit.eigenvalues) {
        norms.add(e.k_norm, "hyperbolic bump bs");
        if (e.lambda.real() >= 1.0) continue;
        ++below;
        double best = INFINITY;
        for (const auto& f : fd.eigenvalues) best = std::min(best, std::abs(e.lambda - f.lambda));
        worst = std::max(worst, best);
    }
    for (const auto& f : fd.eigenvalues)
        norms.add(operator_norm(assemble_k_h3(strong, HGrid{}, f.lambda)), "hyperbolic bump fd");
    if (below < 1 || worst > 1e-3) ok = false;
    d += fmt("c=4: %d below 1", below);
    if (!hit.eigenvalues.empty())
        d += fmt(" (first %.8f%+.1ei), fd gap %.1e; ", hit.eigenvalues[0].lambda.real(),
                 hit.eigenvalues[0].lambda.imag(), worst);

    // |G_z| <= G_1 = 1 / (4 pi sinh rho)
    Rng rng(77);
    int bad = 0, n = 0;
    while (n < 10000) {
        const double mag = std::pow(10.0, rng.uniform(-3.0, 3.0));
        const cplx z = 1.0 + std::polar(mag, rng.uniform(-M_PI, M_PI));
        if (z.imag() == 0.0 && z.real() > 1.0) continue;
        const double rho = std::pow(10.0, rng.uniform(-3.0, 1.3));
        const double g1 = 1.0 / (4.0 * M_PI * std::sinh(rho));
        if (std::abs(green_h3(z, rho)) > g1 * (1.0 + 1e-12)) ++bad;
        ++n;
    }
    if (bad) ok = false;
    const double t = seconds_since(t0);
    if (t >= 300.0) ok = false;
    return {ok, d + fmt("dominance violations %d/%d; %.1f s", bad, n, t)};
}

CMatrix random_matrix(Rng& rng, int rank)
{
    CMatrix a(4, 4);
    for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 4; ++j) a(i, j) = rng.cnormal();
    if (rank < 4) {
        Eigen::JacobiSVD<CMatrix> svd(a, Eigen::ComputeFullU | Eigen::ComputeFullV);
        RVector s = svd.singularValues();
        for (int k = rank; k < 4; ++k) s(k) = 0.0;
        a = svd.matrixU() * s.asDiagonal() * svd.matrixV().adjoint();
    }
    return a;
}

Outcome criterion8()
{
    using big = boost::multiprecision::cpp_bin_float_50;
    const big pi = boost::math::constants::pi<big>();
    const big e1 = exp(big(-1));
    const big c1 = cbrt(pi / 2) * sqrt(1 + e1 + 2 * e1 * e1);
    const big c2 = pow(big(2), big(17) / 6) / (3 * pow(pi, big(2) / 3));
    const DiracConstants c = dirac_constants();
    const double r1 = std::abs(c.C1 - c1.convert_to<double>()) / c1.convert_to<double>();
    const double r2 = std::abs(c.C2 - c2.convert_to<double>()) / c2.convert_to<double>();
    bool ok = r1 <= 1e-12 && r2 <= 1e-12;

    // zero potential, C1 ||v||_3 >= 1, and ||v||_3 = 0.5 / C1 with ||v||_{3/2} = 1
    const EnclosureRegion z = enclosure_region(0.0, 0.0);
    const EnclosureRegion e = enclosure_region(1.0 / c1.convert_to<double>(), 2.0);
    const EnclosureRegion m = enclosure_region(0.5 / c1.convert_to<double>(), 1.0);
    const double w = (0.5 / c2).convert_to<double>();
    const bool rows = z.all_plane && z.excludes({123.0, 4.0}) && e.empty && !e.excludes({0.0, 0.0}) &&
                      std::abs(m.half_width - w) <= 1e-12 * w;
    if (!rows) ok = false;

    Rng rng(8);
    int bad = 0;
    double worst = 0.0;
    for (int t = 0; t < 1000; ++t) {
        const CMatrix v = random_matrix(rng, t % 4 == 0 ? rng.integer(0, 3) : 4);
        const PolarDecomposition p = matrix_polar(v);
        const double err = (p.U * p.absV - v).norm() / std::max(1.0, operator_norm(v));
        worst = std::max(worst, err);
        if (err > 1e-10) ++bad;
    }
    if (bad) ok = false;
    return {ok, fmt("C1 rel %.1e, C2 rel %.1e, example rows %s, polar worst %.1e (%d over 1e-10)", r1, r2,
                    rows ? "ok" : "wrong", worst, bad)};
}

Outcome criterion3()
{
    return {norms.count > 0 && norms.min >= 1.0 - 1e-3,
            fmt("%d eigenvalues, min ||K(lambda)|| %.6f (%s)", norms.count, norms.min, norms.where.c_str())};
}

} // namespace

int main()
{
    init_logging();
    const std::vector<std::pair<int, std::function<Outcome()>>> order{
        {1, criterion1}, {2, criterion2}, {4, criterion4}, {5, criterion5},
        {6, criterion6}, {7, criterion7}, {8, criterion8}, {3, criterion3},
    };
    const std::map<int, std::string> title{
        {1, "finite-dimensional principle"}, {2, "pseudo-Friedrichs collapse"},
        {3, "norm lower bound at eigenvalues"}, {4, "Davies enclosure, 1D step"},
        {5, "Poschl-Teller oracle"}, {6, "Euclidean certificates"},
        {7, "hyperbolic stability"}, {8, "Dirac region"},
    };
    std::map<int, Outcome> out;
    for (const auto& [id, f] : order) {
        try {
            out[id] = f();
        } catch (const std::exception& e) {
            out[id] = {false, std::string("error: ") + e.what()};
        }
        std::fflush(stdout);
    }
    int failed = 0;
    for (const auto& [id, o] : out) {
        std::printf("criterion %d %s: %s: %s\n", id, o.pass ? "PASS" : "FAIL", title.at(id).c_str(), o.detail.c_str());
        if (!o.pass) ++failed;
    }
    return failed ? 1 : 0;
}
