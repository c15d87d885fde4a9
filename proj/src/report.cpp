#include "bslab/report.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <set>
#include <sstream>

#include <fmt/format.h>
#include <spdlog/sinks/stdout_sinks.h>
#include <spdlog/spdlog.h>

#include "bslab/abstract_lab.hpp"
#include "bslab/dirac.hpp"
#include "bslab/errors.hpp"
#include "bslab/euclid3d.hpp"
#include "bslab/hyperbolic3d.hpp"
#include "bslab/rng.hpp"
#include "bslab/schrodinger1d.hpp"

namespace bslab {

using json = nlohmann::ordered_json;

const char* tool_version() { return "0.1.0"; }

std::string to_string(RunStatus s)
{
    switch (s) {
    case RunStatus::pass: return "pass";
    case RunStatus::check_failed: return "check_failed";
    case RunStatus::usage_error: return "usage_error";
    case RunStatus::numerical_failure: return "numerical_failure";
    }
    return "?";
}

int exit_code(RunStatus s)
{
    switch (s) {
    case RunStatus::pass: return 0;
    case RunStatus::check_failed: return 1;
    case RunStatus::usage_error: return 2;
    case RunStatus::numerical_failure: return 3;
    }
    return 3;
}

static RunStatus status_from_string(const std::string& s)
{
    for (RunStatus r : {RunStatus::pass, RunStatus::check_failed, RunStatus::usage_error,
                        RunStatus::numerical_failure})
        if (to_string(r) == s) return r;
    throw UsageError("unknown report status '" + s + "'");
}

void Report::settle()
{
    if (status != RunStatus::pass) return;
    for (const auto& c : checks)
        if (!c.pass) {
            status = RunStatus::check_failed;
            if (message.empty()) message = "check failed: " + c.name;
        }
}

void init_logging()
{
    auto log = spdlog::get("bslab");
    if (!log) {
        log = spdlog::stderr_logger_st("bslab");
        log->set_pattern("[%l] %v");
        spdlog::set_default_logger(log);
    }
    const char* env = std::getenv("BSLAB_LOG_LEVEL");
    const std::string lvl = env ? env : "info";
    if (lvl == "error") spdlog::set_level(spdlog::level::err);
    else if (lvl == "warn") spdlog::set_level(spdlog::level::warn);
    else if (lvl == "debug") spdlog::set_level(spdlog::level::debug);
    else spdlog::set_level(spdlog::level::info);
}

// ---- parsing -------------------------------------------------------------

static std::string trim(const std::string& s)
{
    const auto a = s.find_first_not_of(" \t");
    if (a == std::string::npos) return {};
    const auto b = s.find_last_not_of(" \t");
    return s.substr(a, b - a + 1);
}

static double parse_real(const std::string& s)
{
    const std::string t = trim(s);
    std::size_t used = 0;
    double x = 0.0;
    try {
        x = std::stod(t, &used);
    } catch (const std::exception&) {
        throw UsageError("not a number: '" + s + "'");
    }
    if (used != t.size()) throw UsageError("not a number: '" + s + "'");
    return x;
}

cplx parse_complex(const std::string& s)
{
    std::string t = trim(s);
    if (t.empty()) throw UsageError("empty complex number");
    if (t.back() != 'i' && t.back() != 'j') return {parse_real(t), 0.0};
    t.pop_back();
    // split at the last sign that is not an exponent sign
    std::size_t pos = std::string::npos;
    for (std::size_t k = t.size(); k-- > 1;)
        if ((t[k] == '+' || t[k] == '-') && t[k - 1] != 'e' && t[k - 1] != 'E') {
            pos = k;
            break;
        }
    auto unit = [](const std::string& u) {
        if (u.empty() || u == "+") return 1.0;
        if (u == "-") return -1.0;
        return parse_real(u);
    };
    if (pos == std::string::npos) return {0.0, unit(t)};
    return {parse_real(t.substr(0, pos)), unit(t.substr(pos))};
}

std::map<std::string, std::string> parse_params(const std::string& s)
{
    std::map<std::string, std::string> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ',')) {
        item = trim(item);
        if (item.empty()) continue;
        const auto eq = item.find('=');
        if (eq == std::string::npos || eq == 0) throw UsageError("expected key=value, got '" + item + "'");
        out[trim(item.substr(0, eq))] = trim(item.substr(eq + 1));
    }
    return out;
}

Rect parse_rect(const std::string& s)
{
    std::vector<double> x;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ',')) x.push_back(parse_real(item));
    if (x.size() != 4) throw UsageError("search rectangle needs re_min,re_max,im_min,im_max");
    Rect r{x[0], x[1], x[2], x[3]};
    if (!(r.re_min < r.re_max) || !(r.im_min < r.im_max)) throw UsageError("empty search rectangle");
    return r;
}

namespace {

// Typed access to --params with a list of accepted keys.
class Params {
public:
    Params(const std::map<std::string, std::string>& p, std::set<std::string> allowed)
        : p_(p), allowed_(std::move(allowed))
    {
        for (const auto& [k, v] : p_)
            if (!allowed_.count(k)) {
                std::string list;
                for (const auto& a : allowed_) list += (list.empty() ? "" : ", ") + a;
                throw UsageError("unknown parameter '" + k + "' (accepted: " + list + ")");
            }
    }
    bool has(const std::string& k) const { return p_.count(k) > 0; }
    double real(const std::string& k, double def) const { return has(k) ? parse_real(p_.at(k)) : def; }
    cplx complex(const std::string& k, cplx def) const { return has(k) ? parse_complex(p_.at(k)) : def; }
    int integer(const std::string& k, int def) const
    {
        const double x = real(k, def);
        if (x != std::floor(x) || std::abs(x) > 1e9) throw UsageError("parameter " + k + " must be an integer");
        return static_cast<int>(x);
    }
    bool flag(const std::string& k, bool def) const { return has(k) ? real(k, 0.0) != 0.0 : def; }

private:
    const std::map<std::string, std::string>& p_;
    std::set<std::string> allowed_;
};

bool looks_like_file(const std::string& s)
{
    return s.find('/') != std::string::npos || s.find('.') != std::string::npos;
}

CheckOutcome check_le(std::string name, double value, double threshold, std::string detail = {})
{
    return {std::move(name), value <= threshold, value, threshold, std::move(detail)};
}

CheckOutcome check_ge(std::string name, double value, double threshold, std::string detail = {})
{
    return {std::move(name), value >= threshold, value, threshold, std::move(detail)};
}

// largest distance from an entry of a to the nearest entry of b
double one_sided_gap(const std::vector<EigenEntry>& a, const std::vector<EigenEntry>& b)
{
    double worst = 0.0;
    for (const auto& x : a) {
        double best = INFINITY;
        for (const auto& y : b) best = std::min(best, std::abs(x.lambda - y.lambda));
        worst = std::max(worst, best);
    }
    return worst;
}

std::vector<EigenEntry> inside(const std::vector<EigenEntry>& e, const Rect& r)
{
    std::vector<EigenEntry> out;
    for (const auto& x : e)
        if (r.contains(x.lambda)) out.push_back(x);
    return out;
}

void add_k_norm_check(Report& rep, const SpectralReport& s)
{
    if (s.eigenvalues.empty()) return;
    double lo = INFINITY;
    for (const auto& e : s.eigenvalues) lo = std::min(lo, e.k_norm);
    rep.checks.push_back(check_ge("k_norm_at_eigenvalues", lo, 1.0 - 1e-3));
}

std::string now_utc()
{
    const std::time_t t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

class Clock {
public:
    explicit Clock(Report& r) : r_(r), t0_(std::chrono::steady_clock::now())
    {
        r_.started = r_.config.fixed_clock ? "1970-01-01T00:00:00Z" : now_utc();
    }
    void stop()
    {
        const std::chrono::duration<double> d = std::chrono::steady_clock::now() - t0_;
        r_.elapsed_s = r_.config.fixed_clock ? 0.0 : d.count();
    }

private:
    Report& r_;
    std::chrono::steady_clock::time_point t0_;
};

Report fresh_report(const RunConfig& cfg)
{
    Report r;
    r.version = tool_version();
    r.config = cfg;
    return r;
}

// ---- lab -----------------------------------------------------------------

void lab_body(Report& rep, int trials, int dim_max, std::uint64_t seed)
{
    if (trials < 1) throw UsageError("lab: trials must be >= 1");
    if (dim_max < 2) throw UsageError("lab: dim-max must be >= 2");
    Rng rng(seed, 0x1ab);
    Curve table{"systems",
                {"seed", "n", "m", "forward", "backward", "round_trip", "friedrichs", "resolvent",
                 "min_k_norm", "failures"},
                {}};
    std::map<std::string, int> failures;
    double fwd = 0, bwd = 0, rt = 0, fr = 0, res = 0, dshift = 0, adj = 0, kmin = INFINITY;
    int corr_bad = 0, lemma_bad = 0;
    for (int t = 0; t < trials; ++t) {
        const int n = rng.integer(2, dim_max);
        const int m = rng.integer(1, dim_max);
        const std::uint64_t sys_seed = seed * 1000003ULL + static_cast<std::uint64_t>(t);
        const FactorizedSystem sys = random_system(n, m, sys_seed);
        const SystemCheck c = check_system(sys);
        const LemmaReport lem = lemma1_conditions(sys);
        const bool lemma_ok = lem.iv_implies_ii && lem.ii_implies_assumption;
        if (!lemma_ok) ++lemma_bad;
        for (const auto& f : c.failures) ++failures[f];
        if (!c.correspondence_ok) ++corr_bad;
        fwd = std::max(fwd, c.worst_forward);
        bwd = std::max(bwd, c.worst_backward);
        rt = std::max(rt, c.worst_round_trip);
        fr = std::max(fr, c.friedrichs_rel);
        res = std::max(res, c.resolvent_scaled);
        dshift = std::max(dshift, c.delta_shift);
        adj = std::max(adj, c.adjoint_gap);
        kmin = std::min(kmin, c.min_k_norm_at_eigs);
        table.rows.push_back({static_cast<double>(sys_seed), double(n), double(m), c.worst_forward,
                              c.worst_backward, c.worst_round_trip, c.friedrichs_rel, c.resolvent_scaled,
                              c.min_k_norm_at_eigs, double(c.failures.size() + (lemma_ok ? 0 : 1))});
        spdlog::debug("lab system {} (n={}, m={}): {} failures", t, n, m, c.failures.size());
    }
    auto detail = [&](const std::string& key) {
        const auto it = failures.find(key);
        return it == failures.end() ? std::string{} : fmt::format("{} systems", it->second);
    };
    rep.checks.push_back(check_le("spectrum_correspondence", corr_bad, 0, detail("spectrum correspondence")));
    rep.checks.push_back(check_le("forward_residual", fwd, 1e-7));
    rep.checks.push_back(check_le("backward_residual", bwd, 1e-7));
    rep.checks.push_back(check_le("round_trip", rt, 1e-8));
    rep.checks.push_back(check_le("pseudo_friedrichs", fr, 1e-10));
    rep.checks.push_back(check_le("second_resolvent_scaled", res, 1.0));
    rep.checks.push_back(check_le("delta_shift", dshift, 1e-10));
    rep.checks.push_back(check_le("adjoint_identity", adj, 1e-10));
    if (std::isfinite(kmin)) rep.checks.push_back(check_ge("k_norm_at_eigenvalues", kmin, 1.0 - 1e-3));
    rep.checks.push_back(check_le("residual_spectrum_probe", failures["residual spectrum probe"], 0));
    rep.checks.push_back(check_le("lemma_implications", lemma_bad, 0));
    rep.metrics.emplace_back("systems", trials);
    rep.curves.push_back(std::move(table));
}

// ---- schrodinger1d -------------------------------------------------------

Potential1D potential_1d(const RunConfig& cfg, const Params& p)
{
    const std::string& f = cfg.potential;
    if (f.empty() || f == "zero") return Potential1D::zero();
    if (f == "step") return Potential1D::complex_step(p.complex("gamma", {0.0, 1.0}), p.real("a", 0.0), p.real("b", 1.0));
    if (f == "poschl_teller") return Potential1D::poschl_teller(p.real("s", 1.0), p.real("scale", 1.0));
    if (f == "gaussian") return Potential1D::gaussian(p.complex("amp", -1.0), p.real("width", 1.0));
    if (looks_like_file(f)) return Potential1D::from_csv(f);
    throw UsageError("s1d: unknown potential '" + f + "' (zero, step, poschl_teller, gaussian, or a CSV file)");
}

void s1d_body(Report& rep)
{
    const RunConfig& cfg = rep.config;
    const Params p(cfg.params, {"gamma", "a", "b", "s", "scale", "amp", "width", "fd", "fd_L", "fd_n", "hs"});
    const Potential1D v = potential_1d(cfg, p);
    Grid1D g;
    if (cfg.extent > 0) g.L = cfg.extent;
    if (cfg.grid_n > 0) g.n = cfg.grid_n;
    check_truncation(v, g.L);

    const EnclosureCertificate disk = davies_disk(v);
    const double R = disk.threshold;
    Rect search{-1.1 * R - 0.1, 1.1 * R + 0.1, -1.1 * R - 0.1, 1.1 * R + 0.1};
    if (cfg.has_search) search = cfg.search;
    rep.certificates.push_back(disk);
    rep.metrics.emplace_back("l1_norm", v.l1_norm());
    rep.metrics.emplace_back("davies_radius", R);

    spdlog::info("s1d: {} on [-{}, {}], N = {}", v.name(), g.L, g.L, g.n);
    SpectralReport bs = find_eigenvalues_bs(v, g, search);
    spdlog::info("s1d: Birman-Schwinger hunt found {} eigenvalue(s)", bs.eigenvalues.size());
    std::vector<EigenEntry> all = bs.eigenvalues;
    add_k_norm_check(rep, bs);

    if (p.flag("fd", true) && v.linf_norm() > 0.0) {
        const double fl = p.real("fd_L", g.L);
        const int fn = p.integer("fd_n", 4000);
        SpectralReport fd = fd_oracle(v, fl, fn);
        spdlog::info("s1d: finite differences (L = {}, N = {}) kept {} eigenvalue(s)", fl, fn, fd.eigenvalues.size());
        const std::vector<EigenEntry> fd_in = inside(fd.eigenvalues, search);
        const double gap = std::max(one_sided_gap(bs.eigenvalues, fd_in), one_sided_gap(fd_in, bs.eigenvalues));
        rep.checks.push_back(check_le("bs_fd_agreement", gap, 1e-3,
                                      fmt::format("{} bs, {} fd in the search rectangle", bs.eigenvalues.size(),
                                                  fd_in.size())));
        all.insert(all.end(), fd.eigenvalues.begin(), fd.eigenvalues.end());
        rep.spectra.push_back(std::move(bs));
        rep.spectra.push_back(std::move(fd));
    } else {
        rep.spectra.push_back(std::move(bs));
    }

    const EnclosureCertificate dc = davies_containment(v, all);
    rep.certificates.push_back(dc);
    rep.checks.push_back(check_le("davies_containment", dc.computed, dc.threshold));

    if (p.flag("hs", true) && v.linf_norm() > 0.0) {
        Curve hs{"hs_bound", {"abs_z", "arg_z", "hs", "bound"}, {}};
        double worst = -INFINITY;
        for (int k = 0; k <= 12; ++k) {
            const double a = std::pow(10.0, -2.0 + 0.5 * k);
            for (double th : {0.5 * M_PI, 0.75 * M_PI, M_PI, -0.5 * M_PI}) {
                const HsCheck h = hs_bound_check(v, std::polar(a, th), g);
                hs.rows.push_back({a, th, h.hs, h.bound});
                worst = std::max(worst, h.hs / h.bound - 1.0);
            }
        }
        rep.checks.push_back(check_le("hs_bound_relative_excess", worst, 1e-4));
        rep.curves.push_back(std::move(hs));
    }
    Curve circle{"davies_disk", {"theta", "re", "im"}, {}};
    for (int k = 0; k <= 180; ++k) {
        const double th = 2.0 * M_PI * k / 180;
        circle.rows.push_back({th, R * std::cos(th), R * std::sin(th)});
    }
    rep.curves.push_back(std::move(circle));
}

// ---- euclid3d ------------------------------------------------------------

RadialPotential potential_3d(const RunConfig& cfg, const Params& p, double amp_scale = 1.0)
{
    const std::string& f = cfg.potential;
    if (f.empty() || f == "zero") return RadialPotential::zero();
    if (f == "exponential") return RadialPotential::exponential(amp_scale * p.complex("gamma", 1.0), p.real("scale", 1.0));
    if (f == "gaussian") return RadialPotential::gaussian(amp_scale * p.complex("gamma", 1.0), p.real("width", 1.0));
    if (f == "step") return RadialPotential::step(amp_scale * p.complex("gamma", 1.0), p.real("radius", 1.0));
    if (f == "inverse_square")
        return RadialPotential::inverse_square(amp_scale * p.real("c0", 0.5), p.real("r0", 1e-2), p.real("r1", 1.0));
    throw UsageError("e3d: unknown potential '" + f + "' (zero, exponential, gaussian, step, inverse_square)");
}

void e3d_body(Report& rep)
{
    const RunConfig& cfg = rep.config;
    const Params p(cfg.params, {"gamma", "scale", "width", "radius", "c0", "r0", "r1", "samples", "sweep",
                                "hardy", "order", "panel_len", "ratio"});
    const RadialPotential v = potential_3d(cfg, p);
    RadialGrid g;
    g.order = p.integer("order", g.order);
    g.panel_len = p.real("panel_len", g.panel_len);
    g.ratio = p.real("ratio", g.ratio);
    if (cfg.extent > 0) g.r_max = cfg.extent;
    if (cfg.grid_n > 0) spdlog::warn("e3d: --grid-n is ignored; use --params order=,panel_len=");

    const ImplicationReport chain = implication_chain(v, g);
    rep.certificates = {chain.frank, chain.rollnik, chain.fkv, chain.kato};
    for (const auto& s : chain.violations) spdlog::warn("e3d: {}", s);
    rep.checks.push_back(check_le("implication_chain", chain.violations.size(), 0,
                                  chain.violations.empty() ? "" : chain.violations.front()));
    const double fk = std::abs(chain.fkv.computed - chain.kato.computed);
    rep.checks.push_back(check_le("fkv_equals_kato", fk, 1e-10 * std::max(1.0, chain.kato.computed)));

    const auto samples = static_cast<std::uint64_t>(p.real("samples", 1e6));
    if (samples > 0 && v.l1_r2() > 0.0 && std::isfinite(chain.rollnik.computed)) {
        const MonteCarloEstimate mc = rollnik_monte_carlo(v, samples, cfg.seed);
        rep.metrics.emplace_back("mc_samples", static_cast<double>(mc.samples));
        rep.metrics.emplace_back("mc_seed", static_cast<double>(mc.seed));
        rep.metrics.emplace_back("mc_value", mc.value);
        rep.metrics.emplace_back("mc_std_error", mc.std_error);
        const double rel = std::abs(mc.value - chain.rollnik.computed) / chain.rollnik.computed;
        rep.checks.push_back(check_le("rollnik_monte_carlo", rel, 0.02,
                                      fmt::format("{} samples, seed {}", mc.samples, mc.seed)));
    }

    if (p.flag("sweep", false)) {
        const std::vector<double> gammas{0.25, 0.5, 1.0, 1.5, 2.0, 3.0};
        const double a = std::abs(p.complex(v.family() == RadialPotential::Family::inverse_square ? "c0" : "gamma",
                                            v.family() == RadialPotential::Family::inverse_square ? 0.5 : 1.0));
        if (!(a > 0.0)) throw UsageError("e3d: sweep needs a nonzero amplitude");
        const RadialPotential unit = potential_3d(cfg, p, 1.0 / a);
        const GammaSweep s = gamma_sweep(unit, gammas, g);
        Curve c{"gamma_sweep", {"gamma", "frank", "rollnik", "fkv", "kato", "frank_ok", "rollnik_ok", "fkv_ok", "kato_ok"}, {}};
        for (std::size_t k = 0; k < s.rows.size(); ++k) {
            const auto& r = s.rows[k];
            c.rows.push_back({s.gammas[k], r.frank.computed, r.rollnik.computed, r.fkv.computed, r.kato.computed,
                              double(r.frank.verdict), double(r.rollnik.verdict), double(r.fkv.verdict),
                              double(r.kato.verdict)});
        }
        rep.curves.push_back(std::move(c));
        rep.metrics.emplace_back("gamma_frank", s.gamma_frank);
        rep.metrics.emplace_back("gamma_rollnik", s.gamma_rollnik);
        rep.metrics.emplace_back("gamma_fkv", s.gamma_fkv);
        rep.metrics.emplace_back("gamma_kato", s.gamma_kato);
        for (const auto& msg : s.violations) spdlog::warn("e3d sweep: {}", msg);
        rep.checks.push_back(check_le("sweep_implications", s.violations.size(), 0,
                                      s.violations.empty() ? "" : s.violations.front()));
    }

    if (p.flag("hardy", false)) {
        if (v.family() != RadialPotential::Family::inverse_square)
            throw UsageError("e3d: hardy=1 needs the inverse_square potential");
        const HardyExtrapolation h = hardy_extrapolation(p.real("c0", 0.5), {1e-2, 1e-3, 1e-4}, g);
        Curve c{"hardy", {"cutoff", "fkv"}, {}};
        for (std::size_t k = 0; k < h.cutoffs.size(); ++k) c.rows.push_back({h.cutoffs[k], h.values[k]});
        rep.curves.push_back(std::move(c));
        rep.metrics.emplace_back("hardy_limit", h.limit);
    }
}

// ---- hyperbolic3d --------------------------------------------------------

HyperbolicPotential potential_h3(const RunConfig& cfg, const Params& p)
{
    const std::string& f = cfg.potential;
    if (f.empty() || f == "zero") return HyperbolicPotential::zero();
    if (f == "bump") return HyperbolicPotential::bump(p.complex("amp", 1.0), p.real("radius", 2.0));
    if (f == "sech2") return HyperbolicPotential::sech2(p.complex("gamma", 1.0), p.real("scale", 0.5));
    if (f == "inverse_square")
        return HyperbolicPotential::inverse_square(p.real("c0", 0.5), p.real("rho0", 1e-2), p.real("rho1", 1.0));
    if (looks_like_file(f)) return HyperbolicPotential::from_csv(f);
    throw UsageError("h3: unknown potential '" + f + "' (zero, bump, sech2, inverse_square, or a CSV file)");
}

H3ZGrid parse_h3_zgrid(const std::string& s)
{
    H3ZGrid z;
    const auto m = parse_params(s);
    const Params p(m, {"lmax", "nre", "rays", "raypts", "raymax", "ring", "ringpts"});
    z.lambda_max = p.real("lmax", z.lambda_max);
    z.n_re = p.integer("nre", z.n_re);
    z.n_rays = p.integer("rays", z.n_rays);
    z.ray_points = p.integer("raypts", z.ray_points);
    z.ray_max = p.real("raymax", z.ray_max);
    z.ring_radius = p.real("ring", z.ring_radius);
    z.ring_points = p.integer("ringpts", z.ring_points);
    if (z.n_re < 1 || z.n_rays < 0 || z.ray_points < 0 || z.ring_points < 0 || !(z.lambda_max > 1.0))
        throw UsageError("h3: bad z-grid");
    return z;
}

void h3_body(Report& rep)
{
    const RunConfig& cfg = rep.config;
    const Params p(cfg.params, {"amp", "radius", "gamma", "scale", "c0", "rho0", "rho1", "c", "fd", "fd_R", "fd_n",
                                "panel_len", "order"});
    HGrid g;
    g.panel_len = p.real("panel_len", g.panel_len);
    g.order = p.integer("order", g.order);
    if (cfg.extent > 0) g.R = cfg.extent;
    if (cfg.grid_n > 0) spdlog::warn("h3: --grid-n is ignored; use --params order=,panel_len=");
    HyperbolicPotential v = potential_h3(cfg, p);
    if (p.has("c")) v = scale_to_subordination(v, p.real("c", 0.5), g);
    const H3ZGrid zg = parse_h3_zgrid(cfg.zgrid);
    Rect search{-2.0, 3.0, -2.0, 2.0};
    if (cfg.has_search) search = cfg.search;

    const H3StabilityReport st = stability_scan_h3(v, zg, g);
    spdlog::info("h3: {} samples, sup ||K|| = {}", st.samples, st.sup_norm);
    rep.metrics.emplace_back("subordination_c", st.c);
    rep.metrics.emplace_back("edge_norm", st.edge_norm);
    rep.metrics.emplace_back("sup_norm", st.sup_norm);
    rep.metrics.emplace_back("samples", static_cast<double>(st.samples));
    rep.metrics.emplace_back("dominance_gap", st.dominance_gap);
    Curve kz{"k_norm_zgrid", {"re", "im", "norm"}, {}};
    for (std::size_t k = 0; k < st.z.size(); ++k) kz.rows.push_back({st.z[k].real(), st.z[k].imag(), st.norms[k]});
    rep.curves.push_back(std::move(kz));

    SpectralReport bs = eigenvalue_hunt_h3(v, g, search);
    spdlog::info("h3: Birman-Schwinger hunt found {} eigenvalue(s)", bs.eigenvalues.size());
    rep.certificates = bs.certificates;
    add_k_norm_check(rep, bs);
    const bool subordinated = v.linf_norm() == 0.0 || st.c < 1.0;
    if (subordinated) {
        rep.checks.push_back(check_le("stability_sup", st.sup_norm, st.c + 1e-3, st.note));
        rep.checks.push_back(check_le("stability_refinement", st.refinement_needed ? 1 : 0, 0));
        rep.checks.push_back(check_le("eigenvalues_in_search", bs.eigenvalues.size(), 0));
    }
    const bool run_fd = p.flag("fd", !bs.eigenvalues.empty()) && v.linf_norm() > 0.0;
    if (run_fd) {
        const double fr = p.real("fd_R", 20.0);
        const int fn = p.integer("fd_n", 4000);
        SpectralReport fd = fd_oracle_h3(v, fr, fn);
        const std::vector<EigenEntry> fd_in = inside(fd.eigenvalues, search);
        const double gap = std::max(one_sided_gap(bs.eigenvalues, fd_in), one_sided_gap(fd_in, bs.eigenvalues));
        rep.checks.push_back(check_le("bs_fd_agreement", gap, 1e-3,
                                      fmt::format("{} bs, {} fd in the search rectangle", bs.eigenvalues.size(),
                                                  fd_in.size())));
        rep.spectra.push_back(std::move(bs));
        rep.spectra.push_back(std::move(fd));
    } else {
        rep.spectra.push_back(std::move(bs));
    }
}

// ---- dirac ---------------------------------------------------------------

void dirac_body(Report& rep)
{
    const RunConfig& cfg = rep.config;
    const Params p(cfg.params, {"norm3", "norm32", "norm3_v1"});
    double n3 = 0.0, n32 = 0.0;
    if (!cfg.potential.empty()) {
        const auto samples = read_matrix_samples(cfg.potential);
        double worst = 0.0;
        for (const auto& s : samples) {
            const double scale = std::max(1.0, s.v);
            worst = std::max(worst, (s.U * s.absV - s.V).norm() / scale);
        }
        rep.checks.push_back(check_le("polar_reconstruction", worst, 1e-10,
                                      fmt::format("{} samples", samples.size())));
        if (p.has("norm3") || p.has("norm32"))
            throw UsageError("dirac: give either a sample file or norm3/norm32, not both");
        const ProfileNorms pn = radial_profile_norms(samples);
        n3 = pn.l3;
        n32 = pn.l32;
    } else {
        n3 = p.real("norm3", 0.0);
        n32 = p.real("norm32", 0.0);
    }
    const EnclosureRegion r = enclosure_region(n3, n32);
    rep.metrics.emplace_back("norm3", r.norm3);
    rep.metrics.emplace_back("norm32", r.norm32);
    rep.metrics.emplace_back("C1", r.C1);
    rep.metrics.emplace_back("C2", r.C2);
    rep.metrics.emplace_back("half_width", r.half_width);
    rep.metrics.emplace_back("all_plane", r.all_plane ? 1.0 : 0.0);
    rep.metrics.emplace_back("empty", r.empty ? 1.0 : 0.0);
    rep.certificates.push_back(EnclosureCertificate::make(
        "dirac_C1_norm3", r.C1 * r.norm3, 1.0,
        r.all_plane ? "whole plane excluded" : (r.empty ? "no strip" : fmt::format("strip |Re z| < {}", r.half_width))));
    if (p.has("norm3_v1")) {
        const double k = p.real("norm3_v1", 0.0);
        rep.certificates.push_back(EnclosureCertificate::make("kato_l3", k, kato_l3_threshold()));
        rep.metrics.emplace_back("kato_sufficient", kato_sufficiency_check(k) ? 1.0 : 0.0);
    }
    Curve c{"enclosure_boundary", {"t", "norm3", "norm32", "half_width"}, {}};
    for (int k = 0; k <= 50; ++k) {
        const double t = k / 50.0;
        const EnclosureRegion s = enclosure_region(t * n3, t * n32);
        c.rows.push_back({t, s.norm3, s.norm32, s.half_width});
    }
    rep.curves.push_back(std::move(c));
}

} // namespace

Report run_lab(int trials, int dim_max, std::uint64_t seed, const RunConfig& cfg)
{
    RunConfig c = cfg;
    c.subcommand = "lab";
    c.trials = trials;
    c.dim_max = dim_max;
    c.seed = seed;
    init_logging();
    Report rep = fresh_report(c);
    Clock clock(rep);
    lab_body(rep, trials, dim_max, seed);
    clock.stop();
    rep.settle();
    return rep;
}

Report run_model(const RunConfig& cfg)
{
    init_logging();
    Report rep = fresh_report(cfg);
    Clock clock(rep);
    const std::string& m = cfg.subcommand;
    if (m == "s1d" || m == "schrodinger1d") s1d_body(rep);
    else if (m == "e3d" || m == "euclid3d") e3d_body(rep);
    else if (m == "h3" || m == "hyperbolic3d") h3_body(rep);
    else if (m == "dirac") dirac_body(rep);
    else throw UsageError("unknown model '" + m + "'");
    clock.stop();
    rep.settle();
    return rep;
}

Report run_command(const RunConfig& cfg)
{
    auto failed = [&](RunStatus s, const std::string& msg) {
        Report r = fresh_report(cfg);
        r.started = cfg.fixed_clock ? "1970-01-01T00:00:00Z" : now_utc();
        r.status = s;
        r.message = msg;
        spdlog::error("{}", msg);
        return r;
    };
    init_logging();
    try {
        if (cfg.subcommand == "lab") return run_lab(cfg.trials, cfg.dim_max, cfg.seed, cfg);
        return run_model(cfg);
    } catch (const UsageError& e) {
        return failed(RunStatus::usage_error, e.what());
    } catch (const DomainError& e) {
        return failed(RunStatus::usage_error, e.what());
    } catch (const NumericalFailure& e) {
        return failed(RunStatus::numerical_failure, e.what());
    } catch (const TheoremViolation& e) {
        return failed(RunStatus::check_failed, e.what());
    } catch (const AssumptionViolated& e) {
        return failed(RunStatus::check_failed, e.what());
    }
}

// ---- serialisation -------------------------------------------------------

namespace {

json num(double x)
{
    if (std::isfinite(x)) return x;
    if (std::isnan(x)) return "nan";
    return x > 0 ? "inf" : "-inf";
}

double get_num(const json& j)
{
    if (j.is_string()) {
        const std::string s = j.get<std::string>();
        if (s == "inf") return INFINITY;
        if (s == "-inf") return -INFINITY;
        if (s == "nan") return NAN;
        throw UsageError("bad number in report: " + s);
    }
    return j.get<double>();
}

json pair(cplx z) { return json::array({num(z.real()), num(z.imag())}); }
cplx get_pair(const json& j) { return {get_num(j.at(0)), get_num(j.at(1))}; }

json cert_json(const EnclosureCertificate& c)
{
    return json{{"kind", c.kind},       {"computed", num(c.computed)}, {"threshold", num(c.threshold)},
                {"verdict", c.verdict}, {"margin", num(c.margin)},     {"note", c.note}};
}

EnclosureCertificate cert_from(const json& j)
{
    EnclosureCertificate c;
    c.kind = j.at("kind").get<std::string>();
    c.computed = get_num(j.at("computed"));
    c.threshold = get_num(j.at("threshold"));
    c.verdict = j.at("verdict").get<bool>();
    c.margin = get_num(j.at("margin"));
    c.note = j.at("note").get<std::string>();
    return c;
}

Method method_from(const std::string& s)
{
    if (s == to_string(Method::bs_root)) return Method::bs_root;
    if (s == to_string(Method::fd_oracle)) return Method::fd_oracle;
    throw UsageError("unknown method in report: " + s);
}

} // namespace

json to_json(const Report& r)
{
    json j;
    j["schema_version"] = r.schema_version;
    j["tool"] = "bslab";
    j["version"] = r.version;
    const RunConfig& c = r.config;
    json params = json::object();
    for (const auto& [k, v] : c.params) params[k] = v;
    j["config"] = json{{"subcommand", c.subcommand},
                       {"potential", c.potential},
                       {"params", params},
                       {"extent", num(c.extent)},
                       {"grid_n", c.grid_n},
                       {"search", c.has_search ? json::array({num(c.search.re_min), num(c.search.re_max),
                                                              num(c.search.im_min), num(c.search.im_max)})
                                               : json(nullptr)},
                       {"zgrid", c.zgrid},
                       {"seed", c.seed},
                       {"out", c.out},
                       {"format", c.format},
                       {"trials", c.trials},
                       {"dim_max", c.dim_max},
                       {"fixed_clock", c.fixed_clock}};
    j["status"] = to_string(r.status);
    j["exit_code"] = exit_code(r.status);
    j["message"] = r.message;
    j["certificates"] = json::array();
    for (const auto& x : r.certificates) j["certificates"].push_back(cert_json(x));
    j["spectra"] = json::array();
    for (const auto& s : r.spectra) {
        json e = json::array();
        for (const auto& x : s.eigenvalues)
            e.push_back(json{{"lambda", pair(x.lambda)},
                             {"residual", num(x.residual)},
                             {"method", to_string(x.method)},
                             {"grid_n", x.grid_n},
                             {"extent", num(x.extent)},
                             {"k_norm", num(x.k_norm)},
                             {"lambda_coarse", pair(x.lambda_coarse)}});
        json rej = json::array();
        for (const auto& x : s.rejected) rej.push_back(json{{"lambda", pair(x.lambda)}, {"reason", x.reason}});
        json cs = json::array();
        for (const auto& x : s.certificates) cs.push_back(cert_json(x));
        j["spectra"].push_back(json{{"method", s.method},
                                    {"grid_n", s.grid_n},
                                    {"extent", num(s.extent)},
                                    {"tolerance", num(s.tolerance)},
                                    {"eigenvalues", e},
                                    {"rejected", rej},
                                    {"certificates", cs}});
    }
    j["checks"] = json::array();
    for (const auto& x : r.checks)
        j["checks"].push_back(json{{"name", x.name},
                                   {"pass", x.pass},
                                   {"value", num(x.value)},
                                   {"threshold", num(x.threshold)},
                                   {"detail", x.detail}});
    j["metrics"] = json::object();
    for (const auto& [k, v] : r.metrics) j["metrics"][k] = num(v);
    j["curves"] = json::array();
    for (const auto& cv : r.curves) {
        json rows = json::array();
        for (const auto& row : cv.rows) {
            json a = json::array();
            for (double x : row) a.push_back(num(x));
            rows.push_back(a);
        }
        j["curves"].push_back(json{{"name", cv.name}, {"columns", cv.columns}, {"rows", rows}});
    }
    j["timing"] = json{{"started", r.started}, {"elapsed_s", num(r.elapsed_s)}};
    return j;
}

Report report_from_json(const json& j)
{
    Report r;
    r.schema_version = j.at("schema_version").get<int>();
    if (r.schema_version != report_schema_version)
        throw UsageError("unsupported report schema version " + std::to_string(r.schema_version));
    r.version = j.at("version").get<std::string>();
    const json& c = j.at("config");
    RunConfig& cfg = r.config;
    cfg.subcommand = c.at("subcommand").get<std::string>();
    cfg.potential = c.at("potential").get<std::string>();
    for (const auto& [k, v] : c.at("params").items()) cfg.params[k] = v.get<std::string>();
    cfg.extent = get_num(c.at("extent"));
    cfg.grid_n = c.at("grid_n").get<int>();
    cfg.has_search = !c.at("search").is_null();
    if (cfg.has_search) {
        const json& s = c.at("search");
        cfg.search = Rect{get_num(s.at(0)), get_num(s.at(1)), get_num(s.at(2)), get_num(s.at(3))};
    }
    cfg.zgrid = c.at("zgrid").get<std::string>();
    cfg.seed = c.at("seed").get<std::uint64_t>();
    cfg.out = c.at("out").get<std::string>();
    cfg.format = c.at("format").get<std::string>();
    cfg.trials = c.at("trials").get<int>();
    cfg.dim_max = c.at("dim_max").get<int>();
    cfg.fixed_clock = c.at("fixed_clock").get<bool>();
    r.status = status_from_string(j.at("status").get<std::string>());
    r.message = j.at("message").get<std::string>();
    for (const auto& x : j.at("certificates")) r.certificates.push_back(cert_from(x));
    for (const auto& s : j.at("spectra")) {
        SpectralReport sr;
        sr.method = s.at("method").get<std::string>();
        sr.grid_n = s.at("grid_n").get<int>();
        sr.extent = get_num(s.at("extent"));
        sr.tolerance = get_num(s.at("tolerance"));
        for (const auto& e : s.at("eigenvalues")) {
            EigenEntry x;
            x.lambda = get_pair(e.at("lambda"));
            x.residual = get_num(e.at("residual"));
            x.method = method_from(e.at("method").get<std::string>());
            x.grid_n = e.at("grid_n").get<int>();
            x.extent = get_num(e.at("extent"));
            x.k_norm = get_num(e.at("k_norm"));
            x.lambda_coarse = get_pair(e.at("lambda_coarse"));
            sr.eigenvalues.push_back(x);
        }
        for (const auto& e : s.at("rejected"))
            sr.rejected.push_back(Candidate{get_pair(e.at("lambda")), e.at("reason").get<std::string>()});
        for (const auto& e : s.at("certificates")) sr.certificates.push_back(cert_from(e));
        r.spectra.push_back(std::move(sr));
    }
    for (const auto& x : j.at("checks"))
        r.checks.push_back(CheckOutcome{x.at("name").get<std::string>(), x.at("pass").get<bool>(),
                                        get_num(x.at("value")), get_num(x.at("threshold")),
                                        x.at("detail").get<std::string>()});
    for (const auto& [k, v] : j.at("metrics").items()) r.metrics.emplace_back(k, get_num(v));
    for (const auto& cv : j.at("curves")) {
        Curve k;
        k.name = cv.at("name").get<std::string>();
        k.columns = cv.at("columns").get<std::vector<std::string>>();
        for (const auto& row : cv.at("rows")) {
            std::vector<double> v;
            for (const auto& x : row) v.push_back(get_num(x));
            k.rows.push_back(std::move(v));
        }
        r.curves.push_back(std::move(k));
    }
    r.started = j.at("timing").at("started").get<std::string>();
    r.elapsed_s = get_num(j.at("timing").at("elapsed_s"));
    return r;
}

namespace {

std::string csv_field(const std::string& s)
{
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string q = "\"";
    for (char ch : s) {
        if (ch == '"') q += '"';
        q += ch;
    }
    return q + "\"";
}

std::string csv_num(double x) { return std::isfinite(x) ? fmt::format("{}", x) : (std::isnan(x) ? "nan" : (x > 0 ? "inf" : "-inf")); }

std::ofstream open_out(const std::filesystem::path& p)
{
    std::ofstream f(p);
    if (!f) throw UsageError("cannot write " + p.string());
    return f;
}

} // namespace

std::vector<std::string> emit_report(const Report& r, const std::string& out, const std::string& format)
{
    namespace fs = std::filesystem;
    const std::string doc = to_json(r).dump(2) + "\n";
    if (format == "json") {
        if (out.empty() || out == "-") {
            std::cout << doc;
            return {"-"};
        }
        std::ofstream f = open_out(out);
        f << doc;
        if (!f) throw UsageError("cannot write " + out);
        return {out};
    }
    if (format != "csv-bundle") throw UsageError("unknown format '" + format + "' (json, csv-bundle)");
    if (out.empty() || out == "-") throw UsageError("csv-bundle needs --out DIR");
    const fs::path dir(out);
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec || !fs::is_directory(dir)) throw UsageError("cannot create directory " + out);
    std::vector<std::string> written;
    auto write = [&](const std::string& name, const std::string& body) {
        const fs::path p = dir / name;
        std::ofstream f = open_out(p);
        f << body;
        if (!f) throw UsageError("cannot write " + p.string());
        written.push_back(p.string());
    };
    write("report.json", doc);

    std::string eig = "spectrum,method,re,im,residual,grid_n,extent,k_norm\n";
    for (std::size_t s = 0; s < r.spectra.size(); ++s)
        for (const auto& e : r.spectra[s].eigenvalues)
            eig += fmt::format("{},{},{},{},{},{},{},{}\n", s, to_string(e.method), csv_num(e.lambda.real()),
                               csv_num(e.lambda.imag()), csv_num(e.residual), e.grid_n, csv_num(e.extent),
                               csv_num(e.k_norm));
    write("eigenvalues.csv", eig);

    std::string cert = "kind,computed,threshold,verdict,margin\n";
    for (const auto& c : r.certificates)
        cert += fmt::format("{},{},{},{},{}\n", csv_field(c.kind), csv_num(c.computed), csv_num(c.threshold),
                            c.verdict ? 1 : 0, csv_num(c.margin));
    write("certificates.csv", cert);

    std::string chk = "name,pass,value,threshold,detail\n";
    for (const auto& c : r.checks)
        chk += fmt::format("{},{},{},{},{}\n", csv_field(c.name), c.pass ? 1 : 0, csv_num(c.value),
                           csv_num(c.threshold), csv_field(c.detail));
    write("checks.csv", chk);

    for (const auto& cv : r.curves) {
        std::string body;
        for (std::size_t k = 0; k < cv.columns.size(); ++k) body += (k ? "," : "") + csv_field(cv.columns[k]);
        body += "\n";
        for (const auto& row : cv.rows) {
            for (std::size_t k = 0; k < row.size(); ++k) body += (k ? "," : "") + csv_num(row[k]);
            body += "\n";
        }
        write(cv.name + ".csv", body);
    }
    return written;
}

} // namespace bslab
