// bslab: run the checks of one model and write a report.
//
//   bslab lab --trials 200 --dim-max 12 --seed 42
//   bslab s1d --potential step --params gamma=4i --domain 20
//   bslab h3 --potential bump --params c=0.5 --out h3.json
//   bslab dirac --params norm3=0,norm32=0
//
// Exit codes: 0 pass, 1 a check failed, 2 usage, 3 numerical failure.

#include <iostream>

#include <CLI11.hpp>

#include "bslab/errors.hpp"
#include "bslab/report.hpp"

namespace {

struct Raw {
    std::string params, search, potential, zgrid, out, format = "json";
    int grid_n = 0, trials = 1, dim_max = 12;
    double domain = 0.0;
    std::uint64_t seed = 0;
    bool fixed_clock = false;
};

void common(CLI::App* sub, Raw& r)
{
    sub->add_option("--params", r.params, "key=value,... for the potential and solver");
    sub->add_option("--seed", r.seed, "random seed");
    sub->add_option("--out", r.out, "report file (json) or directory (csv-bundle); stdout if omitted");
    sub->add_option("--format", r.format, "json or csv-bundle")->check(CLI::IsMember({"json", "csv-bundle"}));
    sub->add_flag("--fixed-clock", r.fixed_clock, "zero timestamps for byte-identical reports");
}

void model(CLI::App* sub, Raw& r)
{
    common(sub, r);
    sub->add_option("--potential", r.potential, "family name or CSV file");
    sub->add_option("--grid-n", r.grid_n, "quadrature nodes")->check(CLI::PositiveNumber);
    sub->add_option("--domain", r.domain, "half-width L or radius R")->check(CLI::PositiveNumber);
    sub->add_option("--search", r.search, "re_min,re_max,im_min,im_max");
    sub->add_option("--zgrid", r.zgrid, "z-grid keys (h3): lmax,nre,rays,raypts,raymax,ring,ringpts");
}

} // namespace

int main(int argc, char** argv)
{
    bslab::init_logging();
    CLI::App app{"Birman-Schwinger spectral checks"};
    app.require_subcommand(1);
    Raw raw;
    CLI::App* lab = app.add_subcommand("lab", "random finite-dimensional systems");
    common(lab, raw);
    lab->add_option("--trials", raw.trials, "number of systems");
    lab->add_option("--dim-max", raw.dim_max, "largest n and m");
    for (const char* name : {"s1d", "e3d", "h3", "dirac"}) model(app.add_subcommand(name), raw);
    app.get_subcommand("s1d")->description("Schrodinger operator on the line");
    app.get_subcommand("e3d")->description("radial potentials on R^3");
    app.get_subcommand("h3")->description("radial potentials on hyperbolic space");
    app.get_subcommand("dirac")->description("Dirac eigenvalue exclusion region");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    bslab::RunConfig cfg;
    cfg.subcommand = app.get_subcommands().front()->get_name();
    cfg.potential = raw.potential;
    cfg.extent = raw.domain;
    cfg.grid_n = raw.grid_n;
    cfg.zgrid = raw.zgrid;
    cfg.seed = raw.seed;
    cfg.out = raw.out;
    cfg.format = raw.format;
    cfg.trials = raw.trials;
    cfg.dim_max = raw.dim_max;
    cfg.fixed_clock = raw.fixed_clock;
    try {
        cfg.params = bslab::parse_params(raw.params);
        if (!raw.search.empty()) {
            cfg.search = bslab::parse_rect(raw.search);
            cfg.has_search = true;
        }
    } catch (const bslab::UsageError& e) {
        std::cerr << e.what() << "\n";
        return 2;
    }

    const bslab::Report rep = bslab::run_command(cfg);
    try {
        bslab::emit_report(rep, cfg.out, cfg.format);
    } catch (const bslab::UsageError& e) {
        std::cerr << e.what() << "\n";
        return 2;
    }
    for (const auto& c : rep.checks)
        if (!c.pass) std::cerr << "check failed: " << c.name << " (" << c.value << " vs " << c.threshold << ")\n";
    return bslab::exit_code(rep.status);
}
