#include <array>
#include <optional>

#include <pybind11/complex.h>
#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "bslab/dirac.hpp"
#include "bslab/errors.hpp"
#include "bslab/euclid3d.hpp"
#include "bslab/hyperbolic3d.hpp"
#include "bslab/report.hpp"
#include "bslab/schrodinger1d.hpp"

namespace py = pybind11;
using namespace bslab;

namespace {

// Runs one subcommand and returns (exit code, report JSON text).
std::pair<int, std::string> run_json(const std::string& subcommand, const std::string& potential,
                                     const std::map<std::string, std::string>& params, double domain, int grid_n,
                                     const std::optional<std::array<double, 4>>& search, const std::string& zgrid,
                                     std::uint64_t seed, int trials, int dim_max, bool fixed_clock)
{
    RunConfig c;
    c.subcommand = subcommand;
    c.potential = potential;
    c.params = params;
    c.extent = domain;
    c.grid_n = grid_n;
    if (search) {
        c.search = Rect{(*search)[0], (*search)[1], (*search)[2], (*search)[3]};
        c.has_search = true;
    }
    c.zgrid = zgrid;
    c.seed = seed;
    c.trials = trials;
    c.dim_max = dim_max;
    c.fixed_clock = fixed_clock;
    Report r;
    {
        py::gil_scoped_release release;
        r = run_command(c);
    }
    return {exit_code(r.status), to_json(r).dump()};
}

} // namespace

PYBIND11_MODULE(_bslab, m)
{
    m.doc() = "Birman-Schwinger spectral checks";
    init_logging();

    py::register_exception<UsageError>(m, "UsageError", PyExc_ValueError);
    py::register_exception<DomainError>(m, "DomainError", PyExc_ValueError);
    py::register_exception<NumericalFailure>(m, "NumericalFailure", PyExc_ArithmeticError);

    m.def("version", &tool_version);
    m.def("green1d", &green1d, py::arg("z"), py::arg("x"), py::arg("y"));
    m.def("green3d", &green3d, py::arg("z"), py::arg("r"), py::arg("rp"));
    m.def("green_h3", &green_h3, py::arg("z"), py::arg("rho"));

    m.def("dirac_constants", [] {
        const DiracConstants c = dirac_constants();
        return std::make_pair(c.C1, c.C2);
    });
    m.def(
        "enclosure_region",
        [](double n3, double n32) {
            const EnclosureRegion r = enclosure_region(n3, n32);
            py::dict d;
            d["norm3"] = r.norm3;
            d["norm32"] = r.norm32;
            d["half_width"] = r.half_width;
            d["all_plane"] = r.all_plane;
            d["empty"] = r.empty;
            return d;
        },
        py::arg("norm3"), py::arg("norm32"));
    m.def(
        "matrix_polar",
        [](const CMatrix& v) {
            const PolarDecomposition p = matrix_polar(v);
            return std::make_pair(p.U, p.absV);
        },
        py::arg("V"));
    m.def("kato_l3_threshold", &kato_l3_threshold);
    m.def("frank_threshold", &frank_threshold);

    m.def(
        "davies_radius",
        [](std::complex<double> gamma, double a, double b) {
            return davies_disk(Potential1D::complex_step(gamma, a, b)).threshold;
        },
        py::arg("gamma"), py::arg("a") = 0.0, py::arg("b") = 1.0);

    m.def("run_json", &run_json, py::arg("subcommand"), py::arg("potential") = "",
          py::arg("params") = std::map<std::string, std::string>{}, py::arg("domain") = 0.0, py::arg("grid_n") = 0,
          py::arg("search") = py::none(), py::arg("zgrid") = "", py::arg("seed") = 0, py::arg("trials") = 1,
          py::arg("dim_max") = 12, py::arg("fixed_clock") = false);
}
