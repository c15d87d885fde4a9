#include "bslab/dirac.hpp"

#include <algorithm>
#include <limits>
#include <cmath>
#include <fstream>
#include <sstream>

#include "bslab/errors.hpp"

namespace bslab {

PolarDecomposition matrix_polar(const CMatrix& V)
{
    if (V.rows() != V.cols()) throw UsageError("matrix_polar: square matrix expected");
    const Eigen::Index n = V.rows();
    PolarDecomposition p;
    const double scale = operator_norm(V);
    if (scale == 0.0) {
        p.U = CMatrix::Zero(n, n);
        p.absV = CMatrix::Zero(n, n);
        return p;
    }
    // SVD of V itself; going through V^* V would square the conditioning.
    Eigen::JacobiSVD<CMatrix> svd(V, Eigen::ComputeFullU | Eigen::ComputeFullV);
    const RVector& s = svd.singularValues();
    const double cut = 16.0 * std::numeric_limits<double>::epsilon() * static_cast<double>(n) * scale;
    RVector keep(n);
    for (Eigen::Index i = 0; i < n; ++i) keep(i) = s(i) > cut ? 1.0 : 0.0;
    const CMatrix& W = svd.matrixU();
    const CMatrix& X = svd.matrixV();
    p.absV = X * s.asDiagonal() * X.adjoint();
    p.U = W * keep.asDiagonal() * X.adjoint();
    return p;
}

MatrixPotentialSample make_sample(std::array<double, 3> site, const CMatrix& V, bool radial)
{
    MatrixPotentialSample s;
    s.site = site;
    s.radial = radial;
    s.V = V;
    const PolarDecomposition p = matrix_polar(V);
    s.U = p.U;
    s.absV = p.absV;
    s.v = operator_norm(V);
    return s;
}

std::vector<MatrixPotentialSample> read_matrix_samples(const std::string& path)
{
    std::ifstream in(path);
    if (!in) throw UsageError("cannot open matrix potential file " + path);
    std::vector<MatrixPotentialSample> out;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        std::replace(line.begin(), line.end(), ',', ' ');
        std::istringstream ss(line);
        std::vector<double> x;
        double t;
        while (ss >> t) x.push_back(t);
        if (x.empty()) continue; // header or blank
        if (x.size() != 33 && x.size() != 35)
            throw UsageError(path + ":" + std::to_string(lineno) + ": expected 33 or 35 numbers");
        const bool radial = x.size() == 33;
        const std::size_t off = radial ? 1 : 3;
        std::array<double, 3> site{x[0], radial ? 0.0 : x[1], radial ? 0.0 : x[2]};
        CMatrix V(4, 4);
        for (int i = 0; i < 4; ++i)
            for (int j = 0; j < 4; ++j) V(i, j) = cplx(x[off + 2 * (4 * i + j)], x[off + 2 * (4 * i + j) + 1]);
        out.push_back(make_sample(site, V, radial));
    }
    return out;
}

ProfileNorms radial_profile_norms(const std::vector<MatrixPotentialSample>& samples)
{
    if (samples.size() < 2) throw UsageError("radial profile needs at least two samples");
    for (std::size_t i = 0; i < samples.size(); ++i) {
        if (!samples[i].radial) throw UsageError("radial profile: samples carry 3D sites");
        if (i > 0 && !(samples[i].site[0] > samples[i - 1].site[0]))
            throw UsageError("radial profile: r must increase");
    }
    auto norm = [&](double p) {
        double acc = 0.0;
        for (std::size_t i = 0; i + 1 < samples.size(); ++i) {
            const double r0 = samples[i].site[0], r1 = samples[i + 1].site[0];
            const double f0 = std::pow(samples[i].v, p) * r0 * r0;
            const double f1 = std::pow(samples[i + 1].v, p) * r1 * r1;
            acc += 0.5 * (r1 - r0) * (f0 + f1);
        }
        return std::pow(4.0 * M_PI * acc, 1.0 / p);
    };
    return {norm(3.0), norm(1.5)};
}

DiracConstants dirac_constants()
{
    const double c1 = std::cbrt(M_PI / 2.0) * std::sqrt(1.0 + std::exp(-1.0) + 2.0 * std::exp(-2.0));
    const double c2 = std::pow(2.0, 17.0 / 6.0) / (3.0 * std::pow(M_PI, 2.0 / 3.0));
    return {c1, c2};
}

EnclosureRegion enclosure_region(double norm3, double norm32)
{
    if (!(norm3 >= 0.0) || !(norm32 >= 0.0)) throw UsageError("enclosure_region: norms must be >= 0");
    const DiracConstants c = dirac_constants();
    EnclosureRegion r;
    r.norm3 = norm3;
    r.norm32 = norm32;
    r.C1 = c.C1;
    r.C2 = c.C2;
    const double slack = 1.0 - c.C1 * norm3;
    if (slack <= 0.0) {
        r.empty = true;
        r.half_width = 0.0;
    } else if (norm32 == 0.0) {
        r.all_plane = true;
        r.half_width = INFINITY;
    } else {
        r.half_width = slack / (c.C2 * norm32);
    }
    return r;
}

bool kato_sufficiency_check(double norm3_v1) { return norm3_v1 < kato_l3_threshold(); }

} // namespace bslab
