#include "bslab/potential1d.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "bslab/errors.hpp"

namespace bslab {

namespace {

double tabulated_abs_integral(const std::vector<double>& x, const std::vector<cplx>& v, double lo,
                              double hi)
{
    using boost::math::quadrature::gauss_kronrod;
    double total = 0.0;
    for (std::size_t i = 0; i + 1 < x.size(); ++i) {
        const double a = std::max(x[i], lo), b = std::min(x[i + 1], hi);
        if (b <= a) continue;
        const double h = x[i + 1] - x[i];
        auto f = [&](double t) {
            const double s = (t - x[i]) / h;
            return std::abs(v[i] * (1.0 - s) + v[i + 1] * s);
        };
        total += gauss_kronrod<double, 31>::integrate(f, a, b, 10, 1e-13);
    }
    return total;
}

} // namespace

Potential1D Potential1D::zero()
{
    Potential1D p;
    p.finish();
    return p;
}

Potential1D Potential1D::complex_step(cplx gamma, double a, double b)
{
    if (!(b > a)) throw UsageError("complex_step: need a < b");
    if (!std::isfinite(gamma.real()) || !std::isfinite(gamma.imag()))
        throw UsageError("complex_step: non-finite amplitude");
    Potential1D p;
    p.family_ = Family::complex_step;
    p.c_ = gamma;
    p.p_ = a;
    p.q_ = b;
    p.finish();
    return p;
}

Potential1D Potential1D::poschl_teller(double s, double scale)
{
    if (!(s > 0.0) || !(scale > 0.0)) throw UsageError("poschl_teller: need s > 0, scale > 0");
    Potential1D p;
    p.family_ = Family::poschl_teller;
    p.p_ = s;
    p.q_ = scale;
    p.finish();
    return p;
}

Potential1D Potential1D::gaussian(cplx amplitude, double width)
{
    if (!(width > 0.0)) throw UsageError("gaussian: need width > 0");
    Potential1D p;
    p.family_ = Family::gaussian;
    p.c_ = amplitude;
    p.p_ = width;
    p.finish();
    return p;
}

Potential1D Potential1D::tabulated(std::vector<double> x, std::vector<cplx> v)
{
    if (x.size() != v.size() || x.size() < 2) throw UsageError("tabulated: need >= 2 samples");
    for (std::size_t i = 0; i + 1 < x.size(); ++i)
        if (!(x[i + 1] > x[i])) throw UsageError("tabulated: x must increase strictly");
    Potential1D p;
    p.family_ = Family::tabulated;
    p.tx_ = std::move(x);
    p.tv_ = std::move(v);
    p.finish();
    return p;
}

Potential1D Potential1D::from_csv(const std::string& path)
{
    std::ifstream in(path);
    if (!in) throw UsageError("cannot open potential file " + path);
    std::vector<double> x;
    std::vector<cplx> v;
    std::string line;
    while (std::getline(in, line)) {
        std::replace(line.begin(), line.end(), ',', ' ');
        std::istringstream ss(line);
        double a, re, im;
        if (ss >> a >> re >> im) {
            x.push_back(a);
            v.emplace_back(re, im);
        }
    }
    return tabulated(std::move(x), std::move(v));
}

std::string Potential1D::name() const
{
    switch (family_) {
    case Family::zero: return "zero";
    case Family::complex_step: return "complex_step";
    case Family::poschl_teller: return "poschl_teller";
    case Family::gaussian: return "gaussian";
    case Family::tabulated: return "tabulated";
    }
    return "?";
}

cplx Potential1D::operator()(double x) const
{
    switch (family_) {
    case Family::zero: return 0.0;
    case Family::complex_step: return (x >= p_ && x < q_) ? c_ : cplx(0.0);
    case Family::poschl_teller: {
        const double c = 1.0 / std::cosh(x / q_);
        return -p_ * (p_ + 1.0) * c * c / (q_ * q_);
    }
    case Family::gaussian: return c_ * std::exp(-(x * x) / (p_ * p_));
    case Family::tabulated: {
        if (x < tx_.front() || x > tx_.back()) return 0.0;
        auto it = std::upper_bound(tx_.begin(), tx_.end(), x);
        if (it == tx_.end()) return tv_.back();
        const std::size_t i = static_cast<std::size_t>(it - tx_.begin()) - 1;
        const double s = (x - tx_[i]) / (tx_[i + 1] - tx_[i]);
        return tv_[i] * (1.0 - s) + tv_[i + 1] * s;
    }
    }
    return 0.0;
}

cplx Potential1D::average(double x) const
{
    if (family_ == Family::complex_step && (x == p_ || x == q_)) return 0.5 * c_;
    if (family_ == Family::tabulated && (x == tx_.front() || x == tx_.back()))
        return 0.5 * (*this)(x);
    return (*this)(x);
}

double Potential1D::tail_l1(double L) const
{
    switch (family_) {
    case Family::zero: return 0.0;
    case Family::complex_step: {
        const double inside = std::max(0.0, std::min(q_, L) - std::max(p_, -L));
        return std::abs(c_) * ((q_ - p_) - inside);
    }
    case Family::poschl_teller:
        // tail of 2 s(s+1)/scale, using 1 - tanh t = 2/(e^{2t}+1)
        return 2.0 * p_ * (p_ + 1.0) / q_ * 2.0 / (std::exp(2.0 * L / q_) + 1.0);
    case Family::gaussian: return std::abs(c_) * p_ * std::sqrt(M_PI) * std::erfc(L / p_);
    case Family::tabulated:
        return tabulated_abs_integral(tx_, tv_, -INFINITY, -L) +
               tabulated_abs_integral(tx_, tv_, L, INFINITY);
    }
    return 0.0;
}

std::vector<double> Potential1D::breakpoints() const
{
    switch (family_) {
    case Family::complex_step: return {p_, q_};
    case Family::tabulated: return {tx_.front(), tx_.back()};
    default: return {};
    }
}

double Potential1D::a_factor(double x) const { return std::sqrt(std::abs((*this)(x))); }

cplx Potential1D::b_conj_factor(double x) const
{
    const cplx v = (*this)(x);
    const double r = std::abs(v);
    if (r == 0.0) return 0.0;
    return v / std::sqrt(r);
}

void Potential1D::finish()
{
    switch (family_) {
    case Family::zero: l1_ = linf_ = 0.0; break;
    case Family::complex_step:
        l1_ = std::abs(c_) * (q_ - p_);
        linf_ = std::abs(c_);
        break;
    case Family::poschl_teller:
        l1_ = 2.0 * p_ * (p_ + 1.0) / q_;
        linf_ = p_ * (p_ + 1.0) / (q_ * q_);
        break;
    case Family::gaussian:
        l1_ = std::abs(c_) * p_ * std::sqrt(M_PI);
        linf_ = std::abs(c_);
        break;
    case Family::tabulated:
        l1_ = tabulated_abs_integral(tx_, tv_, -INFINITY, INFINITY);
        linf_ = 0.0;
        for (auto& v : tv_) linf_ = std::max(linf_, std::abs(v));
        break;
    }
}

} // namespace bslab
