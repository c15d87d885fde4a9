#pragma once

#include <string>
#include <vector>

#include "bslab/numerics.hpp"

namespace bslab {

// Complex potential on the real line.
class Potential1D {
public:
    enum class Family { zero, complex_step, poschl_teller, gaussian, tabulated };

    static Potential1D zero();
    // gamma on [a, b), zero elsewhere
    static Potential1D complex_step(cplx gamma, double a, double b);
    // -s(s+1) sech^2(x / scale) / scale^2
    static Potential1D poschl_teller(double s, double scale = 1.0);
    // amplitude * exp(-x^2 / width^2)
    static Potential1D gaussian(cplx amplitude, double width);
    // linear interpolation of samples, zero outside [x_front, x_back]
    static Potential1D tabulated(std::vector<double> x, std::vector<cplx> v);
    // rows "x, Re V, Im V"; lines that do not parse as numbers are skipped
    static Potential1D from_csv(const std::string& path);

    Family family() const { return family_; }
    std::string name() const;

    cplx operator()(double x) const;
    // mean of the one-sided limits; differs from operator() only at jumps
    cplx average(double x) const;

    double l1_norm() const { return l1_; }
    double linf_norm() const { return linf_; }
    // integral of |V| over |x| > L
    double tail_l1(double L) const;
    // points where V or V' may jump
    std::vector<double> breakpoints() const;

    // A = |V|^{1/2}, conj(B) = sgn V |V|^{1/2}
    double a_factor(double x) const;
    cplx b_conj_factor(double x) const;

private:
    Family family_ = Family::zero;
    cplx c_{0.0};     // gamma / amplitude
    double p_ = 0.0;  // a / s / width
    double q_ = 0.0;  // b / scale
    std::vector<double> tx_;
    std::vector<cplx> tv_;
    double l1_ = 0.0;
    double linf_ = 0.0;

    void finish();
};

} // namespace bslab
