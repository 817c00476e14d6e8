#pragma once

#include <complex>
#include <vector>

namespace conespec::specfun {

// series: power series; asymptotic: Hankel-type j+/- branch (expansion or
// integral); integral: Schlafli integral; recurrence: Miller backward ladder.
enum class BesselMethod { series, asymptotic, integral, recurrence };

struct BesselEval {
    double order;
    double argument;
    double value;
    BesselMethod method;
};

struct PhaseDecomposition {
    double order;
    double argument;
    std::complex<double> j_plus;
    std::complex<double> j_minus;
};

BesselEval bessel_j_eval(double nu, double r);
double bessel_j(double nu, double r);

// m-th derivative in r.
double bessel_j_derivative(double nu, double r, int m);

// J_nu(r) = r^{-1/2} (e^{ir} j_plus + e^{-ir} j_minus), r >= 1.
PhaseDecomposition phase_decompose(double nu, double r);

// First-kind Hankel function of order zero and its conjugate.
std::complex<double> hankel0_plus(double y);
std::complex<double> hankel0_minus(double y);

// J_{nu0 + m}(r) for m = 0 .. count-1.
void bessel_j_ladder(double nu0, double r, int count, double* out);
std::vector<double> bessel_j_ladder(double nu0, double r, int count);

const char* to_string(BesselMethod m);

}  // namespace conespec::specfun
