#pragma once

#include <complex>
#include <iosfwd>
#include <vector>

#include "conespec/cone.hpp"
#include "conespec/cross_section.hpp"

namespace conespec {

enum class Representation { bessel_series, cheeger_taylor };
const char* to_string(Representation r);

struct SpectralMeasureSample {
    double lambda = 0.0;
    ConePoint x, y;
    std::complex<double> value;
    Representation tag = Representation::bessel_series;
    double tail_bound = 0.0;
    int levels_used = 0;
};

// dE(lambda; x, y) = lambda (r1 r2)^{-(n-2)/2} sum_l P_l(x, y) J_nu(lambda r1) J_nu(lambda r2).
SpectralMeasureSample spectral_measure_bessel(const AngularSpectrum& spectrum, double lambda, const ConePoint& x,
                                              const ConePoint& y, double tolerance = 1e-10);

// Oscillatory-integral form: the same measure from
// (lambda/pi)(r1 r2)^{-(n-2)/2} sum_l P_l [int_0^pi J0(lambda d(s)) cos(nu s) ds
//                                          - sin(nu pi) int_0^inf J0(lambda d~(s)) e^{-nu s} ds].
SpectralMeasureSample spectral_measure_ct(const AngularSpectrum& spectrum, double lambda, const ConePoint& x,
                                          const ConePoint& y, double tolerance = 1e-10);

// dE at many frequencies for one (x, y); the angular projectors are shared.
// Parallel over nodes unless `parallel` is false.
std::vector<std::complex<double>> spectral_density(const AngularSpectrum& spectrum,
                                                   const std::vector<double>& lambdas, const ConePoint& x,
                                                   const ConePoint& y, bool parallel = true,
                                                   double tolerance = 1e-10);

// Outgoing (sign = +1) or incoming (sign = -1) resolvent (L - (lambda +- i0)^2)^{-1}.
std::complex<double> resolvent_kernel(const AngularSpectrum& spectrum, double lambda, int sign,
                                      const ConePoint& x, const ConePoint& y, double tolerance = 1e-10);

// Per-level s-integrals [int_0^pi g(lambda d) cos(nu s) ds - sin(nu pi) int_0^inf g(lambda d~) e^{-nu s} ds]
// for g = J0 (exposed for tests; each equals pi J_nu(lambda r1) J_nu(lambda r2)).
std::vector<std::complex<double>> ct_level_integrals(const std::vector<double>& nus, double lambda, double r1,
                                                     double r2, double tolerance = 1e-12);

struct LowFrequencyReport {
    std::vector<double> lambdas;
    std::vector<double> scaled;  // |dE| / lambda^{n-1}
    double fitted_exponent = 0.0;
    double target_exponent = 0.0;
    double residual = 0.0;
};

// Fits |dE| / lambda^{n-1} against lambda^2 r1 r2 on a log-log scale.
LowFrequencyReport low_frequency_profile(const AngularSpectrum& spectrum, const std::vector<double>& lambdas,
                                         const ConePoint& x, const ConePoint& y);

// W(t, v) = 2 pi int phi(2^{-k} lambda) e^{i t lambda} J0(lambda |v|) lambda d lambda.
std::complex<double> oscillatory_w(double t, double v, int k = 0);

// Columns: lambda, r1, r2, angular distance, Re, Im, representation.
void write_samples_csv(std::ostream& out, const std::vector<SpectralMeasureSample>& samples);

}  // namespace conespec
