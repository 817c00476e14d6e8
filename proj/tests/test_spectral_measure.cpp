#include <cmath>
#include <complex>
#include <numbers>
#include <random>
#include <sstream>

#include "conespec/bands.hpp"
#include "conespec/cross_section.hpp"
#include "conespec/quadrature.hpp"
#include "conespec/specfun.hpp"
#include "conespec/spectral_measure.hpp"
#include "doctest.h"

using namespace conespec;
using cd = std::complex<double>;
constexpr double kPi = std::numbers::pi;

namespace {

AngularSpectrum sphere_spectrum(double a, int levels, int dim = 2) {
    int modes = 0;
    for (int l = 0; l < levels; ++l) modes += sphere_harmonic_multiplicity(dim, l);
    return eigensolve(RoundSphere{dim, 1.0, a}, dim + 1, modes);
}

ConePoint at(double r, double angle) { return cone_point(r, Eigen::VectorXd(sphere_point(angle, 0.0))); }

double rel(cd a, cd b) { return std::abs(a - b) / std::abs(b); }

double free_measure(double lam, double R) { return lam * std::sin(lam * R) / (2 * kPi * kPi * R); }

}  // namespace

TEST_CASE("Bessel series against the free closed form") {
    const auto s = sphere_spectrum(0.0, 40);
    const ConePoint x = at(1.0, 0.0), y = at(1.5, 1.0);
    const double R = (euclidean(x) - euclidean(y)).norm();
    const auto v = spectral_measure_bessel(s, 2.0, x, y);
    CHECK(v.tag == Representation::bessel_series);
    CHECK(rel(v.value, free_measure(2.0, R)) < 1e-6);
    CHECK(std::abs(v.value.imag()) < 1e-14);
    CHECK(v.tail_bound < 1e-10);
}

TEST_CASE("diagonal values are real and positive") {
    const auto s = sphere_spectrum(-3.0 / 16.0, 40);
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> ul(0.1, 3.0), ur(0.1, 3.0), ua(0.0, kPi);
    for (int i = 0; i < 20; ++i) {
        const ConePoint x = at(ur(rng), ua(rng));
        const auto v = spectral_measure_bessel(s, ul(rng), x, x);
        CHECK(v.value.real() > 0.0);
        CHECK(std::abs(v.value.imag()) <= 1e-14 * v.value.real());
    }
}

TEST_CASE("per-level s-integrals equal pi J_nu J_nu") {
    const std::vector<double> nus = {0.25, 0.5, 1.5, 2.75, 6.5};
    for (double lam : {0.7, 2.0}) {
        const double r1 = 1.0, r2 = 1.3;
        const auto vals = ct_level_integrals(nus, lam, r1, r2);
        for (std::size_t i = 0; i < nus.size(); ++i) {
            const double expect = kPi * std::cyl_bessel_j(nus[i], lam * r1) * std::cyl_bessel_j(nus[i], lam * r2);
            CHECK(std::abs(vals[i] - expect) < 1e-9 * std::max(1.0, std::abs(expect)));
        }
    }
}

TEST_CASE("oscillatory-integral form agrees with the Bessel series") {
    SUBCASE("free, lambda = 2, r1 = r2 = 1, angle 0.7") {
        const auto s = sphere_spectrum(0.0, 40);
        const auto a = spectral_measure_bessel(s, 2.0, at(1, 0), at(1, 0.7));
        const auto b = spectral_measure_ct(s, 2.0, at(1, 0), at(1, 0.7));
        CHECK(b.tag == Representation::cheeger_taylor);
        CHECK(rel(b.value, a.value) < 1e-3);
    }
    SUBCASE("a = -3/16 on a 3 x 3 grid at lambda = 1.5") {
        const auto s = sphere_spectrum(-3.0 / 16.0, 40);
        for (double r1 : {0.8, 1.0, 1.3})
            for (double th : {0.0, 0.7, 1.4}) {
                const auto a = spectral_measure_bessel(s, 1.5, at(r1, 0), at(1.1, th));
                const auto b = spectral_measure_ct(s, 1.5, at(r1, 0), at(1.1, th));
                CHECK(rel(b.value, a.value) < 1e-3);
            }
    }
}

TEST_CASE("Hermitian symmetry under x <-> y") {
    const auto s = sphere_spectrum(-3.0 / 16.0, 40);
    const ConePoint x = at(0.9, 0.2), y = at(1.4, 1.1);
    for (double lam : {0.5, 1.7}) {
        const cd a = spectral_measure_ct(s, lam, x, y).value, b = spectral_measure_ct(s, lam, y, x).value;
        CHECK(std::abs(a - std::conj(b)) < 1e-12 * std::abs(a));
        const cd c = spectral_measure_bessel(s, lam, x, y).value, d = spectral_measure_bessel(s, lam, y, x).value;
        CHECK(std::abs(c - std::conj(d)) < 1e-12 * std::abs(c));
    }
}

TEST_CASE("resolvent") {
    // (r</r>)^nu = 0.727^nu needs ~110 levels for 1e-10.
    const auto s = sphere_spectrum(0.0, 120);
    SUBCASE("free outgoing closed form at coincident angles") {
        for (double lam : {0.5, 1.5, 2.5}) {
            const ConePoint x = at(0.8, 0.4), y = at(1.1, 0.4);
            const double R = 0.3;
            const cd expect = std::exp(cd(0, lam * R)) / (4 * kPi * R);
            CHECK(rel(resolvent_kernel(s, lam, +1, x, y), expect) < 1e-4);
        }
    }
    SUBCASE("Stone formula against the oscillatory form") {
        const std::vector<std::pair<ConePoint, ConePoint>> pts = {
            {at(0.8, 0.0), at(1.1, 0.0)}, {at(0.8, 0.0), at(1.1, 0.7)}, {at(0.8, 0.0), at(1.1, 1.4)},
            {at(0.8, 0.3), at(1.1, 2.1)}, {at(0.8, 0.0), at(1.1, 3.0)}};
        for (const auto& [x, y] : pts) {
            const double lam = 1.3;
            const cd stone =
                lam / (kPi * cd(0, 1)) * (resolvent_kernel(s, lam, +1, x, y) - resolvent_kernel(s, lam, -1, x, y));
            CHECK(rel(stone, spectral_measure_ct(s, lam, x, y).value) < 1e-3);
        }
    }
    SUBCASE("conjugation symmetry") {
        const ConePoint x = at(0.8, 0.1), y = at(1.1, 1.2);
        const cd rp = resolvent_kernel(s, 1.2, +1, x, y), rm = resolvent_kernel(s, 1.2, -1, y, x);
        CHECK(std::abs(rm - std::conj(rp)) < 1e-12 * std::abs(rp));
    }
}

TEST_CASE("low-frequency exponents") {
    std::vector<double> lams;
    for (int i = 0; i < 8; ++i) lams.push_back(0.002 * std::pow(2.0, i));
    SUBCASE("free n = 3") {
        const auto r = low_frequency_profile(sphere_spectrum(0.0, 10), lams, at(1, 0), at(1.2, 0.5));
        CHECK(r.target_exponent == doctest::Approx(0.0));
        CHECK(std::abs(r.fitted_exponent) < 0.05);
    }
    SUBCASE("a = -3/16") {
        const auto r = low_frequency_profile(sphere_spectrum(-3.0 / 16.0, 10), lams, at(1, 0), at(1.2, 0.5));
        CHECK(r.target_exponent == doctest::Approx(-0.25));
        CHECK(std::abs(r.fitted_exponent + 0.25) < 0.05);
    }
    SUBCASE("free n = 4") {
        const auto r = low_frequency_profile(sphere_spectrum(0.0, 10, 3), lams, at(1, 0), at(1.2, 0.5));
        CHECK(std::abs(r.fitted_exponent) < 0.05);
    }
}

TEST_CASE("W(t, v) in one frequency dimension") {
    // Independent composite Simpson over the support of phi.
    auto simpson = [](double t, double v) {
        const int N = 20000;
        const double h = 1.5 / N;
        cd acc = 0.0;
        for (int i = 0; i <= N; ++i) {
            const double l = 0.5 + i * h;
            const double w = (i == 0 || i == N) ? 1 : (i % 2 ? 4 : 2);
            acc += w * bands::phi(l) * std::exp(cd(0, t * l)) * std::cyl_bessel_j(0.0, l * v) * l;
        }
        return 2 * kPi * acc * h / 3.0;
    };
    CHECK(std::abs(oscillatory_w(0, 0) - simpson(0, 0)) < 1e-8 * std::abs(simpson(0, 0)));
    CHECK(oscillatory_w(0, 0).imag() == doctest::Approx(0.0));
    CHECK(std::abs(oscillatory_w(7, 3) - simpson(7, 3)) < 1e-8 * std::abs(simpson(0, 0)));

    // v = 0: t^4 |W| keeps falling.
    double last = INFINITY;
    for (double t : {80.0, 160.0, 320.0}) {
        const double scaled = std::pow(t, 4) * std::abs(oscillatory_w(t, 0));
        CHECK(scaled < last);
        last = scaled;
    }

    // The envelope constant fitted for t <= 20 also bounds later times.
    auto envelope = [](std::initializer_list<double> ts) {
        double c = 0.0;
        for (double t : ts)
            for (double v = 0.0; v <= t + 60.0; v += 0.5)
                c = std::max(c, std::abs(oscillatory_w(t, v)) * std::pow(1 + std::abs(t - v), 2) * std::sqrt(1 + v));
        return c;
    };
    const double c_early = envelope({0.0, 5.0, 10.0, 20.0});
    CHECK(std::isfinite(c_early));
    CHECK(envelope({40.0, 80.0}) <= c_early);
}

TEST_CASE("sample CSV columns") {
    const auto s = sphere_spectrum(0.0, 20);
    std::vector<SpectralMeasureSample> v = {spectral_measure_bessel(s, 1.0, at(1, 0), at(1.2, 0.5)),
                                            spectral_measure_ct(s, 1.0, at(1, 0), at(1.2, 0.5))};
    std::ostringstream os;
    write_samples_csv(os, v);
    std::istringstream is(os.str());
    std::string header, row;
    std::getline(is, header);
    CHECK(header == "lambda,r1,r2,angular_distance,re,im,representation");
    int rows = 0;
    while (std::getline(is, row)) {
        CHECK(std::count(row.begin(), row.end(), ',') == 6);
        ++rows;
    }
    CHECK(rows == 2);
    CHECK(os.str().find("cheeger_taylor") != std::string::npos);
}

TEST_CASE("resolution of identity on a radial band-limited function") {
    // f = H^{-1} F in the zero level of the free n = 3 cone, with a Gaussian
    // profile F whose mass outside (0, 2.1) is below 1e-5.
    const double lam_max = 2.1, R = 20.0;
    const auto s = sphere_spectrum(0.0, 80);
    auto F = [](double rho) { return std::exp(-(rho - 1.0) * (rho - 1.0) / (2 * 0.22 * 0.22)); };
    const auto& g = quad::gauss_legendre(64);
    auto f = [&](double r) {
        double acc = 0.0;
        for (std::size_t i = 0; i < g.nodes.size(); ++i) {
            const double rho = 0.5 * lam_max * (1 + g.nodes[i]);
            acc += 0.5 * lam_max * g.weights[i] * std::sqrt(2 / kPi) * std::sin(r * rho) / (r * rho) * F(rho) * rho * rho;
        }
        return acc / std::sqrt(4 * kPi);
    };
    // zonal reduction of the y-hat integral: 2 pi int_{-1}^{1} g(u) du
    const auto& ug = quad::gauss_legendre(48);
    const auto& lg = quad::gauss_legendre(40);
    const auto rr = quad::composite(0.0, R, 20, 12);
    std::vector<double> fr(rr.nodes.size());
    for (std::size_t i = 0; i < rr.nodes.size(); ++i) fr[i] = f(rr.nodes[i]);
    for (double r1 : {0.5, 1.0, 2.0}) {
        const ConePoint x = at(r1, 0.0);
        double acc = 0.0;
        for (std::size_t il = 0; il < lg.nodes.size(); ++il) {
            const double lam = 0.5 * lam_max * (1 + lg.nodes[il]);
            double inner = 0.0;
            for (std::size_t ir = 0; ir < rr.nodes.size(); ++ir) {
                const double r2 = rr.nodes[ir];
                double ang = 0.0;
                for (std::size_t iu = 0; iu < ug.nodes.size(); ++iu)
                    ang += ug.weights[iu] *
                           spectral_measure_bessel(s, lam, x, at(r2, std::acos(ug.nodes[iu]))).value.real();
                inner += rr.weights[ir] * r2 * r2 * fr[ir] * 2 * kPi * ang;
            }
            acc += 0.5 * lam_max * lg.weights[il] * inner;
        }
        CHECK(std::abs(acc - f(r1)) < 1e-4 * std::abs(f(r1)));
    }
}
