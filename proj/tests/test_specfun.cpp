#include <cmath>
#include <numbers>

#include "conespec/errors.hpp"
#include "conespec/specfun.hpp"
#include "doctest.h"

using namespace conespec;
using specfun::bessel_j;
constexpr double kPi = std::numbers::pi;

namespace {

// Independent power-series oracle in long double.
long double series_oracle(long double nu, long double r, int terms = 200) {
    long double sum = 0.0L, term = std::pow(r / 2.0L, nu) / std::tgamma(nu + 1.0L);
    for (int k = 0; k < terms; ++k) {
        sum += term;
        term *= -(r * r / 4.0L) / ((k + 1.0L) * (k + 1.0L + nu));
    }
    return sum;
}

double half_integer_closed_form(int twice_nu, double r) {
    const double s = std::sin(r), c = std::cos(r), pref = std::sqrt(2.0 / (kPi * r));
    switch (twice_nu) {
        case 1: return pref * s;
        case 3: return pref * (s / r - c);
        case 5: return pref * ((3.0 / (r * r) - 1.0) * s - 3.0 * c / r);
    }
    return NAN;
}

}  // namespace

TEST_CASE("bessel_j spec examples") {
    CHECK(bessel_j(0.0, 0.0) == 1.0);
    CHECK(bessel_j(0.25, 0.0) == 0.0);
    const double oracle = static_cast<double>(series_oracle(0.5L, std::numbers::pi_v<long double> / 2));
    CHECK(oracle == doctest::Approx(2.0 / kPi).epsilon(1e-15));
    CHECK(bessel_j(0.5, kPi / 2) == doctest::Approx(oracle).epsilon(1e-13));
}

TEST_CASE("bessel_j domain errors") {
    CHECK_THROWS_AS(bessel_j(-0.1, 1.0), DomainError);
    CHECK_THROWS_AS(bessel_j(1.0, -1.0), DomainError);
    CHECK_THROWS_AS(bessel_j(NAN, 1.0), DomainError);
}

TEST_CASE("bessel_j agrees with the libstdc++ oracle across branches") {
    double worst = 0.0;
    // libstdc++ loses accuracy for very large orders; those are covered below.
    for (double nu : {0.0, 0.25, 0.5, 1.0, 2.75, 7.5, 18.3, 40.0, 90.25})
        for (double r : {0.01, 0.7, 3.0, 11.9, 12.5, 20.0, 37.0, 55.0, 80.0, 150.0, 260.0, 420.0}) {
            const double ref = std::cyl_bessel_j(nu, r);
            const double env = std::max(std::abs(ref), 1e-300);
            const double err = std::abs(bessel_j(nu, r) - ref) / std::max(env, 1e-3 * std::pow(r, -0.5));
            worst = std::max(worst, err);
        }
    CHECK(worst < 1e-10);
}

TEST_CASE("large orders against frozen 30-digit values") {
    // J and Y from mpmath at 30 digits.
    struct Ref {
        double nu, r, j, y;
    };
    for (Ref c : {Ref{200.5, 420, -0.027939791402934487883, 0.030730674793582596745},
                  Ref{200.5, 1002.5, -0.025447554540749029054, -0.00074086370027687026564},
                  Ref{333, 1665, 0.018164508894898905494, -0.0077646141432015032657},
                  Ref{150.25, 160, 0.011580962377800185882, 0.10636865810768567948},
                  Ref{90.25, 420, -0.010564332009586233174, -0.037952726638175150235}}) {
        CHECK(std::abs(bessel_j(c.nu, c.r) - c.j) < 1e-13);
        const auto p = specfun::phase_decompose(c.nu, c.r);
        const auto h = 2.0 * p.j_plus * std::exp(std::complex<double>(0, c.r)) / std::sqrt(c.r);
        CHECK(std::abs(h.real() - c.j) < 1e-12);
        CHECK(std::abs(h.imag() - c.y) < 1e-11);
    }
}

TEST_CASE("half-integer closed forms on [0.1, 50]") {
    for (int tn : {1, 3, 5})
        for (int i = 0; i <= 400; ++i) {
            const double r = 0.1 + (50.0 - 0.1) * i / 400.0;
            const double exact = half_integer_closed_form(tn, r);
            // relative to the local amplitude; pointwise relative error is undefined at zeros
            const double amp = std::max(std::abs(exact), std::sqrt(2.0 / (kPi * r)) * std::min(1.0, r * r));
            CHECK(std::abs(bessel_j(tn / 2.0, r) - exact) <= 1e-10 * amp);
        }
}

TEST_CASE("uniform bound |J_nu(r)| r^{1/3} on nu in [0, 50], r in [1, 100]") {
    double sup = 0.0;
    for (int a = 0; a <= 100; ++a)
        for (int b = 0; b <= 990; ++b) {
            const double nu = 0.5 * a, r = 1.0 + 0.1 * b;
            sup = std::max(sup, std::abs(bessel_j(nu, r)) * std::cbrt(r));
        }
    // Landau's constant 0.7857...
    CHECK(sup < 0.786);
    CHECK(sup > 0.6);
}

TEST_CASE("envelope |J_nu(r)| <= C_nu r^nu (1+r)^{-nu-1/2}") {
    // The recorded constant must not grow at either end of r in [1e-3, 1e3].
    for (double nu : {0.0, 0.25, 1.5, 6.0}) {
        double inner = 0.0, outer = 0.0;
        for (int i = 0; i <= 3000; ++i) {
            const double r = 1e-3 * std::pow(1e6, i / 3000.0);
            const double c = std::abs(bessel_j(nu, r)) / (std::pow(r, nu) * std::pow(1.0 + r, -nu - 0.5));
            (i < 500 || i > 2500 ? outer : inner) = std::max(i < 500 || i > 2500 ? outer : inner, c);
        }
        CHECK(std::isfinite(inner));
        CHECK(outer <= 1.01 * std::max(inner, 1.0 / (std::pow(2.0, nu) * std::tgamma(nu + 1.0))));
    }
}

TEST_CASE("branch switchovers are continuous") {
    struct Case {
        double nu, r;
    };
    // r = 12 (series), r = nu (recurrence / integral), r = 2 nu (integral / asymptotic)
    for (Case c : {Case{3.0, 12.0}, Case{0.25, 12.0}, Case{20.0, 20.0}, Case{30.5, 30.5}, Case{20.0, 40.0},
                   Case{45.25, 90.5}}) {
        const auto lo = specfun::bessel_j_eval(c.nu, c.r * (1 - 1e-12));
        const auto hi = specfun::bessel_j_eval(c.nu, c.r * (1 + 1e-12));
        CHECK(lo.method != hi.method);
        const double scale = std::max(std::abs(lo.value), 1e-3);
        CHECK(std::abs(lo.value - hi.value) <= 1e-9 * scale + 1e-11);
    }
}

TEST_CASE("ladder matches single-order evaluation") {
    for (double base : {0.0, 0.25, 0.5})
        for (double r : {0.5, 9.0, 35.0, 140.0}) {
            const auto lad = specfun::bessel_j_ladder(base, r, 220);
            for (int m = 0; m < 220; m += 7) CHECK(lad[m] == doctest::Approx(bessel_j(base + m, r)).epsilon(1e-9).scale(1e-14));
        }
}

TEST_CASE("bessel_j_derivative spec examples") {
    CHECK(specfun::bessel_j_derivative(0.0, 0.0, 1) == 0.0);
    CHECK(specfun::bessel_j_derivative(1.0, 0.0, 0) == 0.0);
    const double r = 1.0;
    const double exact = std::sqrt(2.0 / kPi) * (std::cos(r) / std::sqrt(r) - 0.5 * std::sin(r) / std::pow(r, 1.5));
    const double h = 1e-5;
    const double fd = (half_integer_closed_form(1, r + h) - half_integer_closed_form(1, r - h)) / (2 * h);
    CHECK(fd == doctest::Approx(exact).epsilon(1e-9));
    CHECK(specfun::bessel_j_derivative(0.5, r, 1) == doctest::Approx(exact).epsilon(1e-12));
    CHECK(specfun::bessel_j_derivative(1.0, 0.0, 1) == doctest::Approx(0.5).epsilon(1e-14));
    CHECK_THROWS_AS(specfun::bessel_j_derivative(0.5, 0.0, 1), DomainError);
    CHECK_THROWS_AS(specfun::bessel_j_derivative(0.5, 1.0, -1), DomainError);
}

TEST_CASE("higher derivatives against finite differences of the oracle") {
    for (double nu : {0.0, 0.75, 3.5})
        for (double r : {0.8, 6.0, 25.0})
            for (int m : {1, 2, 3}) {
                const double h = 1e-3;
                auto f = [&](double x) { return std::cyl_bessel_j(nu, x); };
                double fd;
                if (m == 1) fd = (f(r + h) - f(r - h)) / (2 * h);
                else if (m == 2) fd = (f(r + h) - 2 * f(r) + f(r - h)) / (h * h);
                else fd = (f(r + 2 * h) - 2 * f(r + h) + 2 * f(r - h) - f(r - 2 * h)) / (2 * h * h * h);
                CHECK(specfun::bessel_j_derivative(nu, r, m) == doctest::Approx(fd).epsilon(1e-4).scale(1e-4));
            }
}

TEST_CASE("phase decomposition") {
    using specfun::phase_decompose;
    auto rebuild = [](const specfun::PhaseDecomposition& p) {
        const std::complex<double> i(0, 1);
        return (std::exp(i * p.argument) * p.j_plus + std::exp(-i * p.argument) * p.j_minus) / std::sqrt(p.argument);
    };
    const auto a = phase_decompose(0.5, 2.0);
    CHECK(rebuild(a).real() == doctest::Approx(std::sqrt(1.0 / kPi) * std::sin(2.0)).epsilon(1e-12));
    CHECK(std::abs(rebuild(a).imag()) < 1e-14);

    const auto b = phase_decompose(1.5, 5.0);
    CHECK(std::abs(rebuild(b).real() - bessel_j(1.5, 5.0)) < 1e-10 * std::abs(bessel_j(1.5, 5.0)));

    // |j_+-| tends to 1/sqrt(2 pi) for large r.
    const auto c = phase_decompose(0.0, 10.0);
    CHECK(std::abs(c.j_plus) < 0.45);
    CHECK(std::abs(c.j_minus) < 0.45);
    CHECK(std::abs(std::abs(c.j_plus) - 1.0 / std::sqrt(2 * kPi)) < 0.01);

    CHECK_THROWS_AS(phase_decompose(1.0, 0.5), DomainError);

    for (double nu : {0.0, 2.0, 9.5})
        for (double r : {1.0, 3.0, 20.0, 100.0, 400.0}) {
            const auto p = phase_decompose(nu, r);
            // Relative to the amplitude |j+-|/sqrt(r): for r << nu the pieces are Y-sized and J cancels.
            const double amp = (std::abs(p.j_plus) + std::abs(p.j_minus)) / std::sqrt(r);
            CHECK(std::abs(rebuild(p).real() - std::cyl_bessel_j(nu, r)) < 1e-10 * amp);
        }
}

TEST_CASE("phase amplitude derivative bound for r >= 2 nu") {
    // |d/dr j_+-| <= C 2^nu nu / r; the recorded constant must stay bounded in r.
    for (double nu : {1.0, 3.0, 6.0}) {
        double c0 = 0.0, c1 = 0.0;
        for (double r = std::max(2 * nu, 1.0); r < 300; r *= 1.3) {
            const double h = 1e-4 * r;
            const auto p0 = specfun::phase_decompose(nu, r);
            const auto pp = specfun::phase_decompose(nu, r + h), pm = specfun::phase_decompose(nu, r - h);
            const double d = std::abs((pp.j_plus - pm.j_plus) / (2 * h));
            c0 = std::max(c0, std::abs(p0.j_plus) / std::pow(2.0, nu));
            c1 = std::max(c1, d / (std::pow(2.0, nu) * nu / r));
        }
        CHECK(c0 < 1.0);
        CHECK(c1 < 1.0);
    }
}

TEST_CASE("hankel0_plus asymptotics and conjugation") {
    const double y = 1e-8;
    const auto h = specfun::hankel0_plus(y);
    CHECK((h.imag() / std::log(y / 2)) == doctest::Approx(2.0 / kPi).epsilon(0.02));
    const auto far = specfun::hankel0_plus(100.0);
    CHECK(std::abs(far) * 10.0 == doctest::Approx(std::sqrt(2.0 / kPi)).epsilon(1e-3));
    for (double v : {0.3, 2.0, 17.0}) {
        CHECK(std::abs(specfun::hankel0_minus(v) - std::conj(specfun::hankel0_plus(v))) < 1e-15);
        CHECK(specfun::hankel0_plus(v).real() == doctest::Approx(std::cyl_bessel_j(0.0, v)).epsilon(1e-12));
        CHECK(specfun::hankel0_plus(v).imag() == doctest::Approx(std::cyl_neumann(0.0, v)).epsilon(1e-11));
    }
    CHECK_THROWS_AS(specfun::hankel0_plus(0.0), DomainError);
}
