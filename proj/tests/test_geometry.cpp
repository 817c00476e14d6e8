#include <cmath>
#include <numbers>
#include <random>

#include "conespec/errors.hpp"
#include "conespec/geometry.hpp"
#include "doctest.h"

using namespace conespec;
using std::numbers::pi;

namespace {

Eigen::VectorXd v3(double x, double y, double z) { return Eigen::VectorXd(Vec3(x, y, z)); }

Eigen::VectorXd random_unit(std::mt19937_64& rng) {
    std::normal_distribution<double> g;
    Vec3 v(g(rng), g(rng), g(rng));
    return Eigen::VectorXd(v.normalized());
}

}  // namespace

TEST_CASE("distance spectrum on the unit sphere") {
    const GeometrySpec s2 = SphereGeometry{2, 1.0};
    const auto north = v3(0, 0, 1);

    auto same = distance_spectrum(s2, north, north);
    REQUIRE(same.size() == 1);
    CHECK(same[0].length == 0.0);

    const auto at_one = v3(std::sin(1.0), 0, std::cos(1.0));
    auto one = distance_spectrum(s2, at_one, north);
    REQUIRE(one.size() == 1);
    CHECK(one[0].length == doctest::Approx(1.0).epsilon(1e-12));
    CHECK_FALSE(one[0].degenerate);

    auto anti = distance_spectrum(s2, v3(0, 0, -1), north);
    REQUIRE(anti.size() == 1);
    CHECK(anti[0].length == doctest::Approx(pi).epsilon(1e-12));
    CHECK(anti[0].degenerate);
    CHECK(anti[0].conjugate_flag);
}

TEST_CASE("distance spectrum records arrive at x") {
    const GeometrySpec s2 = SphereGeometry{2, 1.0};
    std::mt19937_64 rng(7);
    for (int i = 0; i < 20; ++i) {
        const auto x = random_unit(rng), y = random_unit(rng);
        for (const auto& r : distance_spectrum(s2, x, y, 3 * pi)) {
            // exp(L H_p)(y, v) on the great circle
            const Eigen::VectorXd end = std::cos(r.length) * r.start + std::sin(r.length) * r.covector;
            CHECK((end - x).norm() < 1e-10);
            CHECK(std::abs(r.arrival_covector.norm() - 1.0) < 1e-12);
        }
    }
}

TEST_CASE("numeric spheroid shooting matches the round-sphere closed form") {
    const GeometrySpec exact = SphereGeometry{2, 1.0};
    const GeometrySpec numeric = Spheroid{1.0, 1.0};
    std::mt19937_64 rng(11);
    int compared = 0;
    for (int i = 0; i < 100; ++i) {
        const auto x = random_unit(rng), y = random_unit(rng);
        if (std::abs(x.dot(y)) > 0.999) continue;  // near-degenerate pairs are flagged, not resolved
        const auto a = distance_spectrum(exact, x, y);
        const auto b = distance_spectrum(numeric, x, y);
        REQUIRE(a.size() == b.size());
        for (std::size_t k = 0; k < a.size(); ++k) CHECK(std::abs(a[k].length - b[k].length) < 1e-6);
        ++compared;
    }
    CHECK(compared > 90);
}

TEST_CASE("spheroid flow is reversible and conserves speed") {
    const Spheroid sp{1.0, 1.4};
    FlowState s;
    s.x = Vec3(sp.a * std::sin(0.8), 0.0, sp.c * std::cos(0.8));
    const Vec3 n = Vec3(s.x.x() / (sp.a * sp.a), 0.0, s.x.z() / (sp.c * sp.c)).normalized();
    const Vec3 raw(0.3, 1.0, 0.2);
    s.v = (raw - raw.dot(n) * n).normalized();
    const FlowState fwd = spheroid_flow(sp, s, 2.5);
    CHECK(std::abs(fwd.v.norm() - 1.0) < 1e-9);
    FlowState back = fwd;
    back.v = -fwd.v;
    const FlowState ret = spheroid_flow(sp, back, 2.5);
    CHECK((ret.x - s.x).norm() < 1e-9);
    CHECK((ret.v + s.v).norm() < 1e-9);
}

TEST_CASE("spheroid curvature against the analytic formula") {
    const Spheroid sp{1.0, 1.5};
    // K at the pole is c^2 / a^4, at the equator 1 / c^2.
    CHECK(spheroid_curvature(sp, Vec3(0, 0, sp.c)) == doctest::Approx(sp.c * sp.c / std::pow(sp.a, 4)));
    CHECK(spheroid_curvature(sp, Vec3(sp.a, 0, 0)) == doctest::Approx(1.0 / (sp.c * sp.c)));
    const auto b = curvature_bounds(sp);
    CHECK(b.k_min == doctest::Approx(1.0 / 2.25));
    CHECK(b.k_max == doctest::Approx(2.25));
}

TEST_CASE("length spectra") {
    auto s2 = length_spectrum(SphereGeometry{2, 1.0}, 10.0);
    REQUIRE(s2.lengths.size() == 1);
    CHECK(s2.lengths[0] == doctest::Approx(2 * pi));

    auto s4 = length_spectrum(SphereGeometry{4, 1.0}, 10.0);
    REQUIRE(s4.lengths.size() == 1);
    CHECK(s4.lengths[0] == doctest::Approx(2 * pi));

    auto big = length_spectrum(SphereGeometry{2, 2.0}, 20.0);
    REQUIRE(big.lengths.size() == 1);
    CHECK(big.lengths[0] == doctest::Approx(4 * pi));

    auto tor = length_spectrum(FlatTorus{0.5, 1.0}, 4.0);
    bool has_pi = false;
    for (double l : tor.lengths) has_pi |= std::abs(l - pi) < 1e-12;
    CHECK(has_pi);
    // lattice lengths sqrt((m pi)^2 + (2 pi k)^2) below 4: only m = 1, k = 0
    CHECK(tor.lengths.size() == 1);
}

TEST_CASE("non-resonant endpoint condition") {
    auto unit = check_nrec(SphereGeometry{2, 1.0});
    CHECK(unit.holds);
    CHECK(unit.delta0 >= 1.0);

    CHECK_FALSE(check_nrec(FlatTorus{0.5, 1.0}).holds);
    CHECK_FALSE(check_nrec(SphereGeometry{2, 0.5}).holds);
    CHECK_THROWS_AS(check_nrec(SphereGeometry{2, 1.0}, 3.5), DomainError);
}

TEST_CASE("conjugate radius") {
    const auto north = v3(0, 0, 1), east = v3(1, 0, 0);
    CHECK(conjugate_radius(SphereGeometry{2, 1.0}, north, east) == doctest::Approx(pi));
    CHECK(conjugate_radius(SphereGeometry{2, 2.0}, north, east) == kNoConjugatePoint);
    CHECK(conjugate_radius(FlatTorus{1.0, 1.0}, Eigen::Vector2d(0, 0), Eigen::Vector2d(1, 0)) ==
          kNoConjugatePoint);

    // Jacobi integration on a round spheroid reproduces pi / sqrt(K).
    for (double a : {1.0, 0.8}) {
        const double r = conjugate_radius(Spheroid{a, a}, v3(0, 0, a), east);
        if (pi * a < pi + kDefaultHorizonEpsilon) CHECK(std::abs(r - pi * a) < 1e-6);
    }
    CHECK(conjugate_radius(Spheroid{1.2, 1.2}, v3(0, 0, 1.2), east) == kNoConjugatePoint);
}

TEST_CASE("curvature-pinching sufficient condition") {
    CHECK(check_nfc_sufficient(1.0, 1.0, true));
    CHECK_FALSE(check_nfc_sufficient(4.0, 4.0, true));
    CHECK(check_nfc_sufficient(0.0, 0.0, false));
    CHECK_FALSE(check_nfc_sufficient(1.0, 1.0, false));
    CHECK(check_nfc_sufficient(0.5, 1.9, true));
    CHECK_FALSE(check_nfc_sufficient(0.49, 1.9, true));
    CHECK_FALSE(check_nfc_sufficient(0.5, 2.0, true));
    const auto half = curvature_bounds(SphereGeometry{2, 0.5});
    CHECK_FALSE(check_nfc_sufficient(half.k_min, half.k_max, half.simply_connected));
}

TEST_CASE("cone chord") {
    auto c = cone_chord(1, 1, 0);
    CHECK(c.d == 0.0);
    CHECK(c.d_tilde == doctest::Approx(2.0));
    CHECK(cone_chord(1, 1, pi).d == doctest::Approx(2.0));
    CHECK(cone_chord(2, 3, pi / 2).d == doctest::Approx(std::sqrt(13.0)).epsilon(1e-14));
    CHECK_THROWS_AS(cone_chord(1, 1, 3.5), DomainError);
    CHECK_THROWS_AS(cone_chord(0, 1, 0.5), DomainError);
    CHECK(chord_distance_tilde(1, 1, 5.0) > 2.0);

    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> ur(0.01, 10.0), us(0.0, pi);
    for (int i = 0; i < 200; ++i) {
        const double r1 = ur(rng), r2 = ur(rng), s = us(rng);
        const auto k = cone_chord(r1, r2, s);
        const double lc = r1 * r1 + r2 * r2 - 2 * r1 * r2 * std::cos(s);
        CHECK(std::abs(k.d * k.d - lc) <= 1e-14 * (r1 * r1 + r2 * r2));
        CHECK(k.d_tilde >= r1 + r2);
        CHECK(k.d == doctest::Approx(std::hypot(k.m_s[0], k.m_s[1])));
        CHECK(k.d_tilde == doctest::Approx(std::hypot(k.n_s[0], k.n_s[1])));
        CHECK(chord_distance(r1, r2, std::min(pi, s + 0.1)) >= k.d);
    }
}

TEST_CASE("microlocalizer partition of unity") {
    const GeometrySpec s2 = SphereGeometry{2, 1.0};
    const auto part = build_microlocalizers(s2, 0.8);
    CHECK(part.size() >= 6);
    const auto q = sphere_quadrature_for_degree(30);
    double worst = 0.0;
    for (const auto& p : q.point) {
        double sum = 0.0;
        for (double v : part.values(Eigen::VectorXd(p))) {
            CHECK(v >= 0.0);
            sum += v;
        }
        worst = std::max(worst, std::abs(sum - 1.0));
    }
    CHECK(worst < 1e-12);

    const auto single = build_microlocalizers(s2, 4.0);
    REQUIRE(single.size() == 1);
    CHECK(single.value(0, v3(0.3, 0.4, -0.2)) == 1.0);

    CHECK_THROWS_AS(build_microlocalizers(s2, 0.0), CoverFailure);
}
