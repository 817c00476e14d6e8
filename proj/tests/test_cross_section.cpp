#include <cmath>
#include <numbers>

#include "conespec/cross_section.hpp"
#include "conespec/errors.hpp"
#include "conespec/estimates.hpp"
#include "doctest.h"

using namespace conespec;
using cd = std::complex<double>;
constexpr double kPi = std::numbers::pi;

TEST_CASE("free unit sphere: nu = l + 1/2 with multiplicity 2l + 1") {
    const auto s = eigensolve(RoundSphere{2, 1.0, 0.0}, 3, 100);
    REQUIRE(s.levels.size() == 10);
    for (std::size_t l = 0; l < s.levels.size(); ++l) {
        CHECK(s.levels[l].nu == doctest::Approx(l + 0.5).epsilon(1e-15));
        CHECK(s.levels[l].multiplicity == static_cast<int>(2 * l + 1));
        CHECK(s.levels[l].mu == doctest::Approx(l * (l + 1.0)));
    }
    const auto mu = s.mu();
    for (std::size_t k = 1; k < mu.size(); ++k) CHECK(mu[k] >= mu[k - 1]);
}

TEST_CASE("constant potential a = -3/16 gives nu0 = 1/4 and p(alpha) = 12") {
    const auto s = eigensolve(RoundSphere{2, 1.0, -3.0 / 16.0}, 3, 9);
    CHECK(s.nu0() == doctest::Approx(0.25).epsilon(1e-15));
    const auto a = alpha_and_palpha(s.nu0(), 3);
    CHECK(a.alpha == doctest::Approx(-0.25));
    CHECK(a.p_alpha == doctest::Approx(12.0));
}

TEST_CASE("positivity violation at a = -1/4") {
    CHECK_THROWS_AS(eigensolve(RoundSphere{2, 1.0, -0.25}, 3, 4), PositivityViolation);
    try {
        eigensolve(RoundSphere{2, 1.0, -0.25}, 3, 4);
    } catch (const PositivityViolation& e) {
        CHECK(e.mu0() == doctest::Approx(-0.25));
    }
    GalerkinSphere2 g;
    g.max_degree = 6;
    g.potential.a0 = -0.3;
    CHECK_THROWS_AS(eigensolve(g, 3, 4), PositivityViolation);
}

TEST_CASE("higher-dimensional round spheres and radius scaling") {
    const auto s3 = eigensolve(RoundSphere{3, 1.0, 0.0}, 4, 30);
    for (std::size_t l = 0; l < s3.levels.size(); ++l) {
        CHECK(s3.levels[l].nu == doctest::Approx(l + 1.0));
        CHECK(s3.levels[l].multiplicity == static_cast<int>((l + 1) * (l + 1)));
    }
    const auto s2 = eigensolve(RoundSphere{2, 2.0, 0.0}, 3, 9);
    CHECK(s2.levels[2].mu == doctest::Approx(6.0 / 4.0));
    CHECK_THROWS_AS(eigensolve(RoundSphere{2, 1.0, 0.0}, 4, 9), DomainError);
    CHECK_THROWS_AS(eigensolve(RoundSphere{1, 1.0, 0.0}, 2, 9), DomainError);
}

TEST_CASE("node samples are orthonormal under the quadrature") {
    const auto s = eigensolve(RoundSphere{2, 1.0, 0.0}, 3, 64);
    const auto& q = *s.quadrature;
    Eigen::VectorXd w = Eigen::Map<const Eigen::VectorXd>(q.weight.data(), q.size());
    const Eigen::MatrixXcd G = s.psi.adjoint() * w.asDiagonal() * s.psi;
    CHECK((G - Eigen::MatrixXcd::Identity(G.rows(), G.cols())).cwiseAbs().maxCoeff() < 1e-8);
}

TEST_CASE("angular multiplier: identity kernel reproduces band-limited functions") {
    const auto s = eigensolve(RoundSphere{2, 1.0, 0.0}, 3, 100);
    const auto& q = *s.quadrature;
    auto f = [](const Vec3& p) { return 1.0 + p.x() * p.z() - 0.5 * p.y() * p.y() * p.y(); };
    const Vec3 x = sphere_point(0.7, 1.9);
    cd acc = 0.0;
    for (std::size_t j = 0; j < q.size(); ++j) {
        const auto m = angular_multiplier(
            s, [](double nu) { return nu < 4.0 ? cd(1.0) : cd(0.0); }, Eigen::VectorXd(x),
            Eigen::VectorXd(q.point[j]));
        acc += q.weight[j] * m.value * f(q.point[j]);
    }
    CHECK(std::abs(acc - f(x)) < 1e-12);
    // cos(s nu) at s = 0 is the same identity kernel on this band
    cd acc0 = 0.0;
    for (std::size_t j = 0; j < q.size(); ++j) {
        const auto m = angular_multiplier(
            s, [](double nu) { return nu < 4.0 ? cd(std::cos(0.0 * nu)) : cd(0.0); }, Eigen::VectorXd(x),
            Eigen::VectorXd(q.point[j]));
        acc0 += q.weight[j] * m.value * f(q.point[j]);
    }
    CHECK(std::abs(acc0 - f(x)) < 1e-12);
}

TEST_CASE("angular multiplier e^{-s nu} on the diagonal matches the geometric series") {
    const auto s = eigensolve(RoundSphere{2, 1.0, 0.0}, 3, 80 * 80);
    const double sv = 1.0, q = std::exp(-sv);
    // sum_l (2l+1) q^{l+1/2} / (4 pi) = q^{1/2} (1 + q) / ((1 - q)^2 4 pi)
    const double oracle = std::sqrt(q) * (1.0 + q) / ((1.0 - q) * (1.0 - q) * 4.0 * kPi);
    const Eigen::VectorXd x = sphere_point(1.1, 0.3);
    const auto m = angular_multiplier(s, [&](double nu) { return cd(std::exp(-sv * nu)); }, x, x);
    CHECK(m.value.real() == doctest::Approx(oracle).epsilon(1e-12));
    CHECK(m.tail_estimate < 1e-10);
    CHECK_THROWS_AS(angular_multiplier(s, [](double) { return cd(1.0); }, x, x), TailEstimateExceeded);
}

TEST_CASE("Weyl band and eigenfunction bound") {
    const auto s = eigensolve(RoundSphere{2, 1.0, 0.0}, 3, 400);
    const auto nu = s.nu();
    for (int k = 50; k <= 200; ++k) {
        const double r = nu[k] * nu[k] / (1.0 + k);
        CHECK(r >= 0.4);
        CHECK(r <= 2.6);
    }
    const auto w = verify_weyl(s);
    CHECK(w.sufficient);
    CHECK(w.min_ratio >= 0.4);
    CHECK(w.max_ratio <= 2.6);
    CHECK_FALSE(verify_weyl(eigensolve(RoundSphere{2, 1.0, 0.0}, 3, 25)).sufficient);

    GalerkinSphere2 g;
    g.max_degree = 20;
    g.potential.a1 = 0.05;
    const auto gw = verify_weyl(eigensolve(g, 3, 300));
    CHECK(gw.min_ratio >= 0.4);
    CHECK(gw.max_ratio <= 2.6);

    const auto small = eigensolve(RoundSphere{2, 1.0, 0.0}, 3, 400);
    const auto eb = verify_eigenfunction_bound(small);
    CHECK(eb.ratios[0] == doctest::Approx(1.0 / std::sqrt(4 * kPi) / std::pow(1.0 + 0.25, 0.25)).epsilon(1e-10));
    // zonal harmonics peak at the poles at sqrt((2l+1)/4pi) ~ (1 + nu^2)^{1/4} up to a constant
    CHECK(eb.max_ratio < 1.0);
    CHECK(eb.max_ratio > 0.2);
    const auto geb = verify_eigenfunction_bound(eigensolve(g, 3, 300));
    CHECK(geb.max_ratio < 1.0);
}

TEST_CASE("Galerkin matrix is Hermitian") {
    GalerkinSphere2 g;
    g.max_degree = 10;
    g.potential = {0.2, 0.3, -0.1, 0.4, 0.25};
    const auto q = sphere_quadrature_for_degree(2 * g.max_degree + 4);
    const Eigen::MatrixXcd M = galerkin_matrix(g, q);
    CHECK((M - M.adjoint()).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("analytic and Galerkin spectra agree for constant a") {
    GalerkinSphere2 g;
    g.max_degree = 24;
    g.potential.a0 = 0.37;
    const int L = g.max_degree - 5;
    const auto s = eigensolve(g, 3, (L + 1) * (L + 1));
    int k = 0;
    for (int l = 0; l <= L; ++l)
        for (int m = 0; m < 2 * l + 1; ++m, ++k) CHECK(std::abs(s.levels[k].mu - (l * (l + 1.0) + 0.37)) < 1e-8);
}

TEST_CASE("gauge change leaves eigenvalues fixed and multiplies eigenfunctions by e^{i chi}") {
    GalerkinSphere2 base, gauged;
    base.max_degree = gauged.max_degree = 24;
    base.potential.rotation = gauged.potential.rotation = 0.3;
    base.potential.a1 = gauged.potential.a1 = 0.2;
    const double c = 0.4;  // chi = c z, d chi = c grad_S z
    gauged.potential.gradient = c;
    const auto s0 = eigensolve(base, 3, 16), s1 = eigensolve(gauged, 3, 16);
    for (int k = 0; k < 16; ++k) CHECK(std::abs(s0.levels[k].mu - s1.levels[k].mu) < 1e-8);

    const auto q = sphere_quadrature_for_degree(60);
    cd overlap = 0.0;
    double n0 = 0.0, n1 = 0.0;
    for (std::size_t j = 0; j < q.size(); ++j) {
        const Eigen::VectorXd p = q.point[j];
        const cd a = std::exp(cd(0, c * p.z())) * s0.eigenfunctions(p)[0];
        const cd b = s1.eigenfunctions(p)[0];
        overlap += q.weight[j] * std::conj(a) * b;
        n0 += q.weight[j] * std::norm(a);
        n1 += q.weight[j] * std::norm(b);
    }
    CHECK(std::abs(overlap) / std::sqrt(n0 * n1) == doctest::Approx(1.0).epsilon(1e-8));
}

TEST_CASE("convergence check flags an unresolved potential") {
    GalerkinSphere2 g;
    g.max_degree = 8;
    g.check_convergence = true;
    g.scalar_override = [](const Vec3& x) { return 2.0 * std::abs(x.z()); };
    CHECK_THROWS_AS(eigensolve(g, 3, 10), ConvergenceFailure);
    GalerkinSphere2 smooth;
    smooth.max_degree = 12;
    smooth.check_convergence = true;
    smooth.potential.a0 = 0.5;
    CHECK_NOTHROW(eigensolve(smooth, 3, 10));
}

TEST_CASE("spherical quadrature integrates up to its degree") {
    const auto q = sphere_quadrature_for_degree(20);
    double acc = 0.0, acc2 = 0.0;
    for (std::size_t j = 0; j < q.size(); ++j) {
        const auto& p = q.point[j];
        acc += q.weight[j] * std::pow(p.z(), 10);
        acc2 += q.weight[j] * std::pow(p.x() * p.y(), 4) * p.z() * p.z();
    }
    CHECK(acc == doctest::Approx(4 * kPi / 11).epsilon(1e-13));
    // int x^4 y^4 z^2 over S^2 = 2 Gamma(5/2)^2 Gamma(3/2) / Gamma(15/2) * ... via the Dirichlet formula
    const double dir = 2.0 * std::tgamma(2.5) * std::tgamma(2.5) * std::tgamma(1.5) / std::tgamma(6.5);
    CHECK(acc2 == doctest::Approx(dir).epsilon(1e-12));
}
