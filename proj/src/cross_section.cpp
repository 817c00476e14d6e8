#include "conespec/cross_section.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "conespec/errors.hpp"
#include "conespec/quadrature.hpp"

namespace conespec {

namespace {
constexpr double kPi = std::numbers::pi;
using cd = std::complex<double>;

double binomial(int n, int k) {
    if (k < 0 || n < 0 || k > n) return 0.0;
    return std::round(std::exp(std::lgamma(n + 1.0) - std::lgamma(k + 1.0) - std::lgamma(n - k + 1.0)));
}
}  // namespace

Vec3 sphere_point(double theta, double phi) {
    return {std::sin(theta) * std::cos(phi), std::sin(theta) * std::sin(phi), std::cos(theta)};
}

SphereQuadrature sphere_quadrature(int n_theta, int n_phi) {
    SphereQuadrature q;
    q.n_theta = n_theta;
    q.n_phi = n_phi;
    const quad::Rule& gl = quad::gauss_legendre(n_theta);
    for (int i = 0; i < n_theta; ++i) {
        const double th = std::acos(gl.nodes[i]);
        for (int j = 0; j < n_phi; ++j) {
            const double ph = 2.0 * kPi * j / n_phi;
            q.theta.push_back(th);
            q.phi.push_back(ph);
            q.weight.push_back(gl.weights[i] * 2.0 * kPi / n_phi);
            q.point.push_back(sphere_point(th, ph));
        }
    }
    return q;
}

SphereQuadrature sphere_quadrature_for_degree(int degree) {
    return sphere_quadrature((degree + 2) / 2, degree + 1);
}

void real_spherical_harmonics(int L, double theta, double phi, double* value, double* grad_theta,
                              double* grad_phi) {
    const double x = std::cos(theta), s = std::sin(theta);
    auto at = [L](int l, int m) { return l * (L + 1) + m; };
    std::vector<double> P((L + 1) * (L + 1), 0.0);
    double pmm = 1.0 / std::sqrt(4.0 * kPi);
    for (int m = 0; m <= L; ++m) {
        if (m > 0) pmm *= -std::sqrt((2.0 * m + 1.0) / (2.0 * m)) * s;
        P[at(m, m)] = pmm;
        if (m + 1 <= L) P[at(m + 1, m)] = std::sqrt(2.0 * m + 3.0) * x * pmm;
        for (int l = m + 2; l <= L; ++l) {
            const double a = std::sqrt((4.0 * l * l - 1.0) / (double(l) * l - double(m) * m));
            const double b =
                std::sqrt((double(l - 1) * (l - 1) - double(m) * m) / (4.0 * (l - 1) * (l - 1) - 1.0));
            P[at(l, m)] = a * (x * P[at(l - 1, m)] - b * P[at(l - 2, m)]);
        }
    }
    for (int l = 0; l <= L; ++l) {
        for (int m = 0; m <= l; ++m) {
            const double plm = P[at(l, m)];
            double dplm = 0.0;
            if (grad_theta || grad_phi) {
                const double prev = l - 1 >= m ? P[at(l - 1, m)] : 0.0;
                const double c =
                    l == 0 ? 0.0 : std::sqrt((2.0 * l + 1.0) * (l - m) * (l + m) / (2.0 * l - 1.0));
                dplm = (l * x * plm - c * prev) / s;
            }
            if (m == 0) {
                value[sh_index(l, 0)] = plm;
                if (grad_theta) grad_theta[sh_index(l, 0)] = dplm;
                if (grad_phi) grad_phi[sh_index(l, 0)] = 0.0;
            } else {
                const double cm = std::cos(m * phi), sm = std::sin(m * phi);
                const double r2 = std::sqrt(2.0);
                value[sh_index(l, m)] = r2 * plm * cm;
                value[sh_index(l, -m)] = r2 * plm * sm;
                if (grad_theta) {
                    grad_theta[sh_index(l, m)] = r2 * dplm * cm;
                    grad_theta[sh_index(l, -m)] = r2 * dplm * sm;
                }
                if (grad_phi) {
                    grad_phi[sh_index(l, m)] = -r2 * m * plm * sm / s;
                    grad_phi[sh_index(l, -m)] = r2 * m * plm * cm / s;
                }
            }
        }
    }
}

void real_spherical_harmonics(int L, const Vec3& x, double* value) {
    const double n = x.norm();
    const double theta = std::acos(std::clamp(x.z() / n, -1.0, 1.0));
    const double phi = std::atan2(x.y(), x.x());
    real_spherical_harmonics(L, theta, phi, value, nullptr, nullptr);
}

double SpherePotential::scalar(const Vec3& x) const {
    const double z = x.z();
    return a0 + a1 * z + a2 * 0.5 * (3.0 * z * z - 1.0);
}

Vec3 SpherePotential::vector(const Vec3& x) const {
    const Vec3 rot(-x.y(), x.x(), 0.0);
    const Vec3 grad_z = Vec3(0.0, 0.0, 1.0) - x.z() * x;
    return rotation * rot + gradient * grad_z;
}

double GalerkinSphere2::scalar(const Vec3& x) const {
    return scalar_override ? scalar_override(x) : potential.scalar(x);
}

Vec3 GalerkinSphere2::vector(const Vec3& x) const {
    Vec3 v = vector_override ? vector_override(x) : potential.vector(x);
    return v - v.dot(x) * x;  // tangential part
}

bool GalerkinSphere2::magnetic() const {
    return static_cast<bool>(vector_override) || potential.rotation != 0.0 || potential.gradient != 0.0;
}

double sphere_volume(int dim, double radius) {
    return 2.0 * std::pow(kPi, 0.5 * (dim + 1)) / std::tgamma(0.5 * (dim + 1)) * std::pow(radius, dim);
}

int sphere_harmonic_multiplicity(int dim, int degree) {
    return static_cast<int>(binomial(degree + dim, dim) - binomial(degree + dim - 2, dim));
}

void zonal_profile(int dim, double t, int count, double* out) {
    const double lam = 0.5 * (dim - 1);
    if (count <= 0) return;
    out[0] = 1.0;
    if (count > 1) out[1] = t;
    for (int l = 2; l < count; ++l)
        out[l] = (2.0 * (l + lam - 1.0) * t * out[l - 1] - (l - 1.0) * out[l - 2]) / (l + 2.0 * lam - 1.0);
}

std::vector<double> AngularSpectrum::mu() const {
    std::vector<double> out;
    for (const auto& lv : levels) out.insert(out.end(), lv.multiplicity, lv.mu);
    return out;
}

std::vector<double> AngularSpectrum::nu() const {
    std::vector<double> out;
    for (const auto& lv : levels) out.insert(out.end(), lv.multiplicity, lv.nu);
    return out;
}

int AngularSpectrum::mode_count() const {
    int c = 0;
    for (const auto& lv : levels) c += lv.multiplicity;
    return c;
}

double AngularSpectrum::volume() const { return sphere_volume(sphere_dim_, sphere_radius_); }

std::optional<double> AngularSpectrum::ladder_base() const {
    if (levels.empty()) return std::nullopt;
    const double base = levels.front().nu;
    for (std::size_t l = 0; l < levels.size(); ++l)
        if (std::abs(levels[l].nu - (base + l)) > 1e-13 * (1.0 + base + l)) return std::nullopt;
    return base;
}

namespace {

double cos_angle(const Eigen::VectorXd& x, const Eigen::VectorXd& y) {
    return std::clamp(x.dot(y) / (x.norm() * y.norm()), -1.0, 1.0);
}

}  // namespace

Eigen::VectorXcd AngularSpectrum::eigenfunctions(const Eigen::VectorXd& x) const {
    if (sphere_dim_ != 2 || x.size() != 3)
        throw DomainError("eigenfunctions: point evaluation needs a two-dimensional cross-section");
    const Vec3 p = x.head<3>();
    if (zonal_) {
        int L = 0;
        while (sh_count(L) < mode_count()) ++L;
        std::vector<double> y(sh_count(L));
        real_spherical_harmonics(L, p, y.data());
        Eigen::VectorXcd out(mode_count());
        const double scale = 1.0 / sphere_radius_;
        for (int k = 0; k < mode_count(); ++k) out[k] = y[k] * scale;
        return out;
    }
    std::vector<double> y(sh_count(basis_degree_));
    real_spherical_harmonics(basis_degree_, p, y.data());
    Eigen::Map<Eigen::VectorXd> yv(y.data(), y.size());
    return coefficients_.transpose() * yv.cast<cd>();
}

std::complex<double> AngularSpectrum::projector(std::size_t level, const Eigen::VectorXd& x,
                                                const Eigen::VectorXd& y) const {
    if (zonal_) {
        std::vector<double> g(level + 1);
        zonal_profile(sphere_dim_, cos_angle(x, y), static_cast<int>(level) + 1, g.data());
        return levels[level].multiplicity / volume() * g[level];
    }
    const Eigen::VectorXcd px = eigenfunctions(x), py = eigenfunctions(y);
    cd acc = 0.0;
    for (int k = level_first_mode[level], e = k + levels[level].multiplicity; k < e; ++k)
        acc += px[k] * std::conj(py[k]);
    return acc;
}

std::vector<std::complex<double>> AngularSpectrum::projectors(const Eigen::VectorXd& x,
                                                              const Eigen::VectorXd& y) const {
    std::vector<cd> out(levels.size());
    if (zonal_) {
        std::vector<double> g(levels.size());
        zonal_profile(sphere_dim_, cos_angle(x, y), static_cast<int>(levels.size()), g.data());
        const double vol = volume();
        for (std::size_t l = 0; l < levels.size(); ++l) out[l] = levels[l].multiplicity / vol * g[l];
        return out;
    }
    const Eigen::VectorXcd px = eigenfunctions(x), py = eigenfunctions(y);
    for (std::size_t l = 0; l < levels.size(); ++l) {
        cd acc = 0.0;
        for (int k = level_first_mode[l], e = k + levels[l].multiplicity; k < e; ++k)
            acc += px[k] * std::conj(py[k]);
        out[l] = acc;
    }
    return out;
}

Eigen::MatrixXcd galerkin_matrix(const GalerkinSphere2& spec, const SphereQuadrature& q) {
    const int L = spec.max_degree;
    const int B = sh_count(L);
    const int Q = static_cast<int>(q.size());
    Eigen::MatrixXd phi(Q, B), gth(Q, B), gph(Q, B);
    std::vector<double> v(B), dt(B), dp(B);
    Eigen::VectorXd w_pot(Q), a_th(Q), a_ph(Q), w(Q);
    for (int i = 0; i < Q; ++i) {
        real_spherical_harmonics(L, q.theta[i], q.phi[i], v.data(), dt.data(), dp.data());
        for (int j = 0; j < B; ++j) {
            phi(i, j) = v[j];
            gth(i, j) = dt[j];
            gph(i, j) = dp[j];
        }
        const Vec3& x = q.point[i];
        const Vec3 A = spec.vector(x);
        const Vec3 e_th(std::cos(q.theta[i]) * std::cos(q.phi[i]), std::cos(q.theta[i]) * std::sin(q.phi[i]),
                        -std::sin(q.theta[i]));
        const Vec3 e_ph(-std::sin(q.phi[i]), std::cos(q.phi[i]), 0.0);
        a_th[i] = A.dot(e_th);
        a_ph[i] = A.dot(e_ph);
        w[i] = q.weight[i];
        w_pot[i] = q.weight[i] * (A.squaredNorm() + spec.scalar(x));
    }
    Eigen::MatrixXd stiff = gth.transpose() * w.asDiagonal() * gth + gph.transpose() * w.asDiagonal() * gph;
    Eigen::MatrixXd pot = phi.transpose() * w_pot.asDiagonal() * phi;
    Eigen::MatrixXd real = stiff + pot;
    real = 0.5 * (real + real.transpose()).eval();
    Eigen::MatrixXcd M = real.cast<cd>();
    if (spec.magnetic()) {
        Eigen::MatrixXd drive = a_th.asDiagonal() * gth + a_ph.asDiagonal() * gph;
        Eigen::MatrixXd C = phi.transpose() * w.asDiagonal() * drive;
        M += cd(0.0, 1.0) * (C - C.transpose()).cast<cd>();
    }
    return M;
}

namespace {

void check_positivity(const AngularSpectrum& s) {
    const double shift = 0.25 * (s.n - 2) * (s.n - 2);
    const double mu0 = s.levels.front().mu;
    if (!(mu0 + shift > 0.0))
        throw PositivityViolation("angular operator plus (n-2)^2/4 is not strictly positive: mu0 = " +
                                      std::to_string(mu0),
                                  mu0);
}

AngularSpectrum solve_round(const RoundSphere& rs, int n, int count) {
    if (rs.dim < 2) throw DomainError("round_sphere: dim must be >= 2");
    if (!(rs.radius > 0.0)) throw DomainError("round_sphere: radius must be positive");
    if (n != rs.dim + 1) throw DomainError("round_sphere: cone dimension must be dim + 1");
    AngularSpectrum s;
    s.n = n;
    s.set_zonal(rs.dim, rs.radius);
    const double shift = 0.25 * (n - 2) * (n - 2);
    int modes = 0;
    for (int l = 0; modes < count; ++l) {
        const double mu = l * (l + rs.dim - 1.0) / (rs.radius * rs.radius) + rs.a;
        const int mult = sphere_harmonic_multiplicity(rs.dim, l);
        s.level_first_mode.push_back(modes);
        s.levels.push_back({mu, std::sqrt(std::max(mu + shift, 0.0)), mult});
        for (int k = 0; k < mult; ++k) s.mode_level.push_back(l);
        modes += mult;
    }
    check_positivity(s);
    // Node samples are only needed for sampled cone functions; large kernel
    // computations use the zonal projectors alone.
    constexpr int kMaxSampledDegree = 32;
    if (rs.dim == 2 && static_cast<int>(s.levels.size()) - 1 <= kMaxSampledDegree) {
        const int L = static_cast<int>(s.levels.size()) - 1;
        auto quad = std::make_shared<SphereQuadrature>(sphere_quadrature_for_degree(2 * L + 2));
        s.psi.resize(quad->size(), modes);
        std::vector<double> y(sh_count(L));
        for (std::size_t i = 0; i < quad->size(); ++i) {
            real_spherical_harmonics(L, quad->theta[i], quad->phi[i], y.data(), nullptr, nullptr);
            for (int k = 0; k < modes; ++k) s.psi(i, k) = y[k] / rs.radius;
        }
        // Weights refer to the unit sphere; rescale to radius^2 area.
        auto scaled = std::make_shared<SphereQuadrature>(*quad);
        for (auto& wt : scaled->weight) wt *= rs.radius * rs.radius;
        s.quadrature = scaled;
    }
    return s;
}

struct GalerkinSolution {
    Eigen::VectorXd values;
    Eigen::MatrixXcd vectors;
};

GalerkinSolution galerkin_solve(const GalerkinSphere2& spec) {
    const auto quad = sphere_quadrature_for_degree(2 * spec.max_degree + 4);
    const Eigen::MatrixXcd M = galerkin_matrix(spec, quad);
    if (spec.magnetic()) {
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(M);
        if (es.info() != Eigen::Success) throw ConvergenceFailure("galerkin: eigensolver failed");
        return {es.eigenvalues(), es.eigenvectors()};
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(M.real());
    if (es.info() != Eigen::Success) throw ConvergenceFailure("galerkin: eigensolver failed");
    return {es.eigenvalues(), es.eigenvectors().cast<cd>()};
}

AngularSpectrum solve_galerkin(const GalerkinSphere2& spec, int n, int count) {
    if (n != 3) throw DomainError("galerkin_sphere2: cone dimension must be 3");
    if (spec.max_degree < 1) throw DomainError("galerkin_sphere2: max_degree must be >= 1");
    const int B = sh_count(spec.max_degree);
    if (count > B) throw DomainError("galerkin_sphere2: count exceeds the basis size");
    GalerkinSolution sol = galerkin_solve(spec);
    if (spec.check_convergence) {
        GalerkinSphere2 bumped = spec;
        bumped.max_degree += 2;
        bumped.check_convergence = false;
        const GalerkinSolution fine = galerkin_solve(bumped);
        for (int k = 0; k < count; ++k) {
            const double shift = std::abs(fine.values[k] - sol.values[k]);
            if (shift > spec.convergence_tol * std::max(1.0, std::abs(sol.values[k])))
                throw ConvergenceFailure("galerkin: eigenvalue " + std::to_string(k) + " moved by " +
                                         std::to_string(shift) + " when max_degree was bumped");
        }
    }
    AngularSpectrum s;
    s.n = n;
    const double shift = 0.25;
    for (int k = 0; k < count; ++k) {
        const double mu = sol.values[k];
        s.levels.push_back({mu, std::sqrt(std::max(mu + shift, 0.0)), 1});
        s.mode_level.push_back(k);
        s.level_first_mode.push_back(k);
    }
    check_positivity(s);
    Eigen::MatrixXcd coeff = sol.vectors.leftCols(count);
    // Fix the phase so the largest coefficient of each mode is real positive.
    for (int k = 0; k < count; ++k) {
        Eigen::Index imax;
        coeff.col(k).cwiseAbs().maxCoeff(&imax);
        const cd ph = coeff(imax, k) / std::abs(coeff(imax, k));
        coeff.col(k) /= ph;
    }
    auto quad = std::make_shared<SphereQuadrature>(sphere_quadrature_for_degree(2 * spec.max_degree + 4));
    Eigen::MatrixXd phi(quad->size(), B);
    std::vector<double> y(B);
    for (std::size_t i = 0; i < quad->size(); ++i) {
        real_spherical_harmonics(spec.max_degree, quad->theta[i], quad->phi[i], y.data(), nullptr, nullptr);
        for (int j = 0; j < B; ++j) phi(i, j) = y[j];
    }
    s.psi = phi.cast<cd>() * coeff;
    s.quadrature = quad;
    s.set_modal(spec.max_degree, std::move(coeff));
    return s;
}

}  // namespace

AngularSpectrum eigensolve(const CrossSectionSpec& spec, int n, int count) {
    if (count < 1) throw DomainError("eigensolve: count must be >= 1");
    return std::visit(
        [&](const auto& s) -> AngularSpectrum {
            using T = std::decay_t<decltype(s)>;
            if constexpr (std::is_same_v<T, RoundSphere>) return solve_round(s, n, count);
            else return solve_galerkin(s, n, count);
        },
        spec);
}

MultiplierResult angular_multiplier(const AngularSpectrum& spectrum,
                                    const std::function<std::complex<double>(double)>& F,
                                    const Eigen::VectorXd& x, const Eigen::VectorXd& y, double tolerance) {
    const auto proj = spectrum.projectors(x, y);
    cd sum = 0.0;
    std::vector<double> bound(proj.size());
    const double vol = spectrum.zonal() ? spectrum.volume() : 1.0;
    Eigen::VectorXcd px, py;
    if (!spectrum.zonal()) {
        px = spectrum.eigenfunctions(x);
        py = spectrum.eigenfunctions(y);
    }
    for (std::size_t l = 0; l < proj.size(); ++l) {
        const cd f = F(spectrum.levels[l].nu);
        sum += f * proj[l];
        double sup;
        if (spectrum.zonal()) {
            sup = spectrum.levels[l].multiplicity / vol;
        } else {
            sup = 0.0;
            for (int k = spectrum.level_first_mode[l], e = k + spectrum.levels[l].multiplicity; k < e; ++k)
                sup += std::abs(px[k]) * std::abs(py[k]);
        }
        bound[l] = std::abs(f) * sup;
    }
    double tail = INFINITY;
    const std::size_t L = bound.size();
    if (L >= 3) {
        const double b2 = bound[L - 1], b1 = bound[L - 2], b0 = bound[L - 3];
        if (b2 == 0.0 && b1 == 0.0) tail = 0.0;
        else if (b1 > 0.0 && b0 > 0.0) {
            const double q = std::max(b2 / b1, b1 / b0);
            if (q < 1.0) tail = b2 * q / (1.0 - q);
        }
    }
    if (tail > tolerance)
        throw TailEstimateExceeded("angular_multiplier: tail bound " + std::to_string(tail) +
                                   " exceeds tolerance");
    return {sum, tail, static_cast<int>(L)};
}

WeylReport verify_weyl(const AngularSpectrum& spectrum) {
    WeylReport rep;
    const auto nu = spectrum.nu();
    const int K = static_cast<int>(nu.size());
    rep.sufficient = K >= 50;
    rep.k_lo = K / 2;
    rep.k_hi = K - 1;
    rep.min_ratio = INFINITY;
    rep.max_ratio = 0.0;
    const double expo = 2.0 / (spectrum.n - 1);
    for (int k = rep.k_lo; k <= rep.k_hi; ++k) {
        const double r = nu[k] * nu[k] / std::pow(1.0 + k, expo);
        rep.ratios.push_back(r);
        rep.min_ratio = std::min(rep.min_ratio, r);
        rep.max_ratio = std::max(rep.max_ratio, r);
    }
    return rep;
}

EigenfunctionBoundReport verify_eigenfunction_bound(const AngularSpectrum& spectrum) {
    EigenfunctionBoundReport rep;
    rep.min_ratio = INFINITY;
    const double expo = 0.25 * (spectrum.n - 2);
    const int K = spectrum.mode_count();
    for (int k = 0; k < K; ++k) {
        const auto& lv = spectrum.levels[spectrum.mode_level[k]];
        double sup;
        if (spectrum.psi.size() > 0) sup = spectrum.psi.col(k).cwiseAbs().maxCoeff();
        else sup = std::sqrt(lv.multiplicity / spectrum.volume());
        const double r = sup / std::pow(1.0 + lv.nu * lv.nu, expo);
        rep.ratios.push_back(r);
        rep.min_ratio = std::min(rep.min_ratio, r);
        rep.max_ratio = std::max(rep.max_ratio, r);
    }
    return rep;
}

}  // namespace conespec
