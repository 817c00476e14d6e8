#pragma once

#include <Eigen/Dense>
#include <complex>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <variant>
#include <vector>

namespace conespec {

using Vec3 = Eigen::Vector3d;

// Product rule on S^2: Gauss-Legendre in cos(theta) times uniform longitude.
struct SphereQuadrature {
    int n_theta = 0;
    int n_phi = 0;
    std::vector<double> theta, phi, weight;
    std::vector<Vec3> point;

    std::size_t size() const { return weight.size(); }
};

SphereQuadrature sphere_quadrature(int n_theta, int n_phi);
// Rule exact for polynomials of degree <= degree on S^2.
SphereQuadrature sphere_quadrature_for_degree(int degree);

// Real orthonormal spherical harmonics up to degree L, index l*l + l + m.
// grad_theta / grad_phi are the components of the surface gradient in the
// orthonormal (e_theta, e_phi) frame; they may be null.
void real_spherical_harmonics(int L, double theta, double phi, double* value, double* grad_theta,
                              double* grad_phi);
void real_spherical_harmonics(int L, const Vec3& x, double* value);

inline int sh_index(int l, int m) { return l * l + l + m; }
inline int sh_count(int L) { return (L + 1) * (L + 1); }

// Parametric potentials on the unit S^2:
// a = a0 + a1 z + a2 (3z^2 - 1)/2,  A = rotation (-y, x, 0) + gradient * grad_S z.
struct SpherePotential {
    double a0 = 0.0, a1 = 0.0, a2 = 0.0;
    double rotation = 0.0;
    double gradient = 0.0;

    double scalar(const Vec3& x) const;
    Vec3 vector(const Vec3& x) const;
};

struct RoundSphere {
    int dim = 2;
    double radius = 1.0;
    double a = 0.0;  // constant electric potential
};

struct GalerkinSphere2 {
    SpherePotential potential;
    int max_degree = 24;
    bool check_convergence = false;
    double convergence_tol = 1e-8;
    // Optional overrides of the parametric potential.
    std::function<double(const Vec3&)> scalar_override;
    std::function<Vec3(const Vec3&)> vector_override;

    double scalar(const Vec3& x) const;
    Vec3 vector(const Vec3& x) const;
    bool magnetic() const;
};

using CrossSectionSpec = std::variant<RoundSphere, GalerkinSphere2>;

struct AngularLevel {
    double mu;
    double nu;
    int multiplicity;
};

// Eigen-data of the angular operator on the cross-section. Levels are sorted
// by mu; each level carries its multiplicity and a projector kernel.
class AngularSpectrum {
public:
    int n = 3;
    std::vector<AngularLevel> levels;

    // Node samples (only for two-dimensional cross-sections).
    std::shared_ptr<const SphereQuadrature> quadrature;
    Eigen::MatrixXcd psi;              // nodes x modes
    std::vector<int> mode_level;       // mode -> level index
    std::vector<int> level_first_mode; // level -> first mode column

    std::vector<double> mu() const;
    std::vector<double> nu() const;
    double nu0() const { return levels.front().nu; }
    int mode_count() const;
    int cross_dim() const { return n - 1; }
    double volume() const;

    // Projector kernel of level l: sum over its modes of psi(x) conj(psi(y)).
    std::complex<double> projector(std::size_t level, const Eigen::VectorXd& x,
                                   const Eigen::VectorXd& y) const;
    // All level projectors at (x, y).
    std::vector<std::complex<double>> projectors(const Eigen::VectorXd& x,
                                                 const Eigen::VectorXd& y) const;
    // Eigenfunction values at a point, one per mode.
    Eigen::VectorXcd eigenfunctions(const Eigen::VectorXd& x) const;

    // nu_l = base + l for all levels (free round spheres).
    std::optional<double> ladder_base() const;

    bool zonal() const { return zonal_; }
    int sphere_dim() const { return sphere_dim_; }
    double sphere_radius() const { return sphere_radius_; }

    // Internal construction.
    void set_zonal(int dim, double radius) {
        zonal_ = true;
        sphere_dim_ = dim;
        sphere_radius_ = radius;
    }
    void set_modal(int max_degree, Eigen::MatrixXcd coefficients) {
        zonal_ = false;
        sphere_dim_ = 2;
        sphere_radius_ = 1.0;
        basis_degree_ = max_degree;
        coefficients_ = std::move(coefficients);
    }
    const Eigen::MatrixXcd& coefficients() const { return coefficients_; }
    int basis_degree() const { return basis_degree_; }

private:
    bool zonal_ = true;
    int sphere_dim_ = 2;
    double sphere_radius_ = 1.0;
    int basis_degree_ = 0;
    Eigen::MatrixXcd coefficients_;  // basis x modes (modal case)
};

// Normalized Gegenbauer zonal factor C_l(t)/C_l(1) for S^d, l = 0..count-1.
void zonal_profile(int dim, double cos_angle, int count, double* out);

double sphere_volume(int dim, double radius);
int sphere_harmonic_multiplicity(int dim, int degree);

AngularSpectrum eigensolve(const CrossSectionSpec& spec, int n, int count);

// Hermitian Galerkin matrix (exposed for tests).
Eigen::MatrixXcd galerkin_matrix(const GalerkinSphere2& spec, const SphereQuadrature& quad);

struct MultiplierResult {
    std::complex<double> value;
    double tail_estimate;
    int levels_used;
};

// sum over levels F(nu) * projector(x, y).
MultiplierResult angular_multiplier(const AngularSpectrum& spectrum,
                                    const std::function<std::complex<double>(double)>& F,
                                    const Eigen::VectorXd& x, const Eigen::VectorXd& y,
                                    double tolerance = 1e-10);

struct WeylReport {
    bool sufficient = false;
    double min_ratio = 0.0, max_ratio = 0.0;
    int k_lo = 0, k_hi = 0;
    std::vector<double> ratios;
};
WeylReport verify_weyl(const AngularSpectrum& spectrum);

struct EigenfunctionBoundReport {
    double min_ratio = 0.0, max_ratio = 0.0;
    std::vector<double> ratios;  // per mode
};
EigenfunctionBoundReport verify_eigenfunction_bound(const AngularSpectrum& spectrum);

// Unit vector on S^2 from spherical angles.
Vec3 sphere_point(double theta, double phi);

}  // namespace conespec
