#pragma once

#include <Eigen/Dense>
#include <complex>
#include <functional>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "conespec/cone.hpp"
#include "conespec/cross_section.hpp"
#include "conespec/quadrature.hpp"

namespace conespec {

// Gauss-Legendre nodes on [r_min, r_max] with weights for r^{n-1} dr.
struct RadialGrid {
    int n = 3;
    double r_min = 0.0, r_max = 0.0;
    std::vector<double> nodes, weights;

    std::size_t size() const { return nodes.size(); }
};

RadialGrid make_radial_grid(int n, double r_min = 0.05, double r_max = 8.0, int nodes = 400);
// Geometric refinement towards r = 0 followed by uniform panels up to r_max.
RadialGrid make_graded_grid(int n, double r_max, int nodes);
// Graded r and rho grids with at most 8 radians of e^{i r rho} per panel.
std::pair<RadialGrid, RadialGrid> make_transform_grids(int n, double r_max, double rho_max);

struct HankelResult {
    Eigen::VectorXcd values;
    bool tail_warning = false;  // |f| * weight above 1e-8 near r_max
};

// (H_nu f)(rho) = int (r rho)^{-(n-2)/2} J_nu(r rho) f(r) r^{n-1} dr on rho_grid nodes.
HankelResult hankel_transform(double nu, const Eigen::VectorXcd& f, const RadialGrid& grid,
                              const RadialGrid& rho_grid);

// Unweighted kernel (r rho)^{-(n-2)/2} J_nu(r rho), rho x r.
Eigen::MatrixXd hankel_kernel(double nu, const RadialGrid& grid, const RadialGrid& rho_grid);

// Multipliers are functions of lambda = sqrt(L).
using Multiplier = std::function<std::complex<double>(double)>;

// (r1 r2)^{-(n-2)/2} int G(rho) J_nu(r1 rho) J_nu(r2 rho) rho d rho over a rule
// covering the support of G. `extent` is the largest phase coefficient of G
// (e.g. |t| for e^{i t rho}); UnresolvedOscillation if the rule is too coarse.
std::complex<double> mode_kernel(double nu, int n, const Multiplier& G, double r1, double r2,
                                 const quad::Rule& rule, double extent = 0.0);

// sum_l P_l(x, y) K_{nu_l}(r1, r2) = int G(lambda) dE(lambda; x, y) d lambda.
std::complex<double> operator_kernel(const AngularSpectrum& spectrum, const Multiplier& G, const ConePoint& x,
                                     const ConePoint& y, const quad::Rule& rule, double extent = 0.0,
                                     bool parallel = true);

// Kernel of phi(2^{-k} sqrt L) e^{i t sqrt L}.
std::complex<double> halfwave_band_kernel(const AngularSpectrum& spectrum, int k, double t, const ConePoint& x,
                                          const ConePoint& y, bool parallel = true);
// Same for several times; one frequency rule resolving max |t| is shared.
std::vector<std::complex<double>> halfwave_band_kernels(const AngularSpectrum& spectrum, int k,
                                                        const std::vector<double>& ts, const ConePoint& x,
                                                        const ConePoint& y, bool parallel = true);

// Band kernel on xs x ys. The parallel path distributes pairs over threads;
// the serial path is the reference implementation.
Eigen::MatrixXcd kernel_grid(const AngularSpectrum& spectrum, int k, double t, const std::vector<ConePoint>& xs,
                             const std::vector<ConePoint>& ys, bool parallel = true);

// Raw complex<double> row-major array in <stem>.bin and `metadata_json` in <stem>.json.
void write_kernel_grid(const std::string& stem, const Eigen::MatrixXcd& grid, const std::string& metadata_json);

// Kernel of e^{-i t L} from the oscillatory s-integral form.
std::complex<double> schrodinger_kernel_ct(const AngularSpectrum& spectrum, double t, const ConePoint& x,
                                           const ConePoint& y, double tolerance = 1e-10);
// Same kernel from the mode sum of e^{-i pi nu/2} J_nu(r1 r2 / 2t).
std::complex<double> schrodinger_kernel_modes(const AngularSpectrum& spectrum, double t, const ConePoint& x,
                                              const ConePoint& y);

// Hankel-space calculus for one spectrum on a pair of radial grids; needs
// node samples of the angular eigenfunctions (two-dimensional cross-sections).
class RadialCalculus {
public:
    RadialCalculus(std::shared_ptr<const AngularSpectrum> spectrum, RadialGrid grid, RadialGrid rho_grid);

    const AngularSpectrum& spectrum() const { return *spectrum_; }
    const RadialGrid& grid() const { return grid_; }
    const RadialGrid& rho_grid() const { return rho_; }
    const SphereQuadrature& angular() const { return *spectrum_->quadrature; }
    const Eigen::MatrixXd& kernel(int level) const { return kernels_[level]; }
    int levels() const { return static_cast<int>(kernels_.size()); }

private:
    std::shared_ptr<const AngularSpectrum> spectrum_;
    RadialGrid grid_, rho_;
    std::vector<Eigen::MatrixXd> kernels_;
};

// Samples on radial nodes x angular quadrature nodes.
struct ConeFunction {
    std::shared_ptr<const RadialCalculus> calc;
    Eigen::MatrixXcd values;

    // Angular mode coefficients, radial x modes.
    Eigen::MatrixXcd modes() const;
    // Hankel-space coefficients, rho x modes.
    Eigen::MatrixXcd spectral() const;

    double l2_norm() const;
    double lp_norm(double p) const;
};

ConeFunction sample(std::shared_ptr<const RadialCalculus> calc,
                    const std::function<std::complex<double>(double, const Vec3&)>& f);
ConeFunction from_modes(std::shared_ptr<const RadialCalculus> calc, const Eigen::MatrixXcd& modes);
ConeFunction from_spectral(std::shared_ptr<const RadialCalculus> calc, const Eigen::MatrixXcd& spectral);

ConeFunction apply_multiplier(const ConeFunction& f, const Multiplier& G);

struct WaveState {
    ConeFunction u, ut;
};

// cos(t sqrt L) u0 + sin(t sqrt L)/sqrt L u1 and its time derivative.
WaveState evolve_wave(const ConeFunction& u0, const ConeFunction& u1, double t);
// e^{i t sqrt L} f.
ConeFunction evolve_halfwave(const ConeFunction& f, double t);
// ||sqrt L u||^2 + ||u_t||^2.
double wave_energy(const WaveState& s);

// phi_j(sqrt L) f with the linear partition.
ConeFunction littlewood_paley_project(const ConeFunction& f, int j);
// (sum_j 2^{2js} ||phi~_j(sqrt L) f||^2)^{1/2} with the squared partition.
double sobolev_norm(const ConeFunction& f, double s);
// Bands contributing to sobolev_norm for this grid.
std::pair<int, int> band_range(const RadialGrid& rho_grid);

ConeFunction mode_project(const ConeFunction& f, const std::function<bool(double)>& keep_nu);

struct BernsteinReport {
    double p = 2.0, q = 2.0;
    std::vector<int> bands;
    std::vector<double> max_ratio;  // per band, over the ensemble
    bool growth_flag = false;
};

// ||phi_j f||_p / (2^{n j (1/q - 1/p)} ||phi_j f||_q) over an ensemble.
BernsteinReport bernstein_check(const std::vector<ConeFunction>& ensemble, const std::vector<int>& bands, double p,
                                double q);

}  // namespace conespec
