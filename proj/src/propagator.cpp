#include "conespec/propagator.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>

#include "conespec/bands.hpp"
#include "conespec/errors.hpp"
#include "conespec/specfun.hpp"
#include "conespec/spectral_measure.hpp"

namespace conespec {

namespace {

using cd = std::complex<double>;
constexpr double kPi = std::numbers::pi;

RadialGrid from_rule(int n, double a, double b, const quad::Rule& rule) {
    RadialGrid g;
    g.n = n;
    g.r_min = a;
    g.r_max = b;
    g.nodes = rule.nodes;
    g.weights = rule.weights;
    for (std::size_t i = 0; i < g.nodes.size(); ++i) g.weights[i] *= std::pow(g.nodes[i], n - 1);
    return g;
}

double radial_prefactor(int n, double r1, double r2) { return std::pow(r1 * r2, -0.5 * (n - 2)); }

void check_resolution(const quad::Rule& rule, double extent) {
    const double gap = bands::max_spacing(rule);
    if (gap * extent > 0.5)
        throw UnresolvedOscillation("frequency rule too coarse: spacing " + std::to_string(gap) +
                                    " for phase extent " + std::to_string(extent));
}

int levels_below(const AngularSpectrum& s, double cutoff) {
    int c = 0;
    while (c < static_cast<int>(s.levels.size()) && s.levels[c].nu <= cutoff) ++c;
    return std::max(c, 1);
}

const Eigen::MatrixXcd& node_samples(const RadialCalculus& calc) {
    if (calc.spectrum().psi.size() == 0)
        throw DomainError("cone functions need node samples of the angular eigenfunctions");
    return calc.spectrum().psi;
}

}  // namespace

RadialGrid make_radial_grid(int n, double r_min, double r_max, int nodes) {
    if (!(r_min >= 0.0 && r_max > r_min)) throw DomainError("radial grid: need 0 <= r_min < r_max");
    constexpr int kPoints = 20;
    const int panels = std::max(1, nodes / kPoints);
    return from_rule(n, r_min, r_max, quad::composite(r_min, r_max, panels, kPoints));
}

RadialGrid make_graded_grid(int n, double r_max, int nodes) {
    if (!(r_max > 0.0)) throw DomainError("graded radial grid: r_max must be positive");
    constexpr int kPoints = 16, kLevels = 10;
    const int uniform = std::max(1, nodes / kPoints - kLevels);
    // Graded panels end at the uniform panel width so no panel is wider
    // than the rest of the grid.
    const double width = r_max / uniform;
    const auto rule = quad::graded(0.0, r_max, width, 0.35, kLevels, width, kPoints);
    return from_rule(n, 0.0, r_max, rule);
}

std::pair<RadialGrid, RadialGrid> make_transform_grids(int n, double r_max, double rho_max) {
    const int panels = static_cast<int>(std::ceil(r_max * rho_max / 8.0));
    const int nodes = 16 * (panels + 10);
    return {make_graded_grid(n, r_max, nodes), make_graded_grid(n, rho_max, nodes)};
}

Eigen::MatrixXd hankel_kernel(double nu, const RadialGrid& grid, const RadialGrid& rho_grid) {
    const int R = static_cast<int>(grid.size()), P = static_cast<int>(rho_grid.size());
    Eigen::MatrixXd K(P, R);
#pragma omp parallel for schedule(static)
    for (int a = 0; a < P; ++a)
        for (int i = 0; i < R; ++i) {
            const double z = rho_grid.nodes[a] * grid.nodes[i];
            K(a, i) = std::pow(z, -0.5 * (grid.n - 2)) * specfun::bessel_j(nu, z);
        }
    return K;
}

HankelResult hankel_transform(double nu, const Eigen::VectorXcd& f, const RadialGrid& grid,
                              const RadialGrid& rho_grid) {
    if (nu < 0.0) throw DomainError("hankel_transform: nu must be >= 0");
    if (f.size() != static_cast<Eigen::Index>(grid.size())) throw DomainError("hankel_transform: size mismatch");
    const Eigen::Map<const Eigen::VectorXd> w(grid.weights.data(), grid.size());
    HankelResult res;
    res.values = hankel_kernel(nu, grid, rho_grid).cast<cd>() * (w.cast<cd>().cwiseProduct(f));
    const Eigen::Index last = f.size() - 1;
    res.tail_warning = std::abs(f[last]) * grid.weights[last] > 1e-8;
    return res;
}

std::complex<double> mode_kernel(double nu, int n, const Multiplier& G, double r1, double r2,
                                 const quad::Rule& rule, double extent) {
    check_resolution(rule, extent + r1 + r2);
    cd acc = 0.0;
    for (std::size_t i = 0; i < rule.size(); ++i) {
        const double rho = rule.nodes[i];
        acc += rule.weights[i] * G(rho) * specfun::bessel_j(nu, r1 * rho) * specfun::bessel_j(nu, r2 * rho) * rho;
    }
    return radial_prefactor(n, r1, r2) * acc;
}

std::complex<double> operator_kernel(const AngularSpectrum& spectrum, const Multiplier& G, const ConePoint& x,
                                     const ConePoint& y, const quad::Rule& rule, double extent, bool parallel) {
    check_resolution(rule, extent + x.r + y.r);
    const auto dens = spectral_density(spectrum, rule.nodes, x, y, parallel);
    cd acc = 0.0;
    for (std::size_t i = 0; i < rule.size(); ++i) acc += rule.weights[i] * G(rule.nodes[i]) * dens[i];
    return acc;
}

std::vector<std::complex<double>> halfwave_band_kernels(const AngularSpectrum& spectrum, int k,
                                                        const std::vector<double>& ts, const ConePoint& x,
                                                        const ConePoint& y, bool parallel) {
    double t_max = 0.0;
    for (double t : ts) t_max = std::max(t_max, std::abs(t));
    const double extent = t_max + x.r + y.r;
    const auto rule = bands::band_rule(k, extent);
    check_resolution(rule, extent);
    const auto dens = spectral_density(spectrum, rule.nodes, x, y, parallel);
    std::vector<cd> base(rule.size());
    for (std::size_t i = 0; i < rule.size(); ++i) base[i] = rule.weights[i] * bands::phi_j(k, rule.nodes[i]) * dens[i];
    std::vector<cd> out;
    out.reserve(ts.size());
    for (double t : ts) {
        cd acc = 0.0;
        for (std::size_t i = 0; i < rule.size(); ++i) acc += base[i] * std::exp(cd(0.0, t * rule.nodes[i]));
        out.push_back(acc);
    }
    return out;
}

std::complex<double> halfwave_band_kernel(const AngularSpectrum& spectrum, int k, double t, const ConePoint& x,
                                          const ConePoint& y, bool parallel) {
    return halfwave_band_kernels(spectrum, k, {t}, x, y, parallel).front();
}

Eigen::MatrixXcd kernel_grid(const AngularSpectrum& spectrum, int k, double t, const std::vector<ConePoint>& xs,
                             const std::vector<ConePoint>& ys, bool parallel) {
    const int X = static_cast<int>(xs.size()), Y = static_cast<int>(ys.size());
    Eigen::MatrixXcd out(X, Y);
    if (!parallel) {
        for (int i = 0; i < X; ++i)
            for (int j = 0; j < Y; ++j) out(i, j) = halfwave_band_kernel(spectrum, k, t, xs[i], ys[j], false);
        return out;
    }
#pragma omp parallel for collapse(2) schedule(dynamic)
    for (int i = 0; i < X; ++i)
        for (int j = 0; j < Y; ++j) out(i, j) = halfwave_band_kernel(spectrum, k, t, xs[i], ys[j], false);
    return out;
}

void write_kernel_grid(const std::string& stem, const Eigen::MatrixXcd& grid, const std::string& metadata_json) {
    std::ofstream bin(stem + ".bin", std::ios::binary);
    if (!bin) throw std::runtime_error("cannot write " + stem + ".bin");
    for (Eigen::Index i = 0; i < grid.rows(); ++i)
        for (Eigen::Index j = 0; j < grid.cols(); ++j) {
            const cd v = grid(i, j);
            bin.write(reinterpret_cast<const char*>(&v), sizeof(cd));
        }
    std::ofstream meta(stem + ".json");
    if (!meta) throw std::runtime_error("cannot write " + stem + ".json");
    meta << metadata_json << '\n';
}

std::complex<double> schrodinger_kernel_ct(const AngularSpectrum& spectrum, double t, const ConePoint& x,
                                           const ConePoint& y, double tolerance) {
    if (t == 0.0) throw DomainError("schrodinger kernel: t must be nonzero");
    const double beta = x.r * y.r / (2.0 * t), ab = std::abs(beta);
    const auto proj = spectrum.projectors(x.dir, y.dir);
    const int count = levels_below(spectrum, order_cutoff(ab));
    const double nu_max = spectrum.levels[count - 1].nu;

    // I_nu(-i beta) = (1/pi) int_0^pi e^{-i beta cos s} cos(nu s) ds
    //                 - (sin nu pi / pi) int_0^inf e^{i beta cosh s - nu s} ds.
    const auto rule = bands::oscillation_rule(0.0, kPi, nu_max + ab, 4, 16);
    std::vector<cd> ev(rule.size());
    for (std::size_t i = 0; i < rule.size(); ++i) ev[i] = std::exp(cd(0.0, -beta * std::cos(rule.nodes[i])));
    constexpr double kSplit = 1.5;
    cd sum = 0.0;
    for (int l = 0; l < count; ++l) {
        const double nu = spectrum.levels[l].nu;
        cd a = 0.0;
        for (std::size_t i = 0; i < rule.size(); ++i) a += rule.weights[i] * ev[i] * std::cos(nu * rule.nodes[i]);
        const double sn = std::sin(nu * kPi);
        cd b = 0.0;
        if (std::abs(sn) > 1e-14) {
            auto fs = [&](double s) { return std::exp(cd(-nu * s, beta * std::cosh(s))); };
            const double s_end = 40.0 / nu;
            if (s_end <= kSplit) {
                b = quad::gauss_kronrod(fs, 0.0, s_end, 1e-3 * tolerance, 1e-13, 4000).value;
            } else {
                b = quad::gauss_kronrod(fs, 0.0, kSplit, 1e-3 * tolerance, 1e-13, 4000).value;
                // u = cosh s: e^{i beta u} (u + sqrt(u^2 - 1))^{-nu} du / sqrt(u^2 - 1).
                auto fu = [&](double u) {
                    const double q = std::sqrt(u * u - 1.0);
                    return std::exp(cd(-nu * std::log(u + q), beta * u)) / q;
                };
                b += quad::oscillatory_tail(fu, std::cosh(kSplit), kPi / ab, 1e-3 * tolerance, 4000);
            }
        }
        sum += proj[l] * (a - sn * b) / kPi;
    }
    const cd front = std::exp(cd(0.0, (x.r * x.r + y.r * y.r) / (4.0 * t))) / cd(0.0, 2.0 * t);
    return radial_prefactor(spectrum.n, x.r, y.r) * front * sum;
}

std::complex<double> schrodinger_kernel_modes(const AngularSpectrum& spectrum, double t, const ConePoint& x,
                                              const ConePoint& y) {
    if (t == 0.0) throw DomainError("schrodinger kernel: t must be nonzero");
    const double beta = x.r * y.r / (2.0 * t), ab = std::abs(beta), sg = beta > 0 ? 1.0 : -1.0;
    const auto proj = spectrum.projectors(x.dir, y.dir);
    const int count = levels_below(spectrum, order_cutoff(ab));
    cd sum = 0.0;
    for (int l = 0; l < count; ++l) {
        const double nu = spectrum.levels[l].nu;
        sum += proj[l] * std::exp(cd(0.0, -sg * 0.5 * kPi * nu)) * specfun::bessel_j(nu, ab);
    }
    const cd front = std::exp(cd(0.0, (x.r * x.r + y.r * y.r) / (4.0 * t))) / cd(0.0, 2.0 * t);
    return radial_prefactor(spectrum.n, x.r, y.r) * front * sum;
}

RadialCalculus::RadialCalculus(std::shared_ptr<const AngularSpectrum> spectrum, RadialGrid grid,
                               RadialGrid rho_grid)
    : spectrum_(std::move(spectrum)), grid_(std::move(grid)), rho_(std::move(rho_grid)) {
    if (!spectrum_ || !spectrum_->quadrature || spectrum_->psi.size() == 0)
        throw DomainError("radial calculus: spectrum has no node samples");
    if (grid_.n != spectrum_->n || rho_.n != spectrum_->n)
        throw DomainError("radial calculus: grid dimension differs from the cone dimension");
    const int L = static_cast<int>(spectrum_->levels.size());
    const int R = static_cast<int>(grid_.size()), P = static_cast<int>(rho_.size());
    kernels_.assign(L, Eigen::MatrixXd(P, R));
    const auto base = spectrum_->ladder_base();
#pragma omp parallel
    {
        std::vector<double> j(L);
#pragma omp for schedule(static)
        for (int a = 0; a < P; ++a)
            for (int i = 0; i < R; ++i) {
                const double z = rho_.nodes[a] * grid_.nodes[i];
                if (base) specfun::bessel_j_ladder(*base, z, L, j.data());
                else
                    for (int l = 0; l < L; ++l) j[l] = specfun::bessel_j(spectrum_->levels[l].nu, z);
                const double pref = std::pow(z, -0.5 * (grid_.n - 2));
                for (int l = 0; l < L; ++l) kernels_[l](a, i) = pref * j[l];
            }
    }
}

Eigen::MatrixXcd ConeFunction::modes() const {
    const auto& psi = node_samples(*calc);
    const auto& q = calc->angular();
    const Eigen::Map<const Eigen::VectorXd> w(q.weight.data(), q.size());
    return values * w.cast<cd>().asDiagonal() * psi.conjugate();
}

Eigen::MatrixXcd ConeFunction::spectral() const {
    const Eigen::MatrixXcd m = modes();
    const auto& s = calc->spectrum();
    const auto& g = calc->grid();
    const Eigen::Map<const Eigen::VectorXd> w(g.weights.data(), g.size());
    Eigen::MatrixXcd out(calc->rho_grid().size(), m.cols());
    for (std::size_t l = 0; l < s.levels.size(); ++l) {
        const int first = s.level_first_mode[l], mult = s.levels[l].multiplicity;
        out.middleCols(first, mult) =
            calc->kernel(static_cast<int>(l)).cast<cd>() * (w.cast<cd>().asDiagonal() * m.middleCols(first, mult));
    }
    return out;
}

double ConeFunction::l2_norm() const { return lp_norm(2.0); }

double ConeFunction::lp_norm(double p) const {
    if (std::isinf(p)) return values.cwiseAbs().maxCoeff();
    const auto& g = calc->grid();
    const auto& q = calc->angular();
    double acc = 0.0;
    for (Eigen::Index i = 0; i < values.rows(); ++i)
        for (Eigen::Index j = 0; j < values.cols(); ++j)
            acc += g.weights[i] * q.weight[j] * std::pow(std::abs(values(i, j)), p);
    return std::pow(acc, 1.0 / p);
}

ConeFunction sample(std::shared_ptr<const RadialCalculus> calc,
                    const std::function<std::complex<double>(double, const Vec3&)>& f) {
    const auto& g = calc->grid();
    const auto& q = calc->angular();
    ConeFunction out{calc, Eigen::MatrixXcd(g.size(), q.size())};
    for (std::size_t i = 0; i < g.size(); ++i)
        for (std::size_t j = 0; j < q.size(); ++j) out.values(i, j) = f(g.nodes[i], q.point[j]);
    return out;
}

ConeFunction from_modes(std::shared_ptr<const RadialCalculus> calc, const Eigen::MatrixXcd& modes) {
    const auto& psi = node_samples(*calc);
    return {calc, modes * psi.transpose()};
}

ConeFunction from_spectral(std::shared_ptr<const RadialCalculus> calc, const Eigen::MatrixXcd& spectral) {
    const auto& s = calc->spectrum();
    const auto& rho = calc->rho_grid();
    const Eigen::Map<const Eigen::VectorXd> w(rho.weights.data(), rho.size());
    Eigen::MatrixXcd m(calc->grid().size(), spectral.cols());
    for (std::size_t l = 0; l < s.levels.size(); ++l) {
        const int first = s.level_first_mode[l], mult = s.levels[l].multiplicity;
        m.middleCols(first, mult) = calc->kernel(static_cast<int>(l)).transpose().cast<cd>() *
                                    (w.cast<cd>().asDiagonal() * spectral.middleCols(first, mult));
    }
    return from_modes(calc, m);
}

ConeFunction apply_multiplier(const ConeFunction& f, const Multiplier& G) {
    Eigen::MatrixXcd s = f.spectral();
    const auto& rho = f.calc->rho_grid();
    for (Eigen::Index a = 0; a < s.rows(); ++a) s.row(a) *= G(rho.nodes[a]);
    return from_spectral(f.calc, s);
}

WaveState evolve_wave(const ConeFunction& u0, const ConeFunction& u1, double t) {
    if (u0.calc != u1.calc) throw DomainError("evolve_wave: data on different grids");
    const Eigen::MatrixXcd s0 = u0.spectral(), s1 = u1.spectral();
    Eigen::MatrixXcd su(s0.rows(), s0.cols()), sut(s0.rows(), s0.cols());
    const auto& rho = u0.calc->rho_grid();
    for (Eigen::Index a = 0; a < s0.rows(); ++a) {
        const double lam = rho.nodes[a], c = std::cos(t * lam), s = std::sin(t * lam);
        su.row(a) = c * s0.row(a) + (s / lam) * s1.row(a);
        sut.row(a) = -lam * s * s0.row(a) + c * s1.row(a);
    }
    return {from_spectral(u0.calc, su), from_spectral(u0.calc, sut)};
}

ConeFunction evolve_halfwave(const ConeFunction& f, double t) {
    return apply_multiplier(f, [t](double lam) { return std::exp(cd(0.0, t * lam)); });
}

double wave_energy(const WaveState& s) {
    const Eigen::MatrixXcd su = s.u.spectral(), sut = s.ut.spectral();
    const auto& rho = s.u.calc->rho_grid();
    double acc = 0.0;
    for (Eigen::Index a = 0; a < su.rows(); ++a) {
        const double lam = rho.nodes[a];
        acc += rho.weights[a] * (lam * lam * su.row(a).squaredNorm() + sut.row(a).squaredNorm());
    }
    return acc;
}

ConeFunction littlewood_paley_project(const ConeFunction& f, int j) {
    return apply_multiplier(f, [j](double lam) { return cd(bands::phi_j(j, lam), 0.0); });
}

std::pair<int, int> band_range(const RadialGrid& rho_grid) {
    const auto [lo, hi] = std::minmax_element(rho_grid.nodes.begin(), rho_grid.nodes.end());
    return {bands::band_lo(*lo), bands::band_hi(*hi)};
}

double sobolev_norm(const ConeFunction& f, double s) {
    const Eigen::MatrixXcd sp = f.spectral();
    const auto& rho = f.calc->rho_grid();
    const auto [jlo, jhi] = band_range(rho);
    double acc = 0.0;
    for (int j = jlo; j <= jhi; ++j) {
        double band = 0.0;
        for (Eigen::Index a = 0; a < sp.rows(); ++a) {
            const double p = bands::phi_sq_j(j, rho.nodes[a]);
            if (p != 0.0) band += rho.weights[a] * p * p * sp.row(a).squaredNorm();
        }
        acc += std::pow(2.0, 2.0 * j * s) * band;
    }
    return std::sqrt(acc);
}

ConeFunction mode_project(const ConeFunction& f, const std::function<bool(double)>& keep_nu) {
    Eigen::MatrixXcd m = f.modes();
    const auto& s = f.calc->spectrum();
    for (Eigen::Index k = 0; k < m.cols(); ++k)
        if (!keep_nu(s.levels[s.mode_level[k]].nu)) m.col(k).setZero();
    return from_modes(f.calc, m);
}

BernsteinReport bernstein_check(const std::vector<ConeFunction>& ensemble, const std::vector<int>& bands_list,
                                double p, double q) {
    if (ensemble.empty()) throw DomainError("bernstein_check: empty ensemble");
    const auto& s = ensemble.front().calc->spectrum();
    const int n = s.n;
    const double alpha = s.nu0() - 0.5 * (n - 2);
    const double p_alpha = alpha >= 0.0 ? INFINITY : n / std::abs(alpha);
    const double p_alpha_dual = std::isinf(p_alpha) ? 1.0 : p_alpha / (p_alpha - 1.0);
    if (!(p_alpha_dual < q && q <= p && p < p_alpha))
        throw DomainError("bernstein_check: need p'(alpha) < q <= p < p(alpha)");
    BernsteinReport rep;
    rep.p = p;
    rep.q = q;
    rep.bands = bands_list;
    for (int j : bands_list) {
        double worst = 0.0;
        for (const auto& f : ensemble) {
            const ConeFunction fj = littlewood_paley_project(f, j);
            const double nq = fj.lp_norm(q);
            if (nq == 0.0) continue;
            const double inv_p = std::isinf(p) ? 0.0 : 1.0 / p;
            const double scale = std::pow(2.0, n * j * (1.0 / q - inv_p));
            worst = std::max(worst, fj.lp_norm(p) / (scale * nq));
        }
        rep.max_ratio.push_back(worst);
    }
    bool increasing = rep.max_ratio.size() >= 3;
    for (std::size_t i = 1; i < rep.max_ratio.size(); ++i)
        if (rep.max_ratio[i] <= rep.max_ratio[i - 1]) increasing = false;
    rep.growth_flag = increasing && rep.max_ratio.back() > 2.0 * rep.max_ratio.front();
    return rep;
}

}  // namespace conespec
