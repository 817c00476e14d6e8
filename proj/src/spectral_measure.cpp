#include "conespec/spectral_measure.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <optional>
#include <ostream>

#include "conespec/bands.hpp"
#include "conespec/errors.hpp"
#include "conespec/geometry.hpp"
#include "conespec/quadrature.hpp"
#include "conespec/specfun.hpp"

namespace conespec {

namespace {

using cd = std::complex<double>;
constexpr double kPi = std::numbers::pi;

struct LevelData {
    std::vector<cd> proj;
    std::vector<double> sup;  // bound on |P_l| used for tail estimates
};

LevelData level_data(const AngularSpectrum& s, const ConePoint& x, const ConePoint& y) {
    LevelData d;
    d.proj = s.projectors(x.dir, y.dir);
    d.sup.resize(s.levels.size());
    if (s.zonal()) {
        const double vol = s.volume();
        for (std::size_t l = 0; l < s.levels.size(); ++l) d.sup[l] = s.levels[l].multiplicity / vol;
    } else {
        const Eigen::VectorXcd px = s.eigenfunctions(x.dir), py = s.eigenfunctions(y.dir);
        for (std::size_t l = 0; l < s.levels.size(); ++l) {
            double acc = 0.0;
            for (int k = s.level_first_mode[l], e = k + s.levels[l].multiplicity; k < e; ++k)
                acc += std::abs(px[k]) * std::abs(py[k]);
            d.sup[l] = acc;
        }
    }
    return d;
}

void level_bessel(const AngularSpectrum& s, const std::optional<double>& base, double z, int count, double* out) {
    if (count <= 0) return;
    if (z == 0.0) {
        std::fill(out, out + count, 0.0);
        return;
    }
    if (base) {
        specfun::bessel_j_ladder(*base, z, count, out);
        return;
    }
    for (int l = 0; l < count; ++l) out[l] = specfun::bessel_j(s.levels[l].nu, z);
}

// Upper bound (z/2)^nu / Gamma(nu + 1) for |J_nu(z)|.
double small_argument_bound(double nu, double z) {
    if (z <= 0.0) return 0.0;
    return std::exp(nu * std::log(0.5 * z) - std::lgamma(nu + 1.0));
}

int levels_below(const AngularSpectrum& s, double cutoff) {
    int c = 0;
    while (c < static_cast<int>(s.levels.size()) && s.levels[c].nu <= cutoff) ++c;
    return std::max(c, 1);
}

double radial_prefactor(int n, double r1, double r2) { return std::pow(r1 * r2, -0.5 * (n - 2)); }

struct BesselSum {
    cd value;
    double tail;
    int used;
};

BesselSum bessel_sum(const AngularSpectrum& s, const LevelData& ld, const std::optional<double>& base,
                     double lambda, double r1, double r2, double tol, std::vector<double>& j1,
                     std::vector<double>& j2) {
    const int L = static_cast<int>(s.levels.size());
    const int count = levels_below(s, order_cutoff(lambda * std::max(r1, r2)));
    j1.resize(count);
    j2.resize(count);
    level_bessel(s, base, lambda * r1, count, j1.data());
    level_bessel(s, base, lambda * r2, count, j2.data());
    const double pref = lambda * radial_prefactor(s.n, r1, r2);
    cd sum = 0.0;
    double scale = 0.0;
    for (int l = 0; l < count; ++l) {
        const double jj = j1[l] * j2[l];
        sum += ld.proj[l] * jj;
        scale += ld.sup[l] * std::abs(jj);
    }
    const double nu_next = count < L ? s.levels[count].nu : s.levels[L - 1].nu + 1.0;
    const double sup_next = count < L ? ld.sup[count] : 2.0 * ld.sup[L - 1];
    const double tail =
        pref * 2.0 * sup_next * small_argument_bound(nu_next, lambda * r1) * small_argument_bound(nu_next, lambda * r2);
    if (tail > tol * std::max(pref * scale, 1e-300))
        throw TailEstimateExceeded("spectral measure: angular spectrum too short for lambda * r = " +
                                   std::to_string(lambda * std::max(r1, r2)));
    return {pref * sum, tail, count};
}

// Per-level s-integrals of the oscillatory form for a radial kernel g(y),
// y = lambda * d.
template <class G>
std::vector<cd> ct_integrals(G&& g, const std::vector<double>& nus, double lambda, double r1, double r2,
                             double tol) {
    const std::size_t L = nus.size();
    std::vector<cd> out(L, 0.0);
    if (L == 0) return out;
    const double nu_max = *std::max_element(nus.begin(), nus.end());

    // Compact branch on [0, pi]: one rule shared by all levels.
    const auto rule = bands::oscillation_rule(0.0, kPi, nu_max + lambda * (r1 + r2), 4, 16);
    std::vector<cd> gv(rule.size());
    for (std::size_t i = 0; i < rule.size(); ++i) gv[i] = g(lambda * chord_distance(r1, r2, rule.nodes[i]));
    for (std::size_t l = 0; l < L; ++l) {
        cd acc = 0.0;
        for (std::size_t i = 0; i < rule.size(); ++i) acc += rule.weights[i] * gv[i] * std::cos(nus[l] * rule.nodes[i]);
        out[l] = acc;
    }

    // Hyperbolic branch on [0, inf).
    constexpr double kSplit = 1.5;
    const double rr = r1 * r2;
    for (std::size_t l = 0; l < L; ++l) {
        const double nu = nus[l];
        const double sn = std::sin(nu * kPi);
        if (std::abs(sn) < 1e-14) continue;
        auto fs = [&](double s) { return g(lambda * chord_distance_tilde(r1, r2, s)) * std::exp(-nu * s); };
        const double s_end = 40.0 / nu;
        cd branch;
        if (s_end <= kSplit) {
            branch = quad::gauss_kronrod(fs, 0.0, s_end, 0.1 * tol, 1e-13, 4000).value;
        } else {
            branch = quad::gauss_kronrod(fs, 0.0, kSplit, 0.1 * tol, 1e-13, 4000).value;
            // w = d~(s) turns the exponentially chirped tail into a plain oscillation.
            auto fw = [&](double w) {
                const double sh = std::sqrt(std::max(w * w - (r1 + r2) * (r1 + r2), 0.0)) / (2.0 * std::sqrt(rr));
                const double s = 2.0 * std::asinh(sh);
                return g(lambda * w) * std::exp(-nu * s) * (w / (rr * std::sinh(s)));
            };
            branch += quad::oscillatory_tail(fw, chord_distance_tilde(r1, r2, kSplit), kPi / lambda, 0.1 * tol, 4000);
        }
        out[l] -= sn * branch;
    }
    return out;
}

ConePoint checked(const ConePoint& p) {
    if (!(p.r > 0.0)) throw DomainError("cone point: radius must be positive");
    return p;
}

}  // namespace

const char* to_string(Representation r) {
    return r == Representation::bessel_series ? "bessel_series" : "cheeger_taylor";
}

SpectralMeasureSample spectral_measure_bessel(const AngularSpectrum& spectrum, double lambda, const ConePoint& x,
                                              const ConePoint& y, double tolerance) {
    if (!(lambda > 0.0)) throw DomainError("spectral_measure: lambda must be positive");
    checked(x), checked(y);
    const LevelData ld = level_data(spectrum, x, y);
    std::vector<double> j1, j2;
    const BesselSum bs = bessel_sum(spectrum, ld, spectrum.ladder_base(), lambda, x.r, y.r, tolerance, j1, j2);
    return {lambda, x, y, bs.value, Representation::bessel_series, bs.tail, bs.used};
}

std::vector<std::complex<double>> spectral_density(const AngularSpectrum& spectrum,
                                                   const std::vector<double>& lambdas, const ConePoint& x,
                                                   const ConePoint& y, bool parallel, double tolerance) {
    checked(x), checked(y);
    const LevelData ld = level_data(spectrum, x, y);
    const auto base = spectrum.ladder_base();
    std::vector<cd> out(lambdas.size());
    const int N = static_cast<int>(lambdas.size());
#pragma omp parallel if (parallel && N > 1)
    {
        std::vector<double> j1, j2;
#pragma omp for schedule(static)
        for (int i = 0; i < N; ++i)
            out[i] = bessel_sum(spectrum, ld, base, lambdas[i], x.r, y.r, tolerance, j1, j2).value;
    }
    return out;
}

std::vector<std::complex<double>> ct_level_integrals(const std::vector<double>& nus, double lambda, double r1,
                                                     double r2, double tolerance) {
    return ct_integrals([](double z) { return cd(specfun::bessel_j(0.0, z), 0.0); }, nus, lambda, r1, r2,
                        tolerance);
}

SpectralMeasureSample spectral_measure_ct(const AngularSpectrum& spectrum, double lambda, const ConePoint& x,
                                          const ConePoint& y, double tolerance) {
    if (!(lambda > 0.0)) throw DomainError("spectral_measure: lambda must be positive");
    checked(x), checked(y);
    const LevelData ld = level_data(spectrum, x, y);
    // Same level cutoff as the series form, so both branches share it.
    const int count = levels_below(spectrum, order_cutoff(lambda * std::max(x.r, y.r)));
    std::vector<double> nus(count);
    for (int l = 0; l < count; ++l) nus[l] = spectrum.levels[l].nu;
    const auto per_level = ct_level_integrals(nus, lambda, x.r, y.r, 1e-3 * tolerance);
    cd sum = 0.0;
    for (int l = 0; l < count; ++l) sum += ld.proj[l] * per_level[l];
    const double pref = lambda / kPi * radial_prefactor(spectrum.n, x.r, y.r);
    return {lambda, x, y, pref * sum, Representation::cheeger_taylor, 0.0, count};
}

std::complex<double> resolvent_kernel(const AngularSpectrum& spectrum, double lambda, int sign, const ConePoint& x,
                                      const ConePoint& y, double tolerance) {
    if (!(lambda > 0.0)) throw DomainError("resolvent: lambda must be positive");
    if (sign != 1 && sign != -1) throw DomainError("resolvent: sign must be +1 or -1");
    checked(x), checked(y);
    const double r_lo = std::min(x.r, y.r), r_hi = std::max(x.r, y.r);
    if (r_hi - r_lo < 1e-8 * r_hi) throw DomainError("resolvent: radii must differ");
    const double ratio = r_lo / r_hi;
    const LevelData ld = level_data(spectrum, x, y);
    // Per-level terms behave like (r_lo / r_hi)^nu / nu beyond the oscillatory range.
    const double k_max = order_cutoff(lambda * r_hi);
    const int L = static_cast<int>(spectrum.levels.size());
    int count = 0;
    for (; count < L; ++count) {
        const double nu = spectrum.levels[count].nu;
        if (nu > k_max && ld.sup[count] * std::pow(ratio, nu) / (kPi * nu * (1.0 - ratio)) < tolerance) break;
    }
    if (count == L) throw TailEstimateExceeded("resolvent: angular spectrum too short for the geometric tail");
    std::vector<double> nus(count);
    for (int l = 0; l < count; ++l) nus[l] = spectrum.levels[l].nu;
    auto g = [sign](double z) { return sign > 0 ? specfun::hankel0_plus(z) : specfun::hankel0_minus(z); };
    const auto per_level = ct_integrals(g, nus, lambda, x.r, y.r, 1e-3 * tolerance);
    cd sum = 0.0;
    for (int l = 0; l < count; ++l) sum += ld.proj[l] * per_level[l];
    return cd(0.0, 0.5 * sign) * radial_prefactor(spectrum.n, x.r, y.r) * sum;
}

LowFrequencyReport low_frequency_profile(const AngularSpectrum& spectrum, const std::vector<double>& lambdas,
                                         const ConePoint& x, const ConePoint& y) {
    if (lambdas.size() < 2) throw DomainError("low_frequency_profile: need at least two frequencies");
    LowFrequencyReport rep;
    rep.lambdas = lambdas;
    const auto dens = spectral_density(spectrum, lambdas, x, y, false);
    std::vector<double> X, Y;
    for (std::size_t i = 0; i < lambdas.size(); ++i) {
        const double lam = lambdas[i];
        rep.scaled.push_back(std::abs(dens[i]) / std::pow(lam, spectrum.n - 1));
        X.push_back(std::log(lam * lam * x.r * y.r));
        Y.push_back(std::log(rep.scaled.back()));
    }
    const double n = static_cast<double>(X.size());
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < X.size(); ++i) {
        sx += X[i], sy += Y[i], sxx += X[i] * X[i], sxy += X[i] * Y[i];
    }
    rep.fitted_exponent = (n * sxy - sx * sy) / (n * sxx - sx * sx);
    const double icpt = (sy - rep.fitted_exponent * sx) / n;
    for (std::size_t i = 0; i < X.size(); ++i)
        rep.residual = std::max(rep.residual, std::abs(Y[i] - icpt - rep.fitted_exponent * X[i]));
    rep.target_exponent = spectrum.nu0() - 0.5 * (spectrum.n - 2);
    return rep;
}

std::complex<double> oscillatory_w(double t, double v, int k) {
    const auto rule = bands::band_rule(k, std::abs(t) + std::abs(v));
    return 2.0 * kPi * rule.integrate([&](double lam) {
        return bands::phi_j(k, lam) * std::exp(cd(0.0, t * lam)) * specfun::bessel_j(0.0, lam * std::abs(v)) * lam;
    });
}

void write_samples_csv(std::ostream& out, const std::vector<SpectralMeasureSample>& samples) {
    out << "lambda,r1,r2,angular_distance,re,im,representation\n";
    out.precision(17);
    for (const auto& s : samples)
        out << s.lambda << ',' << s.x.r << ',' << s.y.r << ',' << angular_distance(s.x, s.y) << ','
            << s.value.real() << ',' << s.value.imag() << ',' << to_string(s.tag) << '\n';
}

}  // namespace conespec
