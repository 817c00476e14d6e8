#include "conespec/estimates.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include "conespec/bands.hpp"
#include "conespec/errors.hpp"
#include "conespec/quadrature.hpp"
#include "conespec/specfun.hpp"

namespace conespec {

namespace {

using cd = std::complex<double>;
constexpr double kInf = std::numeric_limits<double>::infinity();

struct LineFit {
    double slope = 0.0, intercept = 0.0, r2 = 0.0, residual = 0.0;
};

LineFit least_squares(const std::vector<double>& x, const std::vector<double>& y) {
    const double n = static_cast<double>(x.size());
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sx += x[i], sy += y[i], sxx += x[i] * x[i], sxy += x[i] * y[i];
    }
    LineFit f;
    f.slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
    f.intercept = (sy - f.slope * sx) / n;
    const double mean = sy / n;
    double ss_res = 0, ss_tot = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double e = y[i] - f.intercept - f.slope * x[i];
        ss_res += e * e;
        ss_tot += (y[i] - mean) * (y[i] - mean);
        f.residual = std::max(f.residual, std::abs(e));
    }
    f.r2 = ss_tot > 0 ? 1.0 - ss_res / ss_tot : 1.0;
    return f;
}

Eigen::VectorXd tangent_of(const Eigen::VectorXd& p) {
    const Eigen::Index last = p.size() - 1;
    Eigen::VectorXd t = Eigen::VectorXd::Unit(p.size(), std::abs(p(last)) < 0.9 ? last : 0);
    return (t - t.dot(p) * p).normalized();
}

struct GridPoint {
    ConePoint x, y;
    double weight;
};

std::vector<GridPoint> light_cone_points(const Microlocalizer& patches, std::size_t patch, double t,
                                         const DecayGrid& grid, double r_floor) {
    const Eigen::VectorXd xh = patches.center(patch).normalized();
    const Eigen::VectorXd e = tangent_of(xh);
    std::vector<GridPoint> pts;
    const double qx = patches.value(patch, xh);
    for (double th : grid.angles) {
        const Eigen::VectorXd yh = std::cos(th) * xh + std::sin(th) * e;
        const double wy = qx * patches.value(patch, yh);
        if (wy == 0.0) continue;
        for (double r1 : grid.r1)
            for (double d : grid.offsets) {
                double r2;
                if (t == 0.0) {
                    r2 = r1;
                } else {
                    const double rho = t + d, s = r1 * std::sin(th);
                    if (rho <= s) continue;
                    r2 = r1 * std::cos(th) + std::sqrt(rho * rho - s * s);
                }
                if (r2 < r_floor) continue;
                pts.push_back({cone_point(r1, xh), cone_point(r2, yh), wy});
            }
        if (t == 0.0) continue;
    }
    return pts;
}

std::vector<double> sup_over_grid(const AngularSpectrum& spectrum, int band, const Microlocalizer& patches,
                                  std::size_t patch, const std::vector<double>& ts, const DecayGrid& grid,
                                  double r_floor) {
    std::vector<double> sup(ts.size(), 0.0);
    for (std::size_t it = 0; it < ts.size(); ++it) {
        const auto pts = light_cone_points(patches, patch, ts[it], grid, r_floor);
        double best = 0.0;
        const int N = static_cast<int>(pts.size());
#pragma omp parallel for schedule(dynamic) reduction(max : best)
        for (int i = 0; i < N; ++i) {
            const cd k = halfwave_band_kernel(spectrum, band, ts[it], pts[i].x, pts[i].y, false);
            best = std::max(best, pts[i].weight * std::abs(k));
        }
        sup[it] = best;
    }
    return sup;
}

std::vector<double> midpoints_added(const std::vector<double>& v) {
    std::vector<double> out;
    for (std::size_t i = 0; i < v.size(); ++i) {
        out.push_back(v[i]);
        if (i + 1 < v.size()) out.push_back(0.5 * (v[i] + v[i + 1]));
    }
    return out;
}

double smooth_bump(double x, double lo, double hi) {
    const double u = (2.0 * x - lo - hi) / (hi - lo);
    return std::abs(u) < 1.0 ? std::exp(1.0 - 1.0 / (1.0 - u * u)) : 0.0;
}

}  // namespace

AlphaInfo alpha_and_palpha(double nu0, int n) {
    if (!(nu0 > 0.0)) throw DomainError("alpha_and_palpha: nu0 must be positive");
    const double alpha = nu0 - 0.5 * (n - 2);
    return {alpha, alpha >= 0.0 ? kInf : n / std::abs(alpha)};
}

AdmissiblePair classify_pair(int n, double inv_q, double inv_p, double s, double nu0) {
    if (n < 3) throw DomainError("admissible_set: n must be >= 3");
    constexpr double kEps = 1e-12;
    AdmissiblePair ap;
    ap.inv_q = inv_q;
    ap.inv_p = inv_p;
    ap.s = n * (0.5 - inv_p) - inv_q;
    const bool endpoint = n == 3 && std::abs(inv_q - 0.5) < kEps && inv_p < kEps;
    ap.admissible = 2.0 * inv_q <= (n - 1) * (0.5 - inv_p) + kEps && !endpoint;
    ap.in_lambda_s = ap.admissible && (std::isnan(s) || std::abs(ap.s - s) < kEps);
    const AlphaInfo a = alpha_and_palpha(nu0, n);
    const bool below = std::isinf(a.p_alpha) || inv_p > 1.0 / a.p_alpha + kEps;
    ap.in_lambda_s_alpha = ap.in_lambda_s && below;
    return ap;
}

AdmissibleSet admissible_set(int n, double s, double nu0, const std::vector<std::pair<double, double>>& lattice) {
    AdmissibleSet out;
    for (const auto& [iq, ip] : lattice) {
        const AdmissiblePair ap = classify_pair(n, iq, ip, s, nu0);
        if (ap.in_lambda_s && ap.s >= 0.0 && ap.s < 0.5 + nu0 - 1e-12 && !ap.in_lambda_s_alpha)
            out.collapse_consistent = false;
        out.pairs.push_back(ap);
    }
    return out;
}

std::vector<std::pair<double, double>> reciprocal_lattice(int m) {
    std::vector<std::pair<double, double>> out;
    const double den = 2.0 * (m - 1);
    for (int i = 0; i < m; ++i)
        for (int j = 0; j < m; ++j) out.push_back({i / den, j / den});
    return out;
}

DecayFitReport decay_fit(const AngularSpectrum& spectrum, int band, const Microlocalizer& patches, std::size_t patch,
                         const std::vector<double>& ts, const DecayGrid& grid, bool check_refinement,
                         double tolerance) {
    DecayFitReport rep;
    rep.band = band;
    rep.tolerance = tolerance;
    rep.target = -0.5 * (spectrum.n - 1);
    const double t_start = 4.0 / std::ldexp(1.0, band);
    for (double t : ts)
        if (t >= t_start) rep.ts.push_back(t);
    if (rep.ts.size() < 2 || rep.ts.back() / rep.ts.front() < 10.0)
        throw WindowTooShort("decay_fit: the asymptotic t-window must span at least one decade");
    const double r_floor = *std::min_element(grid.r1.begin(), grid.r1.end());

    rep.sup = sup_over_grid(spectrum, band, patches, patch, rep.ts, grid, r_floor);
    std::vector<double> lx, ly;
    for (std::size_t i = 0; i < rep.ts.size(); ++i) {
        lx.push_back(std::log(rep.ts[i]));
        ly.push_back(std::log(rep.sup[i]));
    }
    const LineFit fit = least_squares(lx, ly);
    rep.slope = fit.slope;
    rep.residual = fit.residual;

    const auto cal = sup_over_grid(spectrum, band, patches, patch, {0.0}, grid, r_floor);
    rep.calibration = cal.front() / std::pow(2.0, band * spectrum.n);

    if (check_refinement) {
        DecayGrid fine = grid;
        fine.angles = midpoints_added(grid.angles);
        fine.offsets = midpoints_added(grid.offsets);
        const auto sup_fine = sup_over_grid(spectrum, band, patches, patch, rep.ts, fine, r_floor);
        std::vector<double> fy;
        for (double v : sup_fine) fy.push_back(std::log(v));
        rep.refined_slope = least_squares(lx, fy).slope;
        rep.refinement_flag = std::abs(rep.refined_slope - rep.slope) >= 0.03;
    } else {
        rep.refined_slope = rep.slope;
    }
    rep.pass = std::abs(rep.slope - rep.target) <= tolerance && !rep.refinement_flag;
    return rep;
}

SmallRadiusReport small_radius_check(const AngularSpectrum& spectrum, int band, const std::vector<double>& radii,
                                     const std::vector<double>& ts, const std::vector<double>& angles) {
    if (radii.empty() || ts.empty()) throw DomainError("small_radius_check: empty grid");
    SmallRadiusReport rep;
    rep.band = band;
    rep.radii = radii;
    rep.ts = ts;
    const int n = spectrum.n;
    rep.weight_exponent = spectrum.nu0() - 0.5 * (n - 2);
    const double r_min = *std::min_element(radii.begin(), radii.end());
    const Eigen::VectorXd xh = Eigen::VectorXd::Unit(n, n - 1), e = Eigen::VectorXd::Unit(n, 0);
    struct Item {
        double r1, r2, t, th;
    };
    std::vector<Item> items;
    for (double r1 : radii)
        for (double r2 : radii)
            for (double t : ts)
                for (double th : angles) items.push_back({r1, r2, t, th});
    const double scale = std::ldexp(1.0, band);
    double ws = 0, wr = 0, us = 0, ur = 0;
    const int N = static_cast<int>(items.size());
#pragma omp parallel for schedule(dynamic) reduction(max : ws, wr, us, ur)
    for (int i = 0; i < N; ++i) {
        const Item& it = items[i];
        const Eigen::VectorXd yh = std::cos(it.th) * xh + std::sin(it.th) * e;
        const double k = std::abs(halfwave_band_kernel(spectrum, band, it.t, cone_point(it.r1, xh),
                                                       cone_point(it.r2, yh), false));
        const double w = k * std::pow(1.0 + scale * it.t, 0.5 * (n - 1)) /
                         std::pow(scale * scale * it.r1 * it.r2, rep.weight_exponent);
        if (std::max(it.r1, it.r2) <= 10.0 * r_min) {
            ws = std::max(ws, w);
            us = std::max(us, k);
        } else {
            wr = std::max(wr, w);
            ur = std::max(ur, k);
        }
    }
    rep.weighted_sup_small = ws;
    rep.weighted_sup_rest = wr;
    rep.unweighted_growth = ur > 0 ? us / ur : kInf;
    rep.bounded = std::isfinite(ws) && std::isfinite(wr) && ws <= 2.0 * wr;
    return rep;
}

std::vector<ConeFunction> band_limited_ensemble(std::shared_ptr<const RadialCalculus> calc, int members,
                                                std::uint64_t seed, double lo, double hi, int levels) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal;
    const auto& s = calc->spectrum();
    const auto& rho = calc->rho_grid();
    const int L = std::min<int>(levels, static_cast<int>(s.levels.size()));
    const int modes = s.mode_count();
    std::vector<ConeFunction> out;
    for (int m = 0; m < members; ++m) {
        Eigen::MatrixXcd sp = Eigen::MatrixXcd::Zero(rho.size(), modes);
        for (int l = 0; l < L; ++l)
            for (int k = s.level_first_mode[l], e = k + s.levels[l].multiplicity; k < e; ++k) {
                cd c[3];
                for (auto& v : c) v = cd(normal(rng), normal(rng));
                for (std::size_t a = 0; a < rho.size(); ++a) {
                    const double x = rho.nodes[a], u = (2.0 * x - lo - hi) / (hi - lo);
                    sp(a, k) = smooth_bump(x, lo, hi) * (c[0] + c[1] * u + c[2] * u * u);
                }
            }
        out.push_back(from_spectral(calc, sp));
    }
    return out;
}

double strichartz_ratio(const ConeFunction& u0, const ConeFunction& u1, double inv_q, double inv_p, double s,
                        double window, int time_nodes) {
    if (!(window > 0.0)) throw DomainError("strichartz_ratio: window must be positive");
    const int n = u0.calc->spectrum().n;
    const AdmissiblePair ap = classify_pair(n, inv_q, inv_p, s, u0.calc->spectrum().nu0());
    if (!ap.in_lambda_s_alpha) throw DomainError("strichartz_ratio: (q, p, s) is not admissible");
    const Eigen::MatrixXcd s0 = u0.spectral(), s1 = u1.spectral();
    const auto& rho = u0.calc->rho_grid();
    const double p = ap.p();
    auto norm_at = [&](double t) {
        Eigen::MatrixXcd su(s0.rows(), s0.cols());
        for (Eigen::Index a = 0; a < s0.rows(); ++a) {
            const double lam = rho.nodes[a];
            su.row(a) = std::cos(t * lam) * s0.row(a) + (std::sin(t * lam) / lam) * s1.row(a);
        }
        return from_spectral(u0.calc, su).lp_norm(p);
    };
    double num;
    if (inv_q == 0.0) {
        const int N = time_nodes > 0 ? time_nodes : static_cast<int>(std::ceil(8.0 * window)) + 1;
        num = 0.0;
        std::vector<double> vals(N);
#pragma omp parallel for schedule(static)
        for (int i = 0; i < N; ++i) vals[i] = norm_at(window * i / (N - 1));
        for (double v : vals) num = std::max(num, v);
    } else {
        const int panels = time_nodes > 0 ? std::max(1, time_nodes / 8) : static_cast<int>(std::ceil(window / 2.0));
        const auto rule = quad::composite(0.0, window, panels, 8);
        const int N = static_cast<int>(rule.size());
        std::vector<double> vals(N);
#pragma omp parallel for schedule(static)
        for (int i = 0; i < N; ++i) vals[i] = norm_at(rule.nodes[i]);
        double acc = 0.0;
        for (int i = 0; i < N; ++i) acc += rule.weights[i] * std::pow(vals[i], 1.0 / inv_q);
        num = std::pow(acc, inv_q);
    }
    const double den = sobolev_norm(u0, s) + sobolev_norm(u1, s - 1.0);
    if (!(den > 0.0)) throw DomainError("strichartz_ratio: zero data");
    return num / den;
}

StrichartzReport strichartz_run(const std::vector<std::pair<ConeFunction, ConeFunction>>& ensemble, double inv_q,
                                double inv_p, double s, double window) {
    StrichartzReport rep;
    rep.inv_q = inv_q;
    rep.inv_p = inv_p;
    rep.s = s;
    rep.window = window;
    for (const auto& [u0, u1] : ensemble) {
        const double r = strichartz_ratio(u0, u1, inv_q, inv_p, s, window);
        const double r2 = strichartz_ratio(u0, u1, inv_q, inv_p, s, 2.0 * window);
        rep.ratios.push_back(r);
        rep.ratios_doubled.push_back(r2);
        rep.max_ratio = std::max(rep.max_ratio, std::max(r, r2));
        if (r2 > 1.1 * r) rep.growth_flag = true;
    }
    return rep;
}

double counterexample_bump(double rho) { return smooth_bump(rho, 1.0, 2.0); }

CounterexampleReport counterexample_run(double nu0, int n, double q, double p, const std::vector<double>& eps) {
    const AlphaInfo a = alpha_and_palpha(nu0, n);
    if (a.alpha >= 0.0) throw DomainError("counterexample_run: needs nu0 < (n-2)/2");
    if (eps.size() < 2) throw DomainError("counterexample_run: need at least two eps values");
    for (std::size_t i = 1; i < eps.size(); ++i)
        if (!(eps[i] < eps[i - 1])) throw DomainError("counterexample_run: eps list must decrease");
    if (!(eps.front() < 1.0 && eps.back() > 0.0)) throw DomainError("counterexample_run: eps must lie in (0, 1)");

    CounterexampleReport rep;
    rep.nu0 = nu0;
    rep.alpha = a.alpha;
    rep.p = p;
    rep.q = q;
    rep.eps = eps;
    rep.predicted_exponent = a.alpha + n / p;
    if (std::abs(rep.predicted_exponent) < 1e-12) rep.regime = "log";
    else rep.regime = rep.predicted_exponent < 0.0 ? "power" : "bounded";

    const auto rho_rule = quad::gauss_legendre(64, 1.0, 2.0);
    std::vector<double> omega(rho_rule.size());
    for (std::size_t m = 0; m < rho_rule.size(); ++m)
        omega[m] = rho_rule.weights[m] * counterexample_bump(rho_rule.nodes[m]) * rho_rule.nodes[m];
    const auto t_rule = quad::gauss_legendre(24, 0.0, 0.25);

    for (double e : eps) {
        // log-spaced radial rule on [e, 1]
        const double u0 = std::log(e);
        const int panels = std::max(2, static_cast<int>(std::ceil(-u0 / 0.5)));
        const auto u_rule = quad::composite(u0, 0.0, panels, 8);
        const int R = static_cast<int>(u_rule.size());
        std::vector<double> inner(t_rule.size(), 0.0);
        for (int i = 0; i < R; ++i) {
            const double r = std::exp(u_rule.nodes[i]);
            const double w = u_rule.weights[i] * std::pow(r, n);  // dr = r du, measure r^{n-1} dr
            std::vector<double> j(rho_rule.size());
            for (std::size_t m = 0; m < rho_rule.size(); ++m) j[m] = specfun::bessel_j(nu0, r * rho_rule.nodes[m]);
            const double pref = std::pow(r, -0.5 * (n - 2));
            for (std::size_t it = 0; it < t_rule.size(); ++it) {
                cd z = 0.0;
                for (std::size_t m = 0; m < rho_rule.size(); ++m)
                    z += omega[m] * j[m] * std::exp(cd(0.0, t_rule.nodes[it] * rho_rule.nodes[m]));
                inner[it] += w * std::pow(std::abs(pref * z), p);
            }
        }
        double acc = 0.0;
        for (std::size_t it = 0; it < t_rule.size(); ++it) acc += t_rule.weights[it] * std::pow(inner[it], q / p);
        rep.norms.push_back(std::pow(acc, 1.0 / q));
    }

    std::vector<double> lx, ly, la, lp;
    for (std::size_t i = 0; i < eps.size(); ++i) {
        lx.push_back(std::log(eps[i]));
        ly.push_back(std::log(rep.norms[i]));
        la.push_back(std::abs(std::log(eps[i])));
        lp.push_back(std::pow(rep.norms[i], p));
    }
    rep.fitted_exponent = least_squares(lx, ly).slope;
    const LineFit lf = least_squares(la, lp);
    rep.log_law_r2 = lf.r2;
    rep.log_law_slope = lf.slope;
    rep.growth_factor = rep.norms.back() / rep.norms.front();
    return rep;
}

}  // namespace conespec
