#include "cli.hpp"

#include <omp.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <numbers>
#include <sstream>

#include "CLI11.hpp"
#include "conespec/errors.hpp"
#include "conespec/estimates.hpp"
#include "conespec/geometry.hpp"
#include "conespec/spectral_measure.hpp"

namespace conespec::cli {

using nlohmann::json;
using cd = std::complex<double>;
constexpr double kPi = std::numbers::pi;

json default_config() {
    return json::parse(R"({
      "cone": {
        "n": 3,
        "cross_section": {"kind": "round_sphere", "dim": 2, "radius": 1.0, "a": 0.0,
                          "max_degree": 24, "a0": 0.0, "a1": 0.0, "a2": 0.0,
                          "rotation": 0.0, "gradient": 0.0}
      },
      "geometry": {"kind": "cross_section", "radius": 1.0, "dim": 2, "r1": 0.5, "r2": 1.0,
                   "a": 1.0, "c": 1.0, "horizon_epsilon": 0.05, "directions": 720,
                   "x": [0.0, 0.0, 1.0], "y": [0.8414709848078965, 0.0, 0.5403023058681398],
                   "nrec_horizon": 5.141592653589793},
      "eig": {"count": 400},
      "crosscheck": {"lambdas": [0.5, 1.0, 1.5, 2.0, 2.5], "x_radii": [0.8, 1.0, 1.3],
                     "y_radius": 1.1, "y_angles": [0.0, 0.7, 1.4]},
      "decay": {"band": 0, "t_min": 4.0, "t_max": 64.0, "t_count": 9, "patch_diameter": 1.0,
                "patch": 0, "light_cone": true, "small_radius": "auto", "r_small_min": 0.001, "r_small_count": 13,
                "t_small": [0.5, 1.0, 2.0, 4.0]},
      "strichartz": {"pairs": [{"inv_q": 0.0, "inv_p": 0.5}, {"inv_q": 0.25, "inv_p": 0.25}],
                     "window": 64.0, "members": 10, "seed": 1, "band_lo": 0.5, "band_hi": 3.0,
                     "levels": 3, "zero_velocity": false},
      "counterexample": {"q": 4.0, "p": [24.0, 12.0, 6.0], "eps": [0.1, 0.03, 0.01, 0.003, 0.001]},
      "tolerances": {"spectral_tail": 1e-10, "crosscheck_rel": 1e-3, "closed_form_rel": 1e-4,
                     "stone_rel": 1e-3, "decay_slope": 0.15, "geodesic": 1e-10}
    })");
}

namespace {

void require(bool ok, const std::string& msg) {
    if (!ok) throw std::invalid_argument(msg);
}

template <class T>
T get(const json& j, const char* key) {
    require(j.contains(key), std::string("missing key: ") + key);
    return j.at(key).get<T>();
}

CrossSectionSpec cross_section_of(const json& cfg) {
    const json& cs = cfg.at("cone").at("cross_section");
    const auto kind = get<std::string>(cs, "kind");
    if (kind == "round_sphere") return RoundSphere{get<int>(cs, "dim"), get<double>(cs, "radius"), get<double>(cs, "a")};
    if (kind == "galerkin_sphere2") {
        GalerkinSphere2 g;
        g.max_degree = get<int>(cs, "max_degree");
        g.potential = {get<double>(cs, "a0"), get<double>(cs, "a1"), get<double>(cs, "a2"),
                       get<double>(cs, "rotation"), get<double>(cs, "gradient")};
        return g;
    }
    throw std::invalid_argument("unknown cross_section kind: " + kind);
}

GeometrySpec geometry_spec_of(const json& cfg) {
    const json& g = cfg.at("geometry");
    const auto kind = get<std::string>(g, "kind");
    if (kind == "cross_section") return geometry_of(cross_section_of(cfg));
    if (kind == "sphere") return SphereGeometry{get<int>(g, "dim"), get<double>(g, "radius")};
    if (kind == "torus") return FlatTorus{get<double>(g, "r1"), get<double>(g, "r2")};
    if (kind == "spheroid") return Spheroid{get<double>(g, "a"), get<double>(g, "c")};
    throw std::invalid_argument("unknown geometry kind: " + kind);
}

AngularSpectrum spectrum_of(const json& cfg, int count) {
    return eigensolve(cross_section_of(cfg), cfg.at("cone").at("n").get<int>(), count);
}

// Mode count covering every level with nu up to nu_max on the configured
// cross-section (round spheres only need whole shells).
int modes_for_order(const json& cfg, double nu_max) {
    const auto spec = cross_section_of(cfg);
    if (const auto* rs = std::get_if<RoundSphere>(&spec)) {
        int modes = 0;
        const int n = cfg.at("cone").at("n").get<int>();
        for (int l = 0;; ++l) {
            const double mu = l * (l + rs->dim - 1.0) / (rs->radius * rs->radius) + rs->a;
            if (std::sqrt(std::max(0.0, mu + 0.25 * (n - 2) * (n - 2))) > nu_max + 1.0) break;
            modes += sphere_harmonic_multiplicity(rs->dim, l);
        }
        return std::max(modes, 1);
    }
    const int L = std::get<GalerkinSphere2>(spec).max_degree;
    return std::min(sh_count(L), static_cast<int>(std::pow(nu_max + 2.0, 2)));
}

ConePoint point_at(double r, double angle) { return cone_point(r, Eigen::VectorXd(sphere_point(angle, 0.0))); }

double rel_err(cd a, cd b, double floor) { return std::abs(a - b) / std::max(std::abs(b), floor); }

std::vector<double> to_vec(const json& j) { return j.get<std::vector<double>>(); }

void require_open(const std::ofstream& f, const std::filesystem::path& path) {
    if (!f) throw std::filesystem::filesystem_error("cannot write", path, std::make_error_code(std::errc::io_error));
}

struct Output {
    std::filesystem::path dir;
    std::string hash;
    json tolerances;
    json config;

    void write_json(const std::string& name, json body) const {
        body["config_hash"] = hash;
        body["tolerances"] = tolerances;
        body["config"] = config;
        std::ofstream f(dir / name);
        require_open(f, dir / name);
        f << std::setw(2) << body << '\n';
    }
    std::ofstream open_csv(const std::string& name) const {
        std::ofstream f(dir / name);
        require_open(f, dir / name);
        f << "# config_hash=" << hash << '\n' << "# tolerances=" << tolerances.dump() << '\n';
        f.precision(17);
        return f;
    }
};

int cmd_eig(const json& cfg, const Output& out) {
    const AngularSpectrum s = spectrum_of(cfg, cfg.at("eig").at("count").get<int>());
    const AlphaInfo a = alpha_and_palpha(s.nu0(), s.n);
    const WeylReport w = verify_weyl(s);
    json levels = json::array();
    auto csv = out.open_csv("eig.csv");
    csv << "level,mu,nu,multiplicity\n";
    for (std::size_t l = 0; l < s.levels.size(); ++l) {
        const auto& lv = s.levels[l];
        levels.push_back({{"mu", lv.mu}, {"nu", lv.nu}, {"multiplicity", lv.multiplicity}});
        csv << l << ',' << lv.mu << ',' << lv.nu << ',' << lv.multiplicity << '\n';
    }
    json body = {{"n", s.n},
                 {"modes", s.mode_count()},
                 {"nu0", s.nu0()},
                 {"alpha", a.alpha},
                 {"p_alpha", std::isinf(a.p_alpha) ? json("inf") : json(a.p_alpha)},
                 {"weyl", {{"sufficient", w.sufficient}, {"min_ratio", w.min_ratio}, {"max_ratio", w.max_ratio},
                           {"k_lo", w.k_lo}, {"k_hi", w.k_hi}}},
                 {"levels", levels}};
    if (s.psi.size() > 0) {
        const auto eb = verify_eigenfunction_bound(s);
        body["eigenfunction_bound"] = {{"min_ratio", eb.min_ratio}, {"max_ratio", eb.max_ratio}};
    }
    out.write_json("eig.json", body);
    std::cout << "nu0 = " << s.nu0() << ", alpha = " << a.alpha << ", modes = " << s.mode_count() << '\n';
    return kPass;
}

json record_json(const GeodesicRecord& r) {
    return {{"length", r.length}, {"conjugate_flag", r.conjugate_flag}, {"degenerate", r.degenerate},
            {"covector", std::vector<double>(r.covector.data(), r.covector.data() + r.covector.size())}};
}

int cmd_geometry(const json& cfg, const Output& out) {
    const json& g = cfg.at("geometry");
    const GeometrySpec spec = geometry_spec_of(cfg);
    ShootingOptions opts;
    opts.directions = get<int>(g, "directions");
    opts.tolerance = cfg.at("tolerances").at("geodesic").get<double>();
    const double horizon = kPi + get<double>(g, "horizon_epsilon");
    const auto xv = to_vec(g.at("x")), yv = to_vec(g.at("y"));
    Eigen::VectorXd x = Eigen::Map<const Eigen::VectorXd>(xv.data(), xv.size());
    Eigen::VectorXd y = Eigen::Map<const Eigen::VectorXd>(yv.data(), yv.size());
    if (const auto* sg = std::get_if<SphereGeometry>(&spec); sg && x.size() != sg->dim + 1) {
        x = Eigen::VectorXd::Zero(sg->dim + 1), y = x;
        x[sg->dim] = 1.0;
        y[sg->dim] = std::cos(1.0), y[0] = std::sin(1.0);
    }
    if (std::holds_alternative<FlatTorus>(spec) && x.size() != 2) x = Eigen::Vector2d(0, 0), y = Eigen::Vector2d(1, 0);

    const auto records = distance_spectrum(spec, x, y, horizon, opts);
    const LengthSpectrum ls = length_spectrum(spec, horizon, opts);
    json body;
    body["distance_spectrum"] = json::array();
    auto csv = out.open_csv("geometry.csv");
    csv << "length,conjugate_flag,degenerate\n";
    for (const auto& r : records) {
        body["distance_spectrum"].push_back(record_json(r));
        csv << r.length << ',' << r.conjugate_flag << ',' << r.degenerate << '\n';
    }
    body["length_spectrum"] = {{"lengths", ls.lengths}, {"coverage_confidence", ls.coverage_confidence},
                               {"analytic", ls.analytic}};
    try {
        const NrecResult nr = check_nrec(spec, get<double>(g, "nrec_horizon"), opts);
        body["nrec"] = {{"holds", nr.holds}, {"delta0", nr.delta0}};
    } catch (const Inconclusive& e) {
        body["nrec"] = {{"inconclusive", e.what()}};
    }
    Eigen::VectorXd cov = Eigen::VectorXd::Zero(x.size());
    if (x.size() >= 2) cov[0] = 1.0;
    if (x.size() == 3 && std::abs(x[0]) > 0.9) cov = Eigen::Vector3d(0, 1, 0);
    const double cr = conjugate_radius(spec, x, cov, horizon);
    body["conjugate_radius"] = std::isinf(cr) ? json("inf") : json(cr);
    const CurvatureBounds cb = curvature_bounds(spec);
    body["curvature"] = {{"k_min", cb.k_min}, {"k_max", cb.k_max}, {"simply_connected", cb.simply_connected}};
    body["nfc_sufficient"] = check_nfc_sufficient(cb.k_min, cb.k_max, cb.simply_connected);
    out.write_json("geometry.json", body);
    std::cout << "NREC: " << body["nrec"].dump() << ", NFC sufficient: " << body["nfc_sufficient"] << '\n';
    return kPass;
}

int cmd_crosscheck(const json& cfg, const Output& out) {
    const json& c = cfg.at("crosscheck");
    const json& tol = cfg.at("tolerances");
    const double tail = tol.at("spectral_tail").get<double>();
    const auto lambdas = to_vec(c.at("lambdas"));
    const auto xr = to_vec(c.at("x_radii")), ya = to_vec(c.at("y_angles"));
    const double yr = c.at("y_radius").get<double>();
    double lmax = *std::max_element(lambdas.begin(), lambdas.end());
    double rmax = std::max(yr, *std::max_element(xr.begin(), xr.end()));
    // The resolvent series converges like (r</r>)^nu; size the spectrum for the closest radii.
    double ratio = 0.0;
    for (double r1 : xr) ratio = std::max(ratio, std::min(r1, yr) / std::max(r1, yr));
    require(ratio < 1.0, "crosscheck: x radii must differ from y_radius");
    const double nu_res = 1.5 * std::log(tail) / std::log(ratio) + 40.0;
    const AngularSpectrum s = spectrum_of(cfg, modes_for_order(cfg, std::max(order_cutoff(lmax * rmax), nu_res)));

    std::vector<SpectralMeasureSample> samples;
    double gap = 0.0;
    for (double lam : lambdas)
        for (double r1 : xr)
            for (double th : ya) {
                const auto a = spectral_measure_bessel(s, lam, point_at(r1, 0.0), point_at(yr, th), tail);
                const auto b = spectral_measure_ct(s, lam, point_at(r1, 0.0), point_at(yr, th), tail);
                gap = std::max(gap, rel_err(b.value, a.value, 1e-12));
                samples.push_back(a);
                samples.push_back(b);
            }
    double stone = 0.0;
    for (double lam : lambdas) {
        const ConePoint x = point_at(xr.front(), 0.0), y = point_at(yr, ya.back());
        const cd rp = resolvent_kernel(s, lam, +1, x, y, tail), rm = resolvent_kernel(s, lam, -1, x, y, tail);
        const cd st = lam / (kPi * cd(0, 1)) * (rp - rm);
        stone = std::max(stone, rel_err(st, spectral_measure_ct(s, lam, x, y, tail).value, 1e-12));
    }
    json body = {{"dual_representation_max_rel_gap", gap},
                 {"dual_representation_pass", gap <= tol.at("crosscheck_rel").get<double>()},
                 {"stone_max_rel_gap", stone},
                 {"stone_pass", stone <= tol.at("stone_rel").get<double>()}};
    const auto base = s.ladder_base();
    if (s.n == 3 && base && std::abs(*base - 0.5) < 1e-14) {
        double em = 0.0, er = 0.0;
        for (double lam : lambdas)
            for (double r1 : xr) {
                const ConePoint x = point_at(r1, 0.0), y = point_at(yr, ya.back());
                const double R = (euclidean(x) - euclidean(y)).norm();
                const double dm = lam * std::sin(lam * R) / (2 * kPi * kPi * R);
                em = std::max(em, rel_err(spectral_measure_bessel(s, lam, x, y, tail).value, dm, 1e-12));
                const cd dr = std::exp(cd(0, lam * R)) / (4 * kPi * R);
                er = std::max(er, rel_err(resolvent_kernel(s, lam, +1, x, y, tail), dr, 1e-12));
            }
        const double ct = tol.at("closed_form_rel").get<double>();
        body["free_closed_form"] = {{"spectral_measure_max_rel", em}, {"resolvent_max_rel", er},
                                    {"pass", em <= ct && er <= ct}};
    }
    auto csv = out.open_csv("crosscheck.csv");
    write_samples_csv(csv, samples);
    out.write_json("crosscheck.json", body);
    std::cout << "dual-representation gap " << gap << ", Stone gap " << stone << '\n';
    return kPass;
}

int cmd_decay(const json& cfg, const Output& out) {
    const json& d = cfg.at("decay");
    const int band = d.at("band").get<int>();
    const int count = d.at("t_count").get<int>();
    const double t0 = d.at("t_min").get<double>(), t1 = d.at("t_max").get<double>();
    require(count >= 2 && t0 > 0 && t1 > t0, "decay: need t_count >= 2 and 0 < t_min < t_max");
    std::vector<double> ts;
    for (int i = 0; i < count; ++i) ts.push_back(t0 * std::pow(t1 / t0, static_cast<double>(i) / (count - 1)));
    DecayGrid grid;
    const double reach = std::ldexp(2.0, band) * (t1 + 8.0);
    const AngularSpectrum s = spectrum_of(cfg, modes_for_order(cfg, order_cutoff(reach)));
    const auto patches = build_microlocalizers(geometry_of(cross_section_of(cfg)), d.at("patch_diameter").get<double>());
    json body = {{"band", band}};
    auto csv = out.open_csv("decay.csv");
    csv << "t,sup_abs_kernel\n";
    if (d.at("light_cone").get<bool>()) {
        const DecayFitReport r = decay_fit(s, band, patches, d.at("patch").get<std::size_t>(), ts, grid, true,
                                           cfg.at("tolerances").at("decay_slope").get<double>());
        body.update({{"t", r.ts}, {"sup", r.sup}, {"slope", r.slope}, {"target", r.target},
                     {"residual", r.residual}, {"calibration", r.calibration}, {"refined_slope", r.refined_slope},
                     {"refinement_flag", r.refinement_flag}, {"pass", r.pass}});
        for (std::size_t i = 0; i < r.ts.size(); ++i) csv << r.ts[i] << ',' << r.sup[i] << '\n';
        std::cout << "slope " << r.slope << " (target " << r.target << "), pass " << r.pass << '\n';
    }

    const auto mode = d.at("small_radius").get<std::string>();
    const bool small = mode == "on" || (mode == "auto" && s.nu0() < 0.5 * (s.n - 2));
    if (small) {
        std::vector<double> radii;
        const int m = d.at("r_small_count").get<int>();
        const double lo = std::log10(d.at("r_small_min").get<double>());
        for (int i = 0; i < m; ++i) radii.push_back(std::pow(10.0, lo * (1.0 - static_cast<double>(i) / (m - 1))));
        const auto sr = small_radius_check(s, band, radii, to_vec(d.at("t_small")));
        body["small_radius"] = {{"weight_exponent", sr.weight_exponent},
                                {"weighted_sup_small", sr.weighted_sup_small},
                                {"weighted_sup_rest", sr.weighted_sup_rest},
                                {"unweighted_growth", sr.unweighted_growth},
                                {"bounded", sr.bounded}};
        std::cout << "small-radius weighted sup bounded: " << sr.bounded << '\n';
    }
    out.write_json("decay.json", body);
    return kPass;
}

int cmd_strichartz(const json& cfg, const Output& out) {
    const json& st = cfg.at("strichartz");
    const double window = st.at("window").get<double>();
    const double hi = st.at("band_hi").get<double>(), lo = st.at("band_lo").get<double>();
    require(0 < lo && lo < hi, "strichartz: need 0 < band_lo < band_hi");
    const int levels = st.at("levels").get<int>();
    auto s = std::make_shared<AngularSpectrum>(spectrum_of(cfg, levels * levels));
    // The grid must hold the solution over the doubled window.
    const double r_max = 2.0 * window + 30.0;
    auto [r_grid, rho_grid] = make_transform_grids(s->n, r_max, hi + 0.5);
    auto calc = std::make_shared<RadialCalculus>(s, std::move(r_grid), std::move(rho_grid));
    const int members = st.at("members").get<int>();
    const auto seed = st.at("seed").get<std::uint64_t>();
    auto e0 = band_limited_ensemble(calc, members, seed, lo, hi, levels);
    auto e1 = band_limited_ensemble(calc, members, seed + 1, lo, hi, levels);
    std::vector<std::pair<ConeFunction, ConeFunction>> ensemble;
    for (int i = 0; i < members; ++i) {
        if (st.at("zero_velocity").get<bool>()) e1[i].values.setZero();
        ensemble.push_back({e0[i], e1[i]});
    }
    json body;
    body["pairs"] = json::array();
    auto csv = out.open_csv("strichartz.csv");
    csv << "inv_q,inv_p,s,member,ratio_T,ratio_2T\n";
    for (const auto& pr : st.at("pairs")) {
        const double iq = get<double>(pr, "inv_q"), ip = get<double>(pr, "inv_p");
        const double sv = pr.contains("s") ? pr.at("s").get<double>() : s->n * (0.5 - ip) - iq;
        const auto rep = strichartz_run(ensemble, iq, ip, sv, window);
        body["pairs"].push_back({{"inv_q", iq}, {"inv_p", ip}, {"s", sv}, {"window", window},
                                 {"ratios", rep.ratios}, {"ratios_doubled", rep.ratios_doubled},
                                 {"max_ratio", rep.max_ratio}, {"growth_flag", rep.growth_flag}});
        for (std::size_t m = 0; m < rep.ratios.size(); ++m)
            csv << iq << ',' << ip << ',' << sv << ',' << m << ',' << rep.ratios[m] << ',' << rep.ratios_doubled[m]
                << '\n';
        std::cout << "(1/q, 1/p) = (" << iq << ", " << ip << "): max ratio " << rep.max_ratio << '\n';
    }
    body["note"] = "norms are over the truncated window [0, T] and its doubling [0, 2T]";
    out.write_json("strichartz.json", body);
    return kPass;
}

int cmd_counterexample(const json& cfg, const Output& out) {
    const json& c = cfg.at("counterexample");
    double nu0;
    int n = cfg.at("cone").at("n").get<int>();
    if (c.contains("nu0")) nu0 = c.at("nu0").get<double>();
    else nu0 = spectrum_of(cfg, 1).nu0();
    const auto eps = to_vec(c.at("eps"));
    json body;
    body["runs"] = json::array();
    auto csv = out.open_csv("counterexample.csv");
    csv << "p,eps,norm\n";
    for (double p : to_vec(c.at("p"))) {
        const auto r = counterexample_run(nu0, n, c.at("q").get<double>(), p, eps);
        body["runs"].push_back({{"nu0", r.nu0}, {"alpha", r.alpha}, {"q", r.q}, {"p", r.p}, {"eps", r.eps},
                                {"norms", r.norms}, {"regime", r.regime},
                                {"predicted_exponent", r.predicted_exponent},
                                {"fitted_exponent", r.fitted_exponent}, {"log_law_r2", r.log_law_r2},
                                {"log_law_slope", r.log_law_slope}, {"growth_factor", r.growth_factor}});
        for (std::size_t i = 0; i < eps.size(); ++i) csv << p << ',' << eps[i] << ',' << r.norms[i] << '\n';
        std::cout << "p = " << p << " (" << r.regime << "): growth " << r.growth_factor << '\n';
    }
    out.write_json("counterexample.json", body);
    return kPass;
}

void check_positive_tolerances(const json& tol) {
    for (const auto& [k, v] : tol.items())
        require(v.is_number() && v.get<double>() > 0.0, "tolerance " + k + " must be a positive number");
}

}  // namespace

json materialize(const json& user, const std::vector<std::string>& tol_overrides) {
    require(user.is_object(), "config must be a JSON object");
    json cfg = default_config();
    for (const auto& [k, v] : user.items())
        require(cfg.contains(k), "unknown config section: " + k);
    cfg.merge_patch(user);
    for (const auto& kv : tol_overrides) {
        const auto eq = kv.find('=');
        require(eq != std::string::npos, "--tol-override expects KEY=VAL, got " + kv);
        const std::string key = kv.substr(0, eq);
        require(cfg["tolerances"].contains(key), "unknown tolerance: " + key);
        std::size_t used = 0;
        double val = 0.0;
        try {
            val = std::stod(kv.substr(eq + 1), &used);
        } catch (const std::exception&) {
            used = 0;
        }
        require(used > 0 && used == kv.size() - eq - 1, "bad tolerance value in " + kv);
        cfg["tolerances"][key] = val;
    }
    check_positive_tolerances(cfg.at("tolerances"));
    require(cfg.at("cone").at("n").is_number_integer(), "cone.n must be an integer");
    cross_section_of(cfg);
    geometry_spec_of(cfg);
    return cfg;
}

std::uint64_t config_hash(const json& config) {
    std::uint64_t h = 1469598103934665603ull;
    for (unsigned char ch : config.dump()) {
        h ^= ch;
        h *= 1099511628211ull;
    }
    return h;
}

std::string hash_hex(std::uint64_t h) {
    std::ostringstream s;
    s << std::hex << std::setw(16) << std::setfill('0') << h;
    return s.str();
}

int run(int argc, char** argv) {
    CLI::App app{"Spectral experiments on product cones"};
    std::string verb, config_path, out_dir = "out";
    int threads = 0;
    std::vector<std::string> overrides;
    app.add_option("verb", verb, "eig | geometry | crosscheck | decay | strichartz | counterexample")
        ->required()
        ->check(CLI::IsMember({"eig", "geometry", "crosscheck", "decay", "strichartz", "counterexample"}));
    app.add_option("--config", config_path, "JSON config file")->required();
    app.add_option("--out", out_dir, "output directory");
    app.add_option("--threads", threads, "OpenMP threads (0 keeps the runtime default)")->check(CLI::NonNegativeNumber);
    app.add_option("--tol-override", overrides, "KEY=VAL tolerance override (repeatable)");
    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? kPass : kUsage;
    }

    json cfg;
    try {
        std::ifstream f(config_path);
        require(f.good(), "cannot read config " + config_path);
        cfg = materialize(json::parse(f), overrides);
    } catch (const std::exception& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return kUsage;
    }
    if (threads > 0) omp_set_num_threads(threads);

    Output out{out_dir, hash_hex(config_hash(cfg)), cfg.at("tolerances"), cfg};
    try {
        std::filesystem::create_directories(out.dir);
        if (verb == "eig") return cmd_eig(cfg, out);
        if (verb == "geometry") return cmd_geometry(cfg, out);
        if (verb == "crosscheck") return cmd_crosscheck(cfg, out);
        if (verb == "decay") return cmd_decay(cfg, out);
        if (verb == "strichartz") return cmd_strichartz(cfg, out);
        return cmd_counterexample(cfg, out);
    } catch (const PositivityViolation& e) {
        std::cerr << "PositivityViolation: mu0 = " << e.mu0() << '\n';
        return kPrecondition;
    } catch (const MathPreconditionError& e) {
        std::cerr << "precondition violated: " << e.what() << '\n';
        return kPrecondition;
    } catch (const NumericalBudgetError& e) {
        std::cerr << "numerical budget exceeded: " << e.what() << '\n';
        return kBudget;
    } catch (const json::exception& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return kUsage;
    } catch (const std::filesystem::filesystem_error& e) {
        std::cerr << "output error: " << e.what() << '\n';
        return kUsage;
    } catch (const std::invalid_argument& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return kUsage;
    }
}

}  // namespace conespec::cli
