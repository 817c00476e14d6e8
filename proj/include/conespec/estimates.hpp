#pragma once

#include <cstdint>
#include <limits>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "conespec/cone.hpp"
#include "conespec/cross_section.hpp"
#include "conespec/geometry.hpp"
#include "conespec/propagator.hpp"

namespace conespec {

struct AlphaInfo {
    double alpha;
    double p_alpha;  // +inf when alpha >= 0
};

AlphaInfo alpha_and_palpha(double nu0, int n);

// Exponents are carried as reciprocals so that q = inf or p = inf is 0.
struct AdmissiblePair {
    double inv_q = 0.0, inv_p = 0.0;
    double s = 0.0;  // scaling exponent n(1/2 - 1/p) - 1/q
    bool admissible = false;
    bool in_lambda_s = false;
    bool in_lambda_s_alpha = false;

    double q() const { return inv_q == 0.0 ? std::numeric_limits<double>::infinity() : 1.0 / inv_q; }
    double p() const { return inv_p == 0.0 ? std::numeric_limits<double>::infinity() : 1.0 / inv_p; }
};

AdmissiblePair classify_pair(int n, double inv_q, double inv_p, double s, double nu0);

struct AdmissibleSet {
    std::vector<AdmissiblePair> pairs;
    // For s in [0, 1/2 + nu0) membership in both sets coincides on the lattice.
    bool collapse_consistent = true;
};

// Pass s = NaN to classify each pair against its own scaling exponent.
AdmissibleSet admissible_set(int n, double s, double nu0, const std::vector<std::pair<double, double>>& lattice);
// (1/q, 1/p) = (i, j) / (2 (m - 1)) for i, j = 0 .. m-1.
std::vector<std::pair<double, double>> reciprocal_lattice(int m = 50);

struct DecayGrid {
    std::vector<double> r1 = {2, 3, 4, 5, 6};
    std::vector<double> angles = {0.0, 0.15, 0.3};        // geodesic offsets of y from x within the patch
    std::vector<double> offsets = {-1.5, -1.0, -0.5, 0.0, 0.5, 1.0, 1.5};  // |x - y| - t
};

struct DecayFitReport {
    int band = 0;
    std::vector<double> ts, sup;
    double slope = 0.0, target = 0.0, residual = 0.0, tolerance = 0.15;
    double calibration = 0.0;  // sup |K| at t = 0 divided by 2^{kn}
    double refined_slope = 0.0;
    bool refinement_flag = false;
    bool pass = false;
};

// Light-cone-following grid: y radius solves |x - y| = t + offset for each
// angular offset.
DecayFitReport decay_fit(const AngularSpectrum& spectrum, int band, const Microlocalizer& patches, std::size_t patch,
                         const std::vector<double>& ts, const DecayGrid& grid = {}, bool check_refinement = true,
                         double tolerance = 0.15);

struct SmallRadiusReport {
    int band = 0;
    std::vector<double> radii, ts;
    double weight_exponent = 0.0;     // nu0 - (n-2)/2
    double weighted_sup_small = 0.0;  // over the smallest-radius decade
    double weighted_sup_rest = 0.0;
    double unweighted_growth = 0.0;   // unweighted sup, smallest decade / rest
    bool bounded = false;
};

// sup |K| (1 + 2^k t)^{(n-1)/2} / (2^{2k} r1 r2)^{nu0 - (n-2)/2} over radii in (0, 1].
SmallRadiusReport small_radius_check(const AngularSpectrum& spectrum, int band, const std::vector<double>& radii,
                                     const std::vector<double>& ts, const std::vector<double>& angles = {0.0, 0.3});

// Random band-limited data: smooth Hankel-space profiles supported in
// [lo, hi] on the first `levels` angular levels.
std::vector<ConeFunction> band_limited_ensemble(std::shared_ptr<const RadialCalculus> calc, int members,
                                                std::uint64_t seed, double lo, double hi, int levels);

struct StrichartzReport {
    double inv_q = 0.0, inv_p = 0.0, s = 0.0, window = 0.0;
    std::vector<double> ratios;          // per ensemble member, window T
    std::vector<double> ratios_doubled;  // window 2T
    double max_ratio = 0.0;
    bool growth_flag = false;  // doubling the window raised some ratio by more than 10%
};

// ||u||_{L^q([0,T]; L^p)} / (||u0||_{H^s} + ||u1||_{H^{s-1}}).
double strichartz_ratio(const ConeFunction& u0, const ConeFunction& u1, double inv_q, double inv_p, double s,
                        double window, int time_nodes = 0);

StrichartzReport strichartz_run(const std::vector<std::pair<ConeFunction, ConeFunction>>& ensemble, double inv_q,
                                double inv_p, double s, double window = 64.0);

struct CounterexampleReport {
    double nu0 = 0.0, alpha = 0.0, p = 0.0, q = 0.0;
    std::vector<double> eps, norms;
    std::string regime;                // "power", "log" or "bounded"
    double predicted_exponent = 0.0;   // alpha + n/p
    double fitted_exponent = 0.0;      // slope of log norm against log eps
    double log_law_r2 = 0.0;           // R^2 of norm^p against |log eps|
    double log_law_slope = 0.0;
    double growth_factor = 0.0;        // norm(last eps) / norm(first eps)
};

// Truncated norm ||Z||_{L^q([0,1/4]; L^p_{r^{n-1}dr}([eps,1]))} with
// Z(t, r) = r^{-(n-2)/2} int J_nu0(r rho) e^{i t rho} chi(rho) rho d rho.
CounterexampleReport counterexample_run(double nu0, int n, double q, double p, const std::vector<double>& eps);

// The bump chi on [1, 2] with values in [0, 1] used above.
double counterexample_bump(double rho);

}  // namespace conespec
