#include "conespec/bands.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace conespec::bands {

namespace {

double mollifier(double x) { return x > 0.0 ? std::exp(-1.0 / x) : 0.0; }

}  // namespace

double chi(double lambda) {
    if (lambda <= 1.0) return 1.0;
    if (lambda >= 2.0) return 0.0;
    const double a = mollifier(2.0 - lambda), b = mollifier(lambda - 1.0);
    return a / (a + b);
}

double phi(double lambda) { return chi(lambda) - chi(2.0 * lambda); }

double phi_j(int j, double lambda) { return phi(std::ldexp(lambda, -j)); }

double phi_sq_j(int j, double lambda) {
    const double v = phi_j(j, lambda);
    if (v == 0.0) return 0.0;
    // At most two bands overlap at any lambda.
    const double a = phi_j(j - 1, lambda), b = phi_j(j + 1, lambda);
    return v / std::sqrt(v * v + a * a + b * b);
}

int band_lo(double lo) { return static_cast<int>(std::floor(std::log2(lo))) - 1; }
int band_hi(double hi) { return static_cast<int>(std::ceil(std::log2(hi))) + 1; }

quad::Rule oscillation_rule(double a, double b, double extent, int min_panels, int points) {
    const double period = 2.0 * std::numbers::pi / std::max(std::abs(extent), 1e-300);
    const double want_nodes = 12.0 * (b - a) / period;
    const int panels = std::max(min_panels, static_cast<int>(std::ceil(2.0 * want_nodes / points)));
    return quad::composite(a, b, panels, points);
}

quad::Rule band_rule(int j, double extent, int min_panels, int points) {
    return oscillation_rule(std::ldexp(0.5, j), std::ldexp(2.0, j), extent, min_panels, points);
}

double max_spacing(const quad::Rule& rule) {
    std::vector<double> x = rule.nodes;
    std::sort(x.begin(), x.end());
    double gap = 0.0;
    for (std::size_t i = 1; i < x.size(); ++i) gap = std::max(gap, x[i] - x[i - 1]);
    return gap;
}

}  // namespace conespec::bands
