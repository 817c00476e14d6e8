#pragma once

#include "conespec/quadrature.hpp"

namespace conespec::bands {

// Smooth cutoff: 1 on [0, 1], 0 on [2, inf).
double chi(double lambda);

// phi(lambda) = chi(lambda) - chi(2 lambda), supported in [1/2, 2].
double phi(double lambda);

// phi(2^{-j} lambda); sum over j is 1 for lambda > 0.
double phi_j(int j, double lambda);

// Squared partition: phi_j / sqrt(sum_k phi_k^2), so the squares sum to 1.
double phi_sq_j(int j, double lambda);

// Dyadic bands whose support meets [lo, hi].
int band_lo(double lo);
int band_hi(double hi);

// Gauss-Legendre panels over the support [2^{j-1}, 2^{j+1}] of band j with at
// least 12 nodes per period of e^{i lambda extent}.
quad::Rule band_rule(int j, double extent, int min_panels = 8, int points = 16);

// Same resolution rule over an arbitrary interval.
quad::Rule oscillation_rule(double a, double b, double extent, int min_panels = 8, int points = 16);

// Largest spacing between consecutive nodes of a rule.
double max_spacing(const quad::Rule& rule);

}  // namespace conespec::bands
