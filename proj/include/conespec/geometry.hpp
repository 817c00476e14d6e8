#pragma once

#include <Eigen/Dense>
#include <limits>
#include <numbers>
#include <variant>
#include <vector>

#include "conespec/cross_section.hpp"

namespace conespec {

// Round sphere S^dim of a given radius; points are unit vectors in R^{dim+1}.
struct SphereGeometry {
    int dim = 2;
    double radius = 1.0;
};

// R^2 / (2 pi r1 Z x 2 pi r2 Z); points are (u, v) in R^2.
struct FlatTorus {
    double r1 = 1.0, r2 = 1.0;
};

// x^2/a^2 + y^2/a^2 + z^2/c^2 = 1 in R^3, geodesics integrated numerically.
struct Spheroid {
    double a = 1.0, c = 1.0;
};

using GeometrySpec = std::variant<SphereGeometry, FlatTorus, Spheroid>;

GeometrySpec geometry_of(const CrossSectionSpec& spec);

inline constexpr double kDefaultHorizonEpsilon = 0.05;
inline constexpr double kNoConjugatePoint = std::numeric_limits<double>::infinity();

struct GeodesicRecord {
    Eigen::VectorXd start;
    Eigen::VectorXd covector;
    double length = 0.0;
    Eigen::VectorXd arrival;
    Eigen::VectorXd arrival_covector;
    bool conjugate_flag = false;
    bool degenerate = false;
};

struct ShootingOptions {
    int directions = 720;
    double tolerance = 1e-10;
    bool parallel = true;
};

// Geodesics from y to x shorter than the horizon.
std::vector<GeodesicRecord> distance_spectrum(const GeometrySpec& spec, const Eigen::VectorXd& x,
                                              const Eigen::VectorXd& y,
                                              double horizon = std::numbers::pi + kDefaultHorizonEpsilon,
                                              const ShootingOptions& opts = {});

struct LengthSpectrum {
    std::vector<double> lengths;
    double coverage_confidence = 1.0;
    bool analytic = true;
};

LengthSpectrum length_spectrum(const GeometrySpec& spec, double horizon, const ShootingOptions& opts = {});

struct NrecResult {
    bool holds = false;
    double delta0 = 0.0;
    LengthSpectrum spectrum;
};

NrecResult check_nrec(const GeometrySpec& spec, double horizon = std::numbers::pi + 2.0,
                      const ShootingOptions& opts = {});

double conjugate_radius(const GeometrySpec& spec, const Eigen::VectorXd& start,
                        const Eigen::VectorXd& covector,
                        double horizon = std::numbers::pi + kDefaultHorizonEpsilon);

bool check_nfc_sufficient(double k_min, double k_max, bool simply_connected);

struct CurvatureBounds {
    double k_min, k_max;
    bool simply_connected;
};
CurvatureBounds curvature_bounds(const GeometrySpec& spec);

struct ConeChord {
    double r1, r2, s;
    double m_s[2];
    double n_s[2];
    double d;
    double d_tilde;
};

ConeChord cone_chord(double r1, double r2, double s);
// d(s) and d~(s) on their own; d requires s in [0, pi].
double chord_distance(double r1, double r2, double s);
double chord_distance_tilde(double r1, double r2, double s);

// Smooth partition of unity on a round sphere built from geodesic-ball bumps.
class Microlocalizer {
public:
    Microlocalizer(std::vector<Eigen::VectorXd> centers, double radius, double support);

    std::size_t size() const { return centers_.size(); }
    const Eigen::VectorXd& center(std::size_t j) const { return centers_[j]; }
    double support_radius() const { return support_; }
    double value(std::size_t j, const Eigen::VectorXd& x) const;
    std::vector<double> values(const Eigen::VectorXd& x) const;

private:
    double bump(std::size_t j, const Eigen::VectorXd& x) const;
    std::vector<Eigen::VectorXd> centers_;
    double radius_;   // sphere radius
    double support_;  // geodesic support radius; infinite for the single patch
};

Microlocalizer build_microlocalizers(const GeometrySpec& spec, double patch_diameter);

// Numeric geodesic flow on a spheroid (exposed for tests).
struct FlowState {
    Vec3 x;
    Vec3 v;
    double jacobi = 0.0;
    double jacobi_rate = 1.0;
};

FlowState spheroid_flow(const Spheroid& s, const FlowState& start, double length, double tolerance = 1e-10);
double spheroid_curvature(const Spheroid& s, const Vec3& x);

}  // namespace conespec
