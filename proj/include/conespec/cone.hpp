#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <numbers>

namespace conespec {

// Point of the cone (0, inf) x Y: radius and a cross-section point, given as
// a unit vector for round spheres.
struct ConePoint {
    double r = 1.0;
    Eigen::VectorXd dir;
};

inline ConePoint cone_point(double r, const Eigen::VectorXd& dir) { return {r, dir.normalized()}; }

// Euclidean image r * dir, meaningful when Y is the unit sphere.
inline Eigen::VectorXd euclidean(const ConePoint& p) { return p.r * p.dir; }

inline double angular_distance(const ConePoint& x, const ConePoint& y) {
    return std::acos(std::clamp(x.dir.dot(y.dir) / (x.dir.norm() * y.dir.norm()), -1.0, 1.0));
}

// Orders above this are dropped for arguments up to z: J_nu(z) is below
// (e z / 2 nu)^nu there.
inline double order_cutoff(double z) { return std::ceil(std::numbers::e * z / 2.0) + 20.0; }

}  // namespace conespec
