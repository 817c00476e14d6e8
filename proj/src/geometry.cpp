#include "conespec/geometry.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>

#include "conespec/errors.hpp"

namespace conespec {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kTwoPi = 2.0 * std::numbers::pi;

Eigen::VectorXd to_dynamic(const Vec3& v) { return Eigen::VectorXd(v); }

// Dormand-Prince 5(4) on the spheroid geodesic equation plus the scalar
// Jacobi equation j'' + K j = 0.
using State = std::array<double, 8>;

struct SpheroidFlow {
    Spheroid s;
    double ia2, ic2;

    explicit SpheroidFlow(const Spheroid& sp) : s(sp), ia2(1.0 / (sp.a * sp.a)), ic2(1.0 / (sp.c * sp.c)) {}

    Vec3 normal(const Vec3& x) const { return Vec3(x.x() * ia2, x.y() * ia2, x.z() * ic2); }

    State rhs(const State& y) const {
        const Vec3 x(y[0], y[1], y[2]), v(y[3], y[4], y[5]);
        const Vec3 g = normal(x);
        const double vhv = v.x() * v.x() * ia2 + v.y() * v.y() * ia2 + v.z() * v.z() * ic2;
        const Vec3 acc = -(vhv / g.squaredNorm()) * g;
        const double K = spheroid_curvature(s, x);
        return {v.x(), v.y(), v.z(), acc.x(), acc.y(), acc.z(), y[7], -K * y[6]};
    }

    void project(State& y) const {
        Vec3 x(y[0], y[1], y[2]), v(y[3], y[4], y[5]);
        const double F = x.x() * x.x() * ia2 + x.y() * x.y() * ia2 + x.z() * x.z() * ic2;
        x /= std::sqrt(F);
        const Vec3 n = normal(x).normalized();
        const double speed = v.norm();
        v -= v.dot(n) * n;
        v *= speed / v.norm();
        y[0] = x.x(), y[1] = x.y(), y[2] = x.z();
        y[3] = v.x(), y[4] = v.y(), y[5] = v.z();
    }

    // Integrates over signed length `len`; `h` carries the step size between calls.
    void integrate(State& y, double len, double tol, double& h) const {
        static constexpr double a[7][6] = {{0},
                                           {1.0 / 5},
                                           {3.0 / 40, 9.0 / 40},
                                           {44.0 / 45, -56.0 / 15, 32.0 / 9},
                                           {19372.0 / 6561, -25360.0 / 2187, 64448.0 / 6561, -212.0 / 729},
                                           {9017.0 / 3168, -355.0 / 33, 46732.0 / 5247, 49.0 / 176,
                                            -5103.0 / 18656},
                                           {35.0 / 384, 0, 500.0 / 1113, 125.0 / 192, -2187.0 / 6784,
                                            11.0 / 84}};
        static constexpr double b5[7] = {35.0 / 384, 0, 500.0 / 1113, 125.0 / 192, -2187.0 / 6784, 11.0 / 84, 0};
        static constexpr double b4[7] = {5179.0 / 57600, 0,           7571.0 / 16695, 393.0 / 640,
                                         -92097.0 / 339200, 187.0 / 2100, 1.0 / 40};
        if (len == 0.0) return;
        const double dir = len > 0 ? 1.0 : -1.0;
        double remaining = std::abs(len);
        if (!(h > 0.0)) h = 0.05;
        int steps = 0;
        while (remaining > 0.0) {
            if (++steps > 1000000) throw IntegratorFailure("spheroid flow: step budget exhausted");
            const double step = std::min(h, remaining);
            const double hs = dir * step;
            std::array<State, 7> k;
            k[0] = rhs(y);
            for (int st = 1; st < 7; ++st) {
                State tmp = y;
                for (int i = 0; i < 8; ++i) {
                    double acc = 0.0;
                    for (int j = 0; j < st; ++j) acc += a[st][j] * k[j][i];
                    tmp[i] += hs * acc;
                }
                k[st] = rhs(tmp);
            }
            State y5 = y;
            double err = 0.0;
            for (int i = 0; i < 8; ++i) {
                double s5 = 0.0, s4 = 0.0;
                for (int j = 0; j < 7; ++j) {
                    s5 += b5[j] * k[j][i];
                    s4 += b4[j] * k[j][i];
                }
                y5[i] += hs * s5;
                const double scale = tol * (1.0 + std::abs(y[i]));
                err = std::max(err, std::abs(hs * (s5 - s4)) / scale);
            }
            if (err <= 1.0) {
                y = y5;
                project(y);
                remaining -= step;
                if (remaining < 1e-15) remaining = 0.0;
                const double grow = err == 0.0 ? 5.0 : std::min(5.0, 0.9 * std::pow(err, -0.2));
                if (step == h) h *= grow;
            } else {
                h = step * std::max(0.1, 0.9 * std::pow(err, -0.2));
                if (h < 1e-14) throw IntegratorFailure("spheroid flow: step size underflow");
            }
        }
    }
};

State pack(const FlowState& f) {
    return {f.x.x(), f.x.y(), f.x.z(), f.v.x(), f.v.y(), f.v.z(), f.jacobi, f.jacobi_rate};
}

FlowState unpack(const State& y) {
    return {Vec3(y[0], y[1], y[2]), Vec3(y[3], y[4], y[5]), y[6], y[7]};
}

Vec3 project_to_spheroid(const Spheroid& s, const Vec3& p) {
    const double F = p.x() * p.x() / (s.a * s.a) + p.y() * p.y() / (s.a * s.a) + p.z() * p.z() / (s.c * s.c);
    return p / std::sqrt(F);
}

void tangent_frame(const SpheroidFlow& flow, const Vec3& p, Vec3& e1, Vec3& e2) {
    const Vec3 n = flow.normal(p).normalized();
    Vec3 t = std::abs(n.z()) < 0.9 ? Vec3(0, 0, 1) : Vec3(1, 0, 0);
    e1 = (t - t.dot(n) * n).normalized();
    e2 = n.cross(e1);
}

struct Approach {
    double s = 0.0;
    double dist = INFINITY;
    double cross = 0.0;
    State state{};
};

class Shooter {
public:
    Shooter(const Spheroid& sp, const Vec3& x, const Vec3& y, double horizon, double tol)
        : flow_(sp), target_(x), start_(y), horizon_(horizon), tol_(tol) {
        tangent_frame(flow_, start_, e1_, e2_);
    }

    State initial(double theta) const {
        FlowState f{start_, std::cos(theta) * e1_ + std::sin(theta) * e2_, 0.0, 1.0};
        return pack(f);
    }

    double h_value(const State& y) const {
        return (Vec3(y[0], y[1], y[2]) - target_).dot(Vec3(y[3], y[4], y[5]));
    }

    Approach finish(double s, const State& y) const {
        const Vec3 p(y[0], y[1], y[2]), v(y[3], y[4], y[5]);
        const Vec3 n = flow_.normal(p).normalized();
        return {s, (p - target_).norm(), (target_ - p).dot(n.cross(v)), y};
    }

    // Closest approach inside [s_lo, s_hi] given the state at s_lo.
    bool refine(double s_lo, double s_hi, State y_lo, Approach& out) const {
        double h = 0.02;
        State y_hi = y_lo;
        flow_.integrate(y_hi, s_hi - s_lo, tol_, h);
        double f_lo = h_value(y_lo), f_hi = h_value(y_hi);
        if (!(f_lo < 0.0 && f_hi >= 0.0)) return false;
        double a = s_lo, b = s_hi;
        State ya = y_lo;
        for (int it = 0; it < 60 && b - a > 1e-14; ++it) {
            // Secant guess safeguarded into the middle of the bracket.
            double m = a - f_lo * (b - a) / (f_hi - f_lo);
            const double lo = a + 0.1 * (b - a), hi = b - 0.1 * (b - a);
            if (!(m > lo && m < hi)) m = 0.5 * (a + b);
            State ym = ya;
            double hm = 0.02;
            flow_.integrate(ym, m - a, tol_, hm);
            const double fm = h_value(ym);
            if (fm < 0.0) {
                a = m;
                ya = ym;
                f_lo = fm;
            } else {
                b = m;
                f_hi = fm;
            }
        }
        out = finish(a, ya);
        return true;
    }

    std::vector<Approach> approaches(double theta, double near = -1.0, double window = 0.0) const {
        constexpr double ds = 0.02;
        std::vector<Approach> out;
        State y = initial(theta);
        double h = 0.02;
        double s0 = 0.0, s1 = horizon_;
        if (near >= 0.0) {
            s0 = std::max(0.0, near - window);
            s1 = std::min(horizon_, near + window);
            flow_.integrate(y, s0, tol_, h);
        }
        const int n = std::max(2, static_cast<int>(std::ceil((s1 - s0) / ds)));
        const double step = (s1 - s0) / n;
        std::vector<State> st(n + 1);
        std::vector<double> g(n + 1);
        st[0] = y;
        for (int i = 1; i <= n; ++i) {
            flow_.integrate(y, step, tol_, h);
            st[i] = y;
        }
        for (int i = 0; i <= n; ++i) g[i] = (Vec3(st[i][0], st[i][1], st[i][2]) - target_).squaredNorm();
        for (int i = 1; i < n; ++i) {
            const double s = s0 + i * step;
            if (s < 0.05) continue;
            if (!(g[i] <= g[i - 1] && g[i] <= g[i + 1])) continue;
            if (g[i] > 0.09) continue;
            Approach ap;
            if (refine(s - step, s + step, st[i - 1], ap)) out.push_back(ap);
        }
        return out;
    }

    double cross_near(double theta, double s_guess, Approach& best) const {
        const auto list = approaches(theta, s_guess, 0.12);
        double bestd = INFINITY;
        for (const auto& ap : list)
            if (std::abs(ap.s - s_guess) < bestd) {
                bestd = std::abs(ap.s - s_guess);
                best = ap;
            }
        if (!std::isfinite(bestd)) throw ShootingNonconvergence("shooting: lost the closest approach");
        return best.cross;
    }

    Vec3 covector(double theta) const { return std::cos(theta) * e1_ + std::sin(theta) * e2_; }

private:
    SpheroidFlow flow_;
    Vec3 target_, start_, e1_, e2_;
    double horizon_, tol_;
};

std::vector<GeodesicRecord> spheroid_distance_spectrum(const Spheroid& sp, const Vec3& x_in, const Vec3& y_in,
                                                       double horizon, const ShootingOptions& opts) {
    const Vec3 x = project_to_spheroid(sp, x_in), y = project_to_spheroid(sp, y_in);
    Shooter shooter(sp, x, y, horizon, opts.tolerance);
    const int N = opts.directions;
    std::vector<std::vector<Approach>> table(N);
    int failures = 0;
#pragma omp parallel for schedule(dynamic) reduction(+ : failures) if (opts.parallel)
    for (int i = 0; i < N; ++i) {
        try {
            table[i] = shooter.approaches(kTwoPi * i / N);
        } catch (const NumericalBudgetError&) {
            ++failures;
        }
    }
    if (failures) throw ShootingNonconvergence("shooting: integration failed for some directions");

    std::vector<GeodesicRecord> out;
    if ((x - y).norm() < 1e-12) {
        GeodesicRecord r;
        r.start = to_dynamic(y);
        r.covector = to_dynamic(shooter.covector(0.0));
        r.length = 0.0;
        r.arrival = to_dynamic(x);
        r.arrival_covector = r.covector;
        out.push_back(r);
    }

    // Degenerate families: a large fraction of directions hit the target at
    // the same length.
    std::vector<double> hits;
    for (const auto& row : table)
        for (const auto& ap : row)
            if (ap.dist < 1e-6) hits.push_back(ap.s);
    std::sort(hits.begin(), hits.end());
    std::vector<std::pair<double, double>> degenerate_bands;
    for (std::size_t i = 0; i < hits.size();) {
        std::size_t j = i;
        while (j + 1 < hits.size() && hits[j + 1] - hits[j] < 0.01) ++j;
        if (static_cast<int>(j - i + 1) >= N / 4) {
            const double len = hits[(i + j) / 2];
            degenerate_bands.push_back({hits[i] - 0.05, hits[j] + 0.05});
            GeodesicRecord r;
            r.start = to_dynamic(y);
            r.covector = to_dynamic(shooter.covector(0.0));
            r.length = len;
            r.arrival = to_dynamic(x);
            r.arrival_covector = r.covector;
            r.degenerate = true;
            r.conjugate_flag = true;
            out.push_back(r);
        }
        i = j + 1;
    }
    auto in_degenerate = [&](double s) {
        for (const auto& b : degenerate_bands)
            if (s >= b.first && s <= b.second) return true;
        return false;
    };

    std::vector<GeodesicRecord> found;
    for (int i = 0; i < N; ++i) {
        const int ip = (i + 1) % N;
        const double ta = kTwoPi * i / N, tb = kTwoPi * (i + 1) / N;
        for (const auto& A : table[i]) {
            if (in_degenerate(A.s)) continue;
            for (const auto& B : table[ip]) {
                if (std::abs(A.s - B.s) > 0.15) continue;
                if ((A.cross < 0.0) == (B.cross < 0.0) && A.cross != 0.0 && B.cross != 0.0) continue;
                double lo = ta, hi = tb, flo = A.cross;
                Approach best = std::abs(A.cross) < std::abs(B.cross) ? A : B;
                double s_guess = 0.5 * (A.s + B.s);
                for (int it = 0; it < 60 && hi - lo > 1e-14; ++it) {
                    const double mid = 0.5 * (lo + hi);
                    Approach ap;
                    const double fm = shooter.cross_near(mid, s_guess, ap);
                    s_guess = ap.s;
                    best = ap;
                    if ((fm < 0.0) == (flo < 0.0)) {
                        lo = mid;
                        flo = fm;
                    } else {
                        hi = mid;
                    }
                }
                if (best.dist > 1e-6) continue;
                GeodesicRecord r;
                const double theta = 0.5 * (lo + hi);
                r.start = to_dynamic(y);
                r.covector = to_dynamic(shooter.covector(theta));
                r.length = best.s;
                r.arrival = to_dynamic(Vec3(best.state[0], best.state[1], best.state[2]));
                r.arrival_covector = to_dynamic(Vec3(best.state[3], best.state[4], best.state[5]));
                r.conjugate_flag = std::abs(best.state[6]) < 1e-6;
                found.push_back(r);
            }
        }
    }
    for (const auto& r : found) {
        bool dup = false;
        for (const auto& q : out)
            if (!q.degenerate && std::abs(q.length - r.length) < 1e-6 && q.covector.dot(r.covector) > 1.0 - 1e-8)
                dup = true;
        if (!dup) out.push_back(r);
    }
    std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) { return a.length < b.length; });
    if (opts.directions > 0 && out.empty() && failures) throw ShootingNonconvergence("shooting failed");
    return out;
}

}  // namespace

double spheroid_curvature(const Spheroid& s, const Vec3& x) {
    const double a2 = s.a * s.a, c2 = s.c * s.c;
    const double q = x.x() * x.x() / (a2 * a2) + x.y() * x.y() / (a2 * a2) + x.z() * x.z() / (c2 * c2);
    return 1.0 / (a2 * a2 * c2 * q * q);
}

FlowState spheroid_flow(const Spheroid& s, const FlowState& start, double length, double tolerance) {
    SpheroidFlow flow(s);
    State y = pack(start);
    double h = 0.02;
    flow.integrate(y, length, tolerance, h);
    return unpack(y);
}

GeometrySpec geometry_of(const CrossSectionSpec& spec) {
    if (const auto* rs = std::get_if<RoundSphere>(&spec)) return SphereGeometry{rs->dim, rs->radius};
    return SphereGeometry{2, 1.0};
}

std::vector<GeodesicRecord> distance_spectrum(const GeometrySpec& spec, const Eigen::VectorXd& x,
                                              const Eigen::VectorXd& y, double horizon,
                                              const ShootingOptions& opts) {
    std::vector<GeodesicRecord> out;
    if (const auto* sg = std::get_if<SphereGeometry>(&spec)) {
        if (x.size() != sg->dim + 1 || y.size() != sg->dim + 1)
            throw DomainError("distance_spectrum: point dimension mismatch");
        const Eigen::VectorXd xu = x.normalized(), yu = y.normalized();
        const double rho = sg->radius;
        const double th = std::acos(std::clamp(xu.dot(yu), -1.0, 1.0));
        Eigen::VectorXd dir = xu - xu.dot(yu) * yu;
        const bool coincident = th < 1e-12, antipodal = kPi - th < 1e-12;
        if (dir.norm() > 1e-14) dir.normalize();
        else {
            dir = Eigen::VectorXd::Zero(yu.size());
            Eigen::Index i;
            yu.cwiseAbs().minCoeff(&i);
            dir[i] = 1.0;
            dir = (dir - dir.dot(yu) * yu).normalized();
        }
        auto arrival_cov = [&](const Eigen::VectorXd& v0, double len) {
            const double ang = len / rho;
            return Eigen::VectorXd(-std::sin(ang) * yu + std::cos(ang) * v0);
        };
        auto push = [&](double len, const Eigen::VectorXd& v0, bool degenerate) {
            if (len >= horizon) return;
            GeodesicRecord r;
            r.start = yu;
            r.covector = v0;
            r.length = len;
            r.arrival = xu;
            r.arrival_covector = arrival_cov(v0, len);
            r.degenerate = degenerate;
            const double k = len / (kPi * rho);
            r.conjugate_flag = len > 0.0 && std::abs(k - std::round(k)) < 1e-12;
            out.push_back(r);
        };
        if (coincident) {
            push(0.0, dir, false);
            for (int k = 1; kTwoPi * rho * k < horizon; ++k) push(kTwoPi * rho * k, dir, true);
        } else if (antipodal) {
            for (int k = 0; kPi * rho * (2 * k + 1) < horizon; ++k) push(kPi * rho * (2 * k + 1), dir, true);
        } else {
            for (int k = 0; rho * (th + kTwoPi * k) < horizon; ++k) {
                push(rho * (th + kTwoPi * k), dir, false);
                push(rho * (kTwoPi - th + kTwoPi * k), -dir, false);
            }
        }
    } else if (const auto* tor = std::get_if<FlatTorus>(&spec)) {
        if (x.size() != 2 || y.size() != 2) throw DomainError("distance_spectrum: torus points are (u, v)");
        const double L1 = kTwoPi * tor->r1, L2 = kTwoPi * tor->r2;
        Eigen::Vector2d delta = x - y;
        delta[0] -= L1 * std::round(delta[0] / L1);
        delta[1] -= L2 * std::round(delta[1] / L2);
        const int m_max = static_cast<int>(std::ceil(horizon / L1)) + 1;
        const int k_max = static_cast<int>(std::ceil(horizon / L2)) + 1;
        for (int m = -m_max; m <= m_max; ++m)
            for (int k = -k_max; k <= k_max; ++k) {
                const Eigen::Vector2d w = delta + Eigen::Vector2d(L1 * m, L2 * k);
                const double len = w.norm();
                if (len >= horizon) continue;
                GeodesicRecord r;
                r.start = y;
                r.covector = len > 0 ? Eigen::VectorXd(w / len) : Eigen::VectorXd(Eigen::Vector2d(1, 0));
                r.length = len;
                r.arrival = y + w;
                r.arrival_covector = r.covector;
                out.push_back(r);
            }
    } else {
        const auto& sp = std::get<Spheroid>(spec);
        if (x.size() != 3 || y.size() != 3) throw DomainError("distance_spectrum: spheroid points are in R^3");
        return spheroid_distance_spectrum(sp, x.head<3>(), y.head<3>(), horizon, opts);
    }
    std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) { return a.length < b.length; });
    return out;
}

LengthSpectrum length_spectrum(const GeometrySpec& spec, double horizon, const ShootingOptions& opts) {
    LengthSpectrum ls;
    if (const auto* sg = std::get_if<SphereGeometry>(&spec)) {
        for (int k = 1; kTwoPi * sg->radius * k < horizon; ++k) ls.lengths.push_back(kTwoPi * sg->radius * k);
        return ls;
    }
    if (const auto* tor = std::get_if<FlatTorus>(&spec)) {
        const double L1 = kTwoPi * tor->r1, L2 = kTwoPi * tor->r2;
        const int m_max = static_cast<int>(std::ceil(horizon / L1));
        const int k_max = static_cast<int>(std::ceil(horizon / L2));
        for (int m = 0; m <= m_max; ++m)
            for (int k = -k_max; k <= k_max; ++k) {
                if (m == 0 && k <= 0) continue;
                const double len = std::hypot(L1 * m, L2 * k);
                if (len < horizon) ls.lengths.push_back(len);
            }
        std::sort(ls.lengths.begin(), ls.lengths.end());
        ls.lengths.erase(std::unique(ls.lengths.begin(), ls.lengths.end(),
                                     [](double a, double b) { return std::abs(a - b) < 1e-12; }),
                         ls.lengths.end());
        return ls;
    }
    // Loops through sampled base points; rotational and reflection symmetry
    // of the spheroid reduce the base points to one meridian quadrant.
    const auto& sp = std::get<Spheroid>(spec);
    ls.analytic = false;
    constexpr int kBase = 9;
    int ok = 0;
    for (int i = 0; i < kBase; ++i) {
        const double sigma = 0.5 * kPi * i / (kBase - 1);
        const Vec3 p(sp.a * std::sin(sigma), 0.0, sp.c * std::cos(sigma));
        try {
            const auto recs = spheroid_distance_spectrum(sp, p, p, horizon, opts);
            for (const auto& r : recs)
                if (r.length > 1e-9) ls.lengths.push_back(r.length);
            ++ok;
        } catch (const NumericalBudgetError&) {
        }
    }
    ls.coverage_confidence = static_cast<double>(ok) / kBase;
    std::sort(ls.lengths.begin(), ls.lengths.end());
    return ls;
}

NrecResult check_nrec(const GeometrySpec& spec, double horizon, const ShootingOptions& opts) {
    if (!(horizon > kPi + 1.0)) throw DomainError("check_nrec: horizon must exceed pi + 1");
    NrecResult res;
    res.spectrum = length_spectrum(spec, horizon, opts);
    if (!res.spectrum.analytic && res.spectrum.coverage_confidence < 0.9)
        throw Inconclusive("check_nrec: numeric length spectrum coverage too low");
    double dist = INFINITY;
    for (double l : res.spectrum.lengths) dist = std::min(dist, std::abs(l - kPi));
    res.delta0 = std::min(dist, 1.0);
    res.holds = res.delta0 > 1e-9;
    return res;
}

double conjugate_radius(const GeometrySpec& spec, const Eigen::VectorXd& start, const Eigen::VectorXd& covector,
                        double horizon) {
    if (const auto* sg = std::get_if<SphereGeometry>(&spec)) {
        const double r = kPi * sg->radius;
        return r < horizon ? r : kNoConjugatePoint;
    }
    if (std::holds_alternative<FlatTorus>(spec)) return kNoConjugatePoint;
    const auto& sp = std::get<Spheroid>(spec);
    SpheroidFlow flow(sp);
    const Vec3 p = project_to_spheroid(sp, start.head<3>());
    const Vec3 n = flow.normal(p).normalized();
    Vec3 v = covector.head<3>();
    v = (v - v.dot(n) * n).normalized();
    State y = pack(FlowState{p, v, 0.0, 1.0});
    constexpr double ds = 0.01;
    double h = 0.01, s = 0.0;
    while (s < horizon) {
        State prev = y;
        const double step = std::min(ds, horizon - s);
        flow.integrate(y, step, 1e-12, h);
        if (prev[6] > 0.0 && y[6] <= 0.0) {
            double a = s, b = s + step;
            State ya = prev;
            for (int it = 0; it < 60 && b - a > 1e-14; ++it) {
                const double m = 0.5 * (a + b);
                State ym = ya;
                double hm = 0.01;
                flow.integrate(ym, m - a, 1e-12, hm);
                if (ym[6] > 0.0) {
                    a = m;
                    ya = ym;
                } else {
                    b = m;
                }
            }
            const double r = 0.5 * (a + b);
            return r < horizon ? r : kNoConjugatePoint;
        }
        s += step;
    }
    return kNoConjugatePoint;
}

bool check_nfc_sufficient(double k_min, double k_max, bool simply_connected) {
    return k_max < 1.0 || (simply_connected && 0.5 <= k_min && k_max < 2.0);
}

CurvatureBounds curvature_bounds(const GeometrySpec& spec) {
    if (const auto* sg = std::get_if<SphereGeometry>(&spec)) {
        const double K = 1.0 / (sg->radius * sg->radius);
        return {K, K, sg->dim >= 2};
    }
    if (std::holds_alternative<FlatTorus>(spec)) return {0.0, 0.0, false};
    const auto& sp = std::get<Spheroid>(spec);
    const double pole = sp.c * sp.c / std::pow(sp.a, 4), equator = 1.0 / (sp.c * sp.c);
    return {std::min(pole, equator), std::max(pole, equator), true};
}

double chord_distance(double r1, double r2, double s) {
    if (!(r1 > 0.0 && r2 > 0.0)) throw DomainError("cone_chord: radii must be positive");
    if (s < 0.0 || s > kPi) throw DomainError("cone_chord: d(s) requires s in [0, pi]");
    const double a = r1 - r2, b = 2.0 * std::sin(0.5 * s) * std::sqrt(r1 * r2);
    return std::hypot(a, b);
}

double chord_distance_tilde(double r1, double r2, double s) {
    if (!(r1 > 0.0 && r2 > 0.0)) throw DomainError("cone_chord: radii must be positive");
    if (s < 0.0) throw DomainError("cone_chord: s must be >= 0");
    const double a = r1 + r2, b = 2.0 * std::sinh(0.5 * s) * std::sqrt(r1 * r2);
    return std::hypot(a, b);
}

ConeChord cone_chord(double r1, double r2, double s) {
    ConeChord c{};
    c.r1 = r1;
    c.r2 = r2;
    c.s = s;
    c.d = chord_distance(r1, r2, s);
    c.d_tilde = chord_distance_tilde(r1, r2, s);
    c.m_s[0] = r1 - r2;
    c.m_s[1] = 2.0 * std::sin(0.5 * s) * std::sqrt(r1 * r2);
    c.n_s[0] = r1 + r2;
    c.n_s[1] = 2.0 * std::sinh(0.5 * s) * std::sqrt(r1 * r2);
    return c;
}

Microlocalizer::Microlocalizer(std::vector<Eigen::VectorXd> centers, double radius, double support)
    : centers_(std::move(centers)), radius_(radius), support_(support) {}

double Microlocalizer::bump(std::size_t j, const Eigen::VectorXd& x) const {
    if (!std::isfinite(support_)) return 1.0;
    const double d = radius_ * std::acos(std::clamp(centers_[j].dot(x.normalized()), -1.0, 1.0));
    const double t = d / support_;
    return t < 1.0 ? std::exp(1.0 - 1.0 / (1.0 - t * t)) : 0.0;
}

std::vector<double> Microlocalizer::values(const Eigen::VectorXd& x) const {
    std::vector<double> v(centers_.size());
    double sum = 0.0;
    for (std::size_t j = 0; j < centers_.size(); ++j) sum += (v[j] = bump(j, x));
    if (!(sum > 0.0)) throw CoverFailure("microlocalizer: point not covered");
    for (auto& e : v) e /= sum;
    return v;
}

double Microlocalizer::value(std::size_t j, const Eigen::VectorXd& x) const { return values(x)[j]; }

Microlocalizer build_microlocalizers(const GeometrySpec& spec, double patch_diameter) {
    const auto* sg = std::get_if<SphereGeometry>(&spec);
    if (!sg) throw DomainError("build_microlocalizers: implemented for round spheres");
    if (!(patch_diameter > 0.0)) throw CoverFailure("build_microlocalizers: diameter must be positive");
    const double rho = sg->radius;
    if (patch_diameter >= kPi * rho) {
        Eigen::VectorXd c = Eigen::VectorXd::Zero(sg->dim + 1);
        c[sg->dim] = 1.0;
        return Microlocalizer({c}, rho, INFINITY);
    }
    if (sg->dim != 2) throw DomainError("build_microlocalizers: multi-patch covers need S^2");
    const double support = 0.5 * patch_diameter;
    const auto nodes = sphere_quadrature_for_degree(60);
    const double golden = kPi * (3.0 - std::sqrt(5.0));
    for (int N = 6; N <= 200000; N = static_cast<int>(N * 1.2) + 1) {
        std::vector<Eigen::VectorXd> centers;
        for (int i = 0; i < N; ++i) {
            const double z = 1.0 - (2.0 * i + 1.0) / N;
            const double r = std::sqrt(std::max(0.0, 1.0 - z * z));
            centers.push_back(Eigen::VectorXd(Vec3(r * std::cos(golden * i), r * std::sin(golden * i), z)));
        }
        double worst = 0.0;
        for (const auto& p : nodes.point) {
            double best = INFINITY;
            for (const auto& c : centers) best = std::min(best, rho * std::acos(std::clamp(c.dot(p), -1.0, 1.0)));
            worst = std::max(worst, best);
        }
        if (worst <= 0.75 * support) return Microlocalizer(std::move(centers), rho, support);
    }
    throw CoverFailure("build_microlocalizers: covering budget exhausted");
}

}  // namespace conespec
