#include "conespec/specfun.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "conespec/errors.hpp"
#include "conespec/quadrature.hpp"

namespace conespec::specfun {

namespace {

using cd = std::complex<double>;
constexpr double kPi = std::numbers::pi;
constexpr double kSeriesRadius = 12.0;

void check_domain(double nu, double r) {
    if (!(nu >= 0.0) || !std::isfinite(nu)) throw DomainError("bessel: order must be >= 0");
    if (!(r >= 0.0) || !std::isfinite(r)) throw DomainError("bessel: argument must be >= 0");
}

bool series_region(double nu, double r) { return r <= kSeriesRadius || r * r <= 4.0 * (nu + 1.0); }

long double series_j(double nu, double r) {
    if (r == 0.0) return nu == 0.0 ? 1.0L : 0.0L;
    const long double half = static_cast<long double>(r) / 2.0L;
    const long double x2 = -half * half;
    long double term = std::exp(nu * std::log(half) - std::lgamma(static_cast<long double>(nu) + 1.0L));
    long double sum = term;
    for (int k = 1; k < 1000; ++k) {
        term *= x2 / (static_cast<long double>(k) * (k + nu));
        sum += term;
        if (std::fabs(term) <= 1e-22L * std::fabs(sum) && k > half) break;
        if (term == 0.0L) break;
    }
    return sum;
}

// Hankel expansion of j_+; returns false when it does not reach full precision.
bool jplus_expansion(double nu, double r, cd& out) {
    const double mu = 4.0 * nu * nu;
    cd sum = 1.0, term = 1.0;
    double prev = 1.0;
    for (int k = 1; k < 200; ++k) {
        const double f = (mu - (2.0 * k - 1.0) * (2.0 * k - 1.0)) / (8.0 * k * r);
        term *= cd(0.0, 1.0) * f;
        const double mag = std::abs(term);
        if (mag == 0.0) break;
        if (mag > prev) return false;
        sum += term;
        prev = mag;
        if (mag < 1e-17 * std::abs(sum)) break;
        if (k == 199) return false;
    }
    out = 0.5 * std::sqrt(2.0 / kPi) * std::exp(cd(0.0, -(nu * kPi / 2.0 + kPi / 4.0))) * sum;
    return true;
}

cd jplus_integral(double nu, double r) {
    const double lg = std::lgamma(nu + 0.5);
    const double upper = std::sqrt(nu + 50.0 + 15.0 * std::sqrt(nu + 1.0));
    auto f = [&](double u) -> cd {
        if (u == 0.0) return nu == 0.0 ? cd(2.0 * std::exp(-lg)) : cd(0.0);
        const double t = u * u;
        const cd log_factor = (nu - 0.5) * std::log(cd(1.0, t / (2.0 * r)));
        return 2.0 * std::exp(2.0 * nu * std::log(u) - t - lg + log_factor);
    };
    const auto res = quad::gauss_kronrod(f, 0.0, upper, 1e-15, 1e-12, 4000);
    return 0.5 * std::sqrt(2.0 / kPi) * std::exp(cd(0.0, -(nu * kPi / 2.0 + kPi / 4.0))) * res.value;
}

double schlafli_j(double nu, double r);
double schlafli_y(double nu, double r);

cd jplus(double nu, double r) {
    cd out;
    if (jplus_expansion(nu, r, out)) return out;
    // The Hankel integrand grows like |1 + i t/2r|^{nu - 1/2} and cancels
    // badly for large orders; use the Schlafli pair there instead.
    if (nu > 60.0) return 0.5 * std::sqrt(r) * std::exp(cd(0.0, -r)) * cd(schlafli_j(nu, r), schlafli_y(nu, r));
    return jplus_integral(nu, r);
}

double asymptotic_j(double nu, double r) {
    const cd jp = jplus(nu, r);
    return 2.0 * (std::exp(cd(0.0, r)) * jp).real() / std::sqrt(r);
}

double schlafli_j(double nu, double r) {
    const int panels = static_cast<int>(std::ceil((nu + r) / 2.0)) + 2;
    const quad::Rule rule = quad::composite(0.0, kPi, panels, 16);
    double first = 0.0;
    for (std::size_t i = 0; i < rule.size(); ++i) {
        const double th = rule.nodes[i];
        first += rule.weights[i] * std::cos(nu * th - r * std::sin(th));
    }
    double second = 0.0;
    const double s = std::sin(nu * kPi);
    if (s != 0.0) {
        const double tmax = std::asinh(45.0 / r);
        const quad::Rule tail = quad::composite(0.0, tmax, 3, 24);
        for (std::size_t i = 0; i < tail.size(); ++i) {
            const double t = tail.nodes[i];
            second += tail.weights[i] * std::exp(-r * std::sinh(t) - nu * t);
        }
    }
    return (first - s * second) / kPi;
}

// Y_nu(r) = (1/pi) int_0^pi sin(r sin th - nu th) dth
//          - (1/pi) int_0^inf (e^{nu t} + e^{-nu t} cos nu pi) e^{-r sinh t} dt.
double schlafli_y(double nu, double r) {
    const int panels = static_cast<int>(std::ceil((nu + r) / 2.0)) + 2;
    const quad::Rule rule = quad::composite(0.0, kPi, panels, 16);
    double first = 0.0;
    for (std::size_t i = 0; i < rule.size(); ++i) {
        const double th = rule.nodes[i];
        first += rule.weights[i] * std::sin(r * std::sin(th) - nu * th);
    }
    // sign nu t - r sinh t is concave; integrate from 0 to where it has fallen
    // 42 below its maximum.
    auto decaying = [&](double sign) {
        auto e = [&](double t) { return sign * nu * t - r * std::sinh(t); };
        const double peak = sign > 0.0 && nu > r ? std::acosh(nu / r) : 0.0;
        double lo = peak, hi = peak + 1.0;
        while (e(hi) > e(peak) - 42.0) hi = peak + 2.0 * (hi - peak);
        for (int it = 0; it < 60; ++it) (e(0.5 * (lo + hi)) > e(peak) - 42.0 ? lo : hi) = 0.5 * (lo + hi);
        quad::Rule tail = quad::composite(0.0, hi, 12, 24);
        double acc = 0.0;
        for (std::size_t i = 0; i < tail.size(); ++i) acc += tail.weights[i] * std::exp(e(tail.nodes[i]));
        return acc;
    };
    const double second = decaying(1.0) + std::cos(nu * kPi) * decaying(-1.0);
    return (first - second) / kPi;
}

// Direct evaluation outside the recurrence region.
double direct_j(double nu, double r, BesselMethod& method) {
    if (series_region(nu, r)) {
        method = BesselMethod::series;
        return static_cast<double>(series_j(nu, r));
    }
    if (r >= std::max(kSeriesRadius, 2.0 * nu)) {
        method = BesselMethod::asymptotic;
        return asymptotic_j(nu, r);
    }
    if (r >= nu) {
        method = BesselMethod::integral;
        return schlafli_j(nu, r);
    }
    method = BesselMethod::recurrence;
    return 0.0;
}

// Miller backward recurrence over orders base + m, m = 0..top; normalized on
// the two lowest orders, which are evaluated directly.
void miller_ladder(double base, double r, int top, double* out) {
    const int start =
        static_cast<int>(std::max<double>(top, r) + 40.0 + 10.0 * std::cbrt(r));
    double p_next = 0.0, p = 1e-30;
    for (int m = start; m > top; --m) {
        const double p_prev = 2.0 * (base + m) / r * p - p_next;
        p_next = p;
        p = p_prev;
        if (std::abs(p) > 1e250) {
            p *= 1e-250;
            p_next *= 1e-250;
        }
    }
    // p now holds order base+top, p_next order base+top+1.
    out[top] = p;
    double cur = p, nxt = p_next;
    for (int m = top; m > 0; --m) {
        const double prev = 2.0 * (base + m) / r * cur - nxt;
        nxt = cur;
        cur = prev;
        out[m - 1] = cur;
        if (std::abs(cur) > 1e250) {
            for (int j = m - 1; j <= top; ++j) out[j] *= 1e-250;
            cur *= 1e-250;
            nxt *= 1e-250;
        }
    }
    BesselMethod tag;
    const double a = direct_j(base, r, tag);
    double A = out[0], B = top >= 1 ? out[1] : nxt;
    const double b = direct_j(base + 1.0, r, tag);
    const double s = std::max(std::abs(A), std::abs(B));
    A /= s;
    B /= s;
    const double scale = (a * A + b * B) / (A * A + B * B) / s;
    for (int m = 0; m <= top; ++m) out[m] *= scale;
}

}  // namespace

const char* to_string(BesselMethod m) {
    switch (m) {
        case BesselMethod::series: return "series";
        case BesselMethod::asymptotic: return "asymptotic";
        case BesselMethod::integral: return "integral";
        case BesselMethod::recurrence: return "recurrence";
    }
    return "unknown";
}

BesselEval bessel_j_eval(double nu, double r) {
    check_domain(nu, r);
    BesselMethod method;
    double value = direct_j(nu, r, method);
    if (method == BesselMethod::recurrence) {
        const double base = nu - std::floor(nu);
        const int top = static_cast<int>(std::floor(nu));
        std::vector<double> ladder(top + 1);
        miller_ladder(base, r, top, ladder.data());
        value = ladder[top];
    }
    return {nu, r, value, method};
}

double bessel_j(double nu, double r) { return bessel_j_eval(nu, r).value; }

void bessel_j_ladder(double nu0, double r, int count, double* out) {
    check_domain(nu0, r);
    if (count <= 0) return;
    if (r == 0.0) {
        for (int m = 0; m < count; ++m) out[m] = (nu0 == 0.0 && m == 0) ? 1.0 : 0.0;
        return;
    }
    const double base = nu0 - std::floor(nu0);
    const int offset = static_cast<int>(std::floor(nu0));
    const int top = offset + count - 1;
    std::vector<double> full(top + 1);
    miller_ladder(base, r, top, full.data());
    std::copy(full.begin() + offset, full.end(), out);
}

std::vector<double> bessel_j_ladder(double nu0, double r, int count) {
    std::vector<double> out(std::max(count, 0));
    bessel_j_ladder(nu0, r, count, out.data());
    return out;
}

double bessel_j_derivative(double nu, double r, int m) {
    check_domain(nu, r);
    if (m < 0) throw DomainError("bessel_j_derivative: order m must be >= 0");
    if (m == 0) return bessel_j(nu, r);
    if (r == 0.0) {
        // Only the power r^{2k+nu} with 2k+nu = m survives; lower non-integer
        // powers make the derivative singular.
        double value = 0.0;
        for (int k = 0; 2.0 * k + nu <= m; ++k) {
            const double e = 2.0 * k + nu;
            double falling = 1.0;
            for (int j = 0; j < m; ++j) falling *= (e - j);
            if (e == m) {
                const double c = (k % 2 ? -1.0 : 1.0) /
                                 (std::pow(2.0, e) * std::tgamma(k + 1.0) * std::tgamma(k + nu + 1.0));
                value += c * falling;
            } else if (falling != 0.0) {
                throw DomainError("bessel_j_derivative: derivative is singular at r = 0");
            }
        }
        return value;
    }
    if (series_region(nu, r)) {
        const long double half = static_cast<long double>(r) / 2.0L;
        const long double x2 = -half * half;
        long double term = std::exp(nu * std::log(half) - std::lgamma(static_cast<long double>(nu) + 1.0L));
        long double sum = 0.0L;
        for (int k = 0; k < 1000; ++k) {
            if (k > 0) term *= x2 / (static_cast<long double>(k) * (k + nu));
            const long double e = 2.0L * k + nu;
            long double falling = 1.0L;
            for (int j = 0; j < m; ++j) falling *= (e - j);
            const long double contrib = term * falling;
            sum += contrib;
            if (k > half + m && std::fabs(contrib) <= 1e-22L * std::fabs(sum)) break;
            if (term == 0.0L) break;
        }
        return static_cast<double>(sum / std::pow(static_cast<long double>(r), m));
    }
    // d/dr [r^{-p} J_{nu+j}] = -p r^{-p-1} J_{nu+j} + r^{-p} ((nu+j)/r J_{nu+j} - J_{nu+j+1}).
    std::vector<std::vector<double>> coef(m + 1, std::vector<double>(m + 1, 0.0));  // [p][j]
    coef[0][0] = 1.0;
    for (int step = 0; step < m; ++step) {
        std::vector<std::vector<double>> next(m + 1, std::vector<double>(m + 1, 0.0));
        for (int p = 0; p <= step; ++p)
            for (int j = 0; j <= step; ++j) {
                const double c = coef[p][j];
                if (c == 0.0) continue;
                next[p + 1][j] += c * (nu + j - p);
                next[p][j + 1] -= c;
            }
        coef = std::move(next);
    }
    double value = 0.0;
    for (int j = 0; j <= m; ++j) {
        double poly = 0.0;
        for (int p = m; p >= 0; --p) poly = poly / r + coef[p][j];
        if (poly != 0.0) value += poly * bessel_j(nu + j, r);
    }
    return value;
}

PhaseDecomposition phase_decompose(double nu, double r) {
    check_domain(nu, r);
    if (r < 1.0) throw DomainError("phase_decompose: requires r >= 1");
    const cd jp = jplus(nu, r);
    return {nu, r, jp, std::conj(jp)};
}

std::complex<double> hankel0_plus(double y) {
    if (!(y > 0.0) || !std::isfinite(y)) throw DomainError("hankel0_plus: requires y > 0");
    if (y < kSeriesRadius) {
        const long double q = static_cast<long double>(y) * y / 4.0L;
        long double term = 1.0L, j0 = 1.0L, harmonic = 0.0L, tail = 0.0L;
        for (int k = 1; k < 200; ++k) {
            term *= -q / (static_cast<long double>(k) * k);
            harmonic += 1.0L / k;
            j0 += term;
            tail -= term * harmonic;
            if (std::fabs(term) * (harmonic + 1.0L) < 1e-24L) break;
        }
        constexpr long double gamma = 0.57721566490153286060651209008240243L;
        const long double y0 =
            (2.0L / std::numbers::pi_v<long double>) * ((std::log(y / 2.0L) + gamma) * j0 + tail);
        return {static_cast<double>(j0), static_cast<double>(y0)};
    }
    return 2.0 * std::exp(cd(0.0, y)) * jplus(0.0, y) / std::sqrt(y);
}

std::complex<double> hankel0_minus(double y) { return std::conj(hankel0_plus(y)); }

}  // namespace conespec::specfun
