#include "conespec/quadrature.hpp"

#include <algorithm>
#include <map>
#include <memory>
#include <mutex>
#include <numbers>
#include <queue>

namespace conespec::quad {

void Rule::append(const Rule& other) {
    nodes.insert(nodes.end(), other.nodes.begin(), other.nodes.end());
    weights.insert(weights.end(), other.weights.begin(), other.weights.end());
}

namespace {

Rule compute_gauss_legendre(int n) {
    Rule rule;
    if (n == 1) return Rule{{0.0}, {2.0}};
    rule.nodes.resize(n);
    rule.weights.resize(n);
    const int half = (n + 1) / 2;
    for (int i = 0; i < half; ++i) {
        double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
        double dp = 0.0;
        for (int iter = 0; iter < 100; ++iter) {
            double p0 = 1.0, p1 = x;
            for (int k = 2; k <= n; ++k) {
                const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
                p0 = p1;
                p1 = p2;
            }
            dp = n * (x * p1 - p0) / (x * x - 1.0);
            const double dx = p1 / dp;
            x -= dx;
            if (std::abs(dx) < 1e-16) break;
        }
        double p0 = 1.0, p1 = x;
        for (int k = 2; k <= n; ++k) {
            const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
            p0 = p1;
            p1 = p2;
        }
        dp = n * (x * p1 - p0) / (x * x - 1.0);
        const double w = 2.0 / ((1.0 - x * x) * dp * dp);
        rule.nodes[i] = -x;
        rule.nodes[n - 1 - i] = x;
        rule.weights[i] = w;
        rule.weights[n - 1 - i] = w;
    }
    if (n % 2 == 1) rule.nodes[n / 2] = 0.0;
    return rule;
}

}  // namespace

const Rule& gauss_legendre(int n) {
    if (n < 1) throw DomainError("gauss_legendre: n must be positive");
    static std::mutex mutex;
    static std::map<int, std::unique_ptr<Rule>> cache;
    std::lock_guard<std::mutex> lock(mutex);
    auto& slot = cache[n];
    if (!slot) slot = std::make_unique<Rule>(compute_gauss_legendre(n));
    return *slot;
}

Rule gauss_legendre(int n, double a, double b) {
    const Rule& base = gauss_legendre(n);
    Rule rule;
    rule.nodes.resize(n);
    rule.weights.resize(n);
    const double c = 0.5 * (a + b), h = 0.5 * (b - a);
    for (int i = 0; i < n; ++i) {
        rule.nodes[i] = c + h * base.nodes[i];
        rule.weights[i] = h * base.weights[i];
    }
    return rule;
}

Rule composite(double a, double b, int panels, int n) {
    Rule rule;
    rule.nodes.reserve(static_cast<std::size_t>(panels) * n);
    rule.weights.reserve(static_cast<std::size_t>(panels) * n);
    const double h = (b - a) / panels;
    for (int p = 0; p < panels; ++p) rule.append(gauss_legendre(n, a + p * h, a + (p + 1) * h));
    return rule;
}

Rule graded(double a, double b, double h, double q, int levels, double width, int n) {
    Rule rule;
    h = std::min(h, b - a);
    double lo = a;
    for (int l = levels; l >= 1; --l) {
        const double hi = a + h * std::pow(q, l - 1);
        rule.append(gauss_legendre(n, lo, hi));
        lo = hi;
    }
    if (b > lo) {
        const int panels = std::max(1, static_cast<int>(std::ceil((b - lo) / width)));
        rule.append(composite(lo, b, panels, n));
    }
    return rule;
}

template <class T>
void WynnEpsilon<T>::push(T s) {
    ++count_;
    std::vector<T> next;
    next.reserve(row_.size() + 1);
    next.push_back(s);
    for (std::size_t k = 1; k <= row_.size(); ++k) {
        const T diff = next[k - 1] - row_[k - 1];
        if (std::abs(diff) == 0.0) break;
        const T prev2 = k >= 2 ? row_[k - 2] : T{};
        next.push_back(prev2 + T(1.0) / diff);
    }
    // Even columns hold the accelerated estimates.
    best_ = s;
    error_ = row_.empty() ? INFINITY : std::abs(s - row_[0]);
    for (std::size_t k = 2; k < next.size(); k += 2) {
        double err = std::abs(next[k] - next[k - 2]);
        if (k < row_.size()) err += std::abs(next[k] - row_[k]);
        else err = INFINITY;
        if (std::isfinite(std::abs(next[k])) && err <= error_) {
            error_ = err;
            best_ = next[k];
        }
    }
    if (next.size() > 40) next.resize(40);
    row_ = std::move(next);
}

template class WynnEpsilon<double>;
template class WynnEpsilon<std::complex<double>>;

namespace {

constexpr double kXgk[8] = {0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
                            0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
                            0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
                            0.207784955007898467600689403773245, 0.000000000000000000000000000000000};
constexpr double kWgk[8] = {0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
                            0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
                            0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
                            0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
constexpr double kWg[4] = {0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
                           0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

struct Segment {
    double a, b;
    std::complex<double> value;
    double error;
    bool operator<(const Segment& o) const { return error < o.error; }
};

Segment kronrod15(const std::function<std::complex<double>(double)>& f, double a, double b) {
    const double c = 0.5 * (a + b), h = 0.5 * (b - a);
    const std::complex<double> fc = f(c);
    std::complex<double> k = fc * kWgk[7];
    std::complex<double> g = fc * kWg[3];
    for (int j = 0; j < 7; ++j) {
        const double dx = h * kXgk[j];
        const std::complex<double> s = f(c - dx) + f(c + dx);
        k += kWgk[j] * s;
        if (j % 2 == 1) g += kWg[j / 2] * s;
    }
    const double err = std::abs((k - g) * h);
    return {a, b, k * h, err};
}

}  // namespace

AdaptiveResult gauss_kronrod(const std::function<std::complex<double>(double)>& f, double a,
                             double b, double abs_tol, double rel_tol, int max_intervals) {
    std::priority_queue<Segment> heap;
    Segment first = kronrod15(f, a, b);
    std::complex<double> total = first.value;
    double err = first.error;
    heap.push(first);
    int evals = 15;
    while (err > std::max(abs_tol, rel_tol * std::abs(total))) {
        if (static_cast<int>(heap.size()) >= max_intervals)
            throw QuadratureBudgetExceeded("gauss_kronrod: interval budget exhausted");
        Segment worst = heap.top();
        heap.pop();
        const double mid = 0.5 * (worst.a + worst.b);
        Segment left = kronrod15(f, worst.a, mid);
        Segment right = kronrod15(f, mid, worst.b);
        evals += 30;
        total += left.value + right.value - worst.value;
        err += left.error + right.error - worst.error;
        heap.push(left);
        heap.push(right);
    }
    // Recompute the sums to shed accumulated rounding in the running totals.
    std::complex<double> sum = 0.0;
    double esum = 0.0;
    while (!heap.empty()) {
        sum += heap.top().value;
        esum += heap.top().error;
        heap.pop();
    }
    return {sum, esum, evals};
}

double gauss_kronrod_real(const std::function<double(double)>& f, double a, double b,
                          double abs_tol, double rel_tol, int max_intervals) {
    auto res = gauss_kronrod([&](double x) { return std::complex<double>(f(x), 0.0); }, a, b,
                             abs_tol, rel_tol, max_intervals);
    return res.value.real();
}

std::complex<double> oscillatory_tail(const std::function<std::complex<double>(double)>& f,
                                      double a, double half_period, double abs_tol,
                                      int max_panels, int points_per_panel) {
    const Rule& base = gauss_legendre(points_per_panel);
    WynnEpsilon<std::complex<double>> wynn;
    std::complex<double> partial = 0.0;
    int small_run = 0;
    for (int p = 0; p < max_panels; ++p) {
        const double lo = a + p * half_period;
        const double c = lo + 0.5 * half_period, h = 0.5 * half_period;
        std::complex<double> panel = 0.0;
        for (std::size_t i = 0; i < base.size(); ++i) panel += base.weights[i] * f(c + h * base.nodes[i]);
        panel *= h;
        partial += panel;
        wynn.push(partial);
        small_run = std::abs(panel) < 1e-3 * abs_tol ? small_run + 1 : 0;
        if (small_run >= 3) return partial;
        if (p >= 8 && wynn.error() < abs_tol) return wynn.estimate();
    }
    if (wynn.error() < 100.0 * abs_tol) return wynn.estimate();
    throw QuadratureBudgetExceeded("oscillatory_tail: extrapolation did not settle");
}

}  // namespace conespec::quad
