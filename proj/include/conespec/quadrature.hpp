#pragma once

#include <cmath>
#include <complex>
#include <functional>
#include <vector>

#include "conespec/errors.hpp"

namespace conespec::quad {

struct Rule {
    std::vector<double> nodes;
    std::vector<double> weights;

    std::size_t size() const { return nodes.size(); }
    void append(const Rule& other);

    template <class F>
    auto integrate(F&& f) const -> decltype(f(0.0)) {
        decltype(f(0.0)) acc{};
        for (std::size_t i = 0; i < nodes.size(); ++i) acc += weights[i] * f(nodes[i]);
        return acc;
    }
};

// Gauss-Legendre rule on [-1, 1]; cached per order, safe to call concurrently.
const Rule& gauss_legendre(int n);

// n-point Gauss-Legendre mapped to [a, b].
Rule gauss_legendre(int n, double a, double b);

// `panels` equal panels of n points each.
Rule composite(double a, double b, int panels, int n);

// Panels [a, a+h q^levels], ..., [a+h q, a+h] geometrically refined towards a,
// then equal panels of width at most `width` up to b.
Rule graded(double a, double b, double h, double q, int levels, double width, int n);

// Wynn epsilon acceleration of a sequence of partial sums.
template <class T>
class WynnEpsilon {
public:
    void push(T partial_sum);
    T estimate() const { return best_; }
    double error() const { return error_; }
    std::size_t count() const { return count_; }

private:
    std::vector<T> row_;
    T best_{};
    double error_ = INFINITY;
    std::size_t count_ = 0;
};

extern template class WynnEpsilon<double>;
extern template class WynnEpsilon<std::complex<double>>;

// Adaptive Gauss-Kronrod (7/15) with a global error target.
struct AdaptiveResult {
    std::complex<double> value;
    double error;
    int evaluations;
};

AdaptiveResult gauss_kronrod(const std::function<std::complex<double>(double)>& f, double a,
                             double b, double abs_tol, double rel_tol, int max_intervals = 2000);

double gauss_kronrod_real(const std::function<double(double)>& f, double a, double b,
                          double abs_tol, double rel_tol, int max_intervals = 2000);

// Integral of an oscillatory tail over [a, inf): half-period panels with
// Wynn acceleration. Throws QuadratureBudgetExceeded if it fails to settle.
std::complex<double> oscillatory_tail(const std::function<std::complex<double>(double)>& f,
                                      double a, double half_period, double abs_tol,
                                      int max_panels = 400, int points_per_panel = 16);

}  // namespace conespec::quad
