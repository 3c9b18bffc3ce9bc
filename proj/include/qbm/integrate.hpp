// integrate.hpp — Adaptive Simpson quadrature and cumulative grid integrals

#pragma once

#include <cmath>
#include <cstddef>
#include <functional>
#include <span>
#include <vector>

#include "qbm/errors.hpp"

namespace qbm {

struct QuadOptions {
    double tol = 1e-10;           // absolute tolerance for the whole interval
    int max_depth = 40;
    std::size_t max_evals = 2000000;
};

namespace detail {

struct SimpsonState {
    const std::function<double(double)>& f;
    const QuadOptions& opt;
    std::size_t evals = 0;

    double recurse(double a, double b, double fa, double fm, double fb,
                   double whole, double tol, int depth) {
        const double m = 0.5 * (a + b);
        const double lm = 0.5 * (a + m);
        const double rm = 0.5 * (m + b);
        if ((evals += 2) > opt.max_evals)
            throw QuadratureFailure("adaptive Simpson: evaluation budget exhausted");
        const double flm = f(lm);
        const double frm = f(rm);
        const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
        const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
        const double delta = left + right - whole;
        if (std::abs(delta) <= 15.0 * tol || depth <= 0) {
            if (depth <= 0 && std::abs(delta) > 15.0 * tol)
                throw QuadratureFailure("adaptive Simpson: depth budget exhausted");
            return left + right + delta / 15.0;
        }
        return recurse(a, m, fa, flm, fm, left, 0.5 * tol, depth - 1) +
               recurse(m, b, fm, frm, fb, right, 0.5 * tol, depth - 1);
    }
};

} // namespace detail

inline double integrate(const std::function<double(double)>& f, double a, double b,
                        const QuadOptions& opt = {}) {
    if (b <= a) return 0.0;
    detail::SimpsonState st{f, opt};
    const double m = 0.5 * (a + b);
    const double fa = f(a), fm = f(m), fb = f(b);
    st.evals = 3;
    const double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    return st.recurse(a, b, fa, fm, fb, whole, opt.tol, opt.max_depth);
}

// Cumulative integral of sampled values on an ascending (possibly non-uniform)
// grid. Each interval is integrated from the quadratic through three
// neighbouring nodes, so the result is second-order accurate like composite
// Simpson but works point-by-point.
inline std::vector<double> cumulative_integral(std::span<const double> t,
                                               std::span<const double> y) {
    const std::size_t n = t.size();
    std::vector<double> out(n, 0.0);
    if (n < 2) return out;
    auto quad_piece = [&](std::size_t i0, std::size_t i1, std::size_t i2,
                          double a, double b) {
        // integrate the Lagrange parabola through (t[i0..i2], y[i0..i2]) over [a,b]
        const double x0 = t[i0], x1 = t[i1], x2 = t[i2];
        auto term = [&](double xi, double xa, double xb, double yi) {
            // int_a^b (x-xa)(x-xb) dx / ((xi-xa)(xi-xb))
            auto prim = [&](double x) {
                return x * x * x / 3.0 - (xa + xb) * x * x / 2.0 + xa * xb * x;
            };
            return yi * (prim(b) - prim(a)) / ((xi - xa) * (xi - xb));
        };
        return term(x0, x1, x2, y[i0]) + term(x1, x0, x2, y[i1]) +
               term(x2, x0, x1, y[i2]);
    };
    for (std::size_t i = 1; i < n; ++i) {
        std::size_t i0 = (i + 1 < n) ? i - 1 : i - 2;
        if (n == 2) {
            out[i] = out[i - 1] + 0.5 * (y[i - 1] + y[i]) * (t[i] - t[i - 1]);
            continue;
        }
        out[i] = out[i - 1] + quad_piece(i0, i0 + 1, i0 + 2, t[i - 1], t[i]);
    }
    return out;
}

} // namespace qbm
