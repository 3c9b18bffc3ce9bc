// specfun.hpp — Gauss hypergeometric series for the diffusion coefficient:
//   fbar(x,z) = 2F1(x,1;1+x;z)   = sum_k x z^k / (x+k)
//   gbar(x,z) = 2F1(2,1+x;2+x;z) = sum_k (k+1)(1+x) z^k / (1+x+k)
// Both are evaluated by direct power series, valid for 0 <= z < 1.

#pragma once

#include <cmath>
#include <complex>
#include <cstdint>

#include "qbm/errors.hpp"

namespace qbm {

using Complex = std::complex<double>;

struct SeriesOptions {
    double tol = 1e-14;       // relative truncation target
    std::int64_t k_max = 1000000;
};

namespace detail {

inline bool finite(Complex v) {
    return std::isfinite(v.real()) && std::isfinite(v.imag());
}

inline void check_z(double z) {
    if (!(z >= 0.0) || z >= 1.0 || !std::isfinite(z))
        throw DomainError("specfun: z must lie in [0, 1)");
}

// x within 1e-12 (relative to max(1,|x|)) of a nonpositive integer.
inline bool near_nonpositive_integer(Complex x, double tol = 1e-12) {
    const double n = std::round(x.real());
    if (n > 0.5) return false;
    const double scale = std::max(1.0, std::abs(x));
    return std::abs(x - Complex(n, 0.0)) <= tol * scale;
}

} // namespace detail

inline Complex fbar(Complex x, double z, const SeriesOptions& opt = {}) {
    detail::check_z(z);
    if (!detail::finite(x)) throw DomainError("fbar: nonfinite x");
    if (detail::near_nonpositive_integer(x))
        throw PoleAtNonpositiveInteger("fbar: x at a nonpositive integer");

    Complex sum(0.0, 0.0);
    double zk = 1.0;
    const double tail = (z > 0.0) ? z / (1.0 - z) : 0.0;
    for (std::int64_t k = 0; k < opt.k_max; ++k) {
        const Complex term = x * zk / (x + static_cast<double>(k));
        sum += term;
        // remaining terms are bounded by |term| * z/(1-z) once k >> |x|
        if (std::abs(term) * std::max(tail, 1.0) <= opt.tol * std::abs(sum) &&
            static_cast<double>(k) > std::abs(x))
            return sum;
        zk *= z;
        if (zk == 0.0) return sum;
    }
    throw NoConvergence("fbar: term budget exhausted");
}

inline Complex gbar(Complex x, double z, const SeriesOptions& opt = {}) {
    detail::check_z(z);
    if (!detail::finite(x)) throw DomainError("gbar: nonfinite x");
    if (detail::near_nonpositive_integer(x + 1.0))
        throw PoleAtNonpositiveInteger("gbar: 1+x at a nonpositive integer");

    const Complex xp1 = x + 1.0;
    Complex sum(0.0, 0.0);
    double zk = 1.0;
    for (std::int64_t k = 0; k < opt.k_max; ++k) {
        const Complex term =
            static_cast<double>(k + 1) * xp1 * zk / (xp1 + static_cast<double>(k));
        sum += term;
        // term ratio is z*(k+2)/(k+1) up to an x-dependent factor -> geometric
        // tail bound q/(1-q) once q < 1
        const double q = z * static_cast<double>(k + 2) / static_cast<double>(k + 1);
        if (q < 1.0 &&
            std::abs(term) * std::max(q / (1.0 - q), 1.0) <= opt.tol * std::abs(sum) &&
            static_cast<double>(k) > std::abs(x))
            return sum;
        zk *= z;
        if (zk == 0.0) return sum;
    }
    throw NoConvergence("gbar: term budget exhausted");
}

} // namespace qbm
