// analytic.hpp — exact secular-approximation observables of the damped
// harmonic oscillator: heating function, position variance, Mandel Q,
// Gaussian Wigner function, and the quantum characteristic function.

#pragma once

#include <cmath>
#include <complex>
#include <functional>

#include "qbm/coefficients.hpp"
#include "qbm/errors.hpp"

namespace qbm {

inline double thermal_n(const ReservoirSpec& s) {
    if (!(s.theta > 0.0)) throw DomainError("thermal_n: theta must be > 0");
    return 1.0 / std::expm1(1.0 / s.theta);
}

// Initial-state data for the Gaussian observables: mean quantum number n0,
// Mandel parameter q0 = Q(0), quadrature variances/covariance of the
// dimensionless X, P, and the coherent amplitude (zero when not applicable).
struct InitialStateMoments {
    double n0 = 0.0;
    double q0 = 0.0;
    double var_x0 = 0.5;
    double var_p0 = 0.5;
    double cov0 = 0.0;
    Complex center{0.0, 0.0};

    void validate() const {
        if (n0 < 0.0) throw DomainError("InitialStateMoments: n0 must be >= 0");
        if (q0 < -1.0) throw DomainError("InitialStateMoments: q0 must be >= -1");
        if (!(var_x0 > 0.0) || !(var_p0 > 0.0))
            throw DomainError("InitialStateMoments: variances must be > 0");
        if (var_x0 * var_p0 - cov0 * cov0 < 0.25 - 1e-12)
            throw DomainError("InitialStateMoments: uncertainty relation violated");
    }

    static InitialStateMoments ground() { return {}; }

    static InitialStateMoments fock(int n) {
        if (n < 0) throw DomainError("fock: n must be >= 0");
        return {static_cast<double>(n), n == 0 ? 0.0 : -1.0,
                n + 0.5, n + 0.5, 0.0, {0.0, 0.0}};
    }

    static InitialStateMoments coherent(Complex alpha0) {
        return {std::norm(alpha0), 0.0, 0.5, 0.5, 0.0, alpha0};
    }

    // Squeezed vacuum with (DX)^2_0 = s/2, (DP)^2_0 = 1/(2s), s = e^{-2 xi}.
    static InitialStateMoments squeezed(double s) {
        if (!(s > 0.0)) throw DomainError("squeezed: s must be > 0");
        const double c2 = 0.5 * (s + 1.0 / s);        // cosh(2 xi)
        return {0.5 * (c2 - 1.0), c2, 0.5 * s, 0.5 / s, 0.0, {0.0, 0.0}};
    }
};

// <n(t)> = e^{-Gamma} n0 + (e^{-Gamma} - 1)/2 + Delta_Gamma.
inline double heating_at(const CoefficientGrid& g, double n0, double t) {
    const double eg = std::exp(-g.gamma_cum(t));
    return eg * n0 + 0.5 * (eg - 1.0) + g.delta_gamma_cum(t);
}

// Markovian heating with constant asymptotic rates.
inline double heating_markov(const ReservoirSpec& s, double n0, double t) {
    if (t < 0.0) throw DomainError("heating_markov: t must be >= 0");
    const double gbar = s.alpha * s.alpha * s.r * s.r / (1.0 + s.r * s.r);
    const double nbar = thermal_n(s);
    const double e = std::exp(-gbar * t);
    return e * n0 + nbar * (1.0 - e);
}

// Weak-coupling short-time heating from the ground state: I_-(t).
inline double heating_short_time(const CoefficientGrid& g, double t) {
    return g.i_minus_at(t);
}

// (DX)^2(t) for a Gaussian initial state.
inline double position_variance_at(const CoefficientGrid& g,
                                   const InitialStateMoments& m, double t) {
    const double eg = std::exp(-g.gamma_cum(t));
    const double c = std::cos(t), s = std::sin(t);
    return eg * (m.var_x0 * c * c + m.var_p0 * s * s + m.cov0 * std::sin(2.0 * t)) +
           g.delta_gamma_cum(t);
}

// Mandel Q parameter, Q(t) = [<n>^2 + e^{-2 Gamma} n0 (q0 - n0)] / <n>.
inline double mandel_q_at(const CoefficientGrid& g, double n0, double q0,
                          double t) {
    const double n = heating_at(g, n0, t);
    if (!(std::abs(n) >= 1e-300))
        throw DegenerateState("mandel_q_at: <n(t)> vanishes");
    const double e2 = std::exp(-2.0 * g.gamma_cum(t));
    return (n * n + e2 * n0 * (q0 - n0)) / n;
}

// Gaussian Wigner function of an initially coherent state: isotropic Gaussian
// of width Delta_Gamma + 1/2 tracking the damped classical orbit.
struct GaussianWigner {
    Complex center;
    double width;

    double operator()(Complex a) const {
        return std::exp(-std::norm(center - a) / width) / (kPi * width);
    }
};

inline GaussianWigner wigner_coherent(const CoefficientGrid& g, Complex alpha0,
                                      double t) {
    GaussianWigner w;
    w.center = alpha0 * std::exp(-0.5 * g.gamma_cum(t)) * std::exp(Complex(0.0, -t));
    w.width = g.delta_gamma_cum(t) + 0.5;
    if (!(w.width > 0.0))
        throw DegenerateState("wigner_coherent: nonpositive width");
    return w;
}

using Chi0 = std::function<Complex(double, double)>;

// Quantum characteristic function at time t: the initial QCF evaluated at the
// rotated, e^{-Gamma/2}-damped argument, times the Gaussian thermalization
// factor e^{-Delta_Gamma (x^2 + p^2)/2}.
inline Complex qcf_at(const CoefficientGrid& g, const Chi0& chi0, double t,
                      double x, double p) {
    const double big_g = g.gamma_cum(t);
    const double dg = g.delta_gamma_cum(t);
    const double c = std::cos(t), s = std::sin(t);
    const double xt = x * c + p * s;
    const double pt = -x * s + p * c;
    const double damp = std::exp(-0.5 * big_g);
    return std::exp(-0.5 * dg * (x * x + p * p)) * chi0(damp * xt, damp * pt);
}

// Thermal-state initial QCF at occupation nbar, for cross-checks.
inline Chi0 thermal_chi0(double nbar) {
    return [nbar](double x, double p) {
        return Complex(std::exp(-0.5 * (nbar + 0.5) * (x * x + p * p)), 0.0);
    };
}

} // namespace qbm
