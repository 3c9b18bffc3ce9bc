// coefficients.hpp — Time-dependent master-equation coefficients for quantum
// Brownian motion with an Ohmic / Lorentz-Drude reservoir.
//
// Units: hbar = k_B = 1 and omega_0 = 1 throughout. Times are measured in
// 1/omega_0, rates in omega_0, temperature as theta = kT/omega_0.

#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>
#include <span>
#include <string>
#include <vector>

#include "qbm/errors.hpp"
#include "qbm/integrate.hpp"
#include "qbm/specfun.hpp"

namespace qbm {

inline constexpr double kPi = std::numbers::pi;

// Dimensionless reservoir/system parameters.
struct ReservoirSpec {
    double alpha;  // coupling
    double r;      // omega_c / omega_0
    double theta;  // kT / omega_0

    double r0() const { return 1.0 / (2.0 * kPi * theta); }   // omega_0 / 2 pi kT
    double rc() const { return r / (2.0 * kPi * theta); }     // omega_c / 2 pi kT
    double nu(int n) const { return 2.0 * kPi * n * theta; }  // Matsubara frequency

    bool weak_coupling() const { return alpha <= 0.1; }

    // alpha = 0 is admitted as the exact zero-coupling limit
    void validate() const {
        if (!(alpha >= 0.0) || !std::isfinite(alpha))
            throw DomainError("ReservoirSpec: alpha must be >= 0");
        if (!(r > 0.0) || !std::isfinite(r))
            throw DomainError("ReservoirSpec: r must be > 0");
        if (!(theta > 0.0) || !std::isfinite(theta))
            throw DomainError("ReservoirSpec: theta must be > 0");
    }
};

namespace detail {

// int_0^t e^{-a tau} cos(tau) dtau
inline double exp_cos_integral(double a, double t) {
    return (a + std::exp(-a * t) * (std::sin(t) - a * std::cos(t))) / (a * a + 1.0);
}

// int_0^t e^{-a tau} sin(tau) dtau
inline double exp_sin_integral(double a, double t) {
    return (1.0 - std::exp(-a * t) * (std::cos(t) + a * std::sin(t))) / (a * a + 1.0);
}

} // namespace detail

// Eq.-(13)-style closed form for the dissipation coefficient.
inline double gamma_at(const ReservoirSpec& s, double t) {
    if (t < 0.0) throw DomainError("gamma_at: t must be >= 0");
    const double r = s.r;
    const double e = std::exp(-r * t);
    return s.alpha * s.alpha * r * r / (r * r + 1.0) *
           (1.0 - e * std::cos(t) - r * e * std::sin(t));
}

// Dissipation kernel, 2 alpha^2 omega_c^2 e^{-omega_c tau}.
inline double kernel_mu(const ReservoirSpec& s, double tau) {
    if (tau < 0.0) throw DomainError("kernel_mu: tau must be >= 0");
    return 2.0 * s.alpha * s.alpha * s.r * s.r * std::exp(-s.r * tau);
}

namespace detail {

// Matsubara-sum noise kernel; resonant terms (omega_c near nu_n) evaluated by
// their finite analytic limit so the quadrature fallback works at resonance.
inline double kappa_sum(const ReservoirSpec& s, double tau, int n_matsubara) {
    const double r = s.r;
    const double ec = std::exp(-r * tau);
    double sum = ec / (2.0 * r);  // n = 0 term at its finite limit
    for (int n = 1; n <= n_matsubara; ++n) {
        const double nu = s.nu(n);
        if (std::abs(nu - r) <= 1e-5 * (nu + r)) {
            // lim_{nu->r}: e^{-r tau}(1 - r tau)/(2r), first-order corrected
            sum += ec * (1.0 - r * tau) / (r + nu) -
                   (nu - r) * tau * ec * (2.0 - r * tau) / (2.0 * (r + nu));
        } else {
            sum += (r * ec - nu * std::exp(-nu * tau)) / (r * r - nu * nu);
        }
    }
    return 4.0 * s.alpha * s.alpha * s.theta * r * r * sum;
}

} // namespace detail

// Noise kernel as a symmetric Matsubara sum truncated at |n| <= n_matsubara.
// Normalization is fixed so that int_0^t kappa cos = Delta(t) reproduces the
// closed form and the Markovian limit alpha^2 r^2/(1+r^2) coth(1/2 theta).
inline double kernel_kappa(const ReservoirSpec& s, double tau, int n_matsubara) {
    if (tau < 0.0) throw DomainError("kernel_kappa: tau must be >= 0");
    if (n_matsubara < 1) throw DomainError("kernel_kappa: n_matsubara must be >= 1");
    const double r = s.r;
    for (int n = 1; n <= n_matsubara; ++n) {
        const double nu = s.nu(n);
        if (std::abs(r * r - nu * nu) <= 1e-10 * r * r)
            throw ResonantCutoff("kernel_kappa: omega_c at a Matsubara frequency");
    }
    return detail::kappa_sum(s, tau, n_matsubara);
}

namespace detail {

// Contribution of Matsubara terms with n > n_kept to int_0^t kappa cos.
// Terms are elementary; the 1/n^2 static tail beyond the explicit window is
// summed by Euler-Maclaurin.
inline double delta_matsubara_tail(const ReservoirSpec& s, double t, int n_kept) {
    if (t <= 0.0) return 0.0;
    const double r = s.r;
    const double pref = 4.0 * s.alpha * s.alpha * s.theta * r * r;
    const double er = exp_cos_integral(r, t);

    auto term_full = [&](double n) {
        const double nu = s.nu(1) * n;
        return (r * er - nu * exp_cos_integral(nu, t)) / (r * r - nu * nu);
    };
    // static form: e^{-nu t} pieces dropped
    auto term_static = [&](double n) {
        const double nu = s.nu(1) * n;
        return (r * er - nu * nu / (nu * nu + 1.0)) / (r * r - nu * nu);
    };

    // explicit window until the exponentials are dead
    int m = n_kept;
    const double nu1 = s.nu(1);
    const int m_exp = std::max(n_kept + 16,
                               static_cast<int>(std::ceil(40.0 / (nu1 * t))));
    double sum = 0.0;
    for (; m < m_exp; ) {
        ++m;
        sum += term_full(static_cast<double>(m));
    }
    // a short static stretch before switching to Euler-Maclaurin
    const int m2 = m + 64;
    for (; m < m2; ) {
        ++m;
        sum += term_static(static_cast<double>(m));
    }
    // Euler-Maclaurin: sum_{n>m} f(n) = int_m^inf f - f(m)/2 - f'(m)/12 + ...
    const double M = static_cast<double>(m);
    auto g = [&](double u) {  // f(1/u)/u^2 on u in (0, 1/M]
        const double x = 1.0 / u;
        return term_static(x) * x * x;
    };
    QuadOptions q;
    q.tol = 1e-18 / std::max(pref, 1e-300);
    q.tol = std::max(q.tol, 1e-16);
    double integral = integrate(g, 1e-14, 1.0 / M, q);
    const double fm = term_static(M);
    const double dfm = (term_static(M + 1.0) - term_static(M - 1.0)) / 2.0;
    sum += integral - 0.5 * fm - dfm / 12.0;
    return pref * sum;
}

} // namespace detail

inline int default_n_matsubara(const ReservoirSpec& s, double tau_min = 0.1) {
    const double n = 10.0 / (2.0 * kPi * s.theta * tau_min);
    return std::max(100, static_cast<int>(std::ceil(n)));
}

// Diffusion coefficient by direct quadrature of the Matsubara-sum kernel —
// the independent cross-check for the hypergeometric closed form, and the
// production fallback near t = 0 and at resonant cutoffs.
inline double delta_quad_at(const ReservoirSpec& s, double t,
                            int n_matsubara = 0, double quad_tol = 1e-12) {
    if (t < 0.0) throw DomainError("delta_quad_at: t must be >= 0");
    if (t == 0.0 || s.alpha == 0.0) return 0.0;
    if (n_matsubara <= 0) n_matsubara = default_n_matsubara(s, std::min(t, 0.1));
    QuadOptions opt;
    opt.tol = quad_tol * s.alpha * s.alpha * std::max(1.0, s.theta);
    auto f = [&](double tau) { return detail::kappa_sum(s, tau, n_matsubara) * std::cos(tau); };
    // integrate in sub-oscillation panels so the adaptive rule never straddles
    // more than one period
    double total = 0.0;
    const double panel = std::min(kPi, std::max(0.25 / s.r, 1e-3));
    double a = 0.0;
    int panels = static_cast<int>(std::ceil(t / panel));
    for (int i = 0; i < panels; ++i) {
        const double b = std::min(t, (i + 1) * t / panels);
        QuadOptions po = opt;
        po.tol = opt.tol / panels;
        total += integrate(f, a, b, po);
        a = b;
    }
    return total + detail::delta_matsubara_tail(s, t, n_matsubara);
}

// Quadrature Delta on a whole ascending grid, integrating segment by segment
// so the cost is linear in the grid size.
inline std::vector<double> delta_quad_grid(const ReservoirSpec& s,
                                           std::span<const double> t_grid,
                                           int n_matsubara = 0,
                                           double quad_tol = 1e-12) {
    if (t_grid.empty()) return {};
    if (n_matsubara <= 0) {
        const double t1 = t_grid.front() > 0.0 ? t_grid.front()
                          : (t_grid.size() > 1 ? t_grid[1] : 0.1);
        n_matsubara = default_n_matsubara(s, std::min(t1, 0.1));
    }
    QuadOptions opt;
    opt.tol = quad_tol * s.alpha * s.alpha * std::max(1.0, s.theta) /
              static_cast<double>(t_grid.size());
    auto f = [&](double tau) { return detail::kappa_sum(s, tau, n_matsubara) * std::cos(tau); };
    std::vector<double> out(t_grid.size());
    double acc = 0.0, prev = 0.0;
    for (std::size_t i = 0; i < t_grid.size(); ++i) {
        const double t = t_grid[i];
        if (t < prev) throw DomainError("delta_quad_grid: grid must ascend");
        if (t > prev) {
            // split long segments so no panel straddles more than ~half a period
            const int sub = std::max(1, static_cast<int>(std::ceil((t - prev) / 1.5)));
            for (int k = 0; k < sub; ++k)
                acc += integrate(f, prev + (t - prev) * k / sub,
                                 prev + (t - prev) * (k + 1) / sub, opt);
            prev = t;
        }
        out[i] = acc + (t > 0.0 ? detail::delta_matsubara_tail(s, t, n_matsubara) : 0.0);
    }
    return out;
}

// Pi(t): quadrature of kappa(tau) sin(tau). Diagnostic only.
inline double pi_at(const ReservoirSpec& s, double t, double quad_tol = 1e-10,
                    int n_matsubara = 0) {
    if (t < 0.0) throw DomainError("pi_at: t must be >= 0");
    if (t == 0.0) return 0.0;
    if (n_matsubara <= 0) n_matsubara = default_n_matsubara(s, std::min(t, 0.1));
    QuadOptions opt;
    opt.tol = quad_tol * s.alpha * s.alpha * std::max(1.0, s.theta);
    auto f = [&](double tau) { return detail::kappa_sum(s, tau, n_matsubara) * std::sin(tau); };
    return integrate(f, 0.0, t, opt);
}

// r(t): quadrature of the frequency-renormalization integrand
// 2 mu(tau) cos(tau) with mu = alpha^2 omega_c^2 e^{-omega_c tau}. Diagnostic only.
inline double rshift_at(const ReservoirSpec& s, double t, double quad_tol = 1e-10) {
    if (t < 0.0) throw DomainError("rshift_at: t must be >= 0");
    if (t == 0.0) return 0.0;
    QuadOptions opt;
    opt.tol = quad_tol * s.alpha * s.alpha;
    auto f = [&](double tau) { return kernel_mu(s, tau) * std::cos(tau); };
    return integrate(f, 0.0, t, opt);
}

// Caldeira-Leggett high-temperature form of Delta(t).
inline double delta_high_t_at(const ReservoirSpec& s, double t) {
    if (t < 0.0) throw DomainError("delta_high_t_at: t must be >= 0");
    const double r = s.r;
    const double e = std::exp(-r * t);
    return 2.0 * s.alpha * s.alpha * s.theta * r * r / (1.0 + r * r) *
           (1.0 - e * (std::cos(t) - std::sin(t) / r));
}

// Stationary (Markovian) values (Delta_M, gamma_M).
inline std::pair<double, double> markov_limits(const ReservoirSpec& s) {
    const double g = s.alpha * s.alpha * s.r * s.r / (1.0 + s.r * s.r);
    return {g / std::tanh(1.0 / (2.0 * s.theta)), g};
}

struct ClosedFormOptions {
    double z_max = 0.999;          // above this, callers must use quadrature
    double rc_resonance_tol = 1e-6;
    double imag_residue_tol = 1e-10;
};

// Closed-form Delta(t) from the hypergeometric series representation.
//
// The sin(t) bracket differs from the printed source in two places, fixed so
// all four regimes agree with the quadrature route: the gbar arguments are
// -+ i r0 (not -+ r0) and neither denominator carries a factor 2.
inline double delta_closed_at(const ReservoirSpec& s, double t,
                              const ClosedFormOptions& opt = {}) {
    if (t < 0.0) throw DomainError("delta_closed_at: t must be >= 0");
    const double r = s.r, r0 = s.r0(), rc = s.rc();
    if (std::abs(rc - std::round(rc)) < opt.rc_resonance_tol && std::round(rc) >= 1.0)
        throw ResonantCutoff("delta_closed_at: rc at a positive integer");
    const double z = std::exp(-s.nu(1) * t);
    if (z > opt.z_max)
        throw DomainError("delta_closed_at: z too close to 1, use quadrature");

    const Complex i(0.0, 1.0);
    const Complex f_mrc = fbar(Complex(-rc, 0.0), z);
    const Complex f_prc = fbar(Complex(rc, 0.0), z);
    const Complex f_pir = fbar(i * r0, z);
    const Complex f_mir = std::conj(f_pir);  // real series coefficients
    const Complex g_pir = gbar(i * r0, z);
    const Complex g_mir = std::conj(g_pir);

    const double pref = s.alpha * s.alpha * r * r / (1.0 + r * r);
    const double ert = std::exp(-r * t);
    const Complex cos_bracket = f_mrc + f_prc - f_pir - f_mir;
    const Complex sin_bracket =
        z / (r0 * (1.0 + r0 * r0)) * ((r0 - i) * g_mir + (r0 + i) * g_pir) +
        (f_mrc - f_prc) / rc;

    const Complex value =
        1.0 / std::tanh(kPi * r0) -
        std::cos(kPi * rc) / std::sin(kPi * rc) * ert * (r * std::cos(t) - std::sin(t)) +
        std::cos(t) / (kPi * r0) * cos_bracket - std::sin(t) / kPi * sin_bracket;

    const double scale = std::max(std::abs(value), 1.0);
    if (std::abs(value.imag()) > opt.imag_residue_tol * scale)
        throw NoConvergence("delta_closed_at: nonreal result");
    return pref * value.real();
}

// Closed form where valid, quadrature otherwise.
inline double delta_at(const ReservoirSpec& s, double t,
                       const ClosedFormOptions& opt = {}) {
    if (t == 0.0 || s.alpha == 0.0) return 0.0;
    const double rc = s.rc();
    const bool resonant = std::abs(rc - std::round(rc)) < 1e-3 && std::round(rc) >= 1.0;
    const double z = std::exp(-s.nu(1) * t);
    if (resonant || z > opt.z_max) return delta_quad_at(s, t);
    return delta_closed_at(s, t, opt);
}

// Coefficients and their running integrals on a fixed time grid.
struct CoefficientGrid {
    std::vector<double> t;
    std::vector<double> delta, gamma, pi_coef, rshift;
    std::vector<double> big_gamma;        // Gamma(t) = 2 int gamma
    std::vector<double> delta_big_gamma;  // e^{-Gamma} int e^{Gamma} Delta
    std::vector<double> i_plus, i_minus;  // int (Delta +- gamma)
    std::vector<std::string> warnings;

    std::size_t size() const { return t.size(); }
    double t_max() const { return t.empty() ? 0.0 : t.back(); }

    std::size_t bracket(double tq) const {
        if (t.empty() || tq < t.front() - 1e-12 || tq > t.back() + 1e-12)
            throw OutOfGrid("time outside grid range");
        auto it = std::upper_bound(t.begin(), t.end(), tq);
        std::size_t hi = static_cast<std::size_t>(it - t.begin());
        if (hi == 0) return 0;
        if (hi >= t.size()) return t.size() - 2;
        return hi - 1;
    }

    double interp(std::span<const double> y, double tq) const {
        const std::size_t i = bracket(tq);
        if (t.size() == 1) return y[0];
        const double w = (tq - t[i]) / (t[i + 1] - t[i]);
        return y[i] * (1.0 - w) + y[i + 1] * w;
    }

    double gamma_cum(double tq) const { return interp(big_gamma, tq); }
    double delta_gamma_cum(double tq) const { return interp(delta_big_gamma, tq); }
    double i_minus_at(double tq) const { return interp(i_minus, tq); }
    double i_plus_at(double tq) const { return interp(i_plus, tq); }
    double delta_at_t(double tq) const { return interp(delta, tq); }
    double gamma_at_t(double tq) const { return interp(gamma, tq); }
};

struct GridOptions {
    bool with_diagnostics = false;  // fill pi_coef / rshift
    ClosedFormOptions closed;
    double quad_tol = 1e-12;
};

inline CoefficientGrid build_grid(const ReservoirSpec& s,
                                  std::vector<double> t_grid,
                                  const GridOptions& opt = {}) {
    s.validate();
    if (t_grid.empty() || t_grid.front() != 0.0)
        throw DomainError("build_grid: grid must start at t = 0");
    for (std::size_t i = 1; i < t_grid.size(); ++i)
        if (!(t_grid[i] > t_grid[i - 1]))
            throw DomainError("build_grid: grid must be strictly ascending");

    CoefficientGrid g;
    g.t = std::move(t_grid);
    const std::size_t n = g.t.size();

    double max_step = 0.0;
    for (std::size_t i = 1; i < n; ++i) max_step = std::max(max_step, g.t[i] - g.t[i - 1]);
    const double step_limit = std::min(1.0 / s.r, 1.0) / 20.0;
    if (max_step > step_limit)
        g.warnings.push_back("grid spacing " + std::to_string(max_step) +
                             " exceeds advisory limit " + std::to_string(step_limit));

    const double rc = s.rc();
    if (std::abs(rc - std::round(rc)) < 1e-3 && std::round(rc) >= 1.0)
        g.warnings.push_back("resonant cutoff (rc near integer): Delta via quadrature");
    if (!s.weak_coupling())
        g.warnings.push_back("alpha > 0.1: second-order coefficients are advisory");

    g.delta.resize(n);
    g.gamma.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        g.delta[i] = delta_at(s, g.t[i], opt.closed);
        g.gamma[i] = gamma_at(s, g.t[i]);
    }
    if (opt.with_diagnostics) {
        g.pi_coef.resize(n);
        g.rshift.resize(n);
        for (std::size_t i = 0; i < n; ++i) {
            g.pi_coef[i] = pi_at(s, g.t[i]);
            g.rshift[i] = rshift_at(s, g.t[i]);
        }
    } else {
        g.pi_coef.assign(n, 0.0);
        g.rshift.assign(n, 0.0);
    }

    std::vector<double> gamma2(n);
    for (std::size_t i = 0; i < n; ++i) gamma2[i] = 2.0 * g.gamma[i];
    g.big_gamma = cumulative_integral(g.t, gamma2);

    std::vector<double> dp(n), dm(n), eg_delta(n);
    for (std::size_t i = 0; i < n; ++i) {
        dp[i] = g.delta[i] + g.gamma[i];
        dm[i] = g.delta[i] - g.gamma[i];
        eg_delta[i] = std::exp(g.big_gamma[i]) * g.delta[i];
    }
    g.i_plus = cumulative_integral(g.t, dp);
    g.i_minus = cumulative_integral(g.t, dm);
    auto cum = cumulative_integral(g.t, eg_delta);
    g.delta_big_gamma.resize(n);
    for (std::size_t i = 0; i < n; ++i)
        g.delta_big_gamma[i] = std::exp(-g.big_gamma[i]) * cum[i];
    return g;
}

// Uniform grid helper: n points from 0 to t_max inclusive.
inline std::vector<double> linspace_grid(double t_max, std::size_t n) {
    if (n < 2 || !(t_max > 0.0)) throw DomainError("linspace_grid: bad arguments");
    std::vector<double> t(n);
    for (std::size_t i = 0; i < n; ++i)
        t[i] = t_max * static_cast<double>(i) / static_cast<double>(n - 1);
    return t;
}

// 0 followed by n-1 log-spaced points ending at t_max.
inline std::vector<double> logspace_grid(double t_max, std::size_t n,
                                         double t_min_ratio = 1e-6) {
    if (n < 3 || !(t_max > 0.0)) throw DomainError("logspace_grid: bad arguments");
    std::vector<double> t(n);
    t[0] = 0.0;
    const double lo = std::log(t_max * t_min_ratio), hi = std::log(t_max);
    for (std::size_t i = 1; i < n; ++i)
        t[i] = std::exp(lo + (hi - lo) * static_cast<double>(i - 1) /
                                 static_cast<double>(n - 2));
    t.back() = t_max;
    return t;
}

} // namespace qbm
