// border.hpp — classify reservoir parameter points as Lindblad-type vs
// non-Lindblad-type and map the border in the (r, t) plane, including the
// high-temperature critical cutoff ratio near r = 0.27.

#pragma once

#include <cmath>
#include <functional>
#include <limits>
#include <string>
#include <vector>

#include "qbm/coefficients.hpp"
#include "qbm/errors.hpp"

namespace qbm {

enum class DynamicsType { LindbladType, NonLindbladType };

inline std::string to_string(DynamicsType t) {
    return t == DynamicsType::LindbladType ? "lindblad-type" : "non-lindblad-type";
}

enum class SignQuantity { Delta, DeltaMinusGamma, DeltaPlusGamma };

struct SignProfile {
    SignQuantity quantity;
    std::vector<std::pair<double, double>> negative_intervals;
    double horizon;
};

inline double default_horizon(const ReservoirSpec& s) {
    return std::max(20.0 / s.r, 20.0 * 2.0 * kPi);
}

namespace detail {

// Negative intervals of f on [0, horizon]: dense-grid sign scan, endpoints
// refined by bisection.
inline std::vector<std::pair<double, double>> negative_intervals_of(
    const std::function<double(double)>& f, double horizon, int n_points,
    double t_tol = 1e-8) {
    std::vector<std::pair<double, double>> out;
    auto refine = [&](double lo, double hi) {
        // f changes sign in (lo, hi); return the crossing
        double flo = f(lo);
        while (hi - lo > t_tol) {
            const double mid = 0.5 * (lo + hi);
            if ((f(mid) < 0.0) == (flo < 0.0)) { lo = mid; flo = f(mid); }
            else hi = mid;
        }
        return 0.5 * (lo + hi);
    };
    const double h = horizon / n_points;
    double t_prev = 0.0, f_prev = f(0.0);
    double open_start = f_prev < 0.0 ? 0.0 : -1.0;
    for (int i = 1; i <= n_points; ++i) {
        const double t = i * h;
        const double ft = f(t);
        if ((ft < 0.0) != (f_prev < 0.0)) {
            const double tc = refine(t_prev, t);
            if (ft < 0.0) open_start = tc;
            else { out.emplace_back(open_start, tc); open_start = -1.0; }
        }
        t_prev = t;
        f_prev = ft;
    }
    if (open_start >= 0.0) out.emplace_back(open_start, horizon);
    return out;
}

} // namespace detail

inline std::vector<SignProfile> sign_profile(const ReservoirSpec& s,
                                             double horizon = 0.0,
                                             int n_points = 2000) {
    s.validate();
    if (horizon <= 0.0) horizon = default_horizon(s);
    if (n_points < 1000) n_points = 1000;
    auto grid = build_grid(s, linspace_grid(horizon, n_points + 1));
    auto d = [&](double t) { return grid.delta_at_t(t); };
    auto dm = [&](double t) { return grid.delta_at_t(t) - grid.gamma_at_t(t); };
    auto dp = [&](double t) { return grid.delta_at_t(t) + grid.gamma_at_t(t); };
    // sign scan on the grid itself; bisection then refines on the interpolant
    return {
        {SignQuantity::Delta,
         detail::negative_intervals_of(d, horizon, n_points), horizon},
        {SignQuantity::DeltaMinusGamma,
         detail::negative_intervals_of(dm, horizon, n_points), horizon},
        {SignQuantity::DeltaPlusGamma,
         detail::negative_intervals_of(dp, horizon, n_points), horizon},
    };
}

// Lindblad-type iff both Delta - gamma and Delta + gamma stay nonnegative.
inline DynamicsType classify(const ReservoirSpec& s, double horizon = 0.0) {
    auto profiles = sign_profile(s, horizon);
    const bool bad = !profiles[1].negative_intervals.empty() ||
                     !profiles[2].negative_intervals.empty();
    return bad ? DynamicsType::NonLindbladType : DynamicsType::LindbladType;
}

// Normalized high-temperature diffusion field Delta^HT / (2 alpha^2 theta):
// depends on r and t only.
inline double delta_bar_high_t(double r, double t) {
    const double e = std::exp(-r * t);
    return r * r / (1.0 + r * r) * (1.0 - e * (std::cos(t) - std::sin(t) / r));
}

inline double min_delta_bar(double r, double horizon, int n_points = 4000) {
    double m = 0.0;
    for (int i = 1; i <= n_points; ++i)
        m = std::min(m, delta_bar_high_t(r, horizon * i / n_points));
    return m;
}

// Largest r for which the normalized high-T Delta dips negative; bisection on
// the indicator min_t Delta_bar < 0.
inline double critical_r_high_t(double horizon = 50.0, double tol_r = 1e-3) {
    double lo = 0.1, hi = 1.0;  // negative excursion at r = 0.1, none at r = 1
    if (!(min_delta_bar(lo, horizon) < 0.0) || min_delta_bar(hi, horizon) < 0.0)
        throw BracketFailure("critical_r_high_t: bracket endpoints invalid");
    while (hi - lo > tol_r) {
        const double mid = 0.5 * (lo + hi);
        if (min_delta_bar(mid, horizon) < 0.0) lo = mid; else hi = mid;
    }
    return 0.5 * (lo + hi);
}

enum class ContourRegime { HighT, General };

struct ContourGrid {
    std::vector<double> r_axis;
    std::vector<double> t_axis;               // in omega_c t units
    std::vector<std::vector<double>> values;  // values[i][j] at (r_i, t_j)
};

// Sign-landscape matrices over (r, t). HighT: Delta_bar(r, t), temperature-independent.
// General: (Delta - gamma)/alpha^2 at fixed 2 pi r_c (theta recomputed per r).
inline ContourGrid contour_grid(ContourRegime regime, double r_min, double r_max,
                                double t_max_wc, int n_r, int n_t,
                                double alpha = 0.1, double rc_times_2pi = 10.0) {
    if (n_r < 2 || n_t < 2 || !(r_min > 0.0) || !(r_max > r_min) || !(t_max_wc > 0.0))
        throw DomainError("contour_grid: bad axes");
    ContourGrid g;
    g.r_axis.resize(n_r);
    g.t_axis.resize(n_t);
    for (int i = 0; i < n_r; ++i)
        g.r_axis[i] = r_min + (r_max - r_min) * i / (n_r - 1);
    for (int j = 0; j < n_t; ++j)
        g.t_axis[j] = t_max_wc * j / (n_t - 1);
    g.values.assign(n_r, std::vector<double>(n_t, 0.0));
    for (int i = 0; i < n_r; ++i) {
        const double r = g.r_axis[i];
        if (regime == ContourRegime::HighT) {
            for (int j = 0; j < n_t; ++j)
                g.values[i][j] = delta_bar_high_t(r, g.t_axis[j] / r);
        } else {
            ReservoirSpec s{alpha, r, r / rc_times_2pi};
            const double t_max = t_max_wc / r;
            auto grid = build_grid(s, linspace_grid(t_max, std::max(2 * n_t, 400)));
            for (int j = 0; j < n_t; ++j) {
                const double t = g.t_axis[j] / r;
                g.values[i][j] =
                    (grid.delta_at_t(t) - grid.gamma_at_t(t)) / (alpha * alpha);
            }
        }
    }
    return g;
}

// Border polyline: for each r, the first time the field goes negative (NaN
// when it never does).
inline std::vector<std::pair<double, double>> zero_contour(const ContourGrid& g) {
    std::vector<std::pair<double, double>> out;
    for (std::size_t i = 0; i < g.r_axis.size(); ++i) {
        double tc = std::numeric_limits<double>::quiet_NaN();
        for (std::size_t j = 1; j < g.t_axis.size(); ++j) {
            if (g.values[i][j] < 0.0 && g.values[i][j - 1] >= 0.0) {
                const double f0 = g.values[i][j - 1], f1 = g.values[i][j];
                const double w = f0 / (f0 - f1);
                tc = g.t_axis[j - 1] + w * (g.t_axis[j] - g.t_axis[j - 1]);
                break;
            }
        }
        out.emplace_back(g.r_axis[i], tc);
    }
    return out;
}

} // namespace qbm
