// nmwf.hpp — non-Markovian wave-function Monte Carlo in the doubled Hilbert
// space: exact diagonal drift, two jump channels with sign flips for negative
// rates, waiting-time sampling by inversion, beta scaling, and an ensemble
// runner with per-trajectory RNG streams and deterministic reduction.

#pragma once

#include <cmath>
#include <complex>
#include <cstdint>
#include <optional>
#include <random>
#include <thread>
#include <vector>

#include "qbm/coefficients.hpp"
#include "qbm/errors.hpp"

namespace qbm {

// Pair of stochastic state vectors in the Fock basis.
struct DoubledState {
    std::vector<Complex> phi;
    std::vector<Complex> psi;
    double t = 0.0;
    // ln(||theta||^2 / 2): the PDP drift conserves the doubled norm only while
    // Delta -+ gamma >= 0; through negative stretches the norm grows and that
    // growth is the statistical weight of the trajectory. The stored pair is
    // kept at ||theta||^2 = 2 and the weight is carried here instead.
    double log_weight = 0.0;

    double weight() const { return std::exp(log_weight); }

    int n_max() const { return static_cast<int>(phi.size()) - 1; }

    double norm2() const {
        double s = 0.0;
        for (std::size_t i = 0; i < phi.size(); ++i)
            s += std::norm(phi[i]) + std::norm(psi[i]);
        return s;
    }

    void renormalize() {
        const double n2 = norm2();
        if (!(n2 > 0.0)) throw DegenerateState("renormalize: zero state");
        const double f = std::sqrt(2.0 / n2);
        for (auto& c : phi) c *= f;
        for (auto& c : psi) c *= f;
    }

    double truncation_mass() const {
        const std::size_t n = phi.size();
        if (n < 2) return 0.0;
        return std::norm(phi[n - 1]) + std::norm(psi[n - 1]) +
               std::norm(phi[n - 2]) + std::norm(psi[n - 2]);
    }

    // <psi| n |phi> with the doubled-space normalization maintained elsewhere.
    Complex n_matrix_element() const {
        Complex s{0.0, 0.0};
        for (std::size_t n = 1; n < phi.size(); ++n)
            s += std::conj(psi[n]) * phi[n] * static_cast<double>(n);
        return s;
    }
};

struct InitialKind {
    enum class Tag { Fock, Coherent } tag = Tag::Fock;
    int fock_n = 0;
    Complex alpha0{0.0, 0.0};

    static InitialKind fock(int n) { return {Tag::Fock, n, {0.0, 0.0}}; }
    static InitialKind coherent(Complex a) { return {Tag::Coherent, 0, a}; }

    double n0() const {
        return tag == Tag::Fock ? static_cast<double>(fock_n) : std::norm(alpha0);
    }
};

struct TrajectoryConfig {
    InitialKind initial;
    int n_max = 30;
    double beta = 1.0;
    std::vector<double> t_grid;       // output sample times, ascending, from 0
    double eps_trunc = 1e-8;
    std::uint64_t seed = 0;
    std::size_t n_traj = 1;
    double drift_step = 0.025;        // waiting-time sampling step
    unsigned n_workers = 1;

    void validate() const {
        if (n_max < 2) throw DomainError("TrajectoryConfig: n_max too small");
        if (!(beta > 0.0)) throw DomainError("TrajectoryConfig: beta must be > 0");
        if (t_grid.empty() || t_grid.front() != 0.0)
            throw DomainError("TrajectoryConfig: t_grid must start at 0");
        for (std::size_t i = 1; i < t_grid.size(); ++i)
            if (!(t_grid[i] > t_grid[i - 1]))
                throw DomainError("TrajectoryConfig: t_grid must ascend");
        if (!(drift_step > 0.0))
            throw DomainError("TrajectoryConfig: drift_step must be > 0");
    }
};

struct EnsembleEstimate {
    std::vector<double> t;
    std::vector<double> n_mean, n_stderr;       // rescaled heating estimate
    std::vector<double> raw_mean, raw_stderr;   // before the 1/beta rescale
    std::vector<std::size_t> jump_histogram;    // index = number of jumps
    double multi_jump_fraction = 0.0;
    double mean_jumps = 0.0;
};

inline DoubledState init_state(const InitialKind& initial, int n_max) {
    if (n_max < 2) throw CutoffTooSmall("init_state: n_max < 2");
    DoubledState s;
    s.phi.assign(n_max + 1, Complex{0.0, 0.0});
    if (initial.tag == InitialKind::Tag::Fock) {
        if (initial.fock_n > n_max - 4)
            throw CutoffTooSmall("init_state: Fock level too close to cutoff");
        s.phi[initial.fock_n] = 1.0;
    } else {
        const double a2 = std::norm(initial.alpha0);
        if (a2 + 6.0 * std::sqrt(a2) > static_cast<double>(n_max))
            throw CutoffTooSmall("init_state: coherent amplitude too large for cutoff");
        // e^{-|a|^2/2} a^n / sqrt(n!) built by recurrence
        Complex amp = std::exp(-0.5 * a2);
        s.phi[0] = amp;
        for (int n = 1; n <= n_max; ++n) {
            amp *= initial.alpha0 / std::sqrt(static_cast<double>(n));
            s.phi[n] = amp;
        }
        double norm = 0.0;
        for (auto& c : s.phi) norm += std::norm(c);
        const double f = 1.0 / std::sqrt(norm);
        for (auto& c : s.phi) c *= f;
    }
    s.psi = s.phi;
    s.t = 0.0;
    return s;
}

namespace detail {

inline void check_truncation(const DoubledState& s, double eps_trunc) {
    if (s.truncation_mass() >= eps_trunc)
        throw TruncationBreach("amplitude mass reached the Fock cutoff");
}

} // namespace detail

// Exact diagonal drift from state.t to t1: each amplitude of both vectors is
// multiplied by exp(-i n dt - [n dIp + (n+1) dIm]/2), dI+- being the
// beta-scaled increments of the running integrals of (Delta +- gamma); the
// subsequent renormalization realizes the nonlinear term of the PDP up to the
// norm growth through negative-coefficient stretches, which is accumulated
// into log_weight by advance_until_jump.
inline void drift_propagate(DoubledState& state, const CoefficientGrid& grid,
                            double t1, double beta = 1.0,
                            double eps_trunc = 1e-8) {
    if (t1 < state.t) throw DomainError("drift_propagate: t1 < state.t");
    if (t1 == state.t) return;
    const double dt = t1 - state.t;
    const double dip = beta * (grid.i_plus_at(t1) - grid.i_plus_at(state.t));
    const double dim = beta * (grid.i_minus_at(t1) - grid.i_minus_at(state.t));
    const int nm = state.n_max();
    // the n-th factor is A * B^n with A real; accumulate by multiplication
    const Complex b = std::exp(Complex(-0.5 * (dip + dim), -dt));
    Complex f{std::exp(-0.5 * dim), 0.0};
    for (int n = 0; n <= nm; ++n) {
        state.phi[n] *= f;
        state.psi[n] *= f;
        f *= b;
    }
    state.t = t1;
    state.renormalize();
    detail::check_truncation(state, eps_trunc);
}

// Jump rates for the two channels; delta and gamma_ are already beta-scaled.
inline std::pair<double, double> rates(const DoubledState& state, double delta,
                                       double gamma_) {
    double up = 0.0, down = 0.0;  // sum (n+1)(...) and sum n(...)
    const int nm = state.n_max();
    for (int n = 0; n <= nm; ++n) {
        const double w = std::norm(state.phi[n]) + std::norm(state.psi[n]);
        up += (n + 1.0) * w;
        down += n * w;
    }
    const double n2 = state.norm2();
    return {std::abs(delta - gamma_) * up / n2, std::abs(delta + gamma_) * down / n2};
}

// Channel 1: phi -> sgn(Delta-gamma) a^dag phi, psi -> a^dag psi.
// Channel 2: phi -> sgn(Delta+gamma) a phi,     psi -> a psi.
// The doubled norm is restored to 2 afterwards.
inline void apply_jump(DoubledState& state, int channel, double delta,
                       double gamma_, double eps_trunc = 1e-8) {
    if (channel != 1 && channel != 2)
        throw DomainError("apply_jump: channel must be 1 or 2");
    const int nm = state.n_max();
    const double coef = (channel == 1) ? delta - gamma_ : delta + gamma_;
    const double sgn = coef < 0.0 ? -1.0 : 1.0;
    std::vector<Complex> phi(nm + 1, Complex{0.0, 0.0});
    std::vector<Complex> psi(nm + 1, Complex{0.0, 0.0});
    if (channel == 1) {
        for (int n = 1; n <= nm; ++n) {
            const double f = std::sqrt(static_cast<double>(n));
            phi[n] = sgn * f * state.phi[n - 1];
            psi[n] = f * state.psi[n - 1];
        }
    } else {
        for (int n = 0; n < nm; ++n) {
            const double f = std::sqrt(n + 1.0);
            phi[n] = sgn * f * state.phi[n + 1];
            psi[n] = f * state.psi[n + 1];
        }
    }
    state.phi = std::move(phi);
    state.psi = std::move(psi);
    if (!(state.norm2() > 1e-300))
        throw NullJump("apply_jump: annihilated the state");
    state.renormalize();
    detail::check_truncation(state, eps_trunc);
}

namespace detail {

// Advance the deterministic flow from state.t to at most t_until, adding the
// trapezoid integral of P1 + P2 to accum. If accum reaches target, stop at the
// crossing time (bisection to 1e-10 relative) and return it.
inline std::optional<double> advance_until_jump(DoubledState& state,
                                                const CoefficientGrid& grid,
                                                double t_until, double target,
                                                double& accum, double beta,
                                                double step, double eps_trunc) {
    // total rate P1 + P2 and its negative-coefficient part; the latter is half
    // the logarithmic growth rate of the doubled norm (trajectory weight)
    struct Rate { double total, neg; };
    auto rate_at = [&](const DoubledState& s, double t) -> Rate {
        const double d = beta * grid.delta_at_t(t);
        const double g = beta * grid.gamma_at_t(t);
        auto [p1, p2] = rates(s, d, g);
        return {p1 + p2, (d - g < 0.0 ? p1 : 0.0) + (d + g < 0.0 ? p2 : 0.0)};
    };
    Rate lo_r = rate_at(state, state.t);
    while (state.t < t_until) {
        const double t_next = std::min(t_until, state.t + step);
        const double t_lo = state.t;
        const DoubledState before = state;
        drift_propagate(state, grid, t_next, beta, eps_trunc);
        const Rate hi_r = rate_at(state, t_next);
        const double inc = 0.5 * (lo_r.total + hi_r.total) * (t_next - t_lo);
        if (accum + inc >= target) {
            // bisect for the crossing time inside [t_lo, t_next]
            double lo = t_lo, hi = t_next;
            const double tol = 1e-10 * std::max(1.0, t_next);
            while (hi - lo > tol) {
                const double mid = 0.5 * (lo + hi);
                DoubledState trial = before;
                drift_propagate(trial, grid, mid, beta, eps_trunc);
                const Rate mid_r = rate_at(trial, mid);
                const double part = 0.5 * (lo_r.total + mid_r.total) * (mid - t_lo);
                if (accum + part >= target) hi = mid; else lo = mid;
            }
            state = before;
            drift_propagate(state, grid, hi, beta, eps_trunc);
            const Rate jump_r = rate_at(state, hi);
            state.log_weight += (lo_r.neg + jump_r.neg) * (hi - t_lo);
            accum = target;
            return hi;
        }
        accum += inc;
        state.log_weight += (lo_r.neg + hi_r.neg) * (t_next - t_lo);
        lo_r = hi_r;
    }
    return std::nullopt;
}

} // namespace detail

// Waiting-time draw by inversion: returns the jump time, or nullopt if the
// horizon t_until is reached first. The state is advanced to the returned
// time either way.
inline std::optional<double> sample_jump_time(DoubledState& state,
                                              const CoefficientGrid& grid,
                                              double t_until, double eta,
                                              double beta = 1.0,
                                              double step = 0.025,
                                              double eps_trunc = 1e-8) {
    if (!(eta > 0.0) || !(eta < 1.0))
        throw DomainError("sample_jump_time: eta must lie in (0,1)");
    double accum = 0.0;
    return detail::advance_until_jump(state, grid, t_until, -std::log1p(-eta),
                                      accum, beta, step, eps_trunc);
}

struct TrajectoryRecord {
    std::vector<Complex> n_elem;  // weight * <psi|n|phi> at each output time
    std::size_t jumps = 0;
};

namespace detail {

inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

struct Stream {
    std::mt19937_64 gen;
    Stream(std::uint64_t seed, std::uint64_t index)
        : gen(splitmix64(splitmix64(seed) ^ splitmix64(index + 1))) {}
    // uniform in (0,1), platform-independent
    double uniform() {
        for (;;) {
            const double u = (gen() >> 11) * 0x1.0p-53;
            if (u > 0.0 && u < 1.0) return u;
        }
    }
};

} // namespace detail

inline TrajectoryRecord run_trajectory(const TrajectoryConfig& cfg,
                                       const CoefficientGrid& grid,
                                       detail::Stream& rng) {
    DoubledState state = init_state(cfg.initial, cfg.n_max);
    TrajectoryRecord rec;
    rec.n_elem.reserve(cfg.t_grid.size());

    double target = -std::log1p(-rng.uniform());
    double accum = 0.0;
    for (double ts : cfg.t_grid) {
        while (state.t < ts) {
            auto tj = detail::advance_until_jump(state, grid, ts, target, accum,
                                                 cfg.beta, cfg.drift_step,
                                                 cfg.eps_trunc);
            if (!tj) break;
            const double d = cfg.beta * grid.delta_at_t(*tj);
            const double g = cfg.beta * grid.gamma_at_t(*tj);
            auto [p1, p2] = rates(state, d, g);
            const int channel =
                (p1 + p2 > 0.0 && rng.uniform() * (p1 + p2) < p1) ? 1 : 2;
            apply_jump(state, channel, d, g, cfg.eps_trunc);
            ++rec.jumps;
            target = -std::log1p(-rng.uniform());
            accum = 0.0;
        }
        rec.n_elem.push_back(state.weight() * state.n_matrix_element());
    }
    return rec;
}

inline EnsembleEstimate run_ensemble(const TrajectoryConfig& cfg,
                                     const CoefficientGrid& grid) {
    cfg.validate();
    if (cfg.n_traj < 2) throw DomainError("run_ensemble: n_traj must be >= 2");
    const std::size_t nt = cfg.t_grid.size();
    const double n0 = cfg.initial.n0();

    std::vector<TrajectoryRecord> records(cfg.n_traj);
    auto worker = [&](std::size_t begin, std::size_t end) {
        for (std::size_t i = begin; i < end; ++i) {
            detail::Stream rng(cfg.seed, i);
            records[i] = run_trajectory(cfg, grid, rng);
        }
    };
    const unsigned nw = std::max(1u, cfg.n_workers);
    if (nw == 1) {
        worker(0, cfg.n_traj);
    } else {
        std::vector<std::thread> pool;
        const std::size_t chunk = (cfg.n_traj + nw - 1) / nw;
        for (unsigned w = 0; w < nw; ++w) {
            const std::size_t b = std::min<std::size_t>(w * chunk, cfg.n_traj);
            const std::size_t e = std::min<std::size_t>(b + chunk, cfg.n_traj);
            if (b < e) pool.emplace_back(worker, b, e);
        }
        for (auto& th : pool) th.join();
    }

    // deterministic reduction in trajectory-index order
    EnsembleEstimate est;
    est.t = cfg.t_grid;
    est.raw_mean.assign(nt, 0.0);
    est.raw_stderr.assign(nt, 0.0);
    est.n_mean.assign(nt, 0.0);
    est.n_stderr.assign(nt, 0.0);
    std::vector<double> sum(nt, 0.0);
    std::size_t max_jumps = 0, multi = 0;
    double total_jumps = 0.0;
    for (const auto& r : records) max_jumps = std::max(max_jumps, r.jumps);
    est.jump_histogram.assign(max_jumps + 1, 0);
    for (const auto& r : records) {
        for (std::size_t k = 0; k < nt; ++k) sum[k] += r.n_elem[k].real();
        ++est.jump_histogram[r.jumps];
        if (r.jumps >= 2) ++multi;
        total_jumps += static_cast<double>(r.jumps);
    }
    const double N = static_cast<double>(cfg.n_traj);
    for (std::size_t k = 0; k < nt; ++k) {
        const double m = sum[k] / N;
        double ss = 0.0;  // two-pass: exact zero for degenerate samples
        for (const auto& r : records) {
            const double d = r.n_elem[k].real() - m;
            ss += d * d;
        }
        const double var = ss / (N - 1.0);
        est.raw_mean[k] = m;
        est.raw_stderr[k] = std::sqrt(var / N);
        est.n_mean[k] = n0 + (m - est.raw_mean[0]) / cfg.beta;
        est.n_stderr[k] = est.raw_stderr[k] / cfg.beta;
    }
    est.multi_jump_fraction = static_cast<double>(multi) / N;
    est.mean_jumps = total_jumps / N;
    return est;
}

} // namespace qbm
