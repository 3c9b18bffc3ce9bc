#include <doctest.h>

#include <cmath>
#include <numeric>

#include "qbm/nmwf.hpp"

using namespace qbm;

namespace {

CoefficientGrid free_grid(double tmax = 10.0) {
    return build_grid({0.0, 1.0, 1.0}, linspace_grid(tmax, 401));
}

// constant-coefficient grid built by hand for the statistical laws
CoefficientGrid constant_grid(double delta, double gamma, double tmax,
                              std::size_t n) {
    CoefficientGrid g;
    g.t = linspace_grid(tmax, n);
    g.delta.assign(n, delta);
    g.gamma.assign(n, gamma);
    g.pi_coef.assign(n, 0.0);
    g.rshift.assign(n, 0.0);
    g.big_gamma.resize(n);
    g.i_plus.resize(n);
    g.i_minus.resize(n);
    g.delta_big_gamma.assign(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        g.big_gamma[i] = 2.0 * gamma * g.t[i];
        g.i_plus[i] = (delta + gamma) * g.t[i];
        g.i_minus[i] = (delta - gamma) * g.t[i];
    }
    return g;
}

} // namespace

TEST_CASE("init_state") {
    auto s = init_state(InitialKind::fock(0), 10);
    CHECK(s.phi[0] == Complex{1.0, 0.0});
    CHECK(s.norm2() == doctest::Approx(2.0).epsilon(1e-14));

    auto f3 = init_state(InitialKind::fock(3), 10);
    CHECK(f3.phi[3] == Complex{1.0, 0.0});
    CHECK(f3.phi[0] == Complex{0.0, 0.0});
    CHECK(f3.psi[3] == Complex{1.0, 0.0});

    auto c = init_state(InitialKind::coherent({1.0, 0.0}), 20);
    CHECK(c.norm2() == doctest::Approx(2.0).epsilon(1e-14));
    // Poisson amplitudes e^{-1/2}/sqrt(n!)
    CHECK(c.phi[0].real() == doctest::Approx(std::exp(-0.5)).epsilon(1e-12));
    CHECK(c.phi[2].real() ==
          doctest::Approx(std::exp(-0.5) / std::sqrt(2.0)).epsilon(1e-12));
    CHECK(std::norm(c.phi[20]) + std::norm(c.phi[19]) < 1e-12);

    CHECK_THROWS_AS(init_state(InitialKind::fock(8), 10), CutoffTooSmall);
    CHECK_THROWS_AS(init_state(InitialKind::coherent({3.0, 0.0}), 10), CutoffTooSmall);
}

TEST_CASE("drift: zero coupling gives pure phases") {
    auto grid = free_grid();
    auto s = init_state(InitialKind::coherent({1.0, 0.0}), 20);
    auto before = s.phi;
    drift_propagate(s, grid, 2.0);
    CHECK(s.norm2() == doctest::Approx(2.0).epsilon(1e-12));
    for (int n = 0; n <= 20; ++n) {
        const Complex expected = before[n] * std::exp(Complex(0.0, -n * 2.0));
        CHECK(std::abs(s.phi[n] - expected) < 1e-12);
        CHECK(std::abs(s.psi[n] - expected) < 1e-12);
    }
}

TEST_CASE("drift: ground state is an invariant direction") {
    auto grid = build_grid({0.1, 1.0, 1.0}, linspace_grid(10.0, 2001));
    auto s = init_state(InitialKind::fock(0), 10);
    drift_propagate(s, grid, 3.0);
    CHECK(std::abs(s.phi[0]) == doctest::Approx(1.0).epsilon(1e-12));
    for (int n = 1; n <= 10; ++n) CHECK(std::abs(s.phi[n]) == 0.0);
}

TEST_CASE("drift: two-level superposition matches an RK4 oracle") {
    auto grid = build_grid({0.1, 1.0, 1.0}, linspace_grid(1.0, 50001));
    const double t1 = 0.4, dt_rk = 2e-6;

    auto s = init_state(InitialKind::fock(0), 6);
    const double c0 = std::sqrt(0.7), c1 = std::sqrt(0.3);
    s.phi[0] = s.psi[0] = c0;
    s.phi[1] = s.psi[1] = c1;
    drift_propagate(s, grid, t1);

    // independent integrator of the linear drift equation
    // dc_n/dt = [-i n - (n (Delta + gamma) + (n+1)(Delta - gamma))/2] c_n
    // with linear interpolation of the tabulated coefficients, then one final
    // renormalization (the nonlinear norm term commutes with the flow)
    Complex c[2] = {{c0, 0.0}, {c1, 0.0}};
    auto rhs = [&](double t, const Complex* y, Complex* dy) {
        const double d = grid.delta_at_t(t), g = grid.gamma_at_t(t);
        for (int n = 0; n < 2; ++n)
            dy[n] = Complex(-0.5 * (n * (d + g) + (n + 1) * (d - g)), -n) * y[n];
    };
    for (double t = 0.0; t < t1 - 1e-12; t += dt_rk) {
        const double h = std::min(dt_rk, t1 - t);
        Complex k1[2], k2[2], k3[2], k4[2], tmp[2];
        rhs(t, c, k1);
        for (int n = 0; n < 2; ++n) tmp[n] = c[n] + 0.5 * h * k1[n];
        rhs(t + 0.5 * h, tmp, k2);
        for (int n = 0; n < 2; ++n) tmp[n] = c[n] + 0.5 * h * k2[n];
        rhs(t + 0.5 * h, tmp, k3);
        for (int n = 0; n < 2; ++n) tmp[n] = c[n] + h * k3[n];
        rhs(t + h, tmp, k4);
        for (int n = 0; n < 2; ++n)
            c[n] += h / 6.0 * (k1[n] + 2.0 * k2[n] + 2.0 * k3[n] + k4[n]);
    }
    const double norm = std::sqrt(std::norm(c[0]) + std::norm(c[1]));
    for (int n = 0; n < 2; ++n) c[n] /= norm;
    CHECK(std::abs(s.phi[0] - c[0]) < 1e-8);
    CHECK(std::abs(s.phi[1] - c[1]) < 1e-8);
}

TEST_CASE("rates") {
    auto ground = init_state(InitialKind::fock(0), 10);
    auto [p1g, p2g] = rates(ground, 0.3, 0.1);
    CHECK(p1g == doctest::Approx(0.2).epsilon(1e-14));
    CHECK(p2g == 0.0);

    auto f3 = init_state(InitialKind::fock(3), 10);
    auto [p13, p23] = rates(f3, 0.3, 0.1);
    CHECK(p13 == doctest::Approx(4.0 * 0.2).epsilon(1e-14));
    CHECK(p23 == doctest::Approx(3.0 * 0.4).epsilon(1e-14));

    auto c1 = init_state(InitialKind::coherent({1.0, 0.0}), 25);
    auto [p1c, p2c] = rates(c1, 0.3, 0.1);
    CHECK(p1c == doctest::Approx(2.0 * 0.2).epsilon(1e-10));
    CHECK(p2c == doctest::Approx(1.0 * 0.4).epsilon(1e-10));

    // negative coefficients enter through their absolute value
    auto [p1n, p2n] = rates(ground, -0.3, 0.1);
    CHECK(p1n == doctest::Approx(0.4).epsilon(1e-14));
}

TEST_CASE("apply_jump") {
    // positive channel-1 coefficient: both vectors climb together
    auto s = init_state(InitialKind::fock(0), 10);
    apply_jump(s, 1, 0.3, 0.1);
    CHECK(std::abs(s.phi[1] - Complex{1.0, 0.0}) < 1e-14);
    CHECK(std::abs(s.psi[1] - Complex{1.0, 0.0}) < 1e-14);
    CHECK(s.norm2() == doctest::Approx(2.0).epsilon(1e-14));

    // negative channel-1 coefficient: phi flips sign, psi does not
    auto sn = init_state(InitialKind::fock(0), 10);
    apply_jump(sn, 1, 0.05, 0.1);
    CHECK(std::abs(sn.phi[1] + Complex{1.0, 0.0}) < 1e-14);
    CHECK(std::abs(sn.psi[1] - Complex{1.0, 0.0}) < 1e-14);
    CHECK(sn.n_matrix_element().real() == doctest::Approx(-1.0).epsilon(1e-14));

    // channel 2 lowers a Fock state
    auto f3 = init_state(InitialKind::fock(3), 10);
    apply_jump(f3, 2, 0.3, 0.1);
    CHECK(std::abs(f3.phi[2] - Complex{1.0, 0.0}) < 1e-14);
    CHECK(std::abs(f3.psi[2] - Complex{1.0, 0.0}) < 1e-14);

    // annihilating the vacuum is an error
    auto g = init_state(InitialKind::fock(0), 10);
    CHECK_THROWS_AS(apply_jump(g, 2, 0.3, 0.1), NullJump);
}

TEST_CASE("sample_jump_time") {
    // zero coupling: no jump ever
    auto grid = free_grid();
    auto s = init_state(InitialKind::fock(0), 10);
    auto t = sample_jump_time(s, grid, 10.0, 0.5);
    CHECK(!t.has_value());
    CHECK(s.t == doctest::Approx(10.0));

    // eta -> 0+ means an immediate jump when the rate is positive
    auto cg = constant_grid(0.3, 0.1, 10.0, 101);
    auto s2 = init_state(InitialKind::fock(0), 10);
    auto t2 = sample_jump_time(s2, cg, 10.0, 1e-14);
    REQUIRE(t2.has_value());
    CHECK(*t2 < 1e-10);

    CHECK_THROWS_AS(sample_jump_time(s2, cg, 10.0, 0.0), DomainError);
}

TEST_CASE("waiting times on a constant-rate segment are exponential") {
    // ground state with constant coefficients: total rate R = |Delta - gamma|
    const double R = 0.2;
    auto cg = constant_grid(0.3, 0.1, 2000.0, 2001);
    detail::Stream rng(12345, 0);
    const std::size_t draws = 100000;
    std::vector<double> wt;
    wt.reserve(draws);
    for (std::size_t i = 0; i < draws; ++i) {
        auto s = init_state(InitialKind::fock(0), 6);
        auto t = sample_jump_time(s, cg, 2000.0, rng.uniform(), 1.0, 0.5);
        REQUIRE(t.has_value());
        wt.push_back(*t);
    }
    const double mean = std::accumulate(wt.begin(), wt.end(), 0.0) / draws;
    CHECK(mean == doctest::Approx(1.0 / R).epsilon(0.02));
    // quartiles of Exp(R)
    std::sort(wt.begin(), wt.end());
    CHECK(wt[draws / 2] == doctest::Approx(std::log(2.0) / R).epsilon(0.02));
    CHECK(wt[draws / 4] == doctest::Approx(std::log(4.0 / 3.0) / R).epsilon(0.03));
    CHECK(wt[3 * draws / 4] == doctest::Approx(std::log(4.0) / R).epsilon(0.02));
}

TEST_CASE("trajectory weight tracks the doubled-norm growth") {
    // ground state, constant Delta - gamma = -0.05: the PDP norm grows at
    // rate 2 P1 = 2 |Delta - gamma|, so log_weight = 0.1 t along the no-jump
    // flow; positive-coefficient segments leave the weight at 1
    auto neg = constant_grid(0.05, 0.1, 50.0, 501);
    auto s = init_state(InitialKind::fock(0), 6);
    double accum = 0.0;
    auto tj = detail::advance_until_jump(s, neg, 8.0, 1e9, accum, 1.0, 0.05, 1e-8);
    CHECK(!tj.has_value());
    CHECK(s.log_weight == doctest::Approx(0.1 * 8.0).epsilon(1e-10));
    CHECK(s.norm2() == doctest::Approx(2.0).epsilon(1e-12));

    auto pos = constant_grid(0.3, 0.1, 50.0, 501);
    auto sp = init_state(InitialKind::fock(0), 6);
    accum = 0.0;
    detail::advance_until_jump(sp, pos, 8.0, 1e9, accum, 1.0, 0.05, 1e-8);
    CHECK(sp.log_weight == 0.0);
    CHECK(sp.weight() == 1.0);
}

TEST_CASE("trajectory invariants and zero-coupling ensemble") {
    auto grid = free_grid();
    TrajectoryConfig cfg;
    cfg.initial = InitialKind::fock(2);
    cfg.n_max = 10;
    cfg.t_grid = linspace_grid(10.0, 11);
    cfg.n_traj = 16;
    cfg.seed = 7;
    auto est = run_ensemble(cfg, grid);
    for (std::size_t k = 0; k < est.t.size(); ++k) {
        CHECK(est.n_mean[k] == doctest::Approx(2.0).epsilon(1e-12));
        CHECK(est.n_stderr[k] == 0.0);
    }
    CHECK(est.multi_jump_fraction == 0.0);
    CHECK(est.jump_histogram[0] == 16);
}

TEST_CASE("norm and alignment invariants along a stochastic trajectory") {
    // Delta - gamma < 0 so channel-1 jumps exercise the sign flip; the
    // downward channel dominates, keeping the walk far from the cutoff
    auto grid = constant_grid(0.05, 0.1, 100.0, 1001);
    TrajectoryConfig cfg;
    cfg.initial = InitialKind::fock(0);
    cfg.n_max = 20;
    cfg.beta = 1.0;
    cfg.t_grid = linspace_grid(100.0, 1001);
    cfg.seed = 3;

    detail::Stream rng(cfg.seed, 0);
    DoubledState state = init_state(cfg.initial, cfg.n_max);
    double target = -std::log1p(-rng.uniform());
    double accum = 0.0;
    std::size_t jumps = 0, audited = 0;
    for (double ts : cfg.t_grid) {
        while (state.t < ts) {
            auto tj = detail::advance_until_jump(state, grid, ts, target, accum,
                                                 cfg.beta, cfg.drift_step,
                                                 cfg.eps_trunc);
            if (!tj) break;
            const double d = cfg.beta * grid.delta_at_t(*tj);
            const double g = cfg.beta * grid.gamma_at_t(*tj);
            auto [p1, p2] = rates(state, d, g);
            apply_jump(state, rng.uniform() * (p1 + p2) < p1 ? 1 : 2, d, g);
            ++jumps;
            target = -std::log1p(-rng.uniform());
            accum = 0.0;
        }
        ++audited;
        CHECK(state.norm2() == doctest::Approx(2.0).epsilon(1e-10));
        // phi = sigma psi with sigma in {+1, -1}
        double sigma = 0.0;
        bool aligned = true;
        for (int n = 0; n <= cfg.n_max; ++n) {
            if (std::abs(state.psi[n]) < 1e-12) {
                aligned = aligned && std::abs(state.phi[n]) < 1e-10;
                continue;
            }
            const Complex ratio = state.phi[n] / state.psi[n];
            if (sigma == 0.0) sigma = ratio.real() >= 0.0 ? 1.0 : -1.0;
            aligned = aligned && std::abs(ratio - Complex{sigma, 0.0}) < 1e-9;
        }
        CHECK(aligned);
    }
    CHECK(audited == cfg.t_grid.size());
    CHECK(jumps > 0);
}

TEST_CASE("ensemble reproducibility is independent of worker count") {
    auto grid = build_grid({0.1, 0.5, 1.0}, linspace_grid(20.0, 2001));
    TrajectoryConfig cfg;
    cfg.initial = InitialKind::fock(0);
    cfg.n_max = 25;
    cfg.beta = 20.0;
    cfg.t_grid = linspace_grid(20.0, 21);
    cfg.n_traj = 64;
    cfg.seed = 99;
    cfg.drift_step = 0.05;

    cfg.n_workers = 1;
    auto a = run_ensemble(cfg, grid);
    cfg.n_workers = 4;
    auto b = run_ensemble(cfg, grid);
    for (std::size_t k = 0; k < a.t.size(); ++k) {
        CHECK(a.n_mean[k] == b.n_mean[k]);   // bit-identical
        CHECK(a.n_stderr[k] == b.n_stderr[k]);
    }
    CHECK(a.jump_histogram == b.jump_histogram);
}

TEST_CASE("truncation breach is fail-fast") {
    auto grid = build_grid({0.1, 0.5, 10.0}, linspace_grid(5.0, 501));
    auto s = init_state(InitialKind::fock(4), 8);  // minimal headroom
    // force the state upward until the top levels carry mass
    CHECK_THROWS_AS(
        [&] {
            for (int k = 0; k < 10; ++k) apply_jump(s, 1, 0.3, 0.1, 1e-8);
        }(),
        TruncationBreach);
}
