// qbm — batch front-end: coefficient grids, analytic observables, Monte Carlo
// ensembles, Lindblad-border scans, and Wigner snapshots as CSV/JSON.

#include <chrono>
#include <complex>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "qbm/analytic.hpp"
#include "qbm/border.hpp"
#include "qbm/coefficients.hpp"
#include "qbm/csv.hpp"
#include "qbm/nmwf.hpp"

namespace {

using nlohmann::json;

constexpr int kExitOk = 0;
constexpr int kExitValidation = 2;
constexpr int kExitNumerical = 3;

struct TemperatureFlags {
    std::optional<double> theta;
    std::optional<double> r0;
    std::optional<double> rc_over_2pi;   // value interpreted as r_c
    std::optional<double> rc_times_2pi;  // value interpreted as 2 pi r_c
    std::string convention = "appendix";

    void attach(CLI::App* cmd) {
        cmd->add_option("--theta", theta, "temperature kT/omega_0");
        cmd->add_option("--r0", r0, "temperature via r0 (see --convention)");
        cmd->add_option("--rc-over-2pi", rc_over_2pi, "temperature via r_c = omega_c/2 pi kT");
        cmd->add_option("--rc-times-2pi", rc_times_2pi, "temperature via 2 pi r_c = omega_c/kT");
        cmd->add_option("--convention", convention,
                        "r0 convention: appendix (r0 = 1/2 pi theta) or fig1 (r0 = 1/theta)")
            ->check(CLI::IsMember({"appendix", "fig1"}));
    }

    // resolve theta; `r` is needed by the r_c-based flags
    double resolve(double r, json& echo) const {
        int given = theta.has_value() + r0.has_value() + rc_over_2pi.has_value() +
                    rc_times_2pi.has_value();
        if (given != 1)
            throw qbm::DomainError("give exactly one of --theta/--r0/--rc-over-2pi/--rc-times-2pi");
        double th;
        if (theta) {
            th = *theta;
            echo["temperature_input"] = {{"flag", "theta"}, {"value", *theta}};
        } else if (r0) {
            th = convention == "fig1" ? 1.0 / *r0 : 1.0 / (2.0 * qbm::kPi * *r0);
            echo["temperature_input"] = {{"flag", "r0"}, {"value", *r0},
                                         {"convention", convention}};
        } else if (rc_over_2pi) {
            th = r / (2.0 * qbm::kPi * *rc_over_2pi);
            echo["temperature_input"] = {{"flag", "rc-over-2pi"}, {"value", *rc_over_2pi}};
        } else {
            th = r / *rc_times_2pi;
            echo["temperature_input"] = {{"flag", "rc-times-2pi"}, {"value", *rc_times_2pi}};
        }
        echo["theta_resolved"] = th;
        return th;
    }
};

std::string resolve_out(const std::string& path) {
    if (path.empty() || path == "-") return path;
    if (path.find('/') == std::string::npos) {
        if (const char* dir = std::getenv("QBM_OUT_DIR"))
            return std::string(dir) + "/" + path;
    }
    return path;
}

void emit_csv(const std::string& path, const std::vector<std::string>& header,
              const std::vector<std::vector<double>>& cols) {
    const std::string p = resolve_out(path);
    if (p.empty() || p == "-") qbm::write_csv(std::cout, header, cols);
    else qbm::write_csv_file(p, header, cols);
}

void emit_json(const std::string& path, const json& j) {
    if (path.empty()) return;
    const std::string p = resolve_out(path);
    if (p == "-") { std::cout << j.dump(2) << '\n'; return; }
    std::ofstream f(p);
    if (!f) throw qbm::DomainError("cannot open " + p);
    f << j.dump(2) << '\n';
}

qbm::InitialStateMoments parse_state(const std::string& s, qbm::InitialKind* kind) {
    auto bad = [&] { throw qbm::DomainError("bad --state: " + s); };
    if (s == "ground" || s == "fock:0") {
        if (kind) *kind = qbm::InitialKind::fock(0);
        return qbm::InitialStateMoments::ground();
    }
    const auto colon = s.find(':');
    if (colon == std::string::npos) bad();
    const std::string tag = s.substr(0, colon), arg = s.substr(colon + 1);
    if (tag == "fock") {
        const int n = std::stoi(arg);
        if (kind) *kind = qbm::InitialKind::fock(n);
        return qbm::InitialStateMoments::fock(n);
    }
    if (tag == "coherent") {
        double re = 0.0, im = 0.0;
        const auto comma = arg.find(',');
        re = std::stod(arg.substr(0, comma));
        if (comma != std::string::npos) im = std::stod(arg.substr(comma + 1));
        if (kind) *kind = qbm::InitialKind::coherent({re, im});
        return qbm::InitialStateMoments::coherent({re, im});
    }
    if (tag == "squeezed") {
        if (kind) throw qbm::DomainError("squeezed starts are analytic-only");
        return qbm::InitialStateMoments::squeezed(std::stod(arg));
    }
    bad();
    return {};
}

std::vector<double> make_grid(double tmax, std::size_t n, const std::string& spacing) {
    return spacing == "log" ? qbm::logspace_grid(tmax, n) : qbm::linspace_grid(tmax, n);
}

json spec_echo(const qbm::ReservoirSpec& s) {
    return {{"alpha", s.alpha}, {"r", s.r}, {"theta", s.theta},
            {"r0", s.r0()}, {"rc", s.rc()}};
}

int run(int argc, char** argv) {
    CLI::App app{"quantum Brownian motion laboratory"};
    app.require_subcommand(1);

    double alpha = 0.1, r = 1.0, tmax = 20.0;
    std::size_t n_points = 2000;
    std::string spacing = "linear", out = "-", json_out, state_str = "ground";

    // ---- coeffs ----
    auto* coeffs = app.add_subcommand("coeffs", "coefficient grid CSV");
    TemperatureFlags tf_coeffs;
    bool diagnostics = false;
    coeffs->add_option("--alpha", alpha)->required();
    coeffs->add_option("--r", r)->required();
    tf_coeffs.attach(coeffs);
    coeffs->add_option("--tmax", tmax);
    coeffs->add_option("--n", n_points);
    coeffs->add_option("--spacing", spacing)->check(CLI::IsMember({"linear", "log"}));
    coeffs->add_flag("--diagnostics", diagnostics, "also compute pi and rshift");
    coeffs->add_option("--out", out);
    coeffs->add_option("--json", json_out);

    // ---- observables ----
    auto* obs = app.add_subcommand("observables", "analytic observable CSV");
    TemperatureFlags tf_obs;
    std::string obs_which = "all";
    bool free_reference = false;
    obs->add_option("--alpha", alpha)->required();
    obs->add_option("--r", r)->required();
    tf_obs.attach(obs);
    obs->add_option("--state", state_str, "ground|fock:N|coherent:RE,IM|squeezed:S");
    obs->add_option("--obs", obs_which)->check(CLI::IsMember({"all", "n", "varx", "q"}));
    obs->add_flag("--free-reference", free_reference, "add the alpha = 0 variance column");
    obs->add_option("--tmax", tmax);
    obs->add_option("--n", n_points);
    obs->add_option("--spacing", spacing)->check(CLI::IsMember({"linear", "log"}));
    obs->add_option("--out", out);
    obs->add_option("--json", json_out);

    // ---- mc ----
    auto* mc = app.add_subcommand("mc", "Monte Carlo ensemble CSV + JSON summary");
    TemperatureFlags tf_mc;
    std::size_t ntraj = 10000, n_samples = 51;
    double beta = 1.0;
    std::uint64_t seed = 0;
    int n_max = 30;
    unsigned workers = 1;
    mc->add_option("--alpha", alpha)->required();
    mc->add_option("--r", r)->required();
    tf_mc.attach(mc);
    mc->add_option("--state", state_str, "fock:N|coherent:RE,IM");
    mc->add_option("--ntraj", ntraj);
    mc->add_option("--beta", beta);
    mc->add_option("--seed", seed);
    mc->add_option("--nmax", n_max);
    mc->add_option("--tmax", tmax);
    mc->add_option("--samples", n_samples);
    mc->add_option("--workers", workers);
    mc->add_option("--out", out);
    mc->add_option("--json", json_out);

    // ---- border ----
    auto* border = app.add_subcommand("border", "Lindblad border tools");
    border->require_subcommand(1);
    auto* b_classify = border->add_subcommand("classify", "lindblad-type or non-lindblad-type");
    TemperatureFlags tf_cls;
    double horizon = 0.0;
    b_classify->add_option("--alpha", alpha)->required();
    b_classify->add_option("--r", r)->required();
    tf_cls.attach(b_classify);
    b_classify->add_option("--horizon", horizon);
    b_classify->add_option("--json", json_out);

    auto* b_profile = border->add_subcommand("profile", "negative-interval CSV");
    TemperatureFlags tf_prof;
    b_profile->add_option("--alpha", alpha)->required();
    b_profile->add_option("--r", r)->required();
    tf_prof.attach(b_profile);
    b_profile->add_option("--horizon", horizon);
    b_profile->add_option("--out", out);

    auto* b_critical = border->add_subcommand("critical-r", "high-T critical cutoff ratio");
    double crit_horizon = 50.0, tol_r = 1e-3;
    b_critical->add_option("--horizon", crit_horizon);
    b_critical->add_option("--tol-r", tol_r);
    b_critical->add_option("--json", json_out);

    auto* b_contour = border->add_subcommand("contour", "diffusion-sign matrix CSV over (r, t)");
    std::string regime = "hight";
    double r_min = 0.02, r_max = 2.0, t_max_wc = 20.0, rc2pi = 10.0;
    int c_nr = 60, c_nt = 200;
    b_contour->add_option("--regime", regime)->check(CLI::IsMember({"hight", "general"}));
    b_contour->add_option("--alpha", alpha);
    b_contour->add_option("--rc-times-2pi", rc2pi);
    b_contour->add_option("--rmin", r_min);
    b_contour->add_option("--rmax", r_max);
    b_contour->add_option("--tmax-wc", t_max_wc);
    b_contour->add_option("--nr", c_nr);
    b_contour->add_option("--nt", c_nt);
    b_contour->add_option("--out", out);
    b_contour->add_option("--border-out", json_out)->description("zero-contour polyline CSV");

    // ---- wigner ----
    auto* wig = app.add_subcommand("wigner", "Wigner center/width series or snapshots");
    TemperatureFlags tf_wig;
    std::string alpha0_str = "1,0";
    std::vector<double> snap_times;
    std::string snapshot_prefix;
    int field_n = 0;
    double field_extent = 3.0;
    wig->add_option("--alpha", alpha)->required();
    wig->add_option("--r", r)->required();
    tf_wig.attach(wig);
    wig->add_option("--alpha0", alpha0_str, "initial coherent amplitude RE,IM");
    wig->add_option("--tmax", tmax);
    wig->add_option("--n", n_points);
    wig->add_option("--times", snap_times, "snapshot times for 2-D fields");
    wig->add_option("--field-n", field_n, "snapshot grid points per axis");
    wig->add_option("--field-extent", field_extent);
    wig->add_option("--snapshot-prefix", snapshot_prefix);
    wig->add_option("--out", out);
    wig->add_option("--json", json_out);

    CLI11_PARSE(app, argc, argv);

    auto started = std::chrono::steady_clock::now();
    json meta;

    if (*coeffs) {
        qbm::ReservoirSpec s{alpha, r, tf_coeffs.resolve(r, meta)};
        s.validate();
        qbm::GridOptions go;
        go.with_diagnostics = diagnostics;
        auto grid = qbm::build_grid(s, make_grid(tmax, n_points, spacing), go);
        for (const auto& w : grid.warnings) std::cerr << "warning: " << w << '\n';
        emit_csv(out,
                 {"t", "delta", "gamma", "pi", "rshift", "big_gamma",
                  "delta_big_gamma", "i_plus", "i_minus"},
                 {grid.t, grid.delta, grid.gamma, grid.pi_coef, grid.rshift,
                  grid.big_gamma, grid.delta_big_gamma, grid.i_plus, grid.i_minus});
        meta["spec"] = spec_echo(s);
        meta["warnings"] = grid.warnings;
    } else if (*obs) {
        qbm::ReservoirSpec s{alpha, r, tf_obs.resolve(r, meta)};
        s.validate();
        auto m = parse_state(state_str, nullptr);
        m.validate();
        auto grid = qbm::build_grid(s, make_grid(tmax, n_points, spacing));
        const std::size_t n = grid.size();
        std::vector<double> nm(n), vx(n), q(n), wr(n), wi(n), ww(n), vfree(n);
        for (std::size_t i = 0; i < n; ++i) {
            const double t = grid.t[i];
            nm[i] = qbm::heating_at(grid, m.n0, t);
            vx[i] = qbm::position_variance_at(grid, m, t);
            q[i] = m.n0 > 0.0 ? qbm::mandel_q_at(grid, m.n0, m.q0, t) : 0.0;
            auto w = qbm::wigner_coherent(grid, m.center, t);
            wr[i] = w.center.real();
            wi[i] = w.center.imag();
            ww[i] = w.width;
            const double c = std::cos(t), sn = std::sin(t);
            vfree[i] = m.var_x0 * c * c + m.var_p0 * sn * sn + m.cov0 * std::sin(2 * t);
        }
        std::vector<std::string> header = {"t", "n_mean", "var_x", "mandel_q",
                                           "wigner_center_re", "wigner_center_im",
                                           "wigner_width"};
        std::vector<std::vector<double>> cols = {grid.t, nm, vx, q, wr, wi, ww};
        if (free_reference) { header.push_back("var_x_free"); cols.push_back(vfree); }
        emit_csv(out, header, cols);
        meta["spec"] = spec_echo(s);
        meta["state"] = state_str;
    } else if (*mc) {
        qbm::ReservoirSpec s{alpha, r, tf_mc.resolve(r, meta)};
        s.validate();
        qbm::TrajectoryConfig cfg;
        parse_state(state_str, &cfg.initial);
        cfg.n_max = n_max;
        cfg.beta = beta;
        cfg.seed = seed;
        cfg.n_traj = ntraj;
        cfg.n_workers = workers;
        cfg.t_grid = qbm::linspace_grid(tmax, n_samples);
        cfg.drift_step = std::min(1.0 / s.r, 1.0) / 40.0;
        // fine grid for the drift integrals, horizon matching the samples
        auto grid = qbm::build_grid(
            s, qbm::linspace_grid(tmax, std::max<std::size_t>(2001, n_samples)));
        auto est = qbm::run_ensemble(cfg, grid);
        const std::size_t n = est.t.size();
        std::vector<double> analytic(n), jumps(n, est.mean_jumps);
        for (std::size_t i = 0; i < n; ++i)
            analytic[i] = qbm::heating_at(grid, cfg.initial.n0(), est.t[i]);
        emit_csv(out, {"t", "n_mc", "n_stderr", "n_analytic", "jumps_mean"},
                 {est.t, est.n_mean, est.n_stderr, analytic, jumps});
        meta["spec"] = spec_echo(s);
        meta["state"] = state_str;
        meta["ntraj"] = ntraj;
        meta["beta"] = beta;
        meta["seed"] = seed;
        meta["multi_jump_fraction"] = est.multi_jump_fraction;
        meta["mean_jumps"] = est.mean_jumps;
    } else if (*b_classify) {
        qbm::ReservoirSpec s{alpha, r, tf_cls.resolve(r, meta)};
        const auto verdict = qbm::classify(s, horizon);
        std::cout << qbm::to_string(verdict) << '\n';
        meta["spec"] = spec_echo(s);
        meta["verdict"] = qbm::to_string(verdict);
    } else if (*b_profile) {
        qbm::ReservoirSpec s{alpha, r, tf_prof.resolve(r, meta)};
        auto profiles = qbm::sign_profile(s, horizon);
        std::vector<double> qty, t0s, t1s;
        for (const auto& p : profiles)
            for (const auto& [a, b] : p.negative_intervals) {
                qty.push_back(static_cast<double>(p.quantity));
                t0s.push_back(a);
                t1s.push_back(b);
            }
        emit_csv(out, {"quantity", "t_start", "t_end"}, {qty, t0s, t1s});
        meta["spec"] = spec_echo(s);
    } else if (*b_critical) {
        const double rc_crit = qbm::critical_r_high_t(crit_horizon, tol_r);
        std::cout << qbm::format_double(rc_crit) << '\n';
        meta["critical_r"] = rc_crit;
    } else if (*b_contour) {
        const auto reg = regime == "hight" ? qbm::ContourRegime::HighT
                                           : qbm::ContourRegime::General;
        auto g = qbm::contour_grid(reg, r_min, r_max, t_max_wc, c_nr, c_nt,
                                   alpha, rc2pi);
        // matrix CSV: first column r, remaining columns the t axis
        std::vector<std::string> header = {"r"};
        for (double t : g.t_axis) header.push_back("t=" + qbm::format_double(t));
        std::vector<std::vector<double>> cols(1 + g.t_axis.size());
        cols[0] = g.r_axis;
        for (std::size_t j = 0; j < g.t_axis.size(); ++j) {
            cols[j + 1].resize(g.r_axis.size());
            for (std::size_t i = 0; i < g.r_axis.size(); ++i)
                cols[j + 1][i] = g.values[i][j];
        }
        emit_csv(out, header, cols);
        if (!json_out.empty()) {
            auto border_line = qbm::zero_contour(g);
            std::vector<double> rs, ts;
            for (auto& [rv, tv] : border_line) { rs.push_back(rv); ts.push_back(tv); }
            emit_csv(json_out, {"r", "t_first_negative"}, {rs, ts});
        }
        return kExitOk;
    } else if (*wig) {
        qbm::ReservoirSpec s{alpha, r, tf_wig.resolve(r, meta)};
        s.validate();
        qbm::InitialKind dummy;
        auto m = parse_state("coherent:" + alpha0_str, &dummy);
        auto grid = qbm::build_grid(s, qbm::linspace_grid(tmax, n_points));
        const std::size_t n = grid.size();
        std::vector<double> wr(n), wi(n), ww(n);
        for (std::size_t i = 0; i < n; ++i) {
            auto w = qbm::wigner_coherent(grid, m.center, grid.t[i]);
            wr[i] = w.center.real();
            wi[i] = w.center.imag();
            ww[i] = w.width;
        }
        emit_csv(out, {"t", "center_re", "center_im", "width"},
                 {grid.t, wr, wi, ww});
        if (field_n > 1 && !snap_times.empty()) {
            for (std::size_t k = 0; k < snap_times.size(); ++k) {
                auto w = qbm::wigner_coherent(grid, m.center, snap_times[k]);
                std::vector<double> xs, ps, vals;
                for (int i = 0; i < field_n; ++i)
                    for (int j = 0; j < field_n; ++j) {
                        const double x = -field_extent + 2 * field_extent * i / (field_n - 1);
                        const double p = -field_extent + 2 * field_extent * j / (field_n - 1);
                        xs.push_back(x);
                        ps.push_back(p);
                        vals.push_back(w(qbm::Complex(x, p)));
                    }
                emit_csv(snapshot_prefix + "t" + std::to_string(k) + ".csv",
                         {"re_alpha", "im_alpha", "w"}, {xs, ps, vals});
            }
        }
        meta["spec"] = spec_echo(s);
        meta["alpha0"] = alpha0_str;
    }

    meta["wall_seconds"] =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
    emit_json(json_out, meta);
    return kExitOk;
}

} // namespace

int main(int argc, char** argv) {
    try {
        return run(argc, argv);
    } catch (const qbm::DomainError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitValidation;
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitValidation;
    } catch (const std::exception& e) {
        std::cerr << "numerical error: " << e.what() << '\n';
        return kExitNumerical;
    }
}
