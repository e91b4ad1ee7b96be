#include "fwm/dynamics.hpp"

#include <cmath>
#include <sstream>

namespace fwm
{
cplx seed_injection(double t, const SeedConfig &seed, double gamma_minus)
{
    switch (seed.mode)
    {
    case SeedMode::None:
        return {};
    case SeedMode::Constant:
        return gamma_minus * seed.epsilon;
    case SeedMode::ExponentialRamp:
        return gamma_minus * seed.epsilon * (t > 0.0 ? -std::expm1(-t / seed.tau) : 0.0);
    }
    return {};
}

FieldDerivative rhs_full(const FieldState &s, const SystemConfig &cfg, double t)
{
    const cplx i{0.0, 1.0};
    const cplx a0 = s.alpha0, am = s.alpha_minus, ap = s.alpha_plus;
    const cplx a0_sq = a0 * a0;
    const cplx pump_in = std::sqrt(2.0 * cfg.pump.gamma_in) * drive_amplitude(cfg.drive);

    FieldDerivative d;
    d.d_alpha0 = -2.0 * std::conj(cfg.g) * std::conj(a0) * am * ap -
                 (cfg.pump.gamma_total() + i * cfg.delta_pump()) * a0 - pump_in;
    d.d_alpha_minus = cfg.g * a0_sq * std::conj(ap) -
                      (cfg.idler.gamma_total() + i * cfg.delta_idler()) * am +
                      seed_injection(t, cfg.seed, cfg.idler.gamma_total());
    d.d_alpha_plus =
        cfg.g * a0_sq * std::conj(am) - (cfg.signal.gamma_total() + i * cfg.delta_signal()) * ap;
    return d;
}

cplx rhs_reduced(cplx alpha0, cplx alpha_minus, const SystemConfig &cfg, ReducedForm form)
{
    const double gm = cfg.idler.gamma_total();
    const double gp = cfg.signal.gamma_total();
    const double dm = cfg.delta_idler();
    const double dp = cfg.delta_signal();
    const double pump4 = std::norm(alpha0) * std::norm(alpha0);

    if (form == ReducedForm::Derived)
    {
        const cplx gain = std::norm(cfg.g) * pump4 / cplx(gp, -dp);
        return (gain - cplx(gm, dm)) * alpha_minus;
    }
    // Printed bracket; Delta_1 is factored through so Delta_- = 0 is allowed.
    const double g_eff = std::abs(cfg.g) * (gp / gm) / std::hypot(gp, dp);
    const double re = gm * (1.0 - g_eff * pump4);
    const double im = dm - g_eff * dp * gm / gp * pump4;
    return -cplx(re, im) * alpha_minus;
}

cplx adiabatic_signal(cplx alpha0, cplx alpha_minus, const SystemConfig &cfg)
{
    return cfg.g * alpha0 * alpha0 * std::conj(alpha_minus) /
           cplx(cfg.signal.gamma_total(), cfg.delta_signal());
}

bool adiabatic_regime(const SystemConfig &cfg, double margin)
{
    const double gp = cfg.signal.gamma_total();
    return gp >= margin * cfg.idler.gamma_total() && gp >= margin * cfg.pump.gamma_total();
}

void SolverOptions::validate() const
{
    if (!(rel_tol > 0.0) || !(abs_tol > 0.0))
        throw ConfigError("solver tolerances must be > 0");
    if (!(max_step > 0.0))
        throw ConfigError("solver.max_step must be > 0");
    if (method == SolverMethod::FixedRK4)
    {
        const double h = fixed_step > 0.0 ? fixed_step : max_step;
        if (!std::isfinite(h))
            throw ConfigError("FixedRK4 needs a finite fixed_step or max_step");
    }
    for (std::size_t k = 1; k < sample_times.size(); ++k)
        if (!(sample_times[k] > sample_times[k - 1]))
            throw ConfigError("solver.sample_times must be strictly increasing");
}

namespace
{
template <std::size_t N, class Rhs, class ToState>
Trajectory run(Rhs &&rhs_tau, ode::State<N> y0, const FieldState &initial, const SystemConfig &cfg,
               double t_end, const SolverOptions &opts, ToState &&to_state)
{
    opts.validate();
    if (!(t_end > initial.t))
    {
        std::ostringstream oss;
        oss << "integrate: t_end (" << t_end << ") must exceed the initial time (" << initial.t << ")";
        throw ConfigError(oss.str());
    }

    const double rate = cfg.time_scale();
    const double tau0 = initial.t * rate;
    const double tau_end = t_end * rate;

    std::vector<double> grid;
    if (!opts.sample_times.empty())
    {
        for (double ts : opts.sample_times)
            if (ts > initial.t && ts <= t_end)
                grid.push_back(ts * rate);
    }
    else if (opts.n_samples > 0)
    {
        grid.reserve(opts.n_samples);
        const double span = t_end - initial.t;
        for (std::size_t k = 1; k <= opts.n_samples; ++k)
            grid.push_back((initial.t + span * static_cast<double>(k) / opts.n_samples) * rate);
        grid.back() = tau_end;
    }

    ode::Settings settings;
    settings.rel_tol = opts.rel_tol;
    settings.abs_tol = opts.abs_tol;
    settings.max_step = opts.max_step * rate;
    settings.fixed_step = opts.fixed_step * rate;
    settings.max_steps = opts.max_steps;

    Trajectory traj;
    traj.method = opts.method;
    traj.samples.push_back(initial);
    double last_t = initial.t;
    auto emit = [&](double tau, const ode::State<N> &y) {
        const double t = tau / rate;
        if (t <= last_t)
            return;
        traj.samples.push_back(to_state(t, y));
        last_t = t;
    };
    auto stop = [&](double tau, const ode::State<N> &y) {
        return opts.stop ? opts.stop(to_state(tau / rate, y)) : false;
    };

    try
    {
        const ode::Stats st =
            opts.method == SolverMethod::AdaptiveRK
                ? ode::dopri5<N>(rhs_tau, tau0, y0, tau_end, settings, grid, emit, stop)
                : ode::rk4<N>(rhs_tau, tau0, y0, tau_end, settings, grid, emit, stop);
        traj.step_stats = {st.accepted, st.rejected, st.rhs_evals};
        traj.stopped_early = st.stopped_early;
    }
    catch (const IntegrationError &e)
    {
        // Report the time reached in seconds.
        throw IntegrationError(e.kind(), e.t_reached() / rate,
                               std::string(e.what()) + " (scaled time; " +
                                   std::to_string(e.t_reached() / rate) + " s)");
    }
    return traj;
}
}  // namespace

Trajectory integrate(const FieldState &initial, const SystemConfig &cfg, double t_end,
                     const SolverOptions &opts)
{
    const double rate = cfg.time_scale();
    auto rhs = [&cfg, rate](double tau, const ode::State<3> &y) {
        const FieldState s{y[0], y[1], y[2], tau / rate};
        const FieldDerivative d = rhs_full(s, cfg, s.t);
        return ode::State<3>{d.d_alpha0 / rate, d.d_alpha_minus / rate, d.d_alpha_plus / rate};
    };
    auto to_state = [](double t, const ode::State<3> &y) { return FieldState{y[0], y[1], y[2], t}; };
    return run<3>(rhs, {initial.alpha0, initial.alpha_minus, initial.alpha_plus}, initial, cfg, t_end,
                  opts, to_state);
}

Trajectory integrate_reduced(cplx alpha0, const FieldState &initial, const SystemConfig &cfg,
                             double t_end, const SolverOptions &opts, ReducedForm form)
{
    const double rate = cfg.time_scale();
    auto rhs = [&cfg, alpha0, rate, form](double tau, const ode::State<1> &y) {
        const double t = tau / rate;
        const cplx d = rhs_reduced(alpha0, y[0], cfg, form) +
                       seed_injection(t, cfg.seed, cfg.idler.gamma_total());
        return ode::State<1>{d / rate};
    };
    auto to_state = [&cfg, alpha0](double t, const ode::State<1> &y) {
        return FieldState{alpha0, y[0], adiabatic_signal(alpha0, y[0], cfg), t};
    };
    FieldState start = initial;
    start.alpha0 = alpha0;
    start.alpha_plus = adiabatic_signal(alpha0, initial.alpha_minus, cfg);
    return run<1>(rhs, {initial.alpha_minus}, start, cfg, t_end, opts, to_state);
}

}  // namespace fwm
