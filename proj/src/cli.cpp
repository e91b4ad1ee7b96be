#include "fwm/cli.hpp"

#include "fwm/config.hpp"
#include "fwm/report.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <limits>
#include <optional>
#include <sstream>

namespace fwm
{
namespace
{
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

struct Invocation
{
    std::string command;
    std::string config_path;
    std::string out_dir = "fwm_out";
    bool plot = false;
    std::vector<std::string> sets;
    // Shorthand flags; each maps onto one config key.
    std::optional<std::string> power, start, stop, seed_mode, criterion;
    std::optional<double> pump_offset_hz, g_abs, gamma_ratio, seed_eps, seed_tau, t_end, threshold_multiple;
    std::optional<long> samples, points, threads;
};

struct Context
{
    RunConfig run;
    std::string out_dir;
    bool plot = false;
    std::vector<std::string> outputs;
    std::ostream *out = nullptr;

    std::string path(const std::string &name)
    {
        outputs.push_back(name);
        return (std::filesystem::path(out_dir) / name).string();
    }
};

ConfigEntries collect_entries(const Invocation &inv)
{
    ConfigEntries entries;
    if (!inv.config_path.empty())
    {
        std::ifstream in(inv.config_path);
        if (!in)
            throw ConfigError("cannot open config file '" + inv.config_path + "'");
        std::ostringstream ss;
        ss << in.rdbuf();
        entries = parse_config_text(ss.str());
    }
    auto put = [&](const std::string &key, const std::string &value) { entries[key] = {value, 0, 0}; };
    for (const auto &s : inv.sets)
    {
        const auto eq = s.find('=');
        if (eq == std::string::npos)
            throw ConfigError("--set expects section.key=value (got " + s + ")");
        put(s.substr(0, eq), s.substr(eq + 1));
    }
    auto put_num = [&](const std::string &key, const auto &v) {
        if (v)
        {
            std::ostringstream oss;
            if constexpr (std::is_same_v<std::decay_t<decltype(*v)>, double>)
                oss << format_number(*v);
            else
                oss << *v;
            put(key, oss.str());
        }
    };
    if (inv.power)
        put("drive.power", *inv.power);
    put_num("drive.offset_hz", inv.pump_offset_hz);
    put_num("nonlinearity.g_abs", inv.g_abs);
    put_num("signal.gamma_ratio", inv.gamma_ratio);
    if (inv.seed_mode)
        put("seed.mode", *inv.seed_mode);
    put_num("seed.epsilon_re", inv.seed_eps);
    put_num("seed.tau_s", inv.seed_tau);
    if (inv.criterion)
        put("threshold.criterion", *inv.criterion);
    put_num("simulate.t_end_s", inv.t_end);
    put_num("simulate.samples", inv.samples);
    put_num("sweep.points", inv.points);
    put_num("sweep.threshold_multiple", inv.threshold_multiple);
    put_num("sweep.threads", inv.threads);
    const bool power_sweep = inv.command == "sweep-power";
    if (inv.start)
        put(power_sweep ? "sweep.power_start" : "sweep.offset_start_hz", *inv.start);
    if (inv.stop)
        put(power_sweep ? "sweep.power_stop" : "sweep.offset_stop_hz", *inv.stop);
    return entries;
}

double dbm_or_nan(double watts) { return watts > 0.0 ? watts_to_dbm(watts) : kNaN; }

void cmd_simulate(Context &ctx)
{
    const SystemConfig cfg = ctx.run.system();
    SolverOptions opts = ctx.run.solver();
    opts.n_samples = static_cast<std::size_t>(ctx.run.samples);
    const Trajectory traj = integrate(FieldState{}, cfg, ctx.run.t_end_s, opts);

    CsvTable table({"t_s", "pump_re", "pump_im", "idler_re", "idler_im", "signal_re", "signal_im", "pump_out_W",
                    "idler_out_W", "signal_out_W"});
    std::vector<double> t, p0, pm, pp;
    for (const auto &s : traj.samples)
    {
        const double a = output_power(s.alpha0, cfg.pump), b = output_power(s.alpha_minus, cfg.idler),
                     c = output_power(s.alpha_plus, cfg.signal);
        table.add_row({s.t, s.alpha0.real(), s.alpha0.imag(), s.alpha_minus.real(), s.alpha_minus.imag(),
                       s.alpha_plus.real(), s.alpha_plus.imag(), a, b, c});
        t.push_back(s.t);
        p0.push_back(a);
        pm.push_back(b);
        pp.push_back(c);
    }
    table.write(ctx.path("trajectory.csv"));

    const double floor = oscillation_floor(cfg);
    const bool oscillating = std::abs(traj.back().alpha_minus) > floor;
    double f_idler = kNaN, f_signal = kNaN, delay = kNaN;
    std::string note;
    if (oscillating)
    {
        try
        {
            FrequencyWindow w;
            w.amplitude_floor = floor;
            f_idler = extract_frequency_offset(traj, ModeRole::Idler, w);
            f_signal = extract_frequency_offset(traj, ModeRole::Signal, w);
        }
        catch (const AnalysisError &e)
        {
            note = e.what();
        }
        try
        {
            if (const auto d = onset_delay(traj, ctx.run.onset_ratio, floor))
                delay = *d;
        }
        catch (const AnalysisError &e)
        {
            note += (note.empty() ? "" : "; ") + std::string(e.what());
        }
    }
    CsvTable summary({"t_end_s", "oscillating", "onset_delay_s", "idler_frame_offset_hz", "signal_frame_offset_hz",
                      "pump_out_W", "idler_out_W", "signal_out_W", "accepted_steps", "rejected_steps", "note"});
    summary.add_row({traj.back().t, oscillating, delay, f_idler, f_signal, p0.back(), pm.back(), pp.back(),
                     traj.step_stats.accepted, traj.step_stats.rejected, note});
    summary.write(ctx.path("summary.csv"));

    if (ctx.plot)
        write_text_file(ctx.path("trajectory.svg"),
                        svg_line_plot({"Output power vs time", "t (s)", "P_out (W)", true},
                                      {{"pump", t, p0}, {"idler", t, pm}, {"signal", t, pp}}));
    *ctx.out << "simulate: " << traj.samples.size() << " samples, oscillating=" << (oscillating ? "yes" : "no")
             << "\n";
}

void cmd_steady(Context &ctx)
{
    const SystemConfig cfg = ctx.run.system();
    SteadyStateOptions so;
    so.solver = ctx.run.solver();
    const SteadyState ss = steady_state(cfg, {pump_only_steady_state(cfg), {}, {}, 0.0}, so);
    const auto &s = ss.state;
    const double nu = hz_to_angular(ss.pulling);
    CsvTable table({"converged", "oscillating", "residual", "pulling_hz", "pump_re", "pump_im", "idler_re",
                    "idler_im", "signal_re", "signal_im", "pump_out_W", "idler_out_W", "signal_out_W",
                    "idler_offset_hz", "signal_offset_hz"});
    table.add_row({ss.converged, ss.oscillating, ss.residual, ss.pulling, s.alpha0.real(), s.alpha0.imag(),
                   s.alpha_minus.real(), s.alpha_minus.imag(), s.alpha_plus.real(), s.alpha_plus.imag(),
                   output_power(s.alpha0, cfg.pump), output_power(s.alpha_minus, cfg.idler),
                   output_power(s.alpha_plus, cfg.signal),
                   ss.oscillating ? angular_to_hz(cfg.delta_idler() + nu) : kNaN,
                   ss.oscillating ? angular_to_hz(cfg.delta_signal() - nu) : kNaN});
    table.write(ctx.path("steady.csv"));
    *ctx.out << "steady: oscillating=" << (ss.oscillating ? "yes" : "no") << " pulling=" << ss.pulling << " Hz\n";
}

void cmd_threshold(Context &ctx)
{
    const SystemConfig cfg = ctx.run.system();
    const ThresholdResult th = oscillation_threshold(cfg, ctx.run.criterion, ctx.run.threshold_options());
    std::string warnings;
    for (const auto &w : th.warnings)
        warnings += (warnings.empty() ? "" : "; ") + w;
    const double g_eff = effective_nonlinearity_from_threshold(cfg.pump.gamma_total(), cfg.delta_pump(),
                                                               cfg.pump.gamma_in, cfg.pump.omega, th.power_threshold);
    CsvTable table({"power_threshold_W", "power_threshold_dBm", "flux_threshold", "criterion", "bracket_below_W",
                    "bracket_above_W", "g_eff", "warnings"});
    table.add_row({th.power_threshold, dbm_or_nan(th.power_threshold), th.flux_threshold,
                   std::string(to_string(th.criterion)), th.below, th.above, g_eff, warnings});
    table.write(ctx.path("threshold.csv"));
    *ctx.out << "threshold: " << format_number(th.power_threshold) << " W ("
             << format_number(dbm_or_nan(th.power_threshold)) << " dBm)\n";
}

void cmd_sweep_detuning(Context &ctx)
{
    const SystemConfig cfg = ctx.run.system();
    const auto offsets = ctx.run.sweep_offsets();
    const SweepResult res = sweep_detuning(cfg, offsets, ctx.run.sweep_options());
    CsvTable table({"offset_hz", "drive_power_W", "pump_out_W", "idler_out_W", "signal_out_W", "idler_offset_hz",
                    "signal_offset_hz", "threshold_W", "g_eff", "oscillating", "converged", "status"});
    std::vector<double> x, pm, pp, th;
    for (const auto &r : res.rows)
    {
        table.add_row({r.swept, r.drive_power, r.pump_power, r.idler_power, r.signal_power, r.idler_offset_hz,
                       r.signal_offset_hz, r.threshold, r.g_eff, r.oscillating, r.converged, r.status});
        x.push_back(r.swept);
        pm.push_back(r.idler_power);
        pp.push_back(r.signal_power);
        th.push_back(r.threshold);
    }
    table.write(ctx.path("sweep_detuning.csv"));
    if (ctx.plot)
    {
        write_text_file(ctx.path("sweep_detuning_power.svg"),
                        svg_line_plot({"Sideband output vs pump offset", "pump offset (Hz)", "P_out (W)", true},
                                      {{"idler", x, pm}, {"signal", x, pp}}));
        write_text_file(ctx.path("sweep_detuning_threshold.svg"),
                        svg_line_plot({"Threshold vs pump offset", "pump offset (Hz)", "P_thresh (W)", true},
                                      {{"threshold", x, th}}));
    }
    *ctx.out << "sweep-detuning: " << res.rows.size() << " points\n";
}

void cmd_sweep_power(Context &ctx)
{
    const SystemConfig cfg = ctx.run.system();
    const SweepResult res = sweep_power(cfg, ctx.run.sweep_powers(), ctx.run.sweep_options());
    CsvTable table({"drive_power_W", "drive_power_dBm", "pump_out_W", "idler_out_W", "signal_out_W",
                    "idler_offset_hz", "signal_offset_hz", "oscillating", "converged", "status"});
    std::vector<double> x, p0, pm, pp;
    for (const auto &r : res.rows)
    {
        table.add_row({r.swept, dbm_or_nan(r.swept), r.pump_power, r.idler_power, r.signal_power, r.idler_offset_hz,
                       r.signal_offset_hz, r.oscillating, r.converged, r.status});
        x.push_back(r.swept);
        p0.push_back(r.pump_power);
        pm.push_back(r.idler_power);
        pp.push_back(r.signal_power);
    }
    table.write(ctx.path("sweep_power.csv"));
    if (ctx.plot)
        write_text_file(ctx.path("sweep_power.svg"),
                        svg_line_plot({"Output vs drive power", "P_in (W)", "P_out (W)", true},
                                      {{"pump", x, p0}, {"idler", x, pm}, {"signal", x, pp}}));
    *ctx.out << "sweep-power: " << res.rows.size() << " points\n";
}

void cmd_nonlinearity(Context &ctx)
{
    const SystemConfig cfg = ctx.run.system();
    const SweepOptions so = ctx.run.sweep_options();
    CsvTable table({"offset_hz", "detuning_unloaded_hbw", "threshold_W", "threshold_dBm", "g_eff_from_threshold",
                    "g_eff_printed", "g_eff_derived", "status"});
    std::vector<double> x, g7, th;
    double lo = std::numeric_limits<double>::infinity(), hi = -lo;
    for (const double offset : ctx.run.sweep_offsets())
    {
        const SystemConfig c = detuning_point_config(cfg, offset, so);
        const double unloaded = c.pump.gamma_intrinsic > 0.0 ? c.pump.gamma_intrinsic : c.pump.gamma_total();
        const double gp = c.signal.gamma_total(), gm = c.idler.gamma_total();
        const double g6 = effective_nonlinearity_printed(c.g, gp, gm, c.delta_signal());
        const double gd = effective_nonlinearity_derived(c.g, gp, gm, c.delta_signal());
        double p_th = kNaN, g_th = kNaN;
        std::string status = "ok";
        try
        {
            p_th = oscillation_threshold(c, so.criterion, so.threshold).power_threshold;
            g_th = effective_nonlinearity_from_threshold(c.pump.gamma_total(), c.delta_pump(), c.pump.gamma_in,
                                                         c.pump.omega, p_th);
            lo = std::min(lo, g_th);
            hi = std::max(hi, g_th);
        }
        catch (const std::exception &e)
        {
            status = e.what();
        }
        table.add_row({offset, c.delta_pump() / unloaded, p_th, dbm_or_nan(p_th), g_th, g6, gd, status});
        x.push_back(c.delta_pump() / unloaded);
        g7.push_back(g_th);
        th.push_back(p_th);
    }
    table.write(ctx.path("nonlinearity.csv"));
    if (ctx.plot)
    {
        write_text_file(ctx.path("nonlinearity_g_eff.svg"),
                        svg_line_plot({"Effective nonlinearity", "detuning (unloaded HBW)", "g'", true},
                                      {{"g' from threshold", x, g7}}));
        write_text_file(ctx.path("nonlinearity_threshold.svg"),
                        svg_line_plot({"Threshold power", "detuning (unloaded HBW)", "P_thresh (W)", true},
                                      {{"threshold", x, th}}));
    }
    // Diagnostic only: reference band of measured g' values.
    *ctx.out << "nonlinearity: g' from threshold spans [" << format_number(lo) << ", " << format_number(hi)
             << "]; reference band [1e-18, 1e-17]; "
             << ((lo <= 1e-17 && hi >= 1e-18) ? "overlaps" : "does not overlap") << " (diagnostic)\n";
}

std::string join_args(const std::vector<std::string> &args)
{
    std::string s;
    for (const auto &a : args)
    {
        std::string clean = a;
        std::replace(clean.begin(), clean.end(), '"', '\'');
        s += (s.empty() ? "" : " ") + clean;
    }
    return s;
}

void write_manifest(Context &ctx, const std::string &command, const std::vector<std::string> &args, double seconds)
{
    std::string outputs;
    for (const auto &o : ctx.outputs)
        outputs += (outputs.empty() ? "" : ";") + o;
    std::ostringstream m;
    m << "# Run manifest. Reload with --config to reproduce this run.\n"
      << "[manifest]\n"
      << "command = \"" << command << "\"\n"
      << "arguments = \"" << join_args(args) << "\"\n"
      << "tool_version = \"" << kToolVersion << "\"\n"
      << "wall_clock_s = " << format_number(seconds) << "\n"
      << "outputs = \"" << outputs << "\"\n\n"
      << dump_config(ctx.run);
    write_text_file((std::filesystem::path(ctx.out_dir) / "run_manifest.toml").string(), m.str());
}

}  // namespace

int run_cli(const std::vector<std::string> &args, std::ostream &out, std::ostream &err)
{
    CLI::App app{"Three-mode four-wave-mixing resonator simulator", "fwm"};
    app.require_subcommand(1, 1);
    app.set_version_flag("--version", kToolVersion);

    Invocation inv;
    const std::vector<std::pair<std::string, std::string>> commands = {
        {"simulate", "Integrate the three-mode equations from switch-on"},
        {"steady", "Stationary state (integration + Newton polish)"},
        {"threshold", "Oscillation threshold power"},
        {"sweep-detuning", "Sweep the pump offset from resonance"},
        {"sweep-power", "Sweep the incident pump power"},
        {"nonlinearity", "Effective nonlinearity and threshold vs detuning"},
    };
    for (const auto &[name, desc] : commands)
    {
        CLI::App *sub = app.add_subcommand(name, desc);
        sub->add_option("-c,--config", inv.config_path, "Config file (TOML-style)");
        sub->add_option("-o,--out", inv.out_dir, "Output directory")->capture_default_str();
        sub->add_flag("--plot", inv.plot, "Also write SVG plots");
        sub->add_option("--set", inv.sets, "Override a config key: section.key=value");
        sub->add_option("--power", inv.power, "Drive power, e.g. '5dBm' or '0.01W'");
        sub->add_option("--pump-offset-hz", inv.pump_offset_hz, "Drive offset from the pump resonance, Hz");
        sub->add_option("--g-abs", inv.g_abs, "|g|, rad/s");
        sub->add_option("--gamma-ratio", inv.gamma_ratio, "gamma+/gamma-");
        sub->add_option("--seed-mode", inv.seed_mode, "none|constant|exponential_ramp");
        sub->add_option("--seed-eps", inv.seed_eps, "Seed amplitude (real part)");
        sub->add_option("--seed-tau", inv.seed_tau, "Seed ramp time constant, s");
        sub->add_option("--criterion", inv.criterion, "eigenvalue_crossing|simulated_onset");
        sub->add_option("--t-end", inv.t_end, "Simulated time, s");
        sub->add_option("--samples", inv.samples, "Output samples");
        sub->add_option("--start", inv.start, "Sweep start (Hz offset, or power for sweep-power)");
        sub->add_option("--stop", inv.stop, "Sweep stop");
        sub->add_option("--points", inv.points, "Sweep points");
        sub->add_option("--threshold-multiple", inv.threshold_multiple,
                        "Detuning sweep: drive each point at this multiple of its threshold");
        sub->add_option("--threads", inv.threads, "Worker threads (default: FWM_THREADS or all cores)");
        sub->callback([&inv, n = name] { inv.command = n; });
    }

    try
    {
        std::vector<std::string> reversed(args.rbegin(), args.rend());
        app.parse(reversed);
    }
    catch (const CLI::CallForHelp &)
    {
        out << app.help();
        return kExitOk;
    }
    catch (const CLI::CallForAllHelp &)
    {
        out << app.help("", CLI::AppFormatMode::All);
        return kExitOk;
    }
    catch (const CLI::CallForVersion &)
    {
        out << kToolVersion << "\n";
        return kExitOk;
    }
    catch (const CLI::ParseError &e)
    {
        err << "error: " << e.what() << "\n\n" << app.help();
        return kExitUsage;
    }

    const auto t0 = std::chrono::steady_clock::now();
    try
    {
        Context ctx;
        ctx.run = config_from_entries(collect_entries(inv));
        ctx.out_dir = inv.out_dir;
        ctx.plot = inv.plot;
        ctx.out = &out;
        std::filesystem::create_directories(ctx.out_dir);

        if (inv.command == "simulate")
            cmd_simulate(ctx);
        else if (inv.command == "steady")
            cmd_steady(ctx);
        else if (inv.command == "threshold")
            cmd_threshold(ctx);
        else if (inv.command == "sweep-detuning")
            cmd_sweep_detuning(ctx);
        else if (inv.command == "sweep-power")
            cmd_sweep_power(ctx);
        else
            cmd_nonlinearity(ctx);

        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        write_manifest(ctx, inv.command, args, secs);
    }
    catch (const std::exception &e)
    {
        err << "error: " << e.what() << "\n";
        return kExitDomainError;
    }
    return kExitOk;
}

}  // namespace fwm
