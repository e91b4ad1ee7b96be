// Acceptance suite: one PASS/FAIL line per criterion.
//
//   fwm_acceptance [--expect-fail N[,M...]] [--only N]
//
// Exit status is 0 when the set of failing criteria equals the expected set.

#include "support.hpp"

#include "fwm/cli.hpp"

#include <CLI11.hpp>

#include <chrono>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iomanip>
#include <iostream>
#include <set>
#include <sstream>

using namespace fwm;
using test::DeskParams;
using test::desk;

namespace
{
// Pinned tolerances.
constexpr double kPumpOnlyTol = 1e-9;
constexpr double kPumpOnlyBudget_s = 10.0;
constexpr double kThresholdAgreement = 0.01;
constexpr double kClosedFormTol = 1e-10;
constexpr double kThresholdBudget_s = 120.0;
constexpr double kFluxBalanceTol = 1e-6;
constexpr double kSignalSlope = 2.00, kSignalSlopeTol = 0.05;
constexpr double kIdlerSlopeRatio = 1e-2;
constexpr double kGainClampTol = 1e-4;  // in units of gamma-
constexpr double kSymmetryTol = 1e-6;   // relative to the trajectory scale
constexpr double kPrintedFormulaTol = 1e-15;

struct Outcome
{
    bool pass;
    std::string detail;
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

std::string fmt(double v, int digits = 3)
{
    std::ostringstream o;
    o << std::setprecision(digits) << v;
    return o.str();
}

DeskParams random_desk(std::mt19937_64 &rng)
{
    std::uniform_real_distribution<double> u(0.0, 1.0);
    DeskParams p;
    p.gamma_minus = 1.0;
    p.ratio = 2.0 + 18.0 * u(rng);
    p.gamma0 = 0.5 + 1.5 * u(rng);
    p.in_fraction = 0.1 + 0.8 * u(rng);
    p.delta0 = 4.0 * u(rng) - 2.0;
    p.delta_minus = 2.0 * u(rng) - 1.0;
    p.g = std::polar(0.5 + u(rng), 6.0 * u(rng));
    p.seed.epsilon = std::polar(1e-6, 6.0 * u(rng));
    return p;
}

double max_abs(const FieldState &s)
{
    return std::max({std::abs(s.alpha0), std::abs(s.alpha_minus), std::abs(s.alpha_plus)});
}

double slope(const std::vector<double> &x, const std::vector<double> &y)
{
    const double n = static_cast<double>(x.size());
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < x.size(); ++i)
    {
        sx += x[i];
        sy += y[i];
        sxx += x[i] * x[i];
        sxy += x[i] * y[i];
    }
    return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

Outcome pump_only_oracle()
{
    const auto t0 = Clock::now();
    std::mt19937_64 rng(101);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    double worst = 0.0;
    for (int i = 0; i < 100; ++i)
    {
        DeskParams p = random_desk(rng);
        p.g = 0.0;
        p.flux = 0.1 + 10.0 * u(rng);
        SystemConfig cfg = desk(p);
        cfg.drive.phase = 6.0 * u(rng);
        SolverOptions opts;
        opts.rel_tol = 1e-12;
        opts.abs_tol = 1e-15;
        const double t_end = 45.0 / cfg.pump.gamma_total();
        const FieldState end = integrate(FieldState{}, cfg, t_end, opts).back();
        worst = std::max(worst, test::rel_diff(end.alpha0, pump_only_steady_state(cfg)));
    }
    const double elapsed = seconds_since(t0);
    return {worst <= kPumpOnlyTol && elapsed < kPumpOnlyBudget_s,
            "100 configs, max rel err " + fmt(worst) + " (tol " + fmt(kPumpOnlyTol) + "), " + fmt(elapsed) +
                " s (budget " + fmt(kPumpOnlyBudget_s) + " s)"};
}

Outcome threshold_equivalence()
{
    const auto t0 = Clock::now();
    std::mt19937_64 rng(202);
    double worst_methods = 0.0, worst_closed = 0.0, worst_exact = 0.0;
    for (int i = 0; i < 20; ++i)
    {
        const DeskParams p = random_desk(rng);
        const SystemConfig cfg = desk(p);
        const double ec = oscillation_threshold(cfg).power_threshold;
        const double so = oscillation_threshold(cfg, ThresholdCriterion::SimulatedOnset).power_threshold;
        worst_methods = std::max(worst_methods, test::rel_diff(ec, so));

        DeskParams q = p;
        q.delta_minus = 0.0;
        const SystemConfig c0 = desk(q);
        const ThresholdResult th = oscillation_threshold(c0);
        const double n = std::norm(pump_only_steady_state(test::with_flux(c0, th.flux_threshold)));
        const double lhs = std::norm(c0.g) * n * n;
        const double gm = c0.idler.gamma_total(), gp = c0.signal.gamma_total(), dp = c0.delta_signal();
        const double closed = gm * (gp * gp + dp * dp) / gp;
        worst_closed = std::max(worst_closed, test::rel_diff(lhs, closed));
        const double exact = gm * gp * (1.0 + std::pow(2.0 * c0.delta_pump() / (gp + gm), 2));
        worst_exact = std::max(worst_exact, test::rel_diff(lhs, exact));
    }
    const double elapsed = seconds_since(t0);
    const bool pass = worst_methods <= kThresholdAgreement && worst_closed <= kClosedFormTol &&
                      elapsed < kThresholdBudget_s;
    return {pass, "20 configs, EC vs SO max rel diff " + fmt(worst_methods) + " (tol " +
                      fmt(kThresholdAgreement) + "); stated closed form max rel err " + fmt(worst_closed) +
                      " (tol " + fmt(kClosedFormTol) + "); exact crossing gamma-gamma+(1+(2D0/(gamma++gamma-))^2) " +
                      fmt(worst_exact) + "; " + fmt(elapsed) + " s"};
}

Outcome flux_balance()
{
    const SystemConfig cfg = test::measured_scale();
    SweepOptions so;
    so.threshold_multiple = 2.0;
    std::vector<double> offsets;
    for (int i = 0; i < 50; ++i)
        offsets.push_back(-1000.0 + 2000.0 * i / 49.0);
    const SweepResult res = sweep_detuning(cfg, offsets, so);
    double worst = 0.0;
    int counted = 0;
    for (const auto &r : res.rows)
    {
        if (!(r.converged && r.oscillating))
            continue;
        const auto &s = r.steady.state;
        const SystemConfig c = detuning_point_config(cfg, r.swept, so);
        worst = std::max(worst, test::rel_diff(c.idler.gamma_total() * std::norm(s.alpha_minus),
                                               c.signal.gamma_total() * std::norm(s.alpha_plus)));
        ++counted;
    }
    return {counted == 50 && worst <= kFluxBalanceTol,
            std::to_string(counted) + "/50 converged above threshold, max rel err " + fmt(worst) + " (tol " +
                fmt(kFluxBalanceTol) + ")"};
}

Outcome frequency_clamping()
{
    const SystemConfig cfg = test::measured_scale(0.0, dbm_to_watts(5.0), 1e3);
    SweepOptions so;
    so.threshold_multiple = 2.0;
    std::vector<double> offsets;
    for (int i = 0; i <= 20; ++i)
        offsets.push_back(-1000.0 + 100.0 * i);
    const SweepResult res = sweep_detuning(cfg, offsets, so);
    std::vector<double> x, fi, fs;
    for (const auto &r : res.rows)
        if (r.converged && r.oscillating)
        {
            x.push_back(r.swept);
            fi.push_back(r.idler_offset_hz);
            fs.push_back(r.signal_offset_hz);
        }
    if (x.size() < 3)
        return {false, "too few oscillating points"};
    const double ks = slope(x, fs), ki = slope(x, fi);
    const double span = *std::max_element(fi.begin(), fi.end()) - *std::min_element(fi.begin(), fi.end());
    return {x.size() == offsets.size() && std::abs(ks - kSignalSlope) <= kSignalSlopeTol &&
                std::abs(ki) <= kIdlerSlopeRatio * std::abs(ks),
            std::to_string(x.size()) + " points over +-1 kHz: signal slope " + fmt(ks, 5) + ", idler slope " +
                fmt(ki, 3) + " (idler spread " + fmt(span, 3) + " Hz)"};
}

Outcome gain_clamping()
{
    std::mt19937_64 rng(505);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    double worst = 0.0;
    int converged = 0;
    for (int i = 0; i < 20; ++i)
    {
        const DeskParams p = random_desk(rng);
        SystemConfig cfg = desk(p);
        cfg = test::with_flux(cfg, (1.2 + 3.0 * u(rng)) * oscillation_threshold(cfg).flux_threshold);
        const SteadyState ss = steady_state(cfg, {pump_only_steady_state(cfg), {}, {}, 0.0});
        if (!(ss.converged && ss.oscillating))
            continue;
        ++converged;
        worst = std::max(worst, std::abs(sideband_growth_rate(ss.state.alpha0, cfg)) / cfg.idler.gamma_total());
    }
    return {converged == 20 && worst <= kGainClampTol,
            std::to_string(converged) + "/20 converged, max |max Re eig|/gamma- " + fmt(worst) + " (tol " +
                fmt(kGainClampTol) + ")"};
}

Outcome symmetry_suite()
{
    std::mt19937_64 rng(606);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    double worst_phase = 0.0, worst_scale = 0.0;
    for (int i = 0; i < 5; ++i)
    {
        DeskParams p = random_desk(rng);
        p.seed.epsilon = std::polar(1e-3, 6.0 * u(rng));
        SystemConfig cfg = desk(p);
        cfg = test::with_flux(cfg, 2.0 * oscillation_threshold(cfg).flux_threshold);
        SolverOptions opts;
        opts.rel_tol = 1e-10;
        opts.abs_tol = 1e-14;
        opts.n_samples = 200;
        const double t_end = 30.0;
        const Trajectory ref = integrate(FieldState{}, cfg, t_end, opts);
        double scale = 0.0;
        for (const auto &s : ref.samples)
            scale = std::max(scale, max_abs(s));

        SystemConfig rot = cfg;
        rot.drive.phase += 0.5 + 2.0 * u(rng);
        const Trajectory tr = integrate(FieldState{}, rot, t_end, opts);
        for (std::size_t k = 0; k < ref.samples.size(); ++k)
        {
            const auto &a = ref.samples[k], &b = tr.samples[k];
            worst_phase = std::max({worst_phase, std::abs(std::abs(a.alpha0) - std::abs(b.alpha0)) / scale,
                                    std::abs(std::abs(a.alpha_minus) - std::abs(b.alpha_minus)) / scale,
                                    std::abs(std::abs(a.alpha_plus) - std::abs(b.alpha_plus)) / scale});
        }

        for (const double s : {0.1, 10.0})
        {
            SystemConfig sc = cfg;
            sc.g /= s * s;
            sc.drive.power *= s * s;
            sc.seed.epsilon *= s;
            const Trajectory ts = integrate(FieldState{}, sc, t_end, opts);
            for (std::size_t k = 0; k < ref.samples.size(); ++k)
            {
                const auto &a = ref.samples[k], &b = ts.samples[k];
                worst_scale = std::max({worst_scale, std::abs(b.alpha0 - s * a.alpha0) / (s * scale),
                                        std::abs(b.alpha_minus - s * a.alpha_minus) / (s * scale),
                                        std::abs(b.alpha_plus - s * a.alpha_plus) / (s * scale)});
            }
        }
    }
    return {worst_phase <= kSymmetryTol && worst_scale <= kSymmetryTol,
            "5 configs: phase rotation max dev " + fmt(worst_phase) + ", scaling s in {0.1, 10} max dev " +
                fmt(worst_scale) + " (tol " + fmt(kSymmetryTol) + ")"};
}

Outcome printed_nonlinearity()
{
    // (3^2 + 4^2) / (2 * 1.25) * hbar * 100 / 2e-30, worked by hand: 10 * 1.054571817e-34 * 5e31.
    const double hand = 0.05272859085;
    const double got = effective_nonlinearity_from_threshold(3.0, 4.0, 1.25, 100.0, 2e-30);
    const double err_hand = test::rel_diff(got, hand);

    // Default pump at a computed threshold.
    const SystemConfig cfg = test::measured_scale(300.0);
    const ThresholdResult th = oscillation_threshold(cfg);
    const double g0 = cfg.pump.gamma_total(), d0 = cfg.delta_pump();
    const double by_hand = (g0 * g0 + d0 * d0) * kHbar * cfg.pump.omega / (2.0 * cfg.pump.gamma_in * th.power_threshold);
    const double computed = effective_nonlinearity_from_threshold(g0, d0, cfg.pump.gamma_in, cfg.pump.omega,
                                                                  th.power_threshold);
    const double err_cfg = test::rel_diff(computed, by_hand);

    // Diagnostic only.
    double lo = 1e300, hi = 0.0;
    for (const double off : {-2000.0, -1000.0, -300.0, -100.0, 100.0, 300.0, 1000.0, 2000.0})
    {
        SweepOptions so;
        const SystemConfig c = detuning_point_config(cfg, off, so);
        const double p = oscillation_threshold(c).power_threshold;
        const double gp = effective_nonlinearity_from_threshold(c.pump.gamma_total(), c.delta_pump(),
                                                                c.pump.gamma_in, c.pump.omega, p);
        lo = std::min(lo, gp);
        hi = std::max(hi, gp);
    }
    const bool overlap = lo <= 1e-17 && hi >= 1e-18;
    return {err_hand <= kPrintedFormulaTol && err_cfg <= kPrintedFormulaTol,
            "hand arithmetic rel err " + fmt(err_hand) + ", computed threshold rel err " + fmt(err_cfg) +
                "; diagnostic: g' over +-2 kHz spans [" + fmt(lo) + ", " + fmt(hi) + "] vs reference 1e-18..1e-17 (" +
                (overlap ? "overlaps" : "no overlap") + ", not asserted)"};
}

Outcome onset_ordering()
{
    SystemConfig cfg = test::measured_scale();
    cfg.seed = {1e-6, 2.0, SeedMode::ExponentialRamp};
    const double th = oscillation_threshold(cfg).power_threshold;
    std::vector<double> delays;
    std::string listing;
    for (const double m : {1.2, 1.5, 2.0, 3.0, 5.0})
    {
        cfg.drive.power = m * th;
        SolverOptions opts;
        opts.n_samples = 4000;
        const Trajectory tr = integrate(FieldState{}, cfg, 40.0, opts);
        const auto d = onset_delay(tr, 0.5, oscillation_floor(cfg));
        if (!d)
            return {false, "no onset at " + fmt(m) + " x threshold"};
        delays.push_back(*d);
        listing += (listing.empty() ? "" : ", ") + fmt(m) + "x: " + fmt(*d, 4) + " s";
    }
    bool decreasing = true;
    for (std::size_t i = 1; i < delays.size(); ++i)
        decreasing = decreasing && delays[i] < delays[i - 1];
    return {decreasing, "tau = 2 s, delays " + listing};
}

Outcome cli_reproducibility()
{
    namespace fs = std::filesystem;
    const fs::path root = fs::temp_directory_path() / "fwm_acceptance_cli";
    fs::remove_all(root);
    const std::vector<std::vector<std::string>> commands = {
        {"simulate", "--t-end", "2", "--samples", "200", "--power", "10 dBm"},
        {"steady", "--power", "20 dBm", "--pump-offset-hz", "30"},
        {"threshold"},
        {"sweep-detuning", "--points", "11", "--threshold-multiple", "2"},
        {"sweep-power", "--points", "11"},
        {"nonlinearity", "--points", "11"},
    };
    int identical = 0, files = 0;
    std::string bad;
    for (std::size_t i = 0; i < commands.size(); ++i)
    {
        std::vector<fs::path> dirs;
        for (int rep = 0; rep < 2; ++rep)
        {
            dirs.push_back(root / (std::to_string(i) + "_" + std::to_string(rep)));
            auto args = commands[i];
            args.insert(args.end(), {"-o", dirs.back().string()});
            std::ostringstream out, err;
            if (run_cli(args, out, err) != kExitOk)
                return {false, commands[i][0] + " failed: " + err.str()};
        }
        for (const auto &entry : fs::directory_iterator(dirs[0]))
        {
            if (entry.path().extension() != ".csv")
                continue;
            ++files;
            auto slurp = [](const fs::path &p) {
                std::ifstream in(p, std::ios::binary);
                std::ostringstream ss;
                ss << in.rdbuf();
                return ss.str();
            };
            if (slurp(entry.path()) == slurp(dirs[1] / entry.path().filename()))
                ++identical;
            else
                bad += " " + entry.path().filename().string();
        }
    }
    return {identical == files && files > 0, std::to_string(identical) + "/" + std::to_string(files) +
                                                 " CSV files byte-identical across repeated runs" + bad};
}

}  // namespace

int main(int argc, char **argv)
{
    CLI::App app{"Acceptance criteria"};
    std::vector<int> expected;
    int only = 0;
    app.add_option("--expect-fail", expected, "Criteria expected to fail")->delimiter(',');
    app.add_option("--only", only, "Run a single criterion");
    CLI11_PARSE(app, argc, argv);

    const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
        {"pump-only oracle", pump_only_oracle},
        {"threshold equivalence", threshold_equivalence},
        {"flux-balance invariant", flux_balance},
        {"frequency clamping", frequency_clamping},
        {"gain clamping", gain_clamping},
        {"symmetry suite", symmetry_suite},
        {"printed nonlinearity formula", printed_nonlinearity},
        {"onset-delay ordering", onset_ordering},
        {"CLI reproducibility", cli_reproducibility},
    };

    std::set<int> failed;
    for (std::size_t i = 0; i < criteria.size(); ++i)
    {
        const int id = static_cast<int>(i) + 1;
        if (only && id != only)
            continue;
        Outcome o;
        try
        {
            o = criteria[i].second();
        }
        catch (const std::exception &e)
        {
            o = {false, std::string("exception: ") + e.what()};
        }
        if (!o.pass)
            failed.insert(id);
        std::cout << (o.pass ? "PASS" : "FAIL") << "  " << id << ". " << criteria[i].first << ": " << o.detail
                  << std::endl;
    }

    std::set<int> want;
    for (const int e : expected)
        if (!only || e == only)
            want.insert(e);
    if (failed != want)
    {
        std::cout << "acceptance: failing set differs from the expected set\n";
        return 1;
    }
    return 0;
}
