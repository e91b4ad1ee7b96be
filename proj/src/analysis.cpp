#include "fwm/analysis.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <limits>
#include <sstream>
#include <thread>

namespace fwm
{
namespace
{
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

SystemConfig with_power(SystemConfig cfg, double power)
{
    cfg.drive.power = power;
    return cfg;
}

double seed_magnitude(const SeedConfig &seed)
{
    return seed.mode == SeedMode::None ? 0.0 : std::abs(seed.epsilon);
}

// Stationary equations in the frame where the idler rotates at `nu` and the
// signal at -nu.
struct Stationary
{
    cplx a0, am, ap;
    double nu = 0.0;
};

struct Residual
{
    cplx r0, rm, rp;
};

Residual stationary_residual(const Stationary &u, const SystemConfig &cfg, cplx seed)
{
    const cplx i{0.0, 1.0};
    const cplx pump_in = std::sqrt(2.0 * cfg.pump.gamma_in) * drive_amplitude(cfg.drive);
    const cplx a0_sq = u.a0 * u.a0;
    Residual r;
    r.r0 = -2.0 * std::conj(cfg.g) * std::conj(u.a0) * u.am * u.ap -
           (cfg.pump.gamma_total() + i * cfg.delta_pump()) * u.a0 - pump_in;
    r.rm = cfg.g * a0_sq * std::conj(u.ap) -
           (cfg.idler.gamma_total() + i * (cfg.delta_idler() + u.nu)) * u.am + seed;
    r.rp = cfg.g * a0_sq * std::conj(u.am) -
           (cfg.signal.gamma_total() + i * (cfg.delta_signal() - u.nu)) * u.ap;
    return r;
}

// Directional derivative of the residual along `d`.
Residual stationary_linearization(const Stationary &u, const Stationary &d, const SystemConfig &cfg)
{
    const cplx i{0.0, 1.0};
    const cplx gc = std::conj(cfg.g);
    Residual r;
    r.r0 = -2.0 * gc *
               (std::conj(d.a0) * u.am * u.ap + std::conj(u.a0) * d.am * u.ap +
                std::conj(u.a0) * u.am * d.ap) -
           (cfg.pump.gamma_total() + i * cfg.delta_pump()) * d.a0;
    r.rm = cfg.g * (2.0 * u.a0 * d.a0 * std::conj(u.ap) + u.a0 * u.a0 * std::conj(d.ap)) -
           (cfg.idler.gamma_total() + i * (cfg.delta_idler() + u.nu)) * d.am - i * d.nu * u.am;
    r.rp = cfg.g * (2.0 * u.a0 * d.a0 * std::conj(u.am) + u.a0 * u.a0 * std::conj(d.am)) -
           (cfg.signal.gamma_total() + i * (cfg.delta_signal() - u.nu)) * d.ap + i * d.nu * u.ap;
    return r;
}

using Vec6 = Eigen::Matrix<double, 6, 1>;
using Mat6 = Eigen::Matrix<double, 6, 6>;

Vec6 pack(const Residual &r, double scale)
{
    Vec6 v;
    v << r.r0.real(), r.r0.imag(), r.rm.real(), r.rm.imag(), r.rp.real(), r.rp.imag();
    return v / scale;
}

// Unit direction for unknown k. Oscillating branch: (Re a0, Im a0, Re a-, Re a+,
// Im a+, nu) with Im a- = 0 as the phase gauge. Quiet branch: the six real
// parts of the three amplitudes with nu = 0.
Stationary direction(int k, bool oscillating, double amp_scale, double rate_scale)
{
    const cplx one{amp_scale, 0.0}, eye{0.0, amp_scale};
    Stationary d{};
    if (oscillating)
    {
        switch (k)
        {
        case 0: d.a0 = one; break;
        case 1: d.a0 = eye; break;
        case 2: d.am = one; break;
        case 3: d.ap = one; break;
        case 4: d.ap = eye; break;
        default: d.nu = rate_scale; break;
        }
    }
    else
    {
        switch (k)
        {
        case 0: d.a0 = one; break;
        case 1: d.a0 = eye; break;
        case 2: d.am = one; break;
        case 3: d.am = eye; break;
        case 4: d.ap = one; break;
        default: d.ap = eye; break;
        }
    }
    return d;
}

Stationary step(const Stationary &u, const Vec6 &delta, bool oscillating, double amp_scale,
                double rate_scale)
{
    Stationary out = u;
    for (int k = 0; k < 6; ++k)
    {
        const Stationary d = direction(k, oscillating, amp_scale, rate_scale);
        out.a0 += delta[k] * d.a0;
        out.am += delta[k] * d.am;
        out.ap += delta[k] * d.ap;
        out.nu += delta[k] * d.nu;
    }
    return out;
}

struct PolishResult
{
    Stationary u;
    double residual = std::numeric_limits<double>::infinity();
    bool converged = false;
};

double residual_measure(const Residual &r, double gamma_minus, double amp_scale)
{
    return std::max({std::abs(r.r0), std::abs(r.rm), std::abs(r.rp)}) / (gamma_minus * amp_scale);
}

PolishResult newton_polish(Stationary u, const SystemConfig &cfg, bool oscillating,
                           const SteadyStateOptions &opts)
{
    const double gm = cfg.idler.gamma_total();
    const cplx seed = oscillating ? cplx{} : seed_injection(std::numeric_limits<double>::infinity(), cfg.seed, gm);

    if (oscillating)
    {
        // Gauge: rotate the idler real, the signal oppositely.
        const double theta = std::arg(u.am);
        u.am *= std::polar(1.0, -theta);
        u.ap *= std::polar(1.0, theta);
        u.am = {u.am.real(), 0.0};
    }
    else
    {
        u.nu = 0.0;
    }

    double amp_scale = std::max({std::abs(u.a0), std::abs(u.am), std::abs(u.ap)});
    if (!(amp_scale > 0.0))
        amp_scale = 1.0;
    const double res_scale = gm * amp_scale;

    PolishResult best;
    Residual r = stationary_residual(u, cfg, seed);
    double measure = residual_measure(r, gm, amp_scale);
    for (int it = 0; it < opts.max_newton_iterations; ++it)
    {
        if (measure < opts.newton_tol)
        {
            best = {u, measure, true};
            return best;
        }
        Mat6 jac;
        for (int k = 0; k < 6; ++k)
            jac.col(k) = pack(stationary_linearization(u, direction(k, oscillating, amp_scale, gm), cfg),
                              res_scale);
        const Vec6 rhs = -pack(r, res_scale);
        const Vec6 delta = jac.colPivHouseholderQr().solve(rhs);
        if (!delta.allFinite())
            break;

        // Backtracking on the residual norm.
        double lambda = 1.0;
        bool improved = false;
        for (int ls = 0; ls < 30; ++ls)
        {
            const Stationary trial = step(u, lambda * delta, oscillating, amp_scale, gm);
            const Residual rt = stationary_residual(trial, cfg, seed);
            const double mt = residual_measure(rt, gm, amp_scale);
            if (std::isfinite(mt) && mt < measure)
            {
                u = trial;
                r = rt;
                measure = mt;
                improved = true;
                break;
            }
            lambda *= 0.5;
        }
        if (!improved)
            break;
    }
    best = {u, measure, measure < opts.newton_tol};
    return best;
}

std::vector<double> relative_moduli(const FieldState &s)
{
    return {std::abs(s.alpha0), std::abs(s.alpha_minus), std::abs(s.alpha_plus)};
}

bool quiescent(const FieldState &a, const FieldState &b, double tol)
{
    const auto ma = relative_moduli(a), mb = relative_moduli(b);
    const double scale = std::max({ma[0], ma[1], ma[2], mb[0], mb[1], mb[2]});
    for (std::size_t j = 0; j < 3; ++j)
    {
        const double denom = std::max({ma[j], mb[j], 1e-12 * scale});
        if (denom > 0.0 && std::abs(ma[j] - mb[j]) > tol * denom)
            return false;
    }
    return true;
}

}  // namespace

cplx pump_only_steady_state(const SystemConfig &cfg)
{
    return -std::sqrt(2.0 * cfg.pump.gamma_in) * drive_amplitude(cfg.drive) /
           cplx(cfg.pump.gamma_total(), cfg.delta_pump());
}

double oscillation_floor(const SystemConfig &cfg)
{
    const double eps = seed_magnitude(cfg.seed);
    if (eps > 0.0)
        return kOscillationFactor * eps;
    return kOscillationFactor * 1e-15 * std::max(std::abs(pump_only_steady_state(cfg)), 1e-300);
}

SteadyState steady_state(const SystemConfig &cfg, const FieldState &guess, const SteadyStateOptions &opts)
{
    for (const cplx z : {guess.alpha0, guess.alpha_minus, guess.alpha_plus})
        if (!std::isfinite(z.real()) || !std::isfinite(z.imag()))
            throw AnalysisError("steady_state: guess must be finite");

    const double slow = std::min(cfg.pump.gamma_total(), cfg.idler.gamma_total());
    const double chunk = opts.chunk_decay_times / slow;
    const double budget = opts.max_decay_times / slow;
    const double floor = oscillation_floor(cfg);
    const bool pump_unstable = sideband_growth_rate(pump_only_steady_state(cfg), cfg) > 0.0;

    SolverOptions solver = opts.solver;
    solver.sample_times.clear();
    solver.n_samples = 1;
    solver.stop = nullptr;

    FieldState current = guess;
    double elapsed = 0.0;
    bool settled = false;
    try
    {
        while (elapsed < budget)
        {
            const Trajectory tr = integrate(current, cfg, current.t + chunk, solver);
            const FieldState next = tr.back();
            elapsed += chunk;
            const bool quiet = std::abs(next.alpha_minus) <= floor;
            const bool calm = quiescent(current, next, opts.quiescence_tol);
            current = next;
            // A quiet state is only final if the pump-only state is stable.
            if (calm && !(quiet && pump_unstable))
            {
                settled = true;
                break;
            }
        }
    }
    catch (const IntegrationError &e)
    {
        throw AnalysisError(std::string("steady_state: divergent trajectory: ") + e.what());
    }

    const bool oscillating = std::abs(current.alpha_minus) > floor;
    Stationary u{current.alpha0, current.alpha_minus, current.alpha_plus, 0.0};
    if (oscillating)
    {
        // Pulling guess from the instantaneous idler rotation.
        const FieldDerivative d = rhs_full(current, cfg, current.t);
        u.nu = (d.d_alpha_minus / current.alpha_minus).imag();
    }
    const PolishResult pr = newton_polish(u, cfg, oscillating, opts);
    if (!pr.converged)
    {
        std::ostringstream oss;
        oss << "steady_state: no convergence (residual " << pr.residual << ", "
            << (settled ? "settled" : "not settled") << " after " << elapsed << " s)";
        throw AnalysisError(oss.str());
    }
    if (oscillating && std::abs(pr.u.am) <= floor)
        throw AnalysisError("steady_state: polish collapsed onto the non-oscillating branch");

    SteadyState ss;
    ss.state = {pr.u.a0, pr.u.am, pr.u.ap, current.t};
    ss.residual = pr.residual;
    ss.converged = true;
    ss.oscillating = oscillating;
    ss.pulling = angular_to_hz(pr.u.nu);
    return ss;
}

Matrix2c linearized_sideband_matrix(cplx alpha0, const SystemConfig &cfg)
{
    const cplx a0_sq = alpha0 * alpha0;
    return {-cplx(cfg.idler.gamma_total(), cfg.delta_idler()), cfg.g * a0_sq,
            std::conj(cfg.g) * std::conj(a0_sq), -cplx(cfg.signal.gamma_total(), -cfg.delta_signal())};
}

std::array<cplx, 2> eigenvalues(const Matrix2c &m)
{
    const cplx half_trace = 0.5 * (m.a + m.d);
    const cplx det = m.a * m.d - m.b * m.c;
    const cplx disc = std::sqrt(half_trace * half_trace - det);
    // Larger root first; the other from the product to avoid cancellation.
    const cplx big = std::abs(half_trace + disc) >= std::abs(half_trace - disc) ? half_trace + disc
                                                                                  : half_trace - disc;
    if (big == cplx{})
        return {cplx{}, cplx{}};
    return {big, det / big};
}

double sideband_growth_rate(cplx alpha0, const SystemConfig &cfg)
{
    const auto ev = eigenvalues(linearized_sideband_matrix(alpha0, cfg));
    return std::max(ev[0].real(), ev[1].real());
}

std::string_view to_string(ThresholdCriterion c)
{
    return c == ThresholdCriterion::EigenvalueCrossing ? "eigenvalue_crossing" : "simulated_onset";
}

bool simulated_oscillation(const SystemConfig &cfg, const ThresholdOptions &opts)
{
    if (seed_magnitude(cfg.seed) == 0.0)
        throw AnalysisError("simulated onset needs a non-zero seed");
    const double floor = oscillation_floor(cfg);
    SolverOptions solver = opts.solver;
    solver.sample_times.clear();
    solver.n_samples = 1;
    solver.stop = [floor](const FieldState &s) { return std::abs(s.alpha_minus) > floor; };
    const double t_end = opts.onset_decay_times / cfg.idler.gamma_total();
    try
    {
        const Trajectory tr = integrate(FieldState{}, cfg, t_end, solver);
        return tr.stopped_early || std::abs(tr.back().alpha_minus) > floor;
    }
    catch (const IntegrationError &e)
    {
        throw AnalysisError(std::string("simulated onset: ") + e.what());
    }
}

ThresholdResult oscillation_threshold(const SystemConfig &cfg, ThresholdCriterion criterion,
                                      const ThresholdOptions &opts)
{
    if (!(opts.power_min > 0.0) || !(opts.power_max > opts.power_min))
        throw AnalysisError("threshold: power range must satisfy 0 < power_min < power_max");

    const double width = opts.rel_width > 0.0
                             ? opts.rel_width
                             : (criterion == ThresholdCriterion::EigenvalueCrossing ? 1e-13 : 1e-3);

    auto oscillates = [&](double power) {
        const SystemConfig c = with_power(cfg, power);
        if (criterion == ThresholdCriterion::EigenvalueCrossing)
            return sideband_growth_rate(pump_only_steady_state(c), c) > 0.0;
        return simulated_oscillation(c, opts);
    };

    double lo = opts.power_min, hi = opts.power_max;
    if (oscillates(lo))
        throw AnalysisError("threshold: oscillation already at power_min; bracket not found");
    // Walk up by decades so that no run is made far above threshold, where the
    // sideband dynamics become needlessly stiff.
    for (double p = lo * 10.0;; p *= 10.0)
    {
        if (p >= opts.power_max)
        {
            if (!oscillates(opts.power_max))
                throw AnalysisError("threshold: no oscillation at power_max; bracket not found");
            break;
        }
        if (oscillates(p))
        {
            hi = p;
            break;
        }
        lo = p;
    }
    while (hi - lo > width * hi)
    {
        double mid = std::sqrt(lo * hi);
        if (!(mid > lo && mid < hi))
            mid = 0.5 * (lo + hi);
        if (!(mid > lo && mid < hi))
            break;
        (oscillates(mid) ? hi : lo) = mid;
    }

    ThresholdResult res;
    res.criterion = criterion;
    res.below = lo;
    res.above = hi;
    res.power_threshold = hi;
    res.flux_threshold = pump_photon_flux(with_power(cfg, hi).drive);

    if (opts.check_depletion && seed_magnitude(cfg.seed) > 0.0)
    {
        // Undepleted-pump check: seeded stationary state just below threshold.
        const SystemConfig c = with_power(cfg, lo * (1.0 - 1e-3));
        const cplx a0 = pump_only_steady_state(c);
        const cplx seed = seed_injection(std::numeric_limits<double>::infinity(), c.seed,
                                         c.idler.gamma_total());
        Stationary u{a0, seed / cplx(c.idler.gamma_total(), c.delta_idler()), cplx{}, 0.0};
        u.ap = adiabatic_signal(a0, u.am, c);
        const PolishResult pr = newton_polish(u, c, false, SteadyStateOptions{});
        if (!pr.converged)
        {
            res.warnings.push_back("depletion check: seeded steady state below threshold did not converge");
        }
        else
        {
            const double dev = std::abs(std::abs(pr.u.a0) / std::abs(a0) - 1.0);
            if (dev > 1e-2)
            {
                std::ostringstream oss;
                oss << "pump depleted by " << dev * 100 << "% below threshold; undepleted criterion is approximate";
                res.warnings.push_back(oss.str());
            }
        }
    }
    return res;
}

double effective_nonlinearity_printed(cplx g, double gamma_plus, double gamma_minus, double delta2)
{
    return std::abs(g) * (gamma_plus / gamma_minus) / std::sqrt(gamma_plus * gamma_plus + delta2 * delta2);
}

double effective_nonlinearity_derived(cplx g, double gamma_plus, double gamma_minus, double delta_plus)
{
    return std::norm(g) * gamma_plus / (gamma_minus * (gamma_plus * gamma_plus + delta_plus * delta_plus));
}

double effective_nonlinearity_from_threshold(double gamma0, double delta0, double gamma0_in, double omega0,
                                             double p_thresh)
{
    if (!(p_thresh > 0.0))
        throw AnalysisError("effective nonlinearity: threshold power must be > 0");
    return (gamma0 * gamma0 + delta0 * delta0) / (2.0 * gamma0_in) * (kHbar * omega0 / p_thresh);
}

double output_power(cplx alpha, const ModeParams &mode)
{
    return kHbar * mode.omega * 2.0 * mode.gamma_out * std::norm(alpha);
}

namespace
{
cplx amplitude_of(const FieldState &s, ModeRole role)
{
    switch (role)
    {
    case ModeRole::Pump:
        return s.alpha0;
    case ModeRole::Idler:
        return s.alpha_minus;
    case ModeRole::Signal:
        return s.alpha_plus;
    }
    return {};
}
}  // namespace

double extract_frequency_offset(const Trajectory &traj, ModeRole role, const FrequencyWindow &window)
{
    const auto &s = traj.samples;
    if (s.size() < 2)
        throw AnalysisError("frequency extraction: window too short");
    const double t_last = s.back().t;
    const double t_start = t_last - window.fraction * (t_last - s.front().t);
    auto first = std::lower_bound(s.begin(), s.end(), t_start,
                                  [](const FieldState &f, double t) { return f.t < t; });
    const auto n = static_cast<std::size_t>(std::distance(first, s.end()));
    if (n < window.min_samples || n < 2)
    {
        std::ostringstream oss;
        oss << "frequency extraction: window too short (" << n << " samples, need " << window.min_samples << ")";
        throw AnalysisError(oss.str());
    }

    std::vector<double> t(n), phase(n);
    double offset = 0.0, prev = 0.0;
    for (std::size_t k = 0; k < n; ++k)
    {
        const cplx z = amplitude_of(first[static_cast<long>(k)], role);
        if (!(std::abs(z) > window.amplitude_floor))
            throw AnalysisError("frequency extraction: amplitude below floor, no oscillation to measure");
        const double p = std::arg(z);
        if (k > 0)
        {
            const double jump = p - prev;
            if (jump > std::numbers::pi)
                offset -= kTwoPi;
            else if (jump < -std::numbers::pi)
                offset += kTwoPi;
        }
        prev = p;
        t[k] = first[static_cast<long>(k)].t;
        phase[k] = p + offset;
    }

    double tm = 0, pm = 0;
    for (std::size_t k = 0; k < n; ++k)
    {
        tm += t[k];
        pm += phase[k];
    }
    tm /= static_cast<double>(n);
    pm /= static_cast<double>(n);
    double sxy = 0, sxx = 0;
    for (std::size_t k = 0; k < n; ++k)
    {
        sxy += (t[k] - tm) * (phase[k] - pm);
        sxx += (t[k] - tm) * (t[k] - tm);
    }
    return sxy / sxx / kTwoPi;
}

std::optional<double> onset_delay(const Trajectory &traj, double threshold_ratio, double floor, double settle_tol)
{
    const auto &s = traj.samples;
    if (s.size() < 10)
        throw AnalysisError("onset delay: trajectory too short");
    const double final_amp = std::abs(s.back().alpha_minus);
    if (final_amp <= floor)
        return std::nullopt;

    const std::size_t tail = std::max<std::size_t>(2, s.size() / 10);
    double lo = final_amp, hi = final_amp;
    for (std::size_t k = s.size() - tail; k < s.size(); ++k)
    {
        const double a = std::abs(s[k].alpha_minus);
        lo = std::min(lo, a);
        hi = std::max(hi, a);
    }
    if ((hi - lo) > settle_tol * final_amp)
        throw AnalysisError("onset delay: trajectory has not converged to steady oscillation");

    const double level = threshold_ratio * final_amp;
    for (const auto &f : s)
        if (std::abs(f.alpha_minus) >= level)
            return f.t - s.front().t;
    return std::nullopt;
}

unsigned resolve_thread_count(unsigned requested)
{
    if (requested > 0)
        return requested;
    if (const char *env = std::getenv("FWM_THREADS"))
    {
        char *end = nullptr;
        const long v = std::strtol(env, &end, 10);
        if (end != env && *end == '\0' && v > 0)
            return static_cast<unsigned>(v);
    }
    const unsigned hw = std::thread::hardware_concurrency();
    return hw > 0 ? hw : 1;
}

SystemConfig detuning_point_config(const SystemConfig &cfg, double offset_hz, const SweepOptions &opts)
{
    SystemConfig c = cfg;
    c.drive.frequency = cfg.pump.omega + hz_to_angular(offset_hz);
    if (opts.doublet_rule && cfg.doublet)
        c.pump = with_half_bandwidth(cfg.pump, select_doublet_linewidth(offset_hz, *cfg.doublet));
    validate(c);
    return c;
}

namespace
{
void fill_steady(SweepRow &row, const SystemConfig &c, const SweepOptions &opts)
{
    const FieldState guess{pump_only_steady_state(c), cplx{}, cplx{}, 0.0};
    row.steady = steady_state(c, guess, opts.steady);
    row.converged = row.steady.converged;
    row.oscillating = row.steady.oscillating;
    row.pump_power = output_power(row.steady.state.alpha0, c.pump);
    row.idler_power = output_power(row.steady.state.alpha_minus, c.idler);
    row.signal_power = output_power(row.steady.state.alpha_plus, c.signal);
    if (row.oscillating)
    {
        const double nu = hz_to_angular(row.steady.pulling);
        row.idler_offset_hz = angular_to_hz(c.delta_idler() + nu);
        row.signal_offset_hz = angular_to_hz(c.delta_signal() - nu);
    }
    else
    {
        row.idler_offset_hz = kNaN;
        row.signal_offset_hz = kNaN;
    }
}

template <class Eval>
SweepResult run_sweep(const std::vector<double> &values, unsigned threads, Eval &&eval)
{
    if (values.empty())
        throw AnalysisError("sweep: list of points is empty");
    for (double v : values)
        if (!std::isfinite(v))
            throw AnalysisError("sweep: points must be finite");

    SweepResult out;
    out.rows.resize(values.size());
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t k = next++; k < values.size(); k = next++)
            out.rows[k] = eval(values[k]);
    };
    const unsigned n = std::min<unsigned>(resolve_thread_count(threads), static_cast<unsigned>(values.size()));
    std::vector<std::thread> pool;
    for (unsigned k = 1; k < n; ++k)
        pool.emplace_back(worker);
    worker();
    for (auto &th : pool)
        th.join();
    std::stable_sort(out.rows.begin(), out.rows.end(),
                     [](const SweepRow &a, const SweepRow &b) { return a.swept < b.swept; });
    return out;
}
}  // namespace

SweepRow evaluate_detuning_point(const SystemConfig &cfg, double offset_hz, const SweepOptions &opts)
{
    SweepRow row;
    row.swept = offset_hz;
    row.threshold = kNaN;
    row.g_eff = kNaN;
    row.idler_offset_hz = kNaN;
    row.signal_offset_hz = kNaN;
    try
    {
        SystemConfig c = detuning_point_config(cfg, offset_hz, opts);
        const ThresholdResult th = oscillation_threshold(c, opts.criterion, opts.threshold);
        row.threshold = th.power_threshold;
        row.g_eff = effective_nonlinearity_from_threshold(c.pump.gamma_total(), c.delta_pump(), c.pump.gamma_in,
                                                          c.pump.omega, th.power_threshold);
        if (opts.threshold_multiple)
            c.drive.power = *opts.threshold_multiple * th.power_threshold;
        row.drive_power = c.drive.power;
        fill_steady(row, c, opts);
    }
    catch (const std::exception &e)
    {
        row.converged = false;
        row.status = e.what();
    }
    return row;
}

SweepRow evaluate_power_point(const SystemConfig &cfg, double power, const SweepOptions &opts)
{
    SweepRow row;
    row.swept = power;
    row.drive_power = power;
    row.threshold = kNaN;
    row.g_eff = kNaN;
    row.idler_offset_hz = kNaN;
    row.signal_offset_hz = kNaN;
    try
    {
        SystemConfig c = cfg;
        c.drive.power = power;
        validate(c);
        fill_steady(row, c, opts);
    }
    catch (const std::exception &e)
    {
        row.converged = false;
        row.status = e.what();
    }
    return row;
}

SweepResult sweep_detuning(const SystemConfig &cfg, const std::vector<double> &offsets_hz, const SweepOptions &opts)
{
    return run_sweep(offsets_hz, opts.threads,
                     [&](double v) { return evaluate_detuning_point(cfg, v, opts); });
}

SweepResult sweep_power(const SystemConfig &cfg, const std::vector<double> &powers, const SweepOptions &opts)
{
    return run_sweep(powers, opts.threads, [&](double v) { return evaluate_power_point(cfg, v, opts); });
}

}  // namespace fwm
