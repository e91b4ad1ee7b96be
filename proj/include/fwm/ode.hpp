#ifndef FWM_ODE_HPP
#define FWM_ODE_HPP

// Explicit Runge-Kutta drivers for small complex-valued systems.
//
// Two methods: Dormand-Prince 5(4) with step-size control and the
// fourth-order continuous extension for dense output, and classical RK4 on a
// fixed grid. Both work on std::array<std::complex<double>, N>. The error
// norm is taken per complex component on its modulus, so the step sequence is
// unchanged by a global phase rotation of any component.

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <cstddef>
#include <limits>
#include <span>
#include <stdexcept>
#include <string>

namespace fwm::ode
{
template <std::size_t N>
using State = std::array<std::complex<double>, N>;

class IntegrationError : public std::runtime_error
{
public:
    enum class Kind
    {
        StepUnderflow,
        Divergence,
        StepBudget
    };

    IntegrationError(Kind kind, double t_reached, const std::string &what)
        : std::runtime_error(what), kind_(kind), t_reached_(t_reached)
    {
    }

    Kind kind() const { return kind_; }
    double t_reached() const { return t_reached_; }

private:
    Kind kind_;
    double t_reached_;
};

struct Settings
{
    double rel_tol = 1e-9;
    double abs_tol = 1e-12;
    double max_step = std::numeric_limits<double>::infinity();
    double fixed_step = 0.0;  // RK4 only; 0 picks max_step
    long max_steps = 50'000'000;
};

struct Stats
{
    long accepted = 0;
    long rejected = 0;
    long rhs_evals = 0;
    bool stopped_early = false;
    double t_final = 0.0;
};

namespace detail
{
template <std::size_t N>
bool all_finite(const State<N> &y)
{
    for (const auto &z : y)
        if (!std::isfinite(z.real()) || !std::isfinite(z.imag()))
            return false;
    return true;
}

template <std::size_t N>
State<N> axpy(const State<N> &y, double h, std::initializer_list<std::pair<double, const State<N> *>> terms)
{
    State<N> out = y;
    for (std::size_t i = 0; i < N; ++i)
    {
        std::complex<double> acc{};
        for (const auto &[c, k] : terms)
            acc += c * (*k)[i];
        out[i] += h * acc;
    }
    return out;
}

[[noreturn]] inline void diverged(double t)
{
    throw IntegrationError(IntegrationError::Kind::Divergence, t,
                           "integration diverged: non-finite state at t = " + std::to_string(t));
}
}  // namespace detail

// Integrates y' = f(t, y) from t0 to t_end.
//
// `sample_times` must be increasing and lie in (t0, t_end]; when empty every
// accepted step is emitted. `emit(t, y)` receives each sample, `stop(t, y)` is
// polled after every accepted step and ends the run early when it returns true.
template <std::size_t N, class Rhs, class Emit, class Stop>
Stats dopri5(Rhs &&f, double t0, State<N> y, double t_end, const Settings &s,
             std::span<const double> sample_times, Emit &&emit, Stop &&stop)
{
    using detail::axpy;
    constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
    constexpr double a21 = 1.0 / 5;
    constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
    constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
    constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561,
                     a54 = -212.0 / 729;
    constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247,
                     a64 = 49.0 / 176, a65 = -5103.0 / 18656;
    constexpr double a71 = 35.0 / 384, a73 = 500.0 / 1113, a74 = 125.0 / 192,
                     a75 = -2187.0 / 6784, a76 = 11.0 / 84;
    constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920,
                     e5 = -17253.0 / 339200, e6 = 22.0 / 525, e7 = -1.0 / 40;
    constexpr double d1 = -12715105075.0 / 11282082432, d3 = 87487479700.0 / 32700410799,
                     d4 = -10690763975.0 / 1880347072, d5 = 701980252875.0 / 199316789632,
                     d6 = -1453857185.0 / 822651844, d7 = 69997945.0 / 29380423;

    Stats stats;
    double t = t0;
    State<N> k1 = f(t, y);
    ++stats.rhs_evals;
    if (!detail::all_finite(k1))
        detail::diverged(t);

    const auto scale = [&](const State<N> &a, const State<N> &b, std::size_t i) {
        return s.abs_tol + s.rel_tol * std::max(std::abs(a[i]), std::abs(b[i]));
    };

    // Initial step (Hairer, Norsett & Wanner II.4).
    double h;
    {
        double d0 = 0, dd1 = 0;
        for (std::size_t i = 0; i < N; ++i)
        {
            const double sc = scale(y, y, i);
            d0 += std::norm(y[i]) / (sc * sc);
            dd1 += std::norm(k1[i]) / (sc * sc);
        }
        d0 = std::sqrt(d0 / N);
        dd1 = std::sqrt(dd1 / N);
        double h0 = (d0 < 1e-5 || dd1 < 1e-5) ? 1e-6 : 0.01 * d0 / dd1;
        h0 = std::min({h0, s.max_step, t_end - t0});
        const State<N> y1 = axpy<N>(y, h0, {{1.0, &k1}});
        const State<N> f1 = f(t + h0, y1);
        ++stats.rhs_evals;
        double d2 = 0;
        for (std::size_t i = 0; i < N; ++i)
        {
            const double sc = scale(y, y, i);
            d2 += std::norm(f1[i] - k1[i]) / (sc * sc);
        }
        d2 = std::sqrt(d2 / N) / h0;
        const double dm = std::max(dd1, d2);
        const double h1 = dm <= 1e-15 ? std::max(1e-6, h0 * 1e-3) : std::pow(0.01 / dm, 0.2);
        h = std::min({100 * h0, h1, s.max_step, t_end - t0});
    }

    std::size_t next_sample = 0;
    bool last_rejected = false;
    while (t < t_end)
    {
        if (stats.accepted + stats.rejected >= s.max_steps)
            throw IntegrationError(IntegrationError::Kind::StepBudget, t,
                                   "integration exceeded step budget at t = " + std::to_string(t));
        if (h < 16.0 * std::numeric_limits<double>::epsilon() * std::max(1.0, std::abs(t)))
            throw IntegrationError(IntegrationError::Kind::StepUnderflow, t,
                                   "step size underflow (stiffness) at t = " + std::to_string(t));
        if (t + h > t_end || t + 1.01 * h >= t_end)
            h = t_end - t;

        const State<N> k2 = f(t + c2 * h, axpy<N>(y, h, {{a21, &k1}}));
        const State<N> k3 = f(t + c3 * h, axpy<N>(y, h, {{a31, &k1}, {a32, &k2}}));
        const State<N> k4 = f(t + c4 * h, axpy<N>(y, h, {{a41, &k1}, {a42, &k2}, {a43, &k3}}));
        const State<N> k5 =
            f(t + c5 * h, axpy<N>(y, h, {{a51, &k1}, {a52, &k2}, {a53, &k3}, {a54, &k4}}));
        const State<N> k6 = f(t + h, axpy<N>(y, h, {{a61, &k1}, {a62, &k2}, {a63, &k3}, {a64, &k4}, {a65, &k5}}));
        const State<N> ynew =
            axpy<N>(y, h, {{a71, &k1}, {a73, &k3}, {a74, &k4}, {a75, &k5}, {a76, &k6}});
        const State<N> k7 = f(t + h, ynew);
        stats.rhs_evals += 6;

        if (!detail::all_finite(ynew) || !detail::all_finite(k7))
        {
            // Could be an overly large trial step; shrink before declaring divergence.
            if (h > 1e-10 * std::max(1.0, std::abs(t)))
            {
                h *= 0.1;
                ++stats.rejected;
                last_rejected = true;
                continue;
            }
            detail::diverged(t);
        }

        double err = 0;
        for (std::size_t i = 0; i < N; ++i)
        {
            const std::complex<double> e =
                h * (e1 * k1[i] + e3 * k3[i] + e4 * k4[i] + e5 * k5[i] + e6 * k6[i] + e7 * k7[i]);
            const double sc = scale(y, ynew, i);
            err += std::norm(e) / (sc * sc);
        }
        err = std::sqrt(err / N);

        if (err <= 1.0)
        {
            const double t_new = t + h;
            // Dense output for samples falling inside (t, t_new].
            while (next_sample < sample_times.size() && sample_times[next_sample] <= t_new)
            {
                const double ts = sample_times[next_sample];
                if (ts == t_new)
                {
                    emit(ts, ynew);
                }
                else
                {
                    const double th = (ts - t) / h;
                    const double th1 = 1.0 - th;
                    State<N> ys;
                    for (std::size_t i = 0; i < N; ++i)
                    {
                        const auto r2 = ynew[i] - y[i];
                        const auto r3 = h * k1[i] - r2;
                        const auto r4 = r2 - h * k7[i] - r3;
                        const auto r5 = h * (d1 * k1[i] + d3 * k3[i] + d4 * k4[i] + d5 * k5[i] +
                                             d6 * k6[i] + d7 * k7[i]);
                        ys[i] = y[i] + th * (r2 + th1 * (r3 + th * (r4 + th1 * r5)));
                    }
                    emit(ts, ys);
                }
                ++next_sample;
            }
            t = t_new;
            y = ynew;
            k1 = k7;
            ++stats.accepted;
            if (sample_times.empty())
                emit(t, y);
            if (stop(t, y))
            {
                stats.stopped_early = t < t_end;
                break;
            }
            double fac = err == 0.0 ? 5.0 : 0.9 * std::pow(err, -0.2);
            fac = std::clamp(fac, 0.2, last_rejected ? 1.0 : 5.0);
            h = std::min(h * fac, s.max_step);
            last_rejected = false;
        }
        else
        {
            ++stats.rejected;
            last_rejected = true;
            h *= std::max(0.1, 0.9 * std::pow(err, -0.2));
        }
    }
    stats.t_final = t;
    return stats;
}

// Classical RK4 on a uniform grid of step <= settings.fixed_step (or max_step).
// Sample times are reached by shortening the step that would overshoot them.
template <std::size_t N, class Rhs, class Emit, class Stop>
Stats rk4(Rhs &&f, double t0, State<N> y, double t_end, const Settings &s,
          std::span<const double> sample_times, Emit &&emit, Stop &&stop)
{
    using detail::axpy;
    const double h_nominal = s.fixed_step > 0.0 ? s.fixed_step : s.max_step;
    if (!(h_nominal > 0.0) || !std::isfinite(h_nominal))
        throw std::invalid_argument("rk4 requires a finite positive step");

    Stats stats;
    double t = t0;
    std::size_t next_sample = 0;
    while (t < t_end)
    {
        if (stats.accepted >= s.max_steps)
            throw IntegrationError(IntegrationError::Kind::StepBudget, t,
                                   "integration exceeded step budget at t = " + std::to_string(t));
        double target = std::min(t_end, t + h_nominal);
        if (next_sample < sample_times.size())
            target = std::min(target, sample_times[next_sample]);
        if (t_end - target < 1e-9 * h_nominal)
            target = t_end;
        const double h = target - t;

        const State<N> k1 = f(t, y);
        const State<N> k2 = f(t + 0.5 * h, axpy<N>(y, h, {{0.5, &k1}}));
        const State<N> k3 = f(t + 0.5 * h, axpy<N>(y, h, {{0.5, &k2}}));
        const State<N> k4 = f(t + h, axpy<N>(y, h, {{1.0, &k3}}));
        y = axpy<N>(y, h, {{1.0 / 6, &k1}, {1.0 / 3, &k2}, {1.0 / 3, &k3}, {1.0 / 6, &k4}});
        stats.rhs_evals += 4;
        t = target;
        ++stats.accepted;
        if (!detail::all_finite(y))
            detail::diverged(t);

        if (sample_times.empty())
        {
            emit(t, y);
        }
        else
        {
            while (next_sample < sample_times.size() && sample_times[next_sample] <= t)
            {
                emit(sample_times[next_sample], y);
                ++next_sample;
            }
        }
        if (stop(t, y))
        {
            stats.stopped_early = t < t_end;
            break;
        }
    }
    stats.t_final = t;
    return stats;
}

}  // namespace fwm::ode

#endif  // FWM_ODE_HPP
