#ifndef FWM_DYNAMICS_HPP
#define FWM_DYNAMICS_HPP

#include "fwm/model.hpp"
#include "fwm/ode.hpp"

#include <functional>
#include <vector>

namespace fwm
{
using ode::IntegrationError;

// Time derivative of the three mode amplitudes.
struct FieldDerivative
{
    cplx d_alpha0{};
    cplx d_alpha_minus{};
    cplx d_alpha_plus{};
};

// Seed term added to the idler equation: gamma_- eps, ramped by (1 - e^{-t/tau})
// in ExponentialRamp mode.
cplx seed_injection(double t, const SeedConfig &seed, double gamma_minus);

// Full three-mode equations of motion in the rotating frames of `cfg.frame`:
//   a0' = -2 g* conj(a0) a- a+ - (gamma0 + i Delta0) a0 - sqrt(2 gamma0_in) a0_in
//   a-' =  g a0^2 conj(a+)     - (gamma- + i Delta-) a- + seed(t)
//   a+' =  g a0^2 conj(a-)     - (gamma+ + i Delta+) a+
FieldDerivative rhs_full(const FieldState &state, const SystemConfig &cfg, double t);

enum class ReducedForm
{
    // Signal eliminated exactly from the sideband equations.
    Derived,
    // Printed bracket with the printed effective nonlinearity g|gamma+/gamma-|/sqrt(gamma+^2 + Delta+^2).
    AsPrinted
};

// Idler equation with the signal adiabatically eliminated and the pump held at alpha0.
// Derived: a-' = [|g|^2 |a0|^4 / (gamma+ - i Delta+) - (gamma- + i Delta-)] a-.
cplx rhs_reduced(cplx alpha0, cplx alpha_minus, const SystemConfig &cfg,
                 ReducedForm form = ReducedForm::Derived);

// Steady-state signal slaved to the pump and idler: g a0^2 conj(a-) / (gamma+ + i Delta+).
cplx adiabatic_signal(cplx alpha0, cplx alpha_minus, const SystemConfig &cfg);

// True when gamma+ exceeds both gamma- and gamma0 by at least `margin`.
bool adiabatic_regime(const SystemConfig &cfg, double margin = 10.0);

enum class SolverMethod
{
    AdaptiveRK,
    FixedRK4
};

struct SolverOptions
{
    double rel_tol = 1e-9;
    double abs_tol = 1e-12;
    double max_step = std::numeric_limits<double>::infinity();  // s
    SolverMethod method = SolverMethod::AdaptiveRK;
    // FixedRK4 step, s; 0 falls back to max_step.
    double fixed_step = 0.0;
    long max_steps = 50'000'000;
    // Output grid. Explicit sample_times win over n_samples; with neither, every
    // accepted step is recorded.
    std::vector<double> sample_times;
    std::size_t n_samples = 0;
    // Polled after each accepted step; returning true ends the run.
    std::function<bool(const FieldState &)> stop;

    void validate() const;
};

struct StepStats
{
    long accepted = 0;
    long rejected = 0;
    long rhs_evals = 0;
};

struct Trajectory
{
    std::vector<FieldState> samples;
    StepStats step_stats;
    SolverMethod method = SolverMethod::AdaptiveRK;
    bool stopped_early = false;

    const FieldState &back() const { return samples.back(); }
};

// Deterministic integration of the full model. Time is advanced internally in
// units of 1/cfg.time_scale(); samples are reported in seconds. Throws
// IntegrationError on step underflow or a non-finite state.
Trajectory integrate(const FieldState &initial, const SystemConfig &cfg, double t_end,
                     const SolverOptions &opts = {});

// Integrates the reduced idler equation with the pump frozen at alpha0. The
// returned samples carry alpha0 unchanged and the adiabatic signal.
Trajectory integrate_reduced(cplx alpha0, const FieldState &initial, const SystemConfig &cfg,
                             double t_end, const SolverOptions &opts = {},
                             ReducedForm form = ReducedForm::Derived);

}  // namespace fwm

#endif  // FWM_DYNAMICS_HPP
