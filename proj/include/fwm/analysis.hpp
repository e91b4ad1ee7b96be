#ifndef FWM_ANALYSIS_HPP
#define FWM_ANALYSIS_HPP

#include "fwm/dynamics.hpp"

#include <array>
#include <optional>
#include <string>
#include <vector>

namespace fwm
{
class AnalysisError : public std::runtime_error
{
public:
    using std::runtime_error::runtime_error;
};

// Sideband amplitude above which a mode counts as oscillating, as a multiple
// of the seed magnitude.
inline constexpr double kOscillationFactor = 1e3;

// Pump amplitude with both sidebands at zero:
// a0 = -sqrt(2 gamma0_in) a0_in / (gamma0 + i Delta0).
cplx pump_only_steady_state(const SystemConfig &cfg);

// |a-| level separating seed-supported noise from oscillation.
double oscillation_floor(const SystemConfig &cfg);

// ---------------------------------------------------------------------------
// Steady states

struct SteadyStateOptions
{
    // Settling integration is done in chunks of `chunk_decay_times` of the
    // slowest of gamma0, gamma-, up to `max_decay_times` in total.
    double chunk_decay_times = 50.0;
    double max_decay_times = 20000.0;
    // Relative change of every |a_j| across one chunk below which the
    // trajectory counts as quiescent.
    double quiescence_tol = 1e-4;
    double newton_tol = 1e-12;
    int max_newton_iterations = 60;
    SolverOptions solver{};
};

struct SteadyState
{
    FieldState state;
    // max_j |da_j/dt| / (gamma- max_j |a_j|) at the polished point.
    double residual = 0.0;
    bool converged = false;
    bool oscillating = false;
    // Idler rotation relative to its frame, Hz. The signal rotates at -pulling.
    double pulling = 0.0;
};

// Long-time integration from `guess` until quiescent, then Newton polish of the
// stationary equations in the frame co-rotating with the idler at the pulling
// frequency (unknown). Above threshold the seed term is dropped from the
// polish and the idler phase is gauge-fixed real; below threshold the pulling
// is zero and the seed is kept.
SteadyState steady_state(const SystemConfig &cfg, const FieldState &guess,
                         const SteadyStateOptions &opts = {});

// ---------------------------------------------------------------------------
// Linear stability of the sideband pair

struct Matrix2c
{
    cplx a{}, b{}, c{}, d{};  // [[a, b], [c, d]]
};

// d/dt (a-, conj a+) = M (a-, conj a+) about the pump-only state:
// M = [[-(gamma- + i Delta-), g a0^2], [g* conj(a0)^2, -(gamma+ - i Delta+)]].
Matrix2c linearized_sideband_matrix(cplx alpha0, const SystemConfig &cfg);

std::array<cplx, 2> eigenvalues(const Matrix2c &m);

// max Re eig M(alpha0).
double sideband_growth_rate(cplx alpha0, const SystemConfig &cfg);

// ---------------------------------------------------------------------------
// Oscillation threshold

enum class ThresholdCriterion
{
    EigenvalueCrossing,
    SimulatedOnset
};

std::string_view to_string(ThresholdCriterion c);

struct ThresholdOptions
{
    // Search range for the incident power, W.
    double power_min = 1e-40;
    double power_max = 1e9;
    // Relative bracket width at which bisection stops. Non-positive picks
    // 1e-13 for EigenvalueCrossing and 1e-3 for SimulatedOnset.
    double rel_width = 0.0;
    // SimulatedOnset: length of each run in idler decay times, and the run's solver.
    double onset_decay_times = 3000.0;
    SolverOptions solver{};
    // Compare the pump at threshold with a seeded steady state just below it.
    bool check_depletion = true;
};

struct ThresholdResult
{
    double flux_threshold = 0.0;   // photons/s
    double power_threshold = 0.0;  // W
    double below = 0.0;            // W, bracket end without oscillation
    double above = 0.0;            // W, bracket end with oscillation
    ThresholdCriterion criterion = ThresholdCriterion::EigenvalueCrossing;
    std::vector<std::string> warnings;
};

// Bisection in log-power on the chosen criterion. power_threshold is the upper
// bracket end. The drive power of `cfg` is ignored. Throws AnalysisError if the
// range does not bracket the threshold.
ThresholdResult oscillation_threshold(const SystemConfig &cfg,
                                      ThresholdCriterion criterion = ThresholdCriterion::EigenvalueCrossing,
                                      const ThresholdOptions &opts = {});

// Does a run from the empty cavity at `cfg.drive.power` end with |a-| above the
// oscillation floor? Building block of SimulatedOnset.
bool simulated_oscillation(const SystemConfig &cfg, const ThresholdOptions &opts = {});

// ---------------------------------------------------------------------------
// Effective nonlinearity

// g |gamma+/gamma-| / sqrt(gamma+^2 + Delta2^2) with |g| for complex g; the printed form.
double effective_nonlinearity_printed(cplx g, double gamma_plus, double gamma_minus, double delta2);

// |g|^2 gamma+ / (gamma- (gamma+^2 + Delta+^2)), the coefficient of |a0|^4 in the
// reduced idler gain.
double effective_nonlinearity_derived(cplx g, double gamma_plus, double gamma_minus, double delta_plus);

// (gamma0^2 + Delta0^2) / (2 gamma0_in) * hbar omega0 / P_thresh. Throws
// AnalysisError for non-positive p_thresh.
double effective_nonlinearity_from_threshold(double gamma0, double delta0, double gamma0_in,
                                             double omega0, double p_thresh);

// ---------------------------------------------------------------------------
// Observables

// hbar omega 2 gamma_out |alpha|^2
double output_power(cplx alpha, const ModeParams &mode);

struct FrequencyWindow
{
    double fraction = 0.2;
    std::size_t min_samples = 64;
    double amplitude_floor = 0.0;
};

// Least-squares slope of the unwrapped phase of the chosen amplitude over the
// final window of the trajectory, in Hz relative to that mode's frame.
double extract_frequency_offset(const Trajectory &traj, ModeRole role, const FrequencyWindow &window = {});

// Time from the first sample until |a-| first reaches threshold_ratio times its
// final value. std::nullopt when the final |a-| is at or below `floor` (no
// oscillation). Throws AnalysisError if |a-| still varies by more than
// `settle_tol` (relative) over the final 10% of samples.
std::optional<double> onset_delay(const Trajectory &traj, double threshold_ratio, double floor,
                                  double settle_tol = 1e-2);

// ---------------------------------------------------------------------------
// Sweeps

struct SweepRow
{
    double swept = 0.0;         // Hz offset or W
    double drive_power = 0.0;   // W
    double pump_power = 0.0;    // W out
    double idler_power = 0.0;   // W out
    double signal_power = 0.0;  // W out
    // Offsets from the cold-cavity idler/signal resonances, Hz (NaN when not oscillating).
    double idler_offset_hz = 0.0;
    double signal_offset_hz = 0.0;
    double threshold = 0.0;  // W (NaN in power sweeps)
    double g_eff = 0.0;      // from threshold (NaN in power sweeps)
    bool oscillating = false;
    bool converged = false;
    std::string status = "ok";
    SteadyState steady;
};

struct SweepResult
{
    std::vector<SweepRow> rows;
};

struct SweepOptions
{
    // Replace the drive power by this multiple of each point's own threshold.
    std::optional<double> threshold_multiple;
    // Pick the pump half-bandwidth from cfg.doublet by the sign of the offset.
    bool doublet_rule = true;
    ThresholdCriterion criterion = ThresholdCriterion::EigenvalueCrossing;
    ThresholdOptions threshold{};
    SteadyStateOptions steady{};
    // 0: FWM_THREADS environment variable, else hardware concurrency.
    unsigned threads = 0;
};

// Configuration used for one detuning point (drive at Omega_0 + 2 pi offset).
SystemConfig detuning_point_config(const SystemConfig &cfg, double offset_hz, const SweepOptions &opts = {});

SweepRow evaluate_detuning_point(const SystemConfig &cfg, double offset_hz, const SweepOptions &opts = {});
SweepRow evaluate_power_point(const SystemConfig &cfg, double power, const SweepOptions &opts = {});

// Points are evaluated concurrently and returned in input order. Per-point
// failures are recorded in SweepRow::status.
SweepResult sweep_detuning(const SystemConfig &cfg, const std::vector<double> &offsets_hz,
                           const SweepOptions &opts = {});
SweepResult sweep_power(const SystemConfig &cfg, const std::vector<double> &powers,
                        const SweepOptions &opts = {});

unsigned resolve_thread_count(unsigned requested);

}  // namespace fwm

#endif  // FWM_ANALYSIS_HPP
