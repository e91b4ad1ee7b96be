#ifndef FWM_MODEL_HPP
#define FWM_MODEL_HPP

#include <complex>
#include <numbers>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace fwm
{
using cplx = std::complex<double>;

// Reduced Planck constant, J s (CODATA 2018).
inline constexpr double kHbar = 1.054571817e-34;
inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

// Raised for any parameter that violates a type invariant.
class ConfigError : public std::invalid_argument
{
public:
    using std::invalid_argument::invalid_argument;
};

inline double hz_to_angular(double hz) { return kTwoPi * hz; }
inline double angular_to_hz(double omega) { return omega / kTwoPi; }

double dbm_to_watts(double dbm);
double watts_to_dbm(double watts);

enum class ModeRole
{
    Pump,
    Idler,
    Signal
};

std::string_view to_string(ModeRole role);

// One resonance. All rates are amplitude half-linewidths in rad/s.
struct ModeParams
{
    double omega = 0.0;
    double gamma_intrinsic = 0.0;
    double gamma_in = 0.0;
    double gamma_out = 0.0;
    ModeRole role = ModeRole::Pump;

    double gamma_total() const { return gamma_intrinsic + gamma_in + gamma_out; }
    double frequency_hz() const { return angular_to_hz(omega); }
    double half_bandwidth_hz() const { return angular_to_hz(gamma_total()); }

    // Throws ConfigError naming the violated constraint.
    void validate() const;
};

struct CouplingFractions
{
    double in = 0.0;
    double out = 0.0;
};

// omega = 2 pi f, gamma_total = 2 pi hbw, split by the coupling fractions with
// the remainder assigned to intrinsic loss.
ModeParams mode_from_physical(double frequency_hz, double half_bandwidth_hz,
                              CouplingFractions fractions, ModeRole role);

// Same split applied to a new total linewidth, keeping the fractions of `mode`.
ModeParams with_half_bandwidth(const ModeParams &mode, double half_bandwidth_hz);

// Delta = drive_omega - mode.omega. The equations of motion carry -(gamma + i Delta).
double detuning(double drive_omega, const ModeParams &mode);

struct PumpDrive
{
    double power = 0.0;      // W
    double frequency = 0.0;  // rad/s
    double phase = 0.0;      // rad
};

// |alpha_in|^2 = P / (hbar omega), photons/s.
double pump_photon_flux(const PumpDrive &drive);
double flux_to_power(double flux, double frequency);
// sqrt(flux) e^{i phase}
cplx drive_amplitude(const PumpDrive &drive);

enum class SeedMode
{
    None,
    Constant,
    ExponentialRamp
};

std::string_view to_string(SeedMode mode);
SeedMode seed_mode_from_string(std::string_view name);

// Phenomenological stand-in for the slow cross-relaxation seeding of the idler.
struct SeedConfig
{
    cplx epsilon{1e-6, 0.0};
    double tau = 0.0;  // s
    SeedMode mode = SeedMode::Constant;

    void validate() const;
};

// Upper/lower doublet half-bandwidths of the pump resonance, Hz.
struct DoubletLinewidths
{
    double upper_hz = 6.7;
    double lower_hz = 5.0;
};

// Positive detuning selects the upper doublet, negative the lower one.
// Zero detuning is treated as positive.
double select_doublet_linewidth(double detuning_sign, const DoubletLinewidths &doublet = {});

// Rotating frames: pump at the drive frequency, idler at idler.omega +
// idler_offset, signal at 2 omega_drive - (idler.omega + idler_offset).
// `normalization_rate` (rad/s) scales time inside the integrator; zero means
// "use the idler linewidth".
struct Frame
{
    double idler_offset = 0.0;
    double normalization_rate = 0.0;
};

struct FieldState
{
    cplx alpha0{};
    cplx alpha_minus{};
    cplx alpha_plus{};
    double t = 0.0;
};

// Fully validated three-mode system. Construct through make_system_config,
// which enforces signal.omega + idler.omega == 2 pump.omega bit-exactly.
struct SystemConfig
{
    ModeParams pump;
    ModeParams idler;
    ModeParams signal;
    cplx g{};
    PumpDrive drive;
    SeedConfig seed;
    Frame frame;
    std::optional<DoubletLinewidths> doublet;

    double delta_pump() const { return detuning(drive.frequency, pump); }
    double delta_idler() const { return frame.idler_offset; }
    // 2 Delta_0 - Delta_-, by frequency matching.
    double delta_signal() const { return 2.0 * delta_pump() - delta_idler(); }
    double time_scale() const;
};

// Options for assembling a SystemConfig.
struct SignalSpec
{
    // Explicit signal mode. Its omega is checked against 2 Omega_0 - Omega_-
    // and snapped to the exact value; a mismatch beyond rounding is rejected.
    std::optional<ModeParams> mode;
    // Otherwise the signal is the lossy resonance at 2 Omega_0 - Omega_- with
    // gamma_+ = gamma_ratio gamma_- and the given coupling fractions.
    double gamma_ratio = 1000.0;
    CouplingFractions fractions{0.0, 0.5};

    // gamma_+ = gamma_- (a_- / a_+)^2
    static SignalSpec from_amplitude_ratio(double amplitude_ratio, CouplingFractions fractions = {0.0, 0.5})
    {
        return {std::nullopt, amplitude_ratio * amplitude_ratio, fractions};
    }
};

SystemConfig make_system_config(const ModeParams &pump, const ModeParams &idler,
                                const SignalSpec &signal, cplx g, const PumpDrive &drive,
                                const SeedConfig &seed = {}, const Frame &frame = {},
                                std::optional<DoubletLinewidths> doublet = std::nullopt);

// Re-runs all invariant checks; throws ConfigError.
void validate(const SystemConfig &cfg);

// Exact 2 Omega_0 - Omega_- such that signal + idler == 2 pump holds in doubles.
double matched_signal_omega(double pump_omega, double idler_omega);

}  // namespace fwm

#endif  // FWM_MODEL_HPP
