#include "fwm/model.hpp"

#include <cmath>
#include <limits>
#include <sstream>

namespace fwm
{
namespace
{
[[noreturn]] void reject(std::string_view field, std::string_view constraint, double value)
{
    std::ostringstream oss;
    oss << field << ": " << constraint << " (got " << value << ")";
    throw ConfigError(oss.str());
}

bool finite(cplx z) { return std::isfinite(z.real()) && std::isfinite(z.imag()); }
}  // namespace

double dbm_to_watts(double dbm) { return 1e-3 * std::pow(10.0, dbm / 10.0); }

double watts_to_dbm(double watts) { return 10.0 * std::log10(watts / 1e-3); }

std::string_view to_string(ModeRole role)
{
    switch (role)
    {
    case ModeRole::Pump:
        return "pump";
    case ModeRole::Idler:
        return "idler";
    case ModeRole::Signal:
        return "signal";
    }
    return "unknown";
}

void ModeParams::validate() const
{
    const auto name = std::string(to_string(role));
    if (!(omega > 0.0) || !std::isfinite(omega))
        reject(name + ".omega", "must be positive and finite", omega);
    if (!(gamma_intrinsic >= 0.0))
        reject(name + ".gamma_intrinsic", "must be >= 0", gamma_intrinsic);
    if (!(gamma_in >= 0.0))
        reject(name + ".gamma_in", "must be >= 0", gamma_in);
    if (!(gamma_out >= 0.0))
        reject(name + ".gamma_out", "must be >= 0", gamma_out);
    if (!(gamma_total() > 0.0) || !std::isfinite(gamma_total()))
        reject(name + ".gamma_total", "must be positive and finite", gamma_total());
}

ModeParams mode_from_physical(double frequency_hz, double half_bandwidth_hz,
                              CouplingFractions fractions, ModeRole role)
{
    if (!(frequency_hz > 0.0))
        reject("frequency_hz", "must be > 0", frequency_hz);
    if (!(half_bandwidth_hz > 0.0))
        reject("half_bandwidth_hz", "must be > 0", half_bandwidth_hz);
    if (!(fractions.in >= 0.0 && fractions.in <= 1.0))
        reject("coupling_in", "must lie in [0, 1]", fractions.in);
    if (!(fractions.out >= 0.0 && fractions.out <= 1.0))
        reject("coupling_out", "must lie in [0, 1]", fractions.out);
    if (fractions.in + fractions.out > 1.0)
        reject("coupling_in + coupling_out", "must not exceed 1", fractions.in + fractions.out);

    const double total = hz_to_angular(half_bandwidth_hz);
    ModeParams m;
    m.omega = hz_to_angular(frequency_hz);
    m.gamma_in = fractions.in * total;
    m.gamma_out = fractions.out * total;
    m.gamma_intrinsic = std::max(0.0, total - m.gamma_in - m.gamma_out);
    m.role = role;
    m.validate();
    return m;
}

ModeParams with_half_bandwidth(const ModeParams &mode, double half_bandwidth_hz)
{
    const double total = mode.gamma_total();
    const CouplingFractions fractions{mode.gamma_in / total, mode.gamma_out / total};
    return mode_from_physical(mode.frequency_hz(), half_bandwidth_hz, fractions, mode.role);
}

double detuning(double drive_omega, const ModeParams &mode) { return drive_omega - mode.omega; }

double pump_photon_flux(const PumpDrive &drive)
{
    if (drive.power == 0.0)
        return 0.0;
    return drive.power / (kHbar * drive.frequency);
}

double flux_to_power(double flux, double frequency) { return flux * kHbar * frequency; }

cplx drive_amplitude(const PumpDrive &drive)
{
    return std::sqrt(pump_photon_flux(drive)) * std::polar(1.0, drive.phase);
}

std::string_view to_string(SeedMode mode)
{
    switch (mode)
    {
    case SeedMode::None:
        return "none";
    case SeedMode::Constant:
        return "constant";
    case SeedMode::ExponentialRamp:
        return "exponential_ramp";
    }
    return "unknown";
}

SeedMode seed_mode_from_string(std::string_view name)
{
    if (name == "none")
        return SeedMode::None;
    if (name == "constant")
        return SeedMode::Constant;
    if (name == "exponential_ramp")
        return SeedMode::ExponentialRamp;
    throw ConfigError("seed.mode: expected one of none|constant|exponential_ramp (got " +
                      std::string(name) + ")");
}

void SeedConfig::validate() const
{
    if (!finite(epsilon))
        throw ConfigError("seed.epsilon: must be finite");
    if (!(tau >= 0.0) || !std::isfinite(tau))
        reject("seed.tau", "must be >= 0 and finite", tau);
    if (mode == SeedMode::ExponentialRamp && tau == 0.0)
        reject("seed.tau", "must be > 0 for exponential_ramp", tau);
}

double select_doublet_linewidth(double detuning_sign, const DoubletLinewidths &doublet)
{
    return detuning_sign >= 0.0 ? doublet.upper_hz : doublet.lower_hz;
}

double SystemConfig::time_scale() const
{
    return frame.normalization_rate > 0.0 ? frame.normalization_rate : idler.gamma_total();
}

double matched_signal_omega(double pump_omega, double idler_omega)
{
    const double twice_pump = 2.0 * pump_omega;
    double candidate = twice_pump - idler_omega;
    if (candidate + idler_omega == twice_pump)
        return candidate;
    // Rounding left a residual; probe neighbouring representable values.
    double up = candidate, down = candidate;
    for (int k = 0; k < 8; ++k)
    {
        up = std::nextafter(up, std::numeric_limits<double>::infinity());
        down = std::nextafter(down, -std::numeric_limits<double>::infinity());
        if (up + idler_omega == twice_pump)
            return up;
        if (down + idler_omega == twice_pump)
            return down;
    }
    throw ConfigError("signal.omega: no double satisfies Omega_+ + Omega_- == 2 Omega_0 exactly "
                      "for this pump/idler pair");
}

SystemConfig make_system_config(const ModeParams &pump, const ModeParams &idler,
                                const SignalSpec &signal, cplx g, const PumpDrive &drive,
                                const SeedConfig &seed, const Frame &frame,
                                std::optional<DoubletLinewidths> doublet)
{
    pump.validate();
    idler.validate();

    // A few pump/idler pairs admit no exact signal double; nudging the idler by
    // a few ulp (far below any linewidth) always finds one.
    ModeParams idl = idler;
    double matched = 0.0;
    for (int k = 0;; ++k)
    {
        try
        {
            matched = matched_signal_omega(pump.omega, idl.omega);
            break;
        }
        catch (const ConfigError &)
        {
            if (k == 8)
                throw;
            idl.omega = std::nextafter(idl.omega, pump.omega);
        }
    }
    ModeParams sig;
    if (signal.mode)
    {
        sig = *signal.mode;
        // Accept only rounding-level disagreement with 2 Omega_0 - Omega_-.
        const double tol = 16.0 * std::numeric_limits<double>::epsilon() * 2.0 * pump.omega;
        if (!(std::abs(sig.omega - matched) <= tol))
        {
            std::ostringstream oss;
            oss << "signal.omega: violates Omega_+ = 2 Omega_0 - Omega_- (expected " << matched
                << " rad/s, got " << sig.omega << " rad/s)";
            throw ConfigError(oss.str());
        }
        sig.omega = matched;
    }
    else
    {
        if (!(signal.gamma_ratio > 0.0) || !std::isfinite(signal.gamma_ratio))
            reject("signal.gamma_ratio", "must be positive and finite", signal.gamma_ratio);
        const double gamma_plus = idler.gamma_total() * signal.gamma_ratio;
        sig = mode_from_physical(angular_to_hz(matched), angular_to_hz(gamma_plus), signal.fractions,
                                 ModeRole::Signal);
        sig.omega = matched;
    }
    sig.role = ModeRole::Signal;

    SystemConfig cfg;
    cfg.pump = pump;
    cfg.pump.role = ModeRole::Pump;
    cfg.idler = idl;
    cfg.idler.role = ModeRole::Idler;
    cfg.signal = sig;
    cfg.g = g;
    cfg.drive = drive;
    cfg.seed = seed;
    cfg.frame = frame;
    cfg.doublet = doublet;
    validate(cfg);
    return cfg;
}

void validate(const SystemConfig &cfg)
{
    cfg.pump.validate();
    cfg.idler.validate();
    cfg.signal.validate();
    if (cfg.signal.omega + cfg.idler.omega != 2.0 * cfg.pump.omega)
        throw ConfigError("signal.omega: violates Omega_+ = 2 Omega_0 - Omega_-");
    if (!finite(cfg.g))
        throw ConfigError("g: must be finite");
    if (!(cfg.drive.power >= 0.0) || !std::isfinite(cfg.drive.power))
        reject("drive.power", "must be >= 0 and finite", cfg.drive.power);
    if (!(cfg.drive.frequency > 0.0) || !std::isfinite(cfg.drive.frequency))
        reject("drive.frequency", "must be positive and finite", cfg.drive.frequency);
    if (!std::isfinite(cfg.drive.phase))
        reject("drive.phase", "must be finite", cfg.drive.phase);
    cfg.seed.validate();
    if (!std::isfinite(cfg.frame.idler_offset))
        reject("frame.idler_offset", "must be finite", cfg.frame.idler_offset);
    if (!(cfg.frame.normalization_rate >= 0.0) || !std::isfinite(cfg.frame.normalization_rate))
        reject("frame.normalization_rate", "must be >= 0 and finite", cfg.frame.normalization_rate);
    if (cfg.doublet && !(cfg.doublet->upper_hz > 0.0 && cfg.doublet->lower_hz > 0.0))
        throw ConfigError("pump doublet half-bandwidths: must be > 0");
}

}  // namespace fwm
