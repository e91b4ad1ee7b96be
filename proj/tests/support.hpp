#ifndef FWM_TEST_SUPPORT_HPP
#define FWM_TEST_SUPPORT_HPP

#include "fwm/analysis.hpp"

#include <cmath>
#include <random>

namespace fwm::test
{
struct DeskParams
{
    double gamma_minus = 1.0;
    double ratio = 10.0;  // gamma+/gamma-
    double gamma0 = 1.0;
    double in_fraction = 0.5;
    double delta0 = 0.0;
    double delta_minus = 0.0;
    cplx g{1.0, 0.0};
    double flux = 0.0;  // incident photons per second
    SeedConfig seed{};
};

inline ModeParams raw_mode(double omega, double gamma, double in_fraction, ModeRole role)
{
    ModeParams m;
    m.omega = omega;
    m.gamma_in = in_fraction * gamma;
    m.gamma_out = 0.5 * (1.0 - in_fraction) * gamma;
    m.gamma_intrinsic = gamma - m.gamma_in - m.gamma_out;
    m.role = role;
    return m;
}

// Rates of order one; resonances well above them so the frames are meaningful.
inline SystemConfig desk(const DeskParams &p)
{
    const ModeParams pump = raw_mode(1000.0, p.gamma0, p.in_fraction, ModeRole::Pump);
    const ModeParams idler = raw_mode(900.0, p.gamma_minus, 0.0, ModeRole::Idler);
    SignalSpec sig;
    sig.gamma_ratio = p.ratio;
    PumpDrive drive{flux_to_power(p.flux, pump.omega + p.delta0), pump.omega + p.delta0, 0.0};
    return make_system_config(pump, idler, sig, p.g, drive, p.seed, Frame{p.delta_minus, 0.0});
}

inline SystemConfig with_flux(SystemConfig cfg, double flux)
{
    cfg.drive.power = flux_to_power(flux, cfg.drive.frequency);
    return cfg;
}

// Full-scale configuration built from the measured linewidths.
inline SystemConfig measured_scale(double offset_hz = 0.0, double power_w = dbm_to_watts(5.0),
                                double gamma_ratio = 1000.0)
{
    const double f0 = 12.0375e9;
    const ModeParams pump =
        mode_from_physical(f0, offset_hz >= 0.0 ? 6.7 : 5.0, {0.3, 0.3}, ModeRole::Pump);
    const ModeParams idler = mode_from_physical(f0 - 7.669e6, 6.0, {0.0, 0.5}, ModeRole::Idler);
    SignalSpec sig;
    sig.gamma_ratio = gamma_ratio;
    PumpDrive drive{power_w, pump.omega + hz_to_angular(offset_hz), 0.0};
    return make_system_config(pump, idler, sig, {1e-16, 0.0}, drive, SeedConfig{}, Frame{},
                              DoubletLinewidths{});
}

inline double rel_diff(double a, double b) { return std::abs(a - b) / std::max(std::abs(a), std::abs(b)); }
inline double rel_diff(cplx a, cplx b) { return std::abs(a - b) / std::max(std::abs(a), std::abs(b)); }

}  // namespace fwm::test

#endif
