#ifndef FWM_CONFIG_HPP
#define FWM_CONFIG_HPP

// Run configuration: a small TOML-style file of [section] headers and
// `key = value` lines. Values are numbers, quoted strings or true/false.
// Powers are strings with a unit suffix ("5 dBm", "0.01 W") or bare numbers
// in watts. All frequencies and linewidths are in Hz.
//
// Precedence: command-line overrides > file values > built-in defaults.

#include "fwm/analysis.hpp"

#include <map>
#include <optional>
#include <string>
#include <vector>

namespace fwm
{
// Parse failure with a 1-based line/column position.
class ParseError : public ConfigError
{
public:
    ParseError(int line, int column, const std::string &msg);
    int line() const { return line_; }
    int column() const { return column_; }

private:
    int line_;
    int column_;
};

// A power with the unit it was written in.
struct PowerSpec
{
    double value = 5.0;
    bool dbm = true;

    double watts() const { return dbm ? dbm_to_watts(value) : value; }
};

PowerSpec parse_power(const std::string &text);
std::string format_power(const PowerSpec &p);

struct RunConfig
{
    // [pump]
    double pump_frequency_hz = 12.0375e9;
    DoubletLinewidths doublet{};
    CouplingFractions pump_coupling{0.3, 0.3};
    // [idler]
    double idler_spacing_hz = 7.669e6;
    std::optional<double> idler_frequency_hz;
    double idler_half_bandwidth_hz = 6.0;
    CouplingFractions idler_coupling{0.0, 0.5};
    // [signal]
    std::optional<double> signal_frequency_hz;
    double signal_gamma_ratio = 1000.0;
    CouplingFractions signal_coupling{0.0, 0.5};
    // [drive]
    PowerSpec power{};
    double pump_offset_hz = 0.0;
    double drive_phase_rad = 0.0;
    // [nonlinearity]
    double g_abs = 1e-16;  // rad/s
    double g_phase_rad = 0.0;
    // [seed]
    SeedMode seed_mode = SeedMode::Constant;
    double seed_epsilon_re = 1e-6;
    double seed_epsilon_im = 0.0;
    double seed_tau_s = 0.0;
    // [frame]
    double idler_frame_offset_hz = 0.0;
    double time_normalization_hz = 0.0;
    // [solver]
    SolverMethod method = SolverMethod::AdaptiveRK;
    double rel_tol = 1e-9;
    double abs_tol = 1e-12;
    double max_step_s = 0.0;  // 0: unlimited
    double fixed_step_s = 0.0;
    // [threshold]
    ThresholdCriterion criterion = ThresholdCriterion::EigenvalueCrossing;
    double power_min_w = 1e-40;
    double power_max_w = 1e9;
    double onset_decay_times = 3000.0;
    // [simulate]
    double t_end_s = 10.0;
    long samples = 2000;
    double onset_ratio = 0.5;
    // [sweep]
    double offset_start_hz = -1000.0;
    double offset_stop_hz = 1000.0;
    PowerSpec power_start{0.0, true};
    PowerSpec power_stop{30.0, true};
    bool power_log_spacing = true;
    long sweep_points = 21;
    double threshold_multiple = 0.0;  // 0: use drive power as given
    bool doublet_rule = true;
    long threads = 0;

    // Physical model assembled from the values above. Throws ConfigError.
    SystemConfig system() const;
    SolverOptions solver() const;
    ThresholdOptions threshold_options() const;
    SweepOptions sweep_options() const;
    std::vector<double> sweep_offsets() const;
    std::vector<double> sweep_powers() const;
};

// Literal value text with its source position (line 0 for command-line overrides).
struct ConfigEntry
{
    std::string text;
    int line = 0;
    int column = 0;
};

// Entries keyed by "section.key".
using ConfigEntries = std::map<std::string, ConfigEntry>;

// Syntax only; reports the first malformed line. Unknown keys are rejected
// here as well, with their position.
ConfigEntries parse_config_text(const std::string &text);

// Applies entries over the defaults and validates the result.
RunConfig config_from_entries(const ConfigEntries &entries);

RunConfig load_config(const std::string &path);
RunConfig load_config_text(const std::string &text);

// Normalized text: every section and key in schema order with canonical value
// formatting. Optional keys appear only when set.
std::string dump_config(const RunConfig &cfg);

// Names of every accepted "section.key".
std::vector<std::string> config_keys();

// Canonical shortest round-trip decimal.
std::string format_number(double v);

}  // namespace fwm

#endif  // FWM_CONFIG_HPP
