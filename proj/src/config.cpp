#include "fwm/config.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <sstream>

namespace fwm
{
ParseError::ParseError(int line, int column, const std::string &msg)
    : ConfigError("line " + std::to_string(line) + ", column " + std::to_string(column) + ": " + msg),
      line_(line), column_(column)
{
}

std::string format_number(double v)
{
    if (std::isnan(v))
        return "nan";
    if (std::isinf(v))
        return v > 0 ? "inf" : "-inf";
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

namespace
{
std::string trim(std::string_view s)
{
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string_view::npos)
        return {};
    const auto e = s.find_last_not_of(" \t\r");
    return std::string(s.substr(b, e - b + 1));
}

bool is_quoted(const std::string &s) { return s.size() >= 2 && s.front() == '"' && s.back() == '"'; }

std::string unquote(const std::string &s) { return is_quoted(s) ? s.substr(1, s.size() - 2) : s; }

std::string quote(const std::string &s) { return "\"" + s + "\""; }

[[noreturn]] void bad_value(const std::string &key, const ConfigEntry &e, const std::string &why)
{
    std::string msg = key + ": " + why + " (got " + e.text + ")";
    if (e.line > 0)
        throw ParseError(e.line, e.column, msg);
    throw ConfigError(msg);
}

double to_number(const std::string &key, const ConfigEntry &e)
{
    const std::string t = e.text;
    if (is_quoted(t))
        bad_value(key, e, "expected a number");
    double v = 0.0;
    const auto res = std::from_chars(t.data(), t.data() + t.size(), v);
    if (res.ec != std::errc{} || res.ptr != t.data() + t.size())
    {
        // from_chars rejects a leading '+'.
        if (!t.empty() && t.front() == '+')
            return to_number(key, {t.substr(1), e.line, e.column});
        bad_value(key, e, "expected a number");
    }
    if (!std::isfinite(v))
        bad_value(key, e, "must be finite");
    return v;
}

long to_integer(const std::string &key, const ConfigEntry &e)
{
    const double v = to_number(key, e);
    if (v != std::floor(v) || std::abs(v) > 1e15)
        bad_value(key, e, "expected an integer");
    return static_cast<long>(v);
}

bool to_bool(const std::string &key, const ConfigEntry &e)
{
    const std::string t = unquote(e.text);
    if (t == "true")
        return true;
    if (t == "false")
        return false;
    bad_value(key, e, "expected true or false");
}

std::string to_word(const ConfigEntry &e) { return unquote(e.text); }

struct Field
{
    std::string section;
    std::string key;
    std::function<void(RunConfig &, const std::string &, const ConfigEntry &)> set;
    // Canonical text, or nullopt for an unset optional key.
    std::function<std::optional<std::string>(const RunConfig &)> get;
};

Field number(std::string section, std::string key, double RunConfig::*member)
{
    return {section, key,
            [member](RunConfig &c, const std::string &k, const ConfigEntry &e) { c.*member = to_number(k, e); },
            [member](const RunConfig &c) { return std::optional<std::string>(format_number(c.*member)); }};
}

Field integer(std::string section, std::string key, long RunConfig::*member)
{
    return {section, key,
            [member](RunConfig &c, const std::string &k, const ConfigEntry &e) { c.*member = to_integer(k, e); },
            [member](const RunConfig &c) { return std::optional<std::string>(std::to_string(c.*member)); }};
}

Field boolean(std::string section, std::string key, bool RunConfig::*member)
{
    return {section, key,
            [member](RunConfig &c, const std::string &k, const ConfigEntry &e) { c.*member = to_bool(k, e); },
            [member](const RunConfig &c) { return std::optional<std::string>(c.*member ? "true" : "false"); }};
}

Field optional_number(std::string section, std::string key, std::optional<double> RunConfig::*member)
{
    return {section, key,
            [member](RunConfig &c, const std::string &k, const ConfigEntry &e) { c.*member = to_number(k, e); },
            [member](const RunConfig &c) {
                return (c.*member) ? std::optional<std::string>(format_number(*(c.*member))) : std::nullopt;
            }};
}

Field fraction(std::string section, std::string key, CouplingFractions RunConfig::*member, bool in)
{
    return {section, key,
            [member, in](RunConfig &c, const std::string &k, const ConfigEntry &e) {
                (in ? (c.*member).in : (c.*member).out) = to_number(k, e);
            },
            [member, in](const RunConfig &c) {
                return std::optional<std::string>(format_number(in ? (c.*member).in : (c.*member).out));
            }};
}

Field power_field(std::string section, std::string key, PowerSpec RunConfig::*member)
{
    return {section, key,
            [member](RunConfig &c, const std::string &k, const ConfigEntry &e) {
                try
                {
                    c.*member = parse_power(e.text);
                }
                catch (const ConfigError &err)
                {
                    bad_value(k, e, err.what());
                }
            },
            [member](const RunConfig &c) { return std::optional<std::string>(quote(format_power(c.*member))); }};
}

const std::vector<Field> &schema()
{
    static const std::vector<Field> fields = [] {
        std::vector<Field> f;
        f.push_back(number("pump", "frequency_hz", &RunConfig::pump_frequency_hz));
        f.push_back({"pump", "half_bandwidth_upper_hz",
                     [](RunConfig &c, const std::string &k, const ConfigEntry &e) { c.doublet.upper_hz = to_number(k, e); },
                     [](const RunConfig &c) { return std::optional<std::string>(format_number(c.doublet.upper_hz)); }});
        f.push_back({"pump", "half_bandwidth_lower_hz",
                     [](RunConfig &c, const std::string &k, const ConfigEntry &e) { c.doublet.lower_hz = to_number(k, e); },
                     [](const RunConfig &c) { return std::optional<std::string>(format_number(c.doublet.lower_hz)); }});
        f.push_back(fraction("pump", "coupling_in", &RunConfig::pump_coupling, true));
        f.push_back(fraction("pump", "coupling_out", &RunConfig::pump_coupling, false));

        f.push_back(number("idler", "spacing_hz", &RunConfig::idler_spacing_hz));
        f.push_back(optional_number("idler", "frequency_hz", &RunConfig::idler_frequency_hz));
        f.push_back(number("idler", "half_bandwidth_hz", &RunConfig::idler_half_bandwidth_hz));
        f.push_back(fraction("idler", "coupling_in", &RunConfig::idler_coupling, true));
        f.push_back(fraction("idler", "coupling_out", &RunConfig::idler_coupling, false));

        f.push_back(optional_number("signal", "frequency_hz", &RunConfig::signal_frequency_hz));
        f.push_back(number("signal", "gamma_ratio", &RunConfig::signal_gamma_ratio));
        f.push_back(fraction("signal", "coupling_in", &RunConfig::signal_coupling, true));
        f.push_back(fraction("signal", "coupling_out", &RunConfig::signal_coupling, false));

        f.push_back(power_field("drive", "power", &RunConfig::power));
        f.push_back(number("drive", "offset_hz", &RunConfig::pump_offset_hz));
        f.push_back(number("drive", "phase_rad", &RunConfig::drive_phase_rad));

        f.push_back(number("nonlinearity", "g_abs", &RunConfig::g_abs));
        f.push_back(number("nonlinearity", "g_phase_rad", &RunConfig::g_phase_rad));

        f.push_back({"seed", "mode",
                     [](RunConfig &c, const std::string &k, const ConfigEntry &e) {
                         try
                         {
                             c.seed_mode = seed_mode_from_string(to_word(e));
                         }
                         catch (const ConfigError &)
                         {
                             bad_value(k, e, "expected one of none|constant|exponential_ramp");
                         }
                     },
                     [](const RunConfig &c) { return std::optional<std::string>(quote(std::string(to_string(c.seed_mode)))); }});
        f.push_back(number("seed", "epsilon_re", &RunConfig::seed_epsilon_re));
        f.push_back(number("seed", "epsilon_im", &RunConfig::seed_epsilon_im));
        f.push_back(number("seed", "tau_s", &RunConfig::seed_tau_s));

        f.push_back(number("frame", "idler_offset_hz", &RunConfig::idler_frame_offset_hz));
        f.push_back(number("frame", "time_normalization_hz", &RunConfig::time_normalization_hz));

        f.push_back({"solver", "method",
                     [](RunConfig &c, const std::string &k, const ConfigEntry &e) {
                         const auto w = to_word(e);
                         if (w == "adaptive_rk")
                             c.method = SolverMethod::AdaptiveRK;
                         else if (w == "fixed_rk4")
                             c.method = SolverMethod::FixedRK4;
                         else
                             bad_value(k, e, "expected adaptive_rk or fixed_rk4");
                     },
                     [](const RunConfig &c) {
                         return std::optional<std::string>(
                             quote(c.method == SolverMethod::AdaptiveRK ? "adaptive_rk" : "fixed_rk4"));
                     }});
        f.push_back(number("solver", "rel_tol", &RunConfig::rel_tol));
        f.push_back(number("solver", "abs_tol", &RunConfig::abs_tol));
        f.push_back(number("solver", "max_step_s", &RunConfig::max_step_s));
        f.push_back(number("solver", "fixed_step_s", &RunConfig::fixed_step_s));

        f.push_back({"threshold", "criterion",
                     [](RunConfig &c, const std::string &k, const ConfigEntry &e) {
                         const auto w = to_word(e);
                         if (w == "eigenvalue_crossing")
                             c.criterion = ThresholdCriterion::EigenvalueCrossing;
                         else if (w == "simulated_onset")
                             c.criterion = ThresholdCriterion::SimulatedOnset;
                         else
                             bad_value(k, e, "expected eigenvalue_crossing or simulated_onset");
                     },
                     [](const RunConfig &c) { return std::optional<std::string>(quote(std::string(to_string(c.criterion)))); }});
        f.push_back(number("threshold", "power_min_w", &RunConfig::power_min_w));
        f.push_back(number("threshold", "power_max_w", &RunConfig::power_max_w));
        f.push_back(number("threshold", "onset_decay_times", &RunConfig::onset_decay_times));

        f.push_back(number("simulate", "t_end_s", &RunConfig::t_end_s));
        f.push_back(integer("simulate", "samples", &RunConfig::samples));
        f.push_back(number("simulate", "onset_ratio", &RunConfig::onset_ratio));

        f.push_back(number("sweep", "offset_start_hz", &RunConfig::offset_start_hz));
        f.push_back(number("sweep", "offset_stop_hz", &RunConfig::offset_stop_hz));
        f.push_back(power_field("sweep", "power_start", &RunConfig::power_start));
        f.push_back(power_field("sweep", "power_stop", &RunConfig::power_stop));
        f.push_back(boolean("sweep", "power_log_spacing", &RunConfig::power_log_spacing));
        f.push_back(integer("sweep", "points", &RunConfig::sweep_points));
        f.push_back(number("sweep", "threshold_multiple", &RunConfig::threshold_multiple));
        f.push_back(boolean("sweep", "doublet_rule", &RunConfig::doublet_rule));
        f.push_back(integer("sweep", "threads", &RunConfig::threads));
        return f;
    }();
    return fields;
}

const Field *find_field(const std::string &section, const std::string &key)
{
    for (const auto &f : schema())
        if (f.section == section && f.key == key)
            return &f;
    return nullptr;
}

bool known_section(const std::string &section)
{
    return std::any_of(schema().begin(), schema().end(), [&](const Field &f) { return f.section == section; });
}

void check_run_values(const RunConfig &c)
{
    auto require = [](bool ok, const std::string &what) {
        if (!ok)
            throw ConfigError(what);
    };
    require(c.idler_spacing_hz > 0.0, "idler.spacing_hz: must be > 0");
    require(c.g_abs >= 0.0, "nonlinearity.g_abs: must be >= 0");
    require(c.rel_tol > 0.0, "solver.rel_tol: must be > 0");
    require(c.abs_tol > 0.0, "solver.abs_tol: must be > 0");
    require(c.max_step_s >= 0.0, "solver.max_step_s: must be >= 0 (0 = unlimited)");
    require(c.fixed_step_s >= 0.0, "solver.fixed_step_s: must be >= 0");
    require(c.method != SolverMethod::FixedRK4 || c.fixed_step_s > 0.0 || c.max_step_s > 0.0,
            "solver.fixed_step_s: fixed_rk4 needs a positive step");
    require(c.power_min_w > 0.0 && c.power_max_w > c.power_min_w,
            "threshold.power_min_w/power_max_w: need 0 < power_min_w < power_max_w");
    require(c.onset_decay_times > 0.0, "threshold.onset_decay_times: must be > 0");
    require(c.t_end_s > 0.0, "simulate.t_end_s: must be > 0");
    require(c.samples >= 2, "simulate.samples: must be >= 2");
    require(c.onset_ratio > 0.0 && c.onset_ratio <= 1.0, "simulate.onset_ratio: must lie in (0, 1]");
    require(c.sweep_points >= 1, "sweep.points: must be >= 1");
    require(c.power_start.watts() >= 0.0 && c.power_stop.watts() >= 0.0, "sweep.power_start/power_stop: must be >= 0");
    require(!c.power_log_spacing || (c.power_start.watts() > 0.0 && c.power_stop.watts() > 0.0),
            "sweep.power_log_spacing: power_start and power_stop must be > 0");
    require(c.threshold_multiple >= 0.0, "sweep.threshold_multiple: must be >= 0 (0 = off)");
    require(c.threads >= 0, "sweep.threads: must be >= 0");
    require(c.power.watts() >= 0.0, "drive.power: must be >= 0");
}

}  // namespace

PowerSpec parse_power(const std::string &raw)
{
    std::string t = trim(unquote(trim(raw)));
    PowerSpec p;
    std::string unit;
    auto strip_suffix = [&](std::string_view suffix) {
        if (t.size() > suffix.size() && t.compare(t.size() - suffix.size(), suffix.size(), suffix) == 0)
        {
            t = trim(t.substr(0, t.size() - suffix.size()));
            return true;
        }
        return false;
    };
    if (strip_suffix("dBm"))
        p.dbm = true;
    else if (strip_suffix("mW"))
        unit = "mW";
    else if (strip_suffix("W"))
        p.dbm = false;
    else
        p.dbm = false;

    double v = 0.0;
    std::string num = (!t.empty() && t.front() == '+') ? t.substr(1) : t;
    const auto res = std::from_chars(num.data(), num.data() + num.size(), v);
    if (num.empty() || res.ec != std::errc{} || res.ptr != num.data() + num.size() || !std::isfinite(v))
        throw ConfigError("power: expected <number> [W|mW|dBm]");
    if (unit == "mW")
    {
        p.dbm = false;
        v *= 1e-3;
    }
    p.value = v;
    if (!p.dbm && v < 0.0)
        throw ConfigError("power: must be >= 0 W");
    return p;
}

std::string format_power(const PowerSpec &p) { return format_number(p.value) + (p.dbm ? " dBm" : " W"); }

ConfigEntries parse_config_text(const std::string &text)
{
    ConfigEntries entries;
    std::istringstream in(text);
    std::string line;
    std::string section;
    int lineno = 0;
    while (std::getline(in, line))
    {
        ++lineno;
        // Strip comments outside quotes.
        bool in_quotes = false;
        std::size_t cut = line.size();
        for (std::size_t k = 0; k < line.size(); ++k)
        {
            if (line[k] == '"')
                in_quotes = !in_quotes;
            else if (line[k] == '#' && !in_quotes)
            {
                cut = k;
                break;
            }
        }
        if (in_quotes)
            throw ParseError(lineno, static_cast<int>(line.find('"')) + 1, "unterminated string");
        const std::string body = line.substr(0, cut);
        const std::string t = trim(body);
        if (t.empty())
            continue;
        const int col = static_cast<int>(body.find_first_not_of(" \t")) + 1;

        if (t.front() == '[')
        {
            if (t.back() != ']')
                throw ParseError(lineno, col, "expected ']' to close section header");
            section = trim(t.substr(1, t.size() - 2));
            if (section != "manifest" && !known_section(section))
                throw ParseError(lineno, col + 1, "unknown section [" + section + "]");
            continue;
        }
        const auto eq = body.find('=');
        if (eq == std::string::npos)
            throw ParseError(lineno, col, "expected 'key = value'");
        const std::string key = trim(body.substr(0, eq));
        const std::string value = trim(body.substr(eq + 1));
        const int value_col = static_cast<int>(body.find_first_not_of(" \t", eq + 1)) + 1;
        if (key.empty())
            throw ParseError(lineno, col, "missing key before '='");
        if (value.empty())
            throw ParseError(lineno, static_cast<int>(eq) + 2, "missing value after '='");
        if (section.empty())
            throw ParseError(lineno, col, "key '" + key + "' appears before any [section]");
        if (section == "manifest")
            continue;
        if (!find_field(section, key))
            throw ParseError(lineno, col, "unknown key '" + key + "' in [" + section + "]");
        const std::string full = section + "." + key;
        if (entries.count(full))
            throw ParseError(lineno, col, "duplicate key '" + full + "'");
        entries[full] = {value, lineno, value_col};
    }
    return entries;
}

RunConfig config_from_entries(const ConfigEntries &entries)
{
    RunConfig cfg;
    for (const auto &[full, entry] : entries)
    {
        const auto dot = full.find('.');
        const Field *f = dot == std::string::npos ? nullptr : find_field(full.substr(0, dot), full.substr(dot + 1));
        if (!f)
        {
            if (entry.line > 0)
                throw ParseError(entry.line, entry.column, "unknown key '" + full + "'");
            throw ConfigError("unknown key '" + full + "'");
        }
        f->set(cfg, full, entry);
    }
    check_run_values(cfg);
    (void)cfg.system();
    return cfg;
}

RunConfig load_config_text(const std::string &text) { return config_from_entries(parse_config_text(text)); }

RunConfig load_config(const std::string &path)
{
    std::ifstream in(path);
    if (!in)
        throw ConfigError("cannot open config file '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return load_config_text(ss.str());
}

std::string dump_config(const RunConfig &cfg)
{
    std::ostringstream out;
    std::string section;
    for (const auto &f : schema())
    {
        const auto value = f.get(cfg);
        if (!value)
            continue;
        if (f.section != section)
        {
            if (!section.empty())
                out << "\n";
            section = f.section;
            out << "[" << section << "]\n";
        }
        out << f.key << " = " << *value << "\n";
    }
    return out.str();
}

std::vector<std::string> config_keys()
{
    std::vector<std::string> keys;
    for (const auto &f : schema())
        keys.push_back(f.section + "." + f.key);
    return keys;
}

SystemConfig RunConfig::system() const
{
    const double idler_hz = idler_frequency_hz.value_or(pump_frequency_hz - idler_spacing_hz);
    const double pump_hbw = doublet_rule ? select_doublet_linewidth(pump_offset_hz, doublet) : doublet.upper_hz;
    const ModeParams pump = mode_from_physical(pump_frequency_hz, pump_hbw, pump_coupling, ModeRole::Pump);
    const ModeParams idler = mode_from_physical(idler_hz, idler_half_bandwidth_hz, idler_coupling, ModeRole::Idler);

    SignalSpec sig;
    sig.gamma_ratio = signal_gamma_ratio;
    sig.fractions = signal_coupling;
    if (signal_frequency_hz)
    {
        if (!(signal_gamma_ratio > 0.0))
            throw ConfigError("signal.gamma_ratio: must be > 0");
        ModeParams m = mode_from_physical(*signal_frequency_hz, idler_half_bandwidth_hz * signal_gamma_ratio,
                                          signal_coupling, ModeRole::Signal);
        sig.mode = m;
    }

    PumpDrive drive;
    drive.power = power.watts();
    drive.frequency = pump.omega + hz_to_angular(pump_offset_hz);
    drive.phase = drive_phase_rad;

    SeedConfig seed;
    seed.mode = seed_mode;
    seed.epsilon = {seed_epsilon_re, seed_epsilon_im};
    seed.tau = seed_tau_s;

    Frame frame;
    frame.idler_offset = hz_to_angular(idler_frame_offset_hz);
    frame.normalization_rate = hz_to_angular(time_normalization_hz);

    try
    {
        return make_system_config(pump, idler, sig, std::polar(g_abs, g_phase_rad), drive, seed, frame, doublet);
    }
    catch (const ConfigError &e)
    {
        if (signal_frequency_hz && std::string(e.what()).rfind("signal.omega", 0) == 0)
            throw ConfigError("signal.frequency_hz: inconsistent with idler/pump; requires Omega_+ = 2 Omega_0 - "
                              "Omega_- (" +
                              std::string(e.what()) + ")");
        throw;
    }
}

SolverOptions RunConfig::solver() const
{
    SolverOptions o;
    o.rel_tol = rel_tol;
    o.abs_tol = abs_tol;
    o.method = method;
    if (max_step_s > 0.0)
        o.max_step = max_step_s;
    o.fixed_step = fixed_step_s;
    return o;
}

ThresholdOptions RunConfig::threshold_options() const
{
    ThresholdOptions o;
    o.power_min = power_min_w;
    o.power_max = power_max_w;
    o.onset_decay_times = onset_decay_times;
    o.solver = solver();
    return o;
}

SweepOptions RunConfig::sweep_options() const
{
    SweepOptions o;
    if (threshold_multiple > 0.0)
        o.threshold_multiple = threshold_multiple;
    o.doublet_rule = doublet_rule;
    o.criterion = criterion;
    o.threshold = threshold_options();
    o.steady.solver = solver();
    o.threads = static_cast<unsigned>(threads);
    return o;
}

std::vector<double> RunConfig::sweep_offsets() const
{
    std::vector<double> v(static_cast<std::size_t>(sweep_points));
    for (std::size_t k = 0; k < v.size(); ++k)
        v[k] = v.size() == 1 ? offset_start_hz
                             : offset_start_hz + (offset_stop_hz - offset_start_hz) * static_cast<double>(k) /
                                                     static_cast<double>(v.size() - 1);
    return v;
}

std::vector<double> RunConfig::sweep_powers() const
{
    const double a = power_start.watts(), b = power_stop.watts();
    std::vector<double> v(static_cast<std::size_t>(sweep_points));
    for (std::size_t k = 0; k < v.size(); ++k)
    {
        const double f = v.size() == 1 ? 0.0 : static_cast<double>(k) / static_cast<double>(v.size() - 1);
        v[k] = power_log_spacing ? a * std::pow(b / a, f) : a + (b - a) * f;
    }
    return v;
}

}  // namespace fwm
