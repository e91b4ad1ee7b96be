#ifndef FWM_CLI_HPP
#define FWM_CLI_HPP

#include <iosfwd>
#include <string>
#include <vector>

namespace fwm
{
inline constexpr const char *kToolVersion = "0.1.0";

// Exit codes.
inline constexpr int kExitOk = 0;
inline constexpr int kExitDomainError = 1;
inline constexpr int kExitUsage = 2;

// Entry point of the `fwm` tool. Subcommands: simulate, steady, threshold,
// sweep-detuning, sweep-power, nonlinearity. Every run writes its CSV tables
// (and SVG plots with --plot) plus one run_manifest.toml into --out.
int run_cli(const std::vector<std::string> &args, std::ostream &out, std::ostream &err);

}  // namespace fwm

#endif  // FWM_CLI_HPP
