// Subcommands of the robeq tool: solve, verify, simulate, sweep.
#pragma once

#include <cstdint>
#include <ostream>
#include <string>
#include <vector>

#include "robeq/model.hpp"
#include "robeq/sim.hpp"

namespace robeq::cli {

enum ExitCode : int { kExitOk = 0, kExitVerifyFailed = 1, kExitUsage = 2, kExitSolver = 3 };

struct Instance {
    SignalModel<double> model;
    ChannelBelief<double> belief;
};

/**
 * Random verification instance: h_est uniform on [-3, 3] without 0,
 * eps uniform on [0, 0.9 |h_est|], var_x and var_n uniform on [0.1, 10],
 * mean_x uniform on [-1, 1] (or 0). `attempt` selects an independent redraw.
 */
Instance draw_instance(std::uint64_t seed, std::uint64_t index, bool zero_mean,
                       std::uint64_t attempt = 0);

/// Regimes: any, branch1, branch2 (minimax), case12, case34 (minimax-regret).
bool regime_applies(const std::string &regime, Method method);
bool in_regime(const std::string &regime, Branch branch);

struct VerifyOptions {
    std::vector<Method> methods{std::begin(kAllMethods), std::end(kAllMethods)};
    int count = 1000;
    std::uint64_t seed = 1;
    std::string regime = "any";
    bool zero_mean = false;
};

struct VerifySummary {
    int rows = 0;
    int failures = 0;
};

inline constexpr double kCoeffTolerance = 1e-4;
inline constexpr double kObjectiveTolerance = 1e-6;

/// Writes one CSV row per (instance, method) and returns the tally.
VerifySummary run_verify(const VerifyOptions &opts, std::ostream &csv);

/// Column key used in CSV headers: mmse, minimax, minimin, regret.
std::string column_key(Method m);

void write_simulate_csv(const sim::TrialBatch &batch, std::ostream &os);
void write_sweep_csv(const sim::SweepResult &sweep, std::ostream &os);

/// Full command line entry point; `argv[0]` is the program name.
int run_cli(int argc, const char *const *argv, std::ostream &out, std::ostream &err);

} // namespace robeq::cli
