// Monte Carlo experiments: one perturbed channel estimate per trial, every
// method solved against it, MSE evaluated at the true channel.
#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "robeq/equalizers.hpp"

namespace robeq::sim {

struct SimConfig {
    double true_h = 1.05;
    double epsilon = 0.3;
    double mean_x = 0.01;
    double var_x = 1.0;
    double var_n = 1.0;
    int trials = 200;
    int samples_per_trial = 10000;
    std::uint64_t seed = 1;
    std::vector<Method> methods{std::begin(kAllMethods), std::end(kAllMethods)};

    /// Throws std::invalid_argument naming the offending field.
    void validate() const;
    SignalModel<double> model() const { return {mean_x, var_x, var_n}; }
};

/// Purpose tags keep the per-trial streams for different draws disjoint.
enum class StreamTag : std::uint64_t { Perturbation = 1, Samples = 2, Sweep = 3, Instances = 4 };

/**
 * Random stream derived statelessly from (seed, index, tag, sub).
 *
 * Each trial owns its stream, so the draws of trial i never depend on how
 * many trials run or on which thread runs them.
 */
class RngStream {
  public:
    RngStream(std::uint64_t seed, std::uint64_t index, StreamTag tag, std::uint64_t sub = 0);

    double normal(double mean, double stddev);
    double uniform(double lo, double hi);
    std::mt19937_64 &engine() { return engine_; }

  private:
    std::mt19937_64 engine_;
    std::normal_distribution<double> normal_{0.0, 1.0};
};

/// Zero-mean Gaussian with the given stddev, resampled until |value| <= bound.
double sample_truncated_gaussian(RngStream &stream, double sigma, double bound);

struct MethodOutcome {
    Method method;
    SolveReport<double> solution;
    double analytic_mse;
    double empirical_mse;
    double standard_error;

    /// (empirical - analytic) / standard_error.
    double z_score() const;
};

struct TrialRecord {
    int index;
    double dh;
    double h_est;
    std::vector<MethodOutcome> outcomes; // in SimConfig::methods order
};

/// Error raised inside a trial, tagged with its index.
class TrialError : public std::runtime_error {
  public:
    TrialError(int trial, std::string code, const std::string &what);
    int trial() const noexcept { return trial_; }
    const std::string &code() const noexcept { return code_; }

  private:
    int trial_;
    std::string code_;
};

/**
 * Solves every configured method for the estimate true_h + dh and measures
 * the MSE at true_h, analytically and over samples_per_trial symbol/noise
 * draws from `stream` (shared across methods).
 */
TrialRecord run_trial(const SimConfig &cfg, int index, double dh, RngStream &stream);

struct MethodSeries {
    Method method;
    std::vector<double> analytic;
    std::vector<double> empirical;
    std::vector<double> standard_error;
    double max_abs_z = 0;
};

struct TrialBatch {
    SimConfig config;
    std::vector<double> dh;
    std::vector<MethodSeries> series; // in SimConfig::methods order
};

/// All trials in index order. `threads` only changes wall time.
TrialBatch simulate_trials(const SimConfig &cfg, unsigned threads = 1);

/// simulate_trials with each method's curves sorted ascending, independently.
TrialBatch sorted_mse_curves(const SimConfig &cfg, unsigned threads = 1);

struct SweepResult {
    SimConfig config;
    std::vector<double> epsilons;
    std::vector<Method> methods;
    std::vector<std::vector<double>> average_mse; // [method][epsilon]
};

/// Average analytic MSE per method over `trials` perturbations at each eps.
/// cfg.epsilon is ignored; the grid must be strictly increasing and >= 0.
SweepResult epsilon_sweep(const SimConfig &cfg, std::span<const double> eps_grid,
                          unsigned threads = 1);

} // namespace robeq::sim
