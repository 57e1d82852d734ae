#include "robeq/sim.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <exception>
#include <limits>
#include <stdexcept>
#include <thread>

namespace robeq::sim {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ull;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
    return x ^ (x >> 31);
}

// Runs body(i) for i in [0, count) on up to `threads` workers. Each index is
// written by exactly one worker; the first failing index (lowest) is rethrown.
template <typename Body> void parallel_for(int count, unsigned threads, Body &&body) {
    std::vector<std::exception_ptr> errors(static_cast<std::size_t>(count));
    auto run_range = [&](int begin, int end) {
        for (int i = begin; i < end; ++i) {
            try {
                body(i);
            } catch (...) {
                errors[static_cast<std::size_t>(i)] = std::current_exception();
            }
        }
    };
    const int workers = static_cast<int>(std::clamp<unsigned>(threads, 1u, 256u));
    if (workers == 1 || count < 2) {
        run_range(0, count);
    } else {
        std::vector<std::thread> pool;
        const int chunk = (count + workers - 1) / workers;
        for (int start = 0; start < count; start += chunk)
            pool.emplace_back(run_range, start, std::min(count, start + chunk));
        for (auto &t : pool) t.join();
    }
    for (auto &e : errors)
        if (e) std::rethrow_exception(e);
}

struct Accumulator {
    long n = 0;
    double mean = 0;
    double m2 = 0;
    void add(double v) {
        ++n;
        const double delta = v - mean;
        mean += delta / static_cast<double>(n);
        m2 += delta * (v - mean);
    }
    double standard_error() const {
        if (n < 2) return 0.0;
        return std::sqrt(m2 / static_cast<double>(n - 1) / static_cast<double>(n));
    }
};

} // namespace

void SimConfig::validate() const {
    auto finite = [](double v) { return std::isfinite(v); };
    if (!finite(true_h)) throw std::invalid_argument("true_h must be finite");
    if (!finite(epsilon) || epsilon < 0) throw std::invalid_argument("epsilon must be >= 0");
    if (!finite(mean_x)) throw std::invalid_argument("mean_x must be finite");
    if (!finite(var_x) || !(var_x > 0)) throw std::invalid_argument("var_x must be > 0");
    if (!finite(var_n) || !(var_n > 0)) throw std::invalid_argument("var_n must be > 0");
    if (trials < 1) throw std::invalid_argument("trials must be >= 1");
    if (samples_per_trial < 1) throw std::invalid_argument("samples_per_trial must be >= 1");
    if (methods.empty()) throw std::invalid_argument("methods must not be empty");
}

RngStream::RngStream(std::uint64_t seed, std::uint64_t index, StreamTag tag, std::uint64_t sub) {
    std::uint64_t s = splitmix64(seed);
    s = splitmix64(s ^ (index * 0xD1B54A32D192ED03ull));
    s = splitmix64(s ^ static_cast<std::uint64_t>(tag));
    s = splitmix64(s ^ (sub * 0x8CB92BA72F3D8DD7ull));
    engine_.seed(s);
}

double RngStream::normal(double mean, double stddev) {
    return mean + stddev * normal_(engine_);
}

double RngStream::uniform(double lo, double hi) {
    // 53 random bits, so the value is identical on every standard library.
    const double u = static_cast<double>(engine_() >> 11) * 0x1.0p-53;
    return lo + (hi - lo) * u;
}

double sample_truncated_gaussian(RngStream &stream, double sigma, double bound) {
    if (!(sigma >= 0) || !(bound >= 0))
        throw std::invalid_argument("sigma and bound must be >= 0");
    if (sigma == 0 || bound == 0) return 0.0;
    for (;;) {
        const double z = stream.normal(0.0, sigma);
        if (std::abs(z) <= bound) return z;
    }
}

double MethodOutcome::z_score() const {
    const double diff = empirical_mse - analytic_mse;
    if (standard_error > 0) return diff / standard_error;
    return diff == 0 ? 0.0 : std::numeric_limits<double>::infinity();
}

TrialError::TrialError(int trial, std::string code, const std::string &what)
    : std::runtime_error("trial " + std::to_string(trial) + ": " + what), trial_(trial),
      code_(std::move(code)) {}

TrialRecord run_trial(const SimConfig &cfg, int index, double dh, RngStream &stream) {
    if (!(std::abs(dh) <= cfg.epsilon))
        throw std::invalid_argument("trial perturbation exceeds epsilon");
    const auto m = cfg.model();
    const double h = cfg.true_h;
    TrialRecord rec{index, dh, h + dh, {}};
    const ChannelBelief<double> belief(rec.h_est, cfg.epsilon);

    rec.outcomes.reserve(cfg.methods.size());
    for (Method method : cfg.methods) {
        try {
            auto sol = solve(method, m, belief);
            const double analytic = mse(sol.equalizer, m, h);
            rec.outcomes.push_back({method, sol, analytic, 0.0, 0.0});
        } catch (const SolverError &e) {
            throw TrialError(index, e.code(), e.what());
        }
    }

    std::vector<Accumulator> acc(rec.outcomes.size());
    const double sx = std::sqrt(cfg.var_x), sn = std::sqrt(cfg.var_n);
    for (int s = 0; s < cfg.samples_per_trial; ++s) {
        const double x = stream.normal(cfg.mean_x, sx);
        const double y = h * x + stream.normal(0.0, sn);
        for (std::size_t k = 0; k < acc.size(); ++k) {
            const double err = x - rec.outcomes[k].solution.equalizer(y);
            acc[k].add(err * err);
        }
    }
    for (std::size_t k = 0; k < acc.size(); ++k) {
        rec.outcomes[k].empirical_mse = acc[k].mean;
        rec.outcomes[k].standard_error = acc[k].standard_error();
    }
    return rec;
}

TrialBatch simulate_trials(const SimConfig &cfg, unsigned threads) {
    cfg.validate();
    std::vector<TrialRecord> records(static_cast<std::size_t>(cfg.trials));
    parallel_for(cfg.trials, threads, [&](int i) {
        const auto idx = static_cast<std::uint64_t>(i);
        RngStream perturb(cfg.seed, idx, StreamTag::Perturbation);
        const double dh = sample_truncated_gaussian(perturb, cfg.epsilon, cfg.epsilon);
        RngStream samples(cfg.seed, idx, StreamTag::Samples);
        records[static_cast<std::size_t>(i)] = run_trial(cfg, i, dh, samples);
    });

    TrialBatch batch{cfg, {}, {}};
    batch.dh.reserve(records.size());
    for (Method method : cfg.methods) batch.series.push_back({method, {}, {}, {}, 0.0});
    for (const auto &rec : records) {
        batch.dh.push_back(rec.dh);
        for (std::size_t k = 0; k < rec.outcomes.size(); ++k) {
            const auto &o = rec.outcomes[k];
            auto &s = batch.series[k];
            s.analytic.push_back(o.analytic_mse);
            s.empirical.push_back(o.empirical_mse);
            s.standard_error.push_back(o.standard_error);
            s.max_abs_z = std::max(s.max_abs_z, std::abs(o.z_score()));
        }
    }
    return batch;
}

TrialBatch sorted_mse_curves(const SimConfig &cfg, unsigned threads) {
    auto batch = simulate_trials(cfg, threads);
    for (auto &s : batch.series) {
        std::sort(s.analytic.begin(), s.analytic.end());
        // keep each empirical value paired with its own standard error
        std::vector<std::size_t> order(s.empirical.size());
        for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
        std::stable_sort(order.begin(), order.end(),
                         [&](std::size_t a, std::size_t b) { return s.empirical[a] < s.empirical[b]; });
        std::vector<double> emp, se;
        for (std::size_t i : order) {
            emp.push_back(s.empirical[i]);
            se.push_back(s.standard_error[i]);
        }
        s.empirical = std::move(emp);
        s.standard_error = std::move(se);
    }
    return batch;
}

SweepResult epsilon_sweep(const SimConfig &cfg, std::span<const double> eps_grid,
                          unsigned threads) {
    cfg.validate();
    if (eps_grid.empty()) throw std::invalid_argument("epsilon grid is empty");
    for (std::size_t k = 0; k < eps_grid.size(); ++k) {
        if (!std::isfinite(eps_grid[k]) || eps_grid[k] < 0)
            throw std::invalid_argument("epsilon grid values must be finite and >= 0");
        if (k > 0 && !(eps_grid[k] > eps_grid[k - 1]))
            throw std::invalid_argument("epsilon grid must be strictly increasing");
    }
    const auto m = cfg.model();
    const std::size_t nm = cfg.methods.size();
    SweepResult out{cfg, {eps_grid.begin(), eps_grid.end()}, cfg.methods,
                    std::vector<std::vector<double>>(nm, std::vector<double>(eps_grid.size()))};

    std::vector<double> per_trial(static_cast<std::size_t>(cfg.trials) * nm);
    for (std::size_t k = 0; k < eps_grid.size(); ++k) {
        const double eps = eps_grid[k];
        parallel_for(cfg.trials, threads, [&](int i) {
            // keyed on the radius itself, so a point does not depend on the rest of the grid
            RngStream stream(cfg.seed, static_cast<std::uint64_t>(i), StreamTag::Sweep,
                             std::bit_cast<std::uint64_t>(eps));
            const double dh = sample_truncated_gaussian(stream, eps, eps);
            const ChannelBelief<double> belief(cfg.true_h + dh, eps);
            for (std::size_t j = 0; j < nm; ++j) {
                try {
                    const auto sol = solve(cfg.methods[j], m, belief);
                    per_trial[static_cast<std::size_t>(i) * nm + j] =
                        mse(sol.equalizer, m, cfg.true_h);
                } catch (const SolverError &e) {
                    throw TrialError(i, e.code(), e.what());
                }
            }
        });
        for (std::size_t j = 0; j < nm; ++j) {
            double sum = 0;
            for (int i = 0; i < cfg.trials; ++i)
                sum += per_trial[static_cast<std::size_t>(i) * nm + j];
            out.average_mse[j][k] = sum / cfg.trials;
        }
    }
    return out;
}

} // namespace robeq::sim
