#include "robeq/cli/commands.hpp"

#include <CLI11.hpp>

#include <cmath>
#include <fstream>
#include <sstream>
#include <thread>

#include "robeq/cli/config_file.hpp"
#include "robeq/cli/csv.hpp"
#include "robeq/equalizers.hpp"
#include "robeq/oracle.hpp"

namespace robeq::cli {

namespace {

constexpr int kMaxRegimeAttempts = 100000;

class UsageError : public std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

std::string one_line(std::string s) {
    for (char &c : s)
        if (c == '\n' || c == '\r') c = ' ';
    while (!s.empty() && s.back() == ' ') s.pop_back();
    return s;
}

// One value may be bound on several subcommands; only the parsed one counts.
template <typename T> struct Flag {
    T value{};
    std::vector<CLI::Option *> opts;
    void bind(CLI::Option *o) { opts.push_back(o); }
    bool given() const {
        for (const auto *o : opts)
            if (o->count() > 0) return true;
        return false;
    }
};

struct Common {
    Flag<std::uint64_t> seed;
    Flag<std::string> out;
    std::string config_path;
    RunConfig config;

    void add(CLI::App *app) {
        seed.bind(app->add_option("--seed", seed.value, "random seed (u64)"));
        out.bind(app->add_option("--out", out.value, "output path (default: standard output)"));
        app->add_option("--config", config_path, "key = value configuration file");
    }
    void load() {
        if (!config_path.empty()) config = load_config(config_path);
    }
    std::uint64_t seed_or(std::uint64_t fallback) const {
        if (seed.given()) return seed.value;
        return config.unsigned_integer("seed").value_or(fallback);
    }
    std::string out_path() const {
        if (out.given()) return out.value;
        return config.text("out").value_or("");
    }
};

double pick(const Flag<double> &f, const RunConfig &c, const char *key, double fallback) {
    if (f.given()) return f.value;
    return c.real(key).value_or(fallback);
}

int pick(const Flag<int> &f, const RunConfig &c, const char *key, int fallback) {
    if (f.given()) return f.value;
    if (auto v = c.integer(key)) return static_cast<int>(*v);
    return fallback;
}

std::string pick(const Flag<std::string> &f, const RunConfig &c, const char *key,
                 const std::string &fallback) {
    if (f.given()) return f.value;
    return c.text(key).value_or(fallback);
}

void emit(const std::string &path, const std::string &content, std::ostream &out) {
    if (path.empty() || path == "-") {
        out << content;
        return;
    }
    std::ofstream f(path, std::ios::binary);
    if (!f) throw UsageError("cannot open output file '" + path + "'");
    f << content;
    if (!f) throw UsageError("failed writing output file '" + path + "'");
}

unsigned default_threads() {
    const unsigned n = std::thread::hardware_concurrency();
    return n == 0 ? 1 : n;
}

struct SimFlags {
    Flag<double> true_h, epsilon, mean_x, var_x, var_n;
    Flag<int> trials, samples, threads;
    Flag<std::string> methods;

    void add(CLI::App *app, bool with_epsilon) {
        true_h.bind(app->add_option("--true-h", true_h.value, "true channel gain"));
        if (with_epsilon)
            epsilon.bind(app->add_option("--epsilon", epsilon.value, "uncertainty radius"));
        mean_x.bind(app->add_option("--mean-x", mean_x.value, "signal mean"));
        var_x.bind(app->add_option("--var-x", var_x.value, "signal variance"));
        var_n.bind(app->add_option("--var-n", var_n.value, "noise variance"));
        trials.bind(app->add_option("--trials", trials.value, "number of trials"));
        samples.bind(app->add_option("--samples-per-trial", samples.value,
                                      "symbol/noise draws per trial"));
        threads.bind(app->add_option("--threads", threads.value, "worker threads"));
        methods.bind(app->add_option("--methods", methods.value,
                                      "comma-separated methods (default: all)"));
    }

    sim::SimConfig build(const Common &common, double default_mean_x) const {
        const RunConfig &c = common.config;
        sim::SimConfig cfg;
        cfg.mean_x = default_mean_x;
        c.apply(cfg);
        cfg.seed = common.seed_or(cfg.seed);
        if (true_h.given()) cfg.true_h = true_h.value;
        if (epsilon.given()) cfg.epsilon = epsilon.value;
        if (mean_x.given()) cfg.mean_x = mean_x.value;
        if (var_x.given()) cfg.var_x = var_x.value;
        if (var_n.given()) cfg.var_n = var_n.value;
        if (trials.given()) cfg.trials = trials.value;
        if (samples.given()) cfg.samples_per_trial = samples.value;
        if (methods.given()) cfg.methods = parse_method_list(methods.value);
        cfg.validate();
        return cfg;
    }

    unsigned thread_count(const Common &common) const {
        const int n = pick(threads, common.config, "threads", 0);
        if (n < 0) throw UsageError("--threads must be >= 1");
        return n == 0 ? default_threads() : static_cast<unsigned>(n);
    }
};

std::string report_csv(const SolveReport<double> &r, const SignalModel<double> &m,
                       const ChannelBelief<double> &b) {
    std::ostringstream os;
    CsvWriter csv(os);
    csv.row({"method", "branch", "w", "l", "objective", "h_est", "epsilon", "mean_x", "var_x",
             "var_n"});
    csv.row({std::string(method_name(r.method)), std::string(branch_label(r.branch)),
             format_number(r.equalizer.w()), format_number(r.equalizer.l()),
             format_number(r.objective), format_number(b.h_est()), format_number(b.epsilon()),
             format_number(m.mean_x()), format_number(m.var_x()), format_number(m.var_n())});
    return os.str();
}

int cmd_solve(const Common &common, const Flag<std::string> &method_flag,
              const Flag<double> &h_est, const Flag<double> &epsilon, const Flag<double> &mean_x,
              const Flag<double> &var_x, const Flag<double> &var_n, bool csv_stdout,
              std::ostream &out) {
    const RunConfig &c = common.config;
    const std::string method_text = pick(method_flag, c, "method", "");
    if (method_text.empty()) throw UsageError("--method is required");
    if (!h_est.given() && !c.has("h_est")) throw UsageError("--h-est is required");
    const Method method = parse_method(method_text);
    const SignalModel<double> m(pick(mean_x, c, "mean_x", 0.0), pick(var_x, c, "var_x", 1.0),
                                pick(var_n, c, "var_n", 1.0));
    const ChannelBelief<double> b(pick(h_est, c, "h_est", 0.0), pick(epsilon, c, "epsilon", 0.0));

    const auto r = solve(method, m, b);
    const std::string csv = report_csv(r, m, b);
    if (csv_stdout) {
        out << csv;
    } else {
        out << "method: " << method_name(r.method) << '\n'
            << "branch: " << branch_label(r.branch) << '\n'
            << "w: " << format_number(r.equalizer.w()) << '\n'
            << "l: " << format_number(r.equalizer.l()) << '\n'
            << "objective: " << format_number(r.objective) << '\n';
    }
    const std::string path = common.out_path();
    if (!path.empty() && path != "-") emit(path, csv, out);
    return kExitOk;
}

int cmd_verify(const Common &common, const Flag<std::string> &method_flag,
               const Flag<int> &count, const Flag<std::string> &regime, bool zero_mean_flag,
               std::ostream &out, std::ostream &err) {
    const RunConfig &c = common.config;
    VerifyOptions opts;
    const std::string method_text = pick(method_flag, c, "method", "all");
    if (method_text != "all") opts.methods = parse_method_list(method_text);
    opts.count = pick(count, c, "count", 1000);
    if (opts.count < 1) throw UsageError("--count must be >= 1");
    opts.seed = common.seed_or(1);
    opts.regime = pick(regime, c, "regime", "any");
    opts.zero_mean = zero_mean_flag || c.boolean("zero_mean").value_or(false);

    std::ostringstream csv;
    const auto summary = run_verify(opts, csv);
    emit(common.out_path(), csv.str(), out);
    if (summary.failures > 0) {
        err << "error: VerificationFailed: " << summary.failures << " of " << summary.rows
            << " rows outside tolerance\n";
        return kExitVerifyFailed;
    }
    return kExitOk;
}

} // namespace

std::string column_key(Method m) {
    return m == Method::MinimaxRegret ? "regret" : std::string(method_name(m));
}

Instance draw_instance(std::uint64_t seed, std::uint64_t index, bool zero_mean,
                       std::uint64_t attempt) {
    sim::RngStream rng(seed, index, sim::StreamTag::Instances, attempt);
    double h = 0;
    while (h == 0) h = rng.uniform(-3.0, 3.0);
    const double eps = rng.uniform(0.0, 0.9 * std::abs(h));
    const double var_x = rng.uniform(0.1, 10.0);
    const double var_n = rng.uniform(0.1, 10.0);
    const double mean_x = rng.uniform(-1.0, 1.0);
    return {SignalModel<double>(zero_mean ? 0.0 : mean_x, var_x, var_n),
            ChannelBelief<double>(h, eps)};
}

bool regime_applies(const std::string &regime, Method method) {
    if (regime == "any") return true;
    if (regime == "branch1" || regime == "branch2") return method == Method::Minimax;
    if (regime == "case12" || regime == "case34") return method == Method::MinimaxRegret;
    return false;
}

bool in_regime(const std::string &regime, Branch branch) {
    if (regime == "any") return true;
    if (regime == "branch1") return branch == Branch::MinimaxBranch1;
    if (regime == "branch2") return branch == Branch::MinimaxBranch2;
    if (regime == "case12") return branch == Branch::RegretCase1 || branch == Branch::RegretCase2;
    if (regime == "case34") return branch == Branch::RegretCase3 || branch == Branch::RegretCase4;
    return false;
}

VerifySummary run_verify(const VerifyOptions &opts, std::ostream &os) {
    if (opts.methods.empty()) throw UsageError("no methods to verify");
    for (Method method : opts.methods)
        if (!regime_applies(opts.regime, method))
            throw UsageError("regime '" + opts.regime + "' does not apply to method " +
                             std::string(method_name(method)));

    CsvWriter csv(os);
    csv.row({"index", "method", "h_est", "epsilon", "mean_x", "var_x", "var_n", "branch", "cf_w",
             "cf_l", "cf_obj", "oracle_w", "oracle_l", "oracle_obj", "diff_w", "diff_l",
             "diff_obj", "check", "pass"});
    VerifySummary summary;
    for (int i = 0; i < opts.count; ++i) {
        // redraw until the closed form of every requested method lands in the regime
        Instance inst = draw_instance(opts.seed, static_cast<std::uint64_t>(i), opts.zero_mean);
        std::vector<SolveReport<double>> closed;
        for (int attempt = 1;; ++attempt) {
            closed.clear();
            bool ok = true;
            for (Method method : opts.methods) {
                closed.push_back(solve(method, inst.model, inst.belief));
                ok = ok && in_regime(opts.regime, closed.back().branch);
            }
            if (ok) break;
            if (attempt >= kMaxRegimeAttempts)
                throw UsageError("no instance found in regime '" + opts.regime + "'");
            inst = draw_instance(opts.seed, static_cast<std::uint64_t>(i), opts.zero_mean,
                                 static_cast<std::uint64_t>(attempt));
        }

        for (std::size_t k = 0; k < opts.methods.size(); ++k) {
            const Method method = opts.methods[k];
            const auto &cf = closed[k];
            const auto &m = inst.model;
            const auto &b = inst.belief;
            const bool objective_only =
                cf.branch == Branch::RegretCase3 || cf.branch == Branch::RegretCase4;
            std::vector<std::string> row = {
                std::to_string(i), std::string(method_name(method)), format_number(b.h_est()),
                format_number(b.epsilon()), format_number(m.mean_x()), format_number(m.var_x()),
                format_number(m.var_n()), std::string(branch_label(cf.branch)),
                format_number(cf.equalizer.w()), format_number(cf.equalizer.l()),
                format_number(cf.objective)};
            bool pass = false;
            try {
                const auto orc = oracle::oracle_for(method, m, b);
                const double dw = std::abs(cf.equalizer.w() - orc.equalizer.w());
                const double dl = std::abs(cf.equalizer.l() - orc.equalizer.l());
                const double dobj = std::abs(cf.objective - orc.objective);
                if (objective_only)
                    pass = cf.objective - orc.objective <= kObjectiveTolerance;
                else
                    pass = dw <= kCoeffTolerance && dl <= kCoeffTolerance &&
                           dobj <= kObjectiveTolerance;
                for (double v : {orc.equalizer.w(), orc.equalizer.l(), orc.objective, dw, dl, dobj})
                    row.push_back(format_number(v));
            } catch (const SolverError &) {
                for (int j = 0; j < 6; ++j) row.push_back("nan");
            }
            row.push_back(objective_only ? "objective" : "full");
            row.push_back(pass ? "1" : "0");
            csv.row(row);
            ++summary.rows;
            if (!pass) ++summary.failures;
        }
    }
    return summary;
}

void write_simulate_csv(const sim::TrialBatch &batch, std::ostream &os) {
    CsvWriter csv(os);
    std::vector<std::string> header = {"rank"};
    for (const auto &s : batch.series) header.push_back("mse_" + column_key(s.method));
    for (const auto &s : batch.series) header.push_back("mse_" + column_key(s.method) + "_emp");
    csv.row(header);
    const std::size_t n = batch.dh.size();
    for (std::size_t i = 0; i < n; ++i) {
        std::vector<std::string> row = {std::to_string(i + 1)};
        for (const auto &s : batch.series) row.push_back(format_number(s.analytic[i]));
        for (const auto &s : batch.series) row.push_back(format_number(s.empirical[i]));
        csv.row(row);
    }
}

void write_sweep_csv(const sim::SweepResult &sweep, std::ostream &os) {
    CsvWriter csv(os);
    std::vector<std::string> header = {"epsilon"};
    for (Method m : sweep.methods) header.push_back("avg_mse_" + column_key(m));
    csv.row(header);
    for (std::size_t k = 0; k < sweep.epsilons.size(); ++k) {
        std::vector<std::string> row = {format_number(sweep.epsilons[k])};
        for (std::size_t j = 0; j < sweep.methods.size(); ++j)
            row.push_back(format_number(sweep.average_mse[j][k]));
        csv.row(row);
    }
}

int run_cli(int argc, const char *const *argv, std::ostream &out, std::ostream &err) {
    CLI::App app{"Robust affine equalizers under bounded channel uncertainty", "robeq"};
    app.require_subcommand(1);
    app.set_version_flag("--version", "robeq 1.0.0");

    Common common;

    auto *solve_cmd = app.add_subcommand("solve", "solve one instance in closed form");
    Flag<std::string> solve_method;
    Flag<double> solve_h, solve_eps, solve_mean, solve_vx, solve_vn;
    bool solve_csv = false;
    solve_method.bind(solve_cmd->add_option("--method", solve_method.value,
                                             "mmse | minimax | minimin | minimax-regret"));
    solve_h.bind(solve_cmd->add_option("--h-est", solve_h.value, "channel estimate"));
    solve_eps.bind(solve_cmd->add_option("--epsilon", solve_eps.value, "uncertainty radius"));
    solve_mean.bind(solve_cmd->add_option("--mean-x", solve_mean.value, "signal mean"));
    solve_vx.bind(solve_cmd->add_option("--var-x", solve_vx.value, "signal variance"));
    solve_vn.bind(solve_cmd->add_option("--var-n", solve_vn.value, "noise variance"));
    solve_cmd->add_flag("--csv", solve_csv, "print CSV instead of text");

    auto *verify_cmd = app.add_subcommand("verify", "compare closed forms with the oracles");
    Flag<std::string> verify_method, verify_regime;
    Flag<int> verify_count;
    bool verify_zero_mean = false;
    verify_method.bind(verify_cmd->add_option("--method", verify_method.value,
                                               "method or comma list (default: all)"));
    verify_count.bind(verify_cmd->add_option("--count", verify_count.value, "instances"));
    verify_regime.bind(verify_cmd->add_option("--regime", verify_regime.value,
                                               "any | branch1 | branch2 | case12 | case34"));
    verify_cmd->add_flag("--zero-mean", verify_zero_mean, "draw zero-mean signals only");

    auto *simulate_cmd = app.add_subcommand("simulate", "sorted per-trial MSE curves");
    SimFlags simulate_flags;
    simulate_flags.add(simulate_cmd, true);

    auto *sweep_cmd = app.add_subcommand("sweep", "average MSE over an epsilon grid");
    SimFlags sweep_flags;
    Flag<std::string> sweep_grid;
    sweep_flags.add(sweep_cmd, false);
    sweep_grid.bind(sweep_cmd->add_option("--eps-grid", sweep_grid.value,
                                           "lo:step:hi or v1,v2,... (default 0.1:0.05:0.3)"));

    for (auto *sub : {solve_cmd, verify_cmd, simulate_cmd, sweep_cmd}) common.add(sub);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError &e) {
        if (e.get_exit_code() == 0) {
            app.exit(e, out, err);
            return kExitOk;
        }
        err << "error: UsageError: " << one_line(e.what()) << '\n';
        return kExitUsage;
    }

    try {
        common.load();
        if (solve_cmd->parsed())
            return cmd_solve(common, solve_method, solve_h, solve_eps, solve_mean, solve_vx,
                             solve_vn, solve_csv, out);
        if (verify_cmd->parsed())
            return cmd_verify(common, verify_method, verify_count, verify_regime,
                              verify_zero_mean, out, err);
        if (simulate_cmd->parsed()) {
            const auto cfg = simulate_flags.build(common, sim::SimConfig{}.mean_x);
            const auto batch = sim::sorted_mse_curves(cfg, simulate_flags.thread_count(common));
            std::ostringstream csv;
            write_simulate_csv(batch, csv);
            emit(common.out_path(), csv.str(), out);
            return kExitOk;
        }
        if (sweep_cmd->parsed()) {
            const auto cfg = sweep_flags.build(common, 0.0);
            std::vector<double> grid = parse_grid("0.1:0.05:0.3");
            if (sweep_grid.given())
                grid = parse_grid(sweep_grid.value);
            else if (auto g = common.config.grid("eps_grid"))
                grid = *g;
            const auto result = sim::epsilon_sweep(cfg, grid, sweep_flags.thread_count(common));
            std::ostringstream csv;
            write_sweep_csv(result, csv);
            emit(common.out_path(), csv.str(), out);
            return kExitOk;
        }
    } catch (const ConfigError &e) {
        err << "error: ConfigError: " << one_line(e.what()) << '\n';
        return kExitUsage;
    } catch (const SolverError &e) {
        err << "error: " << e.code() << ": " << one_line(e.what()) << '\n';
        return kExitSolver;
    } catch (const sim::TrialError &e) {
        err << "error: " << e.code() << ": " << one_line(e.what()) << '\n';
        return kExitSolver;
    } catch (const std::invalid_argument &e) {
        err << "error: UsageError: " << one_line(e.what()) << '\n';
        return kExitUsage;
    } catch (const std::exception &e) {
        err << "error: InternalError: " << one_line(e.what()) << '\n';
        return kExitSolver;
    }
    return kExitUsage;
}

} // namespace robeq::cli
