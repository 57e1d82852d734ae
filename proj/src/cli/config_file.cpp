#include "robeq/cli/config_file.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <limits>
#include <set>

namespace robeq::cli {

namespace {

std::string trim(const std::string &s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

std::vector<std::string> split(const std::string &s, char sep) {
    std::vector<std::string> out;
    std::string::size_type start = 0;
    for (;;) {
        const auto pos = s.find(sep, start);
        out.push_back(trim(s.substr(start, pos - start)));
        if (pos == std::string::npos) return out;
        start = pos + 1;
    }
}

using Check = std::function<void(const std::string &)>;

Check real_check(std::function<bool(double)> ok, const char *what) {
    return [ok = std::move(ok), what](const std::string &v) {
        if (!ok(parse_real(v))) throw std::invalid_argument(what);
    };
}

Check integer_at_least(std::int64_t lo) {
    return [lo](const std::string &v) {
        const auto n = parse_integer(v);
        if (n < lo) throw std::invalid_argument("must be >= " + std::to_string(lo));
        if (n > std::numeric_limits<int>::max()) throw std::invalid_argument("too large");
    };
}

const std::map<std::string, Check> &key_table() {
    static const std::map<std::string, Check> table = {
        {"seed", [](const std::string &v) { parse_unsigned(v); }},
        {"out", [](const std::string &v) {
             if (v.empty()) throw std::invalid_argument("must not be empty");
         }},
        {"threads", integer_at_least(1)},
        {"method", [](const std::string &v) { parse_method(v); }},
        {"methods", [](const std::string &v) { parse_method_list(v); }},
        {"h_est", real_check([](double) { return true; }, "must be finite")},
        {"epsilon", real_check([](double x) { return x >= 0; }, "must be >= 0")},
        {"true_h", real_check([](double) { return true; }, "must be finite")},
        {"mean_x", real_check([](double) { return true; }, "must be finite")},
        {"var_x", real_check([](double x) { return x > 0; }, "must be > 0")},
        {"var_n", real_check([](double x) { return x > 0; }, "must be > 0")},
        {"trials", integer_at_least(1)},
        {"samples_per_trial", integer_at_least(1)},
        {"count", integer_at_least(1)},
        {"regime", [](const std::string &v) {
             static const std::set<std::string> ok = {"any", "branch1", "branch2", "case12",
                                                      "case34"};
             if (!ok.count(v)) throw std::invalid_argument("unknown regime '" + v + "'");
         }},
        {"zero_mean", [](const std::string &v) { parse_bool(v); }},
        {"eps_grid", [](const std::string &v) { parse_grid(v); }},
    };
    return table;
}

} // namespace

ConfigError::ConfigError(const std::string &source, int line, const std::string &message)
    : std::runtime_error(source + (line > 0 ? ":" + std::to_string(line) : "") + ": " + message),
      line_(line) {}

double parse_real(const std::string &s) {
    double v = 0;
    const char *end = s.data() + s.size();
    const auto res = std::from_chars(s.data(), end, v);
    if (s.empty() || res.ec != std::errc() || res.ptr != end)
        throw std::invalid_argument("not a number: '" + s + "'");
    if (!std::isfinite(v)) throw std::invalid_argument("not finite: '" + s + "'");
    return v;
}

std::int64_t parse_integer(const std::string &s) {
    std::int64_t v = 0;
    const char *end = s.data() + s.size();
    const auto res = std::from_chars(s.data(), end, v);
    if (s.empty() || res.ec != std::errc() || res.ptr != end)
        throw std::invalid_argument("not an integer: '" + s + "'");
    return v;
}

std::uint64_t parse_unsigned(const std::string &s) {
    std::uint64_t v = 0;
    const char *end = s.data() + s.size();
    const auto res = std::from_chars(s.data(), end, v);
    if (s.empty() || res.ec != std::errc() || res.ptr != end)
        throw std::invalid_argument("not an unsigned integer: '" + s + "'");
    return v;
}

bool parse_bool(const std::string &s) {
    if (s == "true" || s == "1" || s == "yes") return true;
    if (s == "false" || s == "0" || s == "no") return false;
    throw std::invalid_argument("not a boolean: '" + s + "'");
}

std::vector<Method> parse_method_list(const std::string &s) {
    std::vector<Method> out;
    for (const auto &name : split(s, ',')) {
        const Method m = parse_method(name);
        for (Method seen : out)
            if (seen == m) throw std::invalid_argument("duplicate method '" + name + "'");
        out.push_back(m);
    }
    return out;
}

std::vector<double> parse_grid(const std::string &s) {
    std::vector<double> out;
    if (s.find(':') != std::string::npos) {
        const auto parts = split(s, ':');
        if (parts.size() != 3) throw std::invalid_argument("range must be lo:step:hi");
        const double lo = parse_real(parts[0]), step = parse_real(parts[1]),
                     hi = parse_real(parts[2]);
        if (!(step > 0)) throw std::invalid_argument("range step must be > 0");
        if (hi < lo) throw std::invalid_argument("range must have lo <= hi");
        const auto n = static_cast<long>(std::floor((hi - lo) / step + 1e-9)) + 1;
        if (n > 1000000) throw std::invalid_argument("range has too many points");
        for (long k = 0; k < n; ++k) {
            // snap to 15 significant digits so 0.1:0.05:0.3 yields 0.15, not 0.15000000000000002
            char buf[64];
            const double v = lo + static_cast<double>(k) * step;
            const auto res = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::general, 15);
            double snapped = v;
            std::from_chars(buf, res.ptr, snapped);
            out.push_back(snapped);
        }
    } else {
        for (const auto &v : split(s, ',')) out.push_back(parse_real(v));
    }
    for (std::size_t k = 0; k < out.size(); ++k) {
        if (out[k] < 0) throw std::invalid_argument("grid values must be >= 0");
        if (k > 0 && !(out[k] > out[k - 1]))
            throw std::invalid_argument("grid must be strictly increasing");
    }
    return out;
}

std::optional<double> RunConfig::real(const std::string &key) const {
    if (!has(key)) return std::nullopt;
    return parse_real(raw(key));
}

std::optional<std::int64_t> RunConfig::integer(const std::string &key) const {
    if (!has(key)) return std::nullopt;
    return parse_integer(raw(key));
}

std::optional<std::uint64_t> RunConfig::unsigned_integer(const std::string &key) const {
    if (!has(key)) return std::nullopt;
    return parse_unsigned(raw(key));
}

std::optional<bool> RunConfig::boolean(const std::string &key) const {
    if (!has(key)) return std::nullopt;
    return parse_bool(raw(key));
}

std::optional<std::string> RunConfig::text(const std::string &key) const {
    if (!has(key)) return std::nullopt;
    return raw(key);
}

std::optional<Method> RunConfig::method(const std::string &key) const {
    if (!has(key)) return std::nullopt;
    return parse_method(raw(key));
}

std::optional<std::vector<Method>> RunConfig::methods(const std::string &key) const {
    if (!has(key)) return std::nullopt;
    return parse_method_list(raw(key));
}

std::optional<std::vector<double>> RunConfig::grid(const std::string &key) const {
    if (!has(key)) return std::nullopt;
    return parse_grid(raw(key));
}

void RunConfig::apply(sim::SimConfig &cfg) const {
    if (auto v = real("true_h")) cfg.true_h = *v;
    if (auto v = real("epsilon")) cfg.epsilon = *v;
    if (auto v = real("mean_x")) cfg.mean_x = *v;
    if (auto v = real("var_x")) cfg.var_x = *v;
    if (auto v = real("var_n")) cfg.var_n = *v;
    if (auto v = integer("trials")) cfg.trials = static_cast<int>(*v);
    if (auto v = integer("samples_per_trial")) cfg.samples_per_trial = static_cast<int>(*v);
    if (auto v = unsigned_integer("seed")) cfg.seed = *v;
    if (auto v = methods("methods")) cfg.methods = *v;
}

RunConfig parse_config(std::istream &in, const std::string &source) {
    RunConfig cfg;
    std::map<std::string, int> seen;
    std::string line;
    int number = 0;
    while (std::getline(in, line)) {
        ++number;
        if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError(source, number, "expected 'key = value'");
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        const auto &table = key_table();
        const auto it = table.find(key);
        if (it == table.end()) throw ConfigError(source, number, "unknown key '" + key + "'");
        if (const auto prev = seen.find(key); prev != seen.end())
            throw ConfigError(source, number,
                              "duplicate key '" + key + "' (first on line " +
                                  std::to_string(prev->second) + ")");
        try {
            it->second(value);
        } catch (const std::invalid_argument &e) {
            throw ConfigError(source, number, key + ": " + e.what());
        }
        seen[key] = number;
        cfg.set(key, value);
    }
    return cfg;
}

RunConfig load_config(const std::string &path) {
    std::ifstream in(path);
    if (!in) throw ConfigError(path, 0, "cannot open config file");
    return parse_config(in, path);
}

} // namespace robeq::cli
