// `key = value` run configuration files.
//
//   # comment
//   trials = 200
//   eps_grid = 0.1:0.05:0.3
//
// Keys are the flag names with '-' replaced by '_'. Unknown keys, duplicate
// keys and out-of-range values are rejected with the offending line number.
#pragma once

#include <cstdint>
#include <istream>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "robeq/model.hpp"
#include "robeq/sim.hpp"

namespace robeq::cli {

class ConfigError : public std::runtime_error {
  public:
    ConfigError(const std::string &source, int line, const std::string &message);
    int line() const noexcept { return line_; }

  private:
    int line_;
};

/// Validated values of a configuration file, still in textual form.
class RunConfig {
  public:
    bool has(const std::string &key) const { return values_.count(key) != 0; }
    const std::string &raw(const std::string &key) const { return values_.at(key); }

    std::optional<double> real(const std::string &key) const;
    std::optional<std::int64_t> integer(const std::string &key) const;
    std::optional<std::uint64_t> unsigned_integer(const std::string &key) const;
    std::optional<bool> boolean(const std::string &key) const;
    std::optional<std::string> text(const std::string &key) const;
    std::optional<Method> method(const std::string &key) const;
    std::optional<std::vector<Method>> methods(const std::string &key) const;
    std::optional<std::vector<double>> grid(const std::string &key) const;

    /// Overwrites the SimConfig fields present in the file.
    void apply(sim::SimConfig &cfg) const;

    void set(const std::string &key, std::string value) { values_[key] = std::move(value); }

  private:
    std::map<std::string, std::string> values_;
};

RunConfig parse_config(std::istream &in, const std::string &source);

/// Throws ConfigError (line 0) if the file cannot be opened.
RunConfig load_config(const std::string &path);

/// Strict parsers shared by the config file and the flags.
/// Each throws std::invalid_argument on malformed input.
double parse_real(const std::string &s);
std::int64_t parse_integer(const std::string &s);
std::uint64_t parse_unsigned(const std::string &s);
bool parse_bool(const std::string &s);
std::vector<Method> parse_method_list(const std::string &s);

/// "a:step:b" (points a + k*step up to b, built by index) or "v1,v2,...".
std::vector<double> parse_grid(const std::string &s);

} // namespace robeq::cli
