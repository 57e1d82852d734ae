// CSV output: header row, LF line endings, round-trip decimal numbers.
#pragma once

#include <initializer_list>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

namespace robeq::cli {

/// 17 significant digits in "%g" style, so every double round-trips; the C
/// locale plays no part.
std::string format_number(double v);

/// Quotes a field if it contains a comma, quote, CR or LF.
std::string csv_field(std::string_view s);

class CsvWriter {
  public:
    explicit CsvWriter(std::ostream &os) : os_(os) {}

    void row(const std::vector<std::string> &fields);
    void row(std::initializer_list<std::string> fields) { row(std::vector<std::string>(fields)); }

  private:
    std::ostream &os_;
};

} // namespace robeq::cli
