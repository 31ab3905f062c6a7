#pragma once

#include <initializer_list>
#include <istream>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

namespace avalanche::io {

/// 17 significant digits: printing and parsing back is bit-identical.
std::string format_double(double v);

/// Quotes a field when it contains a comma, quote or line break.
std::string csv_field(std::string_view s);

void write_header(std::ostream& os, std::initializer_list<std::string_view> columns);

struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;

    /// Index of a header column; throws std::invalid_argument if absent.
    std::size_t column(std::string_view name) const;
    /// Every row's value in the column, parsed as a double.
    std::vector<double> numbers(std::string_view name) const;
};

/// Header row plus records; quoted fields may contain commas, doubled
/// quotes and line breaks. Throws std::runtime_error on a ragged row or an
/// unterminated quote.
CsvTable read_csv(std::istream& in);

}  // namespace avalanche::io
