// csv.hpp: round-trippable numeric CSV output

#pragma once

#include <initializer_list>
#include <iosfwd>
#include <span>
#include <string>
#include <string_view>

namespace qbm::csv {

/// Shortest general form with 17 significant digits, locale independent.
std::string format(double value);

void write_header(std::ostream& os, std::initializer_list<std::string_view> columns);
void write_row(std::ostream& os, std::span<const double> values);
void write_row(std::ostream& os, std::initializer_list<double> values);

}  // namespace qbm::csv
