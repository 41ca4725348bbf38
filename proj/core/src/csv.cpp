#include "qbm/csv.hpp"

#include <array>
#include <charconv>
#include <ostream>

namespace qbm::csv {

std::string format(double value) {
    std::array<char, 40> buf{};
    auto [end, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), value, std::chars_format::general, 17);
    (void)ec;
    return std::string(buf.data(), end);
}

void write_header(std::ostream& os, std::initializer_list<std::string_view> columns) {
    bool first = true;
    for (auto c : columns) {
        if (!first) os << ',';
        os << c;
        first = false;
    }
    os << '\n';
}

void write_row(std::ostream& os, std::span<const double> values) {
    for (std::size_t i = 0; i < values.size(); ++i) {
        if (i) os << ',';
        os << format(values[i]);
    }
    os << '\n';
}

void write_row(std::ostream& os, std::initializer_list<double> values) {
    write_row(os, std::span<const double>(values.begin(), values.size()));
}

}  // namespace qbm::csv
