#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace trustnav::csv {

using Row = std::vector<std::string>;

// RFC 4180: fields containing a comma, quote, CR or LF are quoted, quotes
// doubled. Rows end in CRLF.
std::string escape(std::string_view field);
std::string format(const std::vector<Row>& rows);

// Accepts CRLF or LF line endings. Throws std::invalid_argument on an
// unterminated quoted field.
std::vector<Row> parse(std::string_view text);

// Shortest round-trip decimal form.
std::string number(double v);

}  // namespace trustnav::csv
