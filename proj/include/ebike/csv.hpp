#pragma once

// Minimal RFC 4180 CSV reading and writing: quoted fields, doubled quotes,
// embedded separators and newlines, CRLF line endings.

#include <istream>
#include <optional>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

namespace ebike::csv {

class Reader {
public:
    explicit Reader(std::istream& in) : in_(in) {}

    // Next record, or nullopt at end of input. Throws SchemaError on an
    // unterminated quoted field.
    std::optional<std::vector<std::string>> next();

    // Physical line on which the most recently returned record started.
    std::size_t line() const { return record_line_; }

private:
    std::istream& in_;
    std::size_t line_ = 1;
    std::size_t record_line_ = 0;
};

std::string escape(std::string_view field);
void write_row(std::ostream& out, const std::vector<std::string>& fields);

}  // namespace ebike::csv
