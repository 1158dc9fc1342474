#pragma once

#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

namespace synthkit::csv {

using Record = std::vector<std::string>;

// RFC-4180 reader: quoted fields, doubled quotes, embedded separators and
// line breaks, CRLF or LF record ends. A trailing empty line is ignored.
std::vector<Record> read(std::istream& in);
std::vector<Record> read_file(const std::string& path);

void write_record(std::ostream& out, const Record& fields);
std::string quote(std::string_view field);

// Shortest decimal text that parses back to the identical double.
std::string format_double(double v);
bool parse_double(std::string_view text, double& out);

}  // namespace synthkit::csv
