#ifndef FLOWTRIAGE_CSV_HPP
#define FLOWTRIAGE_CSV_HPP

#include <string>
#include <vector>

namespace flowtriage::csv {

// Split one CSV record. Handles double-quoted fields with embedded commas
// and "" escapes. No multi-line fields (none of the supported exports use
// them).
std::vector<std::string> split_record(const std::string& line);

// Quote a field only when it needs quoting.
std::string escape_field(const std::string& field);

std::string join_record(const std::vector<std::string>& fields);

// Split text into lines, tolerating both \n and \r\n endings; a trailing
// newline does not produce an empty last line.
std::vector<std::string> split_lines(const std::string& text);

}  // namespace flowtriage::csv

#endif  // FLOWTRIAGE_CSV_HPP
