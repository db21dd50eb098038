#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace chitf::csv {

/// Split one CSV record. Double-quoted fields may contain commas and "" escapes.
std::vector<std::string> split(std::string_view line);

/// Quote a field when it contains a comma, quote or newline.
std::string escape(std::string_view field);

/// Strict numeric parse of the whole field.
bool parse_double(std::string_view field, double& out);

}  // namespace chitf::csv
