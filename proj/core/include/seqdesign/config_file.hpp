#pragma once

#include <iosfwd>
#include <string>

#include <nlohmann/json.hpp>

namespace seqdesign {

/// Parses the TOML subset used by run configs into a JSON object: [tables]
/// and [dotted.tables], bare or quoted keys, basic and literal strings,
/// integers, floats, booleans, and single-line arrays of those. Throws
/// ConfigError with the line number on anything else.
nlohmann::json parse_toml(std::istream& in);
nlohmann::json parse_toml_string(const std::string& text);
nlohmann::json parse_toml_file(const std::string& path);

}  // namespace seqdesign
