#pragma once

#include <string>

#include <json.hpp>

namespace lmp::toml {

/// Parse a TOML document into a JSON value. Supports the subset used by run
/// configurations: bare and quoted keys, [table] and [[array-of-table]]
/// headers with dotted names, strings, integers, floats, booleans, and
/// (possibly nested, multi-line) arrays. Dates, inline tables, dotted keys
/// in key positions, and multi-line strings are rejected with a line-numbered
/// ConfigError.
nlohmann::json parse(const std::string& text);

/// Inverse of parse for the same subset: objects become [sections], arrays of
/// objects become [[sections]], everything else becomes key = value lines.
/// parse(serialize(v)) == v for any value produced by parse.
std::string serialize(const nlohmann::json& value);

} // namespace lmp::toml
