#pragma once

#include <map>
#include <string>
#include <vector>

namespace sog {

// key -> value; keys use hyphens ("t-max"), underscores are accepted on input.
using ParamMap = std::map<std::string, std::string>;

// Reads `key = value` lines. Lines before any section apply to every command;
// `[name]` sections apply only when `section` equals name. `#` starts
// comments, values may be double-quoted. Section keys must be in `known`; global
// keys must be in `all_known` and are dropped when not in `known`. Unknown keys
// are rejected with a suggestion; syntax errors name the line.
ParamMap parse_config(const std::string& path, const std::string& section, const std::vector<std::string>& known,
                      const std::vector<std::string>& all_known, const std::vector<std::string>& sections);
ParamMap parse_config_text(const std::string& text, const std::string& origin, const std::string& section,
                           const std::vector<std::string>& known, const std::vector<std::string>& all_known,
                           const std::vector<std::string>& sections);

// Closest candidate by edit distance, or "" when nothing is close.
std::string closest_match(const std::string& word, const std::vector<std::string>& candidates);

}  // namespace sog
