#include "sog/config.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include "sog/errors.hpp"

namespace sog {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::string strip_comment(const std::string& line) {
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    if (line[i] == '"') quoted = !quoted;
    if (!quoted && line[i] == '#') return line.substr(0, i);
  }
  return line;
}

std::size_t edit_distance(const std::string& a, const std::string& b) {
  std::vector<std::size_t> row(b.size() + 1);
  for (std::size_t j = 0; j <= b.size(); ++j) row[j] = j;
  for (std::size_t i = 1; i <= a.size(); ++i) {
    std::size_t diag = row[0];
    row[0] = i;
    for (std::size_t j = 1; j <= b.size(); ++j) {
      const std::size_t up = row[j];
      row[j] = std::min({row[j] + 1, row[j - 1] + 1, diag + (a[i - 1] == b[j - 1] ? 0 : 1)});
      diag = up;
    }
  }
  return row[b.size()];
}

}  // namespace

std::string closest_match(const std::string& word, const std::vector<std::string>& candidates) {
  std::string best;
  std::size_t best_d = std::max<std::size_t>(2, word.size() / 3) + 1;
  for (const auto& c : candidates) {
    const auto d = edit_distance(word, c);
    if (d < best_d) {
      best_d = d;
      best = c;
    }
  }
  return best;
}

ParamMap parse_config_text(const std::string& text, const std::string& origin, const std::string& section,
                           const std::vector<std::string>& known, const std::vector<std::string>& all_known,
                           const std::vector<std::string>& sections) {
  ParamMap global;
  ParamMap local;
  std::string current;
  std::istringstream in(text);
  std::string raw;
  for (int line_no = 1; std::getline(in, raw); ++line_no) {
    const std::string where = origin + ":" + std::to_string(line_no) + ": ";
    const std::string line = trim(strip_comment(raw));
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') throw ParseError(where + "unterminated section header");
      current = trim(line.substr(1, line.size() - 2));
      if (std::find(sections.begin(), sections.end(), current) == sections.end()) {
        const auto hint = closest_match(current, sections);
        throw ParameterError(where + "unknown section [" + current + "]" +
                             (hint.empty() ? "" : "; did you mean [" + hint + "]?"));
      }
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ParseError(where + "expected key = value");
    std::string key = trim(line.substr(0, eq));
    std::string value = trim(line.substr(eq + 1));
    if (key.empty()) throw ParseError(where + "missing key");
    std::replace(key.begin(), key.end(), '_', '-');
    if (value.size() >= 2 && value.front() == '"' && value.back() == '"') value = value.substr(1, value.size() - 2);
    else if (!value.empty() && (value.front() == '"' || value.back() == '"')) throw ParseError(where + "unbalanced quote");
    if (!current.empty() && current != section) continue;
    const auto& allowed = current.empty() ? all_known : known;
    if (std::find(allowed.begin(), allowed.end(), key) == allowed.end()) {
      const auto hint = closest_match(key, allowed);
      throw ParameterError(where + "unknown key '" + key + "'" + (hint.empty() ? "" : "; did you mean '" + hint + "'?"));
    }
    if (std::find(known.begin(), known.end(), key) == known.end()) continue;
    (current.empty() ? global : local)[key] = value;
  }
  for (auto& [k, v] : local) global[k] = v;
  return global;
}

ParamMap parse_config(const std::string& path, const std::string& section, const std::vector<std::string>& known,
                      const std::vector<std::string>& all_known, const std::vector<std::string>& sections) {
  std::ifstream in(path);
  if (!in) throw ParameterError("cannot read config file " + path);
  std::ostringstream text;
  text << in.rdbuf();
  return parse_config_text(text.str(), path, section, known, all_known, sections);
}

}  // namespace sog
