#pragma once

// Minimal sectioned key = value reader shared by scenario and tracker config
// files. Sections may repeat and keep file order; '#' and ';' start comments.

#include <istream>
#include <stdexcept>
#include <string>
#include <vector>

namespace wtrack::ini {

class ParseError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Entry {
  std::string key;
  std::string value;
  int line = 0;
};

struct Section {
  std::string name;
  int line = 0;
  std::vector<Entry> entries;
};

inline std::string trim(const std::string& s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

inline std::vector<Section> parse(std::istream& in) {
  std::vector<Section> sections;
  std::string raw;
  int line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    const auto comment = raw.find_first_of("#;");
    const std::string line = trim(comment == std::string::npos ? raw : raw.substr(0, comment));
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']' || line.size() < 3)
        throw ParseError("line " + std::to_string(line_no) + ": malformed section header");
      sections.push_back({trim(line.substr(1, line.size() - 2)), line_no, {}});
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ParseError("line " + std::to_string(line_no) + ": expected key = value");
    if (sections.empty())
      throw ParseError("line " + std::to_string(line_no) + ": key outside of any section");
    sections.back().entries.push_back({trim(line.substr(0, eq)), trim(line.substr(eq + 1)), line_no});
  }
  return sections;
}

inline double to_double(const Entry& e) {
  try {
    std::size_t used = 0;
    const double v = std::stod(e.value, &used);
    if (used == e.value.size()) return v;
  } catch (const std::exception&) {
  }
  throw ParseError("line " + std::to_string(e.line) + ": '" + e.key + "' expects a number, got '" + e.value + "'");
}

inline int to_int(const Entry& e) {
  try {
    std::size_t used = 0;
    const int v = std::stoi(e.value, &used);
    if (used == e.value.size()) return v;
  } catch (const std::exception&) {
  }
  throw ParseError("line " + std::to_string(e.line) + ": '" + e.key + "' expects an integer, got '" + e.value + "'");
}

inline bool to_bool(const Entry& e) {
  if (e.value == "true" || e.value == "1" || e.value == "yes" || e.value == "on") return true;
  if (e.value == "false" || e.value == "0" || e.value == "no" || e.value == "off") return false;
  throw ParseError("line " + std::to_string(e.line) + ": '" + e.key + "' expects a boolean, got '" + e.value + "'");
}

}  // namespace wtrack::ini
