#include "config.hpp"

#include <cstdlib>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace cli {

namespace {

std::string trim(const std::string& s) {
  std::size_t a = s.find_first_not_of(" \t\r\n");
  if (a == std::string::npos) return "";
  std::size_t b = s.find_last_not_of(" \t\r\n");
  return s.substr(a, b - a + 1);
}

[[noreturn]] void bail(const std::string& origin, std::size_t line,
                       const std::string& message) {
  throw std::runtime_error(origin + ":" + std::to_string(line) + ": " + message);
}

}  // namespace

ConfigFile ConfigFile::parse_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config file '" + path + "'");
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parse_string(buffer.str(), path);
}

ConfigFile ConfigFile::parse_string(const std::string& text,
                                    const std::string& origin) {
  ConfigFile cfg;
  std::istringstream in(text);
  std::string line;
  std::string section;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::string t = trim(line);
    if (t.empty() || t[0] == '#') continue;
    if (t.front() == '[') {
      if (t.back() != ']') bail(origin, line_no, "unterminated section header");
      section = trim(t.substr(1, t.size() - 2));
      if (section.empty()) bail(origin, line_no, "empty section name");
      cfg.sections_[section];  // record even if it stays empty
      continue;
    }
    std::size_t eq = t.find('=');
    if (eq == std::string::npos)
      bail(origin, line_no, "expected 'key = value' or '[section]'");
    if (section.empty())
      bail(origin, line_no, "key outside any [section]");
    std::string key = trim(t.substr(0, eq));
    std::string value = trim(t.substr(eq + 1));
    if (key.empty()) bail(origin, line_no, "empty key");
    if (value.size() >= 2 && value.front() == '"' && value.back() == '"') {
      value = value.substr(1, value.size() - 2);
    } else {
      // strip trailing comments from unquoted values
      std::size_t hash = value.find('#');
      if (hash != std::string::npos) value = trim(value.substr(0, hash));
    }
    auto& sec = cfg.sections_[section];
    if (sec.count(key))
      bail(origin, line_no, "duplicate key '" + section + "." + key + "'");
    sec[key] = value;
  }
  return cfg;
}

bool ConfigFile::has(const std::string& section, const std::string& key) const {
  auto sec = sections_.find(section);
  return sec != sections_.end() && sec->second.count(key) > 0;
}

std::string ConfigFile::get_string(const std::string& section,
                                   const std::string& key,
                                   const std::string& fallback) const {
  auto sec = sections_.find(section);
  if (sec == sections_.end()) return fallback;
  auto it = sec->second.find(key);
  return it == sec->second.end() ? fallback : it->second;
}

double ConfigFile::get_double(const std::string& section,
                              const std::string& key, double fallback) const {
  if (!has(section, key)) return fallback;
  std::string raw = get_string(section, key, "");
  const char* begin = raw.c_str();
  char* end = nullptr;
  double v = std::strtod(begin, &end);
  if (raw.empty() || end != begin + raw.size())
    throw std::runtime_error("config value " + section + "." + key +
                             " is not a number: '" + raw + "'");
  return v;
}

std::int64_t ConfigFile::get_int(const std::string& section,
                                 const std::string& key,
                                 std::int64_t fallback) const {
  if (!has(section, key)) return fallback;
  std::string raw = get_string(section, key, "");
  const char* begin = raw.c_str();
  char* end = nullptr;
  long long v = std::strtoll(begin, &end, 10);
  if (raw.empty() || end != begin + raw.size())
    throw std::runtime_error("config value " + section + "." + key +
                             " is not an integer: '" + raw + "'");
  return v;
}

bool ConfigFile::get_bool(const std::string& section, const std::string& key,
                          bool fallback) const {
  if (!has(section, key)) return fallback;
  std::string raw = get_string(section, key, "");
  if (raw == "true") return true;
  if (raw == "false") return false;
  throw std::runtime_error("config value " + section + "." + key +
                           " must be true or false, got '" + raw + "'");
}

std::vector<std::string> ConfigFile::get_list(const std::string& section,
                                              const std::string& key) const {
  std::vector<std::string> out;
  std::string raw = get_string(section, key, "");
  if (trim(raw).empty()) return out;
  std::stringstream ss(raw);
  std::string cell;
  while (std::getline(ss, cell, ',')) {
    std::string t = trim(cell);
    if (t.empty())
      throw std::runtime_error("config value " + section + "." + key +
                               " has an empty list entry");
    out.push_back(t);
  }
  return out;
}

}  // namespace cli
