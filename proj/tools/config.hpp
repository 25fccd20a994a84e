#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

namespace cli {

// Minimal section/key=value config reader.  Lines are `[section]` headers or
// `key = value` pairs; `#` starts a comment; values may be double-quoted.
// All failures throw std::runtime_error with the offending line number.
class ConfigFile {
 public:
  ConfigFile() = default;
  static ConfigFile parse_file(const std::string& path);
  static ConfigFile parse_string(const std::string& text,
                                 const std::string& origin = "<string>");

  bool has(const std::string& section, const std::string& key) const;
  std::string get_string(const std::string& section, const std::string& key,
                         const std::string& fallback) const;
  double get_double(const std::string& section, const std::string& key,
                    double fallback) const;
  std::int64_t get_int(const std::string& section, const std::string& key,
                       std::int64_t fallback) const;
  bool get_bool(const std::string& section, const std::string& key,
                bool fallback) const;
  // Comma-separated list, entries trimmed; empty value gives an empty list.
  std::vector<std::string> get_list(const std::string& section,
                                    const std::string& key) const;

  const std::map<std::string, std::map<std::string, std::string>>& sections()
      const {
    return sections_;
  }

 private:
  std::map<std::string, std::map<std::string, std::string>> sections_;
};

}  // namespace cli
