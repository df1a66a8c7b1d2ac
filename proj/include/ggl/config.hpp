#pragma once

#include <map>
#include <string>
#include <vector>

namespace ggl {

// Flat key=value experiment configuration. Lines are `key = value`, blank
// lines and lines starting with '#' are ignored. Every key must belong to the
// known key table; missing keys take their defaults.
class Config {
 public:
  Config();

  static Config parse(const std::string& text);
  static Config load(const std::string& path);

  // Overrides one key after parsing (e.g. from a command-line flag).
  void set(const std::string& key, const std::string& value);

  const std::string& str(const std::string& key) const;
  int integer(const std::string& key) const;
  uint64_t u64(const std::string& key) const;
  double real(const std::string& key) const;
  bool flag(const std::string& key) const;
  std::vector<std::string> list(const std::string& key) const;
  std::vector<int> int_list(const std::string& key) const;

  bool explicitly_set(const std::string& key) const;
  // Fully resolved configuration as sorted `key=value` lines.
  std::string resolved() const;
  const std::map<std::string, std::string>& values() const { return values_; }

  static const std::map<std::string, std::string>& defaults();

 private:
  // Throws ParameterError when the key's value does not parse as its type.
  static void check_type(const Config& cfg, const std::string& key);
  std::map<std::string, std::string> values_;
  std::map<std::string, int> lines_;  // source line of explicit keys
};

}  // namespace ggl
