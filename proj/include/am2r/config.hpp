#pragma once

#include <iosfwd>
#include <map>
#include <string>
#include <vector>

namespace am2r {

// Flat dotted-key configuration, e.g. "episode.order = 2". Later assignments
// win, so command-line overrides are applied by a second round of set().
class Config {
 public:
  static Config parse(std::istream& is);
  static Config parse_file(const std::string& path);

  void set(const std::string& key, const std::string& value);
  // "key=value" as passed on a command line.
  void apply_override(const std::string& assignment);

  bool has(const std::string& key) const;
  std::string str(const std::string& key) const;
  std::string str(const std::string& key, const std::string& fallback) const;
  double num(const std::string& key, double fallback) const;
  long long integer(const std::string& key, long long fallback) const;
  bool flag(const std::string& key, bool fallback) const;

  // Keys in sorted order, one "key = value" per line.
  std::string serialize() const;

  const std::map<std::string, std::string>& entries() const { return kv_; }

 private:
  std::map<std::string, std::string> kv_;
};

}  // namespace am2r
