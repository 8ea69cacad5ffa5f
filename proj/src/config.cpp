#include "am2r/config.hpp"

#include "am2r/csv.hpp"

#include <cctype>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace am2r {

namespace {

std::string trim(const std::string& s) {
  std::size_t a = 0, b = s.size();
  while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
  while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
  return s.substr(a, b - a);
}

}  // namespace

Config Config::parse(std::istream& is) {
  Config cfg;
  std::string line;
  int lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    const std::string t = trim(line);
    if (t.empty()) continue;
    const auto eq = t.find('=');
    if (eq == std::string::npos)
      throw std::runtime_error("config line " + std::to_string(lineno) +
                               ": expected key = value");
    const std::string key = trim(t.substr(0, eq));
    const std::string value = trim(t.substr(eq + 1));
    if (key.empty())
      throw std::runtime_error("config line " + std::to_string(lineno) +
                               ": empty key");
    cfg.kv_[key] = value;
  }
  return cfg;
}

Config Config::parse_file(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::runtime_error("config: cannot open " + path);
  return parse(is);
}

void Config::set(const std::string& key, const std::string& value) {
  kv_[key] = value;
}

void Config::apply_override(const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos || eq == 0)
    throw std::runtime_error("override must look like key=value: " +
                             assignment);
  kv_[trim(assignment.substr(0, eq))] = trim(assignment.substr(eq + 1));
}

bool Config::has(const std::string& key) const { return kv_.count(key) > 0; }

std::string Config::str(const std::string& key) const {
  const auto it = kv_.find(key);
  if (it == kv_.end()) throw std::runtime_error("config: missing key " + key);
  return it->second;
}

std::string Config::str(const std::string& key,
                        const std::string& fallback) const {
  const auto it = kv_.find(key);
  return it == kv_.end() ? fallback : it->second;
}

double Config::num(const std::string& key, double fallback) const {
  const auto it = kv_.find(key);
  if (it == kv_.end()) return fallback;
  try {
    return parse_double(it->second);
  } catch (const std::exception&) {
    throw std::runtime_error("config: key " + key + " is not a number: " +
                             it->second);
  }
}

long long Config::integer(const std::string& key, long long fallback) const {
  const auto it = kv_.find(key);
  if (it == kv_.end()) return fallback;
  std::size_t used = 0;
  long long v = 0;
  try {
    v = std::stoll(it->second, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used != it->second.size())
    throw std::runtime_error("config: key " + key + " is not an integer: " +
                             it->second);
  return v;
}

bool Config::flag(const std::string& key, bool fallback) const {
  const auto it = kv_.find(key);
  if (it == kv_.end()) return fallback;
  const std::string& v = it->second;
  if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
  if (v == "false" || v == "0" || v == "no" || v == "off") return false;
  throw std::runtime_error("config: key " + key + " is not a flag: " + v);
}

std::string Config::serialize() const {
  std::ostringstream os;
  for (const auto& [k, v] : kv_) os << k << " = " << v << '\n';
  return os.str();
}

}  // namespace am2r
