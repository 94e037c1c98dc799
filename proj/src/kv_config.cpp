#include "hals/kv_config.hpp"

#include <fstream>
#include <sstream>

#include "hals/common.hpp"

namespace hals {

namespace {

std::string trim(const std::string& s) {
  size_t a = s.find_first_not_of(" \t\r\n");
  if (a == std::string::npos) return "";
  size_t b = s.find_last_not_of(" \t\r\n");
  return s.substr(a, b - a + 1);
}

}  // namespace

KvFile KvFile::parse(const std::string& text) {
  KvFile kv;
  std::istringstream is(text);
  std::string line;
  while (std::getline(is, line)) {
    std::string t = trim(line);
    if (t.empty() || t[0] == '#') continue;
    size_t eq = t.find('=');
    HALS_CHECK(eq != std::string::npos, "malformed key=value line: " + t);
    kv.entries_.emplace_back(trim(t.substr(0, eq)), trim(t.substr(eq + 1)));
  }
  return kv;
}

KvFile KvFile::load(const std::string& path) {
  std::ifstream is(path);
  HALS_CHECK(is.good(), "cannot open " + path);
  std::stringstream ss;
  ss << is.rdbuf();
  return parse(ss.str());
}

void KvFile::save(const std::string& path) const {
  std::ofstream os(path);
  HALS_CHECK(os.good(), "cannot write " + path);
  os << to_string();
  HALS_CHECK(os.good(), "write failed: " + path);
}

std::string KvFile::to_string() const {
  std::ostringstream os;
  for (const auto& [k, v] : entries_) os << k << " = " << v << "\n";
  return os.str();
}

void KvFile::add(const std::string& key, const std::string& value) {
  entries_.emplace_back(key, value);
}

void KvFile::add(const std::string& key, double value) {
  std::ostringstream os;
  os.precision(17);
  os << value;
  add(key, os.str());
}

void KvFile::add(const std::string& key, long long value) {
  add(key, std::to_string(value));
}

void KvFile::add(const std::string& key, unsigned long long value) {
  add(key, std::to_string(value));
}

bool KvFile::has(const std::string& key) const {
  for (const auto& [k, v] : entries_)
    if (k == key) return true;
  return false;
}

std::string KvFile::get(const std::string& key) const {
  for (const auto& [k, v] : entries_)
    if (k == key) return v;
  fail("missing key: " + key);
}

std::string KvFile::get_or(const std::string& key, const std::string& fallback) const {
  return has(key) ? get(key) : fallback;
}

double KvFile::get_double(const std::string& key) const {
  return std::stod(get(key));
}

double KvFile::get_double_or(const std::string& key, double fallback) const {
  return has(key) ? get_double(key) : fallback;
}

long long KvFile::get_int(const std::string& key) const {
  return std::stoll(get(key));
}

long long KvFile::get_int_or(const std::string& key, long long fallback) const {
  return has(key) ? get_int(key) : fallback;
}

std::vector<std::string> KvFile::get_all(const std::string& key) const {
  std::vector<std::string> out;
  for (const auto& [k, v] : entries_)
    if (k == key) out.push_back(v);
  return out;
}

void write_manifest(const std::string& path, const std::string& command,
                    const std::vector<std::pair<std::string, std::string>>& fields,
                    double wall_clock_sec) {
  KvFile kv;
  kv.add("command", command);
  kv.add("tool_version", std::string("hals 1.0.0"));
  for (const auto& [k, v] : fields) kv.add(k, v);
  kv.add("wall_clock_sec", wall_clock_sec);
  kv.save(path);
}

}  // namespace hals
