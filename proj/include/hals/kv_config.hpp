#pragma once

#include <map>
#include <string>
#include <vector>

namespace hals {

// Plain-text `key = value` files: configs, sidecars, scene descriptions and
// run manifests. Lines starting with '#' are comments. Keys may repeat
// (scene primitive lists rely on this).
class KvFile {
 public:
  KvFile() = default;

  static KvFile parse(const std::string& text);
  static KvFile load(const std::string& path);
  void save(const std::string& path) const;
  std::string to_string() const;

  void add(const std::string& key, const std::string& value);
  void add(const std::string& key, double value);
  void add(const std::string& key, long long value);
  void add(const std::string& key, int value) { add(key, (long long)value); }
  void add(const std::string& key, unsigned long long value);

  bool has(const std::string& key) const;
  std::string get(const std::string& key) const;  // throws when missing
  std::string get_or(const std::string& key, const std::string& fallback) const;
  double get_double(const std::string& key) const;
  double get_double_or(const std::string& key, double fallback) const;
  long long get_int(const std::string& key) const;
  long long get_int_or(const std::string& key, long long fallback) const;
  std::vector<std::string> get_all(const std::string& key) const;

  const std::vector<std::pair<std::string, std::string>>& entries() const {
    return entries_;
  }

 private:
  std::vector<std::pair<std::string, std::string>> entries_;
};

// Writes the run manifest every CLI command drops next to its outputs.
void write_manifest(const std::string& path, const std::string& command,
                    const std::vector<std::pair<std::string, std::string>>& fields,
                    double wall_clock_sec);

}  // namespace hals
