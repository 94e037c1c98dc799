#pragma once

#include <algorithm>
#include <filesystem>
#include <string>
#include <vector>

#include "hals/common.hpp"

namespace hals {

inline std::vector<std::string> list_files(const std::string& dir,
                                           const std::string& extension) {
  namespace fs = std::filesystem;
  HALS_CHECK(fs::is_directory(dir), "not a directory: " + dir);
  std::vector<std::string> out;
  for (const auto& entry : fs::directory_iterator(dir))
    if (entry.is_regular_file() && entry.path().extension() == extension)
      out.push_back(entry.path().string());
  std::sort(out.begin(), out.end());
  return out;
}

inline void ensure_dir(const std::string& dir) {
  std::filesystem::create_directories(dir);
  HALS_CHECK(std::filesystem::is_directory(dir), "cannot create directory: " + dir);
}

}  // namespace hals
