#pragma once

#include <string>

#include "hals/autodiff.hpp"

namespace hals {

// Parameter file: magic "HPRM", version u16, record count u32, FNV-1a
// checksum u64 over the record bytes, then ordered records of
// (name, 4 dims u32, little-endian float32 payload). Loading verifies the
// checksum and, when `into` already holds parameters, the names and shapes.
void save_parameters(const std::string& path, const ParamStore& params);
void load_parameters(const std::string& path, ParamStore* into);

// Atomic write: temp file in the same directory, then rename.
void save_parameters_atomic(const std::string& path, const ParamStore& params);

}  // namespace hals
