#pragma once

#include <cstdint>
#include <cstring>
#include <fstream>
#include <string>
#include <vector>

#include "hals/common.hpp"

// Little-endian binary helpers shared by the range-image container, the
// Velodyne reader and the checkpoint files. Written byte-by-byte so the
// formats do not depend on host endianness.

namespace hals {

inline void write_u8(std::ostream& os, uint8_t v) {
  os.put(char(v));
}

inline void write_u16(std::ostream& os, uint16_t v) {
  char b[2] = {char(v & 0xff), char((v >> 8) & 0xff)};
  os.write(b, 2);
}

inline void write_u32(std::ostream& os, uint32_t v) {
  char b[4];
  for (int i = 0; i < 4; ++i) b[i] = char((v >> (8 * i)) & 0xff);
  os.write(b, 4);
}

inline void write_u64(std::ostream& os, uint64_t v) {
  char b[8];
  for (int i = 0; i < 8; ++i) b[i] = char((v >> (8 * i)) & 0xff);
  os.write(b, 8);
}

inline void write_f32(std::ostream& os, float v) {
  uint32_t bits;
  std::memcpy(&bits, &v, 4);
  write_u32(os, bits);
}

inline uint8_t read_u8(std::istream& is) {
  int c = is.get();
  HALS_CHECK(c != EOF, "unexpected end of file");
  return uint8_t(c);
}

inline uint16_t read_u16(std::istream& is) {
  unsigned char b[2];
  is.read(reinterpret_cast<char*>(b), 2);
  HALS_CHECK(is.gcount() == 2, "unexpected end of file");
  return uint16_t(b[0]) | (uint16_t(b[1]) << 8);
}

inline uint32_t read_u32(std::istream& is) {
  unsigned char b[4];
  is.read(reinterpret_cast<char*>(b), 4);
  HALS_CHECK(is.gcount() == 4, "unexpected end of file");
  uint32_t v = 0;
  for (int i = 0; i < 4; ++i) v |= uint32_t(b[i]) << (8 * i);
  return v;
}

inline uint64_t read_u64(std::istream& is) {
  unsigned char b[8];
  is.read(reinterpret_cast<char*>(b), 8);
  HALS_CHECK(is.gcount() == 8, "unexpected end of file");
  uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v |= uint64_t(b[i]) << (8 * i);
  return v;
}

inline float read_f32(std::istream& is) {
  uint32_t bits = read_u32(is);
  float v;
  std::memcpy(&v, &bits, 4);
  return v;
}

// Bulk float payloads. On little-endian hosts this is a straight memcpy.
inline void write_f32_array(std::ostream& os, const float* data, size_t n) {
  const uint16_t probe = 1;
  if (*reinterpret_cast<const uint8_t*>(&probe) == 1) {
    os.write(reinterpret_cast<const char*>(data), std::streamsize(n * 4));
  } else {
    for (size_t i = 0; i < n; ++i) write_f32(os, data[i]);
  }
}

inline void read_f32_array(std::istream& is, float* data, size_t n) {
  const uint16_t probe = 1;
  if (*reinterpret_cast<const uint8_t*>(&probe) == 1) {
    is.read(reinterpret_cast<char*>(data), std::streamsize(n * 4));
    HALS_CHECK(size_t(is.gcount()) == n * 4, "unexpected end of file");
  } else {
    for (size_t i = 0; i < n; ++i) data[i] = read_f32(is);
  }
}

// FNV-1a over a byte buffer; used as the checkpoint header checksum.
inline uint64_t fnv1a(const void* data, size_t n, uint64_t h = 0xcbf29ce484222325ULL) {
  const auto* p = static_cast<const unsigned char*>(data);
  for (size_t i = 0; i < n; ++i) {
    h ^= p[i];
    h *= 0x100000001b3ULL;
  }
  return h;
}

}  // namespace hals
