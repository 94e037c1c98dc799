#include "hals/checkpoint.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "hals/binary_io.hpp"

namespace hals {

namespace {

constexpr char kMagic[4] = {'H', 'P', 'R', 'M'};
constexpr uint16_t kVersion = 1;

std::string encode_records(const ParamStore& params) {
  std::ostringstream os(std::ios::binary);
  for (const auto& p : params.items) {
    HALS_CHECK(p.name.size() < 65536, "parameter name too long");
    write_u16(os, uint16_t(p.name.size()));
    os.write(p.name.data(), std::streamsize(p.name.size()));
    write_u32(os, uint32_t(p.value.b));
    write_u32(os, uint32_t(p.value.c));
    write_u32(os, uint32_t(p.value.h));
    write_u32(os, uint32_t(p.value.w));
    write_f32_array(os, p.value.data.data(), p.value.size());
  }
  return os.str();
}

}  // namespace

void save_parameters(const std::string& path, const ParamStore& params) {
  const std::string records = encode_records(params);
  std::ofstream os(path, std::ios::binary);
  HALS_CHECK(os.good(), "cannot write " + path);
  os.write(kMagic, 4);
  write_u16(os, kVersion);
  write_u32(os, uint32_t(params.size()));
  write_u64(os, fnv1a(records.data(), records.size()));
  os.write(records.data(), std::streamsize(records.size()));
  HALS_CHECK(os.good(), "write failed: " + path);
}

void save_parameters_atomic(const std::string& path, const ParamStore& params) {
  const std::string tmp = path + ".tmp";
  save_parameters(tmp, params);
  std::filesystem::rename(tmp, path);
}

void load_parameters(const std::string& path, ParamStore* into) {
  std::ifstream is(path, std::ios::binary);
  HALS_CHECK(is.good(), "cannot open " + path);
  char magic[4];
  is.read(magic, 4);
  HALS_CHECK(is.gcount() == 4 && std::equal(magic, magic + 4, kMagic),
             "not a parameter file: " + path);
  HALS_CHECK(read_u16(is) == kVersion, "unsupported parameter file version");
  const uint32_t count = read_u32(is);
  const uint64_t checksum = read_u64(is);

  std::stringstream rest(std::ios::in | std::ios::out | std::ios::binary);
  rest << is.rdbuf();
  const std::string records = rest.str();
  HALS_CHECK(fnv1a(records.data(), records.size()) == checksum,
             "parameter file checksum mismatch: " + path);

  std::istringstream rs(records, std::ios::binary);
  const bool fresh = into->items.empty();
  for (uint32_t i = 0; i < count; ++i) {
    const uint16_t name_len = read_u16(rs);
    std::string name(name_len, '\0');
    rs.read(name.data(), name_len);
    HALS_CHECK(rs.gcount() == name_len, "truncated parameter file");
    const int b = int(read_u32(rs));
    const int c = int(read_u32(rs));
    const int h = int(read_u32(rs));
    const int w = int(read_u32(rs));
    Tensor4 value(b, c, h, w);
    read_f32_array(rs, value.data.data(), value.size());
    if (fresh) {
      into->add(name, std::move(value));
    } else {
      ParameterT<float>* p = into->find(name);
      HALS_CHECK(p != nullptr, "unexpected parameter in file: " + name);
      HALS_CHECK(p->value.same_shape(value),
                 "parameter shape mismatch for " + name);
      p->value = std::move(value);
    }
  }
  if (!fresh)
    HALS_CHECK(count == into->size(), "parameter count mismatch in " + path);
}

}  // namespace hals
