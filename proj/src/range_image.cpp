#include "hals/range_image.hpp"

#include <cmath>
#include <fstream>

#include "hals/binary_io.hpp"

namespace hals {

const char* channel_mode_name(ChannelMode m) {
  switch (m) {
    case ChannelMode::Spherical: return "spherical";
    case ChannelMode::Polar: return "polar";
    case ChannelMode::Cartesian: return "cartesian";
  }
  fail("invalid channel mode");
}

ChannelMode channel_mode_from_name(const std::string& name) {
  if (name == "spherical") return ChannelMode::Spherical;
  if (name == "polar") return ChannelMode::Polar;
  if (name == "cartesian") return ChannelMode::Cartesian;
  fail("unknown channel mode: " + name);
}

void RangeImage::validate() const {
  HALS_CHECK(height > 0 && width > 0, "range image: empty dimensions");
  HALS_CHECK(channels.size() == size_t(channel_countv()) * height * width,
             "range image: channel buffer size mismatch");
  HALS_CHECK(occupancy.size() == size_t(height) * width,
             "range image: occupancy buffer size mismatch");
  for (int v = 0; v < height; ++v) {
    for (int u = 0; u < width; ++u) {
      if (occupied(v, u)) {
        for (int c = 0; c < channel_countv(); ++c)
          HALS_CHECK(std::isfinite(at(c, v, u)),
                     "range image: non-finite channel value");
        if (mode != ChannelMode::Cartesian)
          HALS_CHECK(at(0, v, u) > 0.0f,
                     "range image: occupied bin with non-positive range");
      } else {
        for (int c = 0; c < channel_countv(); ++c)
          HALS_CHECK(at(c, v, u) == 0.0f,
                     "range image: empty bin with non-zero channel");
      }
    }
  }
}

static constexpr char kMagic[4] = {'H', 'A', 'L', 'S'};
static constexpr uint16_t kVersion = 1;

void save_range_image(const std::string& path, const RangeImage& img) {
  HALS_CHECK(img.height > 0 && img.width > 0, "save_range_image: empty image");
  std::ofstream os(path, std::ios::binary);
  HALS_CHECK(os.good(), "cannot write " + path);
  os.write(kMagic, 4);
  write_u16(os, kVersion);
  write_u32(os, uint32_t(img.height));
  write_u32(os, uint32_t(img.width));
  write_u32(os, uint32_t(img.channel_countv()));
  write_u8(os, uint8_t(img.mode));
  write_f32_array(os, img.channels.data(), img.channels.size());
  os.write(reinterpret_cast<const char*>(img.occupancy.data()),
           std::streamsize(img.occupancy.size()));
  HALS_CHECK(os.good(), "write failed: " + path);
}

RangeImage load_range_image(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  HALS_CHECK(is.good(), "cannot open " + path);
  char magic[4];
  is.read(magic, 4);
  HALS_CHECK(is.gcount() == 4 && std::equal(magic, magic + 4, kMagic),
             "not a HALS container: " + path);
  uint16_t version = read_u16(is);
  HALS_CHECK(version == kVersion, "unsupported container version");
  uint32_t h = read_u32(is);
  uint32_t w = read_u32(is);
  uint32_t c = read_u32(is);
  ChannelMode mode = ChannelMode(read_u8(is));
  HALS_CHECK(mode == ChannelMode::Spherical || mode == ChannelMode::Polar ||
                 mode == ChannelMode::Cartesian,
             "invalid channel mode in container");
  HALS_CHECK(c == uint32_t(channel_count(mode)),
             "channel count inconsistent with mode");
  HALS_CHECK(h > 0 && w > 0, "container with empty dimensions");
  RangeImage img(int(h), int(w), mode);
  read_f32_array(is, img.channels.data(), img.channels.size());
  is.read(reinterpret_cast<char*>(img.occupancy.data()),
          std::streamsize(img.occupancy.size()));
  HALS_CHECK(size_t(is.gcount()) == img.occupancy.size(),
             "truncated container: " + path);
  return img;
}

}  // namespace hals
