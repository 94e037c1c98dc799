#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "hals/common.hpp"

namespace hals {

// Per-bin channel layout of a range image.
//   Spherical: (r)        spherical range
//   Polar:     (d, z)     radial distance and height
//   Cartesian: (x, y, z)
enum class ChannelMode : uint8_t { Spherical = 0, Polar = 1, Cartesian = 2 };

inline int channel_count(ChannelMode m) {
  switch (m) {
    case ChannelMode::Spherical: return 1;
    case ChannelMode::Polar: return 2;
    case ChannelMode::Cartesian: return 3;
  }
  fail("invalid channel mode");
}

const char* channel_mode_name(ChannelMode m);
ChannelMode channel_mode_from_name(const std::string& name);

// H x W grid of float32 channel values plus an occupancy mask. Non-occupied
// bins hold exactly zero in every channel. Channels are stored planar:
// channel c, then row v, then column u.
struct RangeImage {
  int height = 0;
  int width = 0;
  ChannelMode mode = ChannelMode::Spherical;
  std::vector<float> channels;    // size = C * H * W
  std::vector<uint8_t> occupancy; // size = H * W, 1 = occupied

  RangeImage() = default;
  RangeImage(int h, int w, ChannelMode m)
      : height(h), width(w), mode(m),
        channels(size_t(channel_count(m)) * h * w, 0.0f),
        occupancy(size_t(h) * w, 0) {}

  int channel_countv() const { return channel_count(mode); }
  size_t bin_index(int v, int u) const { return size_t(v) * width + u; }
  size_t channel_index(int c, int v, int u) const {
    return (size_t(c) * height + v) * width + u;
  }

  float at(int c, int v, int u) const { return channels[channel_index(c, v, u)]; }
  float& at(int c, int v, int u) { return channels[channel_index(c, v, u)]; }
  bool occupied(int v, int u) const { return occupancy[bin_index(v, u)] != 0; }

  void set_bin(int v, int u, const float* values) {
    for (int c = 0; c < channel_countv(); ++c) at(c, v, u) = values[c];
    occupancy[bin_index(v, u)] = 1;
  }
  void clear_bin(int v, int u) {
    for (int c = 0; c < channel_countv(); ++c) at(c, v, u) = 0.0f;
    occupancy[bin_index(v, u)] = 0;
  }

  long long occupied_count() const {
    long long n = 0;
    for (uint8_t o : occupancy) n += o ? 1 : 0;
    return n;
  }

  bool same_shape(const RangeImage& o) const {
    return height == o.height && width == o.width && mode == o.mode;
  }

  // Enforces the container invariants (empty bins all-zero, occupied bins
  // with positive leading range channel where applicable).
  void validate() const;
};

// HALS container: magic "HALS", version u16, H/W/C u32, channel_mode u8,
// float32 channel planes, then H*W occupancy bytes. Little-endian,
// bit-exact round trip.
void save_range_image(const std::string& path, const RangeImage& img);
RangeImage load_range_image(const std::string& path);

}  // namespace hals
