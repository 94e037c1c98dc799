#include "hals/baseline.hpp"

#include <algorithm>
#include <cmath>

namespace hals {

RangeImage bilinear_upsample_rows(const RangeImage& lr, int rate, bool align_rows) {
  HALS_CHECK(rate >= 2, "bilinear_upsample_rows: rate must be >= 2");
  RangeImage out(lr.height * rate, lr.width, lr.mode);
  const int C = lr.channel_countv();
  for (int j = 0; j < out.height; ++j) {
    double src;
    if (align_rows) {
      src = double(j) / rate;  // row rate*i lands exactly on input row i
    } else {
      src = (j + 0.5) / rate - 0.5;  // centers-aligned resize
    }
    src = std::clamp(src, 0.0, double(lr.height - 1));
    const int i0 = int(src);
    const int i1 = std::min(i0 + 1, lr.height - 1);
    const float t = float(src - i0);
    for (int u = 0; u < lr.width; ++u) {
      for (int c = 0; c < C; ++c)
        out.at(c, j, u) = (1.0f - t) * lr.at(c, i0, u) + t * lr.at(c, i1, u);
      out.occupancy[out.bin_index(j, u)] = out.at(0, j, u) != 0.0f ? 1 : 0;
      if (!out.occupancy[out.bin_index(j, u)])
        for (int c = 0; c < C; ++c) out.at(c, j, u) = 0.0f;
    }
  }
  return out;
}

}  // namespace hals
