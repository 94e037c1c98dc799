#pragma once

#include "hals/range_image.hpp"

namespace hals {

// Bilinear row-interpolation baseline: standard image-resize convention
// (centers aligned), output row j samples the input at (j + 0.5) / rate -
// 0.5 with linear weights, clamped at the edges. Raw channel values are
// blended (zeros included); occupancy = non-zero leading channel.
//
// align_rows = true instead pins output row rate*i to input row i exactly
// (copy alignment) and interpolates only the rows in between.
RangeImage bilinear_upsample_rows(const RangeImage& lr, int rate,
                                  bool align_rows = false);

}  // namespace hals
