#pragma once

#include <cstdint>

namespace hals {

// Finite-difference verification entry points (double-precision mode).
// Each returns the maximum relative gradient error across all checks; the
// CLI and the acceptance suite compare against the 1e-4 gate.
struct GradCheckSummary {
  double max_err = 0;
  int checks = 0;
  long long elements_checked = 0;
  long long elements_skipped = 0;  // finite differences crossing a kink
};

// Every tape operator on randomized small shapes, `seeds` rounds each.
GradCheckSummary gradcheck_ops(int seeds = 20);

// Toy generator end-to-end (C=2, F=8, 4 blocks, split 2, H=4, W=8, s=2).
// full_first_seed checks every parameter element on the first seed and a
// seeded subset on the rest.
GradCheckSummary gradcheck_generator(int seeds = 3, bool full_first_seed = true,
                                     int subset_elements = 40);

// Combined L1 + surface-normal loss through de-normalization, polar
// inversion and cross products, on the toy generator and on a raw
// prediction tensor.
GradCheckSummary gradcheck_loss(int seeds = 20);

}  // namespace hals
