#pragma once

#include <span>
#include <string>
#include <vector>

#include "hals/range_image.hpp"
#include "hals/sensor.hpp"

namespace hals {

// Per-beam range statistics over a dataset of range images. Computed on the
// spherical range of occupied bins; rows with no occupied bin report
// mean = 0, std = 0, fraction = 0. Population standard deviation.
struct BeamStats {
  std::vector<double> mean_range;
  std::vector<double> std_range;
  std::vector<double> occupied_fraction;
  long long frame_count = 0;
};

// Single-pass (Welford) accumulator; partial accumulators merge
// associatively so frames can be processed in parallel.
class BeamStatsAccumulator {
 public:
  explicit BeamStatsAccumulator(int rows = 0);

  void add(const RangeImage& image, const SensorModel& sensor);
  void merge(const BeamStatsAccumulator& other);
  BeamStats finalize() const;

  int rows() const { return int(count_.size()); }
  long long frames() const { return frames_; }

 private:
  std::vector<long long> count_;
  std::vector<double> mean_;
  std::vector<double> m2_;
  std::vector<long long> bins_per_row_;
  long long frames_ = 0;
  int width_ = 0;
};

BeamStats per_beam_stats(std::span<const RangeImage> dataset,
                         const SensorModel& sensor);

// Empty bins divided by total bins across all frames.
double empty_bin_fraction(std::span<const RangeImage> dataset);

// CSV: row_index, mean_range, std_range, occupied_fraction (plus a comment
// header recording the std convention).
void write_beam_stats_csv(const std::string& path, const BeamStats& stats);

}  // namespace hals
