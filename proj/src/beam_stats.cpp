#include "hals/beam_stats.hpp"

#include <cmath>
#include <fstream>

#include "hals/projection.hpp"

namespace hals {

BeamStatsAccumulator::BeamStatsAccumulator(int rows)
    : count_(rows, 0), mean_(rows, 0.0), m2_(rows, 0.0), bins_per_row_(rows, 0) {}

void BeamStatsAccumulator::add(const RangeImage& image, const SensorModel& sensor) {
  if (count_.empty()) {
    count_.assign(image.height, 0);
    mean_.assign(image.height, 0.0);
    m2_.assign(image.height, 0.0);
    bins_per_row_.assign(image.height, 0);
  }
  if (width_ == 0) width_ = image.width;
  HALS_CHECK(image.height == (int)count_.size(),
             "beam stats: mixed image heights in dataset");
  HALS_CHECK(image.width == width_, "beam stats: mixed image widths in dataset");

  for (int v = 0; v < image.height; ++v) {
    bins_per_row_[v] += image.width;
    for (int u = 0; u < image.width; ++u) {
      if (!image.occupied(v, u)) continue;
      double r;
      switch (image.mode) {
        case ChannelMode::Spherical:
          r = image.at(0, v, u);
          break;
        case ChannelMode::Polar: {
          const double d = image.at(0, v, u);
          const double z = image.at(1, v, u);
          r = std::sqrt(d * d + z * z);
          break;
        }
        case ChannelMode::Cartesian: {
          const double x = image.at(0, v, u);
          const double y = image.at(1, v, u);
          const double z = image.at(2, v, u);
          r = std::sqrt(x * x + y * y + z * z);
          break;
        }
        default:
          fail("invalid channel mode");
      }
      // Welford update.
      ++count_[v];
      const double delta = r - mean_[v];
      mean_[v] += delta / double(count_[v]);
      m2_[v] += delta * (r - mean_[v]);
    }
  }
  ++frames_;
  (void)sensor;
}

void BeamStatsAccumulator::merge(const BeamStatsAccumulator& other) {
  if (other.count_.empty() || other.frames_ == 0) return;
  if (count_.empty() || frames_ == 0) {
    *this = other;
    return;
  }
  HALS_CHECK(count_.size() == other.count_.size(),
             "beam stats: mixed image heights in dataset");
  HALS_CHECK(width_ == other.width_, "beam stats: mixed image widths in dataset");
  for (size_t v = 0; v < count_.size(); ++v) {
    const long long na = count_[v], nb = other.count_[v];
    if (nb == 0) {
      bins_per_row_[v] += other.bins_per_row_[v];
      continue;
    }
    if (na == 0) {
      count_[v] = nb;
      mean_[v] = other.mean_[v];
      m2_[v] = other.m2_[v];
      bins_per_row_[v] += other.bins_per_row_[v];
      continue;
    }
    const double delta = other.mean_[v] - mean_[v];
    const long long n = na + nb;
    mean_[v] += delta * double(nb) / double(n);
    m2_[v] += other.m2_[v] + delta * delta * double(na) * double(nb) / double(n);
    count_[v] = n;
    bins_per_row_[v] += other.bins_per_row_[v];
  }
  frames_ += other.frames_;
}

BeamStats BeamStatsAccumulator::finalize() const {
  HALS_CHECK(frames_ > 0, "beam stats: empty dataset");
  BeamStats out;
  const size_t rows = count_.size();
  out.mean_range.resize(rows);
  out.std_range.resize(rows);
  out.occupied_fraction.resize(rows);
  out.frame_count = frames_;
  for (size_t v = 0; v < rows; ++v) {
    if (count_[v] == 0) {
      out.mean_range[v] = 0.0;
      out.std_range[v] = 0.0;
      out.occupied_fraction[v] = 0.0;
    } else {
      out.mean_range[v] = mean_[v];
      out.std_range[v] = std::sqrt(m2_[v] / double(count_[v]));  // population
      out.occupied_fraction[v] = double(count_[v]) / double(bins_per_row_[v]);
    }
  }
  return out;
}

BeamStats per_beam_stats(std::span<const RangeImage> dataset,
                         const SensorModel& sensor) {
  HALS_CHECK(!dataset.empty(), "per_beam_stats: empty dataset");
  for (const auto& img : dataset)
    HALS_CHECK(img.height == dataset[0].height && img.width == dataset[0].width,
               "per_beam_stats: mixed image dimensions");

  // Fixed chunk count and merge order: the result is independent of the
  // worker count, not just of scheduling.
  const int n = int(dataset.size());
  const int chunks = std::min(16, n);
  std::vector<BeamStatsAccumulator> partial(chunks,
                                            BeamStatsAccumulator(dataset[0].height));
#pragma omp parallel for schedule(static)
  for (int chunk = 0; chunk < chunks; ++chunk) {
    const int lo = int(size_t(chunk) * n / chunks);
    const int hi = int(size_t(chunk + 1) * n / chunks);
    for (int i = lo; i < hi; ++i) partial[chunk].add(dataset[i], sensor);
  }
  BeamStatsAccumulator total(dataset[0].height);
  for (const auto& acc : partial) total.merge(acc);
  return total.finalize();
}

double empty_bin_fraction(std::span<const RangeImage> dataset) {
  HALS_CHECK(!dataset.empty(), "empty_bin_fraction: empty dataset");
  long long empty = 0, total = 0;
  for (const auto& img : dataset) {
    total += (long long)img.height * img.width;
    empty += (long long)img.height * img.width - img.occupied_count();
  }
  return double(empty) / double(total);
}

void write_beam_stats_csv(const std::string& path, const BeamStats& stats) {
  std::ofstream os(path);
  HALS_CHECK(os.good(), "cannot write " + path);
  os << "# std_convention = population\n";
  os << "# frames = " << stats.frame_count << "\n";
  os << "row_index,mean_range,std_range,occupied_fraction\n";
  os.precision(10);
  for (size_t v = 0; v < stats.mean_range.size(); ++v)
    os << v << ',' << stats.mean_range[v] << ',' << stats.std_range[v] << ','
       << stats.occupied_fraction[v] << "\n";
  HALS_CHECK(os.good(), "write failed: " + path);
}

}  // namespace hals
