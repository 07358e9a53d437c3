#include "histmle/metrics.hpp"

#include <algorithm>
#include <cmath>

namespace histmle {

double rms_contrast(const IntensityField& field) {
  const auto values = field.values();
  const auto n = static_cast<double>(values.size());
  // Shift by the first sample so constant fields give exactly zero.
  const double pivot = values.front();
  double mean = 0.0;
  for (double v : values) mean += v - pivot;
  mean /= n;
  double ss = 0.0;
  for (double v : values) ss += (v - pivot - mean) * (v - pivot - mean);
  return std::sqrt(ss / n);
}

std::optional<double> michelson_contrast(const IntensityField& field) {
  const auto [lo, hi] = std::minmax_element(field.values().begin(), field.values().end());
  if (*hi + *lo == 0.0) return std::nullopt;
  return (*hi - *lo) / (*hi + *lo);
}

double shannon_entropy(const Histogram& hist) {
  const auto n = static_cast<double>(hist.total());
  double bits = 0.0;
  for (std::uint64_t c : hist.counts()) {
    if (c == 0) continue;
    const double p = static_cast<double>(c) / n;
    bits -= p * std::log2(p);
  }
  return bits;
}

MetricRecord compute_metrics(const GrayImage& image) {
  const IntensityField field = normalize(image);
  const auto [lo, hi] = std::minmax_element(image.levels().begin(), image.levels().end());
  return MetricRecord{rms_contrast(field), michelson_contrast(field), shannon_entropy(level_histogram(image)), *lo,
                      *hi};
}

}  // namespace histmle
